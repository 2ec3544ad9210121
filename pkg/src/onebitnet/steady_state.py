"""Full steady-state CDF of a node's decision state.

The steady state is the sum of the continuous component (the node's own
geometrically weighted statistics) and the discrete component (its
neighbors' one-bit messages), so its CDF is the PMF-weighted mixture

    F_y(y) = sum_i nu_i F_u(y - z_i).

When the memory factor eta = (1-mu) a_k approaches one (vanishing step
size AND dominant self-weight), both components degenerate and the
standardized state is asymptotically standard normal instead; that regime
is served by closed-form limit moments and a normal CDF. A small step
size alone does not produce normality, so mode selection requires both
eta and a_k to be large.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy.stats import norm

from .continuous import (ContinuousCdfTable, DEFAULT_EPS_DPRIME,
                         DEFAULT_EPS_PRIME, moments, tabulate_cdf_u)
from .discrete import DEFAULT_EPS_SCALE, DiscretePmf, discrete_component
from .models import ObservationModel
from .network import NetworkSpec, NodeParams
from .network import offdiag_square_sum

MODE_MIXTURE = "mixture"
MODE_GAUSSIAN_LIMIT = "gaussian_limit"

DEFAULT_ETA_THRESHOLD = 0.97
DEFAULT_A_THRESHOLD = 0.95


def message_moments(model: ObservationModel, h: int) -> tuple[float, float]:
    """Mean and variance of the one-bit message under hypothesis h."""
    e0, e1 = model.message_values()
    p = model.p_d if h == 1 else model.p_f
    mean = p * e1 + (1.0 - p) * e0
    var = p * (1.0 - p) * (e1 - e0) ** 2
    return mean, var


def limit_moments(model: ObservationModel, network: NetworkSpec, k: int,
                  h: int, mu: float) -> tuple[float, float]:
    """Steady-state mean and standard deviation of the node state.

    m = [mu a_k E_h x + (1 - a_k) E_h xt] / (1 - eta)
    s^2 = [mu^2 a_k^2 V_h x + V_h xt * sum_{l != k} a_kl^2] / (1 - eta^2)

    where xt is the one-bit message. These are exact for any eta < 1 and
    are the centering/scaling of the near-unity-eta normal limit.
    """
    node = network.node_params(k, mu)
    if node.eta >= 1.0:
        raise ValueError("eta must be below 1")
    em, ev = message_moments(model, h)
    a_k = node.a_k
    m = (mu * a_k * model.mean(h) + (1.0 - a_k) * em) / (1.0 - node.eta)
    s2 = (mu ** 2 * a_k ** 2 * model.variance(h)
          + ev * offdiag_square_sum(network, k)) / (1.0 - node.eta ** 2)
    if s2 <= 0:
        raise ValueError("degenerate steady state: zero variance")
    return m, sqrt(s2)


def gaussian_limit_cdf(y, m_inf: float, s_inf: float):
    """Normal CDF with the limit moments (the eta -> 1 regime)."""
    if s_inf <= 0:
        raise ValueError("s_inf must be positive")
    return norm.cdf(np.asarray(y, dtype=float), loc=m_inf, scale=s_inf)


def select_mode(node: NodeParams, eta_threshold: float = DEFAULT_ETA_THRESHOLD,
                a_threshold: float = DEFAULT_A_THRESHOLD) -> str:
    """Choose mixture vs gaussian-limit evaluation.

    The normal limit needs eta -> 1, which requires both a small step size
    and a dominant self-weight; a tiny mu with moderate a_k stays in
    mixture mode.
    """
    if node.eta >= eta_threshold and node.a_k >= a_threshold:
        return MODE_GAUSSIAN_LIMIT
    return MODE_MIXTURE


def mixture_cdf(y, pmf: DiscretePmf, cont_cdf) -> np.ndarray:
    """Evaluate sum_i nu_i F_u(y - z_i) (vectorized over y)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    shifted = y[:, None] - pmf.points[None, :]
    # clip: the weighted sum can exceed 1 by float-accumulation noise
    return np.clip(np.asarray(cont_cdf(shifted)) @ pmf.probs, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class SteadyStateCdf:
    """Evaluable CDF of the steady-state node state under one hypothesis."""

    node: int
    h: int
    mode: str
    pmf: DiscretePmf | None = None
    cont: ContinuousCdfTable | None = None
    m_inf: float | None = None
    s_inf: float | None = None

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        scalar = y.ndim == 0
        if self.mode == MODE_GAUSSIAN_LIMIT:
            out = gaussian_limit_cdf(y, self.m_inf, self.s_inf)
        else:
            out = mixture_cdf(y.ravel(), self.pmf, self.cont)
        return float(np.asarray(out).reshape(-1)[0]) if scalar \
            else np.reshape(out, y.shape)

    def mean(self) -> float:
        if self.mode == MODE_GAUSSIAN_LIMIT:
            return self.m_inf
        mid = 0.5 * (self.cont.grid[:-1] + self.cont.grid[1:])
        w = np.diff(self.cont.values)
        return float(mid @ w / w.sum()) + self.pmf.mean()

    def std(self) -> float:
        if self.mode == MODE_GAUSSIAN_LIMIT:
            return self.s_inf
        mid = 0.5 * (self.cont.grid[:-1] + self.cont.grid[1:])
        w = np.diff(self.cont.values)
        w = w / w.sum()
        mu_c = float(mid @ w)
        var_c = float(((mid - mu_c) ** 2) @ w)
        return sqrt(var_c + self.pmf.variance())


def build_steady_state(model: ObservationModel, network: NetworkSpec, k: int,
                       h: int, mu: float, *,
                       eps_prime: float = DEFAULT_EPS_PRIME,
                       eps_dprime: float = DEFAULT_EPS_DPRIME,
                       eps_scale: float = DEFAULT_EPS_SCALE,
                       order: str = "second",
                       value_rule: str = "class_mean",
                       eta_threshold: float = DEFAULT_ETA_THRESHOLD,
                       a_threshold: float = DEFAULT_A_THRESHOLD,
                       cont_points: int = 1501,
                       mode: str | None = None) -> SteadyStateCdf:
    """Construct the analytical steady-state CDF for node k under h.

    In mixture mode the continuous CDF is tabulated once and reused across
    all PMF shifts. ``mode`` forces a specific evaluation mode; by default
    it is selected from the node's eta and self-weight.
    """
    node = network.node_params(k, mu)
    if mode is None:
        mode = select_mode(node, eta_threshold, a_threshold)
    if mode == MODE_GAUSSIAN_LIMIT:
        m, s = limit_moments(model, network, k, h, mu)
        return SteadyStateCdf(node=k, h=h, mode=mode, m_inf=m, s_inf=s)
    mom = moments(model, node, h)
    eps_kh = eps_scale * sqrt(mom.variance)
    pmf = discrete_component(model, network, k, h, eps_kh=eps_kh, order=order,
                             node=node, value_rule=value_rule)
    table = tabulate_cdf_u(model, node, h, n_points=cont_points,
                           eps_prime=eps_prime, eps_dprime=eps_dprime)
    return SteadyStateCdf(node=k, h=h, mode=mode, pmf=pmf, cont=table)


def steady_state_pair(model: ObservationModel, network: NetworkSpec, k: int,
                      mu: float, **kwargs) -> tuple[SteadyStateCdf, SteadyStateCdf]:
    """CDFs under both hypotheses (h=0, h=1) for one node."""
    return (build_steady_state(model, network, k, 0, mu, **kwargs),
            build_steady_state(model, network, k, 1, mu, **kwargs))
