"""Steady-state distribution of the continuous state component.

The continuous component of a node's steady state is u = a_k mu w, where
w is the geometric sum of the node's own i.i.d. statistics with memory
factor eta = (1-mu) a_k. Its log-characteristic function satisfies the
functional equation Phi_w(t) - Phi_w(eta t) = Phi_x(t) and expands as
Phi_w(t) = sum_n phi_n t^n / (1 - eta^n) inside the radius of Phi_x.

The CDF is recovered by a sine-series inversion

    F_u(u) = 1/2 - (2/pi) sum_{n>=0} Im{exp[Phi_w(t_n) - j (u/(mu a_k)) t_n]} / (2n+1),

with t_n = (2n+1) delta/2. The grid step delta is chosen from tail bounds
so that the aliasing error stays below a prescribed budget eps_prime; the
inner coefficient series is truncated at m_bar with eta^m_bar <= eps_dprime.

Two evaluation modes are provided. ``strict`` truncates the outer sum at
n_bar = floor(tau/(eta delta) - 1), the largest index for which the inner
power series of Phi_w(eta t) still converges; the neglected outer tail is
checked numerically and can be non-negligible when the characteristic
function has not yet decayed at the radius boundary. ``auto`` (default)
continues the same series past n_bar, evaluating Phi_w by iterating the
functional equation Phi_w(t) = Phi_x(t) + Phi_w(eta t) until the argument
falls inside the radius, and stops once the residual tail is below the
budget.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import ceil, floor, log, pi, sqrt

import numpy as np
from scipy.stats import norm

from .models import GaussianModel, ObservationModel
from .network import NodeParams

DEFAULT_EPS_PRIME = 2e-5
DEFAULT_EPS_DPRIME = 2e-5

# power-series arguments are kept below this fraction of the radius when
# evaluating Phi_w by functional-equation folding
_SERIES_ARG_FRACTION = 0.5
_MIN_SERIES_TERMS = 40
_TAIL_BLOCK = 512
_MAX_TERMS = 4_000_000


class InversionError(RuntimeError):
    """Numerical failure while inverting the log-characteristic function."""


class DeltaSelectionError(InversionError):
    """No valid inversion step for the requested point and budget."""


@dataclass(frozen=True)
class ContinuousMoments:
    """Mean, variance, and dispersion index of the continuous component."""

    mean: float
    variance: float
    dispersion: float


def moments(model: ObservationModel, node: NodeParams, h: int) -> ContinuousMoments:
    """Closed-form steady-state moments of u = a_k mu w.

    mean = a_k mu E_h x / (1 - eta), variance = a_k^2 mu^2 V_h x / (1 - eta^2);
    the dispersion index sqrt(V)/|E| shrinks like sqrt((1-eta)/(1+eta)).
    """
    if node.eta >= 1.0:
        raise ValueError("eta must be below 1; use the gaussian-limit mode instead")
    s = node.a_k * node.mu
    mean = s * model.mean(h) / (1.0 - node.eta)
    variance = s * s * model.variance(h) / (1.0 - node.eta ** 2)
    ex = model.mean(h)
    if ex != 0.0:
        dispersion = sqrt(model.variance(h)) / abs(ex) * sqrt(
            (1.0 - node.eta) / (1.0 + node.eta))
    else:
        dispersion = np.inf
    return ContinuousMoments(mean=mean, variance=variance, dispersion=dispersion)


def phi_w_coefficients(model: ObservationModel, node: NodeParams, h: int,
                       m_bar: int) -> np.ndarray:
    """First m_bar power-series coefficients of Phi_w: phi_n / (1 - eta^n)."""
    if m_bar < 1:
        raise ValueError("m_bar must be at least 1")
    n = np.arange(1, m_bar + 1)
    return model.phi_coeffs(m_bar, h) / (1.0 - node.eta ** n)


def default_m_bar(eta: float, eps_dprime: float) -> int:
    """Inner truncation index from the empirical criterion eta^m <= eps''."""
    return max(1, ceil(log(eps_dprime) / log(eta)))


def select_delta(model: ObservationModel, node: NodeParams, h: int, u: float,
                 eps_prime: float = DEFAULT_EPS_PRIME) -> float:
    """Inversion step delta placing both distribution tails outside the
    aliasing window [u - 2 pi a mu / delta, u + 2 pi a mu / delta].

    The upper tail is bounded by Chebyshev's inequality. The lower tail
    uses the support bound when the statistic is bounded below (the window
    edge is pushed below the support infimum); for two-sided unbounded
    models a symmetric Chebyshev bound is applied instead.
    """
    if eps_prime <= 0:
        raise ValueError("eps_prime must be positive")
    mom = moments(model, node, h)
    amu = node.a_k * node.mu
    spread = sqrt(2.0 * mom.variance / eps_prime)
    den_hi = spread + mom.mean - u
    if den_hi <= 0:
        raise DeltaSelectionError(
            f"evaluation point u={u} is beyond the upper Chebyshev window; "
            "widen eps_prime or use the moment bound directly")
    d_hi = 2.0 * pi * amu / den_hi
    lo = model.support_lower(h)
    if np.isfinite(lo):
        u_min = amu * lo / (1.0 - node.eta)
        if u <= u_min:
            return d_hi
        return min(2.0 * pi * amu / (u - u_min), d_hi)
    den_lo = spread - mom.mean + u
    if den_lo <= 0:
        return d_hi
    return min(2.0 * pi * amu / den_lo, d_hi)


@dataclass(frozen=True)
class InversionPlan:
    """Resolved truncation parameters for one evaluation point."""

    delta: float
    n_bar: int | None  # outer index cap imposed by a finite radius
    m_bar: int


def inversion_plan(model: ObservationModel, node: NodeParams, h: int, u: float,
                   eps_prime: float = DEFAULT_EPS_PRIME,
                   eps_dprime: float = DEFAULT_EPS_DPRIME) -> InversionPlan:
    delta = select_delta(model, node, h, u, eps_prime)
    tau = model.radius(h)
    n_bar = None
    if np.isfinite(tau):
        n_bar = floor(tau / (node.eta * delta) - 1.0)
        if n_bar < 0:
            raise DeltaSelectionError(
                "no admissible outer term: the radius bound tau/(eta delta) is "
                "below 1; reduce eps_prime or evaluate closer to the bulk")
    return InversionPlan(delta=delta, n_bar=n_bar, m_bar=default_m_bar(node.eta, eps_dprime))


def log_cf_w(model: ObservationModel, node: NodeParams, h: int, t,
             series_terms: int | None = None) -> np.ndarray:
    """Phi_w evaluated at real t >= 0 of any size.

    Arguments beyond a safe fraction of the radius are folded down with
    Phi_w(t) = Phi_x(t) + Phi_w(eta t); the remaining small argument uses
    the power series with enough terms for budget-level accuracy.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    eta = node.eta
    tau = model.radius(h)
    acc = np.zeros(t.shape, dtype=complex)
    t_cur = t.astype(float).copy()
    if np.isfinite(tau):
        thr = _SERIES_ARG_FRACTION * tau
        while True:
            mask = t_cur > thr
            if not mask.any():
                break
            acc[mask] += model.log_cf(t_cur[mask], h)
            t_cur[mask] *= eta
    m_terms = series_terms if series_terms is not None else max(
        _MIN_SERIES_TERMS, default_m_bar(eta, DEFAULT_EPS_DPRIME))
    m = np.arange(1, m_terms + 1)
    coef = model.phi_coeffs(m_terms, h) / (1.0 - eta ** m)
    acc += (t_cur[:, None] ** m[None, :] * coef[None, :]).sum(axis=1)
    return acc


def _omega_terms(model, node, h, u, delta, n_lo, n_hi, m_bar=None, strict=False):
    """Series terms Im{exp[...]}/(2n+1) for n in [n_lo, n_hi)."""
    n = np.arange(n_lo, n_hi)
    t = (2 * n + 1) * (delta / 2.0)
    eta = node.eta
    if strict:
        m = np.arange(1, m_bar + 1)
        coef = model.phi_coeffs(m_bar, h) * eta ** m / (1.0 - eta ** m)
        inner = (t[:, None] ** m[None, :] * coef[None, :]).sum(axis=1)
        exponent = model.log_cf(t, h) + inner
    else:
        exponent = log_cf_w(model, node, h, t)
    exponent = exponent - 1j * (u / (node.mu * node.a_k)) * t
    vals = np.exp(exponent)
    if not np.all(np.isfinite(vals)):
        raise InversionError(
            "non-finite term in the inversion series (coefficient overflow "
            "near the radius); reduce delta")
    return np.imag(vals) / (2 * n + 1)


def cdf_u(u: float, model: ObservationModel, node: NodeParams, h: int,
          eps_prime: float = DEFAULT_EPS_PRIME,
          eps_dprime: float = DEFAULT_EPS_DPRIME,
          strict: bool = False) -> float:
    """CDF of the steady-state continuous component at u, clamped to [0,1].

    Requires eta in (0,1) and an absolutely continuous limit (true for any
    model whose statistic has a density). With ``strict=True`` the outer
    sum stops at the radius-imposed cap n_bar and a diagnostic is emitted
    when the last retained terms indicate a non-negligible neglected tail.
    """
    if not 0.0 < node.eta < 1.0:
        raise ValueError(f"eta must be in (0,1), got {node.eta}")
    mom = moments(model, node, h)
    spread = sqrt(2.0 * mom.variance / eps_prime)
    # Chebyshev tail shortcuts; also the only admissible answer when the
    # window cannot be placed.
    if u >= mom.mean + spread:
        return 1.0
    lo = model.support_lower(h)
    if np.isfinite(lo):
        if u <= node.a_k * node.mu * lo / (1.0 - node.eta):
            return 0.0
    elif u <= mom.mean - spread:
        return 0.0
    plan = inversion_plan(model, node, h, u, eps_prime, eps_dprime)
    delta = plan.delta
    if strict:
        if plan.n_bar is None:
            raise ValueError("strict truncation needs a finite series radius")
        terms = _omega_terms(model, node, h, u, delta, 0, plan.n_bar + 1,
                             m_bar=plan.m_bar, strict=True)
        tail_probe = np.abs(terms[-10:]).sum() * (2.0 / pi)
        if terms.size >= 10 and tail_probe > eps_prime / 10.0:
            warnings.warn(
                f"inversion tail check failed at u={u}: last 10 terms sum to "
                f"{tail_probe:.2e} > eps_prime/10; the radius-capped series is "
                "not converged (use the default mode)", RuntimeWarning)
        total = terms.sum()
    else:
        total = 0.0
        n0 = 0
        while True:
            terms = _omega_terms(model, node, h, u, delta, n0, n0 + _TAIL_BLOCK)
            total += terms.sum()
            if np.abs(terms).sum() * (2.0 / pi) < eps_prime / 20.0:
                break
            n0 += _TAIL_BLOCK
            if n0 >= _MAX_TERMS:
                raise InversionError(
                    f"inversion series did not settle within {_MAX_TERMS} terms")
    raw = 0.5 - (2.0 / pi) * total
    return float(min(1.0, max(0.0, raw)))


def cdf_u_gaussian_closed(u, model: ObservationModel, node: NodeParams, h: int):
    """Exact CDF for the Gaussian model: the geometric sum of Gaussians is
    Gaussian with the closed-form steady-state moments."""
    if not isinstance(model, GaussianModel):
        raise TypeError("closed form only applies to the Gaussian model")
    mom = moments(model, node, h)
    return norm.cdf(u, loc=mom.mean, scale=sqrt(mom.variance))


@dataclass(frozen=True, eq=False)
class ContinuousCdfTable:
    """Monotone tabulation of F_u with linear interpolation.

    Queries below/above the grid return 0/1; the builder verifies that the
    grid edges already carry negligible tail mass, so out-of-range queries
    are exact to the tabulation budget.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape:
            raise ValueError("grid and values must be matching 1-D arrays")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __call__(self, u):
        return np.interp(np.asarray(u, dtype=float), self.grid, self.values,
                         left=0.0, right=1.0)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])


def tabulate_cdf_u(model: ObservationModel, node: NodeParams, h: int,
                   grid=None, n_points: int = 1501,
                   span_stds: float = 12.0,
                   eps_prime: float = DEFAULT_EPS_PRIME,
                   eps_dprime: float = DEFAULT_EPS_DPRIME,
                   method: str = "auto") -> ContinuousCdfTable:
    """Tabulate F_u on a grid, enforce monotonicity, and wrap for reuse.

    ``method``: "auto" picks the Gaussian closed form when available and
    the series inversion otherwise; "series"/"closed" force the path. The
    step delta is re-derived at every grid point. Raw values are clamped to
    [0,1] and made nondecreasing by a cumulative-max pass; violations
    beyond 5 eps_prime raise a diagnostic warning.
    """
    mom = moments(model, node, h)
    sd = sqrt(mom.variance)
    if grid is None:
        lo = mom.mean - span_stds * sd
        hi = mom.mean + span_stds * sd
        support_lo = model.support_lower(h)
        if np.isfinite(support_lo):
            u_min = node.a_k * node.mu * support_lo / (1.0 - node.eta)
            lo = max(lo, u_min - 2.0 * sd / max(n_points - 1, 1))
        for _ in range(6):
            grid = np.linspace(lo, hi, n_points)
            if _edge_ok(model, node, h, lo, hi, eps_prime, method):
                break
            lo -= 4.0 * sd
            hi += 4.0 * sd
        else:
            warnings.warn("tabulation range extension did not converge",
                          RuntimeWarning)
            grid = np.linspace(lo, hi, n_points)
    else:
        grid = np.asarray(grid, dtype=float)
    use_closed = method == "closed" or (method == "auto"
                                        and isinstance(model, GaussianModel))
    if use_closed:
        raw = np.asarray(cdf_u_gaussian_closed(grid, model, node, h))
    else:
        raw = np.array([cdf_u(u, model, node, h, eps_prime, eps_dprime)
                        for u in grid])
    drops = np.diff(raw)
    worst = -drops.min() if drops.size else 0.0
    if worst > 5.0 * eps_prime:
        warnings.warn(
            f"tabulated CDF decreases by {worst:.2e} (> 5 eps_prime); "
            "truncation ripple exceeds budget", RuntimeWarning)
    vals = np.minimum(1.0, np.maximum(0.0, np.maximum.accumulate(raw)))
    return ContinuousCdfTable(grid=grid, values=vals)


def _edge_ok(model, node, h, lo, hi, eps_prime, method):
    if method == "closed" or (method == "auto" and isinstance(model, GaussianModel)):
        f_lo = float(cdf_u_gaussian_closed(lo, model, node, h))
        f_hi = float(cdf_u_gaussian_closed(hi, model, node, h))
    else:
        f_lo = cdf_u(lo, model, node, h, eps_prime)
        f_hi = cdf_u(hi, model, node, h, eps_prime)
    return f_lo <= 2.0 * eps_prime and f_hi >= 1.0 - 2.0 * eps_prime
