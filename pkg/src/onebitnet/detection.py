"""System-level detection metrics: P_f, P_d, threshold calibration, ROC.

The steady-state test compares the node state against a threshold gamma;
P_f = 1 - F_0(gamma) and P_d = 1 - F_1(gamma) follow directly from the
steady-state CDFs. Sweeping gamma traces the ROC. Mixture CDFs have
plateaus, so the ROC may be non-concave and an exact false-alarm target is
not always attainable; deterministic thresholds only, no randomization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_GRID_POINTS = 241
DEFAULT_SPAN_STDS = 6.0
_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Operating points (P_f, P_d) with their generating thresholds."""

    gammas: np.ndarray
    pf: np.ndarray
    pd: np.ndarray
    node: int | None = None
    source: str = "analytical"

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        pf = np.asarray(self.pf, dtype=float)
        pd = np.asarray(self.pd, dtype=float)
        if not (g.shape == pf.shape == pd.shape) or g.ndim != 1:
            raise ValueError("gammas, pf, pd must be matching 1-D arrays")
        if np.any(np.diff(g) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        for name, arr in (("pf", pf), ("pd", pd)):
            if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
                raise ValueError(f"{name} outside [0,1]")
            if np.any(np.diff(arr) > _MONOTONE_SLACK):
                raise ValueError(f"{name} must be nonincreasing in gamma")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "pf", np.clip(pf, 0.0, 1.0))
        object.__setattr__(self, "pd", np.clip(pd, 0.0, 1.0))

    def pd_at_pf(self, pf_query) -> np.ndarray:
        """Upper-envelope detection probability at given false-alarm levels.

        Where the false-alarm probability plateaus (CDF jumps), several
        thresholds share one P_f; the largest attainable P_d is reported.
        """
        pf_query = np.asarray(pf_query, dtype=float)
        order = np.argsort(self.pf, kind="stable")
        pf_sorted = self.pf[order]
        pd_sorted = np.maximum.accumulate(self.pd[order])
        uniq, idx = np.unique(pf_sorted[::-1], return_index=True)
        # keep the max pd per unique pf
        pd_max = pd_sorted[::-1][idx]
        return np.interp(pf_query, uniq, pd_max)


def pf_pd(cdf0, cdf1, gamma: float) -> tuple[float, float]:
    """(P_f, P_d) of the threshold test at gamma."""
    return 1.0 - float(cdf0(gamma)), 1.0 - float(cdf1(gamma))


def threshold_for_pf(cdf0, target_pf: float, gammas) -> tuple[float, float]:
    """Smallest grid threshold whose false-alarm rate is at most target.

    Returns (gamma_star, achieved_pf); with jumpy CDFs the achieved value
    can undershoot the target, so both are reported. Raises when even the
    largest threshold exceeds the target (grid too narrow).
    """
    if not 0.0 < target_pf < 1.0:
        raise ValueError("target_pf must be in (0,1)")
    gammas = np.asarray(gammas, dtype=float)
    pf = 1.0 - np.asarray(cdf0(gammas), dtype=float)
    ok = np.nonzero(pf <= target_pf)[0]
    if ok.size == 0:
        raise ValueError(
            f"false-alarm target {target_pf} unreachable on the grid "
            f"(min achievable {pf.min():.4g}); extend the threshold grid")
    i = ok[0]
    return float(gammas[i]), float(pf[i])


def roc(cdf0, cdf1, gammas, node: int | None = None,
        source: str = "analytical") -> RocCurve:
    """Sweep thresholds over a grid and collect (P_f, P_d) pairs."""
    gammas = np.asarray(gammas, dtype=float)
    pf = 1.0 - np.asarray(cdf0(gammas), dtype=float)
    pd = 1.0 - np.asarray(cdf1(gammas), dtype=float)
    return RocCurve(gammas=gammas, pf=pf, pd=pd, node=node, source=source)


def empirical_roc(samples0, samples1, gammas, node: int | None = None) -> RocCurve:
    """ROC estimated from terminal-state ensembles under both hypotheses."""
    gammas = np.asarray(gammas, dtype=float)
    s0 = np.sort(np.asarray(samples0, dtype=float))
    s1 = np.sort(np.asarray(samples1, dtype=float))
    pf = 1.0 - np.searchsorted(s0, gammas, side="right") / len(s0)
    pd = 1.0 - np.searchsorted(s1, gammas, side="right") / len(s1)
    return RocCurve(gammas=gammas, pf=pf, pd=pd, node=node, source="empirical")


def default_gamma_grid(cdf0, cdf1, points: int = DEFAULT_GRID_POINTS,
                       span_stds: float = DEFAULT_SPAN_STDS,
                       eps: float = 2e-5) -> np.ndarray:
    """Threshold grid covering both distributions.

    Union of uniform grids over mean +/- span stds per hypothesis plus the
    discrete support points (shifted by the continuous mean) with small
    offsets, which captures plateau edges exactly where the mixture CDF
    jumps. The range is extended until both tails are below eps.
    """
    pieces = []
    for cdf in (cdf0, cdf1):
        m, s = cdf.mean(), cdf.std()
        lo, hi = m - span_stds * s, m + span_stds * s
        for _ in range(40):
            if float(cdf(lo)) <= eps:
                break
            lo -= s
        for _ in range(40):
            if float(cdf(hi)) >= 1.0 - eps:
                break
            hi += s
        pieces.append(np.linspace(lo, hi, points))
        pmf = getattr(cdf, "pmf", None)
        table = getattr(cdf, "cont", None)
        if pmf is not None and table is not None:
            mid = 0.5 * (table.grid[:-1] + table.grid[1:])
            w = np.diff(table.values)
            w = w / w.sum()
            cont_mean = float(mid @ w)
            cont_std = float(np.sqrt(((mid - cont_mean) ** 2) @ w))
            offs = np.array([-4.0, -2.0, 0.0, 2.0, 4.0]) * max(cont_std, 1e-12)
            pieces.append((pmf.points[:, None] + cont_mean + offs[None, :]).ravel())
    grid = np.unique(np.concatenate(pieces))
    return grid
