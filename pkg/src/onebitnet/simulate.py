"""Monte Carlo engine for the diffusion recursions.

Three schemes are simulated:

* ``one_bit_x`` - adapt with the fresh statistic, then combine the
  self-term with neighbors' one-bit quantized fresh statistics;
* ``quantized_state`` - neighbors receive the one-bit quantized
  intermediate state instead (comparison baseline with sluggish reaction);
* ``unquantized`` - classical diffusion where full-precision intermediate
  states are exchanged.

Each trial draws its statistics from a counter-based Philox stream keyed
by (master seed, trial index), so results are bit-identical regardless of
execution order or chunking; trials are the natural unit of parallel work.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models import ObservationModel, quantize_array
from .network import NetworkSpec

ONE_BIT_X = "one_bit_x"
QUANTIZED_STATE = "quantized_state"
UNQUANTIZED = "unquantized"
SCHEMES = (ONE_BIT_X, QUANTIZED_STATE, UNQUANTIZED)

# target in-memory draw block: trials per chunk chosen so that the
# (chunk, n_iters, S) array stays near this many doubles
_CHUNK_BUDGET = 25_000_000


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run description.

    ``schedule`` is a tuple of (start_step, hypothesis) segments, ordered,
    with the first segment starting at step 1; each segment applies until
    the next one begins.
    """

    network: NetworkSpec
    model: ObservationModel
    mu: float
    n_iters: int
    trials: int
    scheme: str = ONE_BIT_X
    schedule: tuple[tuple[int, int], ...] = ((1, 0),)
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.n_iters < 1 or self.trials < 1:
            raise ValueError("n_iters and trials must be at least 1")
        if not 0 < self.mu < 1:
            raise ValueError("mu must be in (0,1)")
        sched = tuple((int(s), int(h)) for s, h in self.schedule)
        if not sched or sched[0][0] != 1:
            raise ValueError("schedule must start at step 1")
        starts = [s for s, _ in sched]
        if sorted(starts) != starts or len(set(starts)) != len(starts):
            raise ValueError("schedule segments must have increasing start steps")
        if any(h not in (0, 1) for _, h in sched):
            raise ValueError("hypotheses must be 0 or 1")
        object.__setattr__(self, "schedule", sched)

    def hypothesis_steps(self) -> np.ndarray:
        """Array of length n_iters with the hypothesis active at each step."""
        out = np.empty(self.n_iters, dtype=np.int64)
        bounds = [s for s, _ in self.schedule] + [self.n_iters + 1]
        for (start, h), end in zip(self.schedule, bounds[1:]):
            if start > self.n_iters:
                break
            out[start - 1:min(end - 1, self.n_iters)] = h
        return out


@dataclass
class TrialEnsemble:
    """Terminal states (trials x S) and optional mean trajectories."""

    terminal_states: np.ndarray
    trajectories: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return self.terminal_states.shape[0]


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed),
                                                     np.uint64(trial)]))


def draw_statistics(model: ObservationModel, h_steps: np.ndarray, n_nodes: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Fresh statistics for one trial: (n_iters, S), segment by segment."""
    n = len(h_steps)
    x = np.empty((n, n_nodes))
    start = 0
    while start < n:
        h = h_steps[start]
        end = start
        while end < n and h_steps[end] == h:
            end += 1
        x[start:end] = model.sample(int(h), rng, (end - start, n_nodes))
        start = end
    return x


def step_one_bit(y, x, model: ObservationModel, network: NetworkSpec,
                 mu: float) -> np.ndarray:
    """One update: adapt every node, then combine with the neighbors'
    quantized fresh statistics (messages carry current-step information)."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    a = np.diag(network.A)
    c_mat = network.A - np.diag(a)
    v = y + mu * (x - y)
    msg = quantize_array(x, model)
    return a * v + msg @ c_mat.T


def step_quantized_state(y, x, model: ObservationModel, network: NetworkSpec,
                         mu: float) -> np.ndarray:
    """Baseline where neighbors receive the quantized intermediate state;
    the self-term keeps its full-precision value."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    a = np.diag(network.A)
    c_mat = network.A - np.diag(a)
    v = y + mu * (x - y)
    msg = quantize_array(v, model)
    return a * v + msg @ c_mat.T


def step_unquantized(y, x, network: NetworkSpec, mu: float) -> np.ndarray:
    """Classical diffusion update: adapt, then combine full states."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    v = y + mu * (x - y)
    return v @ network.A.T


def run(config: SimConfig, trajectory_nodes=(), y0=None,
        chunk_trials: int | None = None) -> TrialEnsemble:
    """Run the Monte Carlo ensemble.

    States start at zero (the transient is eliminated); ``y0`` overrides
    the start for transient studies. Trajectories (per-step mean of the
    state over trials) are accumulated only for the requested nodes.
    """
    S = config.network.size
    n = config.n_iters
    h_steps = config.hypothesis_steps()
    traj_nodes = tuple(trajectory_nodes)
    traj_sum = {k: np.zeros(n) for k in traj_nodes}
    terminal = np.empty((config.trials, S))
    if chunk_trials is None:
        chunk_trials = max(1, min(config.trials, _CHUNK_BUDGET // (n * S)))
    a = np.diag(config.network.A)
    c_mat = config.network.A - np.diag(a)
    a_t = config.network.A.T
    e0, e1 = config.model.message_values()
    gamma = config.model.gamma_loc
    start = 0
    while start < config.trials:
        count = min(chunk_trials, config.trials - start)
        x = np.empty((count, n, S))
        for t in range(count):
            rng = _trial_rng(config.seed, start + t)
            x[t] = draw_statistics(config.model, h_steps, S, rng)
        y = np.zeros((count, S))
        if y0 is not None:
            y[:] = np.asarray(y0, dtype=float)
        for i in range(n):
            xi = x[:, i, :]
            v = y + config.mu * (xi - y)
            if config.scheme == ONE_BIT_X:
                msg = np.where(xi >= gamma, e1, e0)
                y = a * v + msg @ c_mat.T
            elif config.scheme == QUANTIZED_STATE:
                msg = np.where(v >= gamma, e1, e0)
                y = a * v + msg @ c_mat.T
            else:
                y = v @ a_t
            for k in traj_nodes:
                traj_sum[k][i] += y[:, k].sum()
        terminal[start:start + count] = y
        start += count
    trajectories = {k: traj_sum[k] / config.trials for k in traj_nodes}
    return TrialEnsemble(terminal_states=terminal, trajectories=trajectories)


class EmpiricalCdf:
    """Right-continuous empirical CDF of a sample."""

    def __init__(self, sample):
        self.sorted = np.sort(np.asarray(sample, dtype=float))
        self.n = len(self.sorted)

    def __call__(self, t):
        idx = np.searchsorted(self.sorted, np.asarray(t, dtype=float),
                              side="right")
        return idx / self.n


def empirical_cdf(ensemble: TrialEnsemble, k: int) -> EmpiricalCdf:
    return EmpiricalCdf(ensemble.terminal_states[:, k])


def ks_distance(sample, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance between a sample and a CDF."""
    xs = np.sort(np.asarray(sample, dtype=float))
    n = len(xs)
    f = np.asarray(cdf(xs), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - f)), np.max(np.abs((i - 1) / n - f))))


def reaction_time(trajectory, switch_time: int, target_fraction: float = 0.9,
                  post_end: int | None = None,
                  settle_window: int | None = None) -> int:
    """Steps needed after a hypothesis switch to cross a fraction of the
    gap between the pre-switch and post-switch steady levels.

    ``trajectory[i]`` is the mean state at step i+1; ``switch_time`` is the
    first step governed by the new hypothesis; ``post_end`` bounds the
    post-switch segment (defaults to the end of the trace). Steady levels
    are averaged over a settle window at the end of each segment. Returns
    the 1-based count of post-switch steps; raises if the trace never
    crosses the target ("unreached").
    """
    traj = np.asarray(trajectory, dtype=float)
    n = len(traj)
    if not 1 < switch_time <= n:
        raise ValueError("switch_time must lie inside the trajectory")
    if post_end is None:
        post_end = n
    seg_len = post_end - switch_time + 1
    w = settle_window or max(1, min(200, seg_len // 4))
    pre = float(np.mean(traj[max(0, switch_time - 1 - w):switch_time - 1]))
    post = float(np.mean(traj[post_end - w:post_end]))
    if post == pre:
        raise ValueError("pre- and post-switch levels coincide")
    frac = (traj[switch_time - 1:post_end] - pre) / (post - pre)
    crossed = np.nonzero(frac >= target_fraction)[0]
    if crossed.size == 0:
        raise ValueError(
            f"trajectory never reaches {target_fraction:.0%} of the switch gap "
            "(unreached)")
    return int(crossed[0]) + 1
