"""Directional bat algorithm (dBA) and the standard bat algorithm.

Both optimisers work on the deterministic problem produced by :mod:`rbdo.rds`:
every candidate is scored by its objective ``f`` and constraint violation
``nu``, and candidates are ranked with the epsilon-level comparison whose
threshold decays to zero at ``Tc``.

Two update orders are offered.  ``sequential`` follows the textbook loop: each
bat moves with the swarm state left by the previous bat.  ``synchronous``
proposes moves for the whole swarm from the state at the start of the
iteration, evaluates them as one batch, then runs acceptance and best updates
bat by bat in the usual order.  The batched form is about fifty times cheaper
per evaluation with numpy and is the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rds

DBA = "dBA"
STANDARD_BA = "standardBA"
ALGORITHMS = (DBA, STANDARD_BA)
UPDATE_ORDERS = ("synchronous", "sequential")
BRANCH_RULES = ("epsilon", "raw_f")


@dataclass(frozen=True)
class SwarmConfig:
    nb: int = 50
    t_max: int = 1000
    r0: float = 0.1
    r_inf: float = 0.7
    A0: float = 0.9
    A_inf: float = 0.6
    phi_min: float = 0.0
    phi_max: float = 2.0
    cp: float = 5.0
    tc_fraction: float = 0.95
    theta_fraction: float = 0.2
    seed: int = 0
    algorithm: str = DBA
    alpha: float = 0.9  # standard BA loudness decay
    gamma: float = 0.9  # standard BA pulse-rate growth
    update: str = "synchronous"
    branch_rule: str = "epsilon"
    s: int = 2

    def __post_init__(self):
        problems = []
        if int(self.nb) != self.nb or self.nb < 2:
            problems.append("nb must be an integer >= 2")
        if int(self.t_max) != self.t_max or self.t_max < 1:
            problems.append("t_max must be an integer >= 1")
        if not 0.0 <= self.r0 <= self.r_inf <= 1.0:
            problems.append("need 0 <= r0 <= r_inf <= 1")
        if not 0.0 < self.A_inf <= self.A0:
            problems.append("need 0 < A_inf <= A0")
        if not self.phi_min < self.phi_max:
            problems.append("need phi_min < phi_max")
        if not 0.0 < self.tc_fraction <= 1.0:
            problems.append("tc_fraction must lie in (0, 1]")
        if not 0.0 < self.theta_fraction <= 1.0:
            problems.append("theta_fraction must lie in (0, 1]")
        if self.cp <= 0.0:
            problems.append("cp must be > 0")
        if not 0.0 < self.alpha < 1.0:
            problems.append("alpha must lie in (0, 1)")
        if self.gamma <= 0.0:
            problems.append("gamma must be > 0")
        if self.algorithm not in ALGORITHMS:
            problems.append(f"algorithm must be one of {ALGORITHMS}")
        if self.update not in UPDATE_ORDERS:
            problems.append(f"update must be one of {UPDATE_ORDERS}")
        if self.branch_rule not in BRANCH_RULES:
            problems.append(f"branch_rule must be one of {BRANCH_RULES}")
        if int(self.seed) != self.seed or self.seed < 0:
            problems.append("seed must be a non-negative integer")
        if problems:
            raise ValueError("invalid swarm configuration: " + "; ".join(problems))


@dataclass
class EvaluatedSolution:
    y: np.ndarray
    f: float
    nu: float


@dataclass
class TrialResult:
    best: EvaluatedSolution
    trace: np.ndarray = field(repr=False)  # (t_max, 3): best f, best nu, epsilon
    evaluation_count: int
    seed: int
    algorithm: str = DBA


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------


def schedule_linear(t, t_max, v0, v_inf):
    """Line through ``(1, v0)`` and ``(t_max, v_inf)``."""
    if t_max == 1:
        return v_inf
    return (v0 - v_inf) / (1.0 - t_max) * (t - t_max) + v_inf


def schedule_w(t, t_max, w0, w_inf):
    return schedule_linear(t, t_max, np.asarray(w0, dtype=float), np.asarray(w_inf, dtype=float))


def schedule_r(t, t_max, r0=0.1, r_inf=0.7):
    return schedule_linear(t, t_max, r0, r_inf)


def schedule_A(t, t_max, A0=0.9, A_inf=0.6):
    return schedule_linear(t, t_max, A0, A_inf)


def initial_widths(lower, upper):
    """``(w0, w_inf)``: a quarter of each range and one percent of that."""
    w0 = (np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)) / 4.0
    return w0, w0 / 100.0


# ---------------------------------------------------------------------------
# moves
# ---------------------------------------------------------------------------


def draw_frequencies(rng, shape, phi_min=0.0, phi_max=2.0):
    return phi_min + (phi_max - phi_min) * rng.random(shape)


def dba_move(y, best, y_k, k_better, phi1, phi2, lower=None, upper=None):
    """Directional echolocation move.

    Bats whose random peer ``y_k`` is better fly toward both the peer and the
    best; the others only toward the best.  Works on one bat or a batch.
    """
    y = np.asarray(y, dtype=float)
    pull = (best - y) * phi1
    peer = np.where(np.asarray(k_better)[..., None], (y_k - y) * phi2, 0.0)
    out = y + pull + peer.reshape(pull.shape)
    if lower is not None:
        out = np.clip(out, lower, upper)
    return out


def local_search(y, w, mean_loudness, rng, lower=None, upper=None):
    """Uniform step within ``mean_loudness * w`` of ``y`` in every component."""
    y = np.asarray(y, dtype=float)
    eta = rng.uniform(-1.0, 1.0, y.shape)
    out = y + mean_loudness * eta * w
    if lower is not None:
        out = np.clip(out, lower, upper)
    return out


def snap_discrete(position, value_sets):
    """Replace discrete components by the nearest member (ties go down)."""
    y = np.array(position, dtype=float, copy=True)
    for j, vals in enumerate(value_sets):
        if vals is None:
            continue
        col = y[..., j]
        hi = np.clip(np.searchsorted(vals, col, side="left"), 1, len(vals) - 1)
        lo_v, hi_v = vals[hi - 1], vals[hi]
        snapped = np.where(hi_v - col < col - lo_v, hi_v, lo_v)
        if len(vals) == 1:
            snapped = np.full_like(col, vals[0])
        y[..., j] = snapped
    return y


def _eps_less(fa, va, fb, vb, eps):
    by_f = ((va <= eps) & (vb <= eps)) | (va == vb)
    return np.where(by_f, fa < fb, va < vb)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


class _Swarm:
    """Population state plus the best-so-far bookkeeping shared by both algorithms."""

    def __init__(self, problem, config):
        self.problem = problem
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.lower, self.upper = problem.lower, problem.upper
        self.discrete = problem.has_discrete
        nb, n = config.nb, problem.dim
        self.Y = self.repair(self.lower + (self.upper - self.lower) * self.rng.random((nb, n)))
        self.F, self.V = self.evaluate(self.Y)
        self.evaluations = nb
        self.r = np.full(nb, config.r0)
        self.A = np.full(nb, config.A0)
        tc = config.tc_fraction * config.t_max
        self.schedule = rds.EpsilonSchedule(rds.init_epsilon(self.V, config.theta_fraction), tc, config.cp)
        eps = self.schedule(0)
        b = 0
        for i in range(1, nb):
            if rds.epsilon_less((self.F[i], self.V[i]), (self.F[b], self.V[b]), eps):
                b = i
        self.best_y, self.best_f, self.best_v = self.Y[b].copy(), self.F[b], self.V[b]
        self.feas_y, self.feas_f = None, math.inf
        for i in range(nb):
            self.archive(self.Y[i], self.F[i], self.V[i])
        self.trace = np.empty((config.t_max, 3))

    def repair(self, Y):
        Y = np.clip(Y, self.lower, self.upper)
        if self.discrete:
            Y = snap_discrete(Y, self.problem.value_sets)
        return Y

    def evaluate(self, Y):
        f, nu = rds.evaluate(self.problem, Y, self.config.s)
        return np.asarray(f, dtype=float), np.asarray(nu, dtype=float)

    def archive(self, y, f, nu):
        if nu == 0.0 and f < self.feas_f:
            self.feas_y, self.feas_f = y.copy(), f

    def offer_best(self, y, f, nu, eps):
        if rds.epsilon_less((f, nu), (self.best_f, self.best_v), eps):
            self.best_y, self.best_f, self.best_v = y.copy(), f, nu
        self.archive(y, f, nu)

    def blocks(self):
        nb = self.config.nb
        size = 1 if self.config.update == "sequential" else nb
        for start in range(0, nb, size):
            yield np.arange(start, min(start + size, nb))

    def reported(self):
        if self.feas_y is not None:
            return EvaluatedSolution(self.feas_y.copy(), float(self.feas_f), 0.0)
        return EvaluatedSolution(self.best_y.copy(), float(self.best_f), float(self.best_v))

    def record(self, t, eps):
        best = self.reported()
        self.trace[t - 1] = (best.f, best.nu, eps)

    def result(self):
        return TrialResult(
            self.reported(), self.trace, self.evaluations, int(self.config.seed), self.config.algorithm
        )


def run(problem, config=None):
    """Run one seeded trial of the algorithm named in ``config``."""
    config = config or SwarmConfig()
    if config.algorithm == STANDARD_BA:
        return run_standard_ba(problem, config)
    return run_dba(problem, config)


def run_dba(problem, config=None):
    config = config or SwarmConfig()
    sw = _Swarm(problem, config)
    rng, nb, n, t_max = sw.rng, config.nb, problem.dim, config.t_max
    w0, w_inf = initial_widths(sw.lower, sw.upper)
    W = np.tile(w0, (nb, 1))
    raw_branch = config.branch_rule == "raw_f"

    for t in range(1, t_max + 1):
        eps = sw.schedule(t)
        r_t = schedule_r(t, t_max, config.r0, config.r_inf)
        A_t = schedule_A(t, t_max, config.A0, config.A_inf)
        w_t = schedule_w(t, t_max, w0, w_inf)
        for idx in sw.blocks():
            m = idx.size
            phi1 = draw_frequencies(rng, (m, n), config.phi_min, config.phi_max)
            phi2 = draw_frequencies(rng, (m, n), config.phi_min, config.phi_max)
            k = rng.integers(0, nb - 1, m)
            k += k >= idx
            if raw_branch:
                k_better = sw.F[k] < sw.F[idx]
            else:
                k_better = _eps_less(sw.F[k], sw.V[k], sw.F[idx], sw.V[idx], eps)
            cand = dba_move(sw.Y[idx], sw.best_y, sw.Y[k], k_better, phi1, phi2)
            walk = rng.random(m) > sw.r[idx]
            if walk.any():
                steps = local_search(sw.Y[idx], W[idx], sw.A.mean(), rng)
                cand[walk] = steps[walk]
                W[idx[walk]] = w_t
            cand = sw.repair(cand)
            fc, vc = sw.evaluate(cand)
            sw.evaluations += m
            draws = rng.random(m)
            for j, i in enumerate(idx):
                if draws[j] < sw.A[i] and rds.epsilon_less((fc[j], vc[j]), (sw.F[i], sw.V[i]), eps):
                    sw.Y[i], sw.F[i], sw.V[i] = cand[j], fc[j], vc[j]
                    sw.r[i], sw.A[i] = r_t, A_t
                sw.offer_best(cand[j], fc[j], vc[j], eps)
        sw.record(t, eps)
    return sw.result()


def run_standard_ba(problem, config=None):
    """Standard bat algorithm under the same epsilon-constraint harness.

    A move is accepted only when it beats the global best, loudness decays
    geometrically on acceptance and the pulse rate follows
    ``r0 * (1 - exp(-gamma * t))``.
    """
    config = config or SwarmConfig(algorithm=STANDARD_BA)
    sw = _Swarm(problem, config)
    rng, nb, n, t_max = sw.rng, config.nb, problem.dim, config.t_max
    vel = np.zeros((nb, n))

    for t in range(1, t_max + 1):
        eps = sw.schedule(t)
        r_t = config.r0 * (1.0 - math.exp(-config.gamma * t))
        for idx in sw.blocks():
            m = idx.size
            phi = draw_frequencies(rng, (m, 1), config.phi_min, config.phi_max)
            vel[idx] += (sw.best_y - sw.Y[idx]) * phi
            cand = sw.Y[idx] + vel[idx]
            walk = rng.random(m) > sw.r[idx]
            if walk.any():
                eta = rng.uniform(-1.0, 1.0, (m, n))
                cand[walk] = (sw.best_y + eta * sw.A.mean())[walk]
            cand = sw.repair(cand)
            fc, vc = sw.evaluate(cand)
            sw.evaluations += m
            draws = rng.random(m)
            for j, i in enumerate(idx):
                new = (fc[j], vc[j])
                if draws[j] < sw.A[i] and rds.epsilon_less(new, (sw.best_f, sw.best_v), eps):
                    sw.Y[i], sw.F[i], sw.V[i] = cand[j], fc[j], vc[j]
                    sw.A[i] *= config.alpha
                    sw.r[i] = r_t
                sw.offer_best(cand[j], fc[j], vc[j], eps)
        sw.record(t, eps)
    return sw.result()
