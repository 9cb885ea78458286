"""Single-loop reliable-design-space transform and epsilon-constraint handling.

A probabilistic constraint ``P(g < 0) <= pf`` is replaced by the deterministic
check ``g(shifted point) >= 0``, where the shifted point lies ``beta`` standard
deviations from the mean design along the sigma-scaled gradient direction of
``g``.  Gradients are taken once at the mean point, so every candidate costs a
fixed number of limit-state evaluations and no inner reliability loop is run.

Candidates are batch-major arrays ``(..., N)`` throughout this module.  The
user-supplied objective, limit states and constraints instead receive
variable-major views ``d``, ``x``, ``p`` shaped ``(ND, ...)``, ``(NX, ...)``,
``(NP, ...)`` so they can unpack components directly, and must return an
array shaped ``(...)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .stats import Distribution, DomainError, Family, std_normal_quantile

log = logging.getLogger(__name__)

FD_REL_STEP = 1e-6
PROB_CLAMP = 1e-15


# ---------------------------------------------------------------------------
# problem description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Variable:
    """A design variable.

    Deterministic when ``family`` is None.  Random design variables take the
    decision value as their mean; the spread is either a fixed ``std`` or a
    coefficient of variation ``cov`` (std recomputed as ``cov * mean``).
    """

    name: str
    lower: float
    upper: float
    family: Optional[Family] = None
    std: Optional[float] = None
    cov: Optional[float] = None
    values: Optional[tuple] = None

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: need lower < upper")
        if self.family is not None:
            object.__setattr__(self, "family", Family(self.family))
            if (self.std is None) == (self.cov is None):
                raise ValueError(f"{self.name}: give exactly one of std or cov")
        if self.values is not None:
            vals = tuple(float(v) for v in self.values)
            if not vals:
                raise ValueError(f"{self.name}: empty discrete set")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{self.name}: discrete set must be strictly increasing")
            if vals[0] < self.lower or vals[-1] > self.upper:
                raise ValueError(f"{self.name}: discrete set outside bounds")
            object.__setattr__(self, "values", vals)

    @property
    def is_random(self):
        return self.family is not None

    def spread(self, mean):
        return self.cov * np.abs(mean) if self.cov is not None else np.full_like(mean, self.std)


@dataclass(frozen=True)
class Parameter:
    name: str
    dist: Distribution


@dataclass(frozen=True)
class LimitState:
    """``func(d, x, p)``; positive is safe, negative is failure."""

    func: Callable
    pf: float
    name: str = ""

    @property
    def beta(self):
        return target_beta(self.pf)


@dataclass
class ProblemDefinition:
    name: str
    deterministic_vars: Sequence[Variable]
    random_vars: Sequence[Variable]
    params: Sequence[Parameter]
    objective: Callable
    limit_states: Sequence[LimitState]
    constraints: Sequence[Callable] = ()  # h(d, mu_x, mu_p) <= 0 is feasible
    constraint_names: Sequence[str] = ()
    optimum: Optional[float] = None

    def __post_init__(self):
        self.deterministic_vars = tuple(self.deterministic_vars)
        self.random_vars = tuple(self.random_vars)
        self.params = tuple(self.params)
        self.limit_states = tuple(self.limit_states)
        self.constraints = tuple(self.constraints)
        for v in self.deterministic_vars:
            if v.is_random:
                raise ValueError(f"{v.name} listed as deterministic but has a family")
        for v in self.random_vars:
            if not v.is_random:
                raise ValueError(f"{v.name} listed as random but has no family")
        if not self.constraint_names:
            self.constraint_names = tuple(f"h{i + 1}" for i in range(len(self.constraints)))
        variables = self.variables
        self.lower = np.array([v.lower for v in variables])
        self.upper = np.array([v.upper for v in variables])
        self.value_sets = [None if v.values is None else np.array(v.values) for v in variables]
        self.param_means = np.array([q.dist.mean for q in self.params])
        self.random_param_idx = np.array(
            [j for j, q in enumerate(self.params) if q.dist.is_random], dtype=int
        )
        self.betas = np.array([ls.beta for ls in self.limit_states])

    @property
    def variables(self):
        return self.deterministic_vars + self.random_vars

    @property
    def nd(self):
        return len(self.deterministic_vars)

    @property
    def nx(self):
        return len(self.random_vars)

    @property
    def np_(self):
        return len(self.params)

    @property
    def dim(self):
        return self.nd + self.nx

    @property
    def has_discrete(self):
        return any(s is not None for s in self.value_sets)

    def split(self, y):
        y = np.asarray(y, dtype=float)
        return y[..., : self.nd], y[..., self.nd :]

    def x_distributions(self, x_means):
        """Marginals of the random design variables at the given means."""
        return [
            Distribution(v.family, float(m), float(v.spread(np.float64(m))))
            for v, m in zip(self.random_vars, x_means)
        ]

    def param_distributions(self):
        return [q.dist for q in self.params]

    def limit_state_values(self, d, x, p):
        """All limit states stacked on a trailing axis (inputs are batch-major)."""
        d, x, p = variable_major(d), variable_major(x), variable_major(p)
        with np.errstate(all="ignore"):
            return np.stack([ls.func(d, x, p) for ls in self.limit_states], axis=-1)

    def constraint_values(self, d, x, p):
        if not self.constraints:
            return np.zeros(np.shape(d)[:-1] + (0,))
        d, x, p = variable_major(d), variable_major(x), variable_major(p)
        with np.errstate(all="ignore"):
            return np.stack([h(d, x, p) for h in self.constraints], axis=-1)

    def objective_values(self, y):
        d, x = self.split(y)
        with np.errstate(all="ignore"):
            return np.asarray(self.objective(variable_major(d), variable_major(x)), dtype=float)


@dataclass(frozen=True)
class ShiftedPoint:
    x: np.ndarray
    p: np.ndarray
    constraint_index: int


@dataclass(frozen=True)
class EpsilonSchedule:
    eps0: float
    tc: float
    cp: float = 5.0

    def __post_init__(self):
        if self.eps0 < 0:
            raise ValueError("eps0 must be >= 0")
        if self.tc <= 0:
            raise ValueError("tc must be > 0")

    def __call__(self, t):
        return epsilon_update(self, t)


# ---------------------------------------------------------------------------
# reliability index and directional cosines
# ---------------------------------------------------------------------------


def variable_major(a):
    """View of a batch-major array with the variable axis moved to the front."""
    a = np.asarray(a)
    return a.transpose((a.ndim - 1,) + tuple(range(a.ndim - 1)))


def target_beta(pf):
    """Target reliability index ``-Phi^-1(pf)``."""
    if not 0.0 < pf < 0.5:
        raise DomainError(f"target failure probability must lie in (0, 0.5), got {pf}")
    return float(-std_normal_quantile(pf))


def fd_steps(z):
    return FD_REL_STEP * np.maximum(1.0, np.abs(z))


def gradient(func, z):
    """Central-difference gradient of a batched function at ``z``.

    ``func`` maps points shaped ``(..., n)`` to values shaped ``(...) + extra``;
    the result is shaped ``lead + extra + (n,)`` where ``lead = z.shape[:-1]``.
    """
    z = np.asarray(z, dtype=float)
    n = z.shape[-1]
    lead = z.ndim - 1
    h = fd_steps(z)
    step = np.eye(n) * h[..., None, :]
    pts = np.concatenate([z[..., None, :] + step, z[..., None, :] - step], axis=-2)
    vals = np.moveaxis(np.asarray(func(pts), dtype=float), lead, -1)
    hb = h.reshape(h.shape[:-1] + (1,) * (vals.ndim - lead - 1) + (n,))
    with np.errstate(invalid="ignore"):
        return (vals[..., :n] - vals[..., n:]) / (2.0 * hb)


def cosines_from_gradient(grad, sigma):
    """Normalise sigma-scaled gradients; zero rows give zero cosines."""
    scaled = grad * sigma
    norm = np.sqrt(np.sum(scaled * scaled, axis=-1, keepdims=True))
    with np.errstate(invalid="ignore", divide="ignore"):
        alpha = np.where(norm > 0.0, scaled / norm, 0.0)
    if np.any(norm == 0.0):
        log.debug("degenerate limit-state gradient; shift direction set to zero")
    return alpha


def directional_cosines(g, d, x, p, sigma_x, sigma_p):
    """Directional cosines of ``g`` at the mean point ``(d, x, p)``.

    Components with zero sigma (deterministic parameters) get zero cosine.
    Returns ``(alpha_x, alpha_p)``.
    """
    d = np.atleast_1d(np.asarray(d, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    nx = x.size
    z = np.concatenate([x, p])

    def wrapped(pts):
        dd = np.broadcast_to(d, pts.shape[:-1] + d.shape)
        return g(variable_major(dd), variable_major(pts[..., :nx]), variable_major(pts[..., nx:]))

    grad = gradient(wrapped, z)
    sigma = np.concatenate([np.broadcast_to(sigma_x, x.shape), np.broadcast_to(sigma_p, p.shape)])
    alpha = cosines_from_gradient(grad, sigma)
    return alpha[:nx], alpha[nx:]


# ---------------------------------------------------------------------------
# batched shift of all constraints
# ---------------------------------------------------------------------------


def _equivalent_sigmas(problem, x):
    """Per-candidate sigma (normal) or equivalent-normal sigma at the mean point."""
    B = x.shape[0]
    sig_x = np.empty_like(x)
    for j, v in enumerate(problem.random_vars):
        spread = v.spread(x[:, j])
        if v.family is Family.NORMAL:
            sig_x[:, j] = spread
        else:
            sig_x[:, j] = Distribution(v.family, x[:, j], spread).equivalent_normal_std(x[:, j])
    rp = problem.random_param_idx
    sig_p = np.empty(len(rp))
    for k, j in enumerate(rp):
        dist = problem.params[j].dist
        sig_p[k] = float(dist.equivalent_normal_std(dist.mean))
    return sig_x, np.broadcast_to(sig_p, (B, len(rp)))


def _shift_batch(problem, d, x):
    """Shifted points for every (candidate, constraint).

    Returns ``(xs, ps, alpha)`` with ``xs`` shaped ``(B, m, NX)``, ``ps`` shaped
    ``(B, m, NP)`` and ``alpha`` shaped ``(B, m, NX + NPr)``.
    """
    B, nx = x.shape
    m = len(problem.limit_states)
    rp = problem.random_param_idx
    p_full = problem.param_means
    z = np.concatenate([x, np.broadcast_to(p_full[rp], (B, len(rp)))], axis=1)

    def all_states(pts):
        lead = pts.shape[:-1]
        dd = np.broadcast_to(d[:, None, :], lead + (d.shape[-1],))
        pp = np.broadcast_to(p_full, lead + (p_full.size,)).copy()
        pp[..., rp] = pts[..., nx:]
        return problem.limit_state_values(dd, pts[..., :nx], pp)

    grad = gradient(all_states, z)  # (B, m, R)
    sig_x, sig_p = _equivalent_sigmas(problem, x)
    sigma = np.concatenate([sig_x, sig_p], axis=1)
    alpha = cosines_from_gradient(grad, sigma[:, None, :])
    beta = problem.betas[None, :, None]

    # Normal marginals: z - alpha * sigma * beta; others through the marginal
    # quantile of Phi(-beta * alpha).
    zs = z[:, None, :] - alpha * sigma[:, None, :] * beta
    for j, v in enumerate(problem.random_vars):
        if v.family is Family.NORMAL:
            continue
        dist = Distribution(v.family, x[:, j, None], v.spread(x[:, j])[:, None])
        zs[:, :, j] = _rosenblatt_shift(dist, -problem.betas * alpha[:, :, j])
    for k, j in enumerate(rp):
        dist = problem.params[j].dist
        if dist.family is not Family.NORMAL:
            zs[:, :, nx + k] = _rosenblatt_shift(dist, -problem.betas[None, :] * alpha[:, :, nx + k])

    xs = zs[..., :nx]
    ps = np.broadcast_to(p_full, (B, m, p_full.size)).copy()
    ps[..., rp] = zs[..., nx:]
    return xs, ps, alpha


def _rosenblatt_shift(dist, u):
    prob = np.clip(special.ndtr(u), PROB_CLAMP, 1.0 - PROB_CLAMP)
    return dist.quantile(prob)


def shift_point(problem, i, d, x_means, p_means=None):
    """Shifted point of constraint ``i`` for one candidate."""
    if p_means is not None and not np.allclose(p_means, problem.param_means):
        problem = _with_param_means(problem, p_means)
    d = np.asarray(d, dtype=float).reshape(1, -1)
    x = np.asarray(x_means, dtype=float).reshape(1, -1)
    xs, ps, _ = _shift_batch(problem, d, x)
    return ShiftedPoint(xs[0, i], ps[0, i], i)


def _with_param_means(problem, p_means):
    params = [Parameter(q.name, q.dist.with_moments(m)) for q, m in zip(problem.params, p_means)]
    return ProblemDefinition(
        problem.name,
        problem.deterministic_vars,
        problem.random_vars,
        params,
        problem.objective,
        problem.limit_states,
        problem.constraints,
        problem.constraint_names,
    )


def shifted_limit_states(problem, y):
    """``g_i`` evaluated at its own shifted point, shape ``(B, m)``."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d, x = problem.split(y)
    m = len(problem.limit_states)
    if m == 0:
        return np.zeros((y.shape[0], 0))
    xs, ps, _ = _shift_batch(problem, d, x)
    out = np.empty((y.shape[0], m))
    d, xs, ps = variable_major(d), variable_major(xs), variable_major(ps)
    with np.errstate(all="ignore"):
        for i, ls in enumerate(problem.limit_states):
            out[:, i] = ls.func(d, xs[..., i], ps[..., i])
    return out


def constraint_violation(problem, y, s=2):
    """Violation ``nu`` of candidates ``y`` (shape ``(N,)`` or ``(B, N)``).

    Non-finite limit-state or constraint values count as infinite violation.
    """
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y2 = np.atleast_2d(y)
    g = shifted_limit_states(problem, y2)
    d, x = problem.split(y2)
    h = problem.constraint_values(d, x, np.broadcast_to(problem.param_means, (y2.shape[0], problem.np_)))
    g = np.where(np.isfinite(g), g, -np.inf)
    h = np.where(np.isfinite(h), h, np.inf)
    with np.errstate(over="ignore"):
        nu = np.sum(np.minimum(0.0, g) ** s, axis=1) + np.sum(np.maximum(0.0, h) ** s, axis=1)
    return float(nu[0]) if single else nu


def evaluate(problem, y, s=2):
    """Objective and violation for candidates; scalars for a single vector."""
    y = np.asarray(y, dtype=float)
    f = problem.objective_values(np.atleast_2d(y))
    nu = constraint_violation(problem, np.atleast_2d(y), s)
    if y.ndim == 1:
        return float(f[0]), float(nu[0])
    return f, nu


# ---------------------------------------------------------------------------
# epsilon-level comparison
# ---------------------------------------------------------------------------


def epsilon_less(a, b, eps):
    """Strict epsilon-level order ``a <_eps b`` on ``(f, nu)`` pairs."""
    fa, va = a
    fb, vb = b
    if (va <= eps and vb <= eps) or va == vb:
        return fa < fb
    return va < vb


def epsilon_less_equal(a, b, eps):
    fa, va = a
    fb, vb = b
    if (va <= eps and vb <= eps) or va == vb:
        return fa <= fb
    return va <= vb


def epsilon_compare(a, b, eps):
    """-1 if ``a`` is better, 1 if ``b`` is better, 0 if tied."""
    if epsilon_less(a, b, eps):
        return -1
    if epsilon_less(b, a, eps):
        return 1
    return 0


def epsilon_update(sched, t):
    if t <= 0:
        return sched.eps0
    if t >= sched.tc:
        return 0.0
    return sched.eps0 * (1.0 - t / sched.tc) ** sched.cp


def init_epsilon(violations, theta=0.2):
    """Violation of the individual ranked ``ceil(theta * NB)`` by ascending violation."""
    v = np.sort(np.asarray(violations, dtype=float))
    if v.size == 0:
        raise ValueError("empty population")
    rank = min(max(math.ceil(theta * v.size), 1), v.size)
    return float(v[rank - 1])
