"""Post-hoc reliability analysis of a design: FORM, SORM (Breitung) and crude MCS."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rds
from .stats import std_normal_cdf, std_normal_quantile

FORM = "FORM"
SORM_BREITUNG = "SORM_Breitung"
MCS = "MCS"


class FormConvergenceError(RuntimeError):
    def __init__(self, message, u):
        super().__init__(message)
        self.u = u


class DegenerateGradientError(RuntimeError):
    pass


class CurvatureError(RuntimeError):
    pass


@dataclass
class ReliabilityReport:
    constraint_index: int
    beta: float
    pf: float
    method: str
    mpp_u: Optional[np.ndarray] = None
    mcs_samples: int = 0
    mcs_stderr: float = float("nan")
    iterations: int = 0
    curvatures: Optional[np.ndarray] = field(default=None, repr=False)


class _UMap:
    """Standard-normal image of the random quantities of one design."""

    def __init__(self, g, d, x_dists, p_dists):
        self.g = g
        self.d = np.asarray(d, dtype=float)
        self.nx = len(x_dists)
        self.dists = list(x_dists) + list(p_dists)
        self.fixed = np.array([dist.mean for dist in self.dists])
        self.rand = [j for j, dist in enumerate(self.dists) if dist.is_random]

    @property
    def dim(self):
        return len(self.rand)

    def to_x(self, u):
        u = np.asarray(u, dtype=float)
        z = np.broadcast_to(self.fixed, u.shape[:-1] + self.fixed.shape).copy()
        for k, j in enumerate(self.rand):
            z[..., j] = self.dists[j].u_to_x(u[..., k])
        return z

    def __call__(self, u):
        z = self.to_x(u)
        d = np.broadcast_to(self.d, z.shape[:-1] + self.d.shape)
        with np.errstate(all="ignore"):
            vm = rds.variable_major
            return np.asarray(self.g(vm(d), vm(z[..., : self.nx]), vm(z[..., self.nx :])), dtype=float)


def form_beta(g, d, x_dists, p_dists, index=0, tol=1e-8, max_iter=200):
    """Reliability index by the improved HL-RF iteration.

    ``g`` follows the limit-state calling convention ``g(d, x, p)``; the
    distributions give the marginals of ``x`` and ``p`` (deterministic entries
    stay fixed).  The returned index is negative when the mean design already
    lies in the failure domain.
    """
    G = _UMap(g, d, x_dists, p_dists)
    n = G.dim
    u = np.zeros(n)
    g0 = float(G(u))
    gk = g0
    g_tol = tol * (1.0 + abs(g0))
    for k in range(1, max_iter + 1):
        grad = rds.gradient(G, u)
        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0 or not np.isfinite(gnorm):
            raise DegenerateGradientError(f"zero limit-state gradient at iterate {k}")
        target = (grad @ u - gk) / gnorm**2 * grad
        step = target - u
        c = 2.0 * (np.linalg.norm(u) + 1.0) / gnorm
        merit = 0.5 * u @ u + c * abs(gk)
        lam = 1.0
        while True:
            u_new = u + lam * step
            g_new = float(G(u_new))
            if np.isfinite(g_new) and 0.5 * u_new @ u_new + c * abs(g_new) <= merit:
                break
            lam *= 0.5
            if lam < 1e-6:
                break
        done = np.linalg.norm(u_new - u) <= tol * max(1.0, np.linalg.norm(u_new)) and abs(g_new) <= g_tol
        u, gk = u_new, g_new
        if done:
            break
    else:
        raise FormConvergenceError(f"HL-RF did not converge in {max_iter} iterations", u)
    beta = float(np.linalg.norm(u))
    if g0 < 0.0:
        beta = -beta
    return ReliabilityReport(index, beta, float(std_normal_cdf(-beta)), FORM, u, iterations=k)


def _hessian(G, u, h):
    n = u.size
    eye = np.eye(n) * h
    pp = u + eye[:, None, :] + eye[None, :, :]
    pm = u + eye[:, None, :] - eye[None, :, :]
    mp = u - eye[:, None, :] + eye[None, :, :]
    mm = u - eye[:, None, :] - eye[None, :, :]
    H = (G(pp) - G(pm) - G(mp) + G(mm)) / (4.0 * h * h)
    return 0.5 * (H + H.T)


def tangent_basis(normal):
    """Orthonormal basis of the hyperplane orthogonal to ``normal`` (Gram-Schmidt)."""
    n = normal.size
    basis = [normal / np.linalg.norm(normal)]
    for e in np.eye(n):
        v = e - sum((e @ b) * b for b in basis)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
        if len(basis) == n:
            break
    return np.array(basis[1:]).T


def principal_curvatures(G, u_star, h=1e-4):
    grad = rds.gradient(G, u_star)
    gnorm = np.linalg.norm(grad)
    if gnorm == 0.0:
        raise DegenerateGradientError("zero gradient at the design point")
    if u_star.size == 1:
        return np.zeros(0)
    T = tangent_basis(-grad / gnorm)
    H = _hessian(G, u_star, h)
    return np.linalg.eigvalsh(T.T @ H @ T / gnorm)


def sorm_breitung(form_report, g, d, x_dists, p_dists, h=1e-4):
    """Breitung's asymptotic correction ``Phi(-beta) * prod(1 + beta*kappa)^-1/2``."""
    beta = form_report.beta
    if not beta > 0.0:
        raise CurvatureError("Breitung correction needs a positive FORM index")
    G = _UMap(g, d, x_dists, p_dists)
    kappa = principal_curvatures(G, np.asarray(form_report.mpp_u, dtype=float), h)
    factors = 1.0 + beta * kappa
    if np.any(factors <= 0.0):
        raise CurvatureError(f"1 + beta*kappa <= 0 for curvatures {kappa}")
    pf = float(std_normal_cdf(-beta) / math.sqrt(np.prod(factors)))
    beta_s = float(-std_normal_quantile(pf)) if 0.0 < pf < 1.0 else math.inf
    return ReliabilityReport(
        form_report.constraint_index,
        beta_s,
        pf,
        SORM_BREITUNG,
        form_report.mpp_u,
        iterations=form_report.iterations,
        curvatures=kappa,
    )


def mcs_pf(g, d, x_dists, p_dists, n_samples=100_000, seed=0, index=0, batch=100_000):
    """Crude Monte Carlo failure probability ``#{g < 0} / n``."""
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    rng = np.random.default_rng(seed)
    dists = list(x_dists) + list(p_dists)
    nx = len(x_dists)
    d = np.asarray(d, dtype=float)
    failures = 0
    done = 0
    while done < n_samples:
        n = min(batch, n_samples - done)
        z = np.array([dist.sample(rng, n) for dist in dists]).reshape(len(dists), n)
        dd = np.broadcast_to(d[:, None], d.shape + (n,))
        with np.errstate(all="ignore"):
            vals = np.broadcast_to(g(dd, z[:nx], z[nx:]), (n,))
        failures += int(np.count_nonzero(vals < 0.0))
        done += n
    pf = failures / n_samples
    stderr = math.sqrt(pf * (1.0 - pf) / n_samples)
    beta = float(-std_normal_quantile(pf)) if 0.0 < pf < 1.0 else (math.inf if pf == 0.0 else -math.inf)
    return ReliabilityReport(index, beta, pf, MCS, mcs_samples=n_samples, mcs_stderr=stderr)


def design_distributions(problem, y):
    """``(d, x_dists, p_dists)`` of a design vector for a problem."""
    d, x = problem.split(np.asarray(y, dtype=float))
    return d, problem.x_distributions(x), problem.param_distributions()


def feasible_space_fraction(problem, n_samples=100_000, seed=0, beta=None, batch=5000):
    """Share of uniform box samples that lie in the reliable design space."""
    if beta is not None:
        problem = retarget(problem, beta)
    rng = np.random.default_rng(seed)
    lo, hi = problem.lower, problem.upper
    feasible = 0
    done = 0
    while done < n_samples:
        n = min(batch, n_samples - done)
        y = lo + (hi - lo) * rng.random((n, lo.size))
        feasible += int(np.count_nonzero(rds.constraint_violation(problem, y) == 0.0))
        done += n
    return feasible / n_samples


def retarget(problem, beta):
    """Copy of ``problem`` with every probabilistic constraint at index ``beta``."""
    pf = float(std_normal_cdf(-beta))
    states = [rds.LimitState(ls.func, pf, ls.name) for ls in problem.limit_states]
    return rds.ProblemDefinition(
        problem.name,
        problem.deterministic_vars,
        problem.random_vars,
        problem.params,
        problem.objective,
        states,
        problem.constraints,
        problem.constraint_names,
    )
