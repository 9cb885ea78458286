"""Marginal distributions and standard-normal helpers.

Every random quantity in a problem is independent, so the Rosenblatt
transformation reduces to per-marginal maps ``u = Phi^-1(F(x))`` and
``x = F^-1(Phi(u))``.  The maps here are written directly in terms of the
family parameters (no round trip through a probability) so they stay finite
far out in the tails, which FORM needs for very reliable constraints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

EULER_GAMMA = 0.5772156649015329


class DomainError(ValueError):
    """Argument outside the domain of a distribution function."""


class Family(str, enum.Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    GUMBEL = "gumbel"
    DETERMINISTIC = "deterministic"


def std_normal_cdf(u):
    return special.ndtr(u)


def std_normal_pdf(u):
    return np.exp(-0.5 * np.square(u)) / math.sqrt(2.0 * math.pi)


def std_normal_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    return special.ndtri(p)


@dataclass(frozen=True)
class Distribution:
    """A marginal described by its first two moments.

    ``std`` is ignored for the deterministic family.  Shape parameters are
    obtained by moment matching:

    * lognormal: ``zeta**2 = ln(1 + (std/mean)**2)``, ``lam = ln(mean) - zeta**2/2``
    * gumbel (largest value): ``scale = std*sqrt(6)/pi``,
      ``loc = mean - gamma_E*scale``
    """

    family: Family
    mean: float
    std: float = 0.0

    # mean and std may also be broadcastable arrays (one marginal per entry),
    # which the batched design-space shift relies on.

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not np.all(np.isfinite(self.mean)):
            raise DomainError("mean must be finite")
        if self.family is Family.DETERMINISTIC:
            return
        if not np.all((np.asarray(self.std) > 0.0) & np.isfinite(self.std)):
            raise DomainError(f"{self.family.value} needs std > 0, got {self.std}")
        if self.family is Family.LOGNORMAL and np.any(np.asarray(self.mean) <= 0.0):
            raise DomainError("lognormal needs mean > 0")

    @classmethod
    def normal(cls, mean, std):
        return cls(Family.NORMAL, float(mean), float(std))

    @classmethod
    def lognormal(cls, mean, std):
        return cls(Family.LOGNORMAL, float(mean), float(std))

    @classmethod
    def gumbel(cls, mean, std):
        return cls(Family.GUMBEL, float(mean), float(std))

    @classmethod
    def deterministic(cls, value):
        return cls(Family.DETERMINISTIC, float(value), 0.0)

    def with_moments(self, mean, std=None):
        """Same family with new moments (``std`` kept when omitted)."""
        return Distribution(self.family, float(mean), self.std if std is None else float(std))

    @property
    def is_random(self):
        return self.family is not Family.DETERMINISTIC

    # -- derived parameters -------------------------------------------------

    @property
    def zeta(self):
        return np.sqrt(np.log1p((self.std / self.mean) ** 2))

    @property
    def lam(self):
        return np.log(self.mean) - 0.5 * self.zeta**2

    @property
    def scale(self):
        return self.std * math.sqrt(6.0) / math.pi

    @property
    def loc(self):
        return self.mean - EULER_GAMMA * self.scale

    def moments(self):
        """Analytic (mean, std) recomputed from the derived parameters."""
        fam = self.family
        if fam is Family.NORMAL or fam is Family.DETERMINISTIC:
            return self.mean, self.std
        if fam is Family.LOGNORMAL:
            z2 = self.zeta**2
            mean = np.exp(self.lam + 0.5 * z2)
            return mean, mean * np.sqrt(np.expm1(z2))
        return self.loc + EULER_GAMMA * self.scale, self.scale * math.pi / math.sqrt(6.0)

    # -- distribution functions ----------------------------------------------

    def _check_support(self, x):
        x = np.asarray(x, dtype=float)
        if self.family is Family.LOGNORMAL and np.any(x <= 0.0):
            raise DomainError("lognormal support is x > 0")
        return x

    def cdf(self, x):
        fam = self.family
        if fam is Family.DETERMINISTIC:
            return np.where(np.asarray(x, dtype=float) >= self.mean, 1.0, 0.0)
        if fam is Family.GUMBEL:
            x = np.asarray(x, dtype=float)
            return np.exp(-np.exp(-(x - self.loc) / self.scale))
        return special.ndtr(self.x_to_u(x))

    def pdf(self, x):
        fam = self.family
        x = self._check_support(x)
        if fam is Family.DETERMINISTIC:
            raise DomainError("deterministic quantity has no density")
        if fam is Family.NORMAL:
            return std_normal_pdf((x - self.mean) / self.std) / self.std
        if fam is Family.LOGNORMAL:
            return std_normal_pdf((np.log(x) - self.lam) / self.zeta) / (self.zeta * x)
        z = (x - self.loc) / self.scale
        return np.exp(-z - np.exp(-z)) / self.scale

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
            raise DomainError(f"probability must lie in (0, 1), got {p}")
        fam = self.family
        if fam is Family.DETERMINISTIC:
            return np.full_like(p_arr, self.mean)
        if fam is Family.GUMBEL:
            return self.loc - self.scale * np.log(-np.log(p_arr))
        return self.u_to_x(special.ndtri(p_arr))

    def u_to_x(self, u):
        """Map a standard-normal coordinate to this marginal, ``F^-1(Phi(u))``."""
        u = np.asarray(u, dtype=float)
        fam = self.family
        if fam is Family.NORMAL:
            return self.mean + self.std * u
        if fam is Family.LOGNORMAL:
            return np.exp(self.lam + self.zeta * u)
        if fam is Family.GUMBEL:
            # -ln Phi(u) via log_ndtr keeps the upper tail finite
            return self.loc - self.scale * np.log(-special.log_ndtr(u))
        return np.full_like(u, self.mean)

    def x_to_u(self, x):
        """Map a value of this marginal to standard-normal space, ``Phi^-1(F(x))``."""
        x = self._check_support(x)
        fam = self.family
        if fam is Family.NORMAL:
            return (x - self.mean) / self.std
        if fam is Family.LOGNORMAL:
            return (np.log(x) - self.lam) / self.zeta
        if fam is Family.GUMBEL:
            t = np.exp(-(x - self.loc) / self.scale)  # -ln F(x)
            lower = special.ndtri(np.exp(-t))
            upper = -special.ndtri(-np.expm1(-t))
            return np.where(t > math.log(2.0), lower, upper)
        raise DomainError("deterministic quantity has no standard-normal image")

    def equivalent_normal_std(self, x):
        """Inverse Jacobian of the marginal Rosenblatt map at ``x``.

        Equals ``phi(Phi^-1(F(x))) / f(x)``; exactly ``std`` for normals.
        """
        if self.family is Family.NORMAL:
            return np.full_like(np.asarray(x, dtype=float), self.std)
        dens = self.pdf(x)
        if np.any(dens <= 0.0):
            raise DomainError("density vanishes; equivalent normal std is singular")
        return std_normal_pdf(self.x_to_u(x)) / dens

    def sample(self, rng, size=None):
        fam = self.family
        if fam is Family.NORMAL:
            return rng.normal(self.mean, self.std, size)
        if fam is Family.LOGNORMAL:
            return rng.lognormal(self.lam, self.zeta, size)
        if fam is Family.GUMBEL:
            return rng.gumbel(self.loc, self.scale, size)
        return self.mean if size is None else np.full(size, self.mean)


# Functional aliases mirroring the method API.


def cdf(dist, x):
    return dist.cdf(x)


def pdf(dist, x):
    return dist.pdf(x)


def quantile(dist, p):
    return dist.quantile(p)


def equivalent_normal_std(dist, x):
    return dist.equivalent_normal_std(x)


def sample(dist, rng, size=None):
    return dist.sample(rng, size)
