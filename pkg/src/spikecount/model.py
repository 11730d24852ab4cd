"""Spiked population model: spike map, Marchenko-Pastur law and thresholds.

All functions are pure and operate on plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError

# Multiplier of sqrt(2 log log n) in the threshold sequence
DN_CONSTANT = 4.0


@dataclass(frozen=True)
class SpikeSpec:
    """Population spikes ``(alpha, multiplicity)`` and the noise variance.

    Spikes are given on the unit-noise scale: the population eigenvalues are
    ``sigma2 * alpha`` for the spikes and ``sigma2`` elsewhere.
    """

    spikes: tuple[tuple[float, int], ...] = ()
    sigma2: float = 1.0

    def __post_init__(self):
        spikes = tuple((float(a), int(m)) for a, m in self.spikes)
        object.__setattr__(self, "spikes", spikes)
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        for alpha, mult in spikes:
            if not alpha > 1:
                raise DomainError(f"spike alpha must exceed 1, got {alpha}")
            if mult < 1:
                raise DomainError(f"multiplicity must be positive, got {mult}")
        alphas = [a for a, _ in spikes]
        if any(a2 >= a1 for a1, a2 in zip(alphas, alphas[1:])):
            raise DomainError("spike alphas must be strictly decreasing")

    @classmethod
    def from_alphas(cls, alphas, sigma2=1.0):
        """Build a spec from a flat (possibly repeated) list of alphas."""
        grouped: list[list] = []
        for a in sorted((float(a) for a in alphas), reverse=True):
            if grouped and grouped[-1][0] == a:
                grouped[-1][1] += 1
            else:
                grouped.append([a, 1])
        return cls(tuple((a, m) for a, m in grouped), sigma2)

    @property
    def q0(self) -> int:
        return sum(m for _, m in self.spikes)

    def alphas(self) -> list[float]:
        """Spike alphas expanded by multiplicity, in decreasing order."""
        return [a for a, m in self.spikes for _ in range(m)]

    def population_eigenvalues(self, p: int) -> list[float]:
        if p < self.q0:
            raise DomainError(f"dimension {p} smaller than number of spikes {self.q0}")
        return [self.sigma2 * a for a in self.alphas()] + [self.sigma2] * (p - self.q0)


@dataclass(frozen=True)
class AspectRatio:
    p: int
    n: int

    def __post_init__(self):
        if self.p < 1 or self.n < 1:
            raise DomainError(f"p and n must be positive, got p={self.p}, n={self.n}")

    @property
    def c(self) -> float:
        return self.p / self.n

    @property
    def exact_c(self) -> Fraction:
        return Fraction(self.p, self.n)


@dataclass(frozen=True)
class MpLaw:
    """Marchenko-Pastur law with ratio ``c`` and scale ``sigma2``."""

    c: float
    sigma2: float
    b_minus: float
    b_plus: float


def phi(alpha: float, c: float) -> float:
    """Almost-sure limit of the sample eigenvalue of a spike ``alpha`` (unit noise)."""
    if alpha == 1:
        raise DomainError("phi has a pole at alpha = 1")
    return alpha + c * alpha / (alpha - 1)


def bulk_edges(c: float, sigma2: float = 1.0) -> MpLaw:
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    root = math.sqrt(c)
    return MpLaw(c, sigma2, sigma2 * (1 - root) ** 2, sigma2 * (1 + root) ** 2)


def mp_density(x: float, law: MpLaw) -> float:
    """Continuous part of the Marchenko-Pastur density.

    Returns 0 outside the open support ``(b_minus, b_plus)``. For ``c > 1`` the
    point mass ``1 - 1/c`` at the origin is not represented.
    """
    if x <= law.b_minus or x >= law.b_plus or x <= 0:
        return 0.0
    return math.sqrt((law.b_plus - x) * (x - law.b_minus)) / (2 * math.pi * x * law.c * law.sigma2)


def beta_limit(c: float) -> float:
    """Tracy-Widom scale constant of the bulk edge in units of ``n**(-2/3)``."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    return (1 + math.sqrt(c)) * (1 + math.sqrt(1 / c)) ** (1 / 3)


def beta_finite(n: int, p: int) -> float:
    if n < 1 or p < 1:
        raise DomainError(f"n and p must be positive, got n={n}, p={p}")
    return (1 + math.sqrt(p / n)) * (1 + math.sqrt(n / p)) ** (1 / 3)


def threshold_dn(n: int, p: int, constant: float = DN_CONSTANT) -> float:
    """Gap threshold ``constant * sqrt(2 log log n) * beta / n**(2/3)``.

    Natural logarithms; requires ``n >= 3`` so that ``log log n > 0``.
    """
    if n < 3:
        raise DomainError(f"threshold needs n >= 3, got n={n}")
    a_n = constant * math.sqrt(2 * math.log(math.log(n)))
    return a_n / n ** (2 / 3) * beta_finite(n, p)


def factor_to_spike(alpha_prime: float, sigma2: float) -> float:
    """Convert a factor strength to the corresponding spike on the unit-noise scale."""
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    return alpha_prime / sigma2 + 1
