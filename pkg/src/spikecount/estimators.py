"""Spike-count estimators: consecutive-gap thresholding and the KN sequential test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DomainError
from .model import beta_finite, threshold_dn
from .sampling import Spectrum
from . import tracy_widom

DEFAULT_S_MAX = 30

# Multiplier of sqrt(2 log log n) that reproduces the reference simulation tables;
# model.DN_CONSTANT (4) is the value printed alongside the threshold formula.
GAP_DN_CONSTANT = 2.0

KN_CENTERINGS = ("reduced", "full")


@dataclass(frozen=True)
class GapEstimatorSettings:
    """Settings of the gap estimator.

    ``s_max`` is the preliminary bound on the spike count; ``None`` means
    ``min(30, p - 2)``. ``dn_override`` replaces the threshold sequence.
    """

    s_max: Optional[int] = None
    dn_override: Optional[float] = None
    dn_constant: float = GAP_DN_CONSTANT

    def __post_init__(self):
        if self.s_max is not None and self.s_max < 1:
            raise ConfigurationError(f"s_max must be positive, got {self.s_max}")
        if self.dn_override is not None and not self.dn_override > 0:
            raise ConfigurationError(f"dn override must be positive, got {self.dn_override}")
        if not self.dn_constant > 0:
            raise ConfigurationError(f"dn constant must be positive, got {self.dn_constant}")

    def resolve_s_max(self, p: int) -> int:
        s_max = min(DEFAULT_S_MAX, p - 2) if self.s_max is None else self.s_max
        if s_max < 1 or s_max > p - 2:
            raise ConfigurationError(f"s_max={s_max} needs 1 <= s_max <= p - 2 = {p - 2}")
        return s_max

    def threshold(self, n: int, p: int) -> float:
        if self.dn_override is not None:
            return float(self.dn_override)
        return threshold_dn(n, p, self.dn_constant)


@dataclass(frozen=True)
class KnSettings:
    """Settings of the Kritchman-Nadler test.

    ``k_max`` defaults to ``min(p, n) - 1``. With ``sigma2`` unset the noise
    variance is re-estimated by trimmed means until the count is stable.
    ``centering`` picks the edge ``b`` of the k-th test: ``"reduced"`` uses
    ``(1 + sqrt((p - k)/n))**2`` to match ``beta_{n,p-k}``, ``"full"`` uses
    ``(1 + sqrt(p/n))**2`` for every k.
    """

    gamma: float = 0.005
    k_max: Optional[int] = None
    sigma2: Optional[float] = None
    centering: str = "reduced"

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.sigma2 is not None and not self.sigma2 > 0:
            raise ConfigurationError(f"sigma2 must be positive, got {self.sigma2}")
        if self.centering not in KN_CENTERINGS:
            raise ConfigurationError(f"centering must be one of {KN_CENTERINGS}, got {self.centering!r}")
        if self.k_max is not None and self.k_max < 1:
            raise ConfigurationError(f"k_max must be positive, got {self.k_max}")

    def resolve_k_max(self, p: int, n: int) -> int:
        limit = min(p, n) - 1
        k_max = limit if self.k_max is None else self.k_max
        if k_max >= min(p, n) or k_max < 1:
            raise ConfigurationError(f"k_max={k_max} must satisfy 1 <= k_max < min(p, n) = {min(p, n)}")
        return k_max


@dataclass
class EstimateResult:
    q_hat: int
    sigma2_hat: float
    iterations: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    threshold_used: float = float("nan")
    converged: bool = True


def consecutive_gaps(spectrum: Spectrum, s_max: int) -> np.ndarray:
    """Return ``[delta_1, ..., delta_{s_max+1}]``."""
    if s_max < 0 or s_max + 1 > spectrum.p - 1:
        raise ConfigurationError(f"s_max={s_max} needs s_max + 1 <= p - 1 = {spectrum.p - 1}")
    lam = spectrum.values
    return lam[: s_max + 1] - lam[1 : s_max + 2]


def _count_from_gaps(gaps: np.ndarray, d: float, s_max: int) -> int:
    # largest j <= s_max with gaps[0..j-1] >= d and gaps[j] < d; 0 if none
    below = np.flatnonzero(gaps < d)
    if below.size == 0:
        return 0
    j = int(below[0])
    return j if j <= s_max else 0


def _known(values, sigma2, n, p, s_max, d):
    lam = values / sigma2
    gaps = lam[: s_max + 1] - lam[1 : s_max + 2]
    return _count_from_gaps(gaps, d, s_max), gaps


def estimate_q_known_variance(spectrum: Spectrum, sigma2: float,
                              settings: GapEstimatorSettings = GapEstimatorSettings()) -> int:
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    p, n = spectrum.p, spectrum.n
    s_max = settings.resolve_s_max(p)
    q, _ = _known(spectrum.values, sigma2, n, p, s_max, settings.threshold(n, p))
    return q


def trimmed_variance(spectrum: Spectrum, q: int) -> float:
    """Mean of the eigenvalues ranked below the ``q`` largest."""
    if not 0 <= q < spectrum.p:
        raise ConfigurationError(f"cannot trim {q} of {spectrum.p} eigenvalues")
    return float(np.mean(spectrum.values[q:]))


def estimate_q_unknown_variance(spectrum: Spectrum,
                                settings: GapEstimatorSettings = GapEstimatorSettings()) -> EstimateResult:
    """Alternate the gap estimator and the trimmed-mean variance until the count is stable.

    Stops after ``s_max`` refinements at most, flagging ``converged=False``.
    """
    p, n = spectrum.p, spectrum.n
    s_max = settings.resolve_s_max(p)
    d = settings.threshold(n, p)
    lam = spectrum.values

    sigma2 = trimmed_variance(spectrum, 0)
    if not sigma2 > 0:
        raise DomainError("spectrum has zero trace; variance cannot be estimated")
    q, gaps = _known(lam, sigma2, n, p, s_max, d)
    iterations = [(q, sigma2)]
    converged = False
    for _ in range(s_max):
        sigma2_new = trimmed_variance(spectrum, q)
        if not sigma2_new > 0:
            break
        q_new, gaps = _known(lam, sigma2_new, n, p, s_max, d)
        iterations.append((q_new, sigma2_new))
        stable = q_new == q
        q, sigma2 = q_new, sigma2_new
        if stable:
            converged = True
            break
    return EstimateResult(q, sigma2, iterations, [float(g) for g in gaps], d, converged)


def _kn_count(lam, sigma2, n, p, k_max, s_gamma, centering):
    n23 = n ** (2 / 3)
    for k in range(1, k_max + 1):
        cc = (p - k) / n if centering == "reduced" else p / n
        edge = (1 + math.sqrt(cc)) ** 2
        if not lam[k - 1] > sigma2 * (beta_finite(n, p - k) / n23 * s_gamma + edge):
            return k - 1
    return k_max


def kn_estimate_result(spectrum: Spectrum, settings: KnSettings = KnSettings()) -> EstimateResult:
    p, n = spectrum.p, spectrum.n
    k_max = settings.resolve_k_max(p, n)
    s_gamma = tracy_widom.tw1_upper_quantile(settings.gamma)
    lam = spectrum.values
    if settings.sigma2 is not None:
        q = _kn_count(lam, settings.sigma2, n, p, k_max, s_gamma, settings.centering)
        return EstimateResult(q, settings.sigma2, [(q, settings.sigma2)], [], s_gamma, True)

    q = 0
    iterations = []
    converged = False
    for _ in range(k_max + 1):
        sigma2 = trimmed_variance(spectrum, q)
        if not sigma2 > 0:
            raise DomainError("trimmed spectrum has zero mean; variance cannot be estimated")
        q_new = _kn_count(lam, sigma2, n, p, k_max, s_gamma, settings.centering)
        iterations.append((q_new, sigma2))
        stable = q_new == q
        q = q_new
        if stable:
            converged = True
            break
    return EstimateResult(q, iterations[-1][1], iterations, [], s_gamma, converged)


def kn_estimate(spectrum: Spectrum, settings: KnSettings = KnSettings()) -> int:
    return kn_estimate_result(spectrum, settings).q_hat
