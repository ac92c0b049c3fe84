"""One-parameter dose-toxicity curve, skeleton construction, confidence radius,
and admissible-set screening.

The toxicity of dose label ``d`` under parameter ``a`` is
``((tanh(d) + 1) / 2) ** a``: strictly increasing in ``d``, strictly decreasing
in ``a``.  All estimation clamps to a bounded parameter domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Parameter domain used for inversion clamps and Bayesian quadrature.
PARAM_DOMAIN: tuple[float, float] = (0.1, 10.0)


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ValidationError(ValueError):
    """Structurally invalid value (bad grid, bad prior, bad config)."""


@dataclass(frozen=True)
class DoseGrid:
    """Ordered real-valued dose labels (model coordinates, unitless)."""

    labels: tuple[float, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ValidationError("dose grid needs at least 2 dose labels")
        arr = np.asarray(self.labels, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("dose labels must be finite")
        if not np.all(np.diff(arr) > 0):
            raise ValidationError("dose labels must be strictly increasing")

    @property
    def count(self) -> int:
        return len(self.labels)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=float)


@dataclass(frozen=True)
class RegularityParams:
    """Curve-regularity constants controlling the confidence radius.

    ``c1_bar`` and ``gamma1_bar`` are the constants that actually enter the
    radius; the remaining fields keep the originating monotonicity/continuity
    constants so the set stays self-consistent
    (``gamma1_bar = 1/gamma1``, ``c1_bar = c1 ** -gamma1_bar``).
    """

    c1: float
    gamma1: float
    c2: float
    gamma2: float
    c1_bar: float
    gamma1_bar: float

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0 and self.c1_bar > 0):
            raise ValidationError("regularity constants must be positive")
        if not self.gamma1 > 1:
            raise ValidationError("gamma1 must exceed 1")
        if not 0 < self.gamma2 <= 1:
            raise ValidationError("gamma2 must lie in (0, 1]")
        if not 0 < self.gamma1_bar < 1:
            raise ValidationError("gamma1_bar must lie in (0, 1)")
        if abs(self.gamma1_bar - 1.0 / self.gamma1) > 1e-9:
            raise ValidationError("gamma1_bar must equal 1/gamma1")
        if abs(self.c1_bar - self.c1 ** (-self.gamma1_bar)) > 1e-9 * max(1.0, self.c1_bar):
            raise ValidationError("c1_bar must equal c1 ** -gamma1_bar")

    @classmethod
    def from_constants(cls, c1: float, gamma1: float, c2: float, gamma2: float) -> "RegularityParams":
        gamma1_bar = 1.0 / gamma1
        return cls(c1=c1, gamma1=gamma1, c2=c2, gamma2=gamma2,
                   c1_bar=c1 ** (-gamma1_bar), gamma1_bar=gamma1_bar)

    @classmethod
    def from_radius(cls, c1_bar: float, gamma1_bar: float,
                    c2: float = 1.0, gamma2: float = 1.0) -> "RegularityParams":
        """Build directly from the two constants the radius formula uses."""
        gamma1 = 1.0 / gamma1_bar
        return cls(c1=c1_bar ** (-gamma1), gamma1=gamma1, c2=c2, gamma2=gamma2,
                   c1_bar=c1_bar, gamma1_bar=gamma1_bar)


@dataclass(frozen=True)
class ToxicityEstimate:
    """Aggregated toxicity-parameter estimate with its optimism radius."""

    a_hat_per_dose: tuple[float, ...]
    weights: tuple[float, ...]
    a_hat: float
    alpha: float

    def __post_init__(self):
        w = np.asarray(self.weights)
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValidationError("weights must be nonnegative and sum to 1")
        if self.alpha < 0:
            raise ValidationError("alpha must be nonnegative")
        if abs(self.a_hat - float(w @ np.asarray(self.a_hat_per_dose))) > 1e-9:
            raise ValidationError("a_hat must be the weighted mean of per-dose estimates")


def toxicity_prob(a, d):
    """Toxicity probability ``((tanh(d) + 1) / 2) ** a``; vectorised in ``d``."""
    a_arr = np.asarray(a, dtype=float)
    d_arr = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(a_arr)) or not np.all(np.isfinite(d_arr)):
        raise DomainError("toxicity_prob requires finite a and d")
    if np.any(a_arr <= 0):
        raise DomainError("toxicity_prob requires a > 0")
    base = (np.tanh(d_arr) + 1.0) / 2.0
    out = base ** a_arr
    return float(out) if np.isscalar(a) and np.isscalar(d) else out


def invert_toxicity(p_hat: float, d: float,
                    domain: tuple[float, float] = PARAM_DOMAIN) -> float:
    """Parameter value whose model toxicity at ``d`` is closest to ``p_hat``.

    Exact minimiser of ``|toxicity_prob(a, d) - p_hat|`` over the closed
    ``domain``: the log-ratio solution clamped to the interval.  Degenerate
    empirical means map to the limit-consistent boundary (``p_hat = 0`` to the
    upper end, ``p_hat = 1`` to the lower end).
    """
    lo, hi = domain
    if not 0.0 <= p_hat <= 1.0:
        raise DomainError("p_hat must lie in [0, 1]")
    b = (math.tanh(d) + 1.0) / 2.0
    if not 0.0 < b < 1.0:
        raise DomainError("dose label maps to a degenerate base probability")
    if p_hat <= 0.0:
        return hi
    if p_hat >= 1.0:
        return lo
    return min(max(math.log(p_hat) / math.log(b), lo), hi)


def skeleton_from_prior(prior_tox: Sequence[float], a0: float) -> DoseGrid:
    """Back-solve dose labels so the model reproduces prior toxicity guesses at ``a0``."""
    p = np.asarray(prior_tox, dtype=float)
    if a0 <= 0:
        raise ValidationError("a0 must be positive")
    if np.any(p <= 0) or np.any(p >= 1):
        raise ValidationError("prior toxicities must lie strictly inside (0, 1)")
    if not np.all(np.diff(p) > 0):
        raise ValidationError("prior toxicities must be strictly increasing")
    labels = np.arctanh(2.0 * p ** (1.0 / a0) - 1.0)
    return DoseGrid(labels=tuple(float(x) for x in labels))


def confidence_radius(t: int, k_doses: int, delta: float,
                      params: RegularityParams) -> float:
    """Shrinking optimism radius added to the parameter estimate at patient count ``t``."""
    if t < 1:
        raise DomainError("confidence_radius requires t >= 1")
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    return params.c1_bar * k_doses * (
        math.log(2.0 * k_doses / delta) / (2.0 * t)
    ) ** (params.gamma1_bar / 2.0)


def admissible_prefix_len(a_hat: float, alpha: float, theta: float,
                          grid: DoseGrid) -> int:
    """Number of leading doses whose optimistic model toxicity stays within ``theta``.

    Toxicity is increasing in the dose label and decreasing in ``a``, so the
    admissible set is always a prefix and grows with ``alpha``.
    """
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    probs = toxicity_prob(a_hat + alpha, grid.as_array())
    return int(np.searchsorted(probs, theta, side="right"))


def admissible_set(a_hat: float, alpha: float, theta: float,
                   grid: DoseGrid) -> tuple[int, ...]:
    """Admissible dose indices (1-based); possibly empty, always a prefix."""
    return tuple(range(1, admissible_prefix_len(a_hat, alpha, theta, grid) + 1))


def regularity_from_model(labels: Sequence[float],
                          domain: tuple[float, float] = PARAM_DOMAIN,
                          grid_step: float = 1e-4) -> RegularityParams:
    """Regularity constants for the model curve over a bounded parameter domain.

    Fixes the monotonicity exponent at 3/2 and finds the matching per-dose
    constant from a numeric scan of ``|dp/da|``, then aggregates worst-case:
    smallest monotonicity constant, largest continuity constant.
    """
    lo, hi = domain
    if not hi > lo:
        raise DomainError("parameter domain must have positive width")
    if hasattr(labels, "labels"):
        labels = labels.labels  # accept a DoseGrid as well
    d = np.asarray(labels, dtype=float)
    gamma1 = 1.5
    gamma2 = 1.0
    width = hi - lo
    a_grid = np.arange(lo, hi + grid_step / 2, grid_step)
    base = (np.tanh(d) + 1.0) / 2.0
    # |dp/da| = b^a * |ln b|, scanned numerically per dose
    slopes = base[:, None] ** a_grid[None, :] * np.abs(np.log(base))[:, None]
    c1_per_dose = slopes.min(axis=1) / width ** (gamma1 - 1.0)
    c2_per_dose = slopes.max(axis=1) / width ** (gamma2 - 1.0)
    return RegularityParams.from_constants(
        c1=float(c1_per_dose.min()), gamma1=gamma1,
        c2=float(c2_per_dose.max()), gamma2=gamma2,
    )
