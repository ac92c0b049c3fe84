"""Reassessment designs driven by a quadrature posterior over the toxicity
parameter: greedy target-matching (CRM) and band-probability (MCRM) variants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dose_model import DoseGrid, PARAM_DOMAIN, ValidationError
from .base import (
    DEFAULT_CRM_PRIOR_RATE,
    DosePolicy,
    PolicyConfig,
    PolicyDecision,
    PolicyKind,
    Recommendation,
    TrialState,
)

QUADRATURE_POINTS = 4001


def _quadrature(domain: tuple[float, float], points: int):
    a_grid = np.linspace(domain[0], domain[1], points)
    step = a_grid[1] - a_grid[0]
    weights = np.full(points, step)
    weights[0] = weights[-1] = step / 2.0
    return a_grid, weights


def truncated_prior_mean(rate: float = DEFAULT_CRM_PRIOR_RATE,
                         domain: tuple[float, float] = PARAM_DOMAIN,
                         points: int = QUADRATURE_POINTS) -> float:
    """Mean of the exponential prior truncated and renormalised to the domain,
    evaluated on the same trapezoid grid the posterior uses."""
    a_grid, weights = _quadrature(domain, points)
    mass = weights * np.exp(-rate * a_grid)
    return float((a_grid * mass).sum() / mass.sum())


@dataclass(frozen=True)
class PosteriorSummary:
    mean: float
    degenerate: bool


def classify_toxicity(p: float, bands: tuple[float, float, float, float]) -> int:
    """Index of the half-open band ``(prev, edge]`` containing probability ``p``.

    Band edges belong to the band they close: a probability exactly at the
    targeted-band upper edge classifies as targeted, not excessive.
    """
    if not 0.0 < p <= bands[-1]:
        raise ValidationError("probability outside the banded range")
    for j, edge in enumerate(bands):
        if p <= edge:
            return j
    raise AssertionError("unreachable")


class ToxicityPosterior:
    """Truncated-exponential prior times Bernoulli toxicity likelihoods on a
    fixed trapezoid grid over the parameter domain.

    Log-domain accumulation keeps deep likelihoods from underflowing; the
    model's log-toxicity is linear in the parameter, so per-dose grids are
    precomputed once and a trial's log-likelihood updates incrementally.
    """

    def __init__(self, grid: DoseGrid, prior_rate: float,
                 domain: tuple[float, float] = PARAM_DOMAIN,
                 points: int = QUADRATURE_POINTS):
        if prior_rate <= 0:
            raise ValidationError("prior rate must be positive")
        self.grid = grid
        self.domain = domain
        self.a_grid, self.weights = _quadrature(domain, points)
        self.log_prior = -prior_rate * self.a_grid  # normalisation cancels
        base = (np.tanh(grid.as_array()) + 1.0) / 2.0
        self.log_p = self.a_grid[None, :] * np.log(base)[:, None]   # (K, G)
        self.log_1mp = np.log1p(-np.exp(self.log_p))
        prior_mass = self.weights * np.exp(self.log_prior)
        self.prior_mean = float((self.a_grid * prior_mass).sum() / prior_mass.sum())

    def empty_loglik(self) -> np.ndarray:
        return self.log_prior.copy()

    def add_outcomes(self, loglik: np.ndarray, dose0: int,
                     tox_count: int, n: int) -> None:
        loglik += tox_count * self.log_p[dose0] + (n - tox_count) * self.log_1mp[dose0]

    def loglik_for(self, state: TrialState) -> np.ndarray:
        ll = self.empty_loglik()
        for k in range(self.grid.count):
            self.add_outcomes(ll, k, int(state.tox_events[k]), int(state.n_per_dose[k]))
        return ll

    def _mass(self, loglik: np.ndarray) -> np.ndarray:
        return self.weights * np.exp(loglik - loglik.max())

    def mean_from(self, loglik: np.ndarray) -> PosteriorSummary:
        mass = self._mass(loglik)
        z = float(mass.sum())
        if not np.isfinite(z) or z <= 0.0:
            return PosteriorSummary(mean=self.prior_mean, degenerate=True)
        return PosteriorSummary(mean=float((self.a_grid * mass).sum() / z),
                                degenerate=False)

    def summary(self, state: TrialState) -> PosteriorSummary:
        return self.mean_from(self.loglik_for(state))

    def band_masses_from(self, loglik: np.ndarray,
                         bands: tuple[float, float, float, float]) -> np.ndarray:
        """Posterior mass of each dose's toxicity in the four half-open bands
        ``(0, b0], (b0, b1], (b1, b2], (b2, b3]``; shape (K, 4).

        A toxicity band maps to an exact parameter interval (the curve is
        monotone in the parameter), so each mass is a difference of the
        interpolated posterior CDF rather than a grid-point indicator sum;
        this keeps band integrals accurate well below the grid step.
        """
        dens = np.exp(loglik - loglik.max())
        if not np.isfinite(dens.sum()) or dens.sum() <= 0.0:
            dens = np.exp(self.log_prior)
        step = self.a_grid[1] - self.a_grid[0]
        cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) * (step / 2.0))])
        total = cdf[-1]
        base = (np.tanh(self.grid.as_array()) + 1.0) / 2.0
        log_base = np.log(base)
        edges = (0.0,) + tuple(bands)
        lo, hi = self.domain
        out = np.empty((self.grid.count, 4))
        for j in range(4):
            upper, lower = edges[j + 1], edges[j]
            # p(a) <= upper holds for a >= log(upper)/log(base) (boundary included)
            a_start = np.where(upper >= 1.0, lo, np.log(np.maximum(upper, 1e-300)) / log_base)
            a_end = np.full_like(a_start, hi) if lower <= 0.0 else np.log(lower) / log_base
            a_start = np.clip(a_start, lo, hi)
            a_end = np.clip(a_end, lo, hi)
            span = np.interp(a_end, self.a_grid, cdf) - np.interp(a_start, self.a_grid, cdf)
            out[:, j] = np.maximum(span, 0.0) / total
        return out

    def band_masses(self, state: TrialState,
                    bands: tuple[float, float, float, float]) -> np.ndarray:
        return self.band_masses_from(self.loglik_for(state), bands)

    def model_toxicity(self, a: float) -> np.ndarray:
        base = (np.tanh(self.grid.as_array()) + 1.0) / 2.0
        return base ** a


class _QuadraturePolicy(DosePolicy):
    """Keeps the running grid log-likelihood in sync with the trial state."""

    def __init__(self, cfg: PolicyConfig, grid: DoseGrid):
        super().__init__(cfg, grid)
        self.posterior = ToxicityPosterior(grid, cfg.crm_prior_rate)
        self._loglik = self.posterior.empty_loglik()

    def record(self, dose_index, xs, ys):
        tox_before = int(self.state.tox_events[dose_index - 1])
        n_before = int(self.state.n_per_dose[dose_index - 1])
        super().record(dose_index, xs, ys)
        tox_new = int(self.state.tox_events[dose_index - 1]) - tox_before
        n_new = int(self.state.n_per_dose[dose_index - 1]) - n_before
        self.posterior.add_outcomes(self._loglik, dose_index - 1, tox_new, n_new)

    def model_parameter(self) -> float:
        return self.posterior.mean_from(self._loglik).mean


class CrmPolicy(_QuadraturePolicy):
    """Greedy reassessment: dose whose posterior-mean toxicity is closest to theta."""

    kind = PolicyKind.CRM

    def _pick(self) -> tuple[int, np.ndarray, tuple[str, ...]]:
        summ = self.posterior.mean_from(self._loglik)
        flags = ("degenerate-posterior",) if summ.degenerate else ()
        tox = self.posterior.model_toxicity(summ.mean)
        return int(np.argmin(np.abs(self.cfg.theta - tox))), tox, flags

    def select(self) -> PolicyDecision:
        pick, tox, flags = self._pick()
        return PolicyDecision(dose_index=pick + 1, index_values=tuple(tox),
                              flags=flags)

    def recommend(self) -> Recommendation:
        pick, _, flags = self._pick()
        return Recommendation(dose_index=pick + 1, flags=flags)


class McrmPolicy(_QuadraturePolicy):
    """Band-probability reassessment: maximise targeted-band mass subject to a
    cap on excessive-plus-unacceptable mass."""

    kind = PolicyKind.MCRM

    def _pick(self) -> tuple[int, np.ndarray, tuple[str, ...]]:
        masses = self.posterior.band_masses_from(self._loglik, self.cfg.mcrm_bands)
        targeted = masses[:, 1]
        excessive = masses[:, 2] + masses[:, 3]
        ok = np.flatnonzero(excessive <= self.cfg.mcrm_p_threshold)
        if len(ok) == 0:
            return int(np.argmin(excessive)), masses, ("band-cap-unmet",)
        return int(ok[np.argmax(targeted[ok])]), masses, ()

    def select(self) -> PolicyDecision:
        pick, masses, flags = self._pick()
        return PolicyDecision(dose_index=pick + 1,
                              index_values=tuple(masses[:, 1]), flags=flags)

    def recommend(self) -> Recommendation:
        pick, _, flags = self._pick()
        return Recommendation(dose_index=pick + 1, flags=flags)
