"""Shared policy substrate: trial state, configuration, decisions, and the
uniform select/record/recommend state-machine interface."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..dose_model import (
    DoseGrid,
    RegularityParams,
    ValidationError,
)

# Defaults calibrated so the safe-exploration designs reproduce the reference
# operating characteristics at trial scale (cohorts of 3, a few hundred
# patients).  The radius constants are algorithm parameters; the clamp domain
# bounds the per-dose parameter inversions used by the weighted estimate.
DEFAULT_UCB_COEFF = 2.2
DEFAULT_RISK_DELTA = 0.05
DEFAULT_RADIUS_SCALE = 0.1        # c1_bar in the radius formula
DEFAULT_RADIUS_EXPONENT = 2.0 / 3.0  # gamma1_bar (monotonicity exponent 3/2)
DEFAULT_ESTIMATE_DOMAIN = (0.1, 3.0)
DEFAULT_PLATEAU_TOL = 0.15
DEFAULT_CRM_PRIOR_RATE = 0.5
DEFAULT_MCRM_BANDS = (0.20, 0.35, 0.60, 1.00)
DEFAULT_MCRM_CAP = 0.25

DEFAULT_POLICY_REGULARITY = RegularityParams.from_radius(
    DEFAULT_RADIUS_SCALE, DEFAULT_RADIUS_EXPONENT
)


class PolicyKind(str, Enum):
    SEEDA = "seeda"
    SEEDA_PLATEAU = "seeda-plateau"
    UCB1 = "ucb1"
    KL_UCB = "kl-ucb"
    INDEPENDENT_TS = "independent-ts"
    CRM = "crm"
    THREE_PLUS_THREE = "three-plus-three"
    MCRM = "mcrm"
    PARETO_TS = "pareto-ts"


#: Kinds that round-robin one cohort per dose before adaptive selection.
FORCED_INIT_KINDS = frozenset({
    PolicyKind.SEEDA, PolicyKind.SEEDA_PLATEAU, PolicyKind.UCB1,
    PolicyKind.KL_UCB, PolicyKind.INDEPENDENT_TS, PolicyKind.PARETO_TS,
})

#: Kinds that consume random draws when selecting or recommending.
STOCHASTIC_KINDS = frozenset({PolicyKind.INDEPENDENT_TS, PolicyKind.PARETO_TS})


@dataclass(frozen=True)
class PolicyConfig:
    """Tagged configuration selecting one allocation design plus its constants."""

    kind: PolicyKind
    theta: float
    c: float = DEFAULT_UCB_COEFF
    delta: float = DEFAULT_RISK_DELTA
    eta: int = 2
    prior_tox: Optional[tuple[float, ...]] = None
    prior_eff: Optional[tuple[float, ...]] = None
    mcrm_bands: tuple[float, float, float, float] = DEFAULT_MCRM_BANDS
    mcrm_p_threshold: float = DEFAULT_MCRM_CAP
    crm_prior_rate: float = DEFAULT_CRM_PRIOR_RATE
    regularity: RegularityParams = DEFAULT_POLICY_REGULARITY
    estimate_domain: tuple[float, float] = DEFAULT_ESTIMATE_DOMAIN
    plateau_tol: float = DEFAULT_PLATEAU_TOL

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValidationError("theta must lie in (0, 1)")
        if self.c <= 0:
            raise ValidationError("UCB coefficient c must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValidationError("delta must lie in (0, 1)")
        if not (isinstance(self.eta, int) and self.eta >= 1):
            raise ValidationError("eta must be a positive integer")
        if self.crm_prior_rate <= 0:
            raise ValidationError("prior rate must be positive")
        bands = self.mcrm_bands
        if not (0.0 < bands[0] < bands[1] < bands[2] < bands[3] <= 1.0):
            raise ValidationError("band boundaries must partition (0, 1]")
        if not 0.0 < self.mcrm_p_threshold < 1.0:
            raise ValidationError("band probability cap must lie in (0, 1)")
        if not self.estimate_domain[1] > self.estimate_domain[0] > 0:
            raise ValidationError("estimate domain must be a positive interval")
        if self.plateau_tol <= 0:
            raise ValidationError("plateau tolerance must be positive")

    def with_overrides(self, **kwargs) -> "PolicyConfig":
        return replace(self, **kwargs)


@dataclass
class TrialState:
    """Per-dose counts and estimates: the substrate every policy reads/writes."""

    k_doses: int
    t: int = 0
    cohorts: int = 0
    n_per_dose: np.ndarray = None
    eff_successes: np.ndarray = None
    tox_events: np.ndarray = None
    a_hat_per_dose: np.ndarray = None
    leader_counts: np.ndarray = None

    def __post_init__(self):
        k = self.k_doses
        if self.n_per_dose is None:
            self.n_per_dose = np.zeros(k, dtype=np.int64)
        if self.eff_successes is None:
            self.eff_successes = np.zeros(k, dtype=np.int64)
        if self.tox_events is None:
            self.tox_events = np.zeros(k, dtype=np.int64)
        if self.a_hat_per_dose is None:
            self.a_hat_per_dose = np.full(k, np.nan)
        if self.leader_counts is None:
            self.leader_counts = np.zeros(k, dtype=np.int64)

    @property
    def q_hat(self) -> np.ndarray:
        """Empirical efficacy means; 0 where a dose is unsampled."""
        return np.where(self.n_per_dose > 0,
                        self.eff_successes / np.maximum(self.n_per_dose, 1), 0.0)

    @property
    def p_hat(self) -> np.ndarray:
        """Empirical toxicity means; 0 where a dose is unsampled."""
        return np.where(self.n_per_dose > 0,
                        self.tox_events / np.maximum(self.n_per_dose, 1), 0.0)

    def apply_outcomes(self, dose0: int, xs: Sequence[int], ys: Sequence[int]) -> None:
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        if xs.shape != ys.shape:
            raise ValidationError("efficacy and toxicity outcome lists must align")
        if np.any((xs != 0) & (xs != 1)) or np.any((ys != 0) & (ys != 1)):
            raise ValidationError("outcomes must be 0/1 bits")
        self.n_per_dose[dose0] += len(xs)
        self.eff_successes[dose0] += int(xs.sum())
        self.tox_events[dose0] += int(ys.sum())
        self.t += len(xs)
        self.cohorts += 1

    def snapshot(self) -> dict:
        return {
            "t": self.t,
            "cohorts": self.cohorts,
            "n_per_dose": self.n_per_dose.tolist(),
            "eff_successes": self.eff_successes.tolist(),
            "tox_events": self.tox_events.tolist(),
            "a_hat_per_dose": [None if np.isnan(a) else float(a)
                               for a in self.a_hat_per_dose],
            "leader_counts": self.leader_counts.tolist(),
        }


@dataclass(frozen=True)
class PolicyDecision:
    """A dose selection plus the diagnostics that explain it."""

    dose_index: int                       # 1-based
    admissible: Optional[tuple[int, ...]] = None
    index_values: Optional[tuple[Optional[float], ...]] = None
    leader: Optional[int] = None
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class Recommendation:
    dose_index: int                       # 1-based
    flags: tuple[str, ...] = ()


def constrained_recommend(state: TrialState, theta: float) -> Recommendation:
    """Highest empirical efficacy among empirically safe doses (ties: lowest dose).

    Used as the final rule by the efficacy-index designs; an empty safe set
    falls back to dose 1 with a ``no-safe-dose`` flag.
    """
    safe = np.flatnonzero(state.p_hat <= theta)
    if len(safe) == 0:
        return Recommendation(dose_index=1, flags=("no-safe-dose",))
    best = safe[int(np.argmax(state.q_hat[safe]))]
    return Recommendation(dose_index=int(best) + 1)


class DosePolicy:
    """Uniform state machine: select a cohort dose, ingest outcomes, recommend."""

    kind: PolicyKind

    def __init__(self, cfg: PolicyConfig, grid: DoseGrid):
        self.cfg = cfg
        self.grid = grid
        self.state = TrialState(k_doses=grid.count)

    def select(self) -> PolicyDecision:
        raise NotImplementedError

    def record(self, dose_index: int, xs: Sequence[int], ys: Sequence[int]) -> None:
        """Ingest one cohort of (efficacy, toxicity) bits given at ``dose_index``."""
        if not 1 <= dose_index <= self.grid.count:
            raise ValidationError("dose index outside the grid")
        self.state.apply_outcomes(dose_index - 1, xs, ys)
        self._after_record(dose_index - 1)

    def _after_record(self, dose0: int) -> None:
        pass

    def recommend(self) -> Recommendation:
        raise NotImplementedError

    @property
    def finished(self) -> bool:
        """True once the design has stopped on its own (rule-based designs only)."""
        return False

    def model_parameter(self) -> Optional[float]:
        """Current toxicity-parameter estimate, for model-based designs."""
        return None
