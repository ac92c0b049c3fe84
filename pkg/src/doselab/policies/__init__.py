"""Allocation designs as uniform select/record/recommend state machines."""

from typing import Optional

import numpy as np

from ..dose_model import DoseGrid
from .base import (
    DEFAULT_ESTIMATE_DOMAIN,
    DEFAULT_MCRM_BANDS,
    DEFAULT_MCRM_CAP,
    DEFAULT_PLATEAU_TOL,
    DEFAULT_POLICY_REGULARITY,
    DEFAULT_RADIUS_EXPONENT,
    DEFAULT_RADIUS_SCALE,
    DEFAULT_RISK_DELTA,
    DEFAULT_UCB_COEFF,
    FORCED_INIT_KINDS,
    STOCHASTIC_KINDS,
    DosePolicy,
    PolicyConfig,
    PolicyDecision,
    PolicyKind,
    Recommendation,
    TrialState,
    constrained_recommend,
)
from .bayes import CrmPolicy, McrmPolicy, PosteriorSummary, ToxicityPosterior
from .baselines import (
    IndependentTsPolicy,
    KlUcbPolicy,
    ParetoTsPolicy,
    ThreePlusThreePolicy,
    Ucb1Policy,
    pareto_front,
)
from .indices import kl_bernoulli, klucb_index, ucb1_index
from .seeda import (
    SeedaPlateauPolicy,
    SeedaPolicy,
    build_estimate,
    plateau_recommend,
    plateau_select,
    plateau_turning_point,
    seeda_recommend,
    seeda_select,
)

__all__ = [
    "DosePolicy", "PolicyConfig", "PolicyDecision", "PolicyKind",
    "Recommendation", "TrialState", "constrained_recommend", "make_policy",
    "SeedaPolicy", "SeedaPlateauPolicy", "Ucb1Policy", "KlUcbPolicy",
    "IndependentTsPolicy", "ParetoTsPolicy", "ThreePlusThreePolicy",
    "CrmPolicy", "McrmPolicy", "ToxicityPosterior", "PosteriorSummary",
    "ucb1_index", "klucb_index", "kl_bernoulli", "pareto_front",
    "seeda_select", "seeda_recommend", "plateau_select", "plateau_recommend",
    "plateau_turning_point", "build_estimate",
    "FORCED_INIT_KINDS", "STOCHASTIC_KINDS",
    "DEFAULT_UCB_COEFF", "DEFAULT_RISK_DELTA", "DEFAULT_RADIUS_SCALE",
    "DEFAULT_RADIUS_EXPONENT", "DEFAULT_ESTIMATE_DOMAIN", "DEFAULT_PLATEAU_TOL",
    "DEFAULT_POLICY_REGULARITY", "DEFAULT_MCRM_BANDS", "DEFAULT_MCRM_CAP",
]

_DETERMINISTIC = {
    PolicyKind.SEEDA: SeedaPolicy,
    PolicyKind.SEEDA_PLATEAU: SeedaPlateauPolicy,
    PolicyKind.UCB1: Ucb1Policy,
    PolicyKind.KL_UCB: KlUcbPolicy,
    PolicyKind.CRM: CrmPolicy,
    PolicyKind.MCRM: McrmPolicy,
    PolicyKind.THREE_PLUS_THREE: ThreePlusThreePolicy,
}

_STOCHASTIC = {
    PolicyKind.INDEPENDENT_TS: IndependentTsPolicy,
    PolicyKind.PARETO_TS: ParetoTsPolicy,
}


def make_policy(cfg: PolicyConfig, grid: DoseGrid,
                rng: Optional[np.random.Generator] = None,
                rec_rng: Optional[np.random.Generator] = None) -> DosePolicy:
    """Instantiate the design selected by ``cfg.kind``.

    Sampling designs require both an allocation generator and a separate
    recommendation generator; the rest ignore them.
    """
    if cfg.kind in _STOCHASTIC:
        if rng is None or rec_rng is None:
            raise ValueError(f"{cfg.kind.value} needs allocation and recommendation RNGs")
        return _STOCHASTIC[cfg.kind](cfg, grid, rng, rec_rng)
    return _DETERMINISTIC[cfg.kind](cfg, grid)
