"""Safe-exploration allocation: admissible-set screening plus a UCB efficacy
race, and the plateau-aware variant that tracks a leader and explores its
neighbourhood."""

from __future__ import annotations

import numpy as np

from ..dose_model import (
    DoseGrid,
    RegularityParams,
    ToxicityEstimate,
    admissible_prefix_len,
    confidence_radius,
    invert_toxicity,
    toxicity_prob,
)
from .base import (
    DosePolicy,
    PolicyConfig,
    PolicyDecision,
    PolicyKind,
    Recommendation,
    TrialState,
    constrained_recommend,
)
from .indices import ucb1_index


def build_estimate(state: TrialState, k_doses: int, delta: float,
                   params: RegularityParams) -> ToxicityEstimate:
    """Allocation-weighted aggregate of per-dose parameter inversions."""
    weights = state.n_per_dose / state.t
    a_hat = float(weights @ state.a_hat_per_dose)
    alpha = confidence_radius(state.t, k_doses, delta, params)
    return ToxicityEstimate(
        a_hat_per_dose=tuple(float(a) for a in state.a_hat_per_dose),
        weights=tuple(float(w) for w in weights),
        a_hat=a_hat,
        alpha=alpha,
    )


def _ucb_values(state: TrialState, c: float) -> np.ndarray:
    return np.array([
        ucb1_index(q, int(n), state.t, c)
        for q, n in zip(state.q_hat, state.n_per_dose)
    ])


def seeda_select(state: TrialState, grid: DoseGrid, cfg: PolicyConfig,
                 params: RegularityParams) -> PolicyDecision:
    """Argmax of the UCB efficacy index restricted to the admissible prefix."""
    if state.cohorts < grid.count:
        return PolicyDecision(dose_index=state.cohorts + 1, flags=("forced-init",))
    est = build_estimate(state, grid.count, cfg.delta, params)
    m = admissible_prefix_len(est.a_hat, est.alpha, cfg.theta, grid)
    values = _ucb_values(state, cfg.c)
    if m == 0:
        return PolicyDecision(dose_index=1, admissible=(),
                              index_values=tuple(values),
                              flags=("empty-admissible",))
    pick = int(np.argmax(values[:m]))  # ties resolve to the lowest dose
    return PolicyDecision(dose_index=pick + 1,
                          admissible=tuple(range(1, m + 1)),
                          index_values=tuple(values))


def seeda_recommend(state: TrialState, grid: DoseGrid, cfg: PolicyConfig) -> Recommendation:
    """Largest dose whose model toxicity at the final estimate stays within theta.

    Model toxicity is monotone in the dose label, so the argmax over admissible
    model toxicities is the top of the zero-radius admissible prefix.
    """
    weights = state.n_per_dose / state.t
    a_hat = float(weights @ state.a_hat_per_dose)
    m = admissible_prefix_len(a_hat, 0.0, cfg.theta, grid)
    if m == 0:
        return Recommendation(dose_index=1, flags=("no-safe-dose",))
    return Recommendation(dose_index=m)


def plateau_turning_point(state: TrialState, admissible: tuple[int, ...],
                          tol: float) -> int:
    """First admissible dose sitting on the efficacy plateau.

    Smallest admissible dose whose empirical efficacy is within ``tol`` of the
    best admissible efficacy and whose successor does not drop by more than
    ``tol``.  Returns the top dose index when no dose qualifies (no detected
    plateau).
    """
    k = state.k_doses
    if not admissible:
        return k
    q = state.q_hat
    cand = [i - 1 for i in admissible]
    best = float(np.max(q[cand]))
    for m0 in cand:
        if q[m0] < best - tol:
            continue
        if m0 + 1 >= k or q[m0 + 1] >= q[m0] - tol:
            return m0 + 1
    return k


def plateau_select(state: TrialState, grid: DoseGrid, cfg: PolicyConfig,
                   params: RegularityParams) -> PolicyDecision:
    """Leader-centred selection: play the leader on its period, otherwise the
    best UCB index among the leader's admissible neighbours.

    Mutates ``state.leader_counts`` (the tally drives the leader period).
    """
    if state.cohorts < grid.count:
        return PolicyDecision(dose_index=state.cohorts + 1, flags=("forced-init",))
    est = build_estimate(state, grid.count, cfg.delta, params)
    m = admissible_prefix_len(est.a_hat, est.alpha, cfg.theta, grid)
    values = _ucb_values(state, cfg.c)
    if m == 0:
        return PolicyDecision(dose_index=1, admissible=(),
                              index_values=tuple(values),
                              flags=("empty-admissible",))
    leader0 = int(np.argmax(state.q_hat[:m]))
    state.leader_counts[leader0] += 1
    if (state.leader_counts[leader0] - 1) % (cfg.eta + 1) == 0:
        pick = leader0
    else:
        neighbours = [j for j in (leader0 - 1, leader0, leader0 + 1) if 0 <= j < m]
        pick = neighbours[int(np.argmax(values[neighbours]))]
    return PolicyDecision(dose_index=pick + 1,
                          admissible=tuple(range(1, m + 1)),
                          index_values=tuple(values),
                          leader=leader0 + 1)


def plateau_recommend(state: TrialState, grid: DoseGrid, cfg: PolicyConfig,
                      params: RegularityParams) -> Recommendation:
    """Lesser of the detected plateau onset and the model-based top safe dose."""
    est = build_estimate(state, grid.count, cfg.delta, params)
    m = admissible_prefix_len(est.a_hat, est.alpha, cfg.theta, grid)
    admissible = tuple(range(1, m + 1))
    l1 = plateau_turning_point(state, admissible, cfg.plateau_tol)
    l2 = seeda_recommend(state, grid, cfg)
    if l1 < l2.dose_index:
        return Recommendation(dose_index=l1)
    return l2


class SeedaPolicy(DosePolicy):
    """Admissible-set UCB allocator; recommends by the empirical constrained rule."""

    kind = PolicyKind.SEEDA

    def __init__(self, cfg: PolicyConfig, grid: DoseGrid):
        super().__init__(cfg, grid)
        # unsampled doses carry the zero-toxicity inversion (domain upper end)
        self.state.a_hat_per_dose = np.full(grid.count, cfg.estimate_domain[1])

    def select(self) -> PolicyDecision:
        return seeda_select(self.state, self.grid, self.cfg, self.cfg.regularity)

    def _after_record(self, dose0: int) -> None:
        p_hat = self.state.tox_events[dose0] / self.state.n_per_dose[dose0]
        self.state.a_hat_per_dose[dose0] = invert_toxicity(
            float(p_hat), self.grid.labels[dose0], self.cfg.estimate_domain)

    def recommend(self) -> Recommendation:
        return constrained_recommend(self.state, self.cfg.theta)

    def model_recommend(self) -> Recommendation:
        """Model-based rule: top dose of the zero-radius admissible prefix."""
        return seeda_recommend(self.state, self.grid, self.cfg)

    def estimate(self) -> ToxicityEstimate:
        return build_estimate(self.state, self.grid.count, self.cfg.delta,
                              self.cfg.regularity)

    def model_toxicity(self) -> np.ndarray:
        """Per-dose model toxicity at the current aggregated estimate."""
        return toxicity_prob(self.estimate().a_hat, self.grid.as_array())

    def model_parameter(self) -> float:
        return self.estimate().a_hat


class SeedaPlateauPolicy(SeedaPolicy):
    """Plateau-aware variant: leader tracking plus turning-point recommendation."""

    kind = PolicyKind.SEEDA_PLATEAU

    def select(self) -> PolicyDecision:
        return plateau_select(self.state, self.grid, self.cfg, self.cfg.regularity)

    def recommend(self) -> Recommendation:
        return plateau_recommend(self.state, self.grid, self.cfg, self.cfg.regularity)
