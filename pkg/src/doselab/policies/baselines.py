"""Baseline designs: efficacy-index allocators, Thompson samplers, the
rule-based 3+3 ladder, and the bi-objective Pareto sampler."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..dose_model import DoseGrid, ValidationError
from .base import (
    DosePolicy,
    PolicyConfig,
    PolicyDecision,
    PolicyKind,
    Recommendation,
    TrialState,
    constrained_recommend,
)
from .indices import klucb_index, ucb1_index


class Ucb1Policy(DosePolicy):
    """Pure efficacy UCB; safety enters only through the final recommendation."""

    kind = PolicyKind.UCB1

    def select(self) -> PolicyDecision:
        if self.state.cohorts < self.grid.count:
            return PolicyDecision(dose_index=self.state.cohorts + 1,
                                  flags=("forced-init",))
        values = [ucb1_index(q, int(n), self.state.t, self.cfg.c)
                  for q, n in zip(self.state.q_hat, self.state.n_per_dose)]
        return PolicyDecision(dose_index=int(np.argmax(values)) + 1,
                              index_values=tuple(values))

    def recommend(self) -> Recommendation:
        return constrained_recommend(self.state, self.cfg.theta)


class KlUcbPolicy(DosePolicy):
    """Efficacy allocation by the Bernoulli KL upper-confidence index."""

    kind = PolicyKind.KL_UCB

    def select(self) -> PolicyDecision:
        if self.state.cohorts < self.grid.count:
            return PolicyDecision(dose_index=self.state.cohorts + 1,
                                  flags=("forced-init",))
        values = [klucb_index(q, int(n), self.state.t)
                  for q, n in zip(self.state.q_hat, self.state.n_per_dose)]
        return PolicyDecision(dose_index=int(np.argmax(values)) + 1,
                              index_values=tuple(values))

    def recommend(self) -> Recommendation:
        return constrained_recommend(self.state, self.cfg.theta)


class IndependentTsPolicy(DosePolicy):
    """Thompson sampling with independent Beta(1,1) posteriors per dose.

    Allocation draws and recommendation draws come from separate generators so
    interim recommendations never perturb the allocation path.
    """

    kind = PolicyKind.INDEPENDENT_TS

    def __init__(self, cfg: PolicyConfig, grid: DoseGrid,
                 rng: np.random.Generator, rec_rng: np.random.Generator):
        super().__init__(cfg, grid)
        self.rng = rng
        self.rec_rng = rec_rng

    def _draw(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        n = self.state.n_per_dose
        p_tilde = rng.beta(self.state.tox_events + 1, n - self.state.tox_events + 1)
        q_tilde = rng.beta(self.state.eff_successes + 1, n - self.state.eff_successes + 1)
        return p_tilde, q_tilde

    def select(self) -> PolicyDecision:
        if self.state.cohorts < self.grid.count:
            return PolicyDecision(dose_index=self.state.cohorts + 1,
                                  flags=("forced-init",))
        _, q_tilde = self._draw(self.rng)
        return PolicyDecision(dose_index=int(np.argmax(q_tilde)) + 1,
                              index_values=tuple(q_tilde))

    def recommend(self) -> Recommendation:
        p_tilde, q_tilde = self._draw(self.rec_rng)
        safe = np.flatnonzero(p_tilde <= self.cfg.theta)
        if len(safe) == 0:
            return Recommendation(dose_index=1, flags=("no-safe-dose",))
        return Recommendation(dose_index=int(safe[np.argmax(q_tilde[safe])]) + 1)


def pareto_front(p_tilde: Sequence[float], q_tilde: Sequence[float]) -> tuple[int, ...]:
    """Non-dominated dose indices (1-based): no other dose is at least as safe
    and at least as effective with one strict improvement."""
    p = np.asarray(p_tilde, dtype=float)
    q = np.asarray(q_tilde, dtype=float)
    k = len(p)
    front = []
    for i in range(k):
        dominated = False
        for j in range(k):
            if j == i:
                continue
            if p[j] <= p[i] and q[j] >= q[i] and (p[j] < p[i] or q[j] > q[i]):
                dominated = True
                break
        if not dominated:
            front.append(i + 1)
    return tuple(front)


class ParetoTsPolicy(IndependentTsPolicy):
    """Bi-objective Thompson sampling: uniform choice on the sampled Pareto set."""

    kind = PolicyKind.PARETO_TS

    def select(self) -> PolicyDecision:
        if self.state.cohorts < self.grid.count:
            return PolicyDecision(dose_index=self.state.cohorts + 1,
                                  flags=("forced-init",))
        p_tilde, q_tilde = self._draw(self.rng)
        front = pareto_front(p_tilde, q_tilde)
        pick = front[int(self.rng.integers(len(front)))]
        return PolicyDecision(dose_index=pick, index_values=tuple(q_tilde))


class ThreePlusThreePolicy(DosePolicy):
    """Rule-based escalation ladder with cohorts of exactly 3.

    A clean first cohort escalates; any toxicity expands the dose to 6
    patients, after which fewer than 2 total toxicities escalates and anything
    else stops the trial and recommends the previous dose.
    """

    kind = PolicyKind.THREE_PLUS_THREE

    def __init__(self, cfg: PolicyConfig, grid: DoseGrid):
        super().__init__(cfg, grid)
        self.current0 = 0
        self.expanded = False
        self._tox_first = 0
        self._stopped = False
        self._recommendation: Optional[Recommendation] = None

    @property
    def finished(self) -> bool:
        return self._stopped

    def select(self) -> PolicyDecision:
        if self._stopped:
            raise ValidationError("design already stopped")
        flags = ("expansion",) if self.expanded else ()
        return PolicyDecision(dose_index=self.current0 + 1, flags=flags)

    def _stop(self, rec0: int, flags: tuple[str, ...] = ()) -> None:
        self._stopped = True
        self._recommendation = Recommendation(dose_index=rec0 + 1, flags=flags)

    def _escalate(self) -> None:
        if self.current0 + 1 >= self.grid.count:
            self._stop(self.current0)  # cleared the top dose
            return
        self.current0 += 1
        self.expanded = False

    def record(self, dose_index: int, xs: Sequence[int], ys: Sequence[int]) -> None:
        if len(ys) != 3:
            raise ValidationError("the 3+3 ladder requires cohorts of exactly 3")
        if dose_index != self.current0 + 1:
            raise ValidationError("outcomes must be for the current ladder dose")
        super().record(dose_index, xs, ys)
        tox = int(np.asarray(ys).sum())
        if not self.expanded:
            if tox == 0:
                self._escalate()
            else:
                self.expanded = True
                self._tox_first = tox
        else:
            if self._tox_first + tox < 2:
                self._escalate()
            elif self.current0 == 0:
                self._stop(0, flags=("no-safe-dose",))
            else:
                self._stop(self.current0 - 1)

    def recommend(self) -> Recommendation:
        if self._recommendation is not None:
            return self._recommendation
        # budget exhausted mid-ladder: the current dose is the best cleared one
        return Recommendation(dose_index=self.current0 + 1, flags=("budget-exhausted",))
