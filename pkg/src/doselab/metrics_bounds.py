"""Batch statistics (recommendation/allocation percentages, regret, safety,
type errors, sample efficiency) and the closed-form theoretical quantities as
computable diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dose_model import DomainError, RegularityParams, ValidationError, toxicity_prob
from .policies import PolicyKind
from .trial_engine import BatchResult, Scenario, TrialTrace

#: Substream used for posterior draws when scoring sampling designs' estimates.
_METRICS_SUBSTREAM = 9

_MODEL_BASED = {PolicyKind.SEEDA.value, PolicyKind.SEEDA_PLATEAU.value,
                PolicyKind.CRM.value, PolicyKind.MCRM.value}
_SAMPLING = {PolicyKind.INDEPENDENT_TS.value, PolicyKind.PARETO_TS.value}


def regret_curve(trace: TrialTrace, scenario: Scenario) -> np.ndarray:
    """Cumulative pseudo-regret ``q* t - sum q_I(s)`` using true efficacies."""
    eff = np.asarray(scenario.true_eff)
    q_star = eff[scenario.optimal_dose - 1]
    per_patient = eff[trace.doses - 1]
    return q_star * np.arange(1, trace.n_patients + 1) - np.cumsum(per_patient)


def efficacy_per_patient(trace: TrialTrace, scenario: Scenario) -> np.ndarray:
    """Running mean of the true efficacy of the allocated doses."""
    eff = np.asarray(scenario.true_eff)
    per_patient = eff[trace.doses - 1]
    return np.cumsum(per_patient) / np.arange(1, trace.n_patients + 1)


def safety_stats(trace: TrialTrace, scenario: Scenario,
                 theta: float) -> tuple[np.ndarray, int]:
    """Per-patient violation indicators and the unsafe-allocation count.

    A step violates when the running mean of the true toxicities of all doses
    given so far exceeds ``theta``; the count totals patients given doses whose
    true toxicity exceeds ``theta``.
    """
    tox = np.asarray(scenario.true_tox)
    per_patient = tox[trace.doses - 1]
    running = np.cumsum(per_patient) / np.arange(1, trace.n_patients + 1)
    violation = running > theta
    counts = trace.allocation_counts(scenario.k_doses)
    unsafe = int(counts[tox > theta].sum())
    return violation, unsafe


def type_errors(estimates, true_tox, theta: float) -> tuple[int, int]:
    """Safe doses classified unsafe (e1) and unsafe doses classified safe (e2)."""
    est = np.asarray(estimates, dtype=float)
    tox = np.asarray(true_tox, dtype=float)
    e1 = int(np.sum((tox <= theta) & (est > theta)))
    e2 = int(np.sum((tox > theta) & (est <= theta)))
    return e1, e2


@dataclass
class PolicyMetrics:
    policy: str
    rec_pct_mean: list
    rec_pct_std: list
    alloc_pct_mean: list
    alloc_pct_std: list
    regret_curve: list
    efficacy_curve: list
    violation_pct_curve: list
    type1_curve: list
    type2_curve: list
    unsafe_alloc_mean: float
    unsafe_alloc_std: float

    def to_jsonable(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_jsonable(cls, doc: dict) -> "PolicyMetrics":
        return cls(**doc)


@dataclass
class MetricsReport:
    scenario: str
    n_patients: int
    cohort_size: int
    replications: int
    master_seed: int
    per_policy: dict[str, PolicyMetrics] = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        return {
            "scenario": self.scenario,
            "n_patients": self.n_patients,
            "cohort_size": self.cohort_size,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "per_policy": {k: v.to_jsonable() for k, v in self.per_policy.items()},
        }

    @classmethod
    def from_jsonable(cls, doc: dict) -> "MetricsReport":
        return cls(
            scenario=doc["scenario"],
            n_patients=doc["n_patients"],
            cohort_size=doc["cohort_size"],
            replications=doc["replications"],
            master_seed=doc["master_seed"],
            per_policy={k: PolicyMetrics.from_jsonable(v)
                        for k, v in doc["per_policy"].items()},
        )


def _std(values: np.ndarray) -> np.ndarray:
    if values.shape[0] < 2:
        return np.zeros(values.shape[1:] if values.ndim > 1 else ())
    return values.std(axis=0, ddof=1)


def _checkpoint_grid(trace: TrialTrace, boundaries: np.ndarray) -> list:
    """Trace checkpoints aligned to the batch's cohort boundaries; trials that
    stopped early repeat their final recommendation."""
    by_t = {c.t: c for c in trace.checkpoints}
    out = []
    last = trace.checkpoints[-1]
    for t in boundaries:
        out.append(by_t.get(int(t), last))
    return out


def _empirical_p_hat_prefixes(trace: TrialTrace, k_doses: int,
                              boundaries: np.ndarray) -> np.ndarray:
    """Per-boundary empirical toxicity means (doses x boundaries), prefix-computed."""
    n = np.zeros(k_doses)
    s = np.zeros(k_doses)
    out = np.zeros((len(boundaries), k_doses))
    upto = 0
    for i, t in enumerate(boundaries):
        t = min(int(t), trace.n_patients)
        while upto < t:
            k0 = trace.doses[upto] - 1
            n[k0] += 1
            s[k0] += trace.tox_outcomes[upto]
            upto += 1
        out[i] = np.where(n > 0, s / np.maximum(n, 1), 0.0)
    return out


def _estimate_matrix(trace: TrialTrace, scenario: Scenario, boundaries: np.ndarray,
                     rng: Optional[np.random.Generator]) -> np.ndarray:
    """Per-boundary toxicity estimates under each design's own convention:
    model toxicity at the running parameter estimate for model-based designs,
    posterior draws for sampling designs, empirical means otherwise."""
    labels = scenario.grid.as_array()
    if trace.policy in _MODEL_BASED:
        cps = _checkpoint_grid(trace, boundaries)
        return np.vstack([toxicity_prob(c.a_hat, labels) for c in cps])
    if trace.policy in _SAMPLING:
        k = scenario.k_doses
        n = np.zeros(k)
        s = np.zeros(k)
        out = np.zeros((len(boundaries), k))
        upto = 0
        for i, t in enumerate(boundaries):
            t = min(int(t), trace.n_patients)
            while upto < t:
                k0 = trace.doses[upto] - 1
                n[k0] += 1
                s[k0] += trace.tox_outcomes[upto]
                upto += 1
            out[i] = rng.beta(s + 1, n - s + 1)
        return out
    return _empirical_p_hat_prefixes(trace, scenario.k_doses, boundaries)


def summarize(batch: BatchResult) -> MetricsReport:
    """Across-replication means and sample standard deviations of every
    reported statistic; curves are sampled at cohort boundaries."""
    if not batch.traces:
        raise ValidationError("batch has no traces")
    scenario = batch.scenario
    k = scenario.k_doses
    n_coh = math.ceil(batch.n_patients / batch.cohort_size)
    boundaries = np.minimum(
        (np.arange(1, n_coh + 1)) * batch.cohort_size, batch.n_patients)
    report = MetricsReport(scenario=scenario.name, n_patients=batch.n_patients,
                           cohort_size=batch.cohort_size,
                           replications=batch.replications,
                           master_seed=batch.master_seed)
    for policy, traces in batch.traces.items():
        reps = len(traces)
        rec = np.zeros((reps, k))
        alloc = np.zeros((reps, k))
        regret = np.zeros((reps, n_coh))
        effic = np.zeros((reps, n_coh))
        viol = np.zeros((reps, n_coh))
        e1 = np.zeros((reps, n_coh))
        e2 = np.zeros((reps, n_coh))
        unsafe = np.zeros(reps)
        for r, trace in enumerate(traces):
            rec[r, trace.final_recommendation.dose_index - 1] = 100.0
            counts = trace.allocation_counts(k)
            alloc[r] = counts / max(trace.n_patients, 1) * 100.0
            idx = np.minimum(boundaries, trace.n_patients) - 1
            rc = regret_curve(trace, scenario)
            regret[r] = rc[idx]
            effic[r] = efficacy_per_patient(trace, scenario)[idx]
            violation, unsafe_count = safety_stats(trace, scenario, scenario.theta)
            viol[r] = violation[idx] * 100.0
            unsafe[r] = unsafe_count
            draw_rng = (np.random.Generator(np.random.Philox(np.random.SeedSequence(
                [batch.master_seed, r, _METRICS_SUBSTREAM])))
                if trace.policy in _SAMPLING else None)
            estimates = _estimate_matrix(trace, scenario, boundaries, draw_rng)
            for i in range(n_coh):
                e1[r, i], e2[r, i] = type_errors(
                    estimates[i], scenario.true_tox, scenario.theta)
        report.per_policy[policy] = PolicyMetrics(
            policy=policy,
            rec_pct_mean=rec.mean(axis=0).tolist(),
            rec_pct_std=_std(rec).tolist(),
            alloc_pct_mean=alloc.mean(axis=0).tolist(),
            alloc_pct_std=_std(alloc).tolist(),
            regret_curve=regret.mean(axis=0).tolist(),
            efficacy_curve=effic.mean(axis=0).tolist(),
            violation_pct_curve=viol.mean(axis=0).tolist(),
            type1_curve=e1.mean(axis=0).tolist(),
            type2_curve=e2.mean(axis=0).tolist(),
            unsafe_alloc_mean=float(unsafe.mean()),
            unsafe_alloc_std=float(_std(unsafe)),
        )
    return report


def min_sample_size(batch: BatchResult, target_accuracy: float,
                    floor: int = 6) -> dict[str, Optional[int]]:
    """Smallest checkpoint patient count at which the across-replication
    fraction of correct recommendations reaches the target; ``None`` when the
    target is never reached within the batch horizon."""
    if not 0.0 <= target_accuracy < 1.0:
        raise ValidationError("target accuracy must lie in [0, 1)")
    scenario = batch.scenario
    k_star = scenario.optimal_dose
    n_coh = math.ceil(batch.n_patients / batch.cohort_size)
    boundaries = np.minimum(
        (np.arange(1, n_coh + 1)) * batch.cohort_size, batch.n_patients)
    out: dict[str, Optional[int]] = {}
    for policy, traces in batch.traces.items():
        correct = np.zeros(n_coh)
        for trace in traces:
            cps = _checkpoint_grid(trace, boundaries)
            correct += np.array([c.dose_index == k_star for c in cps], dtype=float)
        accuracy = correct / len(traces)
        found = None
        for t, acc in zip(boundaries, accuracy):
            if t < floor:
                continue
            if acc >= target_accuracy:
                found = int(t)
                break
        out[policy] = found
    return out


@dataclass(frozen=True)
class BoundInputs:
    """Problem constants entering the closed-form guarantees."""

    a_star: float
    delta_gaps: tuple[float, ...]   # per-dose |a* - p_k^{-1}(theta)|
    delta_min: float
    delta_m: float                  # gap at the highest safe dose
    epsilon: float
    q_max_gap: float
    m_safe: int
    t1: float
    risk_delta: float


@dataclass(frozen=True)
class TheoryBounds:
    inputs: BoundInputs
    regret_bound: float             # cumulative-efficacy guarantee
    unsafe_allocation_bound: float  # constant cap on unsafe allocations
    recommendation_risk: float      # failure probability of the plain design
    plateau_leading_term: Optional[float]
    plateau_failure_bound: float


def fit_reference_parameter(scenario: Scenario, step: float = 1e-4) -> float:
    """Least-squares fit of the model toxicities to the scenario's true list
    over the skeleton; a diagnostic reference value for table-driven scenarios."""
    labels = scenario.grid.as_array()
    base = (np.tanh(labels) + 1.0) / 2.0
    a_grid = np.arange(0.1, 10.0 + step / 2, step)
    probs = base[:, None] ** a_grid[None, :]
    sse = ((probs - np.asarray(scenario.true_tox)[:, None]) ** 2).sum(axis=0)
    return float(a_grid[int(np.argmin(sse))])


def theory_bounds(scenario: Scenario, params: RegularityParams, c: float,
                  delta: float, epsilon: float, n: int,
                  a_star: Optional[float] = None) -> TheoryBounds:
    """Evaluate the closed-form guarantees for a scenario at given constants."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if n < 1:
        raise DomainError("n must be >= 1")
    k = scenario.k_doses
    tox = np.asarray(scenario.true_tox)
    eff = np.asarray(scenario.true_eff)
    theta = scenario.theta
    if a_star is None:
        a_star = fit_reference_parameter(scenario)
    labels = scenario.grid.as_array()
    base = (np.tanh(labels) + 1.0) / 2.0
    inverse_at_theta = np.log(theta) / np.log(base)
    gaps = np.abs(a_star - inverse_at_theta)
    delta_min = float(gaps.min())
    m_safe = int(np.sum(tox <= theta))
    if m_safe == 0:
        raise ValidationError("scenario has no safe dose")
    delta_m = float(gaps[m_safe - 1])
    q_star = float(eff[scenario.optimal_dose - 1])
    q_max_gap = float(np.max(np.abs(eff - q_star)))
    if abs(delta_min - epsilon) < 1e-15:
        raise DomainError("epsilon equals the minimal gap; bound degenerates")
    t1 = 0.5 * (params.c1_bar * k / abs(delta_min - epsilon)) ** (2.0 / params.gamma1_bar) \
        * math.log(2.0 * k / delta)
    safe_suboptimal = (tox <= theta) & (eff < q_star)
    log_term = float(np.sum(c * math.log(n) / (q_star - eff[safe_suboptimal]))) \
        if np.any(safe_suboptimal) else 0.0
    tail = (k - m_safe) / (2.0 * epsilon ** 2)
    regret_bound = log_term + n * delta * q_max_gap + t1 / 2.0 + tail
    unsafe_bound = t1 + tail
    gamma1 = 1.0 / params.gamma1_bar
    delta1 = 2.0 * k * math.exp(
        -2.0 * (delta_m / (params.c1_bar * k)) ** (2.0 * gamma1) * n)
    plateau_leading = None
    n_onset = scenario.plateau_start
    if n_onset is not None and n_onset >= 2 and eff[n_onset - 2] < q_star:
        plateau_leading = c * math.log(n) / (q_star - float(eff[n_onset - 2]))
    plateau_failure = 3.0 / n ** c + delta1
    inputs = BoundInputs(
        a_star=a_star,
        delta_gaps=tuple(float(g) for g in gaps),
        delta_min=delta_min,
        delta_m=delta_m,
        epsilon=epsilon,
        q_max_gap=q_max_gap,
        m_safe=m_safe,
        t1=t1,
        risk_delta=delta,
    )
    return TheoryBounds(
        inputs=inputs,
        regret_bound=regret_bound,
        unsafe_allocation_bound=unsafe_bound,
        recommendation_risk=delta1,
        plateau_leading_term=plateau_leading,
        plateau_failure_bound=plateau_failure,
    )
