"""Deterministic Monte Carlo engine: scenario-driven patient outcomes, full
trial runs at cohort granularity, and batched replications on isolated
counter-based random streams."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .dose_model import DoseGrid, ValidationError, skeleton_from_prior
from .policies import (
    PolicyConfig,
    PolicyKind,
    Recommendation,
    make_policy,
)
from .policies.bayes import truncated_prior_mean

#: Stable stream id per design; adding a policy to a batch never perturbs
#: another policy's draws.
POLICY_STREAM_ID = {kind: i for i, kind in enumerate(PolicyKind)}

_SUB_OUTCOMES = 0
_SUB_ALLOC = 1
_SUB_RECOMMEND = 2


@dataclass(frozen=True)
class RngStream:
    """Coordinates of one reproducible random stream.

    ``(master_seed, replication_id, stream_id, substream)`` keys a Philox
    counter-based generator, so any draw sequence is a pure function of the
    tuple regardless of scheduling or batch composition.
    """

    master_seed: int
    replication_id: int
    stream_id: int

    def generator(self, substream: int = 0) -> np.random.Generator:
        seq = np.random.SeedSequence(
            [self.master_seed, self.replication_id, self.stream_id, substream])
        return np.random.Generator(np.random.Philox(seq))


def sample_outcome(rng: np.random.Generator, q: float, p: float) -> tuple[int, int]:
    """One patient's (efficacy, toxicity) bits from consecutive stream positions."""
    if not (0.0 <= q <= 1.0 and 0.0 <= p <= 1.0):
        raise ValidationError("outcome probabilities must lie in [0, 1]")
    x = int(rng.random() < q)
    y = int(rng.random() < p)
    return x, y


@dataclass(frozen=True)
class Scenario:
    """Dose grid with ground-truth response probabilities and the MTD threshold."""

    name: str
    true_tox: tuple[float, ...]
    true_eff: tuple[float, ...]
    theta: float
    prior_tox: tuple[float, ...]
    prior_eff: tuple[float, ...]
    optimal_dose: int                      # 1-based
    plateau_start: Optional[int] = None    # 1-based onset of the efficacy plateau

    def __post_init__(self):
        tox = np.asarray(self.true_tox, dtype=float)
        eff = np.asarray(self.true_eff, dtype=float)
        if not (len(tox) == len(eff) == len(self.prior_tox) == len(self.prior_eff)):
            raise ValidationError("probability lists must share one length")
        if len(tox) < 2:
            raise ValidationError("scenario needs at least 2 doses")
        if np.any(tox < 0) or np.any(tox > 1) or np.any(eff < 0) or np.any(eff > 1):
            raise ValidationError("probabilities must lie in [0, 1]")
        if np.any(np.diff(tox) < 0):
            raise ValidationError("true toxicities must be nondecreasing")
        if not 0.0 < self.theta < 1.0:
            raise ValidationError("theta must lie in (0, 1)")
        if self.optimal_dose != self.recompute_optimal_dose():
            raise ValidationError(
                f"declared optimal dose {self.optimal_dose} disagrees with the "
                f"probability lists (expected {self.recompute_optimal_dose()})")
        if self.plateau_start is not None and not 1 <= self.plateau_start <= len(tox):
            raise ValidationError("plateau onset outside the grid")

    @property
    def k_doses(self) -> int:
        return len(self.true_tox)

    def recompute_optimal_dose(self) -> int:
        """Lowest safe dose attaining the maximum efficacy among safe doses."""
        tox = np.asarray(self.true_tox)
        eff = np.asarray(self.true_eff)
        safe = np.flatnonzero(tox <= self.theta)
        if len(safe) == 0:
            raise ValidationError("scenario has no safe dose")
        best = eff[safe].max()
        return int(safe[np.flatnonzero(eff[safe] == best)[0]]) + 1

    @cached_property
    def grid(self) -> DoseGrid:
        a0 = truncated_prior_mean()
        return skeleton_from_prior(self.prior_tox, a0)


@dataclass(frozen=True)
class Checkpoint:
    """Interim recommendation recorded at a cohort boundary."""

    t: int
    dose_index: int
    flags: tuple[str, ...] = ()
    a_hat: Optional[float] = None


@dataclass
class TrialTrace:
    """Full per-patient record of one simulated trial."""

    policy: str
    scenario: str
    cohort_size: int
    doses: np.ndarray          # 1-based dose per patient
    eff_outcomes: np.ndarray
    tox_outcomes: np.ndarray
    checkpoints: list[Checkpoint]
    final_recommendation: Recommendation
    final_state: dict
    flags: tuple[str, ...] = ()

    @property
    def n_patients(self) -> int:
        return len(self.doses)

    def allocation_counts(self, k_doses: int) -> np.ndarray:
        return np.bincount(self.doses - 1, minlength=k_doses).astype(np.int64)

    def to_jsonable(self) -> dict:
        return {
            "policy": self.policy,
            "scenario": self.scenario,
            "cohort_size": self.cohort_size,
            "doses": self.doses.tolist(),
            "eff_outcomes": self.eff_outcomes.tolist(),
            "tox_outcomes": self.tox_outcomes.tolist(),
            "checkpoints": [
                {"t": c.t, "dose_index": c.dose_index, "flags": list(c.flags),
                 "a_hat": c.a_hat}
                for c in self.checkpoints
            ],
            "final_recommendation": {
                "dose_index": self.final_recommendation.dose_index,
                "flags": list(self.final_recommendation.flags),
            },
            "final_state": self.final_state,
            "flags": list(self.flags),
        }

    @classmethod
    def from_jsonable(cls, doc: dict) -> "TrialTrace":
        return cls(
            policy=doc["policy"],
            scenario=doc["scenario"],
            cohort_size=doc["cohort_size"],
            doses=np.asarray(doc["doses"], dtype=np.int64),
            eff_outcomes=np.asarray(doc["eff_outcomes"], dtype=np.int8),
            tox_outcomes=np.asarray(doc["tox_outcomes"], dtype=np.int8),
            checkpoints=[Checkpoint(t=c["t"], dose_index=c["dose_index"],
                                    flags=tuple(c["flags"]), a_hat=c["a_hat"])
                         for c in doc["checkpoints"]],
            final_recommendation=Recommendation(
                dose_index=doc["final_recommendation"]["dose_index"],
                flags=tuple(doc["final_recommendation"]["flags"])),
            final_state=doc["final_state"],
            flags=tuple(doc["flags"]),
        )


def run_trial(scenario: Scenario, cfg: PolicyConfig, n_patients: int,
              cohort_size: int, rng_stream: RngStream) -> TrialTrace:
    """Drive one policy through a full trial, recording every patient and a
    checkpoint recommendation after every cohort."""
    if n_patients < 1 or cohort_size < 1:
        raise ValidationError("n_patients and cohort_size must be positive")
    trial_flags: list[str] = []
    if n_patients % cohort_size != 0:
        trial_flags.append("truncated-final-cohort")

    prior_tox = cfg.prior_tox if cfg.prior_tox is not None else scenario.prior_tox
    grid = (scenario.grid if prior_tox == scenario.prior_tox
            else skeleton_from_prior(prior_tox, truncated_prior_mean(cfg.crm_prior_rate)))
    policy = make_policy(cfg, grid,
                         rng=rng_stream.generator(_SUB_ALLOC),
                         rec_rng=rng_stream.generator(_SUB_RECOMMEND))
    outcome_rng = rng_stream.generator(_SUB_OUTCOMES)

    tox = np.asarray(scenario.true_tox)
    eff = np.asarray(scenario.true_eff)
    doses: list[int] = []
    xs_all: list[int] = []
    ys_all: list[int] = []
    checkpoints: list[Checkpoint] = []

    remaining = n_patients
    while remaining > 0 and not policy.finished:
        size = min(cohort_size, remaining)
        decision = policy.select()
        k0 = decision.dose_index - 1
        xs, ys = [], []
        for _ in range(size):
            x, y = sample_outcome(outcome_rng, float(eff[k0]), float(tox[k0]))
            xs.append(x)
            ys.append(y)
        policy.record(decision.dose_index, xs, ys)
        doses.extend([decision.dose_index] * size)
        xs_all.extend(xs)
        ys_all.extend(ys)
        remaining -= size
        rec = policy.recommend()
        checkpoints.append(Checkpoint(t=len(doses), dose_index=rec.dose_index,
                                      flags=rec.flags, a_hat=policy.model_parameter()))

    if policy.finished and remaining > 0:
        trial_flags.append("stopped-early")
    final = policy.recommend()
    return TrialTrace(
        policy=cfg.kind.value,
        scenario=scenario.name,
        cohort_size=cohort_size,
        doses=np.asarray(doses, dtype=np.int64),
        eff_outcomes=np.asarray(xs_all, dtype=np.int8),
        tox_outcomes=np.asarray(ys_all, dtype=np.int8),
        checkpoints=checkpoints,
        final_recommendation=final,
        final_state=policy.state.snapshot(),
        flags=tuple(trial_flags),
    )


@dataclass
class BatchResult:
    """One TrialTrace per (policy, replication); immutable once built."""

    scenario: Scenario
    n_patients: int
    cohort_size: int
    replications: int
    master_seed: int
    traces: dict[str, list[TrialTrace]] = field(default_factory=dict)

    def policies(self) -> list[str]:
        return list(self.traces.keys())

    def to_json_bytes(self) -> bytes:
        doc = {
            "schema_version": 1,
            "scenario": {
                "name": self.scenario.name,
                "theta": self.scenario.theta,
                "tox": list(self.scenario.true_tox),
                "eff": list(self.scenario.true_eff),
                "prior_tox": list(self.scenario.prior_tox),
                "prior_eff": list(self.scenario.prior_eff),
                "optimal_dose": self.scenario.optimal_dose,
                "plateau_start": self.scenario.plateau_start,
            },
            "n_patients": self.n_patients,
            "cohort_size": self.cohort_size,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "traces": {name: [t.to_jsonable() for t in traces]
                       for name, traces in sorted(self.traces.items())},
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def from_json_bytes(cls, raw) -> "BatchResult":
        doc = json.loads(raw)
        sdoc = doc["scenario"]
        scenario = Scenario(
            name=sdoc["name"], theta=sdoc["theta"],
            true_tox=tuple(sdoc["tox"]), true_eff=tuple(sdoc["eff"]),
            prior_tox=tuple(sdoc["prior_tox"]), prior_eff=tuple(sdoc["prior_eff"]),
            optimal_dose=sdoc["optimal_dose"], plateau_start=sdoc["plateau_start"])
        result = cls(scenario=scenario, n_patients=doc["n_patients"],
                     cohort_size=doc["cohort_size"],
                     replications=doc["replications"],
                     master_seed=doc["master_seed"])
        for name, traces in doc["traces"].items():
            result.traces[name] = [TrialTrace.from_jsonable(t) for t in traces]
        return result


def run_batch(scenario: Scenario, cfgs: Sequence[PolicyConfig], replications: int,
              n_patients: int, cohort_size: int, master_seed: int,
              progress=None) -> BatchResult:
    """Run every (policy, replication) pair on isolated streams.

    Replication ``r`` of a policy uses ``RngStream(master_seed, r, stream_id)``
    where the stream id is fixed per design, so results are order-independent
    and unaffected by which other policies share the batch.
    """
    if replications < 1:
        raise ValidationError("replications must be >= 1")
    result = BatchResult(scenario=scenario, n_patients=n_patients,
                         cohort_size=cohort_size, replications=replications,
                         master_seed=master_seed)
    for cfg in cfgs:
        stream_id = POLICY_STREAM_ID[cfg.kind]
        traces = []
        for rep in range(replications):
            stream = RngStream(master_seed=master_seed, replication_id=rep,
                               stream_id=stream_id)
            traces.append(run_trial(scenario, cfg, n_patients, cohort_size, stream))
        result.traces[cfg.kind.value] = traces
        if progress is not None:
            progress(cfg.kind.value, replications)
    return result
