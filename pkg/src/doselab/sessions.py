"""Live-trial sessions on an append-only event log.

Each session is one line-delimited JSON file: a header event followed by one
event per cohort and an optional finalize event.  Replaying a log from scratch
reproduces the in-memory policy state exactly, which is what makes restarts
and crash recovery safe: an event is fsynced before any response reflects it.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional


from .dose_model import ValidationError, skeleton_from_prior, toxicity_prob
from .policies import (
    DosePolicy,
    PolicyConfig,
    PolicyDecision,
    PolicyKind,
    make_policy,
)
from .policies.bayes import truncated_prior_mean
from .policies.base import (
    DEFAULT_ESTIMATE_DOMAIN,
    DEFAULT_PLATEAU_TOL,
    DEFAULT_RADIUS_EXPONENT,
    DEFAULT_RADIUS_SCALE,
    DEFAULT_RISK_DELTA,
    DEFAULT_UCB_COEFF,
)
from .dose_model import RegularityParams

SCHEMA_VERSION = 1

#: Live conduct supports the safe-exploration designs.
SESSION_POLICY_KINDS = (PolicyKind.SEEDA, PolicyKind.SEEDA_PLATEAU)


class UnknownSessionError(KeyError):
    pass


class SessionConflictError(RuntimeError):
    """Operation conflicts with the session lifecycle (finalized, too early)."""


def _parse_session_config(doc: dict) -> tuple[PolicyConfig, tuple[float, ...], int]:
    if not isinstance(doc, dict):
        raise ValidationError("session config must be an object")
    policy_name = doc.get("policy")
    try:
        kind = PolicyKind(policy_name)
    except ValueError:
        raise ValidationError(f"unknown policy '{policy_name}'")
    if kind not in SESSION_POLICY_KINDS:
        raise ValidationError(
            f"live sessions support {[k.value for k in SESSION_POLICY_KINDS]}")
    prior_tox = doc.get("prior_tox")
    if not isinstance(prior_tox, list) or len(prior_tox) < 2:
        raise ValidationError("prior_tox must list at least two probabilities")
    cohort_size = doc.get("cohort_size", 3)
    if not isinstance(cohort_size, int) or cohort_size < 1:
        raise ValidationError("cohort_size must be a positive integer")
    radius = RegularityParams.from_radius(
        float(doc.get("radius_scale", DEFAULT_RADIUS_SCALE)),
        float(doc.get("radius_exponent", DEFAULT_RADIUS_EXPONENT)))
    cfg = PolicyConfig(
        kind=kind,
        theta=doc.get("theta", -1.0),
        c=float(doc.get("c", DEFAULT_UCB_COEFF)),
        delta=float(doc.get("delta", DEFAULT_RISK_DELTA)),
        eta=int(doc.get("eta", 2)),
        prior_tox=tuple(float(x) for x in prior_tox),
        regularity=radius,
        estimate_domain=tuple(doc.get("estimate_domain", DEFAULT_ESTIMATE_DOMAIN)),
        plateau_tol=float(doc.get("plateau_tol", DEFAULT_PLATEAU_TOL)),
    )
    return cfg, cfg.prior_tox, cohort_size


@dataclass
class Session:
    """In-memory replica of one event log plus its live policy."""

    session_id: str
    created_at: str
    config_doc: dict
    cohort_size: int
    policy: DosePolicy
    events: list = field(default_factory=list)  # outcome/finalize events only
    finalized: bool = False
    pending: Optional[PolicyDecision] = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def k_doses(self) -> int:
        return self.policy.grid.count

    def decision_view(self) -> dict:
        d = self.pending
        return {
            "schema_version": SCHEMA_VERSION,
            "dose_index": d.dose_index,
            "admissible": list(d.admissible) if d.admissible is not None else None,
            "index_values": list(d.index_values) if d.index_values is not None else None,
            "leader": d.leader,
            "flags": list(d.flags),
        }

    def estimates_view(self) -> dict:
        state = self.policy.state
        view = {
            "n_per_dose": state.n_per_dose.tolist(),
            "q_hat": [float(x) for x in state.q_hat],
            "p_hat": [float(x) for x in state.p_hat],
            "a_hat": None,
            "alpha": None,
            "model_toxicity": None,
            "leader_counts": state.leader_counts.tolist(),
        }
        if state.t > 0:
            est = self.policy.estimate()
            model_tox = toxicity_prob(est.a_hat, self.policy.grid.as_array())
            view.update(a_hat=est.a_hat, alpha=est.alpha,
                        model_toxicity=[float(x) for x in model_tox])
        return view

    def summary_view(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "session_id": self.session_id,
            "created_at": self.created_at,
            "policy": self.config_doc["policy"],
            "status": "finalized" if self.finalized else "open",
            "cohorts": self.policy.state.cohorts,
            "patients": self.policy.state.t,
        }

    def full_view(self) -> dict:
        view = self.summary_view()
        view["config"] = self.config_doc
        view["history"] = [e for e in self.events if e["event"] == "outcomes"]
        view["estimates"] = self.estimates_view()
        if self.finalized:
            rec = self.policy.recommend()
            view["final"] = {"dose_index": rec.dose_index, "flags": list(rec.flags)}
        else:
            view["next"] = self.decision_view()
        return view


class SessionStore:
    """Durable session registry: one JSONL event log per session plus an index."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.data_dir / "index.json"
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._load_existing()

    # -- persistence ------------------------------------------------------

    def _load_index(self) -> dict:
        if self.index_path.exists():
            return json.loads(self.index_path.read_text())
        return {}

    def _write_index(self, index: dict) -> None:
        tmp = self.index_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(index, indent=2, sort_keys=True))
        os.replace(tmp, self.index_path)

    def _log_path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def _append(self, session: Session, event: dict) -> None:
        """Durably append one event before it takes effect anywhere."""
        with open(self._log_path(session.session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _load_existing(self) -> None:
        for session_id, filename in self._load_index().items():
            path = self.data_dir / filename
            if not path.exists():
                continue
            self._sessions[session_id] = self._replay(path)

    def _replay(self, path: Path) -> Session:
        lines = [json.loads(line) for line in path.read_text().splitlines() if line]
        header = lines[0]
        if header.get("event") != "created":
            raise ValidationError(f"corrupt session log {path.name}: missing header")
        session = self._build_session(header["session_id"], header["created_at"],
                                      header["config"])
        for event in lines[1:]:
            if event["event"] == "outcomes":
                self._apply_outcomes(session, event)
                session.events.append(event)
            elif event["event"] == "finalize":
                session.finalized = True
                session.pending = None
                session.events.append(event)
        return session

    # -- session mechanics --------------------------------------------------

    def _build_session(self, session_id: str, created_at: str,
                       config_doc: dict) -> Session:
        cfg, prior_tox, cohort_size = _parse_session_config(config_doc)
        grid = skeleton_from_prior(prior_tox, truncated_prior_mean(cfg.crm_prior_rate))
        policy = make_policy(cfg, grid)
        session = Session(session_id=session_id, created_at=created_at,
                          config_doc=config_doc, cohort_size=cohort_size,
                          policy=policy)
        session.pending = policy.select()
        return session

    @staticmethod
    def _apply_outcomes(session: Session, event: dict) -> None:
        dose = event["dose"]
        pairs = event["outcomes"]
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        session.policy.record(dose, xs, ys)
        session.pending = session.policy.select()

    # -- public API -----------------------------------------------------------

    def create(self, config_doc: dict) -> Session:
        cfg_check = _parse_session_config(config_doc)  # validate before persisting
        del cfg_check
        session_id = uuid.uuid4().hex
        created_at = datetime.now(timezone.utc).isoformat()
        session = self._build_session(session_id, created_at, config_doc)
        with self._lock:
            self._append(session, {"event": "created",
                                   "schema_version": SCHEMA_VERSION,
                                   "session_id": session_id,
                                   "created_at": created_at,
                                   "config": config_doc})
            index = self._load_index()
            index[session_id] = f"{session_id}.jsonl"
            self._write_index(index)
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id)

    def list_sessions(self) -> list[dict]:
        with self._lock:
            return [s.summary_view() for s in self._sessions.values()]

    def post_outcomes(self, session_id: str, dose: int, outcomes: list,
                      override: bool = False) -> Session:
        session = self.get(session_id)
        with session.lock:
            if session.finalized:
                raise SessionConflictError("session is finalized")
            if not isinstance(outcomes, list) or len(outcomes) != session.cohort_size:
                raise ValidationError(
                    f"expected {session.cohort_size} outcome pairs")
            for pair in outcomes:
                if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                        or any(b not in (0, 1) for b in pair)):
                    raise ValidationError("each outcome must be a pair of 0/1 bits")
            if not isinstance(dose, int) or not 1 <= dose <= session.k_doses:
                raise ValidationError("dose outside the session grid")
            if dose != session.pending.dose_index and not override:
                raise ValidationError(
                    f"dose {dose} differs from the recommendation "
                    f"{session.pending.dose_index}; set override to record it")
            event = {"event": "outcomes", "dose": dose,
                     "outcomes": [list(p) for p in outcomes],
                     "override": bool(dose != session.pending.dose_index)}
            self._append(session, event)
            self._apply_outcomes(session, event)
            session.events.append(event)
        return session

    def finalize(self, session_id: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            if session.finalized:
                raise SessionConflictError("session already finalized")
            if session.policy.state.cohorts < session.k_doses:
                raise SessionConflictError(
                    f"needs at least {session.k_doses} cohorts before finalizing "
                    f"(has {session.policy.state.cohorts})")
            self._append(session, {"event": "finalize"})
            session.finalized = True
            session.pending = None
            session.events.append({"event": "finalize"})
            rec = session.policy.recommend()
            return {
                "schema_version": SCHEMA_VERSION,
                "session_id": session_id,
                "dose_index": rec.dose_index,
                "flags": list(rec.flags),
                "estimates": session.estimates_view(),
            }
