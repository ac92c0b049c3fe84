import json

import numpy as np
import pytest

from doselab.dose_model import ValidationError, skeleton_from_prior
from doselab.policies import PolicyConfig, PolicyKind, SeedaPolicy
from doselab.policies.bayes import truncated_prior_mean
from doselab.sessions import SessionConflictError, SessionStore, UnknownSessionError

PRIOR_TOX = [0.02, 0.06, 0.12, 0.20, 0.30, 0.40]


def seeda_config(**overrides):
    doc = {"policy": "seeda", "theta": 0.35, "cohort_size": 3,
           "prior_tox": PRIOR_TOX}
    doc.update(overrides)
    return doc


@pytest.fixture()
def store(tmp_path):
    return SessionStore(tmp_path)


class TestCreate:
    def test_first_recommendation_is_dose_one(self, store):
        session = store.create(seeda_config())
        assert session.pending.dose_index == 1

    def test_two_creations_get_distinct_ids(self, store):
        a = store.create(seeda_config())
        b = store.create(seeda_config())
        assert a.session_id != b.session_id

    def test_rejects_threshold_above_one(self, store):
        with pytest.raises(ValidationError):
            store.create(seeda_config(theta=1.2))

    def test_rejects_unsupported_policy(self, store):
        with pytest.raises(ValidationError):
            store.create(seeda_config(policy="crm"))

    def test_rejects_short_prior(self, store):
        with pytest.raises(ValidationError):
            store.create(seeda_config(prior_tox=[0.2]))

    def test_plateau_sessions_supported(self, store):
        session = store.create(seeda_config(policy="seeda-plateau"))
        assert session.pending.dose_index == 1


class TestOutcomes:
    def test_forced_initialization_walks_the_grid(self, store):
        session = store.create(seeda_config())
        for dose in range(1, 7):
            assert session.pending.dose_index == dose
            session = store.post_outcomes(session.session_id, dose,
                                          [[0, 0], [0, 0], [0, 0]])
        assert session.policy.state.cohorts == 6
        assert session.pending.admissible is not None

    def test_wrong_cohort_size_rejected(self, store):
        session = store.create(seeda_config())
        with pytest.raises(ValidationError):
            store.post_outcomes(session.session_id, 1, [[0, 0]])

    def test_non_bit_outcomes_rejected(self, store):
        session = store.create(seeda_config())
        with pytest.raises(ValidationError):
            store.post_outcomes(session.session_id, 1, [[0, 2], [0, 0], [0, 0]])

    def test_dose_mismatch_needs_override(self, store):
        session = store.create(seeda_config())
        with pytest.raises(ValidationError):
            store.post_outcomes(session.session_id, 3, [[0, 0], [0, 0], [0, 0]])
        session = store.post_outcomes(session.session_id, 3,
                                      [[0, 0], [0, 0], [0, 0]], override=True)
        assert session.events[-1]["override"] is True
        assert session.policy.state.n_per_dose[2] == 3

    def test_unknown_session_raises(self, store):
        with pytest.raises(UnknownSessionError):
            store.post_outcomes("0" * 32, 1, [[0, 0], [0, 0], [0, 0]])


class TestFinalize:
    def run_init(self, store, session):
        rng = np.random.default_rng(1)
        for dose in range(1, 7):
            ys = (rng.random(3) < 0.1).astype(int)
            session = store.post_outcomes(session.session_id, dose,
                                          [[0, int(y)] for y in ys])
        return session

    def test_too_few_cohorts_conflicts(self, store):
        session = store.create(seeda_config())
        with pytest.raises(SessionConflictError):
            store.finalize(session.session_id)

    def test_finalize_right_after_initialization(self, store):
        session = self.run_init(store, store.create(seeda_config()))
        result = store.finalize(session.session_id)
        assert 1 <= result["dose_index"] <= 6
        assert result["estimates"]["a_hat"] is not None

    def test_double_finalize_conflicts(self, store):
        session = self.run_init(store, store.create(seeda_config()))
        store.finalize(session.session_id)
        with pytest.raises(SessionConflictError):
            store.finalize(session.session_id)

    def test_no_outcomes_after_finalize(self, store):
        session = self.run_init(store, store.create(seeda_config()))
        store.finalize(session.session_id)
        with pytest.raises(SessionConflictError):
            store.post_outcomes(session.session_id, 1, [[0, 0], [0, 0], [0, 0]])


class TestReplay:
    def feed(self, store, outcomes_by_cohort):
        session = store.create(seeda_config())
        for pairs in outcomes_by_cohort:
            session = store.post_outcomes(session.session_id,
                                          session.pending.dose_index, pairs)
        return session

    def test_restart_reproduces_the_next_recommendation(self, store, tmp_path):
        rng = np.random.default_rng(3)
        cohorts = [[[int(rng.random() < 0.5), int(rng.random() < 0.2)]
                    for _ in range(3)] for _ in range(10)]
        session = self.feed(store, cohorts)
        expected = session.pending.dose_index
        reopened = SessionStore(tmp_path)
        replica = reopened.get(session.session_id)
        assert replica.pending.dose_index == expected
        assert replica.policy.state.snapshot() == session.policy.state.snapshot()

    def test_crash_between_append_and_response(self, store, tmp_path):
        # simulate a crash: the event hit the log but no response was produced;
        # a restart must replay it and serve the same next recommendation
        session = self.feed(store, [[[0, 0]] * 3 for _ in range(6)])
        log_path = tmp_path / f"{session.session_id}.jsonl"
        event = {"event": "outcomes", "dose": session.pending.dose_index,
                 "outcomes": [[1, 0], [1, 0], [0, 0]], "override": False}
        with open(log_path, "a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
        reopened = SessionStore(tmp_path)
        replica = reopened.get(session.session_id)
        assert replica.policy.state.cohorts == 7
        # the recommendation equals what a fresh policy fed the same outcomes makes
        grid = skeleton_from_prior(PRIOR_TOX, truncated_prior_mean())
        policy = SeedaPolicy(PolicyConfig(kind=PolicyKind.SEEDA, theta=0.35), grid)
        for ev in [e for e in replica.events if e["event"] == "outcomes"] + [event]:
            policy.select()
            policy.record(ev["dose"], [p[0] for p in ev["outcomes"]],
                          [p[1] for p in ev["outcomes"]])
        assert replica.pending.dose_index == policy.select().dose_index

    def test_replayed_finalized_session_is_read_only(self, store, tmp_path):
        session = self.feed(store, [[[0, 0]] * 3 for _ in range(6)])
        store.finalize(session.session_id)
        reopened = SessionStore(tmp_path)
        replica = reopened.get(session.session_id)
        assert replica.finalized
        with pytest.raises(SessionConflictError):
            reopened.post_outcomes(session.session_id, 1, [[0, 0]] * 3)

    def test_index_lists_every_session(self, store, tmp_path):
        ids = {store.create(seeda_config()).session_id for _ in range(3)}
        index = json.loads((tmp_path / "index.json").read_text())
        assert set(index) == ids
        assert {s["session_id"] for s in store.list_sessions()} == ids
