#!/usr/bin/env python3
"""Record console contract fixtures from the live session service.

Runs the HTTP service against a scratch data directory, drives one complete
cohort-entry -> recommendation -> finalize flow with a deterministic outcome
script, and saves every request/response pair for the console's contract
tests.

Usage: python scripts/record_console_fixtures.py [output.json]
"""

import json
import sys
import tempfile
import threading
import urllib.request
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from doselab.policies import PolicyConfig, PolicyKind  # noqa: E402
from doselab.scenarios_io import builtin_scenarios  # noqa: E402
from doselab.service import make_server  # noqa: E402
from doselab.trial_engine import RngStream, run_trial  # noqa: E402

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else (
    Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures" / "flow.json")

FIXTURE_SEED = 90210
N_PATIENTS = 27  # nine cohorts: six forced plus three adaptive


def main() -> None:
    scenario = builtin_scenarios()["main-setting"]
    cfg = PolicyConfig(kind=PolicyKind.SEEDA, theta=scenario.theta)
    trace = run_trial(scenario, cfg, n_patients=N_PATIENTS, cohort_size=3,
                      rng_stream=RngStream(FIXTURE_SEED, 0, 0))

    steps = []
    with tempfile.TemporaryDirectory() as tmp:
        server = make_server(0, tmp)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"

        def call(method, path, body=None):
            data = json.dumps(body).encode() if body is not None else None
            req = urllib.request.Request(base + path, data=data, method=method,
                                         headers={"Content-Type": "application/json"})
            try:
                with urllib.request.urlopen(req) as resp:
                    payload = json.loads(resp.read())
                    status = resp.status
            except urllib.error.HTTPError as err:  # record rejections verbatim
                payload = json.loads(err.read())
                status = err.code
            steps.append({"request": {"method": method, "path": path, "body": body},
                          "response": {"status": status, "body": payload}})
            return status, payload

        config = {"policy": "seeda", "theta": scenario.theta, "cohort_size": 3,
                  "prior_tox": list(scenario.prior_tox)}
        _, created = call("POST", "/sessions", config)
        sid = created["session_id"]
        call("GET", f"/sessions/{sid}/recommendation")
        next_dose = created["next"]["dose_index"]
        stale_post = None
        for start in range(0, trace.n_patients, 3):
            assert next_dose == int(trace.doses[start])
            outcomes = [[int(trace.eff_outcomes[i]), int(trace.tox_outcomes[i])]
                        for i in range(start, start + 3)]
            body = {"dose": next_dose, "outcomes": outcomes, "override": False}
            _, reply = call("POST", f"/sessions/{sid}/outcomes", body)
            next_dose = reply["next"]["dose_index"]
            if stale_post is None:
                # replay the first cohort from a stale client view: the server
                # must reject it verbatim (the recommendation moved on)
                stale_post = body
                status, _ = call("POST", f"/sessions/{sid}/outcomes", stale_post)
                assert status == 422
        call("GET", f"/sessions/{sid}")
        call("POST", f"/sessions/{sid}/finalize")
        call("GET", f"/sessions/{sid}")
        server.shutdown()

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({
        "recorded_with": {"scenario": scenario.name, "seed": FIXTURE_SEED,
                          "n_patients": N_PATIENTS},
        "steps": steps,
    }, indent=2, sort_keys=True) + "\n")
    doses = [s["response"]["body"].get("next", {}).get("dose_index")
             for s in steps if s["request"]["path"].endswith("/outcomes")
             and s["response"]["status"] == 200]
    print(f"wrote {OUT} ({len(steps)} steps; decision sequence {doses})")


if __name__ == "__main__":
    main()
