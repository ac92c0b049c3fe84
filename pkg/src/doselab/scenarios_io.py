"""Built-in scenario catalog, scenario file parsing, and report serialization."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .dose_model import DomainError, ValidationError
from .metrics_bounds import MetricsReport
from .policies.bayes import truncated_prior_mean
from .trial_engine import Scenario

SCHEMA_VERSION = 1

PRIOR_TOX_6 = (0.02, 0.06, 0.12, 0.20, 0.30, 0.40)
PRIOR_EFF_6 = (0.12, 0.20, 0.30, 0.40, 0.50, 0.59)
# five-dose scenarios reuse the leading entries of the six-dose priors
PRIOR_TOX_5 = PRIOR_TOX_6[:5]
PRIOR_EFF_5 = PRIOR_EFF_6[:5]

#: Fitted saturating dose-response curves behind the two real-world scenarios
#: (provenance only; the scenarios use the tabulated probabilities directly).
EMAX_MODELS = {
    "neurodeg": {"e0": 169.94, "emax": 12.95, "ed50": 1.85},
    "ibscovars": {"e0": 0.26, "emax": 0.68, "ed50": 4.01},
}


def emax_response(dose: float, e0: float, emax: float, ed50: float) -> float:
    """Saturating dose-response ``e0 + emax * dose / (ed50 + dose)``."""
    if ed50 <= 0:
        raise DomainError("ed50 must be positive")
    if dose < 0:
        raise DomainError("dose must be nonnegative")
    return e0 + emax * dose / (ed50 + dose)


def _scenario(name, tox, eff, k_star, plateau=None, theta=0.35,
              prior_tox=None, prior_eff=None) -> Scenario:
    k = len(tox)
    return Scenario(
        name=name,
        true_tox=tuple(tox),
        true_eff=tuple(eff),
        theta=theta,
        prior_tox=tuple(prior_tox if prior_tox is not None
                        else (PRIOR_TOX_6 if k == 6 else PRIOR_TOX_5)),
        prior_eff=tuple(prior_eff if prior_eff is not None
                        else (PRIOR_EFF_6 if k == 6 else PRIOR_EFF_5)),
        optimal_dose=k_star,
        plateau_start=plateau,
    )


def _model_consistent_scenario() -> Scenario:
    """Ground truth generated by the toxicity curve itself (reference value
    1.5 on the six-dose skeleton), for theory-versus-empirics diagnostics."""
    a0 = truncated_prior_mean()
    tox = tuple(float(p ** (1.5 / a0)) for p in PRIOR_TOX_6)
    return _scenario("model-consistent", tox, (0.2, 0.4, 0.55, 0.6, 0.2, 0.1),
                     k_star=4)


def builtin_scenarios() -> dict[str, Scenario]:
    """Named catalog of every tabulated setting plus diagnostic extras."""
    entries = [
        _scenario("main-setting",
                  (0.01, 0.05, 0.15, 0.2, 0.45, 0.6),
                  (0.1, 0.35, 0.6, 0.6, 0.6, 0.6), k_star=3, plateau=3),
        _scenario("setting-2",
                  (0.1, 0.2, 0.25, 0.4, 0.5, 0.6),
                  (0.3, 0.4, 0.5, 0.7, 0.7, 0.7), k_star=3, plateau=4),
        _scenario("zang-1",
                  (0.08, 0.12, 0.2, 0.3, 0.4),
                  (0.2, 0.4, 0.6, 0.8, 0.55), k_star=4),
        _scenario("zang-2",
                  (0.01, 0.05, 0.10, 0.15, 0.3),
                  (0.6, 0.8, 0.5, 0.4, 0.2), k_star=2),
        _scenario("zang-3",
                  (0.06, 0.08, 0.14, 0.2, 0.3),
                  (0.2, 0.4, 0.6, 0.8, 0.55), k_star=4),
        _scenario("zang-4",
                  (0.05, 0.1, 0.25, 0.5, 0.6),
                  (0.2, 0.4, 0.6, 0.8, 0.55), k_star=3),
        _scenario("zang-5",
                  (0.1, 0.2, 0.4, 0.5, 0.6),
                  (0.1, 0.3, 0.5, 0.5, 0.5), k_star=2, plateau=3),
        _scenario("zang-6",
                  (0.01, 0.03, 0.05, 0.1, 0.2),
                  (0.1, 0.3, 0.45, 0.6, 0.6), k_star=4, plateau=4),
        _scenario("neurodeg",
                  (0.01, 0.08, 0.30, 0.60, 0.80),
                  (0.01, 0.35, 0.45, 0.52, 0.57), k_star=3),
        _scenario("ibscovars",
                  (0.01, 0.10, 0.30, 0.70, 0.95),
                  (0.01, 0.20, 0.27, 0.33, 0.43), k_star=3),
        _model_consistent_scenario(),
    ]
    return {s.name: s for s in entries}


def _require(doc: dict, key: str, kind) -> object:
    if key not in doc:
        raise ValidationError(f"scenario document missing field '{key}'")
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if kind is list and not isinstance(value, list):
        raise ValidationError(f"field '{key}' must be a list")
    if kind is not list and not isinstance(value, kind):
        raise ValidationError(f"field '{key}' has the wrong type")
    return value


def parse_scenario(document: Union[str, bytes, dict]) -> Scenario:
    """Parse and validate a scenario document, recomputing the optimal dose.

    A declared ``optimal_dose`` that disagrees with the probability lists is
    rejected; errors name the offending field.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"scenario document is not valid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be a JSON object")
    name = _require(doc, "name", str)
    theta = _require(doc, "theta", float)
    tox = _require(doc, "tox", list)
    eff = _require(doc, "eff", list)
    prior_tox = _require(doc, "prior_tox", list)
    prior_eff = _require(doc, "prior_eff", list)
    probe = Scenario(
        name=name, theta=float(theta),
        true_tox=tuple(float(x) for x in tox),
        true_eff=tuple(float(x) for x in eff),
        prior_tox=tuple(float(x) for x in prior_tox),
        prior_eff=tuple(float(x) for x in prior_eff),
        optimal_dose=_recompute(tox, eff, theta),
        plateau_start=doc.get("plateau_start"),
    )
    declared = doc.get("optimal_dose")
    if declared is not None and declared != probe.optimal_dose:
        raise ValidationError(
            f"field 'optimal_dose': declared {declared} but the lists imply "
            f"{probe.optimal_dose}")
    return probe


def _recompute(tox, eff, theta) -> int:
    tox = np.asarray(tox, dtype=float)
    eff = np.asarray(eff, dtype=float)
    safe = np.flatnonzero(tox <= theta)
    if len(safe) == 0:
        raise ValidationError("field 'tox': no dose satisfies the threshold")
    best = eff[safe].max()
    return int(safe[np.flatnonzero(eff[safe] == best)[0]]) + 1


def write_scenario(scenario: Scenario) -> bytes:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": scenario.name,
        "theta": scenario.theta,
        "tox": list(scenario.true_tox),
        "eff": list(scenario.true_eff),
        "prior_tox": list(scenario.prior_tox),
        "prior_eff": list(scenario.prior_eff),
        "optimal_dose": scenario.optimal_dose,
        "plateau_start": scenario.plateau_start,
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()


@dataclass(frozen=True)
class ReportDocument:
    """Run metadata plus metric payloads; round-trips losslessly through JSON."""

    metadata: dict
    report: MetricsReport
    schema_version: int = SCHEMA_VERSION

    def to_json_bytes(self) -> bytes:
        doc = {
            "schema_version": self.schema_version,
            "metadata": self.metadata,
            "report": self.report.to_jsonable(),
        }
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()

    @classmethod
    def from_json_bytes(cls, raw: Union[str, bytes]) -> "ReportDocument":
        doc = json.loads(raw)
        return cls(metadata=doc["metadata"],
                   report=MetricsReport.from_jsonable(doc["report"]),
                   schema_version=doc["schema_version"])


def report_csv(report: MetricsReport) -> bytes:
    """One row per policy and dose with mean/std pairs, two decimals.

    Rows come out in sorted policy order so the table is independent of how
    the batch was assembled or deserialized.
    """
    buf = io.StringIO()
    buf.write("policy,dose,rec_mean,rec_std,alloc_mean,alloc_std\n")
    for policy, pm in sorted(report.per_policy.items()):
        for k in range(len(pm.rec_pct_mean)):
            buf.write(f"{policy},{k + 1},{pm.rec_pct_mean[k]:.2f},"
                      f"{pm.rec_pct_std[k]:.2f},{pm.alloc_pct_mean[k]:.2f},"
                      f"{pm.alloc_pct_std[k]:.2f}\n")
    return buf.getvalue().encode()


def write_report(document: ReportDocument, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        return report_csv(document.report)
    if fmt == "json":
        return document.to_json_bytes()
    raise ValidationError(f"unknown report format '{fmt}'")
