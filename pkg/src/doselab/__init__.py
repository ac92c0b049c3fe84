"""doselab: a dose-finding bandit laboratory.

Safe-exploration dose allocation with admissible-set screening, the classic
phase-I baseline designs, a reproducible Monte Carlo trial engine, metric and
theory diagnostics, and a live-trial session service.
"""

__version__ = "0.1.0"

from .dose_model import (  # noqa: F401
    PARAM_DOMAIN,
    DomainError,
    DoseGrid,
    RegularityParams,
    ToxicityEstimate,
    ValidationError,
    admissible_set,
    confidence_radius,
    invert_toxicity,
    regularity_from_model,
    skeleton_from_prior,
    toxicity_prob,
)
from .policies import (  # noqa: F401
    PolicyConfig,
    PolicyDecision,
    PolicyKind,
    Recommendation,
    TrialState,
    make_policy,
)
from .trial_engine import (  # noqa: F401
    BatchResult,
    RngStream,
    Scenario,
    TrialTrace,
    run_batch,
    run_trial,
    sample_outcome,
)
from .metrics_bounds import (  # noqa: F401
    MetricsReport,
    TheoryBounds,
    min_sample_size,
    regret_curve,
    safety_stats,
    summarize,
    theory_bounds,
    type_errors,
)
from .scenarios_io import (  # noqa: F401
    ReportDocument,
    builtin_scenarios,
    emax_response,
    parse_scenario,
    write_report,
    write_scenario,
)
