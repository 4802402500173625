"""Hard-to-easy consistency evaluation for stochastic answer generators.

The package measures whether a system that solves hard questions also
solves their strictly easier counterparts, over datasets of paired
easy/hard questions. It provides probability estimators for repeated
sampling, the consistency score and its relative form with two bound
families, leakage analysis, rule-based and sandboxed verifiers, and both
simulated and HTTP sampling backends.
"""

from .backends import (
    EndpointConfig,
    GenerationRequest,
    GroundTruthModel,
    HttpBackend,
    SideTruth,
    SimulatedBackend,
    ground_truth_for_pairs,
    http_generate,
    simulated_generate,
    simulated_outcome,
    synth_population,
)
from .core import (
    CodeCheck,
    Constraint,
    ConstraintList,
    EstimateRow,
    NumericAnswer,
    ProbEstimateTable,
    QuestionPair,
    QuestionSpec,
    SampleRecord,
    Violation,
    append_samples,
    dump_dataset,
    load_dataset,
    read_samples,
    validate_dataset,
)
from .datagen import (
    CandidateBundle,
    auto_validate,
    build_prompt,
    generate_candidates,
    write_bundle,
)
from .errors import (
    BackendError,
    CampaignError,
    ConfigurationError,
    ConsisError,
    DatasetError,
    EstimationError,
    GenerationTimeout,
    ProtocolError,
    SampleLogError,
    SandboxUnavailableError,
    TransportError,
    UndefinedMetricError,
)
from .estimation import (
    EarlyStopConfig,
    convergence_series,
    early_stop_decision,
    mle_early_stopping,
    mle_multiple,
)
from .metrics import (
    BoundsPair,
    ProbPairVector,
    accuracy,
    avg_cs,
    compute_cs,
    compute_heuristic_bounds,
    compute_math_bounds,
    compute_rcs,
    consistent_rate,
    difficulty_gap_stats,
    kendall_tau,
    leakage_adjusted_cs,
)
from .orchestrator import (
    BudgetReport,
    CampaignConfig,
    budget_report,
    resume_campaign,
    run_campaign,
)
from .verifiers import (
    CodeRunLimits,
    Verdict,
    verify_code,
    verify_constraints,
    verify_numeric,
    verify_response,
)

__version__ = "0.1.0"
