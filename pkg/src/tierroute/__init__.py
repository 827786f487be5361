"""tierroute: trace-driven three-tier early-exit inference simulator.

Routes streaming samples across mobile, edge, and cloud devices by
nearest-centroid matching over embeddings, with a cost-aware calibrated
exit threshold, and accounts accuracy/cost against baseline policies.
"""

from .benchmarks import (
    DriftBenchmarkResult,
    PipelineResult,
    benchmark_costs,
    routing_agreement,
    run_default_benchmark,
    run_drift_benchmark,
    run_pipeline,
)
from .costs import (
    ConfigError,
    CostModel,
    Device,
    InferenceOutcome,
    default_costs,
    load_costs,
    monetary_cost,
    reward,
    save_costs,
)
from .exits import (
    CalibrationResult,
    DeploymentConfig,
    ThresholdGrid,
    calibrate_threshold,
    cascade_outcome,
    empirical_expected_reward,
    first_exit,
    load_calibration,
    save_calibration,
    threshold_grid,
)
from .pools import (
    POOL_LABELS,
    PoolState,
    build_pools,
    export_embeddings,
    load_pools,
    pool_summary,
    save_pools,
)
from .router import (
    Assignment,
    RouterState,
    RoutingMode,
    classify_embedding,
    initialize_router,
    load_router,
    route_adaptive,
    route_fixed,
    save_router,
)
from .simulate import (
    ALL_POLICIES,
    Policy,
    RunReport,
    SampleResult,
    SweepPoint,
    cloud_only_mean_cost,
    cost_delta_pct,
    device_inference,
    mobile_full_mean_cost,
    run_baseline_suite,
    run_stream,
    sweep_cost,
    write_reports,
    write_sweep,
)
from .synth import (
    DriftSpec,
    ScenarioConfig,
    default_scenario,
    drift_scenario,
    generate,
    load_scenario,
    planted_difficulty,
    save_scenario,
)
from .traces import (
    SampleTrace,
    TraceDataError,
    TraceFormatError,
    TraceManifest,
    TraceSet,
    Violation,
    load_traces,
    split_traces,
    validate_traces,
    write_traces,
)

__version__ = "0.1.0"
