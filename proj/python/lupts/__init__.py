"""Learning-using-privileged-time-series estimators.

Recursive least-squares chains over intermediate time points, their
stationary and distillation variants, a seeded Gaussian-linear system
simulator, evaluation metrics, CSV ingestion and a sweep harness. The heavy
lifting happens in the `_core` extension; this package re-exports its
surface.
"""

from lupts._core import (
    AffineMap,
    AggregateCell,
    ChainFit,
    ComposedPredictor,
    CsvSchema,
    ExperimentConfig,
    FitOptions,
    IngestConfig,
    InitialState,
    LeastSquaresFit,
    LinearPredictor,
    LuptsError,
    MetricRecord,
    PreprocessStats,
    RegressorSpec,
    ResultTable,
    RiskExpansionTerms,
    RngStream,
    SweepAxis,
    SystemConfig,
    SystemSpec,
    TrajectoryDataset,
    TrajectoryTable,
    __version__,
    apply_outcome_model,
    apply_preprocess,
    collapse_composed,
    dataset_from_table,
    empirical_risk,
    fit_baseline,
    fit_composed,
    fit_distill_concat,
    fit_distill_seq,
    fit_lupts,
    fit_preprocess,
    fit_stat_lupts,
    generate_system,
    irreducible_risk,
    known_estimators,
    load_trajectory_csv,
    matrix_chain_product,
    matrix_power,
    mse_gap,
    predict,
    preset,
    preset_names,
    r_squared,
    relative_parameter_mse,
    risk_expansion_terms,
    run_experiment,
    run_ingest,
    sample_trajectories,
    sample_without_replacement,
    scale_markov_violation,
    simulate_final_state,
    solve_least_squares,
    spectral_radius,
    split_rows,
    table_from_dataset,
    true_theta,
    write_results,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
