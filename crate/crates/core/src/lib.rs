//! Group AHP scoring engine.
//!
//! Expert pairwise matrices are turned into log-least-squares priorities,
//! combined through a two-level hierarchy into global indicator weights,
//! aggregated across experts by a geometric mean, and applied to measurements
//! normalized through empirical CDFs. Scores lie in `[0, 1]` and carry a
//! first-order standard deviation propagated from judgment inconsistency.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to one of the two.

// `!(x > 0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod completion;
pub mod consistency;
pub mod diagnostics;
pub mod ecdf;
pub mod error;
pub mod hierarchy;
pub mod io;
pub mod matrix;
pub mod pipeline;
pub mod scalar;
pub mod scoring;
pub mod simulation;
pub mod synthetic;
pub mod uncertainty;

pub use consistency::{
    alonso_lamata_check, consistency_index, consistency_ratio, consistency_report, gci,
    random_index, ConsistencyReport, RandomIndexTable, CR_THRESHOLD,
};
pub use diagnostics::{Diagnostic, Diagnostics, Severity};
pub use ecdf::{fit_ecdf, normalize_measurement, EcdfConvention, FittedEcdf, IndicatorSample};
pub use error::{AhpError, Result};
pub use hierarchy::{
    assemble_weight_matrix, Criterion, Direction, ExpertJudgment, GlobalWeights, Hierarchy,
    Indicator, WeightMatrix,
};
pub use matrix::{
    lls_objective, principal_eigenvalue, priority_geometric_mean, validate, Normalization,
    PairwiseMatrix, PriorityVector, ValidationReport,
};
pub use pipeline::{analyze_group, group_weights, run_pipeline, PipelineConfig, PipelineOutput};
pub use scalar::Scalar;
pub use scoring::{
    score_cohort, score_project, CohortScores, Histogram, ProjectMeasurements, ProjectScore,
};

pub type PairwiseMatrix64 = PairwiseMatrix<f64>;
pub type PairwiseMatrix32 = PairwiseMatrix<f32>;
pub type PriorityVector64 = PriorityVector<f64>;
pub type PriorityVector32 = PriorityVector<f32>;
pub type ExpertJudgment64 = ExpertJudgment<f64>;
pub type ExpertJudgment32 = ExpertJudgment<f32>;
pub type GlobalWeights64 = GlobalWeights<f64>;
pub type GlobalWeights32 = GlobalWeights<f32>;
pub type ProjectMeasurements64 = ProjectMeasurements<f64>;
pub type ProjectMeasurements32 = ProjectMeasurements<f32>;
pub type ProjectScore64 = ProjectScore<f64>;
pub type ProjectScore32 = ProjectScore<f32>;
pub type FittedEcdf64 = FittedEcdf<f64>;
pub type FittedEcdf32 = FittedEcdf<f32>;
