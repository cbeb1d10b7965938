//! The two-qubit VQE experiments: optimizers, drift and ablations.

pub mod ablation;
pub mod optimizer;
pub mod problem;
pub mod trace;

pub use ablation::{
    drift_experiment, run_ablation, AblationKind, AblationRun, DriftReport, DriftSample,
};
pub use optimizer::{
    curvature_step_size, run_vqe, DriftModel, DriftTracker, InverseRule, OptimizerConfig,
    OptimizerKind, QfimScope,
};
pub use problem::{reference_wpl, statevector_energy, Evaluator, GradientMethod, VqeProblem};
pub use trace::{TraceRecord, TraceRow};
