//! Application adapters built on the subspace estimator.

pub mod bsbm;
pub mod covariance;
pub mod tensor;

pub use bsbm::{
    bsbm_evaluate, bsbm_recover, bsbm_recover_with, gen_bsbm, BsbmInstance, BsbmRecovery,
    BsbmScore, Centering,
};
pub use covariance::{
    cov_estimate, cov_estimate_with, cov_from_estimate, cov_truth_metrics, gen_factor_samples,
    gen_factor_truth, CovEstimate, CovMetrics, FactorModelTruth,
};
pub use tensor::{
    gen_tensor_truth, mode1_refold, mode1_unfold, sample_tensor, tensor_incoherence,
    tensor_pipeline, tensor_truth_subspace, Tensor3, TensorEntry, TensorIncoherence,
    TensorObservations, TensorRun, TensorTruth,
};
