//! Declarative Monte Carlo sweeps, CSV output and summary statistics.
//!
//! Spec files are JSON objects:
//!
//! ```json
//! {
//!   "kind": "matrix_sweep_p",
//!   "d1": 100, "d2": 1000, "r": 4, "sigma": 1.0,
//!   "values": [0.05, 0.1, 0.2, 0.4, 0.8],
//!   "trials": 100,
//!   "seed": 7,
//!   "methods": ["diagonal_deleted", "vanilla"]
//! }
//! ```
//!
//! The swept parameter is named by the kind; the remaining parameters are
//! fixed. `trials` defaults to 100, `seed` to 0, `methods` to
//! `["diagonal_deleted"]`. `include_bounds` adds a `bound_total` metric and
//! `centering` (`known` or `edge_density`) selects how BSBM runs estimate
//! `(qin + qout)/2`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apps::{
    bsbm_evaluate, bsbm_recover_with, cov_from_estimate, cov_truth_metrics, gen_bsbm,
    gen_factor_samples, gen_factor_truth, gen_tensor_truth, sample_tensor, tensor_incoherence,
    tensor_truth_subspace, Centering,
};
use crate::error::{Error, Result};
use crate::estimator::{Method, SubspaceEstimate};
use crate::linalg::DenseMatrix;
use crate::metrics::{
    align, bound_bsbm, bound_ce, bound_general, bound_tc, spectrum_error, CeBoundInputs,
    TcBoundInputs, TheoryInputs,
};
use crate::model::{gen_lowrank_gaussian, incoherence, sample_matrix, sample_observations, NoiseSpec};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MatrixSweepP,
    MatrixSweepD2,
    MatrixSweepSigma,
    TensorSweepP,
    TensorSweepSigma,
    CovSweepP,
    CovSweepN,
    CovSweepSigma,
    BsbmSweepA,
    BsbmSweepNv,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::MatrixSweepP => "matrix_sweep_p",
            Self::MatrixSweepD2 => "matrix_sweep_d2",
            Self::MatrixSweepSigma => "matrix_sweep_sigma",
            Self::TensorSweepP => "tensor_sweep_p",
            Self::TensorSweepSigma => "tensor_sweep_sigma",
            Self::CovSweepP => "cov_sweep_p",
            Self::CovSweepN => "cov_sweep_n",
            Self::CovSweepSigma => "cov_sweep_sigma",
            Self::BsbmSweepA => "bsbm_sweep_a",
            Self::BsbmSweepNv => "bsbm_sweep_nv",
        }
    }

    /// Name of the swept parameter.
    pub fn param(self) -> &'static str {
        match self {
            Self::MatrixSweepP | Self::TensorSweepP | Self::CovSweepP => "p",
            Self::MatrixSweepD2 => "d2",
            Self::MatrixSweepSigma | Self::TensorSweepSigma | Self::CovSweepSigma => "sigma",
            Self::CovSweepN => "n",
            Self::BsbmSweepA => "a",
            Self::BsbmSweepNv => "nv",
        }
    }

    fn is_bsbm(self) -> bool {
        matches!(self, Self::BsbmSweepA | Self::BsbmSweepNv)
    }

    fn is_cov(self) -> bool {
        matches!(self, Self::CovSweepP | Self::CovSweepN | Self::CovSweepSigma)
    }

    /// Metric names emitted per (trial, method), in output order.
    pub fn metrics(self, include_bounds: bool) -> Vec<&'static str> {
        let mut m = if self.is_bsbm() {
            vec!["exact", "misclass_rate"]
        } else {
            SUBSPACE_METRICS.to_vec()
        };
        if self.is_cov() {
            m.extend(COV_METRICS);
        }
        if include_bounds {
            m.push("bound_total");
        }
        m
    }
}

const SUBSPACE_METRICS: [&str; 6] = [
    "err_spec",
    "err_l2inf",
    "err_spec_rel",
    "err_l2inf_rel",
    "sin_theta",
    "spectrum_err",
];
const COV_METRICS: [&str; 4] = ["cov_op_err", "cov_op_err_rel", "cov_inf_err", "cov_inf_err_rel"];

fn default_trials() -> usize {
    100
}

fn default_methods() -> Vec<Method> {
    vec![Method::DiagonalDeleted]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<usize>,
    /// Tensor side length and covariance dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nv: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub include_bounds: bool,
    #[serde(default)]
    pub centering: Centering,
}

impl ExperimentSpec {
    /// A spec with no fixed parameters set and default trials/methods.
    pub fn new(kind: ExperimentKind, values: Vec<f64>) -> Self {
        Self {
            kind,
            d1: None,
            d2: None,
            d: None,
            r: None,
            sigma: None,
            p: None,
            n: None,
            nu: None,
            nv: None,
            a: None,
            b: None,
            values,
            trials: default_trials(),
            seed: 0,
            methods: default_methods(),
            include_bounds: false,
            centering: Centering::Known,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)
            .map_err(|e| Error::ConfigInvalid(format!("cannot parse experiment spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Methods deduplicated in canonical order.
    pub fn canonical_methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.values.is_empty() {
            return bad("sweep values must be nonempty".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("sweep values must be finite".into());
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sweep values must be strictly increasing".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods must be nonempty".into());
        }
        for v in &self.values {
            self.point(*v)?;
        }
        Ok(())
    }

    fn need<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| {
            Error::ConfigInvalid(format!("{} requires parameter `{name}`", self.kind.name()))
        })
    }

    /// Resolves the full parameter set at one sweep value.
    fn point(&self, value: f64) -> Result<Point> {
        use ExperimentKind::*;
        let k = self.kind;
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v <= 1e9 {
                Ok(v as usize)
            } else {
                Err(Error::ConfigInvalid(format!(
                    "{} values must be positive integers, got {v}",
                    k.param()
                )))
            }
        };
        let prob = |v: f64| -> Result<f64> {
            if v > 0.0 && v <= 1.0 {
                Ok(v)
            } else {
                Err(Error::ConfigInvalid(format!("sampling rate {v} outside (0, 1]")))
            }
        };
        let noise = |v: f64| -> Result<f64> {
            if v >= 0.0 {
                Ok(v)
            } else {
                Err(Error::ConfigInvalid(format!("sigma {v} is negative")))
            }
        };
        let point = match k {
            MatrixSweepP | MatrixSweepD2 | MatrixSweepSigma => {
                let d1 = self.need(self.d1, "d1")?;
                let r = self.need(self.r, "r")?;
                let d2 = if k == MatrixSweepD2 { count(value)? } else { self.need(self.d2, "d2")? };
                let p = match k {
                    MatrixSweepP => prob(value)?,
                    MatrixSweepD2 => coupled_rate(r, d1, d2),
                    _ => prob(self.need(self.p, "p")?)?,
                };
                let sigma = noise(if k == MatrixSweepSigma { value } else { self.need(self.sigma, "sigma")? })?;
                if r == 0 || r > d1.min(d2) || d1 < 2 {
                    return Err(Error::ConfigInvalid(format!("bad matrix shape {d1}x{d2}, r = {r}")));
                }
                Point::Matrix { d1, d2, r, p, sigma }
            }
            TensorSweepP | TensorSweepSigma => {
                let d = self.need(self.d, "d")?;
                let r = self.need(self.r, "r")?;
                let (p, sigma) = if k == TensorSweepP {
                    (prob(value)?, noise(self.need(self.sigma, "sigma")?)?)
                } else {
                    (prob(self.need(self.p, "p")?)?, noise(value)?)
                };
                if r == 0 || r > d || !(2..=crate::apps::tensor::MAX_TENSOR_DIM).contains(&d) {
                    return Err(Error::ConfigInvalid(format!("bad tensor shape d = {d}, r = {r}")));
                }
                Point::Tensor { d, r, p, sigma }
            }
            CovSweepP | CovSweepN | CovSweepSigma => {
                let d = self.need(self.d, "d")?;
                let r = self.need(self.r, "r")?;
                let n = if k == CovSweepN { count(value)? } else { self.need(self.n, "n")? };
                let p = prob(if k == CovSweepP { value } else { self.need(self.p, "p")? })?;
                let sigma = noise(if k == CovSweepSigma { value } else { self.need(self.sigma, "sigma")? })?;
                if r == 0 || r > d || d < 2 || n == 0 {
                    return Err(Error::ConfigInvalid(format!("bad covariance shape d = {d}, r = {r}, n = {n}")));
                }
                Point::Cov { d, r, n, p, sigma }
            }
            BsbmSweepA | BsbmSweepNv => {
                let nu = self.need(self.nu, "nu")?;
                let nv = if k == BsbmSweepNv { count(value)? } else { self.need(self.nv, "nv")? };
                let a = if k == BsbmSweepA { value } else { self.need(self.a, "a")? };
                let b = self.need(self.b, "b")?;
                let scale = ((nu + nv) as f64).ln() / ((nu * nv) as f64).sqrt();
                let (qin, qout) = (a * scale, b * scale);
                if nu % 2 != 0 || nv % 2 != 0 || nu < 2 {
                    return Err(Error::ConfigInvalid(format!("nu = {nu}, nv = {nv} must be even")));
                }
                if !(0.0 <= qout && qout <= qin && qin <= 1.0) {
                    return Err(Error::ConfigInvalid(format!(
                        "a = {a}, b = {b} give qin = {qin}, qout = {qout}; need 0 <= qout <= qin <= 1"
                    )));
                }
                Point::Bsbm { nu, nv, qin, qout }
            }
        };
        Ok(point)
    }
}

/// Sampling rate `2r·ln(d1 + d2)/√(d1·d2)`, capped at 1.
pub fn coupled_rate(r: usize, d1: usize, d2: usize) -> f64 {
    let (d1, d2) = (d1 as f64, d2 as f64);
    (2.0 * r as f64 * (d1 + d2).ln() / (d1 * d2).sqrt()).min(1.0)
}

#[derive(Debug, Clone, Copy)]
enum Point {
    Matrix { d1: usize, d2: usize, r: usize, p: f64, sigma: f64 },
    Tensor { d: usize, r: usize, p: f64, sigma: f64 },
    Cov { d: usize, r: usize, n: usize, p: f64, sigma: f64 },
    Bsbm { nu: usize, nv: usize, qin: f64, qout: f64 },
}

/// One output row; `result = None` is written as `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: &'static str,
    pub param: &'static str,
    pub value: f64,
    pub trial: usize,
    pub method: Method,
    pub metric: &'static str,
    pub result: Option<f64>,
}

/// Runs every (value, trial) pair on the current rayon pool and returns
/// records in (value, trial, method, metric) order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let methods = spec.canonical_methods();
    let metrics = spec.kind.metrics(spec.include_bounds);
    let jobs: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|v| (0..spec.trials).map(move |t| (v, t)))
        .collect();
    let per_job: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(vi, ti)| {
            let value = spec.values[vi];
            let point = spec.point(value).expect("validated above");
            let seed = rng::mix(spec.seed, vi as u64, ti as u64);
            let mut out = Vec::with_capacity(methods.len() * metrics.len());
            let results = run_trial(point, &methods, seed, spec);
            for (method, values) in methods.iter().zip(results) {
                for (metric, result) in metrics.iter().zip(values) {
                    out.push(TrialRecord {
                        experiment: spec.kind.name(),
                        param: spec.kind.param(),
                        value,
                        trial: ti,
                        method: *method,
                        metric,
                        result: result.filter(|x| x.is_finite()),
                    });
                }
            }
            out
        })
        .collect();
    Ok(per_job.into_iter().flatten().collect())
}

/// [`run_experiment`] on a dedicated pool with `threads` workers.
pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<Vec<TrialRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start thread pool: {e}")))?;
    pool.install(|| run_experiment(spec))
}

type MetricRow = Vec<Option<f64>>;

fn run_trial(point: Point, methods: &[Method], seed: u64, spec: &ExperimentSpec) -> Vec<MetricRow> {
    let width = spec.kind.metrics(spec.include_bounds).len();
    let failed = || vec![vec![None; width]; methods.len()];
    let rows = match point {
        Point::Matrix { d1, d2, r, p, sigma } => matrix_trial(d1, d2, r, p, sigma, methods, seed, spec.include_bounds),
        Point::Tensor { d, r, p, sigma } => tensor_trial(d, r, p, sigma, methods, seed, spec.include_bounds),
        Point::Cov { d, r, n, p, sigma } => cov_trial(d, r, n, p, sigma, methods, seed, spec.include_bounds),
        Point::Bsbm { nu, nv, qin, qout } => {
            bsbm_trial(nu, nv, qin, qout, methods, seed, spec.include_bounds, spec.centering)
        }
    };
    rows.unwrap_or_else(|_| failed())
}

fn subspace_metrics(
    est: Result<SubspaceEstimate>,
    u_star: &DenseMatrix,
    sigma_star: &[f64],
    sigma_scale: f64,
) -> (MetricRow, Option<SubspaceEstimate>) {
    let est = match est {
        Ok(e) if !e.degenerate => e,
        _ => return (vec![None; SUBSPACE_METRICS.len()], None),
    };
    let Ok(al) = align(&est.u, u_star) else {
        return (vec![None; SUBSPACE_METRICS.len()], None);
    };
    if al.h_degenerate {
        return (vec![None; SUBSPACE_METRICS.len()], None);
    }
    let scaled: Vec<f64> = est.sigma.iter().map(|s| s * sigma_scale).collect();
    let spec_err = spectrum_error(&scaled, sigma_star).ok();
    let row = vec![
        Some(al.err_spec),
        Some(al.err_l2inf),
        Some(al.err_spec_rel),
        Some(al.err_l2inf_rel),
        Some(al.sin_theta),
        spec_err,
    ];
    (row, Some(est))
}

#[allow(clippy::too_many_arguments)]
fn matrix_trial(
    d1: usize,
    d2: usize,
    r: usize,
    p: f64,
    sigma: f64,
    methods: &[Method],
    seed: u64,
    bounds: bool,
) -> Result<Vec<MetricRow>> {
    let truth = gen_lowrank_gaussian(d1, d2, r, seed)?;
    let obs = sample_observations(&truth, p, NoiseSpec::gaussian(sigma), seed)?;
    let bound = if bounds {
        let inc = incoherence(&truth);
        TheoryInputs::new(inc.mu, inc.kappa, r, d1, d2, p, sigma, truth.sigma_r())
            .map(|x| bound_general(&x).total)
            .ok()
    } else {
        None
    };
    Ok(methods
        .iter()
        .map(|m| {
            let (mut row, _) = subspace_metrics(m.estimate(&obs, r), &truth.u_star, &truth.sigma_star, 1.0);
            if bounds {
                row.push(bound);
            }
            row
        })
        .collect())
}

fn tensor_trial(
    d: usize,
    r: usize,
    p: f64,
    sigma: f64,
    methods: &[Method],
    seed: u64,
    bounds: bool,
) -> Result<Vec<MetricRow>> {
    let truth = gen_tensor_truth(d, r, seed)?;
    let obs = sample_tensor(&truth, p, NoiseSpec::gaussian(sigma), seed)?.unfold()?;
    let u_star = tensor_truth_subspace(&truth.w)?;
    let sigma_star = truth.unfolded_singular_values()?;
    let bound = if bounds {
        let inc = tensor_incoherence(&truth);
        let mut x = TcBoundInputs::new(inc.mu_tc, truth.kappa_tc, r, d, p, sigma, truth.lambda_min);
        x.mu4 = inc.mu4;
        bound_tc(&x).map(|b| b.total).ok()
    } else {
        None
    };
    Ok(methods
        .iter()
        .map(|m| {
            let (mut row, _) = subspace_metrics(m.estimate(&obs, r), &u_star, &sigma_star, 1.0);
            if bounds {
                row.push(bound);
            }
            row
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn cov_trial(
    d: usize,
    r: usize,
    n: usize,
    p: f64,
    sigma: f64,
    methods: &[Method],
    seed: u64,
    bounds: bool,
) -> Result<Vec<MetricRow>> {
    let truth = gen_factor_truth(d, r, n, seed)?;
    let x = gen_factor_samples(&truth, sigma, seed)?;
    let obs = sample_matrix(&x, p, NoiseSpec::None, seed)?;
    let sqrt_lambda: Vec<f64> = truth.lambda.iter().map(|l| l.sqrt()).collect();
    let bound = if bounds {
        let inputs = CeBoundInputs {
            mu_ce: truth.mu_ce,
            kappa_ce: truth.kappa_ce,
            r,
            d,
            n,
            p,
            sigma,
            lambda_r: truth.lambda[r - 1],
        };
        bound_ce(&inputs).map(|b| b.total).ok()
    } else {
        None
    };
    let scale = 1.0 / (n as f64).sqrt();
    Ok(methods
        .iter()
        .map(|m| {
            let (mut row, est) = subspace_metrics(m.estimate(&obs, r), &truth.u_star, &sqrt_lambda, scale);
            let cov = est.and_then(|e| cov_truth_metrics(&cov_from_estimate(&e, n), &truth).ok());
            match cov {
                Some(c) => row.extend([c.op_err, c.op_err_rel, c.inf_err, c.inf_err_rel].map(Some)),
                None => row.extend([None; COV_METRICS.len()]),
            }
            if bounds {
                row.push(bound);
            }
            row
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn bsbm_trial(
    nu: usize,
    nv: usize,
    qin: f64,
    qout: f64,
    methods: &[Method],
    seed: u64,
    bounds: bool,
    centering: Centering,
) -> Result<Vec<MetricRow>> {
    let inst = gen_bsbm(nu, nv, qin, qout, seed)?;
    let bound = if bounds { bound_bsbm(qin, qout, nu, nv).ok() } else { None };
    Ok(methods
        .iter()
        .map(|m| {
            let score = bsbm_recover_with(&inst, *m, centering)
                .ok()
                .filter(|rec| !rec.degenerate)
                .and_then(|rec| bsbm_evaluate(&rec.labels, &inst.labels_u_true).ok());
            let mut row = match score {
                Some(s) => vec![Some(if s.exact { 1.0 } else { 0.0 }), Some(s.misclass_rate)],
                None => vec![None, None],
            };
            if bounds {
                row.push(bound);
            }
            row
        })
        .collect())
}

pub const CSV_HEADER: [&str; 7] = ["experiment", "param", "value", "trial", "method", "metric", "result"];

fn fmt_result(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Writes records as CSV. Trial indices are 0-based.
pub fn write_records_csv<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in records {
        w.write_record([
            rec.experiment.to_string(),
            rec.param.to_string(),
            rec.value.to_string(),
            rec.trial.to_string(),
            rec.method.name().to_string(),
            rec.metric.to_string(),
            fmt_result(rec.result),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregates over the trials of one (value, method, metric) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: &'static str,
    pub param: &'static str,
    pub value: f64,
    pub method: Method,
    pub metric: &'static str,
    /// Non-NA trials.
    pub count: usize,
    pub na_count: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Sample standard deviation (`n − 1` denominator); 0 for one trial.
    pub std: Option<f64>,
}

/// Groups records by (value, method, metric) in first-seen order.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(f64, Method, &'static str, &'static str, &'static str)> = Vec::new();
    let mut cells: Vec<(Vec<f64>, usize)> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for rec in records {
        let key = (rec.value.to_bits(), rec.method, rec.metric, rec.experiment, rec.param);
        let slot = *index.entry(key).or_insert_with(|| {
            keys.push((rec.value, rec.method, rec.metric, rec.experiment, rec.param));
            cells.push((Vec::new(), 0));
            cells.len() - 1
        });
        match rec.result {
            Some(v) => cells[slot].0.push(v),
            None => cells[slot].1 += 1,
        }
    }
    keys.into_iter()
        .zip(cells)
        .map(|((value, method, metric, experiment, param), (vals, na_count))| {
            let stats = Stats::of(&vals);
            SummaryRow {
                experiment,
                param,
                value,
                method,
                metric,
                count: vals.len(),
                na_count,
                mean: stats.map(|s| s.mean),
                median: stats.map(|s| s.median),
                std: stats.map(|s| s.std),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Stats {
    mean: f64,
    median: f64,
    std: f64,
}

impl Stats {
    fn of(vals: &[f64]) -> Option<Self> {
        if vals.is_empty() {
            return None;
        }
        let n = vals.len();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let mut sorted = vals.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let std = if n > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, median, std })
    }
}

/// Median of one summary cell, if present.
pub fn summary_median(rows: &[SummaryRow], value: f64, method: Method, metric: &str) -> Option<f64> {
    summary_cell(rows, value, method, metric).and_then(|r| r.median)
}

/// Mean of one summary cell, if present.
pub fn summary_mean(rows: &[SummaryRow], value: f64, method: Method, metric: &str) -> Option<f64> {
    summary_cell(rows, value, method, metric).and_then(|r| r.mean)
}

fn summary_cell<'a>(rows: &'a [SummaryRow], value: f64, method: Method, metric: &str) -> Option<&'a SummaryRow> {
    rows.iter()
        .find(|r| r.value == value && r.method == method && r.metric == metric)
}

/// Writes a summary table as CSV.
pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "experiment", "param", "value", "method", "metric", "count", "na_count", "mean", "median", "std",
    ])?;
    for row in rows {
        w.write_record([
            row.experiment.to_string(),
            row.param.to_string(),
            row.value.to_string(),
            row.method.name().to_string(),
            row.metric.to_string(),
            row.count.to_string(),
            row.na_count.to_string(),
            fmt_result(row.mean),
            fmt_result(row.median),
            fmt_result(row.std),
        ])?;
    }
    w.flush()?;
    Ok(())
}
