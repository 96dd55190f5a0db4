use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use gramspec::apps::{
    bsbm_evaluate, bsbm_recover_with, cov_estimate_with, cov_truth_metrics, gen_bsbm,
    gen_factor_samples, gen_factor_truth, gen_tensor_truth, sample_tensor, tensor_incoherence,
    tensor_truth_subspace, BsbmInstance, Centering,
};
use gramspec::estimator::{Method, SubspaceEstimate};
use gramspec::harness::{
    run_experiment_with_threads, summarize, write_records_csv, write_summary_csv, ExperimentSpec,
};
use gramspec::metrics::{
    align, bound_bsbm, bound_ce, bound_general, bound_tc, BoundBreakdown, CeBoundInputs,
    TcBoundInputs, TheoryInputs,
};
use gramspec::model::{sample_matrix, NoiseSpec};
use gramspec::{io as files, Error};

/// Spectral estimation of column subspaces from incomplete, noisy data.
#[derive(Parser)]
#[command(name = "gramspec", version)]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials (overrides `trials` in the experiment JSON).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, env = "GRAMSPEC_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the column subspace from an observation file.
    Estimate(EstimateArgs),
    /// Single tensor completion run (from a file or a random instance).
    Tensor(TensorArgs),
    /// Single covariance estimation run on a random factor model.
    Cov(CovArgs),
    /// Single community recovery run (from a file or a random instance).
    Bsbm(BsbmArgs),
    /// Run a sweep described by a JSON spec and write records as CSV.
    Experiment(ExperimentArgs),
    /// Evaluate a theoretical error bound.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV with columns i,j,value.
    #[arg(long)]
    input: PathBuf,
    /// Sidecar with d1, d2 and optionally p (default: input with .json).
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, short)]
    rank: usize,
    #[arg(long, value_parser = parse_method, default_value = "diagonal_deleted")]
    method: Method,
}

#[derive(Args)]
struct TensorArgs {
    /// CSV with columns i,j,k,value; omit to sample a random instance.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, short)]
    rank: usize,
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, value_parser = parse_method, default_value = "diagonal_deleted")]
    method: Method,
}

#[derive(Args)]
struct CovArgs {
    #[arg(long, default_value_t = 100)]
    d: usize,
    #[arg(long, short, default_value_t = 4)]
    rank: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_parser = parse_method, default_value = "diagonal_deleted")]
    method: Method,
}

#[derive(Args)]
struct BsbmArgs {
    /// Edge list CSV with columns i,j; omit to sample a random instance.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    nu: usize,
    #[arg(long, default_value_t = 10000)]
    nv: usize,
    #[arg(long)]
    qin: Option<f64>,
    #[arg(long)]
    qout: Option<f64>,
    /// Centre with the observed edge density instead of the known rates.
    #[arg(long)]
    estimate_density: bool,
    #[arg(long, value_parser = parse_method, default_value = "diagonal_deleted")]
    method: Method,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write per-cell mean/median/std.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("which").required(true).args(["general", "tc", "ce", "bsbm"])))]
struct BoundsArgs {
    #[arg(long)]
    general: bool,
    #[arg(long)]
    tc: bool,
    #[arg(long)]
    ce: bool,
    #[arg(long)]
    bsbm: bool,
    #[arg(long)]
    mu: Option<f64>,
    /// Tensor factor incoherence for the diagonal term (default: --mu).
    #[arg(long)]
    mu4: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    d1: Option<usize>,
    #[arg(long)]
    d2: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Smallest nonzero singular value (general), factor cube norm (tc) or eigenvalue (ce).
    #[arg(long)]
    sigma_r: Option<f64>,
    #[arg(long)]
    qin: Option<f64>,
    #[arg(long)]
    qout: Option<f64>,
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long)]
    nv: Option<usize>,
    /// Drop the sampling terms when p = 1.
    #[arg(long)]
    exact_at_p1: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "diagonal_deleted" => Ok(Method::DiagonalDeleted),
        "vanilla" => Ok(Method::Vanilla),
        _ => Err(format!("unknown method `{s}` (expected diagonal_deleted or vanilla)")),
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ConfigInvalid(msg) => Failure::Usage(msg),
            other => Failure::Runtime(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing required flag --{flag}")))
}

fn estimate_json(est: &SubspaceEstimate) -> serde_json::Value {
    let u: Vec<&[f64]> = (0..est.u.rows()).map(|i| est.u.row(i)).collect();
    json!({
        "sigma": est.sigma,
        "lambda": est.lambda_raw,
        "clamped": est.clamped,
        "degenerate": est.degenerate,
        "u": u,
    })
}

fn print_json(v: &serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Estimate(a) => {
            let obs = files::read_observations(&a.input, a.meta.as_deref())?;
            let est = a.method.estimate(&obs, a.rank)?;
            print_json(&estimate_json(&est))
        }
        Command::Tensor(a) => {
            if let Some(input) = a.input {
                let obs = files::read_tensor(&input, a.meta.as_deref())?.unfold()?;
                let est = a.method.estimate(&obs, a.rank)?;
                return print_json(&estimate_json(&est));
            }
            let truth = gen_tensor_truth(a.d, a.rank, seed)?;
            let obs = sample_tensor(&truth, a.p, NoiseSpec::gaussian(a.sigma), seed)?.unfold()?;
            let est = a.method.estimate(&obs, a.rank)?;
            let al = align(&est.u, &tensor_truth_subspace(&truth.w)?)?;
            let inc = tensor_incoherence(&truth);
            print_json(&json!({
                "err_spec": al.err_spec,
                "err_l2inf": al.err_l2inf,
                "sin_theta": al.sin_theta,
                "sigma": est.sigma,
                "degenerate": est.degenerate,
                "incoherence": inc,
                "kappa_tc": truth.kappa_tc,
            }))
        }
        Command::Cov(a) => {
            let truth = gen_factor_truth(a.d, a.rank, a.n, seed)?;
            let x = gen_factor_samples(&truth, a.sigma, seed)?;
            let obs = sample_matrix(&x, a.p, NoiseSpec::None, seed)?;
            let est = cov_estimate_with(a.method, &obs, a.rank, a.n)?;
            let al = align(&est.estimate.u, &truth.u_star)?;
            let m = cov_truth_metrics(&est.s, &truth)?;
            print_json(&json!({
                "err_spec": al.err_spec,
                "err_l2inf": al.err_l2inf,
                "cov": m,
                "mu_ce": truth.mu_ce,
                "kappa_ce": truth.kappa_ce,
                "degenerate": est.estimate.degenerate,
            }))
        }
        Command::Bsbm(a) => {
            let inst: BsbmInstance = match a.input {
                Some(input) => files::read_bsbm(&input, a.meta.as_deref())?,
                None => gen_bsbm(a.nu, a.nv, require(a.qin, "qin")?, require(a.qout, "qout")?, seed)?,
            };
            let centering = if a.estimate_density {
                Centering::EdgeDensity
            } else {
                Centering::Known
            };
            let rec = bsbm_recover_with(&inst, a.method, centering)?;
            let score = bsbm_evaluate(&rec.labels, &inst.labels_u_true)?;
            print_json(&json!({
                "labels": rec.labels,
                "exact": score.exact,
                "misclass_rate": score.misclass_rate,
                "ties": rec.ties,
                "degenerate": rec.degenerate,
            }))
        }
        Command::Experiment(a) => {
            let text = std::fs::read_to_string(&a.spec)?;
            let mut spec = ExperimentSpec::from_json(&text)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            if let Some(t) = cli.trials {
                spec.trials = t;
            }
            let records = run_experiment_with_threads(&spec, cli.threads)?;
            write_records_csv(BufWriter::new(File::create(&a.out)?), &records)?;
            if let Some(path) = a.summary {
                write_summary_csv(BufWriter::new(File::create(path)?), &summarize(&records))?;
            }
            Ok(())
        }
        Command::Bounds(a) => bounds(a),
    }
}

fn print_breakdown(b: &BoundBreakdown) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    writeln!(out, "missing_data {}", b.missing_data)?;
    writeln!(out, "noise {}", b.noise)?;
    writeln!(out, "diag_deletion {}", b.diag_deletion)?;
    writeln!(out, "total {}", b.total)?;
    Ok(())
}

fn bounds(a: BoundsArgs) -> Result<(), Failure> {
    if a.general {
        let mut x = TheoryInputs::new(
            require(a.mu, "mu")?,
            require(a.kappa, "kappa")?,
            require(a.r, "r")?,
            require(a.d1, "d1")?,
            require(a.d2, "d2")?,
            require(a.p, "p")?,
            a.sigma,
            require(a.sigma_r, "sigma-r")?,
        )?;
        x.drop_sampling_terms_at_p1 = a.exact_at_p1;
        print_breakdown(&bound_general(&x))
    } else if a.tc {
        let mu = require(a.mu, "mu")?;
        let mut x = TcBoundInputs::new(
            mu,
            require(a.kappa, "kappa")?,
            require(a.r, "r")?,
            require(a.d, "d")?,
            require(a.p, "p")?,
            a.sigma,
            require(a.sigma_r, "sigma-r")?,
        );
        x.mu4 = a.mu4.unwrap_or(mu);
        print_breakdown(&bound_tc(&x)?)
    } else if a.ce {
        let x = CeBoundInputs {
            mu_ce: require(a.mu, "mu")?,
            kappa_ce: require(a.kappa, "kappa")?,
            r: require(a.r, "r")?,
            d: require(a.d, "d")?,
            n: require(a.n, "n")?,
            p: require(a.p, "p")?,
            sigma: a.sigma,
            lambda_r: require(a.sigma_r, "sigma-r")?,
        };
        print_breakdown(&bound_ce(&x)?)
    } else {
        let total = bound_bsbm(
            require(a.qin, "qin")?,
            require(a.qout, "qout")?,
            require(a.nu, "nu")?,
            require(a.nv, "nv")?,
        )?;
        writeln!(io::stdout().lock(), "total {total}")?;
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
