use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use rankscope::deficit::{deficit_accuracy, solve_deficit, DeficitProblem};
use rankscope::diagnostics::{
    cls_dim, linear_chain_experiment, partial_rank_sweep, perturbed_pca_dims, rank_deficiency_curve,
    structural_probe, ClsDimConfig, PertDimConfig, RetentionMode,
};
use rankscope::io::{format_f64, read_labels, read_logits_csv, read_matrix_csv, write_table, DeficitReport};
use rankscope::linalg::{perturbation_budget, SpectralSummary};
use rankscope::lyapunov::{collapse_depth, estimate_spectrum, rank_one_fraction, ChainConfig, RateSource};
use rankscope::net::{JacobianProbe, LayerSpec, Network, NetworkSpec};
use rankscope::rng::GaussianStream;
use rankscope::{Matrix, ToleranceSpec};

use crate::CliError;

/// Stream index for generated network inputs, apart from weight streams.
const INPUT_STREAM: u64 = 0x1A7E_0000_0000_0001;

/// What a subcommand produced.
pub struct Run {
    /// Lines for standard output.
    pub summary: Vec<String>,
    /// File contents for `--out`; printed to standard output when no file is given
    /// and `echo_artifact` is set.
    pub artifact: String,
    pub echo_artifact: bool,
    /// Reported after the artifact is written.
    pub status: Result<(), CliError>,
}

impl Run {
    fn artifact(artifact: String) -> Self {
        Self { summary: Vec::new(), artifact, echo_artifact: true, status: Ok(()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsMode {
    /// `--eps` is the relative threshold.
    Relative,
    /// 1.19e-7 times the number of values measured.
    Float32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TolArgs {
    /// Tolerance convention
    #[arg(long, value_enum, default_value_t = EpsMode::Float32)]
    pub eps_mode: EpsMode,
    /// Relative threshold, required with --eps-mode relative
    #[arg(long)]
    pub eps: Option<f64>,
}

impl TolArgs {
    fn resolve(&self, count: usize) -> Result<ToleranceSpec, CliError> {
        let tol = match (self.eps_mode, self.eps) {
            (EpsMode::Relative, Some(e)) => ToleranceSpec::relative(e),
            (EpsMode::Relative, None) => return Err(CliError::Input("--eps-mode relative requires --eps".into())),
            (EpsMode::Float32, None) => ToleranceSpec::float32(count),
            (EpsMode::Float32, Some(_)) => {
                return Err(CliError::Input("--eps only applies to --eps-mode relative".into()))
            }
        };
        Ok(tol?)
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    read_matrix_csv(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_network(path: &Path) -> Result<Network, CliError> {
    let spec = NetworkSpec::from_json(&read_text(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Network::from_spec(&spec)?)
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Input(format!("--seed is required {what}")))
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("result serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RankArgs {
    /// Matrix CSV, one row per line
    #[arg(long)]
    pub matrix: PathBuf,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Direction CSV; also report the perturbation budget along it
    #[arg(long)]
    pub perturbation: Option<PathBuf>,
    /// Unused; accepted for uniformity
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn rank(a: &RankArgs) -> Result<Run, CliError> {
    let m = read_matrix(&a.matrix)?;
    let tol = a.tol.resolve(m.rows().min(m.cols()))?;
    let summary = SpectralSummary::compute(&m, tol)?;
    let mut lines = vec![summary.numerical_rank.to_string()];
    if let Some(path) = &a.perturbation {
        let d = read_matrix(path)?;
        let budget = perturbation_budget(&m, &d, tol.epsilon())?;
        lines.push(format!("delta_max {}", format_f64(budget)));
    }
    let threshold = tol.epsilon() * summary.spectral_norm;
    let rows: Vec<Vec<String>> = summary
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let counted = summary.spectral_norm > 0.0 && s >= threshold;
            vec![(k + 1).to_string(), format_f64(s), u8::from(counted).to_string()]
        })
        .collect();
    Ok(Run {
        summary: lines,
        artifact: write_table(&["k", "singular_value", "counted"], &rows),
        echo_artifact: false,
        status: Ok(()),
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// NetworkSpec JSON
    #[arg(long)]
    pub network: PathBuf,
    /// Input point as a one-row CSV; defaults to a seeded standard Gaussian vector
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated input coordinates to probe
    #[arg(long, value_delimiter = ',', conflicts_with = "probe_size")]
    pub probe: Option<Vec<usize>>,
    /// Probe the leading K coordinates [default: min(16, input width)]
    #[arg(long)]
    pub probe_size: Option<usize>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn sweep(a: &SweepArgs) -> Result<Run, CliError> {
    let net = read_network(&a.network)?;
    let n = net.input_dim();
    let x = match &a.input {
        Some(path) => {
            let m = read_matrix(path)?;
            if m.rows() != 1 {
                return Err(CliError::Input(format!("{}: expected one row, found {}", path.display(), m.rows())));
            }
            m.row(0).to_vec()
        }
        None => GaussianStream::derived(require_seed(a.seed, "without --input")?, INPUT_STREAM).gaussian_vec(n, 1.0),
    };
    let probe = match (&a.probe, a.probe_size) {
        (Some(indices), _) => JacobianProbe::new(indices.clone(), n)?,
        (None, Some(k)) => JacobianProbe::leading(k, n)?,
        (None, None) => JacobianProbe::leading(n.min(16), n)?,
    };
    let tol = a.tol.resolve(probe.len())?;
    let result = partial_rank_sweep(&net, &x, &probe, tol)?;
    let rows: Vec<Vec<String>> = result
        .entries
        .iter()
        .map(|e| vec![e.depth.to_string(), e.partial_rank.to_string(), e.probe_size.to_string(), format_f64(e.epsilon)])
        .collect();
    Ok(Run::artifact(write_table(&["depth", "partial_rank", "K", "epsilon"], &rows)))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub depth: usize,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long, required = true)]
    pub seed: Option<u64>,
}

pub fn chain(a: &ChainArgs) -> Result<Run, CliError> {
    let seed = require_seed(a.seed, "for chain")?;
    let records = linear_chain_experiment(a.width, a.depth, seed, a.tol.resolve(a.width)?)?;
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| vec![r.depth.to_string(), r.jacobian_rank.to_string(), r.covariance_rank.to_string()])
        .collect();
    Ok(Run::artifact(write_table(&["depth", "jac_rank", "cov_rank"], &rows)))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LyapunovArgs {
    /// Matrix dimension
    #[arg(long)]
    pub n: usize,
    /// Number of factors per chain
    #[arg(long)]
    pub depth: usize,
    #[arg(long)]
    pub trials: usize,
    #[arg(long, required = true)]
    pub seed: Option<u64>,
}

pub fn lyapunov(a: &LyapunovArgs) -> Result<Run, CliError> {
    let cfg = ChainConfig {
        dimension: a.n,
        depth: a.depth,
        trials: a.trials,
        seed: require_seed(a.seed, "for lyapunov")?,
    };
    let est = estimate_spectrum(&cfg)?;
    let mut rows = Vec::with_capacity(a.n);
    let mut summary = Vec::with_capacity(a.n);
    for k in 0..a.n {
        let z = est.z_score(k);
        rows.push(vec![
            (k + 1).to_string(),
            format_f64(est.estimates[k]),
            format_f64(est.stderrs[k]),
            format_f64(est.theory[k]),
            format_f64(est.abs_error(k)),
            format_f64(z),
        ]);
        let verdict = if est.within(k, 2.0) { "pass" } else { "fail" };
        summary.push(format!("k={} {verdict} z={z:.3}", k + 1));
    }
    Ok(Run {
        summary,
        artifact: write_table(&["k", "lambda_hat", "stderr", "theory", "abs_error", "z_score"], &rows),
        echo_artifact: false,
        status: Ok(()),
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CollapseArgs {
    #[arg(long)]
    pub n: usize,
    /// Relative rank tolerance
    #[arg(long)]
    pub eps: f64,
    /// Measured per-layer contraction of sigma_2/sigma_1 [default: closed form]
    #[arg(long)]
    pub rate: Option<f64>,
    /// Also simulate this many Gaussian chains at the predicted depth
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn collapse(a: &CollapseArgs) -> Result<Run, CliError> {
    let source = a.rate.map_or(RateSource::Theory, RateSource::Measured);
    let depth = collapse_depth(a.n, a.eps, source)?;
    let mut header = vec!["n", "epsilon", "depth"];
    let mut row = vec![a.n.to_string(), format_f64(a.eps), depth.to_string()];
    let mut summary = vec![depth.to_string()];
    if let Some(trials) = a.trials {
        let cfg = ChainConfig { dimension: a.n, depth, trials, seed: require_seed(a.seed, "with --trials")? };
        let fraction = rank_one_fraction(&cfg, a.eps)?;
        header.push("rank_one_fraction");
        row.push(format_f64(fraction));
        summary.push(format!("rank_one_fraction {fraction}"));
    }
    Ok(Run { summary, artifact: write_table(&header, &[row]), echo_artifact: false, status: Ok(()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RetentionArg {
    Relative,
    Absolute,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClsDimArgs {
    /// Feature matrix CSV, one sample per row
    #[arg(long)]
    pub features: PathBuf,
    /// Labels, one class index per line
    #[arg(long)]
    pub labels: PathBuf,
    /// Classification head CSV, classes x features
    #[arg(long)]
    pub head: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    pub retention: f64,
    #[arg(long, value_enum, default_value_t = RetentionArg::Relative)]
    pub mode: RetentionArg,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn clsdim(a: &ClsDimArgs) -> Result<Run, CliError> {
    let features = read_matrix(&a.features)?;
    let labels = read_labels(&read_text(&a.labels)?).map_err(|e| CliError::Input(format!("{}: {e}", a.labels.display())))?;
    let cfg = ClsDimConfig {
        retention: a.retention,
        mode: match a.mode {
            RetentionArg::Relative => RetentionMode::RelativeToBaseline,
            RetentionArg::Absolute => RetentionMode::Absolute,
        },
        head: read_matrix(&a.head)?,
    };
    Ok(Run::artifact(json(&cls_dim(&features, &labels, &cfg)?)))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PertDimArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Base points CSV, one per row [default: seeded standard Gaussian points]
    #[arg(long, conflicts_with = "num_points")]
    pub points: Option<PathBuf>,
    /// Number of generated base points
    #[arg(long)]
    pub num_points: Option<usize>,
    /// Standard deviation of the input perturbations
    #[arg(long, default_value_t = 1e-3)]
    pub noise: f64,
    /// Perturbations per base point
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, required = true)]
    pub seed: Option<u64>,
}

pub fn pertdim(a: &PertDimArgs) -> Result<Run, CliError> {
    let seed = require_seed(a.seed, "for pertdim")?;
    let net = read_network(&a.network)?;
    let points: Vec<Vec<f64>> = match &a.points {
        Some(path) => read_matrix(path)?.to_rows(),
        None => {
            let mut g = GaussianStream::derived(seed, INPUT_STREAM);
            (0..a.num_points.unwrap_or(8)).map(|_| g.gaussian_vec(net.input_dim(), 1.0)).collect()
        }
    };
    let cfg = PertDimConfig { noise_std: a.noise, samples: a.samples };
    let dims = perturbed_pca_dims(&net, &points, &cfg, seed)?;
    let base = dims[0].mean;
    let rows: Vec<Vec<String>> =
        dims.iter().map(|d| vec![d.depth.to_string(), format_f64(d.mean), format_f64(d.mean - base)]).collect();
    Ok(Run::artifact(write_table(&["depth", "mean_dim", "delta_dim"], &rows)))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StructuralArgs {
    /// Component to probe, as a layer JSON object
    #[arg(long)]
    pub layer: PathBuf,
    /// Input width
    #[arg(long)]
    pub width: usize,
    /// Number of Gaussian inputs [default: 4 x width]
    #[arg(long)]
    pub batch: Option<usize>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long, required = true)]
    pub seed: Option<u64>,
}

pub fn structural(a: &StructuralArgs) -> Result<Run, CliError> {
    let seed = require_seed(a.seed, "for structural")?;
    let layer: LayerSpec = serde_json::from_str(&read_text(&a.layer)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.layer.display())))?;
    let batch = a.batch.unwrap_or(4 * a.width);
    let record = structural_probe(&layer, a.width, batch, seed, a.tol.resolve(a.width)?)?;
    Ok(Run::artifact(json(&record)))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeficitArgs {
    /// Logit table CSV with a header of category ids and an optional label column
    #[arg(long)]
    pub logits: PathBuf,
    /// Category id whose logit is expressed through the others
    #[arg(long)]
    pub target: String,
    /// L1 penalty
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn deficit(a: &DeficitArgs) -> Result<Run, CliError> {
    let table =
        read_logits_csv(&read_text(&a.logits)?).map_err(|e| CliError::Input(format!("{}: {e}", a.logits.display())))?;
    let target = table
        .category_index(&a.target)
        .ok_or_else(|| CliError::Input(format!("unknown target category {:?}", a.target)))?;
    let problem =
        DeficitProblem { max_iterations: a.max_iter, tol: a.tol, ..DeficitProblem::new(table.logits.clone(), target, a.eta) };
    let sol = solve_deficit(&problem)?;
    let accuracy = table.labels.as_ref().map(|l| deficit_accuracy(&table.logits, l, &sol)).transpose()?;
    let status = if sol.converged {
        Ok(())
    } else {
        Err(CliError::Convergence(format!("no convergence after {} sweeps", sol.iterations)))
    };
    Ok(Run { status, ..Run::artifact(json(&DeficitReport::new(&sol, accuracy.as_ref()))) })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProbArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    /// Comma-separated relative tolerances
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub trials: usize,
    #[arg(long, required = true)]
    pub seed: Option<u64>,
}

pub fn prob(a: &ProbArgs) -> Result<Run, CliError> {
    let seed = require_seed(a.seed, "for prob")?;
    let curve = rank_deficiency_curve(a.rows, a.cols, &a.eps, a.trials, seed)?;
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|p| vec![format_f64(p.epsilon), format_f64(p.estimate), format_f64(p.stderr), p.trials.to_string()])
        .collect();
    Ok(Run::artifact(write_table(&["epsilon", "estimate", "stderr", "trials"], &rows)))
}
