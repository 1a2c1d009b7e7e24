//! `dalpha`: generate benchmark instances, run seeding methods and Lloyd
//! refinement, measure instance parameters, verify the counter/potential
//! inequalities, and sweep alpha grids to CSV/SVG.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use dalpha::diagnostics::{explicit_bound, param_report_with, expected_cost_factor, GAlphaMode};
use dalpha::geometry::{CenterSet, Dataset};
use dalpha::harness::{emit_csv, emit_svg, run_experiment, ExperimentConfig, HarnessError};
use dalpha::instances::{load_csv, preset, save_csv, InstanceError, InstanceSpec};
use dalpha::lloyd::{lloyd_run, LloydConfig};
use dalpha::potential::{
    alpha_hit_cost_checks, expected_decrease_check, hit_cost_check, replay_prefix, verify_run,
    LemmaCheck, LemmaReport, PotentialError,
};
use dalpha::rng::trial_seed;
use dalpha::seeding::{self, parse_alpha, Method, SeedingConfig};

/// Exit codes: 0 success, 1 usage, 2 I/O, 3 lemma violation.
enum CliError {
    Usage(String),
    Io(String),
    Lemma(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Lemma(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Lemma(m) => m,
        }
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        match e {
            InstanceError::Io { .. } | InstanceError::Parse { .. } => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io { .. } => CliError::Io(e.to_string()),
            HarnessError::LemmaViolation { .. } => CliError::Lemma(e.to_string()),
            HarnessError::Instance(inner) => inner.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<seeding::SeedingError> for CliError {
    fn from(e: seeding::SeedingError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<dalpha::geometry::GeometryError> for CliError {
    fn from(e: dalpha::geometry::GeometryError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<dalpha::diagnostics::DiagnosticsError> for CliError {
    fn from(e: dalpha::diagnostics::DiagnosticsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn alpha_arg(s: &str) -> Result<f64, String> {
    parse_alpha(s)
}

#[derive(Parser)]
#[command(name = "dalpha", version, about = "Power-of-distance seeding for k-means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark instance and write it as CSV.
    Generate(GenerateArgs),
    /// Run one seeding method on a dataset.
    Seed(SeedArgs),
    /// Run Lloyd refinement from given initial centers.
    Lloyd(LloydArgs),
    /// Measure instance parameters and bound values.
    Params(ParamsArgs),
    /// Run the counter/potential inequality suites over repeated seedings.
    Verify(VerifyArgs),
    /// Run an alpha sweep from a JSON config, writing CSV and optional SVG.
    Sweep(SweepArgs),
    /// Evaluate the expected-cost factor for given parameters.
    Bound(BoundArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance family (simplex_lb, galpha_lb, greedy_lb); mixtures are
    /// specified via --preset or --spec.
    #[arg(long, conflicts_with_all = ["preset", "spec"])]
    family: Option<String>,
    /// Named mixture preset: d1..d5.
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// JSON file holding a full instance spec.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Sample count (mixture presets).
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Cluster count (simplex_lb, greedy_lb).
    #[arg(long)]
    k: Option<usize>,
    /// Points per cluster (simplex_lb, greedy_lb) or per-cluster count n (galpha_lb).
    #[arg(long)]
    n_per_cluster: Option<usize>,
    /// Family sampling exponent (simplex_lb, galpha_lb).
    #[arg(long, value_parser = alpha_arg)]
    alpha: Option<f64>,
    /// Greedy sample count the instance is built against (greedy_lb).
    #[arg(long)]
    m_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = alpha_arg)]
    alpha: f64,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    method: Method,
    /// Greedy candidate count; defaults to ceil(2 + ln k).
    #[arg(long)]
    m_candidates: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-step trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct LloydArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated dataset point indices used as initial centers.
    #[arg(long, value_delimiter = ',')]
    centers: Vec<usize>,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = alpha_arg)]
    alpha: f64,
    /// Disable the pairwise-sum subsampling guard on large clusters.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = alpha_arg)]
    alpha: f64,
    /// Number of seeding runs to verify.
    #[arg(long)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run this many exact-expectation checks on mid-run states.
    #[arg(long, default_value_t = 0)]
    expectation_samples: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment config (strict field checking).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV of per-trial results.
    #[arg(long)]
    out: PathBuf,
    /// Optional summary chart.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_parser = alpha_arg)]
    alpha: f64,
    /// Concentration moment.
    #[arg(long)]
    g: f64,
    #[arg(long)]
    sigma_ratio: f64,
    /// Number of nonempty weight classes.
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    k: usize,
    /// Print the fully explicit constant instead of the rate-only form.
    #[arg(long)]
    explicit: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Seed(a) => run_seed(a),
        Command::Lloyd(a) => run_lloyd(a),
        Command::Params(a) => params(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
        Command::Bound(a) => bound(a),
    }
}

fn read_spec(path: &PathBuf) -> Result<InstanceSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn generate(a: GenerateArgs) -> Result<(), CliError> {
    let spec = if let Some(path) = &a.spec {
        read_spec(path)?
    } else if let Some(name) = &a.preset {
        preset(name, a.n, a.seed)?
    } else {
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this family")))
        };
        let need_alpha = |v: Option<f64>| {
            v.ok_or_else(|| CliError::Usage("--alpha is required for this family".into()))
        };
        match a.family.as_deref() {
            Some("simplex_lb") => InstanceSpec::SimplexLb {
                k: need(a.k, "k")?,
                n_per_cluster: need(a.n_per_cluster, "n-per-cluster")?,
                alpha: need_alpha(a.alpha)?,
                rng_seed: a.seed,
            },
            Some("galpha_lb") => InstanceSpec::GalphaLb {
                n: need(a.n_per_cluster, "n-per-cluster")?,
                alpha: need_alpha(a.alpha)?,
            },
            Some("greedy_lb") => InstanceSpec::GreedyLb {
                k: need(a.k, "k")?,
                m_samples: need(a.m_samples, "m-samples")?,
                n_per_cluster: need(a.n_per_cluster, "n-per-cluster")?,
                rng_seed: a.seed,
            },
            Some(other @ ("gaussian_mixture" | "student_t_mixture")) => {
                return Err(CliError::Usage(format!(
                    "family `{other}` needs component parameters; use --preset d1..d5 or --spec file.json"
                )))
            }
            Some(other) => return Err(CliError::Usage(format!("unknown family `{other}`"))),
            None => {
                return Err(CliError::Usage(
                    "one of --family, --preset, or --spec is required".into(),
                ))
            }
        }
    };
    let ds = spec.generate()?;
    save_csv(&ds, &a.out)?;
    println!(
        "{}",
        serde_json::json!({ "n": ds.n(), "d": ds.d(), "k": ds.k(), "out": a.out.display().to_string() })
    );
    Ok(())
}

fn load_data(path: &PathBuf) -> Result<Dataset, CliError> {
    Ok(load_csv(path)?)
}

fn run_seed(a: SeedArgs) -> Result<(), CliError> {
    let ds = load_data(&a.data)?;
    let mut cfg = SeedingConfig::new(a.method, a.alpha, a.k, a.seed);
    cfg.m_candidates = a.m_candidates;
    let (cs, trace) = seeding::run(&ds, &cfg)?;
    let seed_cost2 = cs.total_cost(2.0)?;
    let (ratio, undiscovered) = match ds.labels() {
        Some(_) => {
            let ratio = dalpha::diagnostics::cost_ratio(&ds, seed_cost2).ok();
            let discovered = trace.steps.iter().filter(|s| s.new_cluster == Some(true)).count();
            (ratio, Some(ds.k().unwrap().saturating_sub(discovered)))
        }
        None => (None, None),
    };
    if let Some(path) = &a.trace {
        let text = serde_json::to_string_pretty(&trace)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    println!(
        "{}",
        serde_json::json!({
            "method": a.method.to_string(),
            "alpha": if a.alpha.is_infinite() { serde_json::json!("inf") } else { serde_json::json!(a.alpha) },
            "k": a.k,
            "centers": cs.centers(),
            "seed_cost2": seed_cost2,
            "seed_ratio": ratio,
            "undiscovered": undiscovered,
        })
    );
    Ok(())
}

fn run_lloyd(a: LloydArgs) -> Result<(), CliError> {
    let ds = load_data(&a.data)?;
    if a.centers.is_empty() {
        return Err(CliError::Usage("--centers needs at least one index".into()));
    }
    let mut cs = CenterSet::new(ds.n());
    for &c in &a.centers {
        cs.add_center(&ds, c)?;
    }
    let res = lloyd_run(&ds, &cs, &LloydConfig { max_iters: a.max_iters, tol: a.tol });
    let ratio = ds
        .labels()
        .and_then(|_| dalpha::diagnostics::cost_ratio(&ds, res.final_cost2).ok());
    let centers: Vec<&[f64]> = (0..res.k).map(|j| res.center(j)).collect();
    println!(
        "{}",
        serde_json::json!({
            "iterations": res.iterations,
            "converged": res.converged,
            "final_cost2": res.final_cost2,
            "ratio": ratio,
            "centers": centers,
        })
    );
    Ok(())
}

fn params(a: ParamsArgs) -> Result<(), CliError> {
    let ds = load_data(&a.data)?;
    let mode = if a.exact { GAlphaMode::Exact } else { GAlphaMode::default() };
    let report = param_report_with(&ds, a.alpha, mode)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?);
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let ds = load_data(&a.data)?;
    let k = ds
        .k()
        .ok_or_else(|| CliError::Usage("verification requires a labeled dataset".into()))?;
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be >= 1".into()));
    }
    let mut aggregate: Option<LemmaReport> = None;
    for r in 0..a.runs {
        let cfg = SeedingConfig::new(Method::Dalpha, a.alpha, k, trial_seed(a.seed, r as u64));
        let (_, trace) = seeding::seed(&ds, &cfg)?;
        let rep = verify_run(&ds, &trace)?;
        match &mut aggregate {
            Some(agg) => agg.merge(&rep),
            None => aggregate = Some(rep),
        }
    }
    let mut report = aggregate.expect("runs >= 1");

    if a.expectation_samples > 0 {
        let mut done = 0usize;
        let mut r = 0u64;
        while done < a.expectation_samples {
            let cfg = SeedingConfig::new(Method::Dalpha, a.alpha, k, trial_seed(a.seed ^ 0x5a5a, r));
            let (_, trace) = seeding::seed(&ds, &cfg)?;
            let t = 1 + (r as usize) % k.max(2);
            let (cs, st) = replay_prefix(&ds, &trace, t.min(k))?;
            for &class in st.classes() {
                if done >= a.expectation_samples {
                    break;
                }
                if st.undiscovered(class).map_or(true, |u| u.is_empty()) {
                    continue;
                }
                if let Ok(dec) = expected_decrease_check(&ds, &cs, &st, class) {
                    let tol = 1e-9 * (1.0 + st.phi_total());
                    report.merge(&LemmaReport {
                        lemmas: vec![LemmaCheck {
                            name: "expected_potential_nonincrease_on_discovery".into(),
                            checked: 1,
                            violations: usize::from(dec.max > tol),
                            max_slack: -(dec.max - tol),
                        }],
                    });
                    done += 1;
                }
            }
            for cluster in 0..k {
                if done >= a.expectation_samples {
                    break;
                }
                let hc = hit_cost_check(&ds, &cs, cluster, a.alpha)?;
                let (powered, uniform) = alpha_hit_cost_checks(&ds, &cs, cluster, a.alpha)?;
                let entry = |name: &str, holds: bool, lhs: f64, rhs: f64| LemmaReport {
                    lemmas: vec![LemmaCheck {
                        name: name.into(),
                        checked: 1,
                        violations: usize::from(!holds),
                        max_slack: rhs - lhs,
                    }],
                };
                report.merge(&entry("hit_squared_cost_bound", hc.holds(), hc.lhs, hc.rhs));
                report.merge(&entry("hit_powered_cost_bound", powered.holds(), powered.lhs, powered.rhs));
                report.merge(&entry(
                    "uniform_powered_cost_bound",
                    uniform.holds(),
                    uniform.lhs,
                    uniform.rhs,
                ));
                done += 1;
            }
            r += 1;
        }
    }

    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?);
    if !report.passed() {
        return Err(CliError::Lemma("inequality checks reported violations".into()));
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", a.config.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    let exp = run_experiment(&cfg)?;
    emit_csv(&exp.results, &a.out)?;
    if let Some(svg) = &a.svg {
        emit_svg(&exp.summary, svg)?;
    }
    println!("{}", serde_json::to_string_pretty(&exp.summary).map_err(|e| CliError::Usage(e.to_string()))?);
    Ok(())
}

fn bound(a: BoundArgs) -> Result<(), CliError> {
    let value = if a.explicit {
        explicit_bound(a.alpha, a.g, a.sigma_ratio, a.ell, a.k)?
    } else {
        expected_cost_factor(a.alpha, a.g, a.sigma_ratio, a.ell, a.k)?
    };
    println!("{value}");
    Ok(())
}
