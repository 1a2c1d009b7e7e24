//! Experiment runner: alpha sweeps with repeated trials, aggregation, and
//! CSV / SVG output.
//!
//! Reproducibility contract: trial `t` seeds its run with
//! `base_seed ^ t`, RNG streams are pre-assigned, and results are ordered by
//! `(alpha, method, trial)`, so output bytes do not depend on the number of
//! worker threads.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{sigma_stats, DiagnosticsError};
use crate::geometry::{Dataset, GeometryError};
use crate::instances::{InstanceError, InstanceSpec};
use crate::lloyd::{lloyd_run, LloydConfig};
use crate::potential::{verify_run, PotentialError};
use crate::rng::trial_seed;
use crate::seeding::{self, Method, SeedingConfig, SeedingError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("no results to emit")]
    EmptyResults,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("results CSV line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(
        "lemma check failed (alpha {alpha}, method {method}, trial {trial}): {report}"
    )]
    LemmaViolation { alpha: f64, method: Method, trial: usize, report: String },

    #[error(transparent)]
    Instance(#[from] InstanceError),

    #[error(transparent)]
    Seeding(#[from] SeedingError),

    #[error(transparent)]
    Geometry(#[from] GeometryError),

    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),

    #[error(transparent)]
    Potential(#[from] PotentialError),
}

mod alpha_vec_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&a| {
            if a.is_infinite() {
                serde_json::Value::String("inf".into())
            } else {
                serde_json::json!(a)
            }
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<serde_json::Value> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => {
                    n.as_f64().ok_or_else(|| serde::de::Error::custom("bad alpha"))
                }
                serde_json::Value::String(s) => {
                    crate::seeding::parse_alpha(&s).map_err(serde::de::Error::custom)
                }
                other => Err(serde::de::Error::custom(format!("bad alpha {other}"))),
            })
            .collect()
    }
}

/// Declarative sweep: one instance, a grid of alphas and methods, repeated
/// trials. The JSON form mirrors these field names; unknown fields are
/// rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    #[serde(with = "alpha_vec_serde")]
    pub alphas: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    #[serde(default)]
    pub run_lloyd: bool,
    #[serde(default)]
    pub lloyd: LloydConfig,
    pub base_seed: u64,
    /// Number of centers; defaults to the instance's reference cluster count.
    #[serde(default)]
    pub k: Option<usize>,
    /// Greedy candidate override.
    #[serde(default)]
    pub m_candidates: Option<usize>,
    /// Draw a fresh instance per trial (stochastic families only) instead of
    /// reusing one dataset across trials.
    #[serde(default)]
    pub resample_per_trial: bool,
    /// Run the deterministic lemma checks on every powered-sampling trial and
    /// abort on violation.
    #[serde(default)]
    pub verify_lemmas: bool,
}

/// One (alpha, method, trial) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    #[serde(with = "crate::seeding::alpha_serde")]
    pub alpha: f64,
    pub method: Method,
    pub trial: usize,
    pub seed_cost2: f64,
    pub seed_ratio: f64,
    pub lloyd_cost2: Option<f64>,
    pub lloyd_ratio: Option<f64>,
    pub lloyd_iters: Option<usize>,
    /// Reference clusters containing no center after seeding.
    pub undiscovered: usize,
    /// Deterministic lemma checks passed (powered-sampling trials only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lemma_flags: Option<bool>,
}

/// Aggregated row: mean, standard deviation, and standard error of the cost
/// ratios over the trials of one (alpha, method) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(with = "crate::seeding::alpha_serde")]
    pub alpha: f64,
    pub method: Method,
    pub trials: usize,
    pub seed_mean: f64,
    pub seed_sd: f64,
    pub seed_se: f64,
    pub lloyd_mean: Option<f64>,
    pub lloyd_sd: Option<f64>,
    pub lloyd_se: Option<f64>,
    pub mean_undiscovered: f64,
}

/// Full sweep outcome.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub results: Vec<TrialResult>,
    pub summary: Vec<SummaryRow>,
}

fn mean_sd_se(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    (mean, sd, sd / n.sqrt())
}

/// Runs the sweep. Trials execute in the current rayon pool; results arrive
/// ordered by `(alpha, method, trial)` regardless of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment, HarnessError> {
    if config.trials == 0 {
        return Err(HarnessError::InvalidConfig("trials must be >= 1".into()));
    }
    if config.alphas.is_empty() {
        return Err(HarnessError::InvalidConfig("alphas must be nonempty".into()));
    }
    if config.methods.is_empty() {
        return Err(HarnessError::InvalidConfig("methods must be nonempty".into()));
    }

    let resample = config.resample_per_trial && config.instance.is_stochastic();
    let instance_seed = |trial: usize| match &config.instance {
        InstanceSpec::GaussianMixture { rng_seed, .. }
        | InstanceSpec::StudentTMixture { rng_seed, .. }
        | InstanceSpec::SimplexLb { rng_seed, .. }
        | InstanceSpec::GreedyLb { rng_seed, .. } => trial_seed(*rng_seed, trial as u64),
        _ => 0,
    };
    let datasets: Vec<Dataset> = if resample {
        (0..config.trials)
            .map(|t| config.instance.with_seed(instance_seed(t)).generate())
            .collect::<Result<_, _>>()?
    } else {
        vec![config.instance.generate()?]
    };
    for ds in &datasets {
        if ds.labels().is_none() {
            return Err(HarnessError::InvalidConfig(
                "sweep instances must carry reference labels".into(),
            ));
        }
    }
    let opts: Vec<f64> = datasets
        .iter()
        .map(|ds| sigma_stats(ds).map(|s| s.opt_cost))
        .collect::<Result<_, _>>()?;
    if opts.iter().any(|&o| o == 0.0) {
        return Err(HarnessError::InvalidConfig("reference clustering has zero cost".into()));
    }

    let k = match config.k {
        Some(k) => k,
        None => datasets[0].k().expect("labels checked"),
    };

    let mut tasks = Vec::new();
    for &alpha in &config.alphas {
        for &method in &config.methods {
            for trial in 0..config.trials {
                tasks.push((alpha, method, trial));
            }
        }
    }

    let results: Vec<TrialResult> = tasks
        .par_iter()
        .map(|&(alpha, method, trial)| -> Result<TrialResult, HarnessError> {
            let ds = if resample { &datasets[trial] } else { &datasets[0] };
            let opt = if resample { opts[trial] } else { opts[0] };
            let mut scfg = SeedingConfig::new(method, alpha, k, trial_seed(config.base_seed, trial as u64));
            scfg.m_candidates = config.m_candidates;
            let (cs, trace) = seeding::run(ds, &scfg)?;
            let seed_cost2 = cs.total_cost(2.0)?;
            let discovered = trace
                .steps
                .iter()
                .filter(|s| s.new_cluster == Some(true))
                .count();
            let undiscovered = ds.k().unwrap().saturating_sub(discovered);

            let lemma_flags = if config.verify_lemmas
                && method == Method::Dalpha
                && alpha.is_finite()
                && alpha > 2.0
                && trace.steps.len() == ds.k().unwrap()
            {
                let report = verify_run(ds, &trace)?;
                if !report.passed() {
                    return Err(HarnessError::LemmaViolation {
                        alpha,
                        method,
                        trial,
                        report: serde_json::to_string(&report).unwrap_or_default(),
                    });
                }
                Some(true)
            } else {
                None
            };

            let (lloyd_cost2, lloyd_ratio, lloyd_iters) = if config.run_lloyd {
                let res = lloyd_run(ds, &cs, &config.lloyd);
                (Some(res.final_cost2), Some(res.final_cost2 / opt), Some(res.iterations))
            } else {
                (None, None, None)
            };

            Ok(TrialResult {
                alpha,
                method,
                trial,
                seed_cost2,
                seed_ratio: seed_cost2 / opt,
                lloyd_cost2,
                lloyd_ratio,
                lloyd_iters,
                undiscovered,
                lemma_flags,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut summary = Vec::new();
    for &alpha in &config.alphas {
        for &method in &config.methods {
            let cell: Vec<&TrialResult> = results
                .iter()
                .filter(|r| r.method == method && (r.alpha == alpha || (r.alpha.is_infinite() && alpha.is_infinite())))
                .collect();
            let seeds: Vec<f64> = cell.iter().map(|r| r.seed_ratio).collect();
            let (seed_mean, seed_sd, seed_se) = mean_sd_se(&seeds);
            let (lloyd_mean, lloyd_sd, lloyd_se) = if config.run_lloyd {
                let l: Vec<f64> = cell.iter().filter_map(|r| r.lloyd_ratio).collect();
                let (m, s, e) = mean_sd_se(&l);
                (Some(m), Some(s), Some(e))
            } else {
                (None, None, None)
            };
            let mean_undiscovered =
                cell.iter().map(|r| r.undiscovered as f64).sum::<f64>() / cell.len() as f64;
            summary.push(SummaryRow {
                alpha,
                method,
                trials: cell.len(),
                seed_mean,
                seed_sd,
                seed_se,
                lloyd_mean,
                lloyd_sd,
                lloyd_se,
                mean_undiscovered,
            });
        }
    }
    Ok(Experiment { results, summary })
}

pub const CSV_HEADER: &str =
    "alpha,method,trial,seed_cost2,seed_ratio,lloyd_cost2,lloyd_ratio,lloyd_iters,undiscovered";

fn format_alpha(alpha: f64) -> String {
    if alpha.is_infinite() {
        "inf".to_string()
    } else {
        format!("{alpha}")
    }
}

/// Serializes trial results; floats use shortest round-trip form, absent
/// Lloyd fields stay empty.
pub fn results_to_csv(results: &[TrialResult]) -> Result<String, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut out = String::with_capacity(results.len() * 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in results {
        let opt_f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            format_alpha(r.alpha),
            r.method,
            r.trial,
            r.seed_cost2,
            r.seed_ratio,
            opt_f(r.lloyd_cost2),
            opt_f(r.lloyd_ratio),
            opt_u(r.lloyd_iters),
            r.undiscovered
        );
    }
    Ok(out)
}

/// Parses a results CSV back into trial rows (inverse of [`results_to_csv`]).
pub fn parse_results_csv(text: &str) -> Result<Vec<TrialResult>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(HarnessError::CsvParse { line: 1, message: "bad header".into() }),
    }
    let mut out = Vec::new();
    for (ix, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = ix + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(HarnessError::CsvParse {
                line: lineno,
                message: format!("expected 9 fields, found {}", f.len()),
            });
        }
        let err = |m: String| HarnessError::CsvParse { line: lineno, message: m };
        let alpha = crate::seeding::parse_alpha(f[0]).map_err(err)?;
        let method: Method = f[1].parse().map_err(err)?;
        let parse_f = |s: &str| -> Result<f64, HarnessError> {
            s.parse().map_err(|e| HarnessError::CsvParse {
                line: lineno,
                message: format!("bad float `{s}`: {e}"),
            })
        };
        let opt_f = |s: &str| -> Result<Option<f64>, HarnessError> {
            if s.is_empty() { Ok(None) } else { parse_f(s).map(Some) }
        };
        out.push(TrialResult {
            alpha,
            method,
            trial: f[2].parse().map_err(|e| HarnessError::CsvParse {
                line: lineno,
                message: format!("bad trial: {e}"),
            })?,
            seed_cost2: parse_f(f[3])?,
            seed_ratio: parse_f(f[4])?,
            lloyd_cost2: opt_f(f[5])?,
            lloyd_ratio: opt_f(f[6])?,
            lloyd_iters: if f[7].is_empty() {
                None
            } else {
                Some(f[7].parse().map_err(|e| HarnessError::CsvParse {
                    line: lineno,
                    message: format!("bad iters: {e}"),
                })?)
            },
            undiscovered: f[8].parse().map_err(|e| HarnessError::CsvParse {
                line: lineno,
                message: format!("bad undiscovered: {e}"),
            })?,
            lemma_flags: None,
        });
    }
    Ok(out)
}

/// Writes the results CSV.
pub fn emit_csv<P: AsRef<Path>>(results: &[TrialResult], path: P) -> Result<(), HarnessError> {
    let text = results_to_csv(results)?;
    std::fs::write(path.as_ref(), text).map_err(|source| HarnessError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })
}

const SVG_COLORS: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// Renders the summary as a line chart: mean cost ratio vs alpha with
/// standard-error bars, one polyline per (method, stage) series.
pub fn svg_string(summary: &[SummaryRow]) -> Result<String, HarnessError> {
    if summary.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let (width, height) = (860.0, 540.0);
    let (ml, mr, mt, mb) = (70.0, 30.0, 30.0, 60.0);
    let pw = width - ml - mr;
    let ph = height - mt - mb;

    // Map infinite alpha to one grid step past the largest finite value.
    let finite: Vec<f64> = summary.iter().map(|r| r.alpha).filter(|a| a.is_finite()).collect();
    let max_finite = finite.iter().cloned().fold(2.0f64, f64::max);
    let min_alpha = finite.iter().cloned().fold(max_finite, f64::min);
    let inf_pos = max_finite + ((max_finite - min_alpha) / 8.0).max(1.0);
    let xval = |a: f64| if a.is_infinite() { inf_pos } else { a };
    let xmax = summary.iter().map(|r| xval(r.alpha)).fold(f64::MIN, f64::max);
    let xmin = summary.iter().map(|r| xval(r.alpha)).fold(f64::MAX, f64::min);
    let xspan = (xmax - xmin).max(1e-9);

    let mut ymax = 0.0f64;
    for r in summary {
        ymax = ymax.max(r.seed_mean + r.seed_se);
        if let (Some(m), Some(e)) = (r.lloyd_mean, r.lloyd_se) {
            ymax = ymax.max(m + e);
        }
    }
    let ymax = (ymax * 1.05).max(1e-9);
    let sx = |a: f64| ml + (xval(a) - xmin) / xspan * pw;
    let sy = |v: f64| mt + ph - (v / ymax) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(s, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    // Axes.
    let _ = writeln!(
        s,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        mt + ph,
        ml + pw,
        mt + ph
    );
    let _ = writeln!(s, "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>", mt + ph);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">alpha</text>",
        ml + pw / 2.0,
        height - 15.0
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 {})\">mean cost ratio</text>",
        mt + ph / 2.0,
        mt + ph / 2.0
    );
    // Y ticks.
    for t in 0..=5 {
        let v = ymax * t as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(s, "<line x1=\"{}\" y1=\"{y}\" x2=\"{ml}\" y2=\"{y}\" stroke=\"black\"/>", ml - 5.0);
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{v:.3}</text>",
            ml - 8.0,
            y + 4.0
        );
    }
    // X ticks at each distinct alpha.
    let mut xticks: Vec<f64> = summary.iter().map(|r| r.alpha).collect();
    xticks.sort_by(|a, b| xval(*a).partial_cmp(&xval(*b)).unwrap());
    xticks.dedup_by(|a, b| xval(*a) == xval(*b));
    for &a in &xticks {
        let x = sx(a);
        let _ = writeln!(
            s,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>",
            mt + ph,
            mt + ph + 5.0
        );
        let label = if a.is_infinite() { "inf".to_string() } else { format!("{a}") };
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{label}</text>",
            mt + ph + 20.0
        );
    }

    // Series: per method, seed stage always, lloyd stage when present.
    let mut methods: Vec<Method> = Vec::new();
    for r in summary {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let has_lloyd = summary.iter().any(|r| r.lloyd_mean.is_some());
    let mut series_ix = 0;
    for &method in &methods {
        let stages: &[&str] = if has_lloyd { &["seed", "lloyd"] } else { &["seed"] };
        for &stage in stages {
            let mut rows: Vec<&SummaryRow> = summary.iter().filter(|r| r.method == method).collect();
            rows.sort_by(|a, b| xval(a.alpha).partial_cmp(&xval(b.alpha)).unwrap());
            let color = SVG_COLORS[series_ix % SVG_COLORS.len()];
            let mut pts = String::new();
            for r in &rows {
                let (m, e) = match stage {
                    "seed" => (r.seed_mean, r.seed_se),
                    _ => match (r.lloyd_mean, r.lloyd_se) {
                        (Some(m), Some(e)) => (m, e),
                        _ => continue,
                    },
                };
                let (x, y) = (sx(r.alpha), sy(m));
                let _ = write!(pts, "{x:.2},{y:.2} ");
                // Error bar.
                let _ = writeln!(
                    s,
                    "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{color}\"/>",
                    sy(m + e),
                    sy((m - e).max(0.0))
                );
            }
            let _ = writeln!(
                s,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                pts.trim_end()
            );
            let ly = mt + 16.0 * series_ix as f64 + 10.0;
            let _ = writeln!(
                s,
                "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>",
                ml + pw - 150.0,
                ml + pw - 125.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-size=\"12\">{method} ({stage})</text>",
                ml + pw - 118.0,
                ly + 4.0
            );
            series_ix += 1;
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes the summary chart.
pub fn emit_svg<P: AsRef<Path>>(summary: &[SummaryRow], path: P) -> Result<(), HarnessError> {
    let text = svg_string(summary)?;
    std::fs::write(path.as_ref(), text).map_err(|source| HarnessError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })
}
