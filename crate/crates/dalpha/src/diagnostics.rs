//! Exact instance parameters of a labeled dataset and evaluation of the
//! approximation-factor expressions that depend on them.
//!
//! The three measured quantities are: per-cluster standard deviation around
//! the centroid (with the reference cost `sum |C| sigma_C^2`), the
//! concentration moment `g_alpha` (a normalized average of alpha-powered
//! pairwise costs, equal to exactly 2 at `alpha = 2`), and the weight-class
//! histogram counting clusters whose size falls in `[2^i, 2^(i+1))`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{squared_distance, Dataset, GeometryError};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("alpha must be > 2 for bound evaluation, got {alpha}")]
    AlphaTooSmall { alpha: f64 },

    #[error("alpha must be >= 2 for the concentration moment, got {alpha}")]
    InvalidAlpha { alpha: f64 },

    #[error("sigma ratio must be >= 1, got {ratio}")]
    RatioBelowOne { ratio: f64 },

    #[error("bound inputs must be non-negative")]
    NegativeInput,

    #[error("reference clustering has zero cost; ratio undefined")]
    DegenerateReference,

    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Per-cluster deviations and the reference clustering cost.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaStats {
    /// `sigma_C = sqrt(sum_x ||x - mu_C||^2 / |C|)` per cluster.
    pub per_cluster: Vec<f64>,
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// Reference cost `sum_C |C| sigma_C^2`.
    pub opt_cost: f64,
}

impl SigmaStats {
    /// `sigma_max / sigma_min`; `None` when `sigma_min = 0`.
    pub fn ratio(&self) -> Option<f64> {
        if self.sigma_min > 0.0 {
            Some(self.sigma_max / self.sigma_min)
        } else {
            None
        }
    }
}

/// Exact two-pass deviation of every reference cluster.
pub fn sigma_stats(ds: &Dataset) -> Result<SigmaStats, DiagnosticsError> {
    let members = ds.cluster_members()?;
    let mut per_cluster = Vec::with_capacity(members.len());
    let mut opt_cost = 0.0;
    for ms in &members {
        let mu = ds.centroid(ms);
        let ss: f64 = ms.iter().map(|&i| squared_distance(ds.point(i), &mu)).sum();
        per_cluster.push((ss / ms.len() as f64).sqrt());
        opt_cost += ss;
    }
    let sigma_max = per_cluster.iter().cloned().fold(0.0f64, f64::max);
    let sigma_min = per_cluster.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SigmaStats { per_cluster, sigma_max, sigma_min, opt_cost })
}

/// How to evaluate the pairwise sums of the concentration moment.
#[derive(Debug, Clone, Copy)]
pub enum GAlphaMode {
    /// Full `O(|C|^2 d)` evaluation.
    Exact,
    /// Clusters above `threshold` members are evaluated on a strided sample
    /// of `sample` members and flagged approximate.
    SubsampleAbove { threshold: usize, sample: usize },
}

impl Default for GAlphaMode {
    fn default() -> Self {
        GAlphaMode::SubsampleAbove { threshold: 4000, sample: 2000 }
    }
}

/// Concentration moment report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GAlphaReport {
    pub alpha: f64,
    /// Max over clusters; `None` if every cluster was excluded (zero variance).
    pub value: Option<f64>,
    /// Per-cluster contribution; `None` marks excluded zero-variance clusters.
    pub per_cluster: Vec<Option<f64>>,
    /// Per-cluster flag: evaluated on a subsample rather than exactly.
    pub subsampled: Vec<bool>,
}

/// `g_alpha` with the default subsampling guard.
pub fn g_alpha(ds: &Dataset, alpha: f64) -> Result<GAlphaReport, DiagnosticsError> {
    g_alpha_with(ds, alpha, GAlphaMode::default())
}

/// Max over clusters `C` of
/// `[(1/|C|^2) sum_{z in C} cost_alpha(C, z)] / (cost2(C, mu_C)/|C|)^(alpha/2)`.
///
/// Zero-variance clusters (including singletons) are excluded from the max.
pub fn g_alpha_with(
    ds: &Dataset,
    alpha: f64,
    mode: GAlphaMode,
) -> Result<GAlphaReport, DiagnosticsError> {
    if !(alpha >= 2.0) {
        return Err(DiagnosticsError::InvalidAlpha { alpha });
    }
    let members = ds.cluster_members()?;
    let mut per_cluster = Vec::with_capacity(members.len());
    let mut subsampled = Vec::with_capacity(members.len());
    for ms in &members {
        let mu = ds.centroid(ms);
        let var: f64 =
            ms.iter().map(|&i| squared_distance(ds.point(i), &mu)).sum::<f64>() / ms.len() as f64;
        if var == 0.0 {
            per_cluster.push(None);
            subsampled.push(false);
            continue;
        }
        let eval: Vec<usize> = match mode {
            GAlphaMode::Exact => ms.clone(),
            GAlphaMode::SubsampleAbove { threshold, sample } if ms.len() > threshold => {
                let stride = ms.len().div_ceil(sample);
                ms.iter().step_by(stride).cloned().collect()
            }
            GAlphaMode::SubsampleAbove { .. } => ms.clone(),
        };
        subsampled.push(eval.len() < ms.len());
        let m = eval.len() as f64;
        let mut pair_sum = 0.0;
        for (a, &i) in eval.iter().enumerate() {
            for &j in eval.iter().skip(a + 1) {
                pair_sum += squared_distance(ds.point(i), ds.point(j)).powf(alpha / 2.0);
            }
        }
        let numerator = 2.0 * pair_sum / (m * m);
        per_cluster.push(Some(numerator / var.powf(alpha / 2.0)));
    }
    let value = per_cluster.iter().flatten().cloned().fold(None, |acc: Option<f64>, v| {
        Some(acc.map_or(v, |a| a.max(v)))
    });
    Ok(GAlphaReport { alpha, value, per_cluster, subsampled })
}

/// Rough standardized-moment upper bound on the concentration moment:
/// `2^(alpha+1) * max_C [(1/|C|) sum_x ||x - mu_C||^alpha] / sigma_C^alpha`.
pub fn g_hat_alpha(ds: &Dataset, alpha: f64) -> Result<Option<f64>, DiagnosticsError> {
    if !(alpha >= 2.0) {
        return Err(DiagnosticsError::InvalidAlpha { alpha });
    }
    let members = ds.cluster_members()?;
    let mut best: Option<f64> = None;
    for ms in &members {
        let mu = ds.centroid(ms);
        let var: f64 =
            ms.iter().map(|&i| squared_distance(ds.point(i), &mu)).sum::<f64>() / ms.len() as f64;
        if var == 0.0 {
            continue;
        }
        let moment: f64 = ms
            .iter()
            .map(|&i| squared_distance(ds.point(i), &mu).powf(alpha / 2.0))
            .sum::<f64>()
            / ms.len() as f64;
        let v = 2.0f64.powf(alpha + 1.0) * moment / var.powf(alpha / 2.0);
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    Ok(best)
}

/// Weight-class histogram `i -> #{C : |C| in [2^i, 2^(i+1))}` and the number
/// of nonempty classes.
pub fn weight_classes(ds: &Dataset) -> Result<(BTreeMap<u32, usize>, usize), DiagnosticsError> {
    let members = ds.cluster_members()?;
    let mut hist = BTreeMap::new();
    for ms in &members {
        let class = (ms.len() as u64).ilog2();
        *hist.entry(class).or_insert(0usize) += 1;
    }
    let ell = hist.len();
    Ok((hist, ell))
}

/// Rate factor `f(alpha) = alpha^2 / (alpha/2 - 1)^(2/alpha + 1)`.
pub fn rate_factor(alpha: f64) -> f64 {
    alpha * alpha / (alpha / 2.0 - 1.0).powf(2.0 / alpha + 1.0)
}

/// Per-step potential growth factor `h(alpha) = (alpha/2 - 1)^(1 - 2/alpha) / (alpha/2)`.
pub fn h_alpha(alpha: f64) -> f64 {
    (alpha / 2.0 - 1.0).powf(1.0 - 2.0 / alpha) / (alpha / 2.0)
}

/// Constant of the aggregated potential bound:
/// `16 (alpha/2 - 1)^(1 - 2/alpha) / (alpha/2 - 1) * (2 - 2^(2/alpha - 1)) / (1 - 2^(2/alpha - 1))`.
pub fn potential_global_constant(alpha: f64) -> f64 {
    let base = 16.0 * (alpha / 2.0 - 1.0).powf(1.0 - 2.0 / alpha) / (alpha / 2.0 - 1.0);
    let q = 2.0f64.powf(2.0 / alpha - 1.0);
    base * (2.0 - q) / (1.0 - q)
}

/// Expected squared-cost inflation of a cluster hit under powered sampling:
/// `4e + (alpha + 1)^2 * g^(2/alpha)`.
pub fn hit_cost_factor(alpha: f64, g: f64) -> f64 {
    4.0 * std::f64::consts::E + (alpha + 1.0) * (alpha + 1.0) * g.powf(2.0 / alpha)
}

fn check_bound_inputs(alpha: f64, g: f64, sigma_ratio: f64, k: usize) -> Result<(), DiagnosticsError> {
    if !(alpha > 2.0) {
        return Err(DiagnosticsError::AlphaTooSmall { alpha });
    }
    if !(sigma_ratio >= 1.0) {
        return Err(DiagnosticsError::RatioBelowOne { ratio: sigma_ratio });
    }
    if g < 0.0 || k == 0 {
        return Err(DiagnosticsError::NegativeInput);
    }
    Ok(())
}

/// Expected-cost factor without the absolute constant:
/// `f(alpha) * g^(2/alpha) * sigma_ratio^(2 - 4/alpha) * min(ell, log2 k)^(2/alpha)`.
pub fn expected_cost_factor(
    alpha: f64,
    g: f64,
    sigma_ratio: f64,
    ell: usize,
    k: usize,
) -> Result<f64, DiagnosticsError> {
    check_bound_inputs(alpha, g, sigma_ratio, k)?;
    let classes = (ell as f64).min((k as f64).log2());
    Ok(rate_factor(alpha)
        * g.powf(2.0 / alpha)
        * sigma_ratio.powf(2.0 - 4.0 / alpha)
        * classes.powf(2.0 / alpha))
}

/// Fully explicit end-to-end expected-cost factor: undiscovered clusters are
/// charged twice the aggregated potential bound and hit clusters the
/// powered-sampling inflation factor.
pub fn explicit_bound(
    alpha: f64,
    g: f64,
    sigma_ratio: f64,
    ell: usize,
    k: usize,
) -> Result<f64, DiagnosticsError> {
    check_bound_inputs(alpha, g, sigma_ratio, k)?;
    let classes = (ell as f64).min((k as f64).log2());
    let undiscovered = 2.0
        * potential_global_constant(alpha)
        * g.powf(2.0 / alpha)
        * sigma_ratio.powf(2.0 - 4.0 / alpha)
        * classes.powf(2.0 / alpha);
    Ok(undiscovered + hit_cost_factor(alpha, g))
}

/// `cost2 / opt_cost` where `opt_cost` is the reference clustering cost.
pub fn cost_ratio(ds: &Dataset, cost2: f64) -> Result<f64, DiagnosticsError> {
    let stats = sigma_stats(ds)?;
    if stats.opt_cost == 0.0 {
        return Err(DiagnosticsError::DegenerateReference);
    }
    Ok(cost2 / stats.opt_cost)
}

/// Squared cost of a set of free centers (row-major `k x d`).
pub fn cost2_of_centers(ds: &Dataset, centers: &[Vec<f64>]) -> f64 {
    let mut cost = 0.0;
    for i in 0..ds.n() {
        let mut best = f64::INFINITY;
        for c in centers {
            best = best.min(squared_distance(ds.point(i), c));
        }
        cost += best;
    }
    cost
}

/// Per-cluster check `cost_alpha(C, mu_C) <= g_C |C| sigma_C^alpha`,
/// returned as `(lhs, rhs)` pairs; `None` for excluded clusters.
pub fn cluster_alpha_vs_deviation(
    ds: &Dataset,
    alpha: f64,
) -> Result<Vec<Option<(f64, f64)>>, DiagnosticsError> {
    let report = g_alpha_with(ds, alpha, GAlphaMode::Exact)?;
    let members = ds.cluster_members()?;
    let mut out = Vec::with_capacity(members.len());
    for (ms, g) in members.iter().zip(&report.per_cluster) {
        match g {
            None => out.push(None),
            Some(g) => {
                let mu = ds.centroid(ms);
                let lhs: f64 = ms
                    .iter()
                    .map(|&i| squared_distance(ds.point(i), &mu).powf(alpha / 2.0))
                    .sum();
                let var: f64 = ms.iter().map(|&i| squared_distance(ds.point(i), &mu)).sum::<f64>()
                    / ms.len() as f64;
                let rhs = g * ms.len() as f64 * var.powf(alpha / 2.0);
                out.push(Some((lhs, rhs)));
            }
        }
    }
    Ok(out)
}

/// Full parameter report of a labeled dataset at a given alpha.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamReport {
    pub alpha: f64,
    pub k: usize,
    pub n: usize,
    pub per_cluster_sigma: Vec<f64>,
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// Absent when `sigma_min = 0` (see `sigma_ratio_infinite`).
    pub sigma_ratio: Option<f64>,
    pub sigma_ratio_infinite: bool,
    pub opt_cost: f64,
    pub g_alpha: Option<f64>,
    pub per_cluster_g: Vec<Option<f64>>,
    pub g_subsampled: Vec<bool>,
    /// Standardized-moment convenience bound; not used in bound evaluation.
    pub g_hat_alpha: Option<f64>,
    pub weight_histogram: BTreeMap<u32, usize>,
    pub ell: usize,
    /// Rate-only expected-cost factor; absent unless `alpha > 2` and the
    /// measured inputs are usable.
    pub bound_value: Option<f64>,
    /// Fully explicit expected-cost factor on the same inputs.
    pub bound_explicit: Option<f64>,
}

/// Measures every parameter of the dataset at `alpha`.
pub fn param_report(ds: &Dataset, alpha: f64) -> Result<ParamReport, DiagnosticsError> {
    param_report_with(ds, alpha, GAlphaMode::default())
}

pub fn param_report_with(
    ds: &Dataset,
    alpha: f64,
    mode: GAlphaMode,
) -> Result<ParamReport, DiagnosticsError> {
    let stats = sigma_stats(ds)?;
    let g = g_alpha_with(ds, alpha, mode)?;
    let ghat = g_hat_alpha(ds, alpha)?;
    let (weight_histogram, ell) = weight_classes(ds)?;
    let ratio = stats.ratio();
    let k = ds.k().unwrap_or(0);
    let (bound_value, bound_explicit) = match (alpha > 2.0, g.value, ratio) {
        (true, Some(gv), Some(r)) => (
            Some(expected_cost_factor(alpha, gv, r.max(1.0), ell, k)?),
            Some(explicit_bound(alpha, gv, r.max(1.0), ell, k)?),
        ),
        _ => (None, None),
    };
    Ok(ParamReport {
        alpha,
        k,
        n: ds.n(),
        per_cluster_sigma: stats.per_cluster.clone(),
        sigma_max: stats.sigma_max,
        sigma_min: stats.sigma_min,
        sigma_ratio: ratio,
        sigma_ratio_infinite: ratio.is_none(),
        opt_cost: stats.opt_cost,
        g_alpha: g.value,
        per_cluster_g: g.per_cluster,
        g_subsampled: g.subsampled,
        g_hat_alpha: ghat,
        weight_histogram,
        ell,
        bound_value,
        bound_explicit,
    })
}
