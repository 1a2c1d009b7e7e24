//! Seeding procedures: power-of-distance (`D^alpha`) sampling, the greedy
//! multi-candidate variant, and uniform selection.
//!
//! Sampling weights are always computed after rescaling squared distances by
//! their maximum, so the largest weight is exactly 1. This is algebraically
//! identical to the unscaled distribution, cannot overflow for any `alpha`,
//! and makes the probability vector invariant under power-of-two coordinate
//! scaling bit for bit.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{squared_distance, CenterSet, Dataset, GeometryError};
use crate::rng::{stream_rng, streams};

#[derive(Debug, Error)]
pub enum SeedingError {
    #[error("requested {k} centers from {n} points")]
    TooManyCenters { k: usize, n: usize },

    #[error("alpha must be >= 0")]
    NegativeAlpha,

    #[error("greedy candidate count must be >= 1")]
    NoCandidates,

    #[error("sampling requires at least one existing center")]
    NoCenters,

    #[error("every point is already a center")]
    Exhausted,

    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Seeding method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dalpha,
    Greedy,
    Uniform,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Dalpha => write!(f, "dalpha"),
            Method::Greedy => write!(f, "greedy"),
            Method::Uniform => write!(f, "uniform"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dalpha" => Ok(Method::Dalpha),
            "greedy" => Ok(Method::Greedy),
            "uniform" => Ok(Method::Uniform),
            other => Err(format!("unknown method `{other}` (expected dalpha, greedy, or uniform)")),
        }
    }
}

/// Serde helpers for alpha values: finite numbers round-trip as numbers,
/// infinity round-trips as the string `"inf"`.
pub mod alpha_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => super::parse_alpha(&s).map_err(de::Error::custom),
        }
    }
}

/// Parses an alpha value, accepting `inf` for the farthest-point mode.
pub fn parse_alpha(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "Inf" | "INF" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|e| format!("invalid alpha `{other}`: {e}")),
    }
}

/// Configuration of one seeding run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedingConfig {
    /// Sampling exponent; `>= 0`, infinity selects farthest-point mode.
    #[serde(with = "alpha_serde")]
    pub alpha: f64,
    /// Number of centers to select.
    pub k: usize,
    pub method: Method,
    /// Greedy only; defaults to `ceil(2 + ln k)`.
    #[serde(default)]
    pub m_candidates: Option<usize>,
    pub rng_seed: u64,
}

impl SeedingConfig {
    pub fn new(method: Method, alpha: f64, k: usize, rng_seed: u64) -> Self {
        Self { alpha, k, method, m_candidates: None, rng_seed }
    }

    /// Greedy candidate count: the configured value or `ceil(2 + ln k)`.
    pub fn candidates(&self) -> usize {
        self.m_candidates
            .unwrap_or_else(|| (2.0 + (self.k as f64).ln()).ceil() as usize)
    }
}

/// One selection step of a seeding run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Chosen point index.
    pub chosen: usize,
    /// Reference cluster of the chosen point, when labels exist.
    pub cluster: Option<usize>,
    /// Whether that cluster had no center before this step.
    pub new_cluster: Option<bool>,
}

/// Record of a complete seeding run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedingTrace {
    #[serde(with = "alpha_serde")]
    pub alpha: f64,
    pub method: Method,
    pub steps: Vec<TraceStep>,
}

impl SeedingTrace {
    fn new(alpha: f64, method: Method) -> Self {
        Self { alpha, method, steps: Vec::new() }
    }

    fn record(&mut self, ds: &Dataset, hit: &mut Vec<bool>, chosen: usize) {
        let step = match ds.labels() {
            Some(labels) => {
                let c = labels[chosen];
                let newly = !hit[c];
                hit[c] = true;
                TraceStep { chosen, cluster: Some(c), new_cluster: Some(newly) }
            }
            None => TraceStep { chosen, cluster: None, new_cluster: None },
        };
        self.steps.push(step);
    }
}

/// Unnormalized sampling weights `(nearest_sq / max nearest_sq)^(alpha/2)`.
///
/// Points at distance zero get weight zero for every alpha, so they are never
/// selected while another point is available.
pub fn dalpha_weights(cs: &CenterSet, alpha: f64) -> Vec<f64> {
    let nearest = cs.nearest_sq();
    let m2 = nearest.iter().cloned().fold(0.0f64, f64::max);
    if m2 == 0.0 {
        return vec![0.0; nearest.len()];
    }
    let half = alpha / 2.0;
    nearest
        .iter()
        .map(|&d2| if d2 == 0.0 { 0.0 } else { (d2 / m2).powf(half) })
        .collect()
}

/// The normalized selection probability of every point under the current
/// center set. Requires at least one center and finite alpha.
pub fn dalpha_probabilities(cs: &CenterSet, alpha: f64) -> Result<Vec<f64>, SeedingError> {
    if cs.is_empty() {
        return Err(SeedingError::NoCenters);
    }
    let mut w = dalpha_weights(cs, alpha);
    let sum: f64 = w.iter().sum();
    if sum == 0.0 {
        return Err(SeedingError::Exhausted);
    }
    for v in &mut w {
        *v /= sum;
    }
    Ok(w)
}

fn weighted_draw(weights: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let sum: f64 = weights.iter().sum();
    if sum == 0.0 {
        return None;
    }
    let target = rng.random::<f64>() * sum;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i);
            if acc > target {
                return Some(i);
            }
        }
    }
    // Rounding can leave acc marginally below target; fall back to the last
    // positive-weight index.
    last
}

/// Samples the next center with probability proportional to the
/// `alpha`-powered nearest-center distance.
///
/// Degenerate cases: if every remaining point is at distance zero, a
/// non-center is chosen uniformly; if every point is a center the run is
/// exhausted. `alpha = inf` picks the farthest point (ties toward the lowest
/// index) without consuming randomness.
pub fn dalpha_step(
    ds: &Dataset,
    cs: &CenterSet,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<usize, SeedingError> {
    if cs.is_empty() {
        return Err(SeedingError::NoCenters);
    }
    if alpha.is_infinite() {
        let nearest = cs.nearest_sq();
        let mut best = None;
        let mut best_d2 = -1.0;
        for (i, &d2) in nearest.iter().enumerate() {
            if d2 > best_d2 {
                best_d2 = d2;
                best = Some(i);
            }
        }
        let i = best.expect("nonempty dataset");
        if best_d2 == 0.0 {
            return pick_uniform_non_center(ds, cs, rng);
        }
        return Ok(i);
    }
    if !(alpha >= 0.0) {
        return Err(SeedingError::NegativeAlpha);
    }
    let weights = dalpha_weights(cs, alpha);
    match weighted_draw(&weights, rng) {
        Some(i) => Ok(i),
        None => pick_uniform_non_center(ds, cs, rng),
    }
}

fn pick_uniform_non_center(
    ds: &Dataset,
    cs: &CenterSet,
    rng: &mut ChaCha8Rng,
) -> Result<usize, SeedingError> {
    let non_centers: Vec<usize> = (0..ds.n()).filter(|i| !cs.centers().contains(i)).collect();
    if non_centers.is_empty() {
        return Err(SeedingError::Exhausted);
    }
    Ok(non_centers[rng.random_range(0..non_centers.len())])
}

/// `D^alpha` seeding: one uniform center, then `k - 1` powered-distance draws.
pub fn seed(ds: &Dataset, config: &SeedingConfig) -> Result<(CenterSet, SeedingTrace), SeedingError> {
    let k = check_k(ds, config.k)?;
    let mut rng = stream_rng(config.rng_seed, streams::SEEDING);
    let mut cs = CenterSet::new(ds.n());
    let mut trace = SeedingTrace::new(config.alpha, Method::Dalpha);
    let mut hit = vec![false; ds.k().unwrap_or(0)];

    let first = rng.random_range(0..ds.n());
    cs.add_center(ds, first)?;
    trace.record(ds, &mut hit, first);

    for _ in 1..k {
        let z = dalpha_step(ds, &cs, config.alpha, &mut rng)?;
        cs.add_center(ds, z)?;
        trace.record(ds, &mut hit, z);
    }
    Ok((cs, trace))
}

/// Greedy variant: at each step, draw `m` candidates from the squared-distance
/// distribution (with replacement) and keep the one whose insertion lowers the
/// k-means cost the most, ties toward the lowest point index.
pub fn greedy_seed(
    ds: &Dataset,
    config: &SeedingConfig,
) -> Result<(CenterSet, SeedingTrace), SeedingError> {
    let k = check_k(ds, config.k)?;
    let m = config.candidates();
    if m == 0 {
        return Err(SeedingError::NoCandidates);
    }
    let mut rng = stream_rng(config.rng_seed, streams::SEEDING);
    let mut cs = CenterSet::new(ds.n());
    let mut trace = SeedingTrace::new(config.alpha, Method::Greedy);
    let mut hit = vec![false; ds.k().unwrap_or(0)];

    let first = rng.random_range(0..ds.n());
    cs.add_center(ds, first)?;
    trace.record(ds, &mut hit, first);

    for _ in 1..k {
        let weights = dalpha_weights(&cs, 2.0);
        let mut candidates = Vec::with_capacity(m);
        for _ in 0..m {
            match weighted_draw(&weights, &mut rng) {
                Some(i) => candidates.push(i),
                None => candidates.push(pick_uniform_non_center(ds, &cs, &mut rng)?),
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut best = candidates[0];
        let mut best_cost = f64::INFINITY;
        for &cand in &candidates {
            let cost = cost_after_adding(ds, &cs, cand);
            if cost < best_cost {
                best_cost = cost;
                best = cand;
            }
        }
        cs.add_center(ds, best)?;
        trace.record(ds, &mut hit, best);
    }
    Ok((cs, trace))
}

/// k-means cost after tentatively adding `cand` to the center set.
pub fn cost_after_adding(ds: &Dataset, cs: &CenterSet, cand: usize) -> f64 {
    let cp = ds.point(cand);
    let mut cost = 0.0;
    for (i, &d2) in cs.nearest_sq().iter().enumerate() {
        cost += d2.min(squared_distance(ds.point(i), cp));
    }
    cost
}

/// Uniform seeding: `k` distinct indices without replacement.
pub fn uniform_seed(
    ds: &Dataset,
    config: &SeedingConfig,
) -> Result<(CenterSet, SeedingTrace), SeedingError> {
    let k = check_k(ds, config.k)?;
    let mut rng = stream_rng(config.rng_seed, streams::SEEDING);
    let mut cs = CenterSet::new(ds.n());
    let mut trace = SeedingTrace::new(config.alpha, Method::Uniform);
    let mut hit = vec![false; ds.k().unwrap_or(0)];
    let picks = rand::seq::index::sample(&mut rng, ds.n(), k);
    for z in picks {
        cs.add_center(ds, z)?;
        trace.record(ds, &mut hit, z);
    }
    Ok((cs, trace))
}

/// Runs the configured method.
pub fn run(ds: &Dataset, config: &SeedingConfig) -> Result<(CenterSet, SeedingTrace), SeedingError> {
    match config.method {
        Method::Dalpha => seed(ds, config),
        Method::Greedy => greedy_seed(ds, config),
        Method::Uniform => uniform_seed(ds, config),
    }
}

fn check_k(ds: &Dataset, k: usize) -> Result<usize, SeedingError> {
    if k == 0 || k > ds.n() {
        return Err(SeedingError::TooManyCenters { k, n: ds.n() });
    }
    Ok(k)
}
