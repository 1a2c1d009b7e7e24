//! Core numeric kernels: point storage, distances, powered cost functions,
//! and incremental nearest-center maintenance.
//!
//! All distances are Euclidean. Powered costs are always computed from the
//! squared distance as `d2^(p/2)`, never by re-rooting, so the `p = 2` and
//! `p = alpha` views of the same center set cannot drift apart.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dataset must contain at least one point")]
    EmptyDataset,

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },

    #[error("labels length {labels} does not match point count {points}")]
    LabelLengthMismatch { labels: usize, points: usize },

    #[error("cluster id {id} has no members (ids must cover [0, k))")]
    MissingCluster { id: usize },

    #[error("point {index} is already a center")]
    DuplicateCenter { index: usize },

    #[error("point index {index} out of range for {n} points")]
    PointOutOfRange { index: usize, n: usize },

    #[error("operation requires at least one center")]
    NoCenters,

    #[error("cost power must be >= 2, got {power}")]
    InvalidPower { power: f64 },

    #[error("powered cost exceeds the floating-point range (power {power})")]
    CostOverflow { power: f64 },

    #[error("operation requires reference labels")]
    MissingLabels,
}

/// A set of `n` points in `d` dimensions, optionally carrying a reference
/// clustering as per-point labels in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
    labels: Option<Vec<usize>>,
    k: Option<usize>,
}

impl Dataset {
    /// Builds an unlabeled dataset from row-major coordinates.
    pub fn new(points: Vec<f64>, d: usize) -> Result<Self, GeometryError> {
        if d == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if points.is_empty() || points.len() % d != 0 {
            return Err(GeometryError::EmptyDataset);
        }
        let n = points.len() / d;
        for i in 0..n {
            if points[i * d..(i + 1) * d].iter().any(|c| !c.is_finite()) {
                return Err(GeometryError::NonFiniteCoordinate { index: i });
            }
        }
        Ok(Self { points, n, d, labels: None, k: None })
    }

    /// Builds a labeled dataset. Every cluster id in `[0, max_label]` must
    /// occur at least once.
    pub fn with_labels(points: Vec<f64>, d: usize, labels: Vec<usize>) -> Result<Self, GeometryError> {
        let mut ds = Self::new(points, d)?;
        if labels.len() != ds.n {
            return Err(GeometryError::LabelLengthMismatch { labels: labels.len(), points: ds.n });
        }
        let k = labels.iter().max().copied().unwrap_or(0) + 1;
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(id) = seen.iter().position(|s| !s) {
            return Err(GeometryError::MissingCluster { id });
        }
        ds.labels = Some(labels);
        ds.k = Some(k);
        Ok(ds)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    /// Row-major coordinate storage.
    pub fn coords(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of reference clusters, present iff labels are present.
    pub fn k(&self) -> Option<usize> {
        self.k
    }

    /// Member indices per reference cluster.
    pub fn cluster_members(&self) -> Result<Vec<Vec<usize>>, GeometryError> {
        let labels = self.labels().ok_or(GeometryError::MissingLabels)?;
        let mut members = vec![Vec::new(); self.k.unwrap_or(0)];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        Ok(members)
    }

    /// Centroid of the given point indices.
    pub fn centroid(&self, members: &[usize]) -> Vec<f64> {
        let mut mu = vec![0.0; self.d];
        for &i in members {
            for (m, c) in mu.iter_mut().zip(self.point(i)) {
                *m += c;
            }
        }
        let inv = 1.0 / members.len() as f64;
        for m in &mut mu {
            *m *= inv;
        }
        mu
    }
}

/// Squared Euclidean distance between two points of equal dimension.
///
/// Panics on dimension mismatch; dimensions are validated once at dataset
/// construction, so a mismatch here is a caller bug.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "squared_distance: dimension mismatch");
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s
}

/// Sum of `values[i]^(power/2)` with a guard for large powers.
///
/// When direct term-wise exponentiation could overflow, the sum is computed
/// after rescaling by the largest value; if even the rescaled total exceeds
/// the floating-point range the call fails rather than returning infinity.
pub fn power_sum(values: &[f64], power: f64) -> Result<f64, GeometryError> {
    let half = power / 2.0;
    let m2 = values.iter().cloned().fold(0.0f64, f64::max);
    if m2 == 0.0 {
        return Ok(0.0);
    }
    if half * m2.log2() < 950.0 {
        return Ok(values.iter().map(|&v| v.powf(half)).sum());
    }
    let scaled: f64 = values.iter().map(|&v| (v / m2).powf(half)).sum();
    let ln_total = half * m2.ln() + scaled.ln();
    if ln_total >= f64::MAX.ln() {
        return Err(GeometryError::CostOverflow { power });
    }
    Ok(m2.powf(half) * scaled)
}

/// `(sum of values[i]^(alpha/2))^(2/alpha)`, computed in rescaled form so it
/// stays finite whenever the inputs do (the result is at most `max * n^(2/alpha)`).
pub fn power_sum_root(values: &[f64], alpha: f64) -> f64 {
    let half = alpha / 2.0;
    let m2 = values.iter().cloned().fold(0.0f64, f64::max);
    if m2 == 0.0 {
        return 0.0;
    }
    let scaled: f64 = values.iter().map(|&v| (v / m2).powf(half)).sum();
    m2 * scaled.powf(1.0 / half)
}

/// Per-reference-cluster costs of a center set at powers 2 and `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCosts {
    pub alpha: f64,
    /// `cost2[c]` = sum of squared nearest-center distances over cluster `c`.
    pub cost2: Vec<f64>,
    /// `cost_alpha[c]` = sum of `alpha`-powered nearest-center distances.
    pub cost_alpha: Vec<f64>,
}

impl ClusterCosts {
    pub fn total_cost2(&self) -> f64 {
        self.cost2.iter().sum()
    }
}

/// An ordered set of centers (dataset point indices) together with each
/// point's squared distance to, and index of, its nearest center.
///
/// Nearest-center ties are broken toward the earliest-added center, so two
/// runs over the same inputs produce identical state.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    centers: Vec<usize>,
    nearest_sq: Vec<f64>,
    nearest_center: Vec<usize>,
}

impl CenterSet {
    /// An empty center set over `n` points.
    pub fn new(n: usize) -> Self {
        Self {
            centers: Vec::new(),
            nearest_sq: vec![f64::INFINITY; n],
            nearest_center: vec![usize::MAX; n],
        }
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Squared distance from each point to its nearest center.
    pub fn nearest_sq(&self) -> &[f64] {
        &self.nearest_sq
    }

    /// For each point, the position (insertion order) of its nearest center.
    pub fn nearest_center(&self) -> &[usize] {
        &self.nearest_center
    }

    /// Appends center `z` and refreshes nearest distances in `O(n d)`.
    ///
    /// A point switches to the new center only on strict improvement, which
    /// keeps ties resolved toward the earliest center.
    pub fn add_center(&mut self, ds: &Dataset, z: usize) -> Result<(), GeometryError> {
        if z >= ds.n() {
            return Err(GeometryError::PointOutOfRange { index: z, n: ds.n() });
        }
        if self.centers.contains(&z) {
            return Err(GeometryError::DuplicateCenter { index: z });
        }
        let pos = self.centers.len();
        self.centers.push(z);
        let zp = ds.point(z);
        for i in 0..ds.n() {
            let d2 = squared_distance(ds.point(i), zp);
            if d2 < self.nearest_sq[i] {
                self.nearest_sq[i] = d2;
                self.nearest_center[i] = pos;
            }
        }
        Ok(())
    }

    /// Total cost `sum_x nearest_sq[x]^(power/2)`; `power = 2` is the
    /// k-means objective.
    pub fn total_cost(&self, power: f64) -> Result<f64, GeometryError> {
        if self.centers.is_empty() {
            return Err(GeometryError::NoCenters);
        }
        if !(power >= 2.0) {
            return Err(GeometryError::InvalidPower { power });
        }
        power_sum(&self.nearest_sq, power)
    }

    /// Per-reference-cluster costs at powers 2 and `alpha`.
    pub fn cluster_costs(&self, ds: &Dataset, alpha: f64) -> Result<ClusterCosts, GeometryError> {
        if self.centers.is_empty() {
            return Err(GeometryError::NoCenters);
        }
        let labels = ds.labels().ok_or(GeometryError::MissingLabels)?;
        let k = ds.k().unwrap_or(0);
        let mut per_cluster: Vec<Vec<f64>> = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            per_cluster[l].push(self.nearest_sq[i]);
        }
        let mut cost2 = Vec::with_capacity(k);
        let mut cost_alpha = Vec::with_capacity(k);
        for vals in &per_cluster {
            cost2.push(power_sum(vals, 2.0)?);
            cost_alpha.push(power_sum(vals, alpha)?);
        }
        Ok(ClusterCosts { alpha, cost2, cost_alpha })
    }

    /// Per-reference-cluster `(cost_alpha)^(2/alpha)` in overflow-free form.
    pub fn cluster_alpha_cost_roots(&self, ds: &Dataset, alpha: f64) -> Result<Vec<f64>, GeometryError> {
        if self.centers.is_empty() {
            return Err(GeometryError::NoCenters);
        }
        let labels = ds.labels().ok_or(GeometryError::MissingLabels)?;
        let k = ds.k().unwrap_or(0);
        let mut per_cluster: Vec<Vec<f64>> = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            per_cluster[l].push(self.nearest_sq[i]);
        }
        Ok(per_cluster.iter().map(|vals| power_sum_root(vals, alpha)).collect())
    }
}
