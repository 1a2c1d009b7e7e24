//! Synthetic instance generators and CSV dataset I/O.
//!
//! Mixture families draw i.i.d. labeled samples; the three adversarial
//! families build labeled point sets whose cluster deviations, concentration
//! moments, or greedy behavior are controlled analytically. All generators
//! are pure functions of `(spec, seed)`: component choices come from one RNG
//! stream and each component's coordinates from its own child stream, so
//! output does not depend on evaluation order.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Dataset, GeometryError};
use crate::rng::{stream_rng, streams};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("component count must be >= 1")]
    NoComponents,

    #[error("sample count must be >= 1")]
    NoSamples,

    #[error("component {index}: weight must be > 0")]
    NonPositiveWeight { index: usize },

    #[error("component {index}: covariance is not symmetric positive definite")]
    NotSpd { index: usize },

    #[error("component {index}: scale must be > 0")]
    NonPositiveScale { index: usize },

    #[error("component {index}: student-t degrees of freedom must be > 1")]
    InvalidDof { index: usize },

    #[error("component {index}: mean dimension {got} does not match {expected}")]
    MeanDimensionMismatch { index: usize, got: usize, expected: usize },

    #[error("component {index} generated no samples; increase n or its weight")]
    EmptyComponent { index: usize },

    #[error("simplex needs {needed} dimensions from offset {offset}, ambient is {ambient}")]
    InsufficientDimension { needed: usize, offset: usize, ambient: usize },

    #[error("simplex needs at least 2 points")]
    DegenerateSimplex,

    #[error("{family}: {message}")]
    InvalidParameter { family: &'static str, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Scalar or full covariance of one mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariance {
    /// `sigma2 * I`.
    Spherical(f64),
    /// Full row-major d x d SPD matrix.
    Full(Vec<Vec<f64>>),
}

/// One mixture component: location, spread, mixing weight, and (student-t
/// only) degrees of freedom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub mean: Vec<f64>,
    pub covariance: Covariance,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl MixtureComponent {
    pub fn spherical(mean: Vec<f64>, sigma2: f64, weight: f64) -> Self {
        Self { mean, covariance: Covariance::Spherical(sigma2), weight, nu: None }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = Some(nu);
        self
    }
}

/// Instance family plus its parameters and generator seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    GaussianMixture {
        components: Vec<MixtureComponent>,
        n: usize,
        rng_seed: u64,
    },
    StudentTMixture {
        components: Vec<MixtureComponent>,
        n: usize,
        rng_seed: u64,
    },
    SimplexLb {
        k: usize,
        n_per_cluster: usize,
        alpha: f64,
        #[serde(default)]
        rng_seed: u64,
    },
    GalphaLb {
        n: usize,
        alpha: f64,
    },
    GreedyLb {
        k: usize,
        m_samples: usize,
        n_per_cluster: usize,
        rng_seed: u64,
    },
    CustomCsv {
        path: String,
    },
}

impl InstanceSpec {
    /// Generates (or loads) the dataset described by this spec.
    pub fn generate(&self) -> Result<Dataset, InstanceError> {
        match self {
            InstanceSpec::GaussianMixture { components, n, rng_seed } => {
                gen_gaussian_mixture(components, *n, *rng_seed)
            }
            InstanceSpec::StudentTMixture { components, n, rng_seed } => {
                gen_student_t_mixture(components, *n, *rng_seed)
            }
            InstanceSpec::SimplexLb { k, n_per_cluster, alpha, rng_seed } => {
                gen_simplex_lb(*k, *n_per_cluster, *alpha, *rng_seed)
            }
            InstanceSpec::GalphaLb { n, alpha } => gen_galpha_lb(*n, *alpha),
            InstanceSpec::GreedyLb { k, m_samples, n_per_cluster, rng_seed } => {
                gen_greedy_lb(*k, *m_samples, *n_per_cluster, *rng_seed)
            }
            InstanceSpec::CustomCsv { path } => load_csv(path),
        }
    }

    /// Same family with the generator seed replaced (used for per-trial
    /// resampling). CSV-backed and deterministic families are unchanged.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            InstanceSpec::GaussianMixture { rng_seed, .. }
            | InstanceSpec::StudentTMixture { rng_seed, .. }
            | InstanceSpec::SimplexLb { rng_seed, .. }
            | InstanceSpec::GreedyLb { rng_seed, .. } => *rng_seed = seed,
            InstanceSpec::GalphaLb { .. } | InstanceSpec::CustomCsv { .. } => {}
        }
        spec
    }

    /// Whether regeneration with a fresh seed produces a different dataset.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            InstanceSpec::GaussianMixture { .. }
                | InstanceSpec::StudentTMixture { .. }
                | InstanceSpec::GreedyLb { .. }
        )
    }
}

/// Lower-triangular Cholesky factor of a row-major SPD matrix.
fn cholesky(matrix: &[Vec<f64>], d: usize) -> Option<Vec<Vec<f64>>> {
    if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
        return None;
    }
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            if (matrix[i][j] - matrix[j][i]).abs() > 1e-9 * matrix[i][j].abs().max(1.0) {
                return None;
            }
            let mut s = matrix[i][j];
            for t in 0..j {
                s -= l[i][t] * l[j][t];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

enum Scale {
    Spherical(f64),
    Chol(Vec<Vec<f64>>),
}

impl Scale {
    fn apply(&self, z: &[f64], out: &mut [f64]) {
        match self {
            Scale::Spherical(sigma) => {
                for (o, &v) in out.iter_mut().zip(z) {
                    *o = sigma * v;
                }
            }
            Scale::Chol(l) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for (t, &v) in z.iter().enumerate().take(i + 1) {
                        s += l[i][t] * v;
                    }
                    *o = s;
                }
            }
        }
    }
}

fn validate_components(
    components: &[MixtureComponent],
    student_t: bool,
) -> Result<(usize, Vec<Scale>, Vec<f64>), InstanceError> {
    if components.is_empty() {
        return Err(InstanceError::NoComponents);
    }
    let d = components[0].mean.len();
    let mut scales = Vec::with_capacity(components.len());
    let mut weights = Vec::with_capacity(components.len());
    for (index, c) in components.iter().enumerate() {
        if c.mean.len() != d {
            return Err(InstanceError::MeanDimensionMismatch { index, got: c.mean.len(), expected: d });
        }
        if !(c.weight > 0.0) {
            return Err(InstanceError::NonPositiveWeight { index });
        }
        if student_t && !c.nu.map(|nu| nu > 1.0).unwrap_or(false) {
            return Err(InstanceError::InvalidDof { index });
        }
        let scale = match &c.covariance {
            Covariance::Spherical(s2) => {
                if !(*s2 > 0.0) {
                    return Err(InstanceError::NonPositiveScale { index });
                }
                Scale::Spherical(s2.sqrt())
            }
            Covariance::Full(m) => {
                Scale::Chol(cholesky(m, d).ok_or(InstanceError::NotSpd { index })?)
            }
        };
        scales.push(scale);
        weights.push(c.weight);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok((d, scales, weights))
}

fn gen_mixture(
    components: &[MixtureComponent],
    n: usize,
    seed: u64,
    student_t: bool,
) -> Result<Dataset, InstanceError> {
    if n == 0 {
        return Err(InstanceError::NoSamples);
    }
    let (d, scales, weights) = validate_components(components, student_t)?;
    let mut choice_rng = stream_rng(seed, streams::COMPONENT_CHOICE);
    let labels: Vec<usize> = (0..n)
        .map(|_| {
            let u: f64 = choice_rng.random();
            let mut acc = 0.0;
            let mut pick = components.len() - 1;
            for (c, &w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = c;
                    break;
                }
            }
            pick
        })
        .collect();

    let mut coords = vec![0.0; n * d];
    let mut z = vec![0.0; d];
    let mut offset = vec![0.0; d];
    for (c, comp) in components.iter().enumerate() {
        let mut rng = stream_rng(seed, streams::COMPONENT_BASE + c as u64);
        let chi = if student_t {
            Some(ChiSquared::new(comp.nu.unwrap()).expect("validated dof"))
        } else {
            None
        };
        let mut seen = false;
        for (i, &l) in labels.iter().enumerate() {
            if l != c {
                continue;
            }
            seen = true;
            for v in z.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            scales[c].apply(&z, &mut offset);
            let denom = match &chi {
                Some(chi) => (chi.sample(&mut rng) / comp.nu.unwrap()).sqrt(),
                None => 1.0,
            };
            let row = &mut coords[i * d..(i + 1) * d];
            for (j, r) in row.iter_mut().enumerate() {
                *r = comp.mean[j] + offset[j] / denom;
            }
        }
        if !seen {
            return Err(InstanceError::EmptyComponent { index: c });
        }
    }
    Ok(Dataset::with_labels(coords, d, labels)?)
}

/// Labeled i.i.d. samples from a Gaussian mixture.
pub fn gen_gaussian_mixture(
    components: &[MixtureComponent],
    n: usize,
    seed: u64,
) -> Result<Dataset, InstanceError> {
    gen_mixture(components, n, seed, false)
}

/// Labeled i.i.d. samples from a student-t mixture: `x = mu + Lz / sqrt(w/nu)`
/// with `z` standard normal and `w` chi-square with `nu` degrees of freedom.
pub fn gen_student_t_mixture(
    components: &[MixtureComponent],
    n: usize,
    seed: u64,
) -> Result<Dataset, InstanceError> {
    gen_mixture(components, n, seed, true)
}

/// Vertices of a regular simplex: `n_points` pairwise-equidistant points at
/// distance `circumradius` from `center`, occupying coordinates
/// `[dim_offset, dim_offset + n_points - 1)`.
///
/// The side length is `circumradius * sqrt(2 m / (m - 1))` for `m` points.
pub fn gen_regular_simplex(
    n_points: usize,
    circumradius: f64,
    center: &[f64],
    dim_offset: usize,
) -> Result<Vec<Vec<f64>>, InstanceError> {
    if n_points < 2 {
        return Err(InstanceError::DegenerateSimplex);
    }
    let needed = n_points - 1;
    if center.len() < dim_offset + needed {
        return Err(InstanceError::InsufficientDimension {
            needed,
            offset: dim_offset,
            ambient: center.len(),
        });
    }
    let m = n_points as f64;
    let r = circumradius;
    // Closed-form lower-triangular embedding: vertex i has the shared prefix
    // c_0..c_{i-1} followed by the diagonal d_i (absent for the last vertex).
    let mut diag = vec![0.0; n_points - 1];
    let mut shared = vec![0.0; n_points - 1];
    for j in 0..n_points - 1 {
        let jm = j as f64;
        diag[j] = r * (m * (m - 1.0 - jm) / ((m - 1.0) * (m - jm))).sqrt();
        shared[j] = -diag[j] / (m - 1.0 - jm);
    }
    let mut points = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let mut p = center.to_vec();
        for j in 0..i.min(n_points - 1) {
            p[dim_offset + j] += shared[j];
        }
        if i < n_points - 1 {
            p[dim_offset + i] += diag[i];
        }
        points.push(p);
    }
    Ok(points)
}

fn side_to_circumradius(side: f64, m: usize) -> f64 {
    side * ((m as f64 - 1.0) / (2.0 * m as f64)).sqrt()
}

/// Instance with one high-deviation cluster and `k - 1` unit clusters.
///
/// The big cluster is a regular simplex of circumradius `R = sqrt(k)` (so its
/// deviation around the centroid is exactly `R`), placed at separation
/// `10^6 R k` from the rest. The unit clusters are side-1 simplices whose
/// centroids sit on a regular simplex of side `delta` in orthogonal
/// coordinates, with `delta` solving `R^alpha = 10 k delta^alpha` exactly.
pub fn gen_simplex_lb(
    k: usize,
    n_per_cluster: usize,
    alpha: f64,
    _rng_seed: u64,
) -> Result<Dataset, InstanceError> {
    if k < 2 {
        return Err(InstanceError::InvalidParameter { family: "simplex_lb", message: "k must be >= 2".into() });
    }
    if n_per_cluster < 2 {
        return Err(InstanceError::InvalidParameter {
            family: "simplex_lb",
            message: "n_per_cluster must be >= 2".into(),
        });
    }
    if !(alpha > 2.0) {
        return Err(InstanceError::InvalidParameter { family: "simplex_lb", message: "alpha must be > 2".into() });
    }
    let n = n_per_cluster;
    let big_radius = (k as f64).sqrt();
    let delta = big_radius * (10.0 * k as f64).powf(-1.0 / alpha);
    let far = 1e6 * big_radius * k as f64;

    // Coordinate blocks: [0, n-1) within-cluster simplex, [n-1, n-1+k-2)
    // centroid placement, last axis = far offset of the big cluster.
    let cluster_block = n - 1;
    let centroid_block = k.saturating_sub(2);
    let d = cluster_block + centroid_block + 1;
    let far_axis = d - 1;

    let mut coords = Vec::with_capacity(k * n * d);
    let mut labels = Vec::with_capacity(k * n);

    let mut big_center = vec![0.0; d];
    big_center[far_axis] = far;
    for p in gen_regular_simplex(n, big_radius, &big_center, 0)? {
        coords.extend_from_slice(&p);
        labels.push(0);
    }

    let centroids: Vec<Vec<f64>> = if k == 2 {
        vec![vec![0.0; d]]
    } else {
        gen_regular_simplex(
            k - 1,
            side_to_circumradius(delta, k - 1),
            &vec![0.0; d],
            cluster_block,
        )?
    };
    let unit_radius = side_to_circumradius(1.0, n);
    for (c, centroid) in centroids.iter().enumerate() {
        for p in gen_regular_simplex(n, unit_radius, centroid, 0)? {
            coords.extend_from_slice(&p);
            labels.push(c + 1);
        }
    }
    Ok(Dataset::with_labels(coords, d, labels)?)
}

/// Parameters of the two-cluster concentration lower-bound instance.
pub struct GalphaLbParams {
    /// Offset of the isolated point: positive root of
    /// `(x/n)^2 (n-1) + x^2 (1 - 1/n)^2 = n`, i.e. `n / sqrt(n-1)`.
    pub big_offset: f64,
    /// Centroid offset of the simplex cluster: `big_offset / n^(1/alpha)`.
    pub small_offset: f64,
}

pub fn galpha_lb_params(n: usize, alpha: f64) -> GalphaLbParams {
    let nf = n as f64;
    let big_offset = nf / (nf - 1.0).sqrt();
    GalphaLbParams { big_offset, small_offset: big_offset / nf.powf(1.0 / alpha) }
}

/// Two clusters of `n` points each: a circumradius-1 simplex centered at
/// `(-small_offset, 0, ...)`, and `n - 1` points at the origin plus one point
/// at `(big_offset, 0, ...)`. Both clusters have deviation exactly 1.
pub fn gen_galpha_lb(n: usize, alpha: f64) -> Result<Dataset, InstanceError> {
    if n < 4 {
        return Err(InstanceError::InvalidParameter { family: "galpha_lb", message: "n must be >= 4".into() });
    }
    if !(alpha > 2.0) {
        return Err(InstanceError::InvalidParameter { family: "galpha_lb", message: "alpha must be > 2".into() });
    }
    let params = galpha_lb_params(n, alpha);
    // Axis 0 carries the offsets; the simplex occupies axes [1, n).
    let d = n;
    let mut coords = Vec::with_capacity(2 * n * d);
    let mut labels = Vec::with_capacity(2 * n);

    let mut c1_center = vec![0.0; d];
    c1_center[0] = -params.small_offset;
    for p in gen_regular_simplex(n, 1.0, &c1_center, 1)? {
        coords.extend_from_slice(&p);
        labels.push(0);
    }
    let origin = vec![0.0; d];
    for _ in 0..n - 1 {
        coords.extend_from_slice(&origin);
        labels.push(1);
    }
    let mut isolated = vec![0.0; d];
    isolated[0] = params.big_offset;
    coords.extend_from_slice(&isolated);
    labels.push(1);

    Ok(Dataset::with_labels(coords, d, labels)?)
}

/// Parameters of the greedy lower-bound instance.
pub struct GreedyLbParams {
    /// Square side `a = ln(m_samples)`.
    pub side: f64,
    /// Half diagonal `b = a / sqrt(2)`: segment length from vertex to center.
    pub half_diagonal: f64,
    /// Inter-group separation `100 * m_samples^3 * k`.
    pub separation: f64,
}

pub fn greedy_lb_params(k: usize, m_samples: usize) -> GreedyLbParams {
    let side = (m_samples as f64).ln();
    GreedyLbParams {
        side,
        half_diagonal: side / std::f64::consts::SQRT_2,
        separation: 100.0 * (m_samples as f64).powi(3) * k as f64,
    }
}

/// Mean of the truncated exponential density `e^-x / (1 - e^-b)` on `[0, b]`.
pub fn truncated_exp_mean(b: f64) -> f64 {
    1.0 - b / (b.exp() - 1.0)
}

/// `k/4` groups of four clusters. Each group is a square of side
/// `ln(m_samples)`; each cluster holds `n_per_cluster` points on the segment
/// from a square vertex toward the square center, at distances drawn from a
/// truncated unit exponential. Group centers sit on a regular simplex of side
/// `100 m_samples^3 k`.
pub fn gen_greedy_lb(
    k: usize,
    m_samples: usize,
    n_per_cluster: usize,
    rng_seed: u64,
) -> Result<Dataset, InstanceError> {
    if k % 4 != 0 || k < 8 {
        return Err(InstanceError::InvalidParameter {
            family: "greedy_lb",
            message: "k must be divisible by 4 and >= 8".into(),
        });
    }
    if m_samples < 3 {
        return Err(InstanceError::InvalidParameter {
            family: "greedy_lb",
            message: "m_samples must be >= 3".into(),
        });
    }
    if n_per_cluster == 0 {
        return Err(InstanceError::NoSamples);
    }
    let params = greedy_lb_params(k, m_samples);
    let groups = k / 4;
    // Square plane in axes {0, 1}; group placement in the remaining axes.
    let d = 2 + (groups - 1).max(1);
    let group_centers: Vec<Vec<f64>> = if groups == 1 {
        vec![vec![0.0; d]]
    } else {
        gen_regular_simplex(
            groups,
            side_to_circumradius(params.separation, groups),
            &vec![0.0; d],
            2,
        )?
    };

    let half = params.side / 2.0;
    let vertices = [[-half, -half], [half, -half], [half, half], [-half, half]];
    let b = params.half_diagonal;
    let trunc = 1.0 - (-b).exp();

    let mut coords = Vec::with_capacity(k * n_per_cluster * d);
    let mut labels = Vec::with_capacity(k * n_per_cluster);
    for (g, gc) in group_centers.iter().enumerate() {
        for (v, vert) in vertices.iter().enumerate() {
            let cluster = g * 4 + v;
            // Unit direction from the vertex toward the square center.
            let dir = [-vert[0] / b, -vert[1] / b];
            let mut rng = stream_rng(rng_seed, streams::COMPONENT_BASE + cluster as u64);
            for _ in 0..n_per_cluster {
                let u: f64 = rng.random();
                let x = -(1.0 - u * trunc).ln();
                let mut p = gc.clone();
                p[0] += vert[0] + x * dir[0];
                p[1] += vert[1] + x * dir[1];
                coords.extend_from_slice(&p);
                labels.push(cluster);
            }
        }
    }
    Ok(Dataset::with_labels(coords, d, labels)?)
}

/// Writes a dataset as CSV: header `x0,...,x{d-1}[,label]`, one row per
/// point, floats in shortest round-trip form.
pub fn save_csv<P: AsRef<Path>>(ds: &Dataset, path: P) -> Result<(), InstanceError> {
    let path = path.as_ref();
    let mut out = String::new();
    for j in 0..ds.d() {
        if j > 0 {
            out.push(',');
        }
        let _ = write!(out, "x{j}");
    }
    if ds.labels().is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for i in 0..ds.n() {
        for (j, c) in ds.point(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{c}");
        }
        if let Some(labels) = ds.labels() {
            let _ = write!(out, ",{}", labels[i]);
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a dataset written by [`save_csv`].
pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Dataset, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let pstr = path.display().to_string();
    let parse_err =
        |line: usize, message: String| InstanceError::Parse { path: pstr.clone(), line, message };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let labeled = cols.last() == Some(&"label");
    let d = if labeled { cols.len() - 1 } else { cols.len() };
    if d == 0 {
        return Err(parse_err(1, "no coordinate columns".into()));
    }
    for (j, c) in cols.iter().take(d).enumerate() {
        if *c != format!("x{j}") {
            return Err(parse_err(1, format!("expected column `x{j}`, found `{c}`")));
        }
    }

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (ix, line) in lines {
        let lineno = ix + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(parse_err(
                lineno,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        for f in &fields[..d] {
            let v: f64 = f
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad coordinate `{f}`: {e}")))?;
            coords.push(v);
        }
        if labeled {
            let l: usize = fields[d]
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad label `{}`: {e}", fields[d])))?;
            labels.push(l);
        }
    }
    if coords.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    let ds = if labeled {
        Dataset::with_labels(coords, d, labels)?
    } else {
        Dataset::new(coords, d)?
    };
    Ok(ds)
}

/// Named experiment presets: four Gaussian-mixture layouts on square/cube
/// corners (edge 100) and one heavy-tailed student-t layout.
pub fn preset(name: &str, n: usize, rng_seed: u64) -> Result<InstanceSpec, InstanceError> {
    let square: Vec<Vec<f64>> = vec![
        vec![-50.0, -50.0],
        vec![50.0, -50.0],
        vec![50.0, 50.0],
        vec![-50.0, 50.0],
    ];
    let cube: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            vec![
                if i & 1 == 0 { -50.0 } else { 50.0 },
                if i & 2 == 0 { -50.0 } else { 50.0 },
                if i & 4 == 0 { -50.0 } else { 50.0 },
            ]
        })
        .collect();
    let gaussians = |means: Vec<Vec<f64>>, first_sigma2: f64| -> Vec<MixtureComponent> {
        means
            .into_iter()
            .enumerate()
            .map(|(i, mean)| {
                MixtureComponent::spherical(mean, if i == 0 { first_sigma2 } else { 1.0 }, 1.0)
            })
            .collect()
    };
    let spec = match name {
        "d1" => InstanceSpec::GaussianMixture { components: gaussians(square, 1.0), n, rng_seed },
        "d2" => InstanceSpec::GaussianMixture { components: gaussians(square, 400.0), n, rng_seed },
        "d3" => InstanceSpec::GaussianMixture { components: gaussians(cube, 1.0), n, rng_seed },
        "d4" => InstanceSpec::GaussianMixture { components: gaussians(cube, 800.0), n, rng_seed },
        "d5" => {
            let nus = [1.6, 2.0, 5.0, 10.0];
            let components = square
                .into_iter()
                .zip(nus)
                .map(|(mean, nu)| MixtureComponent::spherical(mean, 1.0, 1.0).with_nu(nu))
                .collect();
            InstanceSpec::StudentTMixture { components, n, rng_seed }
        }
        other => {
            return Err(InstanceError::InvalidParameter {
                family: "preset",
                message: format!("unknown preset `{other}` (expected d1..d5)"),
            })
        }
    };
    Ok(spec)
}
