//! Lloyd refinement from a seeded center set.

use serde::{Deserialize, Serialize};

use crate::geometry::{squared_distance, CenterSet, Dataset};

/// Stopping parameters. Defaults: 300 iterations, relative tolerance 1e-9.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LloydConfig {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self { max_iters: 300, tol: 1e-9 }
    }
}

/// Outcome of a Lloyd run. Centers are free points, no longer dataset indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LloydResult {
    /// Row-major k x d center coordinates.
    pub centers: Vec<f64>,
    pub k: usize,
    /// Per-point index of the nearest final center.
    pub assignment: Vec<usize>,
    pub iterations: usize,
    pub final_cost2: f64,
    pub converged: bool,
    /// Assignment cost recorded at each iteration; non-increasing.
    pub cost_history: Vec<f64>,
}

impl LloydResult {
    pub fn center(&self, j: usize) -> &[f64] {
        let d = self.centers.len() / self.k;
        &self.centers[j * d..(j + 1) * d]
    }
}

fn assign(ds: &Dataset, centers: &[f64], k: usize, assignment: &mut [usize]) -> f64 {
    let d = ds.d();
    let mut cost = 0.0;
    for i in 0..ds.n() {
        let p = ds.point(i);
        let mut best = 0usize;
        let mut best_d2 = f64::INFINITY;
        for j in 0..k {
            let d2 = squared_distance(p, &centers[j * d..(j + 1) * d]);
            if d2 < best_d2 {
                best_d2 = d2;
                best = j;
            }
        }
        assignment[i] = best;
        cost += best_d2;
    }
    cost
}

/// Alternates nearest-center assignment (ties toward the lowest center
/// index) and centroid updates until the relative cost decrease drops below
/// `tol` or `max_iters` is reached. A cluster left empty by assignment is
/// re-seeded to the point farthest from its current center.
pub fn lloyd_run(ds: &Dataset, initial: &CenterSet, config: &LloydConfig) -> LloydResult {
    let d = ds.d();
    let k = initial.len();
    assert!(k >= 1, "lloyd_run requires at least one center");
    let mut centers: Vec<f64> = Vec::with_capacity(k * d);
    for &c in initial.centers() {
        centers.extend_from_slice(ds.point(c));
    }

    let mut assignment = vec![0usize; ds.n()];
    let mut cost_history = Vec::new();
    let mut prev_cost = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iters {
        iterations += 1;
        let mut cost = assign(ds, &centers, k, &mut assignment);

        let mut counts = vec![0usize; k];
        for &a in &assignment {
            counts[a] += 1;
        }
        // Re-seed empty clusters one at a time to the farthest point.
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let mut far = 0usize;
            let mut far_d2 = -1.0;
            for i in 0..ds.n() {
                let a = assignment[i];
                let d2 = squared_distance(ds.point(i), &centers[a * d..(a + 1) * d]);
                if d2 > far_d2 && counts[a] > 1 {
                    far_d2 = d2;
                    far = i;
                }
            }
            counts[assignment[far]] -= 1;
            centers[j * d..(j + 1) * d].copy_from_slice(ds.point(far));
            assignment[far] = j;
            counts[j] = 1;
            cost = assign(ds, &centers, k, &mut assignment);
            counts = vec![0; k];
            for &a in &assignment {
                counts[a] += 1;
            }
        }
        cost_history.push(cost);
        if cost == 0.0 {
            converged = true;
            break;
        }

        // Centroid update.
        let mut sums = vec![0.0; k * d];
        for (i, &a) in assignment.iter().enumerate() {
            for (s, c) in sums[a * d..(a + 1) * d].iter_mut().zip(ds.point(i)) {
                *s += c;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                let inv = 1.0 / counts[j] as f64;
                for (dst, s) in centers[j * d..(j + 1) * d].iter_mut().zip(&sums[j * d..(j + 1) * d]) {
                    *dst = s * inv;
                }
            }
        }

        if prev_cost.is_finite() && prev_cost - cost <= config.tol * prev_cost {
            converged = true;
            break;
        }
        prev_cost = cost;
    }

    // Final assignment against the updated centers.
    let final_cost2 = assign(ds, &centers, k, &mut assignment);
    LloydResult { centers, k, assignment, iterations, final_cost2, converged, cost_history }
}
