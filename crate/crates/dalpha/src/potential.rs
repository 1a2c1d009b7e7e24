//! Observer for powered-distance seeding runs: per-weight-class counters, a
//! potential function over undiscovered clusters, and inequality checks.
//!
//! Clusters are grouped by size into classes `[2^i, 2^(i+1))`. Each class
//! carries a tries counter `tau_i` and a wasted counter `w_i`, maintained as
//! centers arrive:
//!
//! - center from an undiscovered cluster of class `i`: `tau_i` increments
//!   (while below `k_i`), no class wastes the step;
//! - center from an already-hit cluster: every class `j` with `tau_j < k_j`
//!   increments both `tau_j` and `w_j`.
//!
//! The per-class potential is
//! `phi_i = (w_i / |U_i|) * (2^i)^(1-2/alpha) * sum_{C in U_i} (cost_alpha(C))^(2/alpha)`
//! over the undiscovered set `U_i`, zero when `U_i` is empty. After a full
//! k-center run the wasted counters cover the undiscovered sets and the total
//! potential dominates half the squared cost of undiscovered clusters; both
//! facts are checked deterministically by [`verify_run`]. The expectation
//! checks enumerate the exact conditional distribution of the next center,
//! so they are finite-sum inequalities with no statistical tolerance.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{power_sum_root, squared_distance, CenterSet, Dataset, GeometryError};
use crate::seeding::SeedingTrace;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("potential tracing requires alpha > 2, got {alpha}")]
    InvalidAlpha { alpha: f64 },

    #[error("cluster id {id} is not tracked")]
    UnknownCluster { id: usize },

    #[error("trace has {steps} steps but the reference clustering has {k} clusters")]
    TraceLengthMismatch { steps: usize, k: usize },

    #[error("trace step {step}: chosen point {chosen} labels cluster {actual}, trace says {recorded}")]
    TraceClusterMismatch { step: usize, chosen: usize, actual: usize, recorded: usize },

    #[error("class {class} has no undiscovered mass to condition on")]
    DegenerateClass { class: u32 },

    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Counter and potential state after `t` selections.
#[derive(Debug, Clone)]
pub struct PotentialState {
    alpha: f64,
    t: usize,
    /// Sorted distinct class indices `i` with `k_i > 0`.
    class_ids: Vec<u32>,
    /// Cluster id -> slot into the per-class vectors.
    slot_of_cluster: Vec<usize>,
    k_i: Vec<usize>,
    tau: Vec<usize>,
    w: Vec<usize>,
    undiscovered: Vec<BTreeSet<usize>>,
    hit: BTreeSet<usize>,
    phi: Vec<f64>,
}

impl PotentialState {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn classes(&self) -> &[u32] {
        &self.class_ids
    }

    fn slot(&self, class: u32) -> Option<usize> {
        self.class_ids.binary_search(&class).ok()
    }

    pub fn k_i(&self, class: u32) -> usize {
        self.slot(class).map_or(0, |s| self.k_i[s])
    }

    pub fn tau(&self, class: u32) -> usize {
        self.slot(class).map_or(0, |s| self.tau[s])
    }

    pub fn wasted(&self, class: u32) -> usize {
        self.slot(class).map_or(0, |s| self.w[s])
    }

    pub fn undiscovered(&self, class: u32) -> Option<&BTreeSet<usize>> {
        self.slot(class).map(|s| &self.undiscovered[s])
    }

    pub fn hit(&self) -> &BTreeSet<usize> {
        &self.hit
    }

    pub fn phi(&self, class: u32) -> f64 {
        self.slot(class).map_or(0.0, |s| self.phi[s])
    }

    pub fn phi_total(&self) -> f64 {
        self.phi.iter().sum()
    }

    fn phi_of(w: usize, class_id: u32, alpha: f64, undiscovered: &BTreeSet<usize>, roots: &[f64]) -> f64 {
        if undiscovered.is_empty() {
            return 0.0;
        }
        let sum: f64 = undiscovered.iter().map(|&c| roots[c]).sum();
        let scale = (2.0f64.powi(class_id as i32)).powf(1.0 - 2.0 / alpha);
        w as f64 / undiscovered.len() as f64 * scale * sum
    }

    fn recompute_phi(&mut self, roots: &[f64]) {
        for s in 0..self.class_ids.len() {
            self.phi[s] =
                Self::phi_of(self.w[s], self.class_ids[s], self.alpha, &self.undiscovered[s], roots);
        }
    }

    /// Applies one selection: `chosen_cluster` is the reference cluster of
    /// the new center, `alpha_roots[c] = (cost_alpha(C_c))^(2/alpha)` are the
    /// per-cluster costs after the center was added.
    pub fn advance(&mut self, chosen_cluster: usize, alpha_roots: &[f64]) -> Result<(), PotentialError> {
        if chosen_cluster >= self.slot_of_cluster.len() {
            return Err(PotentialError::UnknownCluster { id: chosen_cluster });
        }
        let slot = self.slot_of_cluster[chosen_cluster];
        if self.undiscovered[slot].contains(&chosen_cluster) {
            if self.tau[slot] < self.k_i[slot] {
                self.tau[slot] += 1;
            }
            self.undiscovered[slot].remove(&chosen_cluster);
            self.hit.insert(chosen_cluster);
        } else if self.hit.contains(&chosen_cluster) {
            for j in 0..self.class_ids.len() {
                if self.tau[j] < self.k_i[j] {
                    self.tau[j] += 1;
                    self.w[j] += 1;
                }
            }
        } else {
            return Err(PotentialError::UnknownCluster { id: chosen_cluster });
        }
        self.t += 1;
        self.recompute_phi(alpha_roots);
        if cfg!(debug_assertions) {
            for j in 0..self.class_ids.len() {
                debug_assert!(self.w[j] <= self.tau[j] && self.tau[j] <= self.k_i[j]);
                debug_assert!(self.undiscovered[j].len() >= self.k_i[j] - self.tau[j]);
            }
        }
        Ok(())
    }
}

/// Fresh state: all counters zero, every cluster undiscovered, potential zero.
pub fn init_state(ds: &Dataset, alpha: f64) -> Result<PotentialState, PotentialError> {
    if !(alpha > 2.0) {
        return Err(PotentialError::InvalidAlpha { alpha });
    }
    let members = ds.cluster_members()?;
    let classes: Vec<u32> = members.iter().map(|ms| (ms.len() as u64).ilog2()).collect();
    let mut class_ids: Vec<u32> = classes.clone();
    class_ids.sort_unstable();
    class_ids.dedup();
    let slot_of_cluster: Vec<usize> =
        classes.iter().map(|c| class_ids.binary_search(c).unwrap()).collect();
    let mut k_i = vec![0usize; class_ids.len()];
    let mut undiscovered = vec![BTreeSet::new(); class_ids.len()];
    for (cluster, &slot) in slot_of_cluster.iter().enumerate() {
        k_i[slot] += 1;
        undiscovered[slot].insert(cluster);
    }
    let phi = vec![0.0; class_ids.len()];
    Ok(PotentialState {
        alpha,
        t: 0,
        class_ids: class_ids.clone(),
        slot_of_cluster,
        k_i,
        tau: vec![0; class_ids.len()],
        w: vec![0; class_ids.len()],
        undiscovered,
        hit: BTreeSet::new(),
        phi,
    })
}

/// Replays the first `steps` selections of a trace, returning the center set
/// and counter state they induce.
pub fn replay_prefix(
    ds: &Dataset,
    trace: &SeedingTrace,
    steps: usize,
) -> Result<(CenterSet, PotentialState), PotentialError> {
    let labels = ds.labels().ok_or(GeometryError::MissingLabels)?;
    let mut state = init_state(ds, trace.alpha)?;
    let mut cs = CenterSet::new(ds.n());
    for (ix, step) in trace.steps.iter().take(steps).enumerate() {
        cs.add_center(ds, step.chosen)?;
        let actual = labels[step.chosen];
        if let Some(recorded) = step.cluster {
            if recorded != actual {
                return Err(PotentialError::TraceClusterMismatch {
                    step: ix,
                    chosen: step.chosen,
                    actual,
                    recorded,
                });
            }
        }
        let roots = cs.cluster_alpha_cost_roots(ds, trace.alpha)?;
        state.advance(actual, &roots)?;
    }
    Ok((cs, state))
}

/// One inequality check outcome. `slack` is the normalized margin by which
/// the inequality held (negative on violation).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub max_slack: f64,
}

impl LemmaCheck {
    fn new(name: &str, margin: f64) -> Self {
        Self {
            name: name.to_string(),
            checked: 1,
            violations: usize::from(margin < -1e-9),
            max_slack: margin,
        }
    }
}

/// Aggregated verification outcome, serializable as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemmas: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.lemmas.iter().all(|l| l.violations == 0)
    }

    /// Folds another report in: counts add, worst slack wins.
    pub fn merge(&mut self, other: &LemmaReport) {
        for check in &other.lemmas {
            match self.lemmas.iter_mut().find(|l| l.name == check.name) {
                Some(l) => {
                    l.checked += check.checked;
                    l.violations += check.violations;
                    l.max_slack = l.max_slack.min(check.max_slack);
                }
                None => self.lemmas.push(check.clone()),
            }
        }
    }
}

/// Replays a complete k-center run and checks, deterministically:
/// (a) every class ends with `w_i >= |U_i|`, and
/// (b) the final potential is at least half the squared cost of the
/// undiscovered clusters.
pub fn verify_run(ds: &Dataset, trace: &SeedingTrace) -> Result<LemmaReport, PotentialError> {
    let k = ds.k().ok_or(GeometryError::MissingLabels)?;
    if trace.steps.len() != k {
        return Err(PotentialError::TraceLengthMismatch { steps: trace.steps.len(), k });
    }
    let (cs, state) = replay_prefix(ds, trace, k)?;

    // (a) wasted counters cover the undiscovered sets.
    let mut tries_margin = f64::INFINITY;
    for &class in state.classes() {
        let margin = state.wasted(class) as f64 - state.undiscovered(class).unwrap().len() as f64;
        tries_margin = tries_margin.min(margin);
    }

    // (b) potential dominates half the undiscovered squared cost.
    let costs = cs.cluster_costs(ds, trace.alpha)?;
    let mut undiscovered_cost2 = 0.0;
    for &class in state.classes() {
        for &c in state.undiscovered(class).unwrap() {
            undiscovered_cost2 += costs.cost2[c];
        }
    }
    let phi = state.phi_total();
    let denom = (undiscovered_cost2 / 2.0).max(phi).max(1.0);
    let potential_margin = (phi - undiscovered_cost2 / 2.0) / denom;

    Ok(LemmaReport {
        lemmas: vec![
            LemmaCheck::new("wasted_tries_cover_undiscovered", tries_margin),
            LemmaCheck::new("potential_dominates_undiscovered_cost", potential_margin),
        ],
    })
}

/// Per-cluster `(cost_alpha)^(2/alpha)` roots if center `z` were added.
fn roots_after_adding(ds: &Dataset, cs: &CenterSet, z: usize, alpha: f64) -> Vec<f64> {
    let labels = ds.labels().expect("caller checked labels");
    let k = ds.k().unwrap();
    let zp = ds.point(z);
    let mut per_cluster: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (i, &d2) in cs.nearest_sq().iter().enumerate() {
        per_cluster[labels[i]].push(d2.min(squared_distance(ds.point(i), zp)));
    }
    per_cluster.iter().map(|vals| power_sum_root(vals, alpha)).collect()
}

/// Outcome of one exact conditional-expectation evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectedDecrease {
    /// Expected potential change per class, in class order.
    pub per_class: Vec<f64>,
    /// Largest expected change; the inequality requires it non-positive.
    pub max: f64,
}

/// Exact conditional expectation of the potential change when the next
/// center is drawn from an undiscovered cluster of the given class.
///
/// Enumerates every point of every undiscovered cluster in the class with
/// its powered-distance weight, applies the real center addition, and
/// recomputes the potential of every class.
pub fn expected_decrease_check(
    ds: &Dataset,
    cs: &CenterSet,
    state: &PotentialState,
    class: u32,
) -> Result<ExpectedDecrease, PotentialError> {
    let labels = ds.labels().ok_or(GeometryError::MissingLabels)?;
    let slot = state
        .slot(class)
        .ok_or(PotentialError::DegenerateClass { class })?;
    let targets = &state.undiscovered[slot];
    if targets.is_empty() {
        return Err(PotentialError::DegenerateClass { class });
    }
    let candidates: Vec<usize> =
        (0..ds.n()).filter(|&i| targets.contains(&labels[i])).collect();
    let m2 = candidates
        .iter()
        .map(|&i| cs.nearest_sq()[i])
        .fold(0.0f64, f64::max);
    if m2 == 0.0 {
        return Err(PotentialError::DegenerateClass { class });
    }
    let alpha = state.alpha;
    let weights: Vec<f64> = candidates
        .iter()
        .map(|&i| {
            let d2 = cs.nearest_sq()[i];
            if d2 == 0.0 {
                0.0
            } else {
                (d2 / m2).powf(alpha / 2.0)
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();

    let mut expect = vec![0.0; state.class_ids.len()];
    for (&z, &wz) in candidates.iter().zip(&weights) {
        if wz == 0.0 {
            continue;
        }
        let p = wz / total;
        let roots = roots_after_adding(ds, cs, z, alpha);
        // Counter update for a discovery in `class`: tau bumps, w unchanged,
        // the chosen cluster leaves the undiscovered set.
        let cz = labels[z];
        for (j, e) in expect.iter_mut().enumerate() {
            let phi_new = if j == slot {
                let mut u = state.undiscovered[j].clone();
                u.remove(&cz);
                PotentialState::phi_of(state.w[j], state.class_ids[j], alpha, &u, &roots)
            } else {
                PotentialState::phi_of(state.w[j], state.class_ids[j], alpha, &state.undiscovered[j], &roots)
            };
            *e += p * (phi_new - state.phi[j]);
        }
    }
    let max = expect.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ExpectedDecrease { per_class: expect, max })
}

/// One exact expectation versus its closed-form ceiling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HitCostCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// The cluster had no sampling mass; the check passes vacuously.
    pub degenerate: bool,
}

impl HitCostCheck {
    pub fn holds(&self) -> bool {
        self.degenerate || self.lhs <= self.rhs * (1.0 + 1e-9) + 1e-12
    }
}

fn cluster_weights(cs: &CenterSet, members: &[usize], alpha: f64) -> Option<Vec<f64>> {
    let m2 = members.iter().map(|&i| cs.nearest_sq()[i]).fold(0.0f64, f64::max);
    if m2 == 0.0 {
        return None;
    }
    Some(
        members
            .iter()
            .map(|&i| {
                let d2 = cs.nearest_sq()[i];
                if d2 == 0.0 {
                    0.0
                } else {
                    (d2 / m2).powf(alpha / 2.0)
                }
            })
            .collect(),
    )
}

/// Exact `E[cost2(C, T + z) | z in C]` under powered-distance weights versus
/// `(4e + (alpha+1)^2 g_C^(2/alpha)) * cost2(C, mu_C)` with the cluster's own
/// concentration contribution `g_C`.
pub fn hit_cost_check(
    ds: &Dataset,
    cs: &CenterSet,
    cluster: usize,
    alpha: f64,
) -> Result<HitCostCheck, PotentialError> {
    let members = ds.cluster_members()?;
    let ms = members
        .get(cluster)
        .ok_or(PotentialError::UnknownCluster { id: cluster })?;
    let mu = ds.centroid(ms);
    let cost2_mu: f64 = ms.iter().map(|&i| squared_distance(ds.point(i), &mu)).sum();
    let var = cost2_mu / ms.len() as f64;

    let g_c = if var == 0.0 {
        0.0
    } else {
        let mut pair = 0.0;
        for (a, &i) in ms.iter().enumerate() {
            for &j in ms.iter().skip(a + 1) {
                pair += squared_distance(ds.point(i), ds.point(j)).powf(alpha / 2.0);
            }
        }
        (2.0 * pair / (ms.len() as f64 * ms.len() as f64)) / var.powf(alpha / 2.0)
    };
    let rhs = crate::diagnostics::hit_cost_factor(alpha, g_c) * cost2_mu;

    let weights = match cluster_weights(cs, ms, alpha) {
        None => return Ok(HitCostCheck { lhs: 0.0, rhs, degenerate: true }),
        Some(w) => w,
    };
    let total: f64 = weights.iter().sum();
    let mut lhs = 0.0;
    for (&z, &wz) in ms.iter().zip(&weights) {
        if wz == 0.0 {
            continue;
        }
        let zp = ds.point(z);
        let cost: f64 = ms
            .iter()
            .map(|&x| cs.nearest_sq()[x].min(squared_distance(ds.point(x), zp)))
            .sum();
        lhs += wz / total * cost;
    }
    Ok(HitCostCheck { lhs, rhs, degenerate: false })
}

/// The two powered-cost ceilings for a hit cluster: under powered-distance
/// weighting, `E[cost_alpha(C, T + z)] <= 2^(2 alpha) cost_alpha(C, mu_C)`;
/// under uniform weighting the factor drops to `2^alpha`.
pub fn alpha_hit_cost_checks(
    ds: &Dataset,
    cs: &CenterSet,
    cluster: usize,
    alpha: f64,
) -> Result<(HitCostCheck, HitCostCheck), PotentialError> {
    let members = ds.cluster_members()?;
    let ms = members
        .get(cluster)
        .ok_or(PotentialError::UnknownCluster { id: cluster })?;
    let mu = ds.centroid(ms);
    let cost_alpha_mu: f64 = ms
        .iter()
        .map(|&i| squared_distance(ds.point(i), &mu).powf(alpha / 2.0))
        .sum();

    let cost_alpha_after = |z: usize| -> f64 {
        let zp = ds.point(z);
        ms.iter()
            .map(|&x| {
                cs.nearest_sq()[x]
                    .min(squared_distance(ds.point(x), zp))
                    .powf(alpha / 2.0)
            })
            .sum()
    };

    let uniform_lhs: f64 =
        ms.iter().map(|&z| cost_alpha_after(z)).sum::<f64>() / ms.len() as f64;
    let uniform = HitCostCheck {
        lhs: uniform_lhs,
        rhs: 2.0f64.powf(alpha) * cost_alpha_mu,
        degenerate: false,
    };

    let powered = match cluster_weights(cs, ms, alpha) {
        None => HitCostCheck {
            lhs: 0.0,
            rhs: 2.0f64.powf(2.0 * alpha) * cost_alpha_mu,
            degenerate: true,
        },
        Some(weights) => {
            let total: f64 = weights.iter().sum();
            let mut lhs = 0.0;
            for (&z, &wz) in ms.iter().zip(&weights) {
                if wz > 0.0 {
                    lhs += wz / total * cost_alpha_after(z);
                }
            }
            HitCostCheck { lhs, rhs: 2.0f64.powf(2.0 * alpha) * cost_alpha_mu, degenerate: false }
        }
    };
    Ok((powered, uniform))
}
