//! Mission informativeness under the five objective models, with an
//! incremental evaluation cache for the search.
//!
//! Every model has the shape
//!
//! ```text
//! I(S) = Σ_{i∈S} v_i + Σ_{i∉S} credit_i(Σ_{j∈S∩C_i} w_ji)
//! ```
//!
//! where `v_i` is the priority (or 1 for the IPP variants) and `credit_i(a)`
//! is `a·v_i` for the uncapped models (IPP-YU, CorTOP) and `min(v_i, a·v_i)`
//! for the capped ones (IPP-GEN, GCorTOP). TOP has no neighborhoods. All five
//! are subadditive on disjoint sets, which the exact solver relies on.

use serde::{Deserialize, Serialize};

use crate::coverage::CoverageWeights;
use crate::error::{Error, Result};
use crate::instance::{Instance, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Top,
    IppYu,
    IppGen,
    Cortop,
    Gcortop,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Top => "top",
            ModelKind::IppYu => "ipp_yu",
            ModelKind::IppGen => "ipp_gen",
            ModelKind::Cortop => "cortop",
            ModelKind::Gcortop => "gcortop",
        }
    }

    fn capped(self) -> bool {
        matches!(self, ModelKind::IppGen | ModelKind::Gcortop)
    }

    fn unit_values(self) -> bool {
        matches!(self, ModelKind::IppYu | ModelKind::IppGen)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "top" => Ok(ModelKind::Top),
            "ipp_yu" => Ok(ModelKind::IppYu),
            "ipp_gen" => Ok(ModelKind::IppGen),
            "cortop" => Ok(ModelKind::Cortop),
            "gcortop" => Ok(ModelKind::Gcortop),
            other => Err(Error::InvalidParameter(format!("unknown model `{other}`"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct ObjectiveModel {
    pub kind: ModelKind,
    weights: CoverageWeights,
    values: Vec<f64>,
    /// Weight of total route duration in the search objective.
    pub rho: f64,
}

/// `ρ = 0.01 · Σu / (|V| · d̄)` with `d̄` the mean distance over all ordered
/// target pairs (self-pairs included).
pub fn default_rho(inst: &Instance, values: &[f64]) -> f64 {
    let n = inst.num_targets();
    if n == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            sum += inst.dist(i, j);
        }
    }
    let d_bar = sum / (n * n) as f64;
    if d_bar <= 0.0 {
        return 0.0;
    }
    0.01 * values.iter().sum::<f64>() / (n as f64 * d_bar)
}

impl ObjectiveModel {
    /// Pure model (ρ = 0). TOP ignores `weights`.
    pub fn new(kind: ModelKind, inst: &Instance, weights: Option<CoverageWeights>) -> Result<Self> {
        let n = inst.num_targets();
        let weights = match (kind, weights) {
            (ModelKind::Top, _) => CoverageWeights::empty(n),
            (_, Some(w)) => w,
            (k, None) => return Err(Error::InvalidParameter(format!("model {k} needs coverage weights"))),
        };
        if weights.num_targets() != n {
            return Err(Error::InvalidParameter(format!(
                "weights cover {} targets, instance has {n}",
                weights.num_targets()
            )));
        }
        let values = if kind.unit_values() { vec![1.0; n] } else { inst.priorities.clone() };
        Ok(ObjectiveModel { kind, weights, values, rho: 0.0 })
    }

    /// Model with the benchmark weight settings: inverse-distance weights
    /// (`w̄ = 0.5`, `d_min = 100 m`, radius 400 m) for GCorTOP and IPP-GEN,
    /// uniform weights over immediate neighbors for CorTOP and IPP-YU.
    pub fn standard(kind: ModelKind, inst: &Instance) -> Result<Self> {
        let weights = match kind {
            ModelKind::Top => None,
            ModelKind::Gcortop | ModelKind::IppGen => Some(CoverageWeights::build_idw(inst, 0.5, 100.0, 400.0)?),
            ModelKind::Cortop | ModelKind::IppYu => Some(CoverageWeights::build_immediate(inst)?),
        };
        Self::new(kind, inst, weights)
    }

    /// Same model with the search-time ρ set from the instance.
    pub fn weighted(mut self, inst: &Instance) -> Self {
        self.rho = default_rho(inst, &self.values);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// The same model on a sub-instance holding the targets `keep` (in that
    /// order) with explicit values. ρ is recomputed for the sub-instance when
    /// the parent uses one.
    pub fn reduced(&self, sub: &Instance, keep: &[usize], values: Vec<f64>) -> Self {
        debug_assert_eq!(keep.len(), values.len());
        let rho = if self.rho > 0.0 { default_rho(sub, &values) } else { 0.0 };
        ObjectiveModel { kind: self.kind, weights: self.weights.restrict(keep), values, rho }
    }

    pub fn weights(&self) -> &CoverageWeights {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_targets(&self) -> usize {
        self.values.len()
    }

    pub fn is_monotone(&self) -> bool {
        match self.kind {
            ModelKind::Top | ModelKind::IppGen | ModelKind::Gcortop => true,
            // Uncapped credit is monotone exactly when no target can collect
            // more than its own value indirectly.
            ModelKind::IppYu | ModelKind::Cortop => (0..self.num_targets())
                .all(|i| self.weights.neighborhood(i).iter().map(|p| p.1).sum::<f64>() <= 1.0 + 1e-12),
        }
    }

    /// Indirect credit of unvisited target `i` given accumulated weight `acc`.
    #[inline]
    pub fn credit(&self, i: usize, acc: f64) -> f64 {
        let v = self.values[i];
        if self.kind.capped() {
            (acc * v).min(v)
        } else {
            acc * v
        }
    }

    /// Model value of the sampled set given as a membership mask.
    pub fn evaluate(&self, sampled: &[bool]) -> f64 {
        let mut total = 0.0;
        for (i, &in_s) in sampled.iter().enumerate() {
            if in_s {
                total += self.values[i];
            } else {
                let acc: f64 = self.weights.neighborhood(i).iter().filter(|p| sampled[p.0]).map(|p| p.1).sum();
                total += self.credit(i, acc);
            }
        }
        total
    }

    pub fn evaluate_set(&self, set: &[usize]) -> f64 {
        let mut mask = vec![false; self.num_targets()];
        for &i in set {
            mask[i] = true;
        }
        self.evaluate(&mask)
    }

    /// `I(S) − ρ · Σ_m T_m`.
    pub fn weighted_value(&self, sol: &Solution) -> f64 {
        self.evaluate(&sol.sampled_mask(self.num_targets())) - self.rho * sol.total_duration()
    }

    pub fn state(&self) -> ObjectiveState {
        let n = self.num_targets();
        ObjectiveState { acc: vec![0.0; n], sampled: vec![false; n], value: 0.0 }
    }

    pub fn state_for(&self, sampled: &[usize]) -> ObjectiveState {
        let mut st = self.state();
        for &i in sampled {
            self.apply(&mut st, i);
        }
        st
    }

    /// Uncovered share of target `i`: `max(0, (1 − acc_i)·v_i)`.
    #[inline]
    pub fn remaining_priority(&self, st: &ObjectiveState, i: usize) -> f64 {
        if st.sampled[i] {
            return 0.0;
        }
        ((1.0 - st.acc[i]) * self.values[i]).max(0.0)
    }

    /// Objective gain of adding `i ∉ S`.
    ///
    /// For the capped models this is `u^r_i + Σ_{j∉S, i∈C_j} min(u^r_j, w_ij u_j)`.
    #[inline]
    pub fn gain(&self, st: &ObjectiveState, i: usize) -> f64 {
        debug_assert!(!st.sampled[i]);
        let mut g = self.values[i] - self.credit(i, st.acc[i]);
        for &(k, w) in self.weights.informs(i) {
            if !st.sampled[k] {
                g += self.credit(k, st.acc[k] + w) - self.credit(k, st.acc[k]);
            }
        }
        g
    }

    /// Marginal contribution `u^m_i`: zero unless `i` is open.
    pub fn marginal_benefit(&self, st: &ObjectiveState, i: usize, open: &[bool]) -> f64 {
        if !open[i] || st.sampled[i] {
            return 0.0;
        }
        self.gain(st, i)
    }

    /// Objective loss of removing `i ∈ S`.
    pub fn loss(&self, st: &ObjectiveState, i: usize) -> f64 {
        debug_assert!(st.sampled[i]);
        let mut l = self.values[i] - self.credit(i, st.acc[i]);
        for &(k, w) in self.weights.informs(i) {
            if !st.sampled[k] {
                l += self.credit(k, st.acc[k]) - self.credit(k, st.acc[k] - w);
            }
        }
        l
    }

    pub fn apply(&self, st: &mut ObjectiveState, i: usize) {
        assert!(!st.sampled[i], "target {i} already sampled");
        st.value += self.gain(st, i);
        st.sampled[i] = true;
        for &(k, w) in self.weights.informs(i) {
            st.acc[k] += w;
        }
    }

    pub fn revert(&self, st: &mut ObjectiveState, i: usize) {
        assert!(st.sampled[i], "target {i} not sampled");
        st.value -= self.loss(st, i);
        st.sampled[i] = false;
        for &(k, w) in self.weights.informs(i) {
            st.acc[k] -= w;
        }
    }

    /// Upper bound on `I(S')` over every `S' ⊆ V \ N^u`.
    ///
    /// For the capped models this is `Σu − Σ_{i∈N^u} (u_i − min(u_i, Σ_{j∈C_i∖N^u} w_ji u_i))`.
    pub fn upper_bound(&self, unvisited: &[bool]) -> f64 {
        BoundTracker::new(self, unvisited).value()
    }
}

/// Incremental evaluation cache for one sampled set.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveState {
    /// Raw accumulated weight `Σ_{j∈S∩C_i} w_ji` for every target.
    pub acc: Vec<f64>,
    pub sampled: Vec<bool>,
    pub value: f64,
}

impl ObjectiveState {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_sampled(&self, i: usize) -> bool {
        self.sampled[i]
    }
}

/// Running upper bound as targets are declared unvisited one by one.
#[derive(Clone, Debug)]
pub struct BoundTracker {
    avail: Vec<f64>,
    unvisited: Vec<bool>,
    value: f64,
}

impl BoundTracker {
    pub fn new(model: &ObjectiveModel, unvisited: &[bool]) -> Self {
        let n = model.num_targets();
        let avail: Vec<f64> = (0..n)
            .map(|i| model.weights.neighborhood(i).iter().filter(|p| !unvisited[p.0]).map(|p| p.1).sum())
            .collect();
        let value = (0..n).map(|i| Self::term(model, i, avail[i], unvisited[i])).sum();
        BoundTracker { avail, unvisited: unvisited.to_vec(), value }
    }

    #[inline]
    fn term(model: &ObjectiveModel, i: usize, avail: f64, unvisited: bool) -> f64 {
        let credit = model.credit(i, avail);
        if unvisited {
            credit
        } else {
            credit.max(model.values[i])
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Moves `i` into `N^u` and updates the bound.
    pub fn mark_unvisited(&mut self, model: &ObjectiveModel, i: usize) {
        if self.unvisited[i] {
            return;
        }
        self.value -= Self::term(model, i, self.avail[i], false);
        self.unvisited[i] = true;
        self.value += Self::term(model, i, self.avail[i], true);
        for &(k, w) in model.weights.informs(i) {
            let before = Self::term(model, k, self.avail[k], self.unvisited[k]);
            self.avail[k] -= w;
            self.value += Self::term(model, k, self.avail[k], self.unvisited[k]) - before;
        }
    }
}
