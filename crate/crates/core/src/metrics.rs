//! Practical evaluation of a mission against a simulated true field:
//! priority coverage within a distance, and the errors of the GP prediction
//! built from the mission's samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Solution};
use crate::spatial_gp::{fit_kernel, gls_mean, FieldSample, GaussianField, Kernel};

/// Coverage distances reported by default, in meters.
pub const PCOV_DISTANCES: [f64; 3] = [0.0, 100.0, 300.0];

/// Prediction used when too few samples exist to fit a kernel: the mean of
/// a normalized field.
pub const PRIOR_MEAN: f64 = 50.0;

/// Distances are compared with this slack so grid neighbors at exactly the
/// spacing count as covered.
const DIST_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// `(distance, PCov_d)` pairs in ascending distance.
    pub pcov: Vec<(f64, f64)>,
    pub mae: f64,
    pub me: f64,
    pub wmae: f64,
    /// Kernel fitted to the samples; `None` when fewer than three were taken.
    pub kernel: Option<Kernel>,
}

impl MetricReport {
    pub fn pcov_at(&self, d: f64) -> Option<f64> {
        self.pcov.iter().find(|(x, _)| *x == d).map(|p| p.1)
    }
}

/// Share of the total priority lying within `d` of some sampled target.
pub fn pcov(inst: &Instance, sampled: &[usize], d: f64) -> Result<f64> {
    if d < 0.0 {
        return Err(Error::InvalidParameter(format!("negative coverage distance {d}")));
    }
    let total = inst.total_priority();
    if total <= 0.0 {
        return Err(Error::ZeroPriority);
    }
    let covered: f64 = (0..inst.num_targets())
        .filter(|&i| sampled.iter().any(|&j| inst.dist(i, j) <= d + DIST_EPS))
        .map(|i| inst.priorities[i])
        .sum();
    Ok(covered / total)
}

/// `(MAE, ME, WMAE)` of `predicted` against `truth`, weighting by
/// `priorities` for the WMAE.
pub fn prediction_errors(truth: &[f64], predicted: &[f64], priorities: &[f64]) -> Result<(f64, f64, f64)> {
    let n = truth.len();
    if predicted.len() != n || priorities.len() != n || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need equal nonempty lengths, got {n} true, {} predicted, {} priorities",
            predicted.len(),
            priorities.len()
        )));
    }
    let total: f64 = priorities.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroPriority);
    }
    let (mut abs, mut signed, mut weighted) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let e = predicted[i] - truth[i];
        abs += e.abs();
        signed += e;
        weighted += priorities[i] * e.abs();
    }
    Ok((abs / n as f64, signed / n as f64, weighted / total))
}

/// GP prediction of the whole field from the true values at `sampled`,
/// together with the fitted kernel.
pub fn predict(inst: &Instance, sampled: &[usize], truth: &FieldSample) -> Result<(Vec<f64>, Option<Kernel>)> {
    let n = inst.num_targets();
    if truth.values.len() != n {
        return Err(Error::InvalidParameter(format!("true field has {} values for {n} targets", truth.values.len())));
    }
    if sampled.len() < 3 {
        return Ok((vec![PRIOR_MEAN; n], None));
    }
    let locs: Vec<_> = sampled.iter().map(|&i| inst.targets[i]).collect();
    let obs: Vec<f64> = sampled.iter().map(|&i| truth.values[i]).collect();
    let kernel = fit_kernel(&locs, &obs)?;
    let mean = gls_mean(&kernel, &locs, &obs)?;
    let field = GaussianField::from_kernel(&inst.targets, mean, &kernel);
    Ok((field.posterior_mean(sampled, &obs)?, Some(kernel)))
}

/// Full report at the default coverage distances.
pub fn evaluate_mission(inst: &Instance, sol: &Solution, truth: &FieldSample) -> Result<MetricReport> {
    evaluate_mission_at(inst, sol, truth, &PCOV_DISTANCES)
}

pub fn evaluate_mission_at(inst: &Instance, sol: &Solution, truth: &FieldSample, distances: &[f64]) -> Result<MetricReport> {
    inst.check_solution(sol)?;
    let sampled = sol.sampled();
    let mut ds = distances.to_vec();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    let pcov = ds.into_iter().map(|d| Ok((d, pcov(inst, &sampled, d)?))).collect::<Result<_>>()?;
    let (predicted, kernel) = predict(inst, &sampled, truth)?;
    let (mae, me, wmae) = prediction_errors(&truth.values, &predicted, &inst.priorities)?;
    Ok(MetricReport { pcov, mae, me, wmae, kernel })
}
