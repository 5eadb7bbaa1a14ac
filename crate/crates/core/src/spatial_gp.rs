//! Gaussian-process tools: stationary kernels, prior simulation, noise-free
//! conditioning, the ARV and mutual-information design criteria, and
//! grid-search kernel fitting.
//!
//! Every factorization is a dense Cholesky decomposition, retried with a small
//! diagonal jitter when it fails; all operations are `O(n³)` in the number of locations
//! involved; that is comfortable up to the 625 locations of the largest
//! benchmark grids.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Location;

/// Relative diagonal jitter added when a plain factorization fails.
pub const JITTER: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Exponential,
    /// Matérn with smoothness ν = 3/2.
    Matern,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub variance: f64,
    pub length_scale: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind, variance: f64, length_scale: f64) -> Result<Self> {
        if !(variance > 0.0 && length_scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel needs positive variance and length scale, got {variance} and {length_scale}"
            )));
        }
        Ok(Kernel { kind, variance, length_scale })
    }

    pub fn exponential(variance: f64, length_scale: f64) -> Result<Self> {
        Self::new(KernelKind::Exponential, variance, length_scale)
    }

    pub fn matern(variance: f64, length_scale: f64) -> Result<Self> {
        Self::new(KernelKind::Matern, variance, length_scale)
    }

    /// Smoothness ν of the Matérn family member (1/2 for the exponential).
    pub fn nu(&self) -> f64 {
        match self.kind {
            KernelKind::Exponential => 0.5,
            KernelKind::Matern => 1.5,
        }
    }

    /// Covariance at distance `d`.
    pub fn eval(&self, d: f64) -> f64 {
        self.variance * correlation(self.kind, d / self.length_scale)
    }
}

#[inline]
fn correlation(kind: KernelKind, r: f64) -> f64 {
    match kind {
        KernelKind::Exponential => (-r).exp(),
        KernelKind::Matern => {
            let s = 3f64.sqrt() * r;
            (1.0 + s) * (-s).exp()
        }
    }
}

/// A multivariate normal over a finite set of locations.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianField {
    pub locations: Vec<Location>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Values normalized to `[0, 100]` with mean 50.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldSample {
    pub values: Vec<f64>,
}

impl FieldSample {
    /// Shifts the values to mean 50 and scales the largest deviation to 50,
    /// so that the result lies in `[0, 100]`. A constant input maps to 50.
    pub fn normalize(raw: &[f64]) -> Self {
        let n = raw.len().max(1) as f64;
        let mean = raw.iter().sum::<f64>() / n;
        let spread = raw.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        let scale = if spread > 0.0 { 50.0 / spread } else { 0.0 };
        FieldSample { values: raw.iter().map(|v| (50.0 + (v - mean) * scale).clamp(0.0, 100.0)).collect() }
    }
}

fn factor(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Cholesky::new(DMatrix::zeros(0, 0)).expect("empty matrix factors"));
    }
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for eps in [JITTER, 1e3 * JITTER] {
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] += eps * scale;
        }
        if let Some(c) = Cholesky::new(a) {
            return Ok(c);
        }
    }
    Err(Error::SingularCovariance)
}

fn sub_matrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

impl GaussianField {
    pub fn new(locations: Vec<Location>, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = locations.len();
        if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "field over {n} locations needs a {n}-vector and an {n}×{n} matrix"
            )));
        }
        Ok(GaussianField { locations, mean, cov })
    }

    /// Stationary field with constant mean.
    pub fn from_kernel(locations: &[Location], mean: f64, kernel: &Kernel) -> Self {
        let n = locations.len();
        let cov = DMatrix::from_fn(n, n, |i, j| kernel.eval(locations[i].distance(&locations[j])));
        GaussianField { locations: locations.to_vec(), mean: DVector::from_element(n, mean), cov }
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// One draw `μ + L z` with `Σ = L Lᵀ`, before normalization.
    pub fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let l = factor(&self.cov)?.l();
        let z = DVector::from_fn(self.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        Ok((&self.mean + l * z).iter().copied().collect())
    }

    /// One normalized draw.
    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FieldSample> {
        Ok(FieldSample::normalize(&self.sample_raw(rng)?))
    }

    /// Posterior given noise-free observations at `sampled`.
    pub fn posterior(&self, sampled: &[usize], observed: &[f64]) -> Result<GaussianField> {
        self.check_subset(sampled)?;
        if sampled.len() != observed.len() {
            return Err(Error::InvalidParameter(format!(
                "{} sampled locations but {} observations",
                sampled.len(),
                observed.len()
            )));
        }
        if sampled.is_empty() {
            return Ok(self.clone());
        }
        let all: Vec<usize> = (0..self.len()).collect();
        let chol = factor(&sub_matrix(&self.cov, sampled, sampled))?;
        let k_sv = sub_matrix(&self.cov, sampled, &all);
        let resid = DVector::from_fn(sampled.len(), |r, _| observed[r] - self.mean[sampled[r]]);
        let alpha = chol.solve(&resid);
        let mean = &self.mean + k_sv.transpose() * alpha;
        let w = chol.l().solve_lower_triangular(&k_sv).ok_or(Error::SingularCovariance)?;
        let mut cov = &self.cov - w.transpose() * w;
        cov = (&cov + cov.transpose()) * 0.5;
        Ok(GaussianField { locations: self.locations.clone(), mean, cov })
    }

    /// Posterior mean only; cheaper than [`posterior`](Self::posterior).
    pub fn posterior_mean(&self, sampled: &[usize], observed: &[f64]) -> Result<Vec<f64>> {
        self.check_subset(sampled)?;
        if sampled.is_empty() {
            return Ok(self.mean.iter().copied().collect());
        }
        let all: Vec<usize> = (0..self.len()).collect();
        let chol = factor(&sub_matrix(&self.cov, sampled, sampled))?;
        let resid = DVector::from_fn(sampled.len(), |r, _| observed[r] - self.mean[sampled[r]]);
        let alpha = chol.solve(&resid);
        Ok((&self.mean + sub_matrix(&self.cov, sampled, &all).transpose() * alpha).iter().copied().collect())
    }

    /// Average reduction in variance `(Tr Σ − Tr Σ_{V|S}) / |V|`.
    pub fn arv(&self, sampled: &[usize]) -> Result<f64> {
        self.check_subset(sampled)?;
        if sampled.is_empty() || self.is_empty() {
            return Ok(0.0);
        }
        let all: Vec<usize> = (0..self.len()).collect();
        let chol = factor(&sub_matrix(&self.cov, sampled, sampled))?;
        let w = chol.l().solve_lower_triangular(&sub_matrix(&self.cov, sampled, &all)).ok_or(Error::SingularCovariance)?;
        // Each location's variance reduction is capped by its prior variance
        // to absorb the jitter.
        let total: f64 = (0..self.len()).map(|i| w.column(i).norm_squared().min(self.cov[(i, i)])).sum();
        Ok(total / self.len() as f64)
    }

    /// Mutual information `H(Z_A) − H(Z_A | Z_S)` between the sampled
    /// locations and the rest `A = V ∖ S`, in nats.
    pub fn mutual_information(&self, sampled: &[usize]) -> Result<f64> {
        self.check_subset(sampled)?;
        let mut in_s = vec![false; self.len()];
        for &i in sampled {
            in_s[i] = true;
        }
        let rest: Vec<usize> = (0..self.len()).filter(|&i| !in_s[i]).collect();
        if rest.is_empty() {
            return Err(Error::EmptyComplement);
        }
        if sampled.is_empty() {
            return Ok(0.0);
        }
        let prior = factor(&sub_matrix(&self.cov, &rest, &rest))?.ln_determinant();
        let chol_s = factor(&sub_matrix(&self.cov, sampled, sampled))?;
        let w = chol_s
            .l()
            .solve_lower_triangular(&sub_matrix(&self.cov, sampled, &rest))
            .ok_or(Error::SingularCovariance)?;
        let cond = sub_matrix(&self.cov, &rest, &rest) - w.transpose() * w;
        let post = factor(&cond)?.ln_determinant();
        Ok((0.5 * (prior - post)).max(0.0))
    }

    fn check_subset(&self, s: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.len()];
        for &i in s {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("bad or repeated location index {i}")));
            }
        }
        Ok(())
    }
}

/// Length scales searched by [`fit_kernel`]: log-spaced over [50, 2000] m.
pub fn length_scale_grid() -> Vec<f64> {
    log_grid(50.0, 2000.0, 12)
}

/// Variances searched by [`fit_kernel`]: log-spaced over [1, 10⁴].
pub fn variance_grid() -> Vec<f64> {
    log_grid(1.0, 1e4, 81)
}

fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|j| lo * (hi / lo).powf(j as f64 / (k - 1) as f64)).collect()
}

/// Generalized-least-squares estimate of a constant mean under `kernel`,
/// i.e. the mean maximizing the marginal likelihood.
pub fn gls_mean(kernel: &Kernel, locations: &[Location], values: &[f64]) -> Result<f64> {
    let field = GaussianField::from_kernel(locations, 0.0, kernel);
    let chol = factor(&field.cov)?;
    let r1 = chol.solve(&DVector::from_element(values.len(), 1.0));
    Ok(DVector::from_column_slice(values).dot(&r1) / r1.sum())
}

/// Log marginal likelihood of zero-noise observations `values` at
/// `locations` under a GP with the given kernel and its GLS mean.
pub fn log_likelihood(kernel: &Kernel, locations: &[Location], values: &[f64]) -> Result<f64> {
    let mean = gls_mean(kernel, locations, values)?;
    let field = GaussianField::from_kernel(locations, mean, kernel);
    let chol = factor(&field.cov)?;
    let y = DVector::from_fn(values.len(), |i, _| values[i] - mean);
    let alpha = chol.solve(&y);
    let n = values.len() as f64;
    Ok(-0.5 * y.dot(&alpha) - 0.5 * chol.ln_determinant() - 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}

/// Kernel fitted to samples by maximum marginal likelihood over the fixed
/// grid of kinds, length scales and variances, with the constant mean
/// profiled out (see [`gls_mean`]). Constant samples yield the
/// smallest-variance candidate.
pub fn fit_kernel(locations: &[Location], values: &[f64]) -> Result<Kernel> {
    if locations.len() != values.len() || values.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "kernel fitting needs ≥ 3 samples with locations, got {} values and {} locations",
            values.len(),
            locations.len()
        )));
    }
    let n = values.len();
    let ls = length_scale_grid();
    let vs = variance_grid();
    if values.iter().all(|&v| v == values[0]) {
        return Kernel::exponential(vs[0], ls[0]);
    }
    let y = DVector::from_column_slice(values);
    let ones = DVector::from_element(n, 1.0);
    // The covariance is σ²·R, so one factorization of R per (kind, ℓ)
    // serves every variance: log L = −q/(2σ²) − ½(n ln σ² + ln|R|) − const,
    // with q the R⁻¹-norm of the residual about the GLS mean.
    let mut best: Option<(f64, Kernel)> = None;
    for kind in [KernelKind::Exponential, KernelKind::Matern] {
        for &l in &ls {
            let r = DMatrix::from_fn(n, n, |i, j| correlation(kind, locations[i].distance(&locations[j]) / l));
            let Ok(chol) = factor(&r) else { continue };
            let r1 = chol.solve(&ones);
            let one_r1 = ones.dot(&r1);
            let mean = y.dot(&r1) / one_r1;
            let resid = y.add_scalar(-mean);
            let q = resid.dot(&chol.solve(&resid));
            let ln_det = chol.ln_determinant();
            for &v in &vs {
                let ll = -0.5 * q / v - 0.5 * (n as f64 * v.ln() + ln_det);
                if best.as_ref().is_none_or(|b| ll > b.0) {
                    best = Some((ll, Kernel { kind, variance: v, length_scale: l }));
                }
            }
        }
    }
    best.map(|b| b.1).ok_or(Error::SingularCovariance)
}
