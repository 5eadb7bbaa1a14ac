use rand::Rng;

/// Reheating temperature: reset to `Ψ₀ = 1` on a new best, multiplied by
/// `ψ > 1` after every other iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Temperature {
    pub psi: f64,
    pub heat: f64,
}

pub const PSI0: f64 = 1.0;

impl Temperature {
    /// Calibrates `ψ` so that a loss of `delta_ref` is accepted with
    /// probability one half after `kappa` non-improving iterations. The
    /// factor is kept strictly above one even when `delta_ref ≤ ln 2`.
    pub fn calibrated(delta_ref: f64, kappa: usize) -> Self {
        let target = delta_ref.abs() / std::f64::consts::LN_2;
        let heat = target.powf(1.0 / kappa.max(1) as f64).max(1.0 + 1e-6);
        Temperature { psi: PSI0, heat }
    }

    pub fn reset(&mut self) {
        self.psi = PSI0;
    }

    pub fn heat_up(&mut self) {
        self.psi *= self.heat;
    }

    /// `P(δ) = exp(−δ/Ψ)`.
    pub fn probability(&self, delta: f64) -> f64 {
        (-delta.abs() / self.psi).exp()
    }

    /// Acceptance threshold `Ī = I_best + Ψ ln p` for a uniform draw `p`;
    /// accepting exactly the candidates with `I ≥ Ī` is equivalent to
    /// accepting with probability `exp(−δ/Ψ)`.
    pub fn threshold(&self, best: f64, p: f64) -> f64 {
        best + self.psi * p.ln()
    }
}

/// Decides one candidate: improvements over the best are always taken,
/// anything else with probability `exp(−|I_best − I_new|/Ψ)`. Resets `Ψ` on
/// improvement and heats it otherwise.
pub fn accept<R: Rng + ?Sized>(candidate: f64, best: f64, temp: &mut Temperature, rng: &mut R) -> bool {
    if candidate > best {
        temp.reset();
        return true;
    }
    let p: f64 = rng.random();
    let ok = p < temp.probability(best - candidate);
    temp.heat_up();
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn probabilities() {
        let t = Temperature { psi: PSI0, heat: 1.01 };
        assert_eq!(t.probability(0.0), 1.0);
        assert_abs_diff_eq!(t.probability(std::f64::consts::LN_2), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn half_after_kappa_iterations() {
        let delta = 37.5;
        let mut t = Temperature::calibrated(delta, 400);
        for _ in 0..400 {
            t.heat_up();
        }
        assert_abs_diff_eq!(t.probability(delta), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn monotone_in_temperature() {
        let mut prev = 0.0;
        for k in 0..50 {
            let t = Temperature { psi: 1.0 + k as f64, heat: 1.1 };
            let p = t.probability(5.0);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn threshold_limits() {
        let cold = Temperature { psi: PSI0, heat: 1.1 };
        assert!(cold.threshold(100.0, 1e-3) > 93.0);
        let hot = Temperature { psi: 1e12, heat: 1.1 };
        assert!(hot.threshold(100.0, 1e-3) < -1e12);
        assert_eq!(cold.threshold(100.0, 1.0), 100.0);
    }
}
