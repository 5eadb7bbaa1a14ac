use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase1Strategy {
    Aggregation,
    VehicleDecomposition,
}

/// Neighborhood-size bound `max/min(frac · |V|, abs)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NhBound {
    pub frac: f64,
    pub abs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub phase1_strategy: Phase1Strategy,
    pub multistarts: usize,
    pub phase1_iters: usize,
    pub phase2_iters: usize,
    pub segment_size: usize,
    pub convergence_limit: usize,
    /// `nh⁻ = max(frac · |V|, abs)`.
    pub nh_min: NhBound,
    /// `nh⁺ = min(frac · |V|, abs)`.
    pub nh_max: NhBound,
    pub q_choices: Vec<f64>,
    pub upsilon_range: (f64, f64),
    pub p_rand: f64,
    pub regret_n: usize,
    pub det: f64,
    pub kappa: usize,
    /// Adaptive scores for new best / better than current / accepted worse.
    #[serde(default = "default_sigma")]
    pub sigma: [f64; 3],
    #[serde(default = "default_reaction")]
    pub reaction: f64,
    /// Abort constructions that can no longer reach the acceptance threshold.
    #[serde(default = "default_true")]
    pub prune: bool,
}

fn default_sigma() -> [f64; 3] {
    [33.0, 9.0, 13.0]
}

fn default_reaction() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

impl SearchConfig {
    /// The quality-oriented configuration.
    pub fn standard() -> Self {
        SearchConfig {
            phase1_strategy: Phase1Strategy::Aggregation,
            multistarts: 4,
            phase1_iters: 100,
            phase2_iters: 2000,
            segment_size: 600,
            convergence_limit: 300,
            nh_min: NhBound { frac: 0.1, abs: 10 },
            nh_max: NhBound { frac: 0.3, abs: 100 },
            q_choices: vec![1.0, 2.0],
            upsilon_range: (0.15, 0.35),
            p_rand: 0.05,
            regret_n: 2,
            det: 6.0,
            kappa: 400,
            sigma: default_sigma(),
            reaction: default_reaction(),
            prune: true,
        }
    }

    /// The fast configuration.
    pub fn fast() -> Self {
        SearchConfig {
            phase1_strategy: Phase1Strategy::VehicleDecomposition,
            segment_size: 200,
            convergence_limit: 100,
            nh_min: NhBound { frac: 0.05, abs: 10 },
            nh_max: NhBound { frac: 0.2, abs: 100 },
            upsilon_range: (0.1, 0.25),
            ..Self::standard()
        }
    }

    /// `2mls` or `2mls-f`.
    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('_', "-").as_str() {
            "2mls" => Ok(Self::standard()),
            "2mls-f" => Ok(Self::fast()),
            other => Err(Error::InvalidParameter(format!("unknown search preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.multistarts == 0 || self.phase1_iters == 0 || self.phase2_iters == 0 {
            return bad("iteration and start counts must be positive".into());
        }
        if self.segment_size == 0 || self.convergence_limit == 0 || self.kappa == 0 || self.regret_n < 2 {
            return bad("segment size, convergence limit, κ must be positive and regret n ≥ 2".into());
        }
        if self.nh_min.abs == 0 || self.nh_min.abs > self.nh_max.abs || self.nh_min.frac > self.nh_max.frac {
            return bad(format!("neighborhood bounds {:?} / {:?} are inconsistent", self.nh_min, self.nh_max));
        }
        if !(0.0..=1.0).contains(&self.p_rand) {
            return bad(format!("p_rand = {} outside [0, 1]", self.p_rand));
        }
        let (lo, hi) = self.upsilon_range;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return bad(format!("segment length range ({lo}, {hi}) must satisfy 0 < lo ≤ hi < 1"));
        }
        if self.q_choices.is_empty() || self.q_choices.iter().any(|&q| !(q > 0.0)) {
            return bad("q choices must be positive and non-empty".into());
        }
        if !(self.det >= 1.0) || !(0.0..=1.0).contains(&self.reaction) {
            return bad("det must be ≥ 1 and the reaction factor in [0, 1]".into());
        }
        Ok(())
    }

    /// `(nh⁻, nh⁺)` for `n` targets. When the absolute floor exceeds the
    /// fractional ceiling (small instances) the range collapses to the
    /// floor; both ends are capped at `n`.
    pub fn nh_bounds(&self, n: usize) -> (usize, usize) {
        let lo = ((self.nh_min.frac * n as f64).ceil() as usize).max(self.nh_min.abs);
        let hi = ((self.nh_max.frac * n as f64).floor() as usize).min(self.nh_max.abs).max(lo);
        (lo.min(n).max(1), hi.min(n).max(1))
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        SearchConfig::standard().validate().unwrap();
        SearchConfig::fast().validate().unwrap();
        assert_eq!(SearchConfig::preset("2MLS-F").unwrap(), SearchConfig::fast());
        assert!(SearchConfig::preset("3mls").is_err());
    }

    #[test]
    fn neighborhood_bounds() {
        let c = SearchConfig::standard();
        assert_eq!(c.nh_bounds(625), (63, 100));
        assert_eq!(c.nh_bounds(200), (20, 60));
        assert_eq!(c.nh_bounds(16), (10, 10));
        assert_eq!(c.nh_bounds(4), (4, 4));
        assert_eq!(SearchConfig::fast().nh_bounds(400), (20, 80));
    }

    #[test]
    fn json_round_trip() {
        let c = SearchConfig::fast();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SearchConfig>(&s).unwrap(), c);
    }
}
