use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

/// How an iteration ended, for scoring the strategies that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    NewBest,
    Better,
    AcceptedWorse,
    Rejected,
}

/// Roulette-wheel weights of one strategy family.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyStats {
    pub weights: Vec<f64>,
    pub scores: Vec<f64>,
    pub uses: Vec<usize>,
}

impl StrategyStats {
    pub fn new(k: usize) -> Self {
        StrategyStats { weights: vec![1.0; k], scores: vec![0.0; k], uses: vec![0; k] }
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        WeightedIndex::new(&self.weights).expect("weights stay positive").sample(rng)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// Records one use; `sigma` holds the scores for new best, better than
    /// current and accepted-worse outcomes.
    pub fn record(&mut self, k: usize, outcome: Outcome, sigma: &[f64; 3]) {
        self.uses[k] += 1;
        self.scores[k] += match outcome {
            Outcome::NewBest => sigma[0],
            Outcome::Better => sigma[1],
            Outcome::AcceptedWorse => sigma[2],
            Outcome::Rejected => 0.0,
        };
    }
}

/// Segment-end update `w ← (1−r)·w + r·score/uses` for every strategy used
/// in the segment; scores and counts restart.
pub fn adapt_weights(stats: &mut StrategyStats, reaction: f64) {
    for k in 0..stats.weights.len() {
        if stats.uses[k] > 0 {
            let w = (1.0 - reaction) * stats.weights[k] + reaction * stats.scores[k] / stats.uses[k] as f64;
            stats.weights[k] = w.max(f64::MIN_POSITIVE);
        }
        stats.scores[k] = 0.0;
        stats.uses[k] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const SIGMA: [f64; 3] = [33.0, 9.0, 13.0];

    #[test]
    fn unused_strategy_keeps_weight() {
        let mut s = StrategyStats::new(3);
        s.weights[2] = 4.2;
        s.record(0, Outcome::NewBest, &SIGMA);
        adapt_weights(&mut s, 0.1);
        assert_eq!(s.weights[2], 4.2);
        assert_abs_diff_eq!(s.weights[0], 0.9 + 3.3, epsilon = 1e-12);
        assert_eq!(s.uses, vec![0, 0, 0]);
    }

    #[test]
    fn new_bests_score_highest() {
        let mut s = StrategyStats::new(4);
        for (k, o) in [Outcome::NewBest, Outcome::Better, Outcome::AcceptedWorse, Outcome::Rejected].into_iter().enumerate() {
            s.record(k, o, &SIGMA);
        }
        adapt_weights(&mut s, 0.1);
        let best = (0..4).max_by(|&a, &b| s.weights[a].total_cmp(&s.weights[b])).unwrap();
        assert_eq!(best, 0);
        assert!(s.weights[3] < 1.0 && s.weights[3] > 0.0);
        assert_abs_diff_eq!(s.probabilities().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
