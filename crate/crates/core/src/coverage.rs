//! Discretized spatial-correlation model: covering neighborhoods `C_i` and
//! coverage weights `w_ji` (the share of target `i`'s information obtained by
//! sampling target `j`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    /// `w_ji = w_bar · d_min / d_ji` inside the radius.
    Idw { w_bar: f64, d_min: f64 },
    /// `w_ji = 1 / |C_i|`.
    Uniform,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverageWeights {
    /// `neighborhoods[i]` lists `(j, w_ji)` for every `j ∈ C_i`.
    neighborhoods: Vec<Vec<(usize, f64)>>,
    /// Reverse index: `informs[j]` lists `(i, w_ji)` for every `i` with `j ∈ C_i`.
    #[serde(skip)]
    informs: Vec<Vec<(usize, f64)>>,
    pub radius: f64,
    pub scheme: WeightScheme,
}

fn transpose(lists: &[Vec<(usize, f64)>]) -> Vec<Vec<(usize, f64)>> {
    let mut out = vec![Vec::new(); lists.len()];
    for (i, list) in lists.iter().enumerate() {
        for &(j, w) in list {
            out[j].push((i, w));
        }
    }
    out
}

impl CoverageWeights {
    fn from_neighborhoods(neighborhoods: Vec<Vec<(usize, f64)>>, radius: f64, scheme: WeightScheme) -> Self {
        let informs = transpose(&neighborhoods);
        CoverageWeights { neighborhoods, informs, radius, scheme }
    }

    /// Explicit weights from `(j, i, w_ji)` triples.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut neighborhoods = vec![Vec::new(); n];
        for &(j, i, w) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidParameter(format!("bad weight pair ({j}, {i})")));
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::InvalidParameter(format!("weight {w} outside (0, 1]")));
            }
            neighborhoods[i].push((j, w));
        }
        Ok(Self::from_neighborhoods(neighborhoods, 0.0, WeightScheme::Uniform))
    }

    /// Weights with no neighborhoods at all.
    pub fn empty(n: usize) -> Self {
        Self::from_neighborhoods(vec![Vec::new(); n], 0.0, WeightScheme::Uniform)
    }

    /// Inverse-distance weights: `w̄` at distance `d_min`, decaying as `1/d`
    /// out to `radius`. Weights are clamped to at most 1 for pairs closer
    /// than `w̄ · d_min`.
    pub fn build_idw(inst: &Instance, w_bar: f64, d_min: f64, radius: f64) -> Result<Self> {
        if !(w_bar > 0.0 && w_bar < 1.0) {
            return Err(Error::InvalidParameter(format!("w_bar = {w_bar} must lie in (0, 1)")));
        }
        if !(d_min > 0.0 && d_min <= radius) {
            return Err(Error::InvalidParameter(format!("need 0 < d_min ({d_min}) ≤ radius ({radius})")));
        }
        let n = inst.num_targets();
        let mut neighborhoods = vec![Vec::new(); n];
        for (i, nh) in neighborhoods.iter_mut().enumerate() {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = inst.dist(j, i);
                if d == 0.0 {
                    return Err(Error::CoincidentTargets(i.min(j), i.max(j)));
                }
                if d <= radius {
                    nh.push((j, (w_bar * d_min / d).min(1.0)));
                }
            }
        }
        Ok(Self::from_neighborhoods(neighborhoods, radius, WeightScheme::Idw { w_bar, d_min }))
    }

    /// Uniform weights `1/|C_i|` over all targets within `radius`.
    pub fn build_uniform(inst: &Instance, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
        }
        let n = inst.num_targets();
        let members = |i: usize| (0..n).filter(move |&j| j != i && inst.dist(j, i) <= radius);
        Ok(Self::uniform_from(n, members, radius))
    }

    /// Uniform weights over the immediate neighbors: the ≤ 8 surrounding
    /// cells on a grid, otherwise all targets within 1.5× the smallest
    /// inter-target distance.
    pub fn build_immediate(inst: &Instance) -> Result<Self> {
        let n = inst.num_targets();
        if let Some(grid) = inst.grid_layout() {
            let cells = grid.cells.clone();
            let members = move |i: usize| {
                let (ci, ri) = cells[i];
                let cells = cells.clone();
                (0..n).filter(move |&j| {
                    let (cj, rj) = cells[j];
                    j != i && ci.abs_diff(cj) <= 1 && ri.abs_diff(rj) <= 1
                })
            };
            return Ok(Self::uniform_from(n, members, grid.spacing * std::f64::consts::SQRT_2));
        }
        let min_d = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| inst.dist(i, j))
            .fold(f64::INFINITY, f64::min);
        if !min_d.is_finite() {
            return Ok(Self::empty(n));
        }
        if min_d == 0.0 {
            return Err(Error::InvalidParameter("coincident targets have no immediate neighborhood".into()));
        }
        Self::build_uniform(inst, 1.5 * min_d)
    }

    fn uniform_from<I, F>(n: usize, members: F, radius: f64) -> Self
    where
        F: Fn(usize) -> I,
        I: Iterator<Item = usize>,
    {
        let neighborhoods = (0..n)
            .map(|i| {
                let js: Vec<usize> = members(i).collect();
                let w = 1.0 / js.len() as f64;
                js.into_iter().map(|j| (j, w)).collect()
            })
            .collect();
        Self::from_neighborhoods(neighborhoods, radius, WeightScheme::Uniform)
    }

    pub fn num_targets(&self) -> usize {
        self.neighborhoods.len()
    }

    /// `C_i` with weights `w_ji`.
    #[inline]
    pub fn neighborhood(&self, i: usize) -> &[(usize, f64)] {
        &self.neighborhoods[i]
    }

    /// Targets whose information sampling `j` contributes to, with `w_ji`.
    #[inline]
    pub fn informs(&self, j: usize) -> &[(usize, f64)] {
        &self.informs[j]
    }

    /// The coverers of `i` (the members of `C_i`), recovered from the
    /// reverse index.
    pub fn coverers_of(&self, i: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = self
            .informs
            .iter()
            .enumerate()
            .filter_map(|(j, list)| list.iter().find(|&&(k, _)| k == i).map(|&(_, w)| (j, w)))
            .collect();
        out.sort_by_key(|p| p.0);
        out
    }

    /// Weight `w_ji`, zero when `j ∉ C_i`.
    pub fn weight(&self, j: usize, i: usize) -> f64 {
        self.neighborhoods[i].iter().find(|p| p.0 == j).map_or(0.0, |p| p.1)
    }

    /// Restores the reverse index after deserialization.
    pub fn rebuild_index(&mut self) {
        self.informs = transpose(&self.neighborhoods);
    }

    /// Weights restricted to a subset of targets, re-indexed in `keep` order.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.num_targets()];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let neighborhoods = keep
            .iter()
            .map(|&i| {
                self.neighborhoods[i]
                    .iter()
                    .filter(|(j, _)| pos[*j] != usize::MAX)
                    .map(|&(j, w)| (pos[j], w))
                    .collect()
            })
            .collect();
        Self::from_neighborhoods(neighborhoods, self.radius, self.scheme)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Location, MotionModel, Vehicle};
    use approx::assert_abs_diff_eq;

    pub(crate) fn grid(cols: usize, rows: usize, spacing: f64) -> Instance {
        let targets = (0..cols * rows)
            .map(|k| Location::new(k, (k % cols) as f64 * spacing, (k / cols) as f64 * spacing))
            .collect();
        Instance::new(
            "grid",
            targets,
            vec![1.0; cols * rows],
            vec![Location::new(0, -spacing, 0.0)],
            vec![Vehicle { id: 0, start: 0, end: 0, t_max: 1000.0 }],
            MotionModel::uav(7.0, 2.0),
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn idw_reference_values() {
        let inst = grid(6, 1, 100.0);
        let w = CoverageWeights::build_idw(&inst, 0.5, 100.0, 400.0).unwrap();
        assert_abs_diff_eq!(w.weight(1, 0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.weight(2, 0), 0.25, epsilon = 1e-12);
        assert_eq!(w.weight(5, 0), 0.0, "500 m lies outside the 400 m radius");
        assert!(w.neighborhood(0).iter().all(|&(j, _)| j != 5 && j != 0));
    }

    #[test]
    fn idw_decreasing_and_clamped() {
        let inst = Instance::new(
            "close",
            vec![Location::new(0, 0.0, 0.0), Location::new(1, 10.0, 0.0), Location::new(2, 30.0, 0.0)],
            vec![1.0; 3],
            vec![Location::new(0, 0.0, 0.0)],
            vec![Vehicle { id: 0, start: 0, end: 0, t_max: 10.0 }],
            MotionModel::uav(7.0, 2.0),
            2.0,
        )
        .unwrap();
        let w = CoverageWeights::build_idw(&inst, 0.5, 100.0, 400.0).unwrap();
        assert_eq!(w.weight(1, 0), 1.0);
        assert!(w.weight(2, 0) <= 1.0);
        let g = grid(5, 5, 100.0);
        let w = CoverageWeights::build_idw(&g, 0.5, 100.0, 400.0).unwrap();
        let mut pairs: Vec<(f64, f64)> = w.neighborhood(12).iter().map(|&(j, wt)| (g.dist(j, 12), wt)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for p in pairs.windows(2) {
            if p[1].0 > p[0].0 + 1e-9 {
                assert!(p[1].1 < p[0].1);
            }
        }
    }

    #[test]
    fn idw_rejects_coincident_targets_and_bad_params() {
        let inst = Instance::new(
            "dup",
            vec![Location::new(0, 0.0, 0.0), Location::new(1, 0.0, 0.0)],
            vec![1.0; 2],
            vec![Location::new(0, 0.0, 0.0)],
            vec![Vehicle { id: 0, start: 0, end: 0, t_max: 10.0 }],
            MotionModel::uav(7.0, 2.0),
            2.0,
        )
        .unwrap();
        assert!(matches!(CoverageWeights::build_idw(&inst, 0.5, 100.0, 400.0), Err(Error::CoincidentTargets(0, 1))));
        let g = grid(2, 2, 100.0);
        assert!(CoverageWeights::build_idw(&g, 1.0, 100.0, 400.0).is_err());
        assert!(CoverageWeights::build_idw(&g, 0.5, 500.0, 400.0).is_err());
    }

    #[test]
    fn benchmark_geometry_relaxes_the_unit_sum() {
        let g = grid(9, 9, 100.0);
        let w = CoverageWeights::build_idw(&g, 0.5, 100.0, 400.0).unwrap();
        let center = 4 * 9 + 4;
        assert_eq!(w.neighborhood(center).len(), 48);
        let total: f64 = w.neighborhood(center).iter().map(|p| p.1).sum();
        assert!(total > 1.0, "interior sum {total}");
    }

    #[test]
    fn uniform_weights() {
        let g = grid(3, 3, 100.0);
        let w = CoverageWeights::build_uniform(&g, 100.0).unwrap();
        let center = 4;
        assert_eq!(w.neighborhood(center).len(), 4);
        assert!(w.neighborhood(center).iter().all(|p| (p.1 - 0.25).abs() < 1e-15));
        let w2 = CoverageWeights::build_uniform(&grid(5, 5, 100.0), 200.0).unwrap();
        assert_eq!(w2.neighborhood(12).len(), 12);
        assert_abs_diff_eq!(w2.neighborhood(12)[0].1, 1.0 / 12.0, epsilon = 1e-15);
        for i in 0..25 {
            let s: f64 = w2.neighborhood(i).iter().map(|p| p.1).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_isolated_target_has_empty_neighborhood() {
        let inst = Instance::new(
            "far",
            vec![Location::new(0, 0.0, 0.0), Location::new(1, 1000.0, 0.0)],
            vec![1.0; 2],
            vec![Location::new(0, 0.0, 0.0)],
            vec![Vehicle { id: 0, start: 0, end: 0, t_max: 10.0 }],
            MotionModel::uav(7.0, 2.0),
            2.0,
        )
        .unwrap();
        let w = CoverageWeights::build_uniform(&inst, 100.0).unwrap();
        assert!(w.neighborhood(0).is_empty());
        assert!(w.coverers_of(0).is_empty());
    }

    #[test]
    fn immediate_neighbors_on_grid() {
        let g = grid(4, 4, 100.0);
        let w = CoverageWeights::build_immediate(&g).unwrap();
        assert_eq!(w.neighborhood(5).len(), 8);
        assert_eq!(w.neighborhood(0).len(), 3);
        assert_abs_diff_eq!(w.neighborhood(0)[0].1, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn coverers_match_neighborhoods() {
        let g = grid(5, 4, 100.0);
        let w = CoverageWeights::build_idw(&g, 0.5, 100.0, 250.0).unwrap();
        for i in 0..g.num_targets() {
            let mut nh = w.neighborhood(i).to_vec();
            nh.sort_by_key(|p| p.0);
            assert_eq!(w.coverers_of(i), nh);
            assert_eq!(w.informs(i).len(), nh.len(), "Euclidean symmetry");
        }
        assert!(CoverageWeights::empty(3).coverers_of(1).is_empty());
    }
}
