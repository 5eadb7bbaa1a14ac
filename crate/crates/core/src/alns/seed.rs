use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::instance::{Instance, Location};

/// k-means++ seeding: one seed target per vehicle, drawn from the targets the
/// vehicle can reach on a single-stop tour with probability proportional to
/// the squared distance to the closest depot or already chosen seed.
///
/// A vehicle gets `None` when it cannot reach any remaining target or every
/// remaining candidate coincides with a depot or seed.
pub fn seed_routes<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Vec<Option<usize>> {
    let mut anchors: Vec<Location> = Vec::new();
    for v in &inst.vehicles {
        anchors.push(inst.depots[v.start]);
        anchors.push(inst.depots[v.end]);
    }
    let mut taken = vec![false; inst.num_targets()];
    let mut seeds = Vec::with_capacity(inst.num_vehicles());
    for m in 0..inst.num_vehicles() {
        let cand: Vec<usize> = inst.reachable_targets(m).into_iter().filter(|&i| !taken[i]).collect();
        let weights: Vec<f64> = cand
            .iter()
            .map(|&i| {
                let t = &inst.targets[i];
                anchors.iter().map(|a| t.distance(a).powi(2)).fold(f64::INFINITY, f64::min)
            })
            .collect();
        let seed = WeightedIndex::new(&weights).ok().map(|w| cand[w.sample(rng)]);
        if let Some(i) = seed {
            taken[i] = true;
            anchors.push(inst.targets[i]);
        }
        seeds.push(seed);
    }
    seeds
}
