use approx::assert_abs_diff_eq;
use gcortop::instance::{Instance, Location, MotionModel, Route, Solution, Vehicle};
use gcortop::metrics::{evaluate_mission, evaluate_mission_at, pcov, prediction_errors, PRIOR_MEAN};
use gcortop::spatial_gp::{FieldSample, GaussianField, Kernel};
use gcortop::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid_instance(side: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<Location> =
        (0..side * side).map(|k| Location::new(k, 100.0 * (k % side) as f64, 100.0 * (k / side) as f64)).collect();
    let priorities = (0..side * side).map(|_| rng.random_range(0..=9) as f64).collect();
    Instance::new(
        "metrics",
        targets,
        priorities,
        vec![Location::new(0, -100.0, 0.0)],
        vec![Vehicle { id: 0, start: 0, end: 0, t_max: 1e6 }],
        MotionModel::uav(7.0, 2.0),
        2.0,
    )
    .unwrap()
}

fn visiting(inst: &Instance, stops: Vec<usize>) -> Solution {
    Solution { routes: vec![Route::with_stops(0, stops, inst)] }
}

fn true_field(inst: &Instance, seed: u64) -> FieldSample {
    let field = GaussianField::from_kernel(&inst.targets, 0.0, &Kernel::matern(1.0, 300.0).unwrap());
    field.sample_prior(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// Covered priority by brute force over squared coordinates.
fn pcov_oracle(inst: &Instance, sampled: &[usize], d: f64) -> f64 {
    let mut covered = 0.0;
    for (i, t) in inst.targets.iter().enumerate() {
        if sampled.iter().any(|&j| {
            let s = &inst.targets[j];
            (t.x - s.x).powi(2) + (t.y - s.y).powi(2) <= d * d + 1e-6
        }) {
            covered += inst.priorities[i];
        }
    }
    covered / inst.priorities.iter().sum::<f64>()
}

#[test]
fn pcov_limits() {
    let inst = grid_instance(5, 1);
    let all: Vec<usize> = (0..25).collect();
    for d in [0.0, 100.0, 300.0] {
        assert_eq!(pcov(&inst, &all, d).unwrap(), 1.0);
        assert_eq!(pcov(&inst, &[], d).unwrap(), 0.0);
    }
    let s = [0, 7, 24];
    let visited: f64 = s.iter().map(|&i| inst.priorities[i]).sum();
    assert_abs_diff_eq!(pcov(&inst, &s, 0.0).unwrap(), visited / inst.total_priority(), epsilon = 1e-12);
    assert!(pcov(&inst, &s, -1.0).is_err());
}

#[test]
fn pcov_matches_brute_force() {
    let inst = grid_instance(6, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let mut idx: Vec<usize> = (0..36).collect();
        idx.shuffle(&mut rng);
        let s = &idx[..rng.random_range(0..10)];
        for d in [0.0, 100.0, 141.5, 300.0] {
            assert_abs_diff_eq!(pcov(&inst, s, d).unwrap(), pcov_oracle(&inst, s, d), epsilon = 1e-12);
        }
    }
}

#[test]
fn zero_priority_is_rejected() {
    let inst = grid_instance(3, 4).with_priorities(vec![0.0; 9]).unwrap();
    assert!(matches!(pcov(&inst, &[0], 0.0), Err(Error::ZeroPriority)));
    assert!(matches!(prediction_errors(&[1.0], &[1.0], &[0.0]), Err(Error::ZeroPriority)));
}

#[test]
fn prediction_error_cases() {
    let truth = [10.0, 20.0, 35.0, 60.0];
    let u = [1.0, 5.0, 2.0, 0.0];
    assert_eq!(prediction_errors(&truth, &truth, &u).unwrap(), (0.0, 0.0, 0.0));
    let biased: Vec<f64> = truth.iter().map(|v| v + 1.0).collect();
    let (mae, me, wmae) = prediction_errors(&truth, &biased, &u).unwrap();
    assert_abs_diff_eq!(mae, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(me, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(wmae, 1.0, epsilon = 1e-12);
    let pred = [12.0, 14.0, 35.0, 70.0];
    let (mae, me, wmae) = prediction_errors(&truth, &pred, &[3.0; 4]).unwrap();
    assert_abs_diff_eq!(mae, wmae, epsilon = 1e-12);
    assert_abs_diff_eq!(mae, 18.0 / 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(me, 6.0 / 4.0, epsilon = 1e-12);
    let (_, _, wmae) = prediction_errors(&truth, &pred, &u).unwrap();
    assert_abs_diff_eq!(wmae, (2.0 + 30.0) / 8.0, epsilon = 1e-12);
    assert!(prediction_errors(&truth, &pred[..3], &u).is_err());
}

#[test]
fn full_sampling_interpolates_exactly() {
    let inst = grid_instance(5, 5);
    let truth = true_field(&inst, 6);
    let report = evaluate_mission(&inst, &visiting(&inst, (0..25).collect()), &truth).unwrap();
    assert!(report.mae < 1e-6, "MAE {}", report.mae);
    assert!(report.kernel.is_some());
    assert_eq!(report.pcov, vec![(0.0, 1.0), (100.0, 1.0), (300.0, 1.0)]);
}

#[test]
fn too_few_samples_predict_the_prior_mean() {
    let inst = grid_instance(4, 7);
    let truth = true_field(&inst, 8);
    let report = evaluate_mission(&inst, &visiting(&inst, vec![3, 9]), &truth).unwrap();
    assert!(report.kernel.is_none());
    let expected = prediction_errors(&truth.values, &[PRIOR_MEAN; 16], &inst.priorities).unwrap();
    assert_eq!((report.mae, report.me, report.wmae), expected);
}

#[test]
fn report_is_deterministic_and_checks_feasibility() {
    let inst = grid_instance(5, 9);
    let truth = true_field(&inst, 10);
    let sol = visiting(&inst, vec![0, 6, 12, 18, 24, 20]);
    let a = evaluate_mission_at(&inst, &sol, &truth, &[300.0, 0.0, 100.0, 0.0]).unwrap();
    let b = evaluate_mission(&inst, &sol, &truth).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.pcov_at(100.0), Some(pcov(&inst, &sol.sampled(), 100.0).unwrap()));
    let bad = Solution { routes: vec![Route { vehicle: 0, stops: vec![1, 1], duration: 0.0 }] };
    assert!(evaluate_mission(&inst, &bad, &truth).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn report_invariants(seed in 0u64..500, k in 0usize..12) {
        let inst = grid_instance(4, seed);
        prop_assume!(inst.total_priority() > 0.0);
        let truth = true_field(&inst, seed + 1);
        let mut idx: Vec<usize> = (0..16).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let sol = visiting(&inst, idx[..k].to_vec());
        let r = evaluate_mission(&inst, &sol, &truth).unwrap();
        prop_assert!(r.me.abs() <= r.mae + 1e-12);
        prop_assert!(r.wmae >= 0.0);
        let mut prev = 0.0;
        for &(_, p) in &r.pcov {
            prop_assert!((0.0..=1.0).contains(&p) && p >= prev);
            prev = p;
        }
        // Adding a sample never lowers coverage.
        let more = sol.sampled().into_iter().chain([idx[k]]).collect::<Vec<_>>();
        for d in [0.0, 100.0, 300.0] {
            prop_assert!(pcov(&inst, &more, d).unwrap() >= pcov(&inst, &sol.sampled(), d).unwrap());
        }
    }
}
