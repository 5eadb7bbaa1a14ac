use std::collections::HashSet;

use gcortop::instance::InstanceFile;
use gcortop::instance_gen::{
    generate, generate_small_suite, generate_with, read_priority_grid, small_suite_specs, suite_specs,
    GenSpec, AREAS, DURATIONS, FLEETS,
};
use gcortop::spatial_gp::KernelKind;

fn spec(area: (f64, f64), vehicles: usize, seed: u64) -> GenSpec {
    GenSpec {
        name: "t".into(),
        area,
        spacing: 100.0,
        vehicles,
        t_max: 900.0,
        kernel_kind: KernelKind::Matern,
        seed,
    }
}

#[test]
fn grid_sizes_follow_the_area() {
    for (area, n) in [((1500.0, 1500.0), 225), ((1500.0, 2000.0), 300), ((2500.0, 2500.0), 625)] {
        let g = generate(&spec(area, 1, 1)).unwrap();
        assert_eq!(g.instance.num_targets(), n);
        assert_eq!(g.true_field.values.len(), n);
    }
}

#[test]
fn targets_form_a_regular_grid() {
    let g = generate(&spec((1500.0, 2000.0), 2, 2)).unwrap();
    let layout = g.instance.grid_layout().expect("grid instance");
    assert_eq!((layout.cols, layout.rows), (15, 20));
    assert_eq!(layout.spacing, 100.0);
    for t in &g.instance.targets {
        assert!(t.x > 0.0 && t.x < 1500.0 && t.y > 0.0 && t.y < 2000.0);
    }
}

#[test]
fn depots_lie_on_the_border() {
    for seed in 0..10 {
        let g = generate(&spec((2000.0, 2000.0), 3, seed)).unwrap();
        assert_eq!(g.instance.num_vehicles(), 3);
        for d in &g.instance.depots {
            let on_edge = d.x == 50.0 || d.x == 1950.0 || d.y == 50.0 || d.y == 1950.0;
            assert!(on_edge, "depot at ({}, {})", d.x, d.y);
            assert!(g.instance.targets.iter().any(|t| t.x == d.x && t.y == d.y));
        }
    }
}

#[test]
fn priorities_are_clustered_integers() {
    for seed in 0..20 {
        let g = generate(&spec((1500.0, 1500.0), 1, seed)).unwrap();
        let u = &g.instance.priorities;
        assert!(u.iter().all(|&v| v >= 1.0 && v <= 100.0 && v.fract() == 0.0));
        assert_eq!(u.iter().copied().fold(0.0, f64::max), 100.0);
        // Clustered: most of the area sits near the background.
        let low = u.iter().filter(|&&v| v <= 20.0).count();
        assert!(low * 3 >= u.len(), "only {low} low cells");
    }
}

#[test]
fn true_field_is_normalized() {
    let g = generate(&spec((1500.0, 1500.0), 1, 4)).unwrap();
    let z = &g.true_field.values;
    assert!(z.iter().all(|&v| (0.0..=100.0).contains(&v)));
    assert!((z.iter().sum::<f64>() / z.len() as f64 - 50.0).abs() < 1e-9);
    assert!((200.0..=600.0).contains(&g.kernel.length_scale));
    assert_eq!(g.kernel.kind, KernelKind::Matern);
}

#[test]
fn generation_is_deterministic() {
    let s = spec((1500.0, 1500.0), 2, 99);
    let a = serde_json::to_string(&generate(&s).unwrap().to_file()).unwrap();
    let b = serde_json::to_string(&generate(&s).unwrap().to_file()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&generate(&spec((1500.0, 1500.0), 2, 100)).unwrap().to_file()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn instance_file_round_trips_with_true_field() {
    let g = generate(&spec((1500.0, 1500.0), 2, 5)).unwrap();
    let text = serde_json::to_string(&g.to_file()).unwrap();
    assert!(text.contains("\"true_field\""));
    let file: InstanceFile = serde_json::from_str(&text).unwrap();
    assert_eq!(file.true_field.as_deref(), Some(g.true_field.values.as_slice()));
    let inst = file.to_instance().unwrap();
    assert_eq!(inst.targets, g.instance.targets);
    assert_eq!(inst.priorities, g.instance.priorities);
}

#[test]
fn suite_composition() {
    let specs = suite_specs(7);
    assert_eq!(specs.len(), 450);
    for &area in &AREAS {
        assert_eq!(specs.iter().filter(|s| s.area == area).count(), 90);
    }
    for &m in &FLEETS {
        for &t in &DURATIONS {
            assert_eq!(specs.iter().filter(|s| s.vehicles == m && s.t_max == t).count(), 30);
        }
    }
    let kinds = specs.iter().filter(|s| s.kernel_kind == KernelKind::Exponential).count();
    assert_eq!(kinds, 225);
    assert_eq!(specs.iter().map(|s| &s.name).collect::<HashSet<_>>().len(), 450);
    assert_eq!(specs.iter().map(|s| s.seed).collect::<HashSet<_>>().len(), 450);
    assert_eq!(suite_specs(7), specs);
}

#[test]
fn every_suite_area_generates_valid_instances() {
    // One instance per area keeps this fast; the generator is the same code
    // path for all 90 variations of an area.
    for s in suite_specs(8).iter().step_by(90) {
        let g = generate(s).unwrap();
        let (c, r) = s.grid();
        assert_eq!(g.instance.num_targets(), c * r);
        assert!((225..=625).contains(&g.instance.num_targets()));
        assert!(g.instance.vehicles.iter().all(|v| v.t_max == s.t_max));
    }
}

#[test]
fn small_suite_composition() {
    let specs = small_suite_specs(1);
    assert!(specs.len() >= 55);
    let suite = generate_small_suite(1).unwrap();
    let sizes: Vec<usize> = suite.iter().map(|g| g.instance.num_targets()).collect();
    assert_eq!(*sizes.iter().min().unwrap(), 16);
    assert_eq!(*sizes.iter().max().unwrap(), 49);
    for g in &suite {
        let t = g.instance.vehicles[0].t_max;
        assert!((100.0..=250.0).contains(&t));
        assert!((1..=2).contains(&g.instance.num_vehicles()));
    }
    assert!(suite.iter().filter(|g| g.instance.num_vehicles() == 1).count() >= 20);
}

#[test]
fn imported_priority_grid() {
    let csv = "1, 2, 3\n4, 5, 6\n";
    let (cols, rows, u) = read_priority_grid(csv.as_bytes()).unwrap();
    assert_eq!((cols, rows), (3, 2));
    // The top row of the raster is the northern row of the grid.
    assert_eq!(u, vec![4.0, 5.0, 6.0, 1.0, 2.0, 3.0]);
    let g = generate_with(&spec((300.0, 200.0), 1, 1), Some(u.clone())).unwrap();
    assert_eq!(g.instance.priorities, u);
    assert!(generate_with(&spec((300.0, 300.0), 1, 1), Some(u)).is_err());

    for bad in ["1,2\n3\n", "1,x\n", "1,-2\n", ""] {
        assert!(read_priority_grid(bad.as_bytes()).is_err(), "{bad:?}");
    }
    match read_priority_grid("1,2\n3,oops\n".as_bytes()) {
        Err(gcortop::Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}
