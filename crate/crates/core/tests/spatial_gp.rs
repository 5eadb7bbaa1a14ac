use approx::assert_abs_diff_eq;
use gcortop::spatial_gp::{
    fit_kernel, gls_mean, length_scale_grid, log_likelihood, variance_grid, FieldSample, GaussianField, Kernel, KernelKind,
};
use gcortop::{Error, Location};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn line(n: usize, step: f64) -> Vec<Location> {
    (0..n).map(|k| Location::new(k, step * k as f64, 0.0)).collect()
}

fn grid(side: usize) -> Vec<Location> {
    (0..side * side).map(|k| Location::new(k, 100.0 * (k % side) as f64, 100.0 * (k / side) as f64)).collect()
}

fn scattered(seed: u64, n: usize) -> Vec<Location> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|k| Location::new(k, rng.random_range(0.0..800.0), rng.random_range(0.0..800.0))).collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn gauss_solve(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let k = b[0].len();
    let mut m: Vec<Vec<f64>> = (0..n).map(|r| a[r].iter().chain(&b[r]).copied().collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for j in c..n + k {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
    }
    (0..n).map(|r| (0..k).map(|j| m[r][n + j] / m[r][r]).collect()).collect()
}

/// Determinant by elimination.
fn gauss_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        if p != c {
            m.swap(c, p);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    det
}

fn block(f: &GaussianField, rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|&r| cols.iter().map(|&c| f.cov[(r, c)]).collect()).collect()
}

/// Standard normal CDF via the Abramowitz–Stegun erf approximation
/// (absolute error below 1.5e-7).
fn phi(x: f64) -> f64 {
    let z = x.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * z);
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-z * z).exp();
    0.5 * (1.0 + erf.copysign(x))
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

#[test]
fn identity_covariance_draws_standard_normals() {
    let n = 50;
    let field = GaussianField::new(line(n, 100.0), DVector::zeros(n), DMatrix::identity(n, n)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut xs: Vec<f64> = (0..100).flat_map(|_| field.sample_raw(&mut rng).unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let len = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = phi(x);
            (f - k as f64 / len).abs().max((k as f64 + 1.0) / len - f)
        })
        .fold(0.0, f64::max);
    // Critical value at the 1% level.
    assert!(ks < 1.63 / len.sqrt(), "KS statistic {ks}");
}

#[test]
fn perfectly_correlated_points_draw_equal_values() {
    let locs = vec![Location::new(0, 10.0, 10.0), Location::new(1, 10.0, 10.0)];
    let field = GaussianField::from_kernel(&locs, 5.0, &Kernel::exponential(4.0, 100.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let z = field.sample_raw(&mut rng).unwrap();
        assert_abs_diff_eq!(z[0], z[1], epsilon = 1e-3);
    }
}

#[test]
fn empirical_correlation_matches_kernel() {
    let locs = line(4, 100.0);
    for kernel in [Kernel::exponential(9.0, 300.0).unwrap(), Kernel::matern(9.0, 250.0).unwrap()] {
        let field = GaussianField::from_kernel(&locs, 20.0, &kernel);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<Vec<f64>> = (0..10_000).map(|_| field.sample_raw(&mut rng).unwrap()).collect();
        let n = draws.len() as f64;
        let mean: Vec<f64> = (0..4).map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / n).collect();
        let cov = |i: usize, j: usize| draws.iter().map(|d| (d[i] - mean[i]) * (d[j] - mean[j])).sum::<f64>() / n;
        for i in 0..4 {
            for j in i + 1..4 {
                let corr = cov(i, j) / (cov(i, i) * cov(j, j)).sqrt();
                let expect = kernel.eval(locs[i].distance(&locs[j])) / kernel.variance;
                assert!((corr - expect).abs() < 0.05, "{:?} pair ({i},{j}): {corr} vs {expect}", kernel.kind);
            }
        }
    }
}

#[test]
fn normalized_prior_sample_is_in_range() {
    let field = GaussianField::from_kernel(&grid(8), 0.0, &Kernel::matern(1.0, 300.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = field.sample_prior(&mut rng).unwrap();
    assert!(s.values.iter().all(|&v| (0.0..=100.0).contains(&v)));
    assert_abs_diff_eq!(s.values.iter().sum::<f64>() / 64.0, 50.0, epsilon = 1e-9);
    let json = serde_json::to_string(&s).unwrap();
    assert_eq!(serde_json::from_str::<FieldSample>(&json).unwrap(), s);
}

#[test]
fn posterior_interpolates_observations() {
    let locs = scattered(5, 20);
    let field = GaussianField::from_kernel(&locs, 50.0, &Kernel::exponential(100.0, 300.0).unwrap());
    let s = [3, 7, 11, 19];
    let obs = [40.0, 61.5, 55.0, 12.0];
    let post = field.posterior(&s, &obs).unwrap();
    for (k, &i) in s.iter().enumerate() {
        assert_abs_diff_eq!(post.mean[i], obs[k], epsilon = 1e-6);
        assert!(post.cov[(i, i)].abs() < 1e-5 * field.cov[(i, i)], "variance {}", post.cov[(i, i)]);
    }
    let mean_only = field.posterior_mean(&s, &obs).unwrap();
    for i in 0..20 {
        assert_abs_diff_eq!(mean_only[i], post.mean[i], epsilon = 1e-9);
    }
}

#[test]
fn empty_conditioning_set_keeps_the_prior() {
    let field = GaussianField::from_kernel(&grid(3), 7.0, &Kernel::matern(2.0, 150.0).unwrap());
    assert_eq!(field.posterior(&[], &[]).unwrap(), field);
}

#[test]
fn five_point_line_matches_elimination_oracle() {
    let locs = line(5, 120.0);
    let field = GaussianField::from_kernel(&locs, 10.0, &Kernel::matern(25.0, 200.0).unwrap());
    let s = [1, 3];
    let obs = [14.0, 3.0];
    let post = field.posterior(&s, &obs).unwrap();
    let all: Vec<usize> = (0..5).collect();
    let k_ss = block(&field, &s, &s);
    let k_sv = block(&field, &s, &all);
    let resid: Vec<Vec<f64>> = s.iter().zip(obs).map(|(&i, o)| vec![o - field.mean[i]]).collect();
    let alpha = gauss_solve(&k_ss, &resid);
    let x = gauss_solve(&k_ss, &k_sv);
    for i in 0..5 {
        let mean = field.mean[i] + (0..2).map(|r| k_sv[r][i] * alpha[r][0]).sum::<f64>();
        assert_abs_diff_eq!(post.mean[i], mean, epsilon = 1e-8);
        for j in 0..5 {
            let cov = field.cov[(i, j)] - (0..2).map(|r| k_sv[r][i] * x[r][j]).sum::<f64>();
            assert_abs_diff_eq!(post.cov[(i, j)], cov, epsilon = 1e-8);
        }
    }
}

#[test]
fn sequential_conditioning_equals_joint() {
    let locs = scattered(6, 15);
    let field = GaussianField::from_kernel(&locs, 50.0, &Kernel::exponential(30.0, 250.0).unwrap());
    let (s1, s2) = ([0, 4, 9], [2, 12]);
    let (o1, o2) = ([48.0, 57.0, 41.0], [66.0, 52.0]);
    let once = field.posterior(&[s1.as_slice(), &s2].concat(), &[o1.as_slice(), &o2].concat()).unwrap();
    let twice = field.posterior(&s1, &o1).unwrap().posterior(&s2, &o2).unwrap();
    for i in 0..15 {
        assert_abs_diff_eq!(once.mean[i], twice.mean[i], epsilon = 1e-6);
        for j in 0..15 {
            assert_abs_diff_eq!(once.cov[(i, j)], twice.cov[(i, j)], epsilon = 1e-6);
        }
    }
}

#[test]
fn arv_limits() {
    let field = GaussianField::from_kernel(&grid(4), 0.0, &Kernel::exponential(9.0, 200.0).unwrap());
    assert_eq!(field.arv(&[]).unwrap(), 0.0);
    let all: Vec<usize> = (0..16).collect();
    assert_abs_diff_eq!(field.arv(&all).unwrap(), field.cov.trace() / 16.0, epsilon = 1e-9);
    assert!(field.arv(&[0, 0]).is_err());
    assert!(field.arv(&[16]).is_err());
}

#[test]
fn arv_matches_posterior_trace() {
    let field = GaussianField::from_kernel(&scattered(7, 12), 0.0, &Kernel::matern(5.0, 300.0).unwrap());
    let s = [1, 5, 8];
    let post = field.posterior(&s, &[0.0; 3]).unwrap();
    assert_abs_diff_eq!(field.arv(&s).unwrap(), (field.cov.trace() - post.cov.trace()) / 12.0, epsilon = 1e-8);
}

#[test]
fn mutual_information_limits() {
    let field = GaussianField::from_kernel(&grid(3), 0.0, &Kernel::matern(1.0, 200.0).unwrap());
    assert_eq!(field.mutual_information(&[]).unwrap(), 0.0);
    let all: Vec<usize> = (0..9).collect();
    assert!(matches!(field.mutual_information(&all), Err(Error::EmptyComplement)));

    let diag = GaussianField::new(grid(3), DVector::zeros(9), DMatrix::from_diagonal(&DVector::from_fn(9, |i, _| 1.0 + i as f64)))
        .unwrap();
    for s in [vec![0], vec![2, 5], vec![0, 1, 2, 3, 4, 5, 6, 7]] {
        assert_abs_diff_eq!(diag.mutual_information(&s).unwrap(), 0.0, epsilon = 1e-9);
    }
}

#[test]
fn mutual_information_matches_determinant_oracle() {
    let locs = vec![
        Location::new(0, 0.0, 0.0),
        Location::new(1, 150.0, 40.0),
        Location::new(2, 90.0, 210.0),
        Location::new(3, 260.0, 180.0),
    ];
    let field = GaussianField::from_kernel(&locs, 0.0, &Kernel::exponential(4.0, 250.0).unwrap());
    for (s, a) in [(vec![0], vec![1, 2, 3]), (vec![1, 3], vec![0, 2]), (vec![0, 1, 2], vec![3])] {
        let sigma_aa = block(&field, &a, &a);
        let x = gauss_solve(&block(&field, &s, &s), &block(&field, &s, &a));
        let sigma_as = block(&field, &a, &s);
        let cond: Vec<Vec<f64>> = (0..a.len())
            .map(|r| (0..a.len()).map(|c| sigma_aa[r][c] - (0..s.len()).map(|k| sigma_as[r][k] * x[k][c]).sum::<f64>()).collect())
            .collect();
        let oracle = 0.5 * (gauss_det(&sigma_aa) / gauss_det(&cond)).ln();
        assert_abs_diff_eq!(field.mutual_information(&s).unwrap(), oracle, epsilon = 1e-8);
    }
}

#[test]
fn fitted_length_scale_recovers_truth() {
    // The largest benchmark grid; on much smaller domains the length scale
    // of an exponential field is only weakly identified.
    let locs = grid(25);
    let truth = Kernel::exponential(100.0, 300.0).unwrap();
    let field = GaussianField::from_kernel(&locs, 50.0, &truth);
    let grid_ls = length_scale_grid();
    let step = (grid_ls[1] / grid_ls[0]).ln();
    let trials = 20;
    let mut hits = 0;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + t);
        let z = field.sample_raw(&mut rng).unwrap();
        let fitted = fit_kernel(&locs, &z).unwrap();
        if (fitted.length_scale / 300.0).ln().abs() <= step {
            hits += 1;
        }
    }
    assert!(hits * 10 >= trials * 8, "{hits}/{trials} fits within one grid step");
}

#[test]
fn gls_mean_of_a_constant_shift() {
    let locs = scattered(10, 10);
    let k = Kernel::matern(4.0, 300.0).unwrap();
    assert_abs_diff_eq!(gls_mean(&k, &locs, &[7.5; 10]).unwrap(), 7.5, epsilon = 1e-9);
    // Independent locations: the GLS mean is the plain average.
    let far: Vec<Location> = (0..4).map(|i| Location::new(i, 1e6 * i as f64, 0.0)).collect();
    assert_abs_diff_eq!(gls_mean(&k, &far, &[1.0, 2.0, 3.0, 6.0]).unwrap(), 3.0, epsilon = 1e-9);
}

#[test]
fn constant_samples_fit_minimal_variance() {
    let k = fit_kernel(&grid(3), &[42.0; 9]).unwrap();
    assert_eq!(k.variance, variance_grid()[0]);
    assert!(fit_kernel(&grid(3)[..2], &[1.0, 2.0]).is_err());
}

#[test]
fn fitted_kernel_maximizes_likelihood_over_the_grid() {
    let locs = scattered(8, 25);
    let field = GaussianField::from_kernel(&locs, 50.0, &Kernel::matern(60.0, 400.0).unwrap());
    let z = field.sample_raw(&mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let fitted = fit_kernel(&locs, &z).unwrap();
    let best = log_likelihood(&fitted, &locs, &z).unwrap();
    for kind in [KernelKind::Exponential, KernelKind::Matern] {
        for &l in &length_scale_grid() {
            for &v in &variance_grid() {
                let ll = log_likelihood(&Kernel::new(kind, v, l).unwrap(), &locs, &z).unwrap();
                assert!(best >= ll - 1e-6 * ll.abs().max(1.0), "{kind:?} ℓ={l} σ²={v}: {ll} > {best}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn posterior_is_psd_and_shrinks_variance(seed in 0u64..1000, k in 1usize..10) {
        let locs = scattered(seed, 12);
        let kernel = if seed % 2 == 0 { Kernel::exponential(50.0, 200.0) } else { Kernel::matern(50.0, 200.0) }.unwrap();
        let field = GaussianField::from_kernel(&locs, 0.0, &kernel);
        let mut idx: Vec<usize> = (0..12).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let post = field.posterior(&idx[..k], &vec![1.0; k]).unwrap();
        prop_assert!((&post.cov - post.cov.transpose()).amax() < 1e-10);
        prop_assert!(min_eigenvalue(&post.cov) >= -1e-8 * kernel.variance);
        for i in 0..12 {
            prop_assert!(post.cov[(i, i)] <= field.cov[(i, i)] + 1e-12);
        }
    }

    #[test]
    fn arv_is_monotone_and_order_free(seed in 0u64..1000) {
        let field = GaussianField::from_kernel(&scattered(seed, 14), 0.0, &Kernel::exponential(10.0, 250.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chain: Vec<usize> = (0..14).collect();
        chain.shuffle(&mut rng);
        let mut prev = 0.0;
        for k in 1..=14 {
            let v = field.arv(&chain[..k]).unwrap();
            prop_assert!(v >= prev - 1e-9);
            prev = v;
        }
        let mut s = chain[..6].to_vec();
        let a = field.arv(&s).unwrap();
        let mi = field.mutual_information(&s).unwrap();
        s.reverse();
        prop_assert!((field.arv(&s).unwrap() - a).abs() < 1e-9);
        prop_assert!((field.mutual_information(&s).unwrap() - mi).abs() < 1e-8);
        prop_assert!(mi >= 0.0);
    }
}
