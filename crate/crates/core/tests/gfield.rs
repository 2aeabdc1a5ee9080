use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use signal_spectrum::corrfuncs::{corr_matrix, eval_rho, CorrelationModel};
use signal_spectrum::gfield::*;
use signal_spectrum::point::Point;
use signal_spectrum::special::phi_cdf;

const N: usize = 100_000;

fn sample_corr(z: &[(f64, f64)]) -> f64 {
    let n = z.len() as f64;
    let (ma, mb) = z.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for &(a, b) in z {
        sab += (a - ma) * (b - mb);
        saa += (a - ma).powi(2);
        sbb += (b - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

#[test]
fn nugget_draws_are_uncorrelated() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let pts = [Point::new(1.0, 0.0), Point::new(1.0001, 0.0)];
    let m = CorrelationModel::nugget();
    let pairs: Vec<(f64, f64)> = (0..N)
        .map(|_| {
            let z = sample_field(&m, &pts, &mut rng).unwrap().z;
            (z[0], z[1])
        })
        .collect();
    assert!(sample_corr(&pairs).abs() < 3.0 / (N as f64).sqrt());
}

#[test]
fn two_point_correlation_matches_model() {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let (s, r) = (0.3, 0.2);
    let pts = [Point::new(0.5, 0.5), Point::new(0.5 + r, 0.5)];
    let f = CholeskyField::new(&CorrelationModel::exponential(s), &pts).unwrap();
    let pairs: Vec<(f64, f64)> = (0..N)
        .map(|_| {
            let z = f.sample(&mut rng);
            (z[0], z[1])
        })
        .collect();
    let c = (-r / s).exp();
    let se = (1.0 - c * c) / (N as f64).sqrt();
    assert!((sample_corr(&pairs) - c).abs() < 3.0 * se);
}

#[test]
fn single_point_passes_kolmogorov_smirnov() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let f = CholeskyField::new(&CorrelationModel::exponential(1.0), &[Point::new(1.0, 1.0)]).unwrap();
    let mut z: Vec<f64> = (0..N).map(|_| f.sample(&mut rng)[0]).collect();
    z.sort_by(f64::total_cmp);
    let n = N as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = phi_cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value 1.628/√n
    assert!(d < 1.628 / n.sqrt(), "D = {d}");
}

#[test]
fn empirical_covariance_matches_matrix() {
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let pts = [
        Point::new(0.1, 0.2),
        Point::new(0.3, 0.1),
        Point::new(0.6, 0.4),
        Point::new(0.2, 0.7),
        Point::new(1.0, 1.0),
    ];
    let m = CorrelationModel::matern(0.4, 1.5);
    let f = CholeskyField::new(&m, &pts).unwrap();
    let target = corr_matrix(&m, &pts).unwrap();
    let mut acc = DMatrix::<f64>::zeros(5, 5);
    for _ in 0..N {
        let z = DVector::from_vec(f.sample(&mut rng));
        acc += &z * z.transpose();
    }
    acc /= N as f64;
    for i in 0..5 {
        for j in 0..5 {
            let c = target[(i, j)];
            // Var(Z_i Z_j) = 1 + c²
            let se = ((1.0 + c * c) / N as f64).sqrt();
            assert!((acc[(i, j)] - c).abs() < 3.0 * se, "({i},{j})");
        }
    }
}

#[test]
fn shadow_examples() {
    let s = shadow(&[0.0], 2.0, 4.0);
    assert!((s[0] - (-1f64).exp()).abs() < 1e-15);
    assert!((sigma_from_db(10.0) - 10f64.ln()).abs() < 1e-15);
}

#[test]
fn shadow_moment_identity() {
    // E S^{2/β} = 1
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let (sigma, beta) = (1.2, 3.6);
    let z: Vec<f64> = (0..N).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    let v: Vec<f64> = shadow(&z, sigma, beta).iter().map(|s| s.powf(2.0 / beta)).collect();
    let m = v.iter().sum::<f64>() / N as f64;
    let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (N as f64 - 1.0)).sqrt();
    assert!((m - 1.0).abs() < 3.0 * sd / (N as f64).sqrt());
}

#[test]
fn conditional_stats_examples() {
    let m = CorrelationModel::exponential(0.5);
    let pts = [Point::new(1.0, 0.0), Point::new(1.2, 0.0)];
    assert_eq!(conditional_stats(&m, &pts, 0, &[], &[]).unwrap(), (0.0, 1.0));
    let c = eval_rho(&m, 0.2).unwrap();
    let (mu, tau2) = conditional_stats(&m, &pts, 0, &[1], &[0.8]).unwrap();
    assert!((mu - c * 0.8).abs() < 1e-14);
    assert!((tau2 - (1.0 - c * c)).abs() < 1e-14);
}

#[test]
fn conditional_stats_against_dense_regression() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let m = CorrelationModel::exponential(0.3);
    for _ in 0..20 {
        let pts: Vec<Point> =
            (0..11).map(|_| Point::new(rng.random::<f64>() * 2.0 + 0.1, rng.random::<f64>() * 2.0)).collect();
        let cond: Vec<usize> = (1..11).collect();
        let zc: Vec<f64> = (0..10).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let (mu, tau2) = conditional_stats(&m, &pts, 0, &cond, &zc).unwrap();
        // Schur complement with an explicit inverse
        let full = corr_matrix(&m, &pts).unwrap();
        let g = full.view((1, 1), (10, 10)).into_owned();
        let gamma = full.view((1, 0), (10, 1)).into_owned();
        let inv = g.try_inverse().unwrap();
        let w = &inv * &gamma;
        let mu_o = (w.transpose() * DVector::from_vec(zc.clone()))[0];
        let tau_o = 1.0 - (gamma.transpose() * &w)[(0, 0)];
        assert!((mu - mu_o).abs() < 1e-8);
        assert!((tau2 - tau_o).abs() < 1e-8);
        assert!(tau2 > 0.0 && tau2 <= 1.0);
    }
}

#[test]
fn conditional_stats_rejects_bad_input() {
    let m = CorrelationModel::exponential(0.5);
    let pts = [Point::new(1.0, 0.0), Point::new(1.2, 0.0)];
    assert!(conditional_stats(&m, &pts, 0, &[0], &[1.0]).is_err());
    assert!(conditional_stats(&m, &pts, 0, &[1], &[]).is_err());
}

#[test]
fn dense_limit_is_enforced() {
    let pts: Vec<Point> = (0..=MAX_DENSE_POINTS).map(|i| Point::new(1.0 + i as f64, 0.0)).collect();
    assert!(matches!(
        CholeskyField::new(&CorrelationModel::exponential(0.1), &pts),
        Err(signal_spectrum::error::Error::Infeasible(_))
    ));
}

#[test]
fn spectral_sampler_covariance() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let m = CorrelationModel::exponential(0.5);
    let pts = [Point::new(0.0, 1.0), Point::new(0.3, 1.0)];
    let s = SpectralField::new(&m, 64).unwrap();
    let pairs: Vec<(f64, f64)> = (0..N)
        .map(|_| {
            let z = s.sample(&pts, &mut rng);
            (z[0], z[1])
        })
        .collect();
    let c = (-0.3f64 / 0.5).exp();
    assert!((sample_corr(&pairs) - c).abs() < 0.01);
    assert!(SpectralField::new(&CorrelationModel::wendland(1.0, 1), 8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shadow_is_exact_and_positive(z in prop::collection::vec(-8.0..8.0f64, 1..20), sigma in 0.1..5.0f64, beta in 2.1..6.0f64) {
        let s = shadow(&z, sigma, beta);
        for (zi, si) in z.iter().zip(&s) {
            prop_assert!(*si > 0.0);
            prop_assert_eq!(*si, (sigma * zi - sigma * sigma / beta).exp());
        }
        let fs = FieldSample::new(z.clone(), sigma, beta, 0.0);
        prop_assert_eq!(fs.s, s);
    }

    #[test]
    fn conditional_variance_in_unit_interval(seed in any::<u64>()) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let pts: Vec<Point> = (0..6).map(|_| Point::new(rng.random::<f64>() + 0.5, rng.random::<f64>())).collect();
        let (_, tau2) = conditional_stats(&CorrelationModel::squared_exponential(0.2), &pts, 0, &[1, 2, 3, 4, 5], &[0.0; 5]).unwrap();
        prop_assert!(tau2 > 0.0 && tau2 <= 1.0);
    }
}
