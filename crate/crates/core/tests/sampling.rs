use std::f64::consts::PI;

use ggbm_core::fbm::{generate_fbm, FbmAtTimes};
use ggbm_core::ggbm::{fdd_density, ggbm_path_product, ggbm_path_subordinated, marginal_density, GgbmAtTimes};
use ggbm_core::montecarlo::map_streams;
use ggbm_core::quad::gauss_legendre;
use ggbm_core::randvar::sample_y_beta_n;
use ggbm_core::specfun::{gamma, mittag_leffler};
use ggbm_core::sum::mean_and_std_error;
use ggbm_core::{GridSpec, ModelParams, SeedSpec};

fn within_3se(xs: &[f64], expected: f64) -> bool {
    let (m, se) = mean_and_std_error(xs);
    (m - expected).abs() <= 3.0 * se
}

#[test]
fn y_beta_moments() {
    let ys = sample_y_beta_n(0.5, 1_000_000, SeedSpec::new(11, 0)).unwrap();
    assert!(within_3se(&ys, 2.0 / PI.sqrt()));
    let ys = sample_y_beta_n(0.7, 1_000_000, SeedSpec::new(11, 1)).unwrap();
    let sq: Vec<f64> = ys.iter().map(|y| y * y).collect();
    assert!(within_3se(&sq, gamma(3.0).unwrap() / gamma(2.4).unwrap()));
    // E[Y] = 1/Γ(1 + β)
    let ys = sample_y_beta_n(0.3, 1_000_000, SeedSpec::new(11, 2)).unwrap();
    assert!(within_3se(&ys, 1.0 / gamma(1.3).unwrap()));
    assert!(ys.iter().all(|&y| y > 0.0 && y.is_finite()));
}

#[test]
fn brownian_increments_have_step_variance() {
    let grid = GridSpec::new(1.0, 1024).unwrap();
    let p = generate_fbm(0.5, grid, 1, SeedSpec::new(5, 0)).unwrap();
    let inc: Vec<f64> = (1..=1024).map(|k| p.point(k)[0] - p.point(k - 1)[0]).collect();
    let sq: Vec<f64> = inc.iter().map(|x| x * x * 1024.0).collect();
    assert!(within_3se(&sq, 1.0));
    // lag-one correlation vanishes
    let prod: Vec<f64> = inc.windows(2).map(|w| w[0] * w[1] * 1024.0).collect();
    assert!(within_3se(&prod, 0.0));
}

#[test]
fn fbm_variance_and_covariance_h075() {
    let grid = GridSpec::new(1.0, 256).unwrap();
    let rows = map_streams(100_000, 8, 0, |_, st| {
        let gen = FbmAtTimes::new(0.75, &[0.5, 1.0]).unwrap();
        let mut out = [0.0; 2];
        gen.sample_into(1, st, &mut out);
        out
    });
    let var: Vec<f64> = rows.iter().map(|r| r[1] * r[1]).collect();
    let cov: Vec<f64> = rows.iter().map(|r| r[0] * r[1]).collect();
    assert!(within_3se(&var, 1.0));
    let expect = 0.5 * (1.0 + 0.5f64.powf(1.5) - 0.5f64.powf(1.5));
    assert!(within_3se(&cov, expect));
    // the circulant sampler on a grid agrees at t = 1
    let ends: Vec<f64> = (0..20_000)
        .map(|i| {
            let p = generate_fbm(0.75, grid, 1, SeedSpec::new(9, i)).unwrap();
            p.point(256)[0].powi(2)
        })
        .collect();
    assert!(within_3se(&ends, 1.0));
}

#[test]
fn p1_spec_examples() {
    let params = ModelParams::new(0.5, 1.0, 1).unwrap();
    let s = GgbmAtTimes::new(params, &[1.0]).unwrap();
    let sq: Vec<f64> = map_streams(100_000, 3, 0, |_, st| {
        let mut o = [0.0];
        s.sample_into(st, &mut o);
        o[0] * o[0]
    });
    assert!(within_3se(&sq, 1.0 / gamma(1.5).unwrap()));

    let params = ModelParams::new(0.5, 1.5, 1).unwrap();
    let s = GgbmAtTimes::new(params, &[2.0]).unwrap();
    let q: Vec<f64> = map_streams(100_000, 3, 0, |_, st| {
        let mut o = [0.0];
        s.sample_into(st, &mut o);
        o[0].powi(4)
    });
    assert!(within_3se(&q, 48.0));
}

#[test]
fn charfun_example() {
    let params = ModelParams::new(0.5, 1.5, 1).unwrap();
    let s = GgbmAtTimes::new(params, &[1.0]).unwrap();
    let c: Vec<f64> = map_streams(100_000, 4, 0, |_, st| {
        let mut o = [0.0];
        s.sample_into(st, &mut o);
        o[0].cos()
    });
    assert!(within_3se(&c, mittag_leffler(0.5, -0.5).unwrap().value));
}

#[test]
fn subordinated_equals_product_for_beta_one() {
    let params = ModelParams::new(1.0, 1.3, 2).unwrap();
    let grid = GridSpec::new(3.0, 100).unwrap();
    let seed = SeedSpec::new(1, 1);
    let a = ggbm_path_product(&params, grid, seed).unwrap();
    let b = ggbm_path_subordinated(&params, grid, seed).unwrap();
    assert_eq!(a.values(), b.values());
    assert!(a.point(0).iter().all(|&x| x == 0.0));
}

#[test]
fn fdd_with_one_time_is_the_marginal() {
    let params = ModelParams::new(0.6, 1.3, 2).unwrap();
    let y = [0.4, -0.9];
    let a = fdd_density(&params, &[1.7], &y).unwrap();
    let b = marginal_density(&params, &y, 1.7).unwrap();
    assert!((a - b).abs() < 1e-8 * b);
}

/// Density of (B(t₁), B(t₂)), d = 1, by integrating the Gaussian conditional
/// density over Y = (E/A(U))^{1−β} in (u, e) with E ~ Exp(1), U ~ U(0, 1).
fn fdd_oracle(beta: f64, alpha: f64, t: [f64; 2], theta: [f64; 2]) -> f64 {
    let c = |a: f64, b: f64| 0.5 * (a.powf(alpha) + b.powf(alpha) - (a - b).abs().powf(alpha));
    let (s11, s12, s22) = (c(t[0], t[0]), c(t[0], t[1]), c(t[1], t[1]));
    let det = s11 * s22 - s12 * s12;
    let q = (s22 * theta[0] * theta[0] - 2.0 * s12 * theta[0] * theta[1] + s11 * theta[1] * theta[1]) / det;
    let b1 = 1.0 - beta;
    let a_of = |u: f64| {
        (beta * PI * u).sin().powf(beta / b1) * (b1 * PI * u).sin() / (PI * u).sin().powf(1.0 / b1)
    };
    let (x, w) = gauss_legendre(32);
    let panels = 64;
    let mut total = 0.0;
    for pu in 0..panels {
        for (xu, wu) in x.iter().zip(&w) {
            let u = (pu as f64 + 0.5 * (xu + 1.0)) / panels as f64;
            let a = a_of(u);
            // e = s/(1−s) on (0, 1)
            for pe in 0..panels {
                for (xe, we) in x.iter().zip(&w) {
                    let s = (pe as f64 + 0.5 * (xe + 1.0)) / panels as f64;
                    let e = s / (1.0 - s);
                    let y = (e / a).powf(b1);
                    let g = (-0.5 * q / y).exp() / (2.0 * PI * y * det.sqrt());
                    total += wu * we * 0.25 / (panels * panels) as f64 * g * (-e).exp() / ((1.0 - s) * (1.0 - s));
                }
            }
        }
    }
    total
}

#[test]
fn fdd_density_matches_representation_quadrature() {
    let params = ModelParams::new(0.5, 1.0, 1).unwrap();
    let theta = [0.3, -0.2];
    let v = fdd_density(&params, &[0.5, 1.0], &theta).unwrap();
    let oracle = fdd_oracle(0.5, 1.0, [0.5, 1.0], theta);
    assert!((v - oracle).abs() < 1e-6 * oracle, "{v} vs {oracle}");
    // the origin is a point of infinite density when β < 1 and n·d ≥ 2
    assert_eq!(fdd_density(&params, &[0.5, 1.0], &[0.0, 0.0]).unwrap(), f64::INFINITY);
}
