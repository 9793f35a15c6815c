//! Validation suites. Each check compares an identity of the model against an
//! independent evaluation: quadrature, a closed form, or Monte Carlo.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::GridSpec;
use crate::ggbm::{ggbm_path_product, ggbm_path_subordinated, GgbmAtTimes};
use crate::green::{potential, GreenDensity, RadialPotentialSpec, TestFunction};
use crate::montecarlo::{estimate_potential_mc, map_streams, PerpetualSpec, TimeGridSpec};
use crate::params::ModelParams;
use crate::quad::{self, Tolerance};
use crate::randvar::{sample_y_beta_n, SeedSpec};
use crate::specfun::{
    gamma, green_constant, m_wright, m_wright_moment, mittag_leffler, time_kernel_constant,
};
use crate::sphere::unit_sphere_area;
use crate::stats::ks_two_sample;
use crate::sum::mean_and_std_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Specfun,
    Moments,
    Covariance,
    Charfun,
    Representation,
    Green,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Specfun,
        Suite::Moments,
        Suite::Covariance,
        Suite::Charfun,
        Suite::Representation,
        Suite::Green,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Specfun => "specfun",
            Suite::Moments => "moments",
            Suite::Covariance => "covariance",
            Suite::Charfun => "charfun",
            Suite::Representation => "representation",
            Suite::Green => "green",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown suite '{s}'")))
    }
}

/// How `observed` is compared with `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// |observed − expected| ≤ tolerance.
    Within,
    /// observed ≥ expected.
    AtLeast,
    /// observed ≤ expected.
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The identity or bound being tested.
    pub paper_anchor: String,
    pub expected: f64,
    pub observed: f64,
    /// Absolute tolerance for `Within`, 0 otherwise.
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl Check {
    pub fn within(name: String, anchor: &str, expected: f64, observed: f64, tolerance: f64) -> Self {
        Self {
            pass: (observed - expected).abs() <= tolerance,
            name,
            paper_anchor: anchor.to_string(),
            expected,
            observed,
            tolerance,
            relation: Relation::Within,
            details: BTreeMap::new(),
        }
    }

    pub fn relative(name: String, anchor: &str, expected: f64, observed: f64, rel: f64) -> Self {
        Self::within(name, anchor, expected, observed, rel * expected.abs())
    }

    pub fn at_least(name: String, anchor: &str, bound: f64, observed: f64) -> Self {
        Self {
            pass: observed >= bound,
            name,
            paper_anchor: anchor.to_string(),
            expected: bound,
            observed,
            tolerance: 0.0,
            relation: Relation::AtLeast,
            details: BTreeMap::new(),
        }
    }

    pub fn at_most(name: String, anchor: &str, bound: f64, observed: f64) -> Self {
        Self {
            pass: observed <= bound,
            relation: Relation::AtMost,
            ..Self::at_least(name, anchor, bound, observed)
        }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Inputs of a suite run. Unset fields take per-suite defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// (β, α); when unset, suites use their default parameter pairs.
    pub beta_alpha: Option<(f64, f64)>,
    pub dim: Option<usize>,
    /// Paths (or samples) per parameter set.
    pub n_paths: Option<usize>,
    pub seed: u64,
    pub t_max: f64,
    pub grid: TimeGridSpec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            beta_alpha: None,
            dim: None,
            n_paths: None,
            seed: 42,
            t_max: 50.0,
            grid: TimeGridSpec::default(),
        }
    }
}

const DEFAULT_PAIRS: [(f64, f64); 2] = [(0.5, 1.5), (0.8, 1.2)];

impl VerifyConfig {
    fn pairs(&self) -> Vec<(f64, f64)> {
        match self.beta_alpha {
            Some(p) => vec![p],
            None => DEFAULT_PAIRS.to_vec(),
        }
    }

    fn paths(&self, default: usize) -> usize {
        self.n_paths.unwrap_or(default)
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<Report> {
    let checks = match suite {
        Suite::Specfun => specfun_checks(cfg)?,
        Suite::Moments => moment_checks(cfg)?,
        Suite::Covariance => covariance_checks(cfg)?,
        Suite::Charfun => charfun_checks(cfg)?,
        Suite::Representation => representation_checks(cfg)?,
        Suite::Green => green_checks(cfg)?,
    };
    Ok(Report {
        suite,
        seed: cfg.seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// ∫₀^∞ g(τ) M_β(τ) dτ by adaptive quadrature.
pub fn integrate_against_m_wright(beta: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let r = quad::integrate_breaks_to_infinity(
        |tau| {
            if !(tau > 0.0 && tau.is_finite()) {
                return 0.0;
            }
            match m_wright(beta, tau) {
                Ok(m) if m.value > 0.0 => g(tau) * m.value,
                Ok(_) => 0.0,
                Err(_) => f64::NAN,
            }
        },
        &[0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
        Tolerance::new(0.0, 1e-11),
    )?;
    Ok(r.value)
}

/// ∫₀^∞ (2π t^α τ)^{−d/2} exp(−r²/(2 t^α τ)) dt by quadrature in v = ln t.
pub fn time_integral_by_quadrature(alpha: f64, d: usize, tau: f64, r: f64) -> Result<f64> {
    let h = 0.5 * d as f64;
    let c = (2.0 * PI * tau).ln();
    let g = |v: f64| {
        let e = v - h * (c + alpha * v) - r * r / (2.0 * tau) * (-alpha * v).exp();
        e.exp()
    };
    let mut breaks: Vec<f64> = (-8..=12).map(|k| 5.0 * k as f64).collect();
    breaks.extend([100.0, 200.0, 400.0, 800.0]);
    Ok(quad::integrate_with_breaks(g, &breaks, Tolerance::new(0.0, 1e-12))?.value)
}

fn specfun_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let betas = [0.3, 0.5, 0.7];
    let laplace = "E_beta(-s) = int_0^inf exp(-s tau) M_beta(tau) dtau";
    for &beta in &betas {
        for &s in &[0.1, 1.0, 5.0] {
            let ml = mittag_leffler(beta, -s)?.value;
            let q = integrate_against_m_wright(beta, |tau| (-s * tau).exp())?;
            out.push(Check::relative(
                format!("laplace quadrature beta={beta} s={s}"),
                laplace,
                ml,
                q,
                1e-6,
            ));
        }
    }
    let n = cfg.paths(1_000_000);
    for (j, &beta) in betas.iter().enumerate() {
        let ys = sample_y_beta_n(beta, n, SeedSpec::new(cfg.seed, j as u64))?;
        for &s in &[0.1, 1.0, 5.0] {
            let vals: Vec<f64> = ys.iter().map(|y| (-s * y).exp()).collect();
            let (mean, se) = mean_and_std_error(&vals);
            let ml = mittag_leffler(beta, -s)?.value;
            out.push(
                Check::within(
                    format!("laplace sampler beta={beta} s={s}"),
                    laplace,
                    ml,
                    mean,
                    3.0 * se,
                )
                .with("std_error", se)
                .with("samples", n as f64),
            );
        }
    }
    let moments = "int_0^inf tau^delta M_beta(tau) dtau = Gamma(delta+1)/Gamma(beta delta+1)";
    for &beta in &betas {
        for &delta in &[-1.0 / 1.5, -0.5, 0.5, 1.0, 2.5] {
            let exact = m_wright_moment(beta, delta)?;
            let q = integrate_against_m_wright(beta, |tau| tau.powf(delta))?;
            out.push(Check::relative(
                format!("moment beta={beta} delta={delta:.6}"),
                moments,
                exact,
                q,
                1e-6,
            ));
        }
    }
    let kernel = "int_0^inf (2 pi t^alpha tau)^(-d/2) exp(-r^2/(2 t^alpha tau)) dt = C(alpha,d) tau^(-1/alpha) r^(2/alpha-d)";
    let r: f64 = 1.3;
    for &alpha in &[1.2, 1.5, 2.0] {
        for d in 2..=4 {
            for &tau in &[0.5f64, 2.0] {
                let closed = time_kernel_constant(alpha, d)? * tau.powf(-1.0 / alpha) * r.powf(2.0 / alpha - d as f64);
                let q = time_integral_by_quadrature(alpha, d, tau, r)?;
                out.push(Check::relative(
                    format!("time integral alpha={alpha} d={d} tau={tau}"),
                    kernel,
                    closed,
                    q,
                    1e-8,
                ));
            }
        }
    }
    let bm = ModelParams::new(1.0, 1.0, 3)?;
    out.push(Check::relative(
        "brownian green constant d=3".into(),
        "D(1,1,3) = Gamma(1/2)/(2 pi^(3/2)) = 1/(2 pi)",
        1.0 / (2.0 * PI),
        green_constant(&bm)?,
        1e-12,
    ));
    Ok(out)
}

/// Per-path statistics at fixed times, gathered column-wise.
fn sample_columns(
    params: ModelParams,
    times: &[f64],
    n: usize,
    seed: u64,
    first_stream: u64,
    stats: impl Fn(&[f64]) -> Vec<f64> + Sync,
) -> Result<Vec<Vec<f64>>> {
    let sampler = GgbmAtTimes::new(params, times)?;
    let rows = map_streams(n, seed, first_stream, |_, stream| {
        let mut out = vec![0.0; times.len() * params.d];
        sampler.sample_into(stream, &mut out);
        stats(&out)
    });
    let k = rows.first().map_or(0, Vec::len);
    Ok((0..k).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
}

fn mc_check(name: String, anchor: &str, expected: f64, column: &[f64]) -> Check {
    let (mean, se) = mean_and_std_error(column);
    Check::within(name, anchor, expected, mean, 3.0 * se).with("std_error", se)
}

fn moment_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    // the moment formula is checked on the first coordinate, i.e. in d = 1
    let times = [0.5, 1.0, 2.0];
    let n = cfg.paths(100_000);
    let anchor_even = "E[B(t)^(2n)] = (2n)! t^(alpha n) / (2^n Gamma(beta n + 1))";
    let anchor_odd = "E[B(t)^(2n+1)] = 0";
    let mut out = Vec::new();
    for (j, (beta, alpha)) in cfg.pairs().into_iter().enumerate() {
        let params = ModelParams::new(beta, alpha, 1)?;
        let cols = sample_columns(params, &times, n, cfg.seed, (j * n) as u64, |b| {
            b.iter().flat_map(|&x| [x, x * x, x * x * x, x * x * x * x]).collect()
        })?;
        for (k, &t) in times.iter().enumerate() {
            for (p, col) in cols[4 * k..4 * k + 4].iter().enumerate() {
                let order = p + 1;
                let label = format!("beta={beta} alpha={alpha} t={t} order={order}");
                if order % 2 == 1 {
                    out.push(mc_check(format!("odd moment {label}"), anchor_odd, 0.0, col));
                } else {
                    let m = (order / 2) as f64;
                    let expected = gamma(2.0 * m + 1.0)? * t.powf(alpha * m)
                        / (2f64.powf(m) * gamma(beta * m + 1.0)?);
                    out.push(mc_check(format!("even moment {label}"), anchor_even, expected, col));
                }
            }
        }
    }
    Ok(out)
}

fn covariance_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let times = [0.5, 1.0, 2.0];
    let d = cfg.dim.unwrap_or(2);
    let n = cfg.paths(100_000);
    let anchor = "E[(B(t), B(s))] = d (t^alpha + s^alpha - |t-s|^alpha) / (2 Gamma(beta+1))";
    let pairs: Vec<(usize, usize)> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for (j, (beta, alpha)) in cfg.pairs().into_iter().enumerate() {
        let params = ModelParams::new(beta, alpha, d)?;
        let pr = pairs.clone();
        let cols = sample_columns(params, &times, n, cfg.seed, (j * n) as u64, move |b| {
            pr.iter()
                .map(|&(a, c)| (0..d).map(|l| b[a * d + l] * b[c * d + l]).sum())
                .collect()
        })?;
        for (col, &(a, c)) in cols.iter().zip(&pairs) {
            let (t, s) = (times[a], times[c]);
            let expected = d as f64 * (t.powf(alpha) + s.powf(alpha) - (t - s).abs().powf(alpha))
                / (2.0 * gamma(beta + 1.0)?);
            out.push(mc_check(
                format!("covariance beta={beta} alpha={alpha} d={d} t={t} s={s}"),
                anchor,
                expected,
                col,
            ));
        }
    }
    Ok(out)
}

fn charfun_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let times = [0.5, 1.0, 2.0];
    let increments = [(1usize, 0usize), (2, 0), (2, 1)];
    let d = cfg.dim.unwrap_or(2);
    let n = cfg.paths(100_000);
    let anchor = "E[exp(i(k, B(t)-B(s)))] = E_beta(-|k|^2 |t-s|^alpha / 2)";
    // wave vectors along (1, …, 1)/√d with these lengths
    let norms = [0.5, 1.5];
    let mut out = Vec::new();
    for (j, (beta, alpha)) in cfg.pairs().into_iter().enumerate() {
        let params = ModelParams::new(beta, alpha, d)?;
        let cols = sample_columns(params, &times, n, cfg.seed, (j * n) as u64, |b| {
            let mut v = Vec::new();
            for &(t, s) in &increments {
                let proj: f64 = (0..d).map(|l| b[t * d + l] - b[s * d + l]).sum::<f64>() / (d as f64).sqrt();
                for &k in &norms {
                    v.push((k * proj).cos());
                    v.push((k * proj).sin());
                }
            }
            v
        })?;
        let mut it = cols.iter();
        for &(a, c) in &increments {
            let (t, s) = (times[a], times[c]);
            for &k in &norms {
                let expected = mittag_leffler(beta, -0.5 * k * k * (t - s).abs().powf(alpha))?.value;
                let label = format!("beta={beta} alpha={alpha} d={d} t={t} s={s} |k|={k}");
                out.push(mc_check(format!("charfun real {label}"), anchor, expected, it.next().unwrap()));
                out.push(mc_check(format!("charfun imag {label}"), anchor, 0.0, it.next().unwrap()));
            }
        }
    }
    Ok(out)
}

fn representation_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let d = cfg.dim.unwrap_or(1);
    let n = cfg.paths(10_000);
    let grid = GridSpec::new(1.0, 64)?;
    let anchor = "sqrt(Y_beta) B^(alpha/2)(t) and B^(alpha/2)(t Y_beta^(1/alpha)) have the same law";
    let mut out = Vec::new();
    for (j, (beta, alpha)) in cfg.pairs().into_iter().enumerate() {
        let params = ModelParams::new(beta, alpha, d)?;
        let base = (2 * j * n) as u64;
        let take = |sub: bool, first: u64| -> Result<Vec<[f64; 2]>> {
            (0..n)
                .map(|i| {
                    let seed = SeedSpec::new(cfg.seed, first + i as u64);
                    let p = if sub {
                        ggbm_path_subordinated(&params, grid, seed)?
                    } else {
                        ggbm_path_product(&params, grid, seed)?
                    };
                    Ok([p.point(32)[0], p.point(64)[0]])
                })
                .collect()
        };
        let prod = take(false, base)?;
        let sub = take(true, base + n as u64)?;
        for (k, t) in [0.5, 1.0].into_iter().enumerate() {
            let a: Vec<f64> = prod.iter().map(|x| x[k]).collect();
            let b: Vec<f64> = sub.iter().map(|x| x[k]).collect();
            let ks = ks_two_sample(&a, &b)?;
            out.push(
                Check::at_least(
                    format!("KS product vs subordinated beta={beta} alpha={alpha} t={t}"),
                    anchor,
                    0.01,
                    ks.p_value,
                )
                .with("ks_statistic", ks.statistic)
                .with("samples_each", n as f64),
            );
        }
    }
    Ok(out)
}

/// The 10-member Gaussian family used for the continuity bound.
pub fn gaussian_family(d: usize) -> Vec<TestFunction> {
    (0..10)
        .map(|i| {
            let mut c = vec![0.0; d];
            c[0] = 0.3 * i as f64;
            let sigma = 0.2 * 2f64.powf(0.5 * i as f64);
            TestFunction::gaussian(c, sigma)
                .expect("positive sigma")
                .scaled(1.0 + 0.5 * i as f64)
        })
        .collect()
}

fn green_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let (beta, alpha) = cfg.beta_alpha.unwrap_or((0.5, 1.5));
    let d = cfg.dim.unwrap_or(3);
    let params = ModelParams::new(beta, alpha, d)?;
    let gd = GreenDensity::new(params)?;
    let x = vec![0.0; d];
    let f = TestFunction::unit_gaussian(d);
    let v = potential(&gd, &f, &x, &RadialPotentialSpec::default())?;
    let label = format!("beta={beta} alpha={alpha} d={d}");
    let mut out = Vec::new();

    let closed = gd.d_const * unit_sphere_area(d) * 2f64.powf(1.0 / alpha - 1.0) * gamma(1.0 / alpha)?;
    out.push(Check::relative(
        format!("potential of unit gaussian at its centre {label}"),
        "V(f,0) = D |S^(d-1)| 2^(1/alpha-1) Gamma(1/alpha) for f = exp(-|y|^2/2)",
        closed,
        v.value,
        1e-8,
    ));

    let spec = PerpetualSpec::new(cfg.t_max, cfg.grid, cfg.paths(100_000), cfg.seed)?;
    let est = estimate_potential_mc(&params, &f, &x, &spec)?;
    out.push(
        Check::within(
            format!("perpetual integral mean vs green potential {label}"),
            "E int_0^inf f(x + B(t)) dt = D int f(x+y) |y|^(2/alpha-d) dy",
            v.value,
            est.mean,
            est.error_budget(),
        )
        .with("std_error", est.std_error)
        .with("tail_bound", est.tail_bound)
        .with("discretization_bound", est.discretization_bound)
        .with("n_paths", est.n_paths as f64)
        .with("t_max", est.t_max),
    );

    let k = gd.continuity_constant();
    let mut worst: f64 = 0.0;
    for g in gaussian_family(d) {
        let pv = potential(&gd, &g, &x, &RadialPotentialSpec::default())?;
        worst = worst.max(pv.value.abs() / g.cl_norm());
    }
    out.push(Check::at_most(
        format!("continuity bound over gaussian family {label}"),
        "|V(f,x)| <= K (||f||_inf + ||f||_1)",
        k,
        worst,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn time_integral_quadrature_matches_closed_form() {
        let q = time_integral_by_quadrature(1.5, 3, 0.7, 0.9).unwrap();
        let c = time_kernel_constant(1.5, 3).unwrap() * 0.7f64.powf(-1.0 / 1.5) * 0.9f64.powf(2.0 / 1.5 - 3.0);
        assert!((q - c).abs() < 1e-10 * c);
    }

    #[test]
    fn check_relations() {
        assert!(Check::within("a".into(), "", 1.0, 1.05, 0.1).pass);
        assert!(!Check::within("a".into(), "", 1.0, 1.2, 0.1).pass);
        assert!(Check::at_least("a".into(), "", 0.01, 0.5).pass);
        assert!(!Check::at_most("a".into(), "", 0.01, 0.5).pass);
    }
}
