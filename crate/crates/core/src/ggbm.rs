//! Generalized grey Brownian motion: path construction by the product and
//! subordination representations, finite-dimensional densities and the
//! characteristic function.
//!
//! Normalization: the Gaussian factor B^{α/2} has per-component covariance
//! γ_α/2 = (t^α + s^α − |t−s|^α)/2, so every density and characteristic
//! function below is written in terms of Σ = γ_α/2. With this choice the
//! n = 1 characteristic function is E_β(−|k|² t^α/2) and the n = 1 density is
//! (2πt^α)^{−d/2} ∫ τ^{−d/2} e^{−|y|²/(2t^α τ)} M_β(τ) dτ.

use crate::error::{Error, Result};
use crate::fbm::{generate_fbm_from, rescale_path, FbmAtTimes, GridSpec, Path};
use crate::linalg::{Lu, Matrix};
pub use crate::params::ModelParams;
use crate::quad::{self, Tolerance};
use crate::randvar::{sample_y_beta, SeedSpec, Stream};
use crate::specfun::{m_wright, m_wright_moment, mittag_leffler};

/// Largest number of time points accepted by the dense fdd routines.
pub const MAX_FDD_POINTS: usize = 8;

/// γ_α = (t_k^α + t_j^α − |t_k − t_j|^α)_{k,j}.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaAlphaMatrix {
    times: Vec<f64>,
    entries: Matrix,
}

impl GammaAlphaMatrix {
    pub fn new(alpha: f64, times: &[f64]) -> Result<Self> {
        if times.is_empty() || times.len() > MAX_FDD_POINTS {
            return Err(Error::domain(format!(
                "requires 1 <= n <= {MAX_FDD_POINTS} time points (got {})",
                times.len()
            )));
        }
        if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("times must be nonnegative and strictly increasing"));
        }
        let entries = Matrix::from_fn(times.len(), |k, j| {
            times[k].powf(alpha) + times[j].powf(alpha) - (times[k] - times[j]).abs().powf(alpha)
        });
        Ok(Self {
            times: times.to_vec(),
            entries,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Per-component covariance of the Gaussian factor, γ_α/2.
    pub fn covariance(&self) -> Matrix {
        self.entries.scaled(0.5)
    }
}

/// Product representation √Y_β · B^{α/2}(t). The stream yields Y first, then the fBm.
pub fn ggbm_path_product(params: &ModelParams, grid: GridSpec, seed: SeedSpec) -> Result<Path> {
    let mut stream = seed.stream();
    let y = sample_y_beta(params.beta, &mut stream)?.value;
    let mut path = generate_fbm_from(params.hurst(), grid, params.d, seed, &mut stream)?;
    let s = y.sqrt();
    for v in path.values_mut() {
        *v *= s;
    }
    Ok(path)
}

/// Subordination representation B^{α/2}(t · Y_β^{1/α}): an fBm path is
/// time-changed by the random factor Y^{1/α} through self-similarity and then
/// read off at the original grid times.
pub fn ggbm_path_subordinated(params: &ModelParams, grid: GridSpec, seed: SeedSpec) -> Result<Path> {
    let mut stream = seed.stream();
    let y = sample_y_beta(params.beta, &mut stream)?.value;
    let base = generate_fbm_from(params.hurst(), grid, params.d, seed, &mut stream)?;
    let changed = rescale_path(&base, y.powf(1.0 / params.alpha))?;
    Ok(Path::new(grid, params.d, params.hurst(), seed, changed.values().to_vec()))
}

/// Samples (B_{β,α}(t_1), …, B_{β,α}(t_n)) by the product representation at
/// arbitrary fixed times. Reuses one Cholesky factor for all draws.
#[derive(Debug, Clone)]
pub struct GgbmAtTimes {
    params: ModelParams,
    fbm: FbmAtTimes,
}

impl GgbmAtTimes {
    pub fn new(params: ModelParams, times: &[f64]) -> Result<Self> {
        Ok(Self {
            params,
            fbm: FbmAtTimes::new(params.hurst(), times)?,
        })
    }

    pub fn times(&self) -> &[f64] {
        self.fbm.times()
    }

    /// Fills `out` (row-major, n_times × d); returns the Y_β draw used.
    pub fn sample_into(&self, stream: &mut Stream, out: &mut [f64]) -> f64 {
        let y = sample_y_beta(self.params.beta, stream)
            .expect("validated beta")
            .value;
        self.fbm.sample_into(self.params.d, stream, out);
        let s = y.sqrt();
        for v in out.iter_mut() {
            *v *= s;
        }
        y
    }
}

/// ∫₀^∞ τ^{−k} e^{−q/τ} M_β(τ) dτ for q ≥ 0 (β = 1: the point mass, e^{−q}).
pub(crate) fn tau_mixture(beta: f64, k: f64, q: f64) -> Result<f64> {
    if beta == 1.0 {
        return Ok((-q).exp());
    }
    if q == 0.0 {
        return if k < 1.0 {
            m_wright_moment(beta, -k)
        } else {
            Ok(f64::INFINITY)
        };
    }
    let integrand = |tau: f64| {
        if tau <= 0.0 {
            return 0.0;
        }
        let e = -q / tau - k * tau.ln();
        if e < -745.0 {
            return 0.0;
        }
        match m_wright(beta, tau) {
            Ok(m) => e.exp() * m.value,
            Err(_) => f64::NAN,
        }
    };
    let mut breaks = vec![0.0];
    let mut b = q / 16.0;
    while b < 1.0 {
        breaks.push(b);
        b *= 4.0;
    }
    breaks.extend([1.0, 2.0, 4.0]);
    let r = quad::integrate_breaks_to_infinity(integrand, &breaks, Tolerance::new(0.0, 1e-10))?;
    Ok(r.value)
}

/// Density of B_{β,α}(t) at y ∈ ℝ^d. Infinite at y = 0 when d ≥ 2 and β < 1.
pub fn marginal_density(params: &ModelParams, y: &[f64], t: f64) -> Result<f64> {
    if y.len() != params.d {
        return Err(Error::domain(format!(
            "point has dimension {} but d = {}",
            y.len(),
            params.d
        )));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("requires t > 0 (got t = {t})")));
    }
    let ta = t.powf(params.alpha);
    let r2: f64 = y.iter().map(|v| v * v).sum();
    let d = params.d as f64;
    let norm = (2.0 * std::f64::consts::PI * ta).powf(-0.5 * d);
    Ok(norm * tau_mixture(params.beta, 0.5 * d, r2 / (2.0 * ta))?)
}

fn check_theta(params: &ModelParams, times: &[f64], theta: &[f64]) -> Result<()> {
    if theta.len() != times.len() * params.d {
        return Err(Error::domain(format!(
            "theta must have n*d = {} entries (got {})",
            times.len() * params.d,
            theta.len()
        )));
    }
    Ok(())
}

/// Σ_j θ_{·,j}ᵀ M θ_{·,j} over the d coordinate columns of row-major θ (n × d).
fn column_quadratic_sum(d: usize, n: usize, theta: &[f64], form: impl Fn(&[f64]) -> f64) -> f64 {
    (0..d)
        .map(|j| {
            let col: Vec<f64> = (0..n).map(|k| theta[k * d + j]).collect();
            form(&col)
        })
        .sum()
}

/// Joint density of (B(t_1), …, B(t_n)) at θ (row-major n × d):
///
/// (2π)^{−nd/2} det(Σ)^{−d/2} ∫₀^∞ τ^{−nd/2} exp(−Σ_j θ_{·,j}ᵀ Σ⁻¹ θ_{·,j} / (2τ)) M_β(τ) dτ
///
/// with Σ = γ_α/2. Infinite at θ = 0 when nd ≥ 2 and β < 1.
pub fn fdd_density(params: &ModelParams, times: &[f64], theta: &[f64]) -> Result<f64> {
    let gamma = GammaAlphaMatrix::new(params.alpha, times)?;
    if times[0] <= 0.0 {
        return Err(Error::Singular("time 0 gives a degenerate row".into()));
    }
    check_theta(params, times, theta)?;
    let n = times.len();
    let lu = Lu::new(&gamma.covariance())?;
    let det = lu.det();
    if !(det > 0.0) {
        return Err(Error::Singular(format!("det = {det:e}")));
    }
    let q = column_quadratic_sum(params.d, n, theta, |c| lu.inverse_quadratic_form(c));
    let nd = (n * params.d) as f64;
    let norm = (2.0 * std::f64::consts::PI).powf(-0.5 * nd) * det.powf(-0.5 * params.d as f64);
    Ok(norm * tau_mixture(params.beta, 0.5 * nd, 0.5 * q)?)
}

/// E exp(i Σ_k (θ_k, B(t_k))) = E_β(−½ Σ_j θ_{·,j}ᵀ Σ θ_{·,j}), Σ = γ_α/2.
pub fn fdd_charfun(params: &ModelParams, times: &[f64], theta: &[f64]) -> Result<f64> {
    let gamma = GammaAlphaMatrix::new(params.alpha, times)?;
    check_theta(params, times, theta)?;
    let cov = gamma.covariance();
    let q = column_quadratic_sum(params.d, times.len(), theta, |c| cov.quadratic_form(c));
    Ok(mittag_leffler(params.beta, -0.5 * q.max(0.0))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(beta: f64, alpha: f64, d: usize) -> ModelParams {
        ModelParams::new(beta, alpha, d).unwrap()
    }

    #[test]
    fn gamma_matrix_shape() {
        let g = GammaAlphaMatrix::new(1.3, &[0.5, 1.0, 2.0]).unwrap();
        assert!(g.entries().is_symmetric(0.0));
        for (k, t) in g.times().iter().enumerate() {
            assert!((g.entries().get(k, k) - 2.0 * t.powf(1.3)).abs() < 1e-14);
        }
        assert!(GammaAlphaMatrix::new(1.0, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn brownian_product_path_is_scaled_fbm() {
        let grid = GridSpec::new(1.0, 32).unwrap();
        let seed = SeedSpec::new(4, 0);
        let a = ggbm_path_product(&p(1.0, 1.0, 2), grid, seed).unwrap();
        let mut st = seed.stream();
        let b = generate_fbm_from(0.5, grid, 2, seed, &mut st).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn representations_agree_pathwise_on_shared_seed() {
        let grid = GridSpec::new(2.0, 16).unwrap();
        let params = p(0.6, 1.4, 2);
        let seed = SeedSpec::new(10, 3);
        let a = ggbm_path_product(&params, grid, seed).unwrap();
        let b = ggbm_path_subordinated(&params, grid, seed).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn marginal_density_examples() {
        let g = marginal_density(&p(1.0, 1.0, 1), &[0.0], 1.0).unwrap();
        assert!((g - (2.0 * PI).powf(-0.5)).abs() < 1e-15);
        let v = marginal_density(&p(0.5, 1.0, 1), &[0.0], 1.0).unwrap();
        let expect = (2.0 * PI).powf(-0.5) * PI.sqrt() / crate::specfun::gamma(0.75).unwrap();
        assert!((v - expect).abs() < 1e-13);
        assert_eq!(marginal_density(&p(0.5, 1.0, 2), &[0.0, 0.0], 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn brownian_fdd_is_gaussian() {
        let params = p(1.0, 1.4, 1);
        let times = [0.4, 1.1];
        let theta = [0.3, -0.2];
        let v = fdd_density(&params, &times, &theta).unwrap();
        // direct bivariate normal with covariance (t^α + s^α − |t−s|^α)/2
        let c = |a: f64, b: f64| 0.5 * (a.powf(1.4) + b.powf(1.4) - (a - b).abs().powf(1.4));
        let (s11, s12, s22) = (c(0.4, 0.4), c(0.4, 1.1), c(1.1, 1.1));
        let det = s11 * s22 - s12 * s12;
        let q = (s22 * 0.09 - 2.0 * s12 * 0.3 * -0.2 + s11 * 0.04) / det;
        let expect = (-0.5 * q).exp() / (2.0 * PI * det.sqrt());
        assert!((v - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn charfun_basics() {
        let params = p(0.7, 1.2, 2);
        assert_eq!(fdd_charfun(&params, &[0.5, 1.0], &[0.0; 4]).unwrap(), 1.0);
        // n = 1 reproduces E_β(−|k|² t^α / 2)
        let k = [0.6, -0.8];
        let t: f64 = 1.7;
        let v = fdd_charfun(&params, &[t], &k).unwrap();
        let e = mittag_leffler(0.7, -0.5 * t.powf(1.2)).unwrap().value;
        assert!((v - e).abs() < 1e-15);
        let bm = p(1.0, 1.0, 1);
        let v = fdd_charfun(&bm, &[1.0, 2.0], &[1.0, 0.5]).unwrap();
        // Var(B1 + 0.5 B2) = 1 + 0.25·2 + 2·0.5·1 = 2.5
        assert!((v - (-1.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn fdd_rejects_singular_and_bad_shapes() {
        // α = 2: γ_α = 2 t_k t_j has rank one
        assert!(matches!(
            fdd_density(&p(0.5, 2.0, 1), &[0.5, 1.0], &[0.1, 0.2]),
            Err(Error::Singular(_))
        ));
        assert!(fdd_density(&p(0.5, 1.0, 2), &[0.5, 1.0], &[0.1]).is_err());
        let nine: Vec<f64> = (1..=9).map(|k| k as f64).collect();
        assert!(fdd_density(&p(0.5, 1.0, 1), &nine, &nine).is_err());
    }
}
