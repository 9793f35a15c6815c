//! d-dimensional fractional Brownian motion on uniform grids (circulant
//! embedding of fractional Gaussian noise, Cholesky fallback) and at
//! arbitrary time points (dense Cholesky).

use std::fmt::Write as _;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::randvar::{SeedSpec, Stream};

/// Uniform grid t_k = k·t_max/n_steps, k = 0..=n_steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_max: f64,
    pub n_steps: usize,
}

impl GridSpec {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::domain(format!("requires t_max > 0 (got {t_max})")));
        }
        if n_steps == 0 {
            return Err(Error::domain("requires n_steps >= 1"));
        }
        Ok(Self { t_max, n_steps })
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_max
        } else {
            k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }
}

/// Process values on a grid, row-major: `values[k * dim + j]` is component
/// `j` at time `grid.time(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub grid: GridSpec,
    pub dim: usize,
    pub hurst: f64,
    pub seed: SeedSpec,
    values: Vec<f64>,
}

impl Path {
    pub fn new(grid: GridSpec, dim: usize, hurst: f64, seed: SeedSpec, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), (grid.n_steps + 1) * dim);
        Self {
            grid,
            dim,
            hurst,
            seed,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// CSV with header `t,x1,...,xd`, every number with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.len() * (self.dim + 1) * 24);
        s.push('t');
        for j in 1..=self.dim {
            let _ = write!(s, ",x{j}");
        }
        s.push('\n');
        for k in 0..self.len() {
            let _ = write!(s, "{:.16e}", self.grid.time(k));
            for x in self.point(k) {
                let _ = write!(s, ",{x:.16e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// fBm covariance (t^{2H} + s^{2H} − |t − s|^{2H})/2.
pub fn fbm_covariance(hurst: f64, t: f64, s: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2))
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("requires 0 < hurst <= 1 (got hurst = {hurst})")))
    }
}

/// Grids with fewer steps than this use the dense factorization directly.
const SMALL_GRID: usize = 8;
/// Largest grid for which the dense fallback is attempted.
const CHOLESKY_MAX: usize = 2048;

#[derive(Clone)]
enum Method {
    /// H = 1: B(t) = t ξ.
    Linear,
    Circulant {
        fft: Arc<dyn Fft<f64>>,
        sqrt_eig: Vec<f64>,
    },
    Dense(Cholesky),
}

/// Reusable fBm sampler for one (H, n_steps) pair on the unit-step grid.
/// Immutable after construction, so one generator can serve many threads.
#[derive(Clone)]
pub struct FbmGenerator {
    hurst: f64,
    n_steps: usize,
    method: Method,
}

impl std::fmt::Debug for FbmGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let m = match self.method {
            Method::Linear => "linear",
            Method::Circulant { .. } => "circulant",
            Method::Dense(_) => "cholesky",
        };
        f.debug_struct("FbmGenerator")
            .field("hurst", &self.hurst)
            .field("n_steps", &self.n_steps)
            .field("method", &m)
            .finish()
    }
}

impl FbmGenerator {
    pub fn new(hurst: f64, n_steps: usize) -> Result<Self> {
        check_hurst(hurst)?;
        if n_steps == 0 {
            return Err(Error::domain("requires n_steps >= 1"));
        }
        let method = if hurst == 1.0 {
            Method::Linear
        } else if n_steps < SMALL_GRID {
            Method::Dense(dense_unit_grid(hurst, n_steps)?)
        } else {
            match circulant(hurst, n_steps) {
                Ok((fft, sqrt_eig)) => Method::Circulant { fft, sqrt_eig },
                Err(e) if n_steps <= CHOLESKY_MAX => {
                    Method::Dense(dense_unit_grid(hurst, n_steps).map_err(|_| e)?)
                }
                Err(e) => return Err(e),
            }
        };
        Ok(Self {
            hurst,
            n_steps,
            method,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn uses_circulant(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    /// Fills `out` (row-major, (n_steps+1) × dim) with an fBm path on the
    /// grid of step `step`, drawing from `stream`.
    pub fn sample_into(&self, step: f64, dim: usize, stream: &mut Stream, out: &mut [f64]) {
        let n = self.n_steps;
        assert_eq!(out.len(), (n + 1) * dim);
        let scale = step.powf(self.hurst);
        out[..dim].fill(0.0);
        match &self.method {
            Method::Linear => {
                for j in 0..dim {
                    let xi = stream.normal();
                    for k in 1..=n {
                        out[k * dim + j] = k as f64 * step * xi;
                    }
                }
            }
            Method::Dense(chol) => {
                let mut z = vec![0.0; n];
                let mut x = vec![0.0; n];
                for j in 0..dim {
                    stream.fill_normal(&mut z);
                    chol.apply_lower(&z, &mut x);
                    for k in 1..=n {
                        out[k * dim + j] = scale * x[k - 1];
                    }
                }
            }
            Method::Circulant { fft, sqrt_eig } => {
                let m = sqrt_eig.len();
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                let mut j = 0;
                while j < dim {
                    for (b, &w) in buf.iter_mut().zip(sqrt_eig) {
                        let re = stream.normal();
                        let im = stream.normal();
                        *b = Complex64::new(w * re, w * im);
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    // real and imaginary parts are independent fGn samples
                    let mut acc_re = 0.0;
                    let mut acc_im = 0.0;
                    for k in 1..=n {
                        acc_re += buf[k - 1].re;
                        acc_im += buf[k - 1].im;
                        out[k * dim + j] = scale * acc_re;
                        if j + 1 < dim {
                            out[k * dim + j + 1] = scale * acc_im;
                        }
                    }
                    j += 2;
                }
            }
        }
    }
}

fn circulant(hurst: f64, n: usize) -> Result<(Arc<dyn Fft<f64>>, Vec<f64>)> {
    let m = 2 * n;
    let mut c = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..=n {
        c[k] = Complex64::new(fgn_autocovariance(hurst, k), 0.0);
    }
    for k in 1..n {
        c[m - k] = c[k];
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut c);
    let max = c.iter().fold(0.0f64, |a, z| a.max(z.re));
    let min = c.iter().fold(f64::INFINITY, |a, z| a.min(z.re));
    if min < -1e-10 * max {
        return Err(Error::Embedding { min_eigenvalue: min });
    }
    let sqrt_eig = c.iter().map(|z| (z.re.max(0.0) / m as f64).sqrt()).collect();
    Ok((fft, sqrt_eig))
}

fn dense_unit_grid(hurst: f64, n: usize) -> Result<Cholesky> {
    let cov = Matrix::from_fn(n, |i, j| fbm_covariance(hurst, (i + 1) as f64, (j + 1) as f64));
    Cholesky::new(&cov)
}

/// Samples fBm on the uniform grid with the given seed.
///
/// Each component is an independent one-dimensional fBm; H = 1 gives the
/// degenerate line t·ξ.
pub fn generate_fbm(hurst: f64, grid: GridSpec, d: usize, seed: SeedSpec) -> Result<Path> {
    let mut stream = seed.stream();
    generate_fbm_from(hurst, grid, d, seed, &mut stream)
}

pub(crate) fn generate_fbm_from(
    hurst: f64,
    grid: GridSpec,
    d: usize,
    seed: SeedSpec,
    stream: &mut Stream,
) -> Result<Path> {
    if d == 0 {
        return Err(Error::domain("requires dim >= 1"));
    }
    let gen = FbmGenerator::new(hurst, grid.n_steps)?;
    let mut values = vec![0.0; (grid.n_steps + 1) * d];
    gen.sample_into(grid.step(), d, stream, &mut values);
    Ok(Path::new(grid, d, hurst, seed, values))
}

/// Self-similar time change: the path on the grid scaled by `time_factor`,
/// with values multiplied by `time_factor^H`.
pub fn rescale_path(path: &Path, time_factor: f64) -> Result<Path> {
    if !(time_factor > 0.0 && time_factor.is_finite()) {
        return Err(Error::domain(format!(
            "requires time_factor > 0 (got {time_factor})"
        )));
    }
    if time_factor == 1.0 {
        return Ok(path.clone());
    }
    let grid = GridSpec::new(path.grid.t_max * time_factor, path.grid.n_steps)?;
    let s = time_factor.powf(path.hurst);
    let values = path.values.iter().map(|x| x * s).collect();
    Ok(Path::new(grid, path.dim, path.hurst, path.seed, values))
}

/// fBm sampler at fixed, strictly increasing positive times (dense Cholesky).
#[derive(Debug, Clone)]
pub struct FbmAtTimes {
    hurst: f64,
    times: Vec<f64>,
    chol: Option<Cholesky>,
}

impl FbmAtTimes {
    pub fn new(hurst: f64, times: &[f64]) -> Result<Self> {
        check_hurst(hurst)?;
        if times.is_empty() {
            return Err(Error::domain("requires at least one time point"));
        }
        if times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("times must be positive and strictly increasing"));
        }
        let chol = if hurst == 1.0 {
            None
        } else {
            let cov = Matrix::from_fn(times.len(), |i, j| fbm_covariance(hurst, times[i], times[j]));
            Some(Cholesky::new(&cov)?)
        };
        Ok(Self {
            hurst,
            times: times.to_vec(),
            chol,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Fills `out` (row-major, times.len() × dim).
    pub fn sample_into(&self, dim: usize, stream: &mut Stream, out: &mut [f64]) {
        let n = self.times.len();
        assert_eq!(out.len(), n * dim);
        match &self.chol {
            None => {
                for j in 0..dim {
                    let xi = stream.normal();
                    for (k, t) in self.times.iter().enumerate() {
                        out[k * dim + j] = t * xi;
                    }
                }
            }
            Some(chol) => {
                let mut z = vec![0.0; n];
                let mut x = vec![0.0; n];
                for j in 0..dim {
                    stream.fill_normal(&mut z);
                    chol.apply_lower(&z, &mut x);
                    for k in 0..n {
                        out[k * dim + j] = x[k];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_zero_and_is_deterministic() {
        let g = GridSpec::new(1.0, 64).unwrap();
        let a = generate_fbm(0.7, g, 3, SeedSpec::new(5, 1)).unwrap();
        let b = generate_fbm(0.7, g, 3, SeedSpec::new(5, 1)).unwrap();
        assert_eq!(a, b);
        assert!(a.point(0).iter().all(|&x| x == 0.0));
        assert_eq!(a.len(), 65);
    }

    #[test]
    fn circulant_used_on_regular_grids() {
        for &h in &[0.1, 0.5, 0.75, 0.95] {
            assert!(FbmGenerator::new(h, 1000).unwrap().uses_circulant(), "H={h}");
        }
        assert!(!FbmGenerator::new(0.3, 4).unwrap().uses_circulant());
    }

    #[test]
    fn hurst_one_is_a_line() {
        let p = generate_fbm(1.0, GridSpec::new(2.0, 10).unwrap(), 2, SeedSpec::new(1, 0)).unwrap();
        let slope: Vec<f64> = p.point(10).iter().map(|x| x / 2.0).collect();
        for k in 1..=10 {
            let t = p.grid.time(k);
            for j in 0..2 {
                assert!((p.point(k)[j] - slope[j] * t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rescale_examples() {
        let p = generate_fbm(0.5, GridSpec::new(1.0, 16).unwrap(), 1, SeedSpec::new(2, 0)).unwrap();
        assert_eq!(rescale_path(&p, 1.0).unwrap(), p);
        let q = rescale_path(&p, 4.0).unwrap();
        assert_eq!(q.grid.t_max, 4.0);
        for (a, b) in p.values().iter().zip(q.values()) {
            assert!((b - 2.0 * a).abs() < 1e-15 * a.abs().max(1.0));
        }
        let p = generate_fbm(0.75, GridSpec::new(1.0, 16).unwrap(), 1, SeedSpec::new(2, 0)).unwrap();
        let q = rescale_path(&p, 2.0).unwrap();
        let k = 2f64.powf(0.75);
        assert!((k - 1.681_792_830_507_429).abs() < 1e-15);
        for (a, b) in p.values().iter().zip(q.values()) {
            assert!((b - k * a).abs() < 1e-14 * a.abs().max(1.0));
        }
        assert!(rescale_path(&p, 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let p = generate_fbm(0.6, GridSpec::new(1.0, 4).unwrap(), 2, SeedSpec::new(8, 0)).unwrap();
        let csv = p.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].split(',').all(|f| f.parse::<f64>().unwrap() == 0.0));
        // 17 significant digits round-trip exactly
        let x: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(x, p.point(2)[0]);
    }

    #[test]
    fn fgn_autocovariance_brownian() {
        assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
        assert!(fgn_autocovariance(0.8, 1) > 0.0);
        assert!(fgn_autocovariance(0.2, 1) < 0.0);
    }
}
