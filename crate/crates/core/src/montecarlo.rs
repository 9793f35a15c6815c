//! Monte Carlo estimation of the perpetual integral ∫₀^∞ f(x + B_{β,α}(t)) dt.
//!
//! Each path is sampled exactly at the nodes of a time grid and integrated by
//! the trapezoidal rule up to `t_max`. The part beyond `t_max` is never added
//! to the mean; it is bounded analytically by [`tail_bound`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::{FbmAtTimes, FbmGenerator};
use crate::green::{TestFunction, TestFunctionDescriptor};
use crate::params::ModelParams;
use crate::quad::{self, Tolerance};
use crate::randvar::{sample_y_beta, SeedSpec, Stream};
use crate::specfun::{m_wright, m_wright_moment};
use crate::sum::{mean_and_std_error, pairwise_sum};

/// Time nodes of the path integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeGridSpec {
    /// `n_steps` equal steps on [0, t_max].
    Uniform { n_steps: usize },
    /// Nodes t₁·q^{K−k}, k = 0..K, below t₁ = min(1, t_max), then equal steps
    /// of at most `uniform_step` up to t_max. The origin is always a node.
    Geometric {
        ratio: f64,
        n_geometric: usize,
        uniform_step: f64,
    },
}

impl Default for TimeGridSpec {
    fn default() -> Self {
        Self::Geometric {
            ratio: 0.85,
            n_geometric: 40,
            uniform_step: 0.2,
        }
    }
}

impl TimeGridSpec {
    /// All nodes, starting with 0 and ending with `t_max`.
    pub fn nodes(&self, t_max: f64) -> Result<Vec<f64>> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::domain(format!("requires t_max > 0 (got {t_max})")));
        }
        match *self {
            Self::Uniform { n_steps } => {
                if n_steps == 0 {
                    return Err(Error::domain("requires steps >= 1"));
                }
                let h = t_max / n_steps as f64;
                Ok((0..=n_steps)
                    .map(|k| if k == n_steps { t_max } else { k as f64 * h })
                    .collect())
            }
            Self::Geometric {
                ratio,
                n_geometric,
                uniform_step,
            } => {
                if !(ratio > 0.0 && ratio < 1.0) || !(uniform_step > 0.0) {
                    return Err(Error::domain(
                        "geometric grid requires 0 < ratio < 1 and uniform_step > 0",
                    ));
                }
                let t1 = t_max.min(1.0);
                let mut t = vec![0.0];
                for k in (1..=n_geometric).rev() {
                    t.push(t1 * ratio.powi(k as i32));
                }
                t.push(t1);
                if t_max > t1 {
                    let n = ((t_max - t1) / uniform_step).ceil().max(1.0) as usize;
                    let h = (t_max - t1) / n as f64;
                    for k in 1..=n {
                        t.push(if k == n { t_max } else { t1 + k as f64 * h });
                    }
                }
                Ok(t)
            }
        }
    }
}

/// Configuration of a perpetual-integral estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerpetualSpec {
    pub t_max: f64,
    pub grid: TimeGridSpec,
    pub n_paths: usize,
    /// Master seed; path i uses stream i.
    pub seed: u64,
}

impl PerpetualSpec {
    pub fn new(t_max: f64, grid: TimeGridSpec, n_paths: usize, seed: u64) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::domain("requires paths >= 1"));
        }
        grid.nodes(t_max)?;
        Ok(Self {
            t_max,
            grid,
            n_paths,
            seed,
        })
    }
}

/// Result of [`estimate_potential_mc`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub params: ModelParams,
    pub f_descriptor: TestFunctionDescriptor,
    pub x: Vec<f64>,
    pub n_paths: usize,
    pub t_max: f64,
    pub grid: TimeGridSpec,
    pub mean: f64,
    pub std_error: f64,
    pub tail_bound: f64,
    pub discretization_bound: f64,
    pub discretization_note: String,
    pub seed: u64,
}

impl Estimate {
    /// |mean − v| ≤ 3·std_error + tail_bound + discretization_bound.
    pub fn brackets(&self, v: f64) -> bool {
        (self.mean - v).abs() <= self.error_budget()
    }

    pub fn error_budget(&self) -> f64 {
        3.0 * self.std_error + self.tail_bound + self.discretization_bound
    }
}

enum NodeSampler {
    Uniform { gen: FbmGenerator, step: f64 },
    Nodes(FbmAtTimes),
}

/// Samples ggBm at the nodes of a grid and integrates functions along it.
/// Building it factors the covariance once; draws are then cheap.
pub struct PathIntegrator {
    params: ModelParams,
    nodes: Vec<f64>,
    sampler: NodeSampler,
}

impl PathIntegrator {
    pub fn new(params: ModelParams, t_max: f64, grid: TimeGridSpec) -> Result<Self> {
        let nodes = grid.nodes(t_max)?;
        let sampler = match grid {
            TimeGridSpec::Uniform { n_steps } => NodeSampler::Uniform {
                gen: FbmGenerator::new(params.hurst(), n_steps)?,
                step: t_max / n_steps as f64,
            },
            TimeGridSpec::Geometric { .. } => NodeSampler::Nodes(FbmAtTimes::new(params.hurst(), &nodes[1..])?),
        };
        Ok(Self {
            params,
            nodes,
            sampler,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Fills `out` ((nodes × d), first row zero) with √Y·B^{α/2} at the nodes.
    pub fn sample_into(&self, stream: &mut Stream, out: &mut [f64]) {
        let d = self.params.d;
        let y = sample_y_beta(self.params.beta, stream)
            .expect("validated beta")
            .value;
        match &self.sampler {
            NodeSampler::Uniform { gen, step } => gen.sample_into(*step, d, stream, out),
            NodeSampler::Nodes(fbm) => {
                out[..d].fill(0.0);
                fbm.sample_into(d, stream, &mut out[d..]);
            }
        }
        let s = y.sqrt();
        for v in out.iter_mut() {
            *v *= s;
        }
    }

    /// Values f(x + B(t_k)) along one freshly drawn path.
    pub fn integrand_values(&self, f: &TestFunction, x: &[f64], stream: &mut Stream) -> Vec<f64> {
        let d = self.params.d;
        let mut path = vec![0.0; self.nodes.len() * d];
        self.sample_into(stream, &mut path);
        let mut p = vec![0.0; d];
        path.chunks_exact(d)
            .map(|b| {
                for j in 0..d {
                    p[j] = x[j] + b[j];
                }
                f.eval(&p)
            })
            .collect()
    }

    /// Trapezoidal integral over all nodes.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        trapezoid(&self.nodes, values, 1)
    }

    /// Trapezoidal integral over every other node (the last node is kept).
    pub fn trapezoid_coarse(&self, values: &[f64]) -> f64 {
        trapezoid(&self.nodes, values, 2)
    }
}

fn trapezoid(t: &[f64], v: &[f64], stride: usize) -> f64 {
    let last = t.len() - 1;
    let mut idx: Vec<usize> = (0..=last).step_by(stride).collect();
    if *idx.last().unwrap() != last {
        idx.push(last);
    }
    let terms: Vec<f64> = idx
        .windows(2)
        .map(|w| 0.5 * (t[w[1]] - t[w[0]]) * (v[w[0]] + v[w[1]]))
        .collect();
    pairwise_sum(&terms)
}

/// Trapezoidal integral of f(x + B(t)) over [0, t_max] along one path drawn
/// from `stream`. Builds a fresh [`PathIntegrator`] each call; reuse one
/// directly when integrating many paths.
pub fn perpetual_integral_one_path(
    params: &ModelParams,
    f: &TestFunction,
    x: &[f64],
    spec: &PerpetualSpec,
    stream: &mut Stream,
) -> Result<f64> {
    check_dims(params, f, x)?;
    let integ = PathIntegrator::new(*params, spec.t_max, spec.grid)?;
    Ok(integ.trapezoid(&integ.integrand_values(f, x, stream)))
}

fn check_dims(params: &ModelParams, f: &TestFunction, x: &[f64]) -> Result<()> {
    if f.dim() != params.d || x.len() != params.d {
        return Err(Error::domain(format!(
            "dimension mismatch: d = {}, f has {}, x has {}",
            params.d,
            f.dim(),
            x.len()
        )));
    }
    Ok(())
}

/// Runs `op(i, stream)` for i in 0..n, in parallel, where call i draws from
/// stream `first_stream + i` of `master_seed`. The output is in index order
/// whatever the scheduling.
pub fn map_streams<T, F>(n: usize, master_seed: u64, first_stream: u64, op: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut Stream) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut stream = SeedSpec::new(master_seed, first_stream + i as u64).stream();
            op(i, &mut stream)
        })
        .collect()
}

/// Runs `op` on a pool of at most `threads` workers (`None`: rayon's default).
pub fn with_thread_cap<R, F>(threads: Option<usize>, op: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(op()),
        Some(0) => Err(Error::domain("requires threads >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(op))
            .map_err(|e| Error::domain(format!("cannot start worker pool: {e}"))),
    }
}

/// Every k-th path enters the grid-vs-half-grid comparison; about 1% of the
/// paths, and at least min(n, 100).
fn richardson_stride(n: usize) -> usize {
    (n / 100).clamp(1, 100)
}

/// Estimates V(f, x) = E ∫₀^∞ f(x + B(t)) dt from `spec.n_paths` paths.
///
/// The mean covers [0, t_max] only; `tail_bound` bounds the rest, and
/// `discretization_bound` is |mean difference| + 3·SE between the grid and
/// its every-other-node subgrid on a subsample, an empirical figure.
pub fn estimate_potential_mc(
    params: &ModelParams,
    f: &TestFunction,
    x: &[f64],
    spec: &PerpetualSpec,
) -> Result<Estimate> {
    params.check_green()?;
    check_dims(params, f, x)?;
    if spec.n_paths == 0 {
        return Err(Error::domain("requires paths >= 1"));
    }
    let integ = PathIntegrator::new(*params, spec.t_max, spec.grid)?;
    let stride = richardson_stride(spec.n_paths);
    let per_path = map_streams(spec.n_paths, spec.seed, 0, |i, stream| {
        let v = integ.integrand_values(f, x, stream);
        let full = integ.trapezoid(&v);
        let diff = (i % stride == 0).then(|| full - integ.trapezoid_coarse(&v));
        (full, diff)
    });
    let values: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let diffs: Vec<f64> = per_path.iter().filter_map(|p| p.1).collect();
    let (mean, std_error) = mean_and_std_error(&values);
    let (dmean, dse) = mean_and_std_error(&diffs);
    let discretization_bound = dmean.abs() + 3.0 * dse;
    Ok(Estimate {
        params: *params,
        f_descriptor: f.descriptor(),
        x: x.to_vec(),
        n_paths: spec.n_paths,
        t_max: spec.t_max,
        grid: spec.grid,
        mean,
        std_error,
        tail_bound: tail_bound(params, f, spec.t_max)?,
        discretization_bound,
        discretization_note: format!(
            "empirical: grid vs every-other-node grid on {} of {} paths, |mean diff| + 3 SE; not a proven bound",
            diffs.len(),
            spec.n_paths
        ),
        seed: spec.seed,
    })
}

/// Upper bound on ∫_{t_max}^∞ E f(x + B(t)) dt for f ≥ 0, any x.
///
/// Conditionally on Y_β = τ the process is Gaussian with covariance τ t^α I,
/// so E f(x + B(t)) ≤ ∫ M_β(τ) min(‖f‖_∞, ‖f‖_1 (2π τ t^α)^{−d/2}) dτ. When
/// E[Y^{−d/2}] is finite (β = 1) the ‖f‖_1 term alone integrates to
/// ‖f‖_1 (2π)^{−d/2} E[Y^{−d/2}] t_max^{1−dα/2}/(dα/2 − 1). Otherwise that
/// moment diverges and the minimum is integrated numerically, first over t in
/// closed form and then over τ.
pub fn tail_bound(params: &ModelParams, f: &TestFunction, t_max: f64) -> Result<f64> {
    let d = params.d as f64;
    let p = 0.5 * params.alpha * d;
    if p <= 1.0 {
        return Err(Error::domain(format!(
            "requires d*alpha > 2 (got d*alpha = {})",
            2.0 * p
        )));
    }
    if !(t_max > 0.0) {
        return Err(Error::domain(format!("requires t_max > 0 (got {t_max})")));
    }
    if t_max.is_infinite() {
        return Ok(0.0);
    }
    let b = f.l1_norm() * (2.0 * std::f64::consts::PI).powf(-0.5 * d);
    if let Ok(moment) = m_wright_moment(params.beta, -0.5 * d) {
        return Ok(b * moment * t_max.powf(1.0 - p) / (p - 1.0));
    }
    let a = f.sup_norm();
    if a == 0.0 || b == 0.0 {
        return Ok(0.0);
    }
    let h = |tau: f64| min_bound_time_tail(a, b, d, p, tau, t_max);
    // below tau_c the ‖f‖_∞ cap is active somewhere beyond t_max
    let tau_c = (b / (a * t_max.powf(p))).powf(2.0 / d);
    let mut breaks = vec![0.0];
    for c in [tau_c, 1.0, 2.0, 4.0] {
        if c > *breaks.last().unwrap() {
            breaks.push(c);
        }
    }
    let beta = params.beta;
    let r = quad::integrate_breaks_to_infinity(
        |tau| {
            if !(tau > 0.0 && tau.is_finite()) {
                return 0.0;
            }
            match m_wright(beta, tau) {
                Ok(m) if m.value > 0.0 => m.value * h(tau),
                Ok(_) => 0.0,
                Err(_) => f64::NAN,
            }
        },
        &breaks,
        Tolerance::new(0.0, 1e-9),
    )?;
    // round up by the quadrature error estimate
    Ok(r.value + r.abs_error)
}

/// ∫_T^∞ min(A, B τ^{−d/2} t^{−p}) dt.
pub(crate) fn min_bound_time_tail(a: f64, b: f64, d: f64, p: f64, tau: f64, big_t: f64) -> f64 {
    let t_star = ((b.ln() - 0.5 * d * tau.ln() - a.ln()) / p).exp();
    if t_star <= big_t {
        b * tau.powf(-0.5 * d) * big_t.powf(1.0 - p) / (p - 1.0)
    } else {
        a * (t_star * p / (p - 1.0) - big_t)
    }
}
