//! Green measure and Green potential of ggBm.
//!
//! For dα > 2, 1 < α ≤ 2 the Green measure has density D/|x − y|^{d−2/α} and
//! the potential of f ∈ CL(ℝ^d) is V(f, x) = D ∫ f(x + y) |y|^{2/α−d} dy.
//! The only difficulty in V is the integrable singularity at y = 0, which the
//! substitution u = |y|^{2/α} removes:
//! ∫₀^R ρ^{2/α−1} g(ρ) dρ = (α/2) ∫₀^{R^{2/α}} g(u^{α/2}) du.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::{self, Tolerance};
use crate::specfun::{green_constant, time_kernel_constant};
use crate::sphere::{cap_fraction, product_rule, unit_sphere_area};

/// Shape of a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionKind {
    /// exp(−|y − c|²/(2σ²)).
    Gaussian { sigma: f64 },
    /// exp(1 − 1/(1 − |y − c|²/r²)) inside the ball, 0 outside (smooth, compact support).
    Bump { radius: f64 },
    /// 1 on the closed ball |y − c| ≤ r. Bounded and integrable but not
    /// continuous; its potential is the Green measure of the ball.
    IndicatorBall { radius: f64 },
    Custom { label: String },
}

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A bounded integrable function ℝ^d → ℝ together with its CL(ℝ^d) data.
#[derive(Clone)]
pub struct TestFunction {
    kind: TestFunctionKind,
    center: Vec<f64>,
    sup_norm: f64,
    l1_norm: f64,
    eval: EvalFn,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("kind", &self.kind)
            .field("center", &self.center)
            .field("sup_norm", &self.sup_norm)
            .field("l1_norm", &self.l1_norm)
            .finish()
    }
}

/// Serializable summary of a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionDescriptor {
    #[serde(flatten)]
    pub kind: TestFunctionKind,
    pub center: Vec<f64>,
    pub sup_norm: f64,
    pub l1_norm: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn bump_profile(rho: f64, radius: f64) -> f64 {
    let s = rho / radius;
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

impl TestFunction {
    pub fn gaussian(center: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::domain(format!("requires sigma > 0 (got {sigma})")));
        }
        let d = center.len() as f64;
        let c = center.clone();
        let inv = 1.0 / (2.0 * sigma * sigma);
        Ok(Self {
            kind: TestFunctionKind::Gaussian { sigma },
            sup_norm: 1.0,
            l1_norm: (2.0 * PI * sigma * sigma).powf(0.5 * d),
            eval: Arc::new(move |y: &[f64]| {
                let r2: f64 = y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                (-r2 * inv).exp()
            }),
            center,
        })
    }

    /// The unit Gaussian exp(−|y|²/2) centred at the origin.
    pub fn unit_gaussian(d: usize) -> Self {
        Self::gaussian(vec![0.0; d], 1.0).expect("sigma = 1")
    }

    pub fn bump(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("requires radius > 0 (got {radius})")));
        }
        let d = center.len();
        let area = unit_sphere_area(d);
        let l1 = area
            * quad::integrate(
                |r| r.powi(d as i32 - 1) * bump_profile(r, radius),
                0.0,
                radius,
                Tolerance::new(0.0, 1e-13),
            )?
            .value;
        let c = center.clone();
        Ok(Self {
            kind: TestFunctionKind::Bump { radius },
            sup_norm: 1.0,
            l1_norm: l1,
            eval: Arc::new(move |y: &[f64]| bump_profile(dist(y, &c), radius)),
            center,
        })
    }

    pub fn indicator_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("requires radius > 0 (got {radius})")));
        }
        let d = center.len();
        let c = center.clone();
        Ok(Self {
            kind: TestFunctionKind::IndicatorBall { radius },
            sup_norm: 1.0,
            l1_norm: unit_sphere_area(d) * radius.powi(d as i32) / d as f64,
            eval: Arc::new(move |y: &[f64]| if dist(y, &c) <= radius { 1.0 } else { 0.0 }),
            center,
        })
    }

    /// A user-supplied function with declared norms. `center` is only a
    /// reference point for descriptors; no symmetry is assumed.
    pub fn custom(
        label: impl Into<String>,
        d: usize,
        sup_norm: f64,
        l1_norm: f64,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: TestFunctionKind::Custom {
                label: label.into(),
            },
            center: vec![0.0; d],
            sup_norm,
            l1_norm,
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn kind(&self) -> &TestFunctionKind {
        &self.kind
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// ‖f‖_∞ + ‖f‖_1.
    pub fn cl_norm(&self) -> f64 {
        self.sup_norm + self.l1_norm
    }

    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.eval)(y)
    }

    /// The same function multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            kind: self.kind.clone(),
            center: self.center.clone(),
            sup_norm: self.sup_norm * s.abs(),
            l1_norm: self.l1_norm * s.abs(),
            eval: Arc::new(move |y: &[f64]| s * inner(y)),
        }
    }

    pub fn descriptor(&self) -> TestFunctionDescriptor {
        TestFunctionDescriptor {
            kind: self.kind.clone(),
            center: self.center.clone(),
            sup_norm: self.sup_norm,
            l1_norm: self.l1_norm,
        }
    }

    fn radial_profile(&self) -> Option<Box<dyn Fn(f64) -> f64 + '_>> {
        match self.kind {
            TestFunctionKind::Gaussian { sigma } => {
                let inv = 1.0 / (2.0 * sigma * sigma);
                Some(Box::new(move |r| (-r * r * inv).exp()))
            }
            TestFunctionKind::Bump { radius } => Some(Box::new(move |r| bump_profile(r, radius))),
            TestFunctionKind::IndicatorBall { radius } => {
                Some(Box::new(move |r| if r <= radius { 1.0 } else { 0.0 }))
            }
            TestFunctionKind::Custom { .. } => None,
        }
    }

    /// Upper bound on ∫_{|y − p| > R} |f(y)| dy.
    pub fn l1_tail_bound(&self, p: &[f64], big_r: f64) -> f64 {
        let a = dist(p, &self.center);
        let rho = big_r - a;
        match self.kind {
            TestFunctionKind::Gaussian { sigma } if rho > 0.0 => {
                let d = self.dim() as f64;
                self.l1_norm * statrs::function::gamma::gamma_ur(0.5 * d, rho * rho / (2.0 * sigma * sigma))
            }
            TestFunctionKind::Bump { radius } | TestFunctionKind::IndicatorBall { radius }
                if rho >= radius =>
            {
                0.0
            }
            _ => self.l1_norm,
        }
    }
}

/// Green measure density D/|x − y|^{d − 2/α}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenDensity {
    pub params: ModelParams,
    #[serde(rename = "D")]
    pub d_const: f64,
    /// d − 2/α, in (0, d).
    pub exponent: f64,
}

impl GreenDensity {
    pub fn new(params: ModelParams) -> Result<Self> {
        let d_const = green_constant(&params)?;
        Ok(Self {
            params,
            d_const,
            exponent: params.d as f64 - 2.0 / params.alpha,
        })
    }

    /// 2/α, the radial power after multiplying by the volume element.
    fn radial_power(&self) -> f64 {
        2.0 / self.params.alpha
    }

    /// K with |V(f, x)| ≤ K ‖f‖_CL for all f ∈ CL(ℝ^d):
    /// ∫_{|y|≤1} |y|^{2/α−d} dy = |S^{d−1}| α/2 and |y|^{2/α−d} ≤ 1 outside,
    /// so K = D · max(|S^{d−1}| α/2, 1).
    pub fn continuity_constant(&self) -> f64 {
        let near = unit_sphere_area(self.params.d) * 0.5 * self.params.alpha;
        self.d_const * near.max(1.0)
    }
}

/// D/|x − y|^{d − 2/α}; undefined on the diagonal.
pub fn green_density_at(gd: &GreenDensity, x: &[f64], y: &[f64]) -> Result<f64> {
    let r = dist(x, y);
    if r == 0.0 {
        return Err(Error::Divergent("Green density at x = y".into()));
    }
    Ok(gd.d_const * r.powf(-gd.exponent))
}

/// Closed form of ∫₀^∞ (2π t^α τ)^{−d/2} exp(−r²/(2 t^α τ)) dt = C(α,d) τ^{−1/α} r^{2/α−d}.
pub fn time_integral_kernel(alpha: f64, d: usize, tau: f64, r: f64) -> Result<f64> {
    if !(tau > 0.0 && r > 0.0) {
        return Err(Error::domain(format!(
            "requires tau > 0 and r > 0 (got tau = {tau}, r = {r})"
        )));
    }
    Ok(time_kernel_constant(alpha, d)? * tau.powf(-1.0 / alpha) * r.powf(2.0 / alpha - d as f64))
}

/// Quadrature controls for [`potential`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPotentialSpec {
    pub rel_tol: f64,
    /// Truncation radius around x. Chosen automatically for the built-in
    /// kinds when `None`; required for custom functions.
    pub r_max: Option<f64>,
    /// Angular resolution of the sphere rule used for custom functions.
    pub angular_nodes: usize,
}

impl Default for RadialPotentialSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            r_max: None,
            angular_nodes: 24,
        }
    }
}

/// Result of [`potential`]. The truncation beyond `r_max` is reported in
/// `tail_bound`, never added to `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialValue {
    pub value: f64,
    pub quad_error: f64,
    pub tail_bound: f64,
    /// K of the bound |V| ≤ K ‖f‖_CL.
    pub continuity_constant: f64,
}

/// V(f, x) = D ∫ f(x + y) |y|^{2/α−d} dy.
///
/// Functions radially symmetric about a centre c reduce to one radial integral
/// of the spherical mean of f over spheres about x; custom functions use a
/// product rule on S^{d−1} times a radial integral along each direction.
pub fn potential(
    gd: &GreenDensity,
    f: &TestFunction,
    x: &[f64],
    quad_spec: &RadialPotentialSpec,
) -> Result<PotentialValue> {
    let d = gd.params.d;
    if f.dim() != d || x.len() != d {
        return Err(Error::domain(format!(
            "dimension mismatch: d = {d}, f has {}, x has {}",
            f.dim(),
            x.len()
        )));
    }
    let a = dist(x, f.center());
    let big_r = match (quad_spec.r_max, &f.kind) {
        (Some(r), _) => r,
        (None, TestFunctionKind::Gaussian { sigma }) => a + 14.0 * sigma,
        (None, TestFunctionKind::Bump { radius } | TestFunctionKind::IndicatorBall { radius }) => {
            a + radius
        }
        (None, TestFunctionKind::Custom { .. }) => {
            return Err(Error::domain("custom test functions require an explicit r_max"))
        }
    };
    let tail_bound = gd.d_const * big_r.powf(-gd.exponent) * f.l1_tail_bound(x, big_r);
    let tol = Tolerance::new(0.0, quad_spec.rel_tol);
    let half_alpha = 0.5 * gd.params.alpha;
    let u_of = |r: f64| r.powf(gd.radial_power());
    let u_max = u_of(big_r);

    let (integral, err) = match f.radial_profile() {
        Some(profile) => {
            let mean = SphericalMean {
                d,
                a,
                kind: &f.kind,
                profile: &*profile,
            };
            let mut breaks = vec![0.0, u_max];
            let support = match f.kind {
                TestFunctionKind::Gaussian { sigma } => 6.0 * sigma,
                TestFunctionKind::Bump { radius } | TestFunctionKind::IndicatorBall { radius } => radius,
                TestFunctionKind::Custom { .. } => unreachable!(),
            };
            for r in [a - support, a, a + support] {
                if r > 0.0 && r < big_r {
                    breaks.push(u_of(r));
                }
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let r = quad::integrate_with_breaks(|u| mean.at(u.powf(half_alpha)), &breaks, tol)?;
            let scale = unit_sphere_area(d) * half_alpha;
            (scale * r.value, scale * r.abs_error)
        }
        None => {
            let mut total = 0.0;
            let mut err = 0.0;
            let mut point = vec![0.0; d];
            for (dir, w) in product_rule(d, quad_spec.angular_nodes) {
                let r = quad::integrate(
                    |u| {
                        let rho = u.powf(half_alpha);
                        let mut p = point.clone();
                        for j in 0..d {
                            p[j] = x[j] + rho * dir[j];
                        }
                        f.eval(&p)
                    },
                    0.0,
                    u_max,
                    tol,
                )?;
                total += w * r.value;
                err += w * r.abs_error;
                point.copy_from_slice(x);
            }
            (half_alpha * total, half_alpha * err)
        }
    };
    Ok(PotentialValue {
        value: gd.d_const * integral,
        quad_error: gd.d_const * err,
        tail_bound,
        continuity_constant: gd.continuity_constant(),
    })
}

/// Mean of a radial profile (about c, |x − c| = a) over the sphere |y − x| = ρ.
struct SphericalMean<'a> {
    d: usize,
    a: f64,
    kind: &'a TestFunctionKind,
    profile: &'a dyn Fn(f64) -> f64,
}

impl SphericalMean<'_> {
    fn at(&self, rho: f64) -> f64 {
        let (d, a) = (self.d, self.a);
        if a == 0.0 || rho == 0.0 {
            return (self.profile)(rho.max(a));
        }
        match *self.kind {
            TestFunctionKind::IndicatorBall { radius } => {
                cap_fraction(d, (rho * rho + a * a - radius * radius) / (2.0 * rho * a))
            }
            TestFunctionKind::Gaussian { sigma } => {
                // exp(−(ρ² + a² − 2ρa cos θ)/(2σ²)) = exp(−(ρ−a)²/(2σ²)) · exp(−ρa(1 − cos θ)/σ²)
                let base = (-(rho - a) * (rho - a) / (2.0 * sigma * sigma)).exp();
                if base == 0.0 {
                    return 0.0;
                }
                let k = rho * a / (sigma * sigma);
                let upper = if k > 1.0 {
                    // the integrand is below e^{-40} beyond this angle
                    (1.0 - 40.0 / k).max(-1.0).acos()
                } else {
                    PI
                };
                base * self.angular_mean(upper, |c| (-k * (1.0 - c)).exp())
            }
            TestFunctionKind::Bump { radius } => {
                let h = (rho * rho + a * a - radius * radius) / (2.0 * rho * a);
                if h >= 1.0 {
                    return 0.0;
                }
                let upper = h.max(-1.0).acos();
                let profile = self.profile;
                self.angular_mean(upper, |c| profile((rho * rho + a * a - 2.0 * rho * a * c).max(0.0).sqrt()))
            }
            TestFunctionKind::Custom { .. } => unreachable!(),
        }
    }

    /// (1/Z) ∫₀^{upper} g(cos θ) sin^{d−2}θ dθ with Z = ∫₀^π sin^{d−2}θ dθ.
    fn angular_mean(&self, upper: f64, g: impl Fn(f64) -> f64) -> f64 {
        let p = self.d as i32 - 2;
        let z = PI.sqrt() * crate::specfun::gamma(0.5 * (self.d as f64 - 1.0)).unwrap()
            / crate::specfun::gamma(0.5 * self.d as f64).unwrap();
        let r = quad::integrate(
            |th: f64| g(th.cos()) * th.sin().powi(p),
            0.0,
            upper,
            Tolerance::new(1e-15, 1e-12),
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
        r / z
    }
}

/// G(x, B(c, r)) = D ∫_{|y−c|≤r} |x − y|^{2/α−d} dy: the expected time the
/// process started at x spends in the ball.
///
/// Spheres about x meet the ball in caps, so with a = |x − c|
/// G = D |S^{d−1}| ∫ ρ^{2/α−1} F(ρ) dρ, where F(ρ) = 1 for ρ ≤ r − a and is the
/// cap fraction on |r − a| < ρ < r + a. For x = c this is D |S^{d−1}| r^{2/α} α/2.
pub fn green_measure_of_ball(gd: &GreenDensity, x: &[f64], center: &[f64], r: f64) -> Result<f64> {
    let d = gd.params.d;
    if x.len() != d || center.len() != d {
        return Err(Error::domain("dimension mismatch"));
    }
    if !(r > 0.0) {
        return Err(Error::domain(format!("requires r > 0 (got r = {r})")));
    }
    let a = dist(x, center);
    let p = gd.radial_power();
    let half_alpha = 0.5 * gd.params.alpha;
    let area = unit_sphere_area(d);
    let inner = if a < r {
        half_alpha * (r - a).powf(p)
    } else {
        0.0
    };
    if a == 0.0 {
        return Ok(gd.d_const * area * inner);
    }
    let lo = (r - a).abs().powf(p);
    let hi = (r + a).powf(p);
    let shell = quad::integrate(
        |u| {
            let rho = u.powf(half_alpha);
            cap_fraction(d, (rho * rho + a * a - r * r) / (2.0 * rho * a))
        },
        lo,
        hi,
        Tolerance::new(1e-15, 1e-12),
    )?;
    Ok(gd.d_const * area * (inner + half_alpha * shell.value))
}
