//! Scalar special functions on the real line: Γ, the Mittag-Leffler function
//! on the negative axis, the M-Wright density, its moments, and the two
//! constants of the Green function.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quad::{self, Tolerance};
use crate::sum::CompensatedSum;

/// A value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub est_abs_error: f64,
    /// Series terms or integrand evaluations spent.
    pub terms_used: usize,
}

impl EvalResult {
    fn exact(value: f64) -> Self {
        Self {
            value,
            est_abs_error: value.abs() * f64::EPSILON,
            terms_used: 0,
        }
    }
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// sin(πx), accurate near the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    // r in [-1, 1]
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Euler's Γ(x) for real x; reflection below 1/2.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x < 0.5 {
        let s = sin_pi(x);
        return Ok(PI / (s * gamma(1.0 - x)?));
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    if x == x.floor() && x <= 30.0 {
        return Ok((2..x as u64).fold(1.0, |acc, k| acc * k as f64));
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    let a = lanczos_sum(xm);
    // split the power so t^(x-1/2) cannot overflow before e^{-t} is applied
    let half = t.powf(0.5 * (xm + 0.5));
    Ok((2.0 * PI).sqrt() * half * ((-t).exp() * half) * a)
}

/// ln|Γ(x)|.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x < 0.5 {
        let s = sin_pi(x).abs();
        return Ok(PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln())
}

/// 1/Γ(x), zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / gamma(x).expect("not a pole")
    }
}

fn check_beta_closed(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("requires 0 < beta <= 1 (got beta = {beta})")))
    }
}

/// Accept the alternating series only if rounding in the partial sums stays
/// below this absolute level.
const ML_SERIES_ABS_TOL: f64 = 1e-13;
const ML_MAX_TERMS: usize = 2000;

/// E_β(z) for 0 < β ≤ 1 and z ≤ 0.
///
/// The Taylor series is summed with compensation while the cancellation it
/// suffers stays below 1e-13; beyond that the integral representation
///
/// E_β(−x) = sin(βπ)/(βπ) · (1/x) ∫₀^∞ exp(−u^{1/β}) / ((u/x)² + 2(u/x)cos βπ + 1) du
///
/// is evaluated adaptively.
pub fn mittag_leffler(beta: f64, z: f64) -> Result<EvalResult> {
    check_beta_closed(beta)?;
    if !(z <= 0.0) {
        return Err(Error::domain(format!(
            "mittag_leffler requires z <= 0 (got z = {z})"
        )));
    }
    if z == 0.0 {
        return Ok(EvalResult::exact(1.0));
    }
    if beta == 1.0 {
        return Ok(EvalResult::exact(z.exp()));
    }
    if z == f64::NEG_INFINITY {
        return Ok(EvalResult::exact(0.0));
    }
    if let Some(r) = mittag_leffler_series(beta, z) {
        return Ok(r);
    }
    mittag_leffler_integral(beta, -z)
}

fn mittag_leffler_series(beta: f64, z: f64) -> Option<EvalResult> {
    let x = -z;
    // The absolute series is E_β(x) ≥ exp-like growth in x^{1/β}; skip
    // obviously hopeless cases before summing.
    if x.powf(1.0 / beta) > 40.0 {
        return None;
    }
    let lx = x.ln();
    let mut sum = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut last = f64::INFINITY;
    let mut n = 0;
    while n < ML_MAX_TERMS {
        let mag = if n == 0 {
            1.0
        } else {
            (n as f64 * lx - ln_gamma(beta * n as f64 + 1.0).ok()?).exp()
        };
        let term = if n % 2 == 0 { mag } else { -mag };
        sum.add(term);
        abs_sum += mag;
        n += 1;
        // terms are eventually monotone; stop after they are negligible
        if mag < 1e-18 * abs_sum && mag < last {
            break;
        }
        last = mag;
    }
    let err = 8.0 * f64::EPSILON * abs_sum + last.min(1.0) * 1e-18;
    if err > ML_SERIES_ABS_TOL || n >= ML_MAX_TERMS {
        return None;
    }
    Some(EvalResult {
        value: sum.value(),
        est_abs_error: err,
        terms_used: n,
    })
}

fn mittag_leffler_integral(beta: f64, x: f64) -> Result<EvalResult> {
    let c = (PI * beta).cos();
    let inv_beta = 1.0 / beta;
    let integrand = |u: f64| {
        let w = u / x;
        (-u.powf(inv_beta)).exp() / (w * w + 2.0 * w * c + 1.0)
    };
    let mut breaks = vec![0.0, 1.0];
    // near-singular peak of the denominator at w = -cos βπ (β > 1/2), of
    // relative width sin βπ; bracket it so some panel resolves it
    if c < 0.0 {
        let peak = -c * x;
        let half_width = x * sin_pi(beta);
        breaks.push((peak - half_width).max(0.0));
        breaks.push(peak + half_width);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    let r = quad::integrate_breaks_to_infinity(integrand, &breaks, Tolerance::new(1e-15, 1e-13))?;
    let pref = sin_pi(beta) / (PI * beta) / x;
    let err = (pref * r.abs_error).abs();
    if err > 1e-10 {
        return Err(Error::Convergence {
            what: "Mittag-Leffler integral representation",
            est_error: err,
        });
    }
    Ok(EvalResult {
        value: pref * r.value,
        est_abs_error: err.max(4.0 * f64::EPSILON * (pref * r.value).abs()),
        terms_used: r.evals,
    })
}

/// Argument bound for the M-Wright power series; larger τ use the integral form.
pub const M_WRIGHT_SERIES_MAX_TAU: f64 = 1.0;

/// M_β(τ) for 0 < β < 1 and τ ≥ 0.
///
/// Series M_β(τ) = (1/π) Σ_{n≥1} (−τ)^{n−1}/(n−1)! · Γ(βn) sin(πβn) for
/// τ ≤ 1 (reflection already applied to 1/Γ(1−βn)); for larger τ, or when
/// the series cancels too badly, the representation
///
/// M_β(τ) = τ^{β/(1−β)}/(1−β) ∫₀¹ A(u) exp(−A(u) τ^{1/(1−β)}) du,
/// A(u) = sin(βπu)^{β/(1−β)} sin((1−β)πu) / sin(πu)^{1/(1−β)},
///
/// which is the density of (E/A(U))^{1−β} for E ~ Exp(1), U ~ U(0,1).
pub fn m_wright(beta: f64, tau: f64) -> Result<EvalResult> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "m_wright requires 0 < beta < 1 (got beta = {beta}); beta = 1 is the point mass at 1"
        )));
    }
    if !(tau >= 0.0) {
        return Err(Error::domain(format!("m_wright requires tau >= 0 (got tau = {tau})")));
    }
    if tau == 0.0 {
        return Ok(EvalResult::exact(recip_gamma(1.0 - beta)));
    }
    if tau.is_infinite() {
        return Ok(EvalResult::exact(0.0));
    }
    if tau <= M_WRIGHT_SERIES_MAX_TAU {
        if let Some(r) = m_wright_series(beta, tau) {
            return Ok(r);
        }
    }
    m_wright_integral(beta, tau)
}

fn m_wright_series(beta: f64, tau: f64) -> Option<EvalResult> {
    let lt = tau.ln();
    let mut sum = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut n = 1usize;
    let mut last = f64::INFINITY;
    while n < 4000 {
        let nf = n as f64;
        let s = sin_pi(beta * nf);
        let lmag = (nf - 1.0) * lt - ln_gamma(nf).ok()? + ln_gamma(beta * nf).ok()?;
        let mag = lmag.exp() * s.abs() / PI;
        let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 } * s.signum();
        sum.add(sign * mag);
        abs_sum += mag;
        let bound = lmag.exp() / PI;
        if n > 2 && bound < 1e-17 * abs_sum.max(f64::MIN_POSITIVE) && bound < last {
            break;
        }
        last = bound;
        n += 1;
    }
    let value = sum.value();
    let err = 8.0 * f64::EPSILON * abs_sum;
    if value <= 0.0 || err > 1e-12 * value.abs() {
        return None;
    }
    Some(EvalResult {
        value,
        est_abs_error: err,
        terms_used: n,
    })
}

/// ln A(u) for the Kanter representation; also used by the sampler.
pub(crate) fn kanter_ln_a(beta: f64, u: f64) -> f64 {
    let b1 = 1.0 - beta;
    (beta / b1) * sin_pi(beta * u).ln() + sin_pi(b1 * u).ln() - sin_pi(u).ln() / b1
}

fn m_wright_integral(beta: f64, tau: f64) -> Result<EvalResult> {
    let b1 = 1.0 - beta;
    let z = tau.powf(1.0 / b1);
    let a0 = beta.powf(beta / b1) * b1;
    let ln_pref = (beta / b1) * tau.ln() - b1.ln() - a0 * z;
    if ln_pref < -745.0 {
        return Ok(EvalResult {
            value: 0.0,
            est_abs_error: f64::MIN_POSITIVE,
            terms_used: 0,
        });
    }
    let integrand = |u: f64| {
        if u <= 0.0 {
            return a0;
        }
        if u >= 1.0 {
            return 0.0;
        }
        let la = kanter_ln_a(beta, u);
        let a = la.exp();
        if !a.is_finite() {
            return 0.0;
        }
        (la - (a - a0) * z).exp()
    };
    let mut breaks = vec![0.0];
    let mut w = (1.0 / z.sqrt()).min(0.25);
    while w < 1.0 {
        breaks.push(w);
        w *= 4.0;
    }
    breaks.push(1.0);
    let r = quad::integrate_with_breaks(integrand, &breaks, Tolerance::new(0.0, 1e-13))?;
    let pref = ln_pref.exp();
    Ok(EvalResult {
        value: pref * r.value,
        est_abs_error: pref * r.abs_error,
        terms_used: r.evals,
    })
}

/// ∫₀^∞ τ^δ M_β(τ) dτ = Γ(δ+1)/Γ(βδ+1).
///
/// For β < 1 the density is positive at the origin, so orders δ ≤ −1 diverge.
/// For β = 1 (point mass at τ = 1) every order equals 1.
pub fn m_wright_moment(beta: f64, delta: f64) -> Result<f64> {
    check_beta_closed(beta)?;
    if beta == 1.0 {
        return Ok(1.0);
    }
    if !(delta > -1.0) {
        return Err(Error::Divergent(format!(
            "M-Wright moment of order delta = {delta} (requires delta > -1 for beta < 1)"
        )));
    }
    // βδ + 1 > 1 − β > 0 on this domain, so the denominator never has a pole.
    Ok(gamma(delta + 1.0)? / gamma(beta * delta + 1.0)?)
}

/// C(α, d) = (1/α) 2^{−1/α} π^{−d/2} Γ(d/2 − 1/α), the constant in
/// ∫₀^∞ (2π t^α τ)^{−d/2} exp(−r²/(2t^ατ)) dt = C(α,d) τ^{−1/α} r^{2/α−d}.
pub fn time_kernel_constant(alpha: f64, d: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::domain(format!("requires 0 < alpha <= 2 (got alpha = {alpha})")));
    }
    let df = d as f64;
    if !(df * alpha > 2.0) {
        return Err(Error::domain(format!(
            "requires d*alpha > 2 (got d*alpha = {})",
            df * alpha
        )));
    }
    Ok(2f64.powf(-1.0 / alpha) / alpha * PI.powf(-0.5 * df) * gamma(0.5 * df - 1.0 / alpha)?)
}

/// D(β, α, d) = C(α, d) Γ(1−1/α)/Γ(1−β/α).
///
/// Defined for dα > 2 with 1 < α ≤ 2. The Brownian case β = α = 1, d ≥ 3 is
/// admitted with the gamma ratio taken as its limit 1, which reproduces the
/// classical constant Γ(d/2−1)/(2π^{d/2}).
pub fn green_constant(params: &ModelParams) -> Result<f64> {
    params.check_green()?;
    let c = time_kernel_constant(params.alpha, params.d)?;
    if params.is_brownian() {
        return Ok(c);
    }
    Ok(c * m_wright_moment(params.beta, -1.0 / params.alpha)?)
}
