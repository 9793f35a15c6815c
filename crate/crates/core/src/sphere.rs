//! Product cubature on the unit sphere S^{d−1} and spherical-cap areas.

use std::f64::consts::PI;

use crate::quad::gauss_legendre;
use crate::specfun::gamma;

/// Surface area of S^{d−1}: 2π^{d/2}/Γ(d/2).
pub fn unit_sphere_area(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    2.0 * PI.powf(h) / gamma(h).expect("d >= 1")
}

/// Fraction of S^{d−1} (d ≥ 2) covered by the cap {ω : ω₁ ≥ h}.
pub fn cap_fraction(d: usize, h: f64) -> f64 {
    if h >= 1.0 {
        return 0.0;
    }
    if h <= -1.0 {
        return 1.0;
    }
    let half = 0.5 * statrs::function::beta::beta_reg(0.5 * (d as f64 - 1.0), 0.5, 1.0 - h * h);
    if h >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// Directions and weights with Σ w = |S^{d−1}|. `nodes` controls resolution:
/// d = 2 uses 2·nodes equispaced angles; d ≥ 3 recurses on ω = (cos θ, sin θ·v)
/// with `nodes` Gauss–Legendre points in θ.
pub fn product_rule(d: usize, nodes: usize) -> Vec<(Vec<f64>, f64)> {
    assert!(d >= 1 && nodes >= 1);
    match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let m = 2 * nodes;
            (0..m)
                .map(|k| {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    (vec![phi.cos(), phi.sin()], 2.0 * PI / m as f64)
                })
                .collect()
        }
        _ => {
            let inner = product_rule(d - 1, nodes);
            let (x, w) = gauss_legendre(nodes);
            let mut out = Vec::with_capacity(nodes * inner.len());
            let power = (d - 2) as i32;
            for (xi, wi) in x.iter().zip(&w) {
                let theta = 0.5 * PI * (xi + 1.0);
                let (s, c) = theta.sin_cos();
                let wt = 0.5 * PI * wi * s.powi(power);
                for (v, wv) in &inner {
                    let mut dir = Vec::with_capacity(d);
                    dir.push(c);
                    dir.extend(v.iter().map(|x| s * x));
                    out.push((dir, wt * wv));
                }
            }
            out
        }
    }
}
