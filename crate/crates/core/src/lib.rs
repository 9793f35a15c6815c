//! Generalized grey Brownian motion B_{β,α} in ℝ^d: special functions,
//! exact samplers, path generation, densities, Green potentials and a Monte
//! Carlo check of the perpetual-integral identity
//!
//! E ∫₀^∞ f(x + B_{β,α}(t)) dt = D(β,α,d) ∫ f(x + y) |y|^{2/α − d} dy.

pub mod error;
pub mod fbm;
pub mod green;
pub mod ggbm;
pub mod linalg;
pub mod montecarlo;
pub mod params;
pub mod quad;
pub mod randvar;
pub mod specfun;
pub mod sphere;
pub mod stats;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use specfun::EvalResult;
pub use fbm::{GridSpec, Path};
pub use randvar::SeedSpec;
