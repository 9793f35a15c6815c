//! Seeded random streams and exact samplers for the one-sided stable law and
//! for Y_β, the random variable with density M_β.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::kanter_ln_a;

/// Identifies one reproducible random stream: the ChaCha20 key is expanded
/// from `master_seed`, and `stream_index` selects the ChaCha stream (nonce).
/// Distinct indices give non-overlapping keystreams on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// The same master seed on another stream.
    pub fn with_stream(self, stream_index: u64) -> Self {
        Self {
            stream_index,
            ..self
        }
    }

    pub fn stream(&self) -> Stream {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        Stream { rng }
    }
}

/// A random stream. Confine each stream to one worker at a time.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha20Rng,
}

impl Stream {
    /// Uniform on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.normal();
        }
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// One draw of Y_β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YBetaSample {
    pub value: f64,
    pub beta: f64,
}

/// Positive S with E[e^{−sS}] = e^{−s^β}, by Kanter's construction
/// S = (A(U)/E)^{(1−β)/β} with U uniform on (0,1) and E standard exponential.
pub fn sample_one_sided_stable(beta: f64, stream: &mut Stream) -> Result<f64> {
    Ok(ln_one_sided_stable(beta, stream)?.exp())
}

fn ln_one_sided_stable(beta: f64, stream: &mut Stream) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "one-sided stable sampling requires 0 < beta < 1 (got beta = {beta})"
        )));
    }
    let u = stream.uniform_open();
    let e = stream.exp1();
    Ok((1.0 - beta) / beta * (kanter_ln_a(beta, u) - e.ln()))
}

/// Y_β = S^{−β}, so that E[e^{−sY_β}] = E_β(−s). Y_1 ≡ 1 and consumes no randomness.
pub fn sample_y_beta(beta: f64, stream: &mut Stream) -> Result<YBetaSample> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("requires 0 < beta <= 1 (got beta = {beta})")));
    }
    if beta == 1.0 {
        return Ok(YBetaSample { value: 1.0, beta });
    }
    let ln_s = ln_one_sided_stable(beta, stream)?;
    Ok(YBetaSample {
        value: (-beta * ln_s).exp(),
        beta,
    })
}

/// `n` consecutive draws of Y_β from one stream.
pub fn sample_y_beta_n(beta: f64, n: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    let mut stream = seed.stream();
    (0..n)
        .map(|_| sample_y_beta(beta, &mut stream).map(|y| y.value))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sum::mean_and_std_error;

    #[test]
    fn y_one_is_point_mass() {
        let ys = sample_y_beta_n(1.0, 10, SeedSpec::new(3, 0)).unwrap();
        assert!(ys.iter().all(|&y| y == 1.0));
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = sample_y_beta_n(0.4, 50, SeedSpec::new(9, 2)).unwrap();
        let b = sample_y_beta_n(0.4, 50, SeedSpec::new(9, 2)).unwrap();
        let c = sample_y_beta_n(0.4, 50, SeedSpec::new(9, 3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|&y| y > 0.0));
    }

    #[test]
    fn stable_laplace_transform_half() {
        // E[e^{-S}] = e^{-1} for β = 1/2.
        let mut st = SeedSpec::new(11, 0).stream();
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| (-sample_one_sided_stable(0.5, &mut st).unwrap()).exp())
            .collect();
        let (m, _) = mean_and_std_error(&xs);
        assert!(((m - (-1f64).exp()) / (-1f64).exp()).abs() < 0.01, "{m}");
    }

    #[test]
    fn rejects_bad_beta() {
        let mut st = SeedSpec::new(0, 0).stream();
        assert!(sample_one_sided_stable(1.0, &mut st).is_err());
        assert!(sample_y_beta(0.0, &mut st).is_err());
    }
}
