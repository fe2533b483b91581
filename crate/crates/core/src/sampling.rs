//! Seeded random superpotentials with well-separated critical points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::landau_ginzburg::build_closed;
use crate::linalg::C64;
use crate::polycore::{critical_points, min_separation, LGPolynomial};
use crate::tolerance::ToleranceConfig;

/// Independent stream for sample `index` of a run seeded with `seed`.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Uniform point of the complex disk of the given radius.
pub fn random_complex<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    loop {
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if z.norm_sqr() <= 1.0 {
            return z * radius;
        }
    }
}

/// Rejection thresholds for sampled polynomials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub radius: f64,
    pub min_separation: f64,
    pub min_mu: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            min_separation: 0.1,
            min_mu: 1e-6,
        }
    }
}

fn acceptable(p: &LGPolynomial, cfg: &SamplerConfig, tol: &ToleranceConfig) -> bool {
    let Ok(roots) = critical_points(p, tol) else {
        return false;
    };
    if min_separation(&roots) < cfg.min_separation {
        return false;
    }
    match build_closed(p, tol) {
        Ok(a) => a.mu().iter().all(|m| m.norm() >= cfg.min_mu),
        Err(_) => false,
    }
}

/// Coefficients drawn from the disk, rejecting nearly degenerate draws.
pub fn sample_polynomial<R: Rng>(
    rng: &mut R,
    n: usize,
    cfg: &SamplerConfig,
    tol: &ToleranceConfig,
) -> Result<LGPolynomial> {
    for _ in 0..10_000 {
        let a = (0..n).map(|_| random_complex(rng, cfg.radius)).collect();
        let p = LGPolynomial::new(a)?;
        if acceptable(&p, cfg, tol) {
            return Ok(p);
        }
    }
    Err(Error::NoConvergence("polynomial rejection sampling"))
}

/// A random point at distance `dist` from `p` in a-space, subject to the
/// same rejection rule.
pub fn sample_near<R: Rng>(
    rng: &mut R,
    p: &LGPolynomial,
    dist: f64,
    cfg: &SamplerConfig,
    tol: &ToleranceConfig,
) -> Result<LGPolynomial> {
    for _ in 0..10_000 {
        let dir: Vec<C64> = (0..p.n()).map(|_| random_complex(rng, 1.0)).collect();
        let norm = dir.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        let a = p.a().iter().zip(&dir).map(|(a, d)| a + d * (dist / norm)).collect();
        let q = LGPolynomial::new(a)?;
        if acceptable(&q, cfg, tol) {
            return Ok(q);
        }
    }
    Err(Error::NoConvergence("nearby rejection sampling"))
}
