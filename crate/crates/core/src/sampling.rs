//! Seeded low-discrepancy sampling of balls and spheres.
//!
//! Points come from a Halton sequence with a Cranley-Patterson rotation drawn
//! from a ChaCha8 stream, so every sample set is reproducible from its seed
//! and prefixes of a longer run coincide with shorter runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::linalg::{norm, scale};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = 2u64;
    while out.len() < count {
        if out.iter().take_while(|p| *p * *p <= n).all(|p| n % p != 0) {
            out.push(n);
        }
        n += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Shifted Halton sequence in `[0,1)^dim`.
#[derive(Debug, Clone)]
pub struct Halton {
    bases: Vec<u64>,
    shift: Vec<f64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        let shift = (0..dim).map(|_| r.random::<f64>()).collect();
        Halton {
            bases: primes(dim),
            shift,
            index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.bases.len()
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        self.index += 1;
        let i = self.index;
        Some(
            self.bases
                .iter()
                .zip(&self.shift)
                .map(|(&b, &s)| (radical_inverse(i, b) + s).fract())
                .collect(),
        )
    }
}

fn gaussian(u: f64) -> f64 {
    let n = Normal::standard();
    n.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
}

/// Low-discrepancy points on the unit sphere of `ℝ^dim`.
#[derive(Debug, Clone)]
pub struct SpherePoints {
    halton: Halton,
}

impl SpherePoints {
    pub fn new(dim: usize, seed: u64) -> Self {
        SpherePoints {
            halton: Halton::new(dim, seed),
        }
    }
}

impl Iterator for SpherePoints {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        loop {
            let u = self.halton.next()?;
            if u.len() == 1 {
                return Some(vec![if u[0] < 0.5 { -1.0 } else { 1.0 }]);
            }
            let g: Vec<f64> = u.into_iter().map(gaussian).collect();
            let n = norm(&g);
            if n > 1e-12 {
                return Some(scale(&g, 1.0 / n));
            }
        }
    }
}

/// Low-discrepancy points in the ball `B(0, radius)` of `ℝ^dim`.
#[derive(Debug, Clone)]
pub struct BallPoints {
    halton: Halton,
    radius: f64,
}

impl BallPoints {
    pub fn new(dim: usize, radius: f64, seed: u64) -> Self {
        BallPoints {
            halton: Halton::new(dim + 1, seed),
            radius,
        }
    }
}

impl Iterator for BallPoints {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        loop {
            let u = self.halton.next()?;
            let d = u.len() - 1;
            let r = self.radius * u[d].powf(1.0 / d as f64);
            if d == 1 {
                let s = if u[0] < 0.5 { -1.0 } else { 1.0 };
                return Some(vec![s * r]);
            }
            let g: Vec<f64> = u[..d].iter().copied().map(gaussian).collect();
            let n = norm(&g);
            if n > 1e-12 {
                return Some(scale(&g, r / n));
            }
        }
    }
}

pub fn sphere_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    SpherePoints::new(dim, seed).take(n).collect()
}

pub fn ball_points(dim: usize, n: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    BallPoints::new(dim, radius, seed).take(n).collect()
}

/// Maps `ℝ^{d(d+1)/2}` isometrically onto the symmetric `d × d` matrices
/// (full row-major storage, Frobenius geometry).
pub fn embed_symmetric(v: &[f64], d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    let mut k = 0;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        m[i * d + i] = v[k];
        k += 1;
        for j in (i + 1)..d {
            m[i * d + j] = v[k] * r;
            m[j * d + i] = v[k] * r;
            k += 1;
        }
    }
    m
}

pub fn symmetric_dim(d: usize) -> usize {
    d * (d + 1) / 2
}
