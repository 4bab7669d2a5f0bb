//! Convex sets given by membership oracles, and the conic lift
//! `K = cl{(x, r) : r > 0, x0 + x/r ∈ C}`.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{check_input, check_positive, Error, Result};
use crate::linalg::{add, norm, scale};
use crate::sampling::{BallPoints, SpherePoints};

pub const SET_TOL: f64 = 1e-9;

pub trait ConvexSet: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl ConvexSet for Ball {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn contains(&self, x: &[f64]) -> bool {
        let d: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        d <= self.radius * (1.0 + SET_TOL) + SET_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSet {
    pub fn symmetric(d: usize, half_width: f64) -> Self {
        BoxSet {
            lo: vec![-half_width; d],
            hi: vec![half_width; d],
        }
    }
}

impl ConvexSet for BoxSet {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| {
            let slack = SET_TOL * (1.0 + l.abs().max(h.abs()));
            *v >= l - slack && *v <= h + slack
        })
    }
}

#[derive(Debug, Clone)]
pub struct LiftedCone {
    pub set: Arc<dyn ConvexSet>,
    pub x0: Vec<f64>,
    pub radius: f64,
}

/// Largest scale probed on the `r = 0` face.
pub const RECESSION_PROBE: f64 = 1e6;
const R_BRANCH: f64 = 1e-12;

impl LiftedCone {
    pub fn ambient_dim(&self) -> usize {
        self.x0.len() + 1
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        let n = self.x0.len();
        let (x, r) = (&v[..n], v[n]);
        if r > R_BRANCH {
            self.set.contains(&add(&self.x0, &scale(x, 1.0 / r)))
        } else if r >= -R_BRANCH * (1.0 + norm(x)) {
            // recession directions: x0 + t·x ∈ C for every probed t
            let mut t = 1.0;
            while t <= RECESSION_PROBE {
                if !self.set.contains(&add(&self.x0, &scale(x, t))) {
                    return false;
                }
                t *= 10.0;
            }
            true
        } else {
            false
        }
    }

    /// `1 − R/√(1+R²)`.
    pub fn outer_bound(&self) -> f64 {
        let r = self.radius;
        1.0 - r / (1.0 + r * r).sqrt()
    }

    /// `(0, √(1+R²)/R)`.
    pub fn core_point(&self) -> Vec<f64> {
        let r = self.radius;
        let mut p = vec![0.0; self.ambient_dim()];
        *p.last_mut().unwrap() = (1.0 + r * r).sqrt() / r;
        p
    }
}

/// Builds the lift after spot-checking `B(x0, R) ⊆ C` at 100 points, half of
/// them on the bounding sphere.
pub fn conic_lift(set: Arc<dyn ConvexSet>, x0: Vec<f64>, radius: f64) -> Result<LiftedCone> {
    check_input(&x0, set.dim())?;
    check_positive("radius", radius)?;
    let d = x0.len();
    let shell = SpherePoints::new(d, 5).take(50).map(|u| scale(&u, radius));
    let inner = BallPoints::new(d, radius, 5).take(50);
    for u in shell.chain(inner) {
        let p = add(&x0, &u);
        if !set.contains(&p) {
            return Err(Error::ContainmentCheck(format!(
                "ball point {p:?} of B(x0, {radius}) is not in the set"
            )));
        }
    }
    Ok(LiftedCone { set, x0, radius })
}
