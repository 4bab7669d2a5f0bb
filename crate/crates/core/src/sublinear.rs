//! Catalog of sublinear functions `σ` with exact evaluation and exact
//! projection onto `∂σ(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_input, Error, Result};
use crate::linalg::{self, dot, jacobi_eigen, norm, project_ball, symmetrize};
use crate::simplex::{project_simplex, SimplexQp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Relu,
    EuclideanNorm,
    OneNorm,
    WeightedInfNorm { weights: Vec<f64> },
    Max,
    /// Largest eigenvalue of a symmetric matrix stored as a full `d × d` array.
    MaxEigen,
    PolytopeSupport { vertices: Vec<Vec<f64>> },
}

/// Shape of `∂σ(0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportSet {
    Interval,
    Simplex,
    UnitBall,
    SignedBox,
    WeightedCrossPolytope(Vec<f64>),
    SpectralSimplex,
    Polytope(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublinearFn {
    family: Family,
    dim: usize,
    lipschitz: f64,
}

/// Largest number of vertices for which `∂σ(0)` is treated as an explicit
/// polytope.
pub const MAX_VERTICES: usize = 64;

impl SublinearFn {
    /// `dim` is the vector dimension, or the matrix order for `MaxEigen`.
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let lipschitz = match &family {
            Family::Relu => {
                if dim != 1 {
                    return Err(Error::invalid("relu is one-dimensional"));
                }
                1.0
            }
            Family::EuclideanNorm | Family::Max | Family::MaxEigen => 1.0,
            Family::OneNorm => (dim as f64).sqrt(),
            Family::WeightedInfNorm { weights } => {
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: weights.len(),
                    });
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::invalid("weights must be positive and finite"));
                }
                weights.iter().cloned().fold(0.0, f64::max)
            }
            Family::PolytopeSupport { vertices } => {
                if vertices.is_empty() {
                    return Err(Error::invalid("polytope needs at least one vertex"));
                }
                for v in vertices {
                    check_input(v, dim)?;
                }
                let m = vertices.iter().map(|v| norm(v)).fold(0.0, f64::max);
                if m == 0.0 {
                    return Err(Error::invalid("polytope {0} gives the zero function"));
                }
                m
            }
        };
        Ok(SublinearFn {
            family,
            dim,
            lipschitz,
        })
    }

    pub fn relu() -> Self {
        Self::new(Family::Relu, 1).unwrap()
    }

    pub fn euclidean_norm(d: usize) -> Result<Self> {
        Self::new(Family::EuclideanNorm, d)
    }

    pub fn one_norm(d: usize) -> Result<Self> {
        Self::new(Family::OneNorm, d)
    }

    pub fn weighted_inf_norm(weights: Vec<f64>) -> Result<Self> {
        let d = weights.len();
        Self::new(Family::WeightedInfNorm { weights }, d)
    }

    pub fn max(d: usize) -> Result<Self> {
        Self::new(Family::Max, d)
    }

    pub fn max_eigen(d: usize) -> Result<Self> {
        Self::new(Family::MaxEigen, d)
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let d = vertices.first().map_or(0, |v| v.len());
        Self::new(Family::PolytopeSupport { vertices }, d)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Length of the vectors this function acts on.
    pub fn ambient_dim(&self) -> usize {
        match self.family {
            Family::MaxEigen => self.dim * self.dim,
            _ => self.dim,
        }
    }

    /// `M_σ = max{‖ζ‖ : ζ ∈ ∂σ(0)}`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn support_set(&self) -> SupportSet {
        match &self.family {
            Family::Relu => SupportSet::Interval,
            Family::EuclideanNorm => SupportSet::UnitBall,
            Family::OneNorm => SupportSet::SignedBox,
            Family::WeightedInfNorm { weights } => SupportSet::WeightedCrossPolytope(weights.clone()),
            Family::Max => SupportSet::Simplex,
            Family::MaxEigen => SupportSet::SpectralSimplex,
            Family::PolytopeSupport { vertices } => SupportSet::Polytope(vertices.clone()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Relu => "relu",
            Family::EuclideanNorm => "euclidean-norm",
            Family::OneNorm => "one-norm",
            Family::WeightedInfNorm { .. } => "weighted-inf-norm",
            Family::Max => "max",
            Family::MaxEigen => "max-eigen",
            Family::PolytopeSupport { .. } => "polytope",
        }
    }

    pub(crate) fn check(&self, x: &[f64]) -> Result<()> {
        check_input(x, self.ambient_dim())
    }

    /// Symmetrizes matrix arguments; identity for vector families.
    pub fn canonicalize(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        if self.family == Family::MaxEigen {
            symmetrize(&mut y, self.dim);
        }
        y
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.family {
            Family::Relu => x[0].max(0.0),
            Family::EuclideanNorm => norm(x),
            Family::OneNorm => x.iter().map(|v| v.abs()).sum(),
            Family::WeightedInfNorm { weights } => weights
                .iter()
                .zip(x)
                .map(|(w, v)| w * v.abs())
                .fold(0.0, f64::max),
            Family::Max => x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            Family::MaxEigen => jacobi_eigen(x, self.dim)?.values[0],
            Family::PolytopeSupport { vertices } => vertices
                .iter()
                .map(|v| dot(v, x))
                .fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Euclidean projection onto `∂σ(0)`.
    pub fn project_support(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match &self.family {
            Family::Relu => vec![x[0].clamp(0.0, 1.0)],
            Family::EuclideanNorm => project_ball(x, 1.0),
            Family::OneNorm => x.iter().map(|v| v.clamp(-1.0, 1.0)).collect(),
            Family::WeightedInfNorm { weights } => project_weighted_cross(x, weights),
            Family::Max => project_simplex(x),
            Family::MaxEigen => {
                let e = jacobi_eigen(x, self.dim)?;
                e.recompose(&project_simplex(&e.values))
            }
            Family::PolytopeSupport { vertices } => {
                let c: Vec<f64> = vertices.iter().map(|v| dot(v, x)).collect();
                SimplexQp::new(vertices).solve(&c)?.combination
            }
        })
    }

    /// Some `ζ ∈ ∂σ(x)`; ties go to the lowest index.
    pub fn subgradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let argmax = |vals: &[f64]| -> usize {
            let mut best = 0;
            for (i, v) in vals.iter().enumerate() {
                if *v > vals[best] {
                    best = i;
                }
            }
            best
        };
        Ok(match &self.family {
            Family::Relu => vec![if x[0] > 0.0 { 1.0 } else { 0.0 }],
            Family::EuclideanNorm => {
                let n = norm(x);
                if n > 0.0 {
                    linalg::scale(x, 1.0 / n)
                } else {
                    vec![0.0; self.dim]
                }
            }
            Family::OneNorm => x
                .iter()
                .map(|v| if *v > 0.0 { 1.0 } else if *v < 0.0 { -1.0 } else { 0.0 })
                .collect(),
            Family::WeightedInfNorm { weights } => {
                let vals: Vec<f64> = weights.iter().zip(x).map(|(w, v)| w * v.abs()).collect();
                let i = argmax(&vals);
                let mut z = vec![0.0; self.dim];
                if x[i] != 0.0 {
                    z[i] = weights[i] * x[i].signum();
                }
                z
            }
            Family::Max => {
                let mut z = vec![0.0; self.dim];
                z[argmax(x)] = 1.0;
                z
            }
            Family::MaxEigen => {
                let e = jacobi_eigen(x, self.dim)?;
                let mut mu = vec![0.0; self.dim];
                mu[0] = 1.0;
                e.recompose(&mu)
            }
            Family::PolytopeSupport { vertices } => {
                let vals: Vec<f64> = vertices.iter().map(|v| dot(v, x)).collect();
                vertices[argmax(&vals)].clone()
            }
        })
    }

    /// Vertices of `∂σ(0)` when it is an explicit polytope with at most
    /// [`MAX_VERTICES`] vertices.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        let d = self.dim;
        let unit = |i: usize, s: f64| {
            let mut e = vec![0.0; d];
            e[i] = s;
            e
        };
        match &self.family {
            Family::Relu => Some(vec![vec![0.0], vec![1.0]]),
            Family::Max => Some((0..d).map(|i| unit(i, 1.0)).collect()),
            Family::WeightedInfNorm { weights } => Some(
                (0..d)
                    .flat_map(|i| [unit(i, weights[i]), unit(i, -weights[i])])
                    .collect(),
            ),
            Family::OneNorm if d <= 6 => Some(
                (0..(1usize << d))
                    .map(|mask| {
                        (0..d)
                            .map(|i| if mask & (1 << i) != 0 { -1.0 } else { 1.0 })
                            .collect()
                    })
                    .collect(),
            ),
            Family::PolytopeSupport { vertices } if vertices.len() <= MAX_VERTICES => {
                Some(vertices.clone())
            }
            _ => None,
        }
    }

    /// A finite set of extreme points of `∂σ(0)` (all of them for polytopes;
    /// a representative subset otherwise).
    pub fn extreme_points(&self) -> Vec<Vec<f64>> {
        if let Some(v) = self.vertices() {
            return v;
        }
        let d = self.dim;
        match &self.family {
            Family::MaxEigen => (0..d)
                .map(|i| {
                    let mut m = vec![0.0; d * d];
                    m[i * d + i] = 1.0;
                    m
                })
                .collect(),
            Family::PolytopeSupport { vertices } => vertices.clone(),
            _ => (0..d)
                .flat_map(|i| {
                    let mut a = vec![0.0; d];
                    let mut b = vec![0.0; d];
                    if self.family == Family::OneNorm {
                        a = vec![1.0; d];
                        b = vec![1.0; d];
                    }
                    a[i] = 1.0;
                    b[i] = -1.0;
                    [a, b]
                })
                .collect(),
        }
    }

    /// Whether the price function is a translate of `σ` itself, decided from
    /// the family. `None` for user polytopes, which need a sampled test.
    pub fn closed_form_unique(&self) -> Option<bool> {
        match &self.family {
            Family::Relu | Family::EuclideanNorm | Family::OneNorm | Family::Max | Family::MaxEigen => {
                Some(true)
            }
            Family::WeightedInfNorm { weights } => {
                Some(weights.iter().all(|w| (w - weights[0]).abs() <= 1e-15 * weights[0]))
            }
            Family::PolytopeSupport { .. } => None,
        }
    }
}

/// Projection onto `{ζ : Σ|ζ_i|/w_i ≤ 1} = conv{±w_i e_i}`.
fn project_weighted_cross(x: &[f64], w: &[f64]) -> Vec<f64> {
    let mass: f64 = x.iter().zip(w).map(|(v, wi)| v.abs() / wi).sum();
    if mass <= 1.0 {
        return x.to_vec();
    }
    // ζ_i = sign(x_i)·max(|x_i| − τ/w_i, 0); breakpoints τ_i = w_i|x_i|
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| (w[j] * x[j].abs()).total_cmp(&(w[i] * x[i].abs())).then(i.cmp(&j)));
    let mut num = 0.0;
    let mut den = 0.0;
    let mut tau = 0.0;
    for (k, &i) in order.iter().enumerate() {
        num += x[i].abs() / w[i];
        den += 1.0 / (w[i] * w[i]);
        tau = (num - 1.0) / den;
        let next = order.get(k + 1).map_or(0.0, |&j| w[j] * x[j].abs());
        if tau >= next {
            break;
        }
    }
    x.iter()
        .zip(w)
        .map(|(v, wi)| v.signum() * (v.abs() - tau / wi).max(0.0))
        .collect()
}
