//! Functional core, center and width of a sublinear function, and the six
//! extremal smoothings built from them.
//!
//! Every smoothing is stored at smoothness 1 and rescaled with
//! `T_{1/β} f(x) = f(βx)/β`, whose gradient is `∇f(βx)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::linalg::{dist, dot, jacobi_eigen, norm, norm_sq, scale, sub};
use crate::sampling::SpherePoints;
use crate::simplex::{project_simplex_with_threshold, SimplexQp};
use crate::sublinear::{Family, SublinearFn, MAX_VERTICES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ClosedForm,
    Numeric,
    Construction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalCore {
    pub base: SublinearFn,
    pub center: Vec<f64>,
    pub center_height: f64,
    pub width: f64,
    pub unique: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    MinInner,
    MaxInner,
    MinGeneral,
    MaxGeneral,
    MinOuter,
    MaxOuter,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::MinInner,
        Variant::MaxInner,
        Variant::MinGeneral,
        Variant::MaxGeneral,
        Variant::MinOuter,
        Variant::MaxOuter,
    ];

    pub fn is_minimal(self) -> bool {
        matches!(self, Variant::MinInner | Variant::MinGeneral | Variant::MinOuter)
    }

    pub fn is_inner(self) -> bool {
        matches!(self, Variant::MinInner | Variant::MaxInner)
    }

    pub fn is_outer(self) -> bool {
        matches!(self, Variant::MinOuter | Variant::MaxOuter)
    }

    pub fn is_general(self) -> bool {
        matches!(self, Variant::MinGeneral | Variant::MaxGeneral)
    }

    /// The minimal/maximal partner with the same offset.
    pub fn partner(self) -> Variant {
        match self {
            Variant::MinInner => Variant::MaxInner,
            Variant::MaxInner => Variant::MinInner,
            Variant::MinGeneral => Variant::MaxGeneral,
            Variant::MaxGeneral => Variant::MinGeneral,
            Variant::MinOuter => Variant::MaxOuter,
            Variant::MaxOuter => Variant::MinOuter,
        }
    }

    /// Multiple of the width subtracted from the inner smoothing.
    pub fn offset_factor(self) -> f64 {
        if self.is_inner() {
            0.0
        } else if self.is_general() {
            0.5
        } else {
            1.0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::MinInner => "min-inner",
            Variant::MaxInner => "max-inner",
            Variant::MinGeneral => "min-general",
            Variant::MaxGeneral => "max-general",
            Variant::MinOuter => "min-outer",
            Variant::MaxOuter => "max-outer",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown variant '{s}'")))
    }
}

/// `π_σ(x) = max_{ζ∈∂σ(0)} ⟨ζ,x⟩ + ½‖ζ‖²`.
pub fn price(f: &SublinearFn, x: &[f64]) -> Result<f64> {
    f.check(x)?;
    Ok(match f.family() {
        Family::EuclideanNorm => norm(x) + 0.5,
        Family::OneNorm => x.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * f.dim() as f64,
        Family::Max | Family::MaxEigen => f.eval(x)? + 0.5,
        _ => {
            let verts = f.vertices().ok_or_else(|| Error::Unsupported("price of a large polytope".into()))?;
            verts
                .iter()
                .map(|v| dot(v, x) + 0.5 * norm_sq(v))
                .fold(f64::NEG_INFINITY, f64::max)
        }
    })
}

/// Tolerance of the sampled uniqueness test for user polytopes.
const UNIQUE_TOL: f64 = 1e-8;

pub fn compute_core(f: &SublinearFn) -> Result<FunctionalCore> {
    let d = f.dim();
    let amb = f.ambient_dim();
    let closed = |center: Vec<f64>, r: f64, unique: bool| {
        let width = r + 0.5 * norm_sq(&center);
        FunctionalCore {
            base: f.clone(),
            center,
            center_height: r,
            width,
            unique,
            provenance: Provenance::ClosedForm,
        }
    };
    match f.family() {
        Family::Relu => Ok(closed(vec![-0.5], 0.0, true)),
        Family::EuclideanNorm => Ok(closed(vec![0.0; d], 0.5, true)),
        Family::OneNorm => Ok(closed(vec![0.0; d], 0.5 * d as f64, true)),
        Family::WeightedInfNorm { weights } => {
            let r = weights.iter().map(|w| 0.5 * w * w).fold(0.0, f64::max);
            Ok(closed(vec![0.0; d], r, f.closed_form_unique().unwrap_or(false)))
        }
        Family::Max => Ok(closed(vec![-1.0 / d as f64; d], 0.5 - 1.0 / d as f64, true)),
        Family::MaxEigen => {
            let mut c = vec![0.0; amb];
            for i in 0..d {
                c[i * d + i] = -1.0 / d as f64;
            }
            Ok(closed(c, 0.5 - 1.0 / d as f64, true))
        }
        Family::PolytopeSupport { vertices } => {
            if vertices.len() > MAX_VERTICES {
                return Err(Error::Unsupported(format!(
                    "polytope core needs at most {MAX_VERTICES} vertices"
                )));
            }
            // w = max_λ Σλ_i ½‖v_i‖² − ½‖Vλ‖², attained with x_σ = −Vλ*
            let c: Vec<f64> = vertices.iter().map(|v| 0.5 * norm_sq(v)).collect();
            let sol = SimplexQp::new(vertices).solve(&c)?;
            let center = scale(&sol.combination, -1.0);
            let width = -sol.objective;
            let r = price(f, &center)?;
            let residual = (r + 0.5 * norm_sq(&center) - width).abs();
            if residual > 1e-8 * (1.0 + width.abs()) {
                return Err(Error::NonConvergence {
                    what: "functional core",
                    iterations: sol.iterations,
                    residual,
                });
            }
            let mut core = FunctionalCore {
                base: f.clone(),
                center,
                center_height: r,
                width: r + 0.5 * norm_sq(&sol.combination),
                unique: false,
                provenance: Provenance::Numeric,
            };
            core.unique = sampled_uniqueness(&core, 1000)?;
            Ok(core)
        }
    }
}

/// Tests `π_σ = r_σ + σ(· − x_σ)` on sampled points of several radii.
fn sampled_uniqueness(core: &FunctionalCore, samples: usize) -> Result<bool> {
    let f = &core.base;
    let radii = [0.1, 1.0, 10.0];
    for (k, u) in SpherePoints::new(f.ambient_dim(), 11).take(samples).enumerate() {
        let x: Vec<f64> = core
            .center
            .iter()
            .zip(&u)
            .map(|(c, ui)| c + radii[k % 3] * ui)
            .collect();
        let p = price(f, &x)?;
        let q = core.center_height + f.eval(&sub(&x, &core.center))?;
        if (p - q).abs() > UNIQUE_TOL * (1.0 + p.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Moreau envelope of `σ`: `½‖x‖² − ½ dist(x, ∂σ(0))²`.
pub fn moreau_sublinear(f: &SublinearFn, x: &[f64]) -> Result<f64> {
    let p = f.project_support(x)?;
    Ok(0.5 * norm_sq(x) - 0.5 * dist(x, &p).powi(2))
}

/// `(π_σ □ ½‖·‖²)(x)` with its gradient `ζ̄`, via the simplex dual when
/// `∂σ(0)` is an explicit polytope, else the closed form of unique families.
pub fn moreau_of_price(core: &FunctionalCore, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let f = &core.base;
    f.check(x)?;
    if let Some(verts) = f.vertices() {
        let c: Vec<f64> = verts.iter().map(|v| dot(v, x) + 0.5 * norm_sq(v)).collect();
        let sol = SimplexQp::new(&verts).solve(&c)?;
        return Ok((-sol.objective, sol.combination));
    }
    if core.unique {
        let y = sub(x, &core.center);
        let p = f.project_support(&y)?;
        let v = core.center_height + 0.5 * norm_sq(&y) - 0.5 * dist(&y, &p).powi(2);
        return Ok((v, p));
    }
    Err(Error::Unsupported(format!(
        "maximal smoothing of {} needs an explicit polytope",
        f.name()
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSpec {
    pub core: FunctionalCore,
    pub variant: Variant,
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl SmoothingSpec {
    pub fn new(core: FunctionalCore, variant: Variant, beta: f64) -> Result<Self> {
        check_positive("beta", beta)?;
        let lambda = if variant.is_general() {
            core.width / 2.0
        } else {
            core.width
        };
        Ok(SmoothingSpec {
            core,
            variant,
            beta,
            lambda,
            delta: 0.0,
        })
    }

    pub fn for_function(f: &SublinearFn, variant: Variant, beta: f64) -> Result<Self> {
        Self::new(compute_core(f)?, variant, beta)
    }

    pub fn sigma(&self) -> &SublinearFn {
        &self.core.base
    }

    /// Certified `dist(f, σ) ≤ λ/β`.
    pub fn distance_bound(&self) -> f64 {
        self.lambda / self.beta
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        SmoothingSpec::new(self.core.clone(), variant, self.beta).expect("beta already validated")
    }

    fn offset(&self) -> f64 {
        self.variant.offset_factor() * self.core.width
    }

    /// Value and gradient of the 1-smooth inner member at `y`.
    fn inner_unit(&self, y: &[f64], want_grad: bool) -> Result<(f64, Option<Vec<f64>>)> {
        let core = &self.core;
        let f = &core.base;
        if self.variant.is_minimal() || core.unique {
            match f.family() {
                Family::Max => {
                    let (v, g) = max_envelope(y, want_grad);
                    return Ok((v, g));
                }
                Family::MaxEigen => {
                    let d = f.dim();
                    let e = jacobi_eigen(y, d)?;
                    let (v, _) = max_envelope(&e.values, false);
                    let g = want_grad.then(|| {
                        let (p, _) = project_simplex_with_threshold(&e.values);
                        e.recompose(&p)
                    });
                    return Ok((v, g));
                }
                _ => {}
            }
            if self.variant.is_minimal() {
                let z = sub(y, &core.center);
                let p = f.project_support(&z)?;
                let v = core.center_height + 0.5 * norm_sq(&z) - 0.5 * dist(&z, &p).powi(2);
                return Ok((v, want_grad.then_some(p)));
            }
        }
        let (v, g) = moreau_of_price(core, y)?;
        Ok((v, want_grad.then_some(g)))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.sigma().check(x)?;
        let y = scale(x, self.beta);
        let (v, _) = self.inner_unit(&y, false)?;
        Ok((v - self.offset()) / self.beta)
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.value_grad(x).map(|(_, g)| g)
    }

    pub fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.sigma().check(x)?;
        let y = scale(x, self.beta);
        let (v, g) = self.inner_unit(&y, true)?;
        Ok(((v - self.offset()) / self.beta, g.expect("gradient requested")))
    }

    /// `T_η f : x ↦ η f(x/η)`, which is `β/η`-smooth at distance `η·dist`.
    pub fn scale_function(&self, eta: f64) -> Result<Self> {
        check_positive("eta", eta)?;
        let mut s = self.clone();
        s.beta = self.beta / eta;
        Ok(s)
    }

    /// Lower bound on `sup |f − σ|` over a deterministic point set in
    /// `B(0, radius)`: the origin, then (when `samples > 1`) the rescaled
    /// center, extreme points of `∂σ(0)` and `samples − 1` low-discrepancy
    /// directions, each along the fixed radial grid `2^{k/4} ≤ radius`.
    pub fn estimate_distance(&self, radius: f64, samples: usize, seed: u64) -> Result<f64> {
        check_positive("radius", radius)?;
        if samples == 0 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        let f = self.sigma();
        let amb = f.ambient_dim();
        let gap = |x: &[f64]| -> Result<f64> { Ok((self.eval(x)? - f.eval(x)?).abs()) };

        let mut best = gap(&vec![0.0; amb])?;
        if samples == 1 {
            return Ok(best);
        }
        let grid: Vec<f64> = (-24..=80)
            .map(|k| 2f64.powf(k as f64 / 4.0))
            .filter(|r| *r <= radius)
            .collect();

        let c = scale(&self.core.center, 1.0 / self.beta);
        if norm(&c) <= radius {
            best = best.max(gap(&c)?);
        }
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for v in f.extreme_points() {
            if let Some(u) = crate::linalg::normalized(&v, 1e-300) {
                dirs.push(scale(&u, -1.0));
                dirs.push(u);
            }
        }
        if let Some(u) = crate::linalg::normalized(&self.core.center, 1e-300) {
            dirs.push(u);
        }
        let mut sphere = SpherePoints::new(amb, seed);
        for _ in 1..samples {
            dirs.push(sphere.next().expect("infinite sequence"));
        }
        for u in &dirs {
            let u = f.canonicalize(u);
            for r in &grid {
                best = best.max(gap(&scale(&u, *r))?);
            }
        }
        Ok(best)
    }

    pub fn default_radius(&self) -> f64 {
        4.0 * (1.0 + self.sigma().lipschitz() + norm(&self.core.center)) / self.beta
    }
}

/// Closed-form optimal smoothing of `max`: the 1-smooth inner member
/// `α + ½ + ½Σ_{i∈J}(x_i − α)²`, with gradient the simplex projection.
fn max_envelope(x: &[f64], want_grad: bool) -> (f64, Option<Vec<f64>>) {
    let (p, alpha) = project_simplex_with_threshold(x);
    let q: f64 = p.iter().map(|v| v * v).sum();
    (alpha + 0.5 + 0.5 * q, want_grad.then_some(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn price_examples() {
        assert_eq!(price(&SublinearFn::relu(), &[0.0]).unwrap(), 0.5);
        assert_eq!(price(&SublinearFn::max(3).unwrap(), &[0.0; 3]).unwrap(), 0.5);
        let w = SublinearFn::weighted_inf_norm(vec![1.0, 2.0]).unwrap();
        assert_eq!(price(&w, &[0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn core_examples() {
        let c = compute_core(&SublinearFn::relu()).unwrap();
        assert_eq!((c.center[0], c.center_height, c.width), (-0.5, 0.0, 0.125));
        let c = compute_core(&SublinearFn::max(4).unwrap()).unwrap();
        assert_eq!(c.center, vec![-0.25; 4]);
        assert!(close(c.center_height, 0.25, 1e-15) && close(c.width, 0.375, 1e-15));
        let c = compute_core(&SublinearFn::euclidean_norm(3).unwrap()).unwrap();
        assert_eq!(c.width, 0.5);
        assert_eq!(c.center, vec![0.0; 3]);
    }

    #[test]
    fn polytope_core_matches_closed_form_for_simplex() {
        let verts = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let c = compute_core(&SublinearFn::polytope(verts).unwrap()).unwrap();
        for v in &c.center {
            assert!(close(*v, -1.0 / 3.0, 1e-9));
        }
        assert!(close(c.width, 1.0 / 3.0, 1e-9));
        assert!(c.unique);
        assert_eq!(c.provenance, Provenance::Numeric);
    }

    #[test]
    fn moreau_examples() {
        let e = SublinearFn::euclidean_norm(2).unwrap();
        assert_eq!(moreau_sublinear(&e, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(close(moreau_sublinear(&e, &[2.0, 0.0]).unwrap(), 1.5, 1e-15));
        assert_eq!(moreau_sublinear(&SublinearFn::relu(), &[-3.0]).unwrap(), 0.0);
    }

    #[test]
    fn moreau_of_price_examples() {
        let core = compute_core(&SublinearFn::max(2).unwrap()).unwrap();
        let (v, _) = moreau_of_price(&core, &[0.0, 0.0]).unwrap();
        assert!(close(v, 0.25, 1e-12));
        let core = compute_core(&SublinearFn::relu()).unwrap();
        assert!(close(moreau_of_price(&core, &[0.0]).unwrap().0, 0.125, 1e-12));
        let core = compute_core(&SublinearFn::polytope(vec![vec![0.5, -1.0]]).unwrap()).unwrap();
        let (v, g) = moreau_of_price(&core, &[2.0, 3.0]).unwrap();
        // π = ⟨ζ,·⟩ + ½‖ζ‖², so π□½‖·‖² = ⟨ζ,x⟩ + ½‖ζ‖² − ½‖ζ‖²
        assert!(close(v, 1.0 - 3.0, 1e-12));
        assert_eq!(g, vec![0.5, -1.0]);
    }

    #[test]
    fn smoothing_examples() {
        let s = SmoothingSpec::for_function(&SublinearFn::relu(), Variant::MinGeneral, 1.0).unwrap();
        assert!(close(s.eval(&[0.0]).unwrap(), 1.0 / 16.0, 1e-15));
        assert_eq!(s.grad(&[2.0]).unwrap(), vec![1.0]);

        let s = SmoothingSpec::for_function(&SublinearFn::max(2).unwrap(), Variant::MinGeneral, 1.0).unwrap();
        assert!(close(s.eval(&[0.0, 0.0]).unwrap(), 0.125, 1e-15));
        assert_eq!(s.grad(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);

        let e = SublinearFn::euclidean_norm(2).unwrap();
        let s = SmoothingSpec::for_function(&e, Variant::MinGeneral, 1.0).unwrap();
        assert!(close(s.eval(&[0.0, 0.0]).unwrap(), 0.25, 1e-15));
        let s = s.with_variant(Variant::MinOuter);
        let g = s.grad(&[3.0, 4.0]).unwrap();
        assert!(close(g[0], 0.6, 1e-15) && close(g[1], 0.8, 1e-15));
    }

    #[test]
    fn scaling_examples() {
        let s = SmoothingSpec::for_function(&SublinearFn::relu(), Variant::MinGeneral, 1.0).unwrap();
        let t = s.scale_function(2.0).unwrap();
        assert_eq!(t.beta, 0.5);
        assert!(close(t.distance_bound(), 2.0 / 16.0, 1e-15));
        assert_eq!(s.scale_function(1.0).unwrap(), s);
        assert!(s.scale_function(0.0).is_err());
        for x in [-1.0, 0.3, 2.0] {
            let direct = 2.0 * s.eval(&[x / 2.0]).unwrap();
            assert!(close(t.eval(&[x]).unwrap(), direct, 1e-15));
        }
    }

    #[test]
    fn distance_examples() {
        let s = SmoothingSpec::for_function(&SublinearFn::relu(), Variant::MinGeneral, 1.0).unwrap();
        assert!(close(s.estimate_distance(5.0, 64, 1).unwrap(), 1.0 / 16.0, 1e-9));
        assert!(close(s.estimate_distance(5.0, 1, 1).unwrap(), 1.0 / 16.0, 1e-15));
        let m = SmoothingSpec::for_function(&SublinearFn::max(5).unwrap(), Variant::MinGeneral, 1.0).unwrap();
        let r = m.default_radius();
        assert!(close(m.estimate_distance(r, 64, 1).unwrap(), 0.2, 1e-6));
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()).unwrap(), v);
        }
        assert!(Variant::parse("nope").is_err());
    }
}
