//! Closed convex cones, their conic cores, and the six extremal set
//! smoothings.
//!
//! Every smoothed set has the form `η·(B + B(0, ρ))` where `B` is either the
//! translated cone `x_K + K` (minimal variants) or the core `C_K` (maximal
//! variants), so projections follow from `P_{B+B_ρ}(z) = p + P_{B_ρ}(z − p)`
//! with `p = P_B(z)`.

pub mod exponential;
pub mod lift;


use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_input, check_positive, Error, Result};
use crate::function::{Provenance, Variant};
use crate::linalg::{self, add, dist, dot, identity, is_symmetric, jacobi_eigen, norm, scale, sub, symmetrize};
use crate::numeric_core::{self, Polyhedron};
use crate::sampling::{embed_symmetric, symmetric_dim, SpherePoints};

pub use lift::{conic_lift, Ball, BoxSet, ConvexSet, LiftedCone};

pub const CLOSED_FORM_TOL: f64 = 1e-9;
pub const CORE_TOL: f64 = 1e-8;
pub const SMOOTHED_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum ConeKind {
    Orthant,
    /// `{(x, t) ∈ ℝ^d × ℝ : ‖x‖ ≤ t}`
    SecondOrder,
    /// Symmetric PSD matrices in full `d × d` storage.
    Psd,
    Exponential,
    Lifted(LiftedCone),
}

#[derive(Debug, Clone)]
pub struct ConeModel {
    kind: ConeKind,
    d: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    /// False when the projection is a numerical approximation.
    pub exact: bool,
}

impl ConeModel {
    pub fn orthant(d: usize) -> Result<Self> {
        Self::with_dim(ConeKind::Orthant, d)
    }

    pub fn second_order(d: usize) -> Result<Self> {
        Self::with_dim(ConeKind::SecondOrder, d)
    }

    pub fn psd(d: usize) -> Result<Self> {
        Self::with_dim(ConeKind::Psd, d)
    }

    pub fn exponential() -> Self {
        ConeModel {
            kind: ConeKind::Exponential,
            d: 3,
        }
    }

    pub fn lifted(cone: LiftedCone) -> Self {
        let d = cone.ambient_dim();
        ConeModel {
            kind: ConeKind::Lifted(cone),
            d,
        }
    }

    fn with_dim(kind: ConeKind, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("cone dimension must be at least 1"));
        }
        Ok(ConeModel { kind, d })
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    /// The size parameter `d` of the family.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ConeKind::Orthant => "orthant",
            ConeKind::SecondOrder => "soc",
            ConeKind::Psd => "psd",
            ConeKind::Exponential => "exp",
            ConeKind::Lifted(_) => "lifted",
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ConeKind::Orthant | ConeKind::Exponential | ConeKind::Lifted(_) => self.d,
            ConeKind::SecondOrder => self.d + 1,
            ConeKind::Psd => self.d * self.d,
        }
    }

    /// Dimension of the subspace the cone lives in (symmetric matrices for PSD).
    pub fn intrinsic_dim(&self) -> usize {
        match self.kind {
            ConeKind::Psd => symmetric_dim(self.d),
            _ => self.ambient_dim(),
        }
    }

    /// Isometry from `ℝ^{intrinsic_dim}` into the ambient space.
    pub fn embed(&self, v: &[f64]) -> Vec<f64> {
        match self.kind {
            ConeKind::Psd => embed_symmetric(v, self.d),
            _ => v.to_vec(),
        }
    }

    pub fn default_tol(&self) -> f64 {
        match self.kind {
            ConeKind::Exponential => exponential::MEMBERSHIP_TOL,
            _ => CLOSED_FORM_TOL,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_tol(x, self.default_tol())
    }

    pub fn contains_tol(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.ambient_dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let slack = tol * (1.0 + norm(x));
        match &self.kind {
            ConeKind::Orthant => x.iter().all(|v| *v >= -slack),
            ConeKind::SecondOrder => {
                let (u, t) = x.split_at(self.d);
                norm(u) <= t[0] + slack
            }
            ConeKind::Psd => {
                is_symmetric(x, self.d, tol.max(1e-12))
                    && jacobi_eigen(x, self.d).is_ok_and(|e| *e.values.last().unwrap() >= -slack)
            }
            ConeKind::Exponential => exponential::contains(x, tol),
            ConeKind::Lifted(l) => l.contains(x),
        }
    }

    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        check_input(x, self.ambient_dim())?;
        let exact = |point| Projection { point, exact: true };
        Ok(match &self.kind {
            ConeKind::Orthant => exact(x.iter().map(|v| v.max(0.0)).collect()),
            ConeKind::SecondOrder => exact(project_soc(x)),
            ConeKind::Psd => {
                let e = jacobi_eigen(x, self.d)?;
                let clamped: Vec<f64> = e.values.iter().map(|v| v.max(0.0)).collect();
                let mut p = e.recompose(&clamped);
                symmetrize(&mut p, self.d);
                exact(p)
            }
            ConeKind::Exponential => Projection {
                point: exponential::project(x),
                exact: false,
            },
            ConeKind::Lifted(_) => {
                return Err(Error::Unsupported("projection onto a lifted cone".into()));
            }
        })
    }

    /// Center and width in closed form, when known.
    pub fn closed_form_core(&self) -> Option<(Vec<f64>, f64)> {
        let d = self.d;
        match self.kind {
            ConeKind::Orthant => Some((vec![1.0; d], (d as f64).sqrt() - 1.0)),
            ConeKind::SecondOrder => {
                let mut c = vec![0.0; d + 1];
                c[d] = 2f64.sqrt();
                Some((c, 2f64.sqrt() - 1.0))
            }
            ConeKind::Psd => Some((identity(d), (d as f64).sqrt() - 1.0)),
            _ => None,
        }
    }
}

fn project_soc(x: &[f64]) -> Vec<f64> {
    let n = x.len() - 1;
    let (u, t) = (&x[..n], x[n]);
    let nu = norm(u);
    if nu <= t {
        x.to_vec()
    } else if nu <= -t {
        vec![0.0; n + 1]
    } else {
        let a = 0.5 * (t + nu);
        let mut p = scale(u, a / nu);
        p.push(a);
        p
    }
}

#[derive(Debug, Clone)]
pub struct ConicCore {
    pub cone: ConeModel,
    pub center: Vec<f64>,
    pub width: f64,
    pub unique: bool,
    pub provenance: Provenance,
    /// Sampled unit normals whose halfspaces cut out the core (numeric cores).
    pub normals: Option<Vec<Vec<f64>>>,
}

impl ConicCore {
    pub fn from_lift(cone: &ConeModel) -> Result<Self> {
        let ConeKind::Lifted(l) = cone.kind() else {
            return Err(Error::invalid("not a lifted cone"));
        };
        let center = l.core_point();
        Ok(ConicCore {
            cone: cone.clone(),
            width: norm(&center) - 1.0,
            center,
            unique: false,
            provenance: Provenance::Construction,
            normals: None,
        })
    }
}

/// Default sampling used when a core must be estimated numerically.
pub const NUMERIC_CORE_SAMPLES: usize = 20_000;
pub const NUMERIC_CORE_SEED: u64 = 7;

pub fn cone_core(k: &ConeModel) -> Result<ConicCore> {
    if let Some((center, width)) = k.closed_form_core() {
        return Ok(ConicCore {
            cone: k.clone(),
            center,
            width,
            unique: true,
            provenance: Provenance::ClosedForm,
            normals: None,
        });
    }
    match k.kind() {
        ConeKind::Lifted(_) => ConicCore::from_lift(k),
        _ => {
            let est = numeric_core::estimate_core(k, NUMERIC_CORE_SAMPLES, NUMERIC_CORE_SEED)?;
            let unique = numeric_core::uniqueness_probe(&est, 120)?;
            Ok(est.into_core(unique))
        }
    }
}

/// Whether `x + B(0,1) ⊆ K`.
///
/// Closed-form cores use the exact test `x − x_K ∈ K`; numeric cores test the
/// stored halfspaces `⟨ζ, x⟩ ≤ −1`; constructed cores sample the unit sphere
/// around `x` at `ball_samples` points.
pub fn core_membership(c: &ConicCore, x: &[f64], ball_samples: usize) -> Result<bool> {
    check_input(x, c.cone.ambient_dim())?;
    match (&c.provenance, &c.normals) {
        (Provenance::ClosedForm, _) => Ok(c.cone.contains_tol(&sub(x, &c.center), CORE_TOL)),
        (_, Some(normals)) => Ok(normals.iter().all(|z| dot(z, x) <= -1.0 + CORE_TOL)),
        _ => {
            if ball_samples == 0 {
                return Err(Error::invalid("ball sampling needs at least one sample"));
            }
            if !c.cone.contains(x) {
                return Ok(false);
            }
            let k = &c.cone;
            Ok(SpherePoints::new(k.intrinsic_dim(), 17)
                .take(ball_samples)
                .all(|u| k.contains(&add(x, &k.embed(&u)))))
        }
    }
}

/// A convex body with membership and projection oracles.
pub trait ConvexBody {
    fn dim(&self) -> usize;

    fn sample_dim(&self) -> usize {
        self.dim()
    }

    fn embed(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    fn interior_point(&self) -> Vec<f64>;

    fn contains(&self, x: &[f64]) -> bool;

    fn project(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(dist(x, &self.project(x)?))
    }

    /// Outward unit normal at a boundary point, from the projection residual
    /// of a point pushed slightly outside.
    fn outward_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.interior_point();
        let dir = linalg::normalized(&sub(x, &p), 1e-300)
            .ok_or_else(|| Error::invalid("boundary point coincides with the interior point"))?;
        let h = 1e-6 * (1.0 + norm(x));
        let y = add(x, &scale(&dir, h));
        let q = self.project(&y)?;
        linalg::normalized(&sub(&y, &q), 1e-300)
            .ok_or_else(|| Error::DegenerateSampling("no outward normal at an interior point".into()))
    }
}

impl ConvexBody for ConeModel {
    fn dim(&self) -> usize {
        self.ambient_dim()
    }

    fn sample_dim(&self) -> usize {
        self.intrinsic_dim()
    }

    fn embed(&self, v: &[f64]) -> Vec<f64> {
        ConeModel::embed(self, v)
    }

    fn interior_point(&self) -> Vec<f64> {
        match &self.kind {
            ConeKind::Exponential => vec![0.0, 1.0, 2.0],
            ConeKind::Lifted(l) => l.core_point(),
            _ => self.closed_form_core().map(|c| c.0).unwrap_or_default(),
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        ConeModel::contains(self, x)
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(ConeModel::project(self, x)?.point)
    }
}

impl ConvexBody for Ball {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn interior_point(&self) -> Vec<f64> {
        self.center.clone()
    }

    fn contains(&self, x: &[f64]) -> bool {
        ConvexSet::contains(self, x)
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = sub(x, &self.center);
        Ok(add(&self.center, &linalg::project_ball(&r, self.radius)))
    }
}

/// One of the six extremal smoothings of a cone, `η·(B + B(0, ρ))`.
#[derive(Debug, Clone)]
pub struct SmoothedSet {
    pub core: ConicCore,
    pub variant: Variant,
    eta: f64,
    rho: f64,
    /// `T_s` scaling applied to the 1-smooth member.
    scale: f64,
    /// Radius of an extra ball added after scaling.
    dilation: f64,
    /// Sampled core polyhedron, for maximal variants of non-unique cores.
    polyhedron: Option<Arc<Polyhedron>>,
}

impl SmoothedSet {
    pub fn new(core: ConicCore, variant: Variant, beta: f64) -> Result<Self> {
        check_positive("beta", beta)?;
        if !variant.is_minimal() && !core.unique && core.normals.is_none() {
            return Err(Error::Unsupported(
                "maximal smoothing needs either a unique core or sampled core normals".into(),
            ));
        }
        let r = variant.offset_factor() * core.width;
        let scale = 1.0 / beta;
        let polyhedron = match (&core.normals, variant.is_minimal() || core.unique) {
            (Some(n), false) => Some(Arc::new(Polyhedron::new(n.clone()))),
            _ => None,
        };
        Ok(SmoothedSet {
            core,
            variant,
            eta: scale / (1.0 + r),
            rho: 1.0 + r,
            scale,
            dilation: 0.0,
            polyhedron,
        })
    }

    pub fn cone(&self) -> &ConeModel {
        &self.core.cone
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Smoothness: radius of the inscribed balls is `ηρ`.
    pub fn beta(&self) -> f64 {
        1.0 / (self.eta * self.rho)
    }

    /// Certified `λ` of the unit-smoothness member.
    pub fn lambda(&self) -> f64 {
        let w = self.core.width;
        if self.variant.is_inner() {
            w
        } else if self.variant.is_general() {
            w / (2.0 + w)
        } else {
            w / (1.0 + w)
        }
    }

    pub fn distance_bound(&self) -> f64 {
        self.scale * self.lambda() + self.dilation
    }

    /// `η' · S`.
    pub fn scale_set(&self, eta: f64) -> Result<Self> {
        check_positive("eta", eta)?;
        let mut s = self.clone();
        s.eta *= eta;
        s.scale *= eta;
        s.dilation *= eta;
        Ok(s)
    }

    /// `S + B(0, r)`.
    pub fn dilated(&self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid("dilation radius must be nonnegative"));
        }
        let mut s = self.clone();
        s.rho += r / s.eta;
        s.dilation += r;
        Ok(s)
    }

    /// Membership slack on the distance to the base set; tighter than the
    /// exponential cone's point test because it only absorbs projection error.
    fn tol(&self) -> f64 {
        SMOOTHED_TOL
    }

    fn uses_core_polyhedron(&self) -> bool {
        !self.variant.is_minimal() && !self.core.unique
    }

    /// Projection onto the base set `B`, with an exactness flag.
    pub fn project_base(&self, z: &[f64]) -> Result<Projection> {
        if self.uses_core_polyhedron() {
            let poly = self.polyhedron.as_ref().expect("built at construction");
            let point = poly.project(z)?;
            return Ok(Projection { point, exact: false });
        }
        let c = &self.core.center;
        let p = self.cone().project(&sub(z, c))?;
        Ok(Projection {
            point: add(c, &p.point),
            exact: p.exact,
        })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.cone().ambient_dim() {
            return false;
        }
        let y = scale(x, 1.0 / self.eta);
        if !self.uses_core_polyhedron() && self.cone().contains_tol(&sub(&y, &self.core.center), 0.0) {
            return true;
        }
        match self.project_base(&y) {
            Ok(p) => dist(&y, &p.point) <= self.rho * (1.0 + self.tol()) + self.tol(),
            Err(_) => false,
        }
    }

    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        check_input(x, self.cone().ambient_dim())?;
        let y = scale(x, 1.0 / self.eta);
        let p = self.project_base(&y)?;
        let r = sub(&y, &p.point);
        let nr = norm(&r);
        let point = if nr <= self.rho {
            x.to_vec()
        } else {
            scale(&add(&p.point, &scale(&r, self.rho / nr)), self.eta)
        };
        Ok(Projection { point, exact: p.exact })
    }
}

impl ConvexBody for SmoothedSet {
    fn dim(&self) -> usize {
        self.cone().ambient_dim()
    }

    fn sample_dim(&self) -> usize {
        self.cone().intrinsic_dim()
    }

    fn embed(&self, v: &[f64]) -> Vec<f64> {
        self.cone().embed(v)
    }

    fn interior_point(&self) -> Vec<f64> {
        scale(&self.core.center, self.eta)
    }

    fn contains(&self, x: &[f64]) -> bool {
        SmoothedSet::contains(self, x)
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(SmoothedSet::project(self, x)?.point)
    }

    fn outward_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y = scale(x, 1.0 / self.eta);
        let p = self.project_base(&y)?;
        linalg::normalized(&sub(&y, &p.point), 1e-12)
            .ok_or_else(|| Error::DegenerateSampling("point is interior to the base set".into()))
    }
}

pub const BISECTION_STEPS: usize = 80;

/// Largest `t ∈ [0, t_max]` with `p + t u` inside, or `None` when the whole
/// segment is inside.
pub fn ray_boundary(body: &dyn ConvexBody, p: &[f64], u: &[f64], t_max: f64) -> Result<Option<f64>> {
    if !body.contains(p) {
        return Err(Error::Bisection("ray origin is not inside the set".into()));
    }
    let at = |t: f64| add(p, &scale(u, t));
    if body.contains(&at(t_max)) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if body.contains(&at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    /// `sup_{x∈A} d(x, B)`
    AFromB,
    /// `sup_{x∈B} d(x, A)`
    BFromA,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffRecord {
    pub direction: Vec<f64>,
    pub boundary_k: Option<Vec<f64>>,
    pub boundary_s: Option<Vec<f64>>,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HausdorffReport {
    pub distance: f64,
    pub records: Vec<HausdorffRecord>,
}

/// Lower bound on the (one- or two-sided) Hausdorff distance between `a` and
/// `b`, from boundary points found by bisection along rays through a common
/// interior point `p`.
pub fn hausdorff_between(
    a: &dyn ConvexBody,
    b: &dyn ConvexBody,
    p: &[f64],
    sides: Sides,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<HausdorffReport> {
    check_positive("radius", radius)?;
    let n = a.sample_dim();
    let t_max = 2.0 * radius;

    let probe = |u: &[f64]| -> Result<HausdorffRecord> {
        let mut rec = HausdorffRecord {
            direction: u.to_vec(),
            boundary_k: None,
            boundary_s: None,
            gap: 0.0,
        };
        if sides != Sides::BFromA {
            if let Some(t) = ray_boundary(a, p, u, t_max)? {
                let x = add(p, &scale(u, t));
                if norm(&x) <= radius {
                    rec.gap = rec.gap.max(b.distance(&x)?);
                    rec.boundary_k = Some(x);
                }
            }
        }
        if sides != Sides::AFromB {
            if let Some(t) = ray_boundary(b, p, u, t_max)? {
                let x = add(p, &scale(u, t));
                if norm(&x) <= radius {
                    rec.gap = rec.gap.max(a.distance(&x)?);
                    rec.boundary_s = Some(x);
                }
            }
        }
        Ok(rec)
    };

    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if let Some(u) = linalg::normalized(&scale(p, -1.0), 1e-300) {
        dirs.push(u);
    }
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            dirs.push(a.embed(&e));
        }
    }
    dirs.extend(SpherePoints::new(n, seed).take(samples).map(|v| a.embed(&v)));

    let mut records = Vec::with_capacity(dirs.len());
    for u in &dirs {
        records.push(probe(u)?);
    }

    // pattern search around the best directions, in intrinsic coordinates
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&i, &j| records[j].gap.total_cmp(&records[i].gap).then(i.cmp(&j)));
    for &start in order.iter().take(3) {
        if records[start].gap <= 0.0 {
            break;
        }
        let mut v = intrinsic_coords(a, &records[start].direction);
        let mut best = records[start].gap;
        for step in [0.05, 0.01, 2e-3, 4e-4] {
            let mut improved = true;
            let mut rounds = 0;
            while improved && rounds < 20 {
                improved = false;
                rounds += 1;
                for i in 0..n {
                    for s in [step, -step] {
                        let mut w = v.clone();
                        w[i] += s;
                        let Some(w) = linalg::normalized(&w, 1e-300) else { continue };
                        let rec = probe(&a.embed(&w))?;
                        if rec.gap > best {
                            best = rec.gap;
                            v = w;
                            records.push(rec);
                            improved = true;
                        }
                    }
                }
            }
        }
    }

    let distance = records.iter().map(|r| r.gap).fold(0.0, f64::max);
    Ok(HausdorffReport { distance, records })
}

/// Inverse of `embed` for unit directions (least squares on the embedding).
fn intrinsic_coords(body: &dyn ConvexBody, u: &[f64]) -> Vec<f64> {
    let n = body.sample_dim();
    if n == body.dim() {
        return u.to_vec();
    }
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            dot(&body.embed(&e), u)
        })
        .collect()
}

/// Lower bound on `dist(S, K)`; inner variants measure `sup_{x∈K} d(x, S)`
/// only, outer variants `sup_{x∈S} d(x, K)` only.
pub fn hausdorff_estimate(s: &SmoothedSet, radius: f64, samples: usize, seed: u64) -> Result<HausdorffReport> {
    let sides = if s.variant.is_inner() {
        Sides::AFromB
    } else if s.variant.is_outer() {
        Sides::BFromA
    } else {
        Sides::Both
    };
    let p = s.interior_point();
    hausdorff_between(s.cone(), s, &p, sides, radius, samples, seed)
}
