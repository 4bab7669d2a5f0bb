//! Sampled property checks: gradient Lipschitz estimates, the quadratic
//! upper bound, sandwich orderings, finite-difference gradients and the
//! inscribed-ball test for smooth sets.
//!
//! Every check is deterministic given its seed. Points come from the
//! low-discrepancy samplers in [`crate::sampling`].

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::composite::{AffineMap, CompositeSmoothing, SmoothMap, SoftAbsMap, Surrogate};
use crate::cone::{cone_core, ray_boundary, ConeModel, ConvexBody, SmoothedSet};
use crate::error::{check_positive, Error, Result};
use crate::function::{SmoothingSpec, Variant};
use crate::linalg::{add, dist, dot, norm, scale, sub};
use crate::sampling::{rng, BallPoints, SpherePoints};
use crate::sublinear::SublinearFn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub n_samples: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, n_samples: usize, worst_violation: f64, tolerance: f64, seed: u64) -> Self {
        CheckReport {
            check: check.into(),
            n_samples,
            worst_violation,
            tolerance,
            // NaN violations fail
            pass: worst_violation <= tolerance,
            seed,
        }
    }
}

pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    /// Maps a raw sample onto the domain (symmetrizes matrix arguments).
    fn canonicalize(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

pub trait Differentiable: Objective {
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl Objective for SublinearFn {
    fn dim(&self) -> usize {
        self.ambient_dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
    fn canonicalize(&self, x: &[f64]) -> Vec<f64> {
        SublinearFn::canonicalize(self, x)
    }
}

impl Objective for SmoothingSpec {
    fn dim(&self) -> usize {
        self.sigma().ambient_dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.eval(x)
    }
    fn canonicalize(&self, x: &[f64]) -> Vec<f64> {
        self.sigma().canonicalize(x)
    }
}

impl Differentiable for SmoothingSpec {
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.grad(x)
    }
}

impl Objective for CompositeSmoothing {
    fn dim(&self) -> usize {
        self.map.dim_in()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        CompositeSmoothing::value(self, x)
    }
}

impl Differentiable for CompositeSmoothing {
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.value_grad(x).map(|(_, g)| g)
    }
}

/// `σ ∘ G`, the nonsmooth objective behind a composite smoothing.
#[derive(Debug, Clone)]
pub struct CompositeObjective<'a>(pub &'a CompositeSmoothing);

impl Objective for CompositeObjective<'_> {
    fn dim(&self) -> usize {
        self.0.map.dim_in()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.0.objective(x)
    }
}

/// An objective from closures.
pub struct FnObjective<F, G> {
    pub dim: usize,
    pub value: F,
    pub gradient: G,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok((self.value)(x))
    }
}

impl<F, G> Differentiable for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.gradient)(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            radius: 4.0,
            samples: 2000,
            seed: 7,
            tol: 1e-6,
        }
    }
}

/// Sample pairs: half independent in `B(0, radius)`, half local pairs at
/// separations `radius·10^{-k}`, `k = 1..6`.
fn sample_pairs(dim: usize, radius: f64, pairs: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    // partners come from their own stream: interleaving one Halton sequence
    // correlates the base points with the digit that sets the radius
    let mut balls = BallPoints::new(dim, radius, seed);
    let mut partners = BallPoints::new(dim, radius, seed.wrapping_add(11));
    let mut dirs = SpherePoints::new(dim, seed.wrapping_add(1));
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let x = balls.next().expect("infinite sequence");
        let y = if i % 2 == 0 {
            partners.next().expect("infinite sequence")
        } else {
            let k = r.random_range(1..=6);
            let u = dirs.next().expect("infinite sequence");
            add(&x, &scale(&u, radius * 10f64.powi(-k)))
        };
        out.push((x, y));
    }
    out
}

fn sample_points(dim: usize, radius: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    // the origin, a radial sweep, then the ball
    let mut pts = vec![vec![0.0; dim]];
    let mut dirs = SpherePoints::new(dim, seed.wrapping_add(2));
    for k in 0..n / 4 {
        let u = dirs.next().expect("infinite sequence");
        let t = radius * 2f64.powf(-((k % 24) as f64) / 2.0);
        pts.push(scale(&u, t));
    }
    pts.extend(BallPoints::new(dim, radius, seed).take(n.saturating_sub(pts.len())));
    pts
}

/// Largest sampled `‖∇f(x) − ∇f(y)‖/‖x − y‖`, a lower bound on the modulus.
pub fn lipschitz_grad_estimate(f: &dyn Differentiable, radius: f64, pairs: usize, seed: u64) -> Result<f64> {
    check_positive("radius", radius)?;
    if pairs == 0 {
        return Err(Error::invalid("pairs must be at least 1"));
    }
    let mut best: f64 = 0.0;
    for (x, y) in sample_pairs(f.dim(), radius, pairs, seed) {
        let (x, y) = (f.canonicalize(&x), f.canonicalize(&y));
        let d = dist(&x, &y);
        if d == 0.0 {
            continue;
        }
        let g = sub(&f.gradient(&x)?, &f.gradient(&y)?);
        best = best.max(norm(&g) / d);
    }
    Ok(best)
}

/// Worst relative violation of `f(y) ≤ f(x) + ⟨∇f(x), y − x⟩ + (β/2)‖y − x‖²`.
pub fn quadratic_upper_check(f: &dyn Differentiable, beta: f64, opts: CheckOptions) -> Result<CheckReport> {
    check_positive("beta", beta)?;
    let mut worst = f64::NEG_INFINITY;
    let pairs = sample_pairs(f.dim(), opts.radius, opts.samples, opts.seed);
    for (x, y) in &pairs {
        let (x, y) = (f.canonicalize(x), f.canonicalize(y));
        let fx = f.value(&x)?;
        let fy = f.value(&y)?;
        let h = sub(&y, &x);
        let bound = fx + dot(&f.gradient(&x)?, &h) + 0.5 * beta * dot(&h, &h);
        worst = worst.max((fy - bound) / (1.0 + fy.abs()));
    }
    Ok(CheckReport::new(
        "quadratic-upper-bound",
        pairs.len(),
        worst.max(0.0),
        opts.tol,
        opts.seed,
    ))
}

/// Worst relative `lo(x) − hi(x)`.
pub fn sandwich_check(lo: &dyn Objective, hi: &dyn Objective, opts: CheckOptions) -> Result<CheckReport> {
    if lo.dim() != hi.dim() {
        return Err(Error::DimensionMismatch {
            expected: lo.dim(),
            got: hi.dim(),
        });
    }
    let pts = sample_points(lo.dim(), opts.radius, opts.samples, opts.seed);
    let mut worst = f64::NEG_INFINITY;
    for x in &pts {
        let x = lo.canonicalize(x);
        let (a, b) = (lo.value(&x)?, hi.value(&x)?);
        worst = worst.max((a - b) / b.abs().max(1.0));
    }
    Ok(CheckReport::new("sandwich", pts.len(), worst.max(0.0), opts.tol, opts.seed))
}

/// Worst relative deviation of `a − b` from `shift`.
pub fn offset_check(a: &dyn Objective, b: &dyn Objective, shift: f64, opts: CheckOptions) -> Result<CheckReport> {
    let pts = sample_points(a.dim(), opts.radius, opts.samples, opts.seed);
    let mut worst: f64 = 0.0;
    for x in &pts {
        let x = a.canonicalize(x);
        let (u, v) = (a.value(&x)?, b.value(&x)?);
        worst = worst.max((u - v - shift).abs() / u.abs().max(v.abs()).max(1.0));
    }
    Ok(CheckReport::new("offset-identity", pts.len(), worst, opts.tol, opts.seed))
}

/// Step of the central differences.
pub const FD_STEP: f64 = 1e-5;

/// Worst `‖∇f − ∇_h f‖/max(1, ‖∇f‖)` against central differences.
pub fn fd_gradient_check(f: &dyn Differentiable, opts: CheckOptions) -> Result<CheckReport> {
    let pts = sample_points(f.dim(), opts.radius, opts.samples, opts.seed);
    let mut worst: f64 = 0.0;
    for x in &pts {
        let x = f.canonicalize(x);
        let g = f.gradient(&x)?;
        let mut fd = vec![0.0; x.len()];
        for i in 0..x.len() {
            let mut p = x.clone();
            let mut m = x.clone();
            p[i] += FD_STEP;
            m[i] -= FD_STEP;
            let (p, m) = (f.canonicalize(&p), f.canonicalize(&m));
            fd[i] = (f.value(&p)? - f.value(&m)?) / (2.0 * FD_STEP);
        }
        worst = worst.max(dist(&g, &fd) / norm(&g).max(1.0));
    }
    Ok(CheckReport::new("finite-difference-gradient", pts.len(), worst, opts.tol, opts.seed))
}

/// Boundary points of `body` on rays from its interior point, within `t_max`.
fn boundary_points(body: &dyn ConvexBody, n: usize, t_max: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let p = body.interior_point();
    let mut out = Vec::with_capacity(n);
    let mut dirs = SpherePoints::new(body.sample_dim(), seed);
    let mut tries = 0;
    while out.len() < n && tries < 20 * n.max(1) {
        tries += 1;
        let u = body.embed(&dirs.next().expect("infinite sequence"));
        if let Some(t) = ray_boundary(body, &p, &u, t_max)? {
            out.push(add(&p, &scale(&u, t)));
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateSampling("no boundary point found along sampled rays".into()));
    }
    Ok(out)
}

/// Ball test points per boundary point.
const BALL_PROBES: usize = 24;

/// `B(x − ζ/β, 1/β) ⊆ C` at sampled boundary points `x` with outward normal
/// `ζ`; reports the worst distance from a probe of the ball to the set.
pub fn set_smoothness_check(body: &dyn ConvexBody, beta: f64, boundary_samples: usize, seed: u64) -> Result<CheckReport> {
    set_smoothness_check_tol(body, beta, boundary_samples, seed, 1e-6)
}

pub fn set_smoothness_check_tol(
    body: &dyn ConvexBody,
    beta: f64,
    boundary_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    check_positive("beta", beta)?;
    let t_max = 8.0 * (1.0 + norm(&body.interior_point())) / beta.min(1.0);
    let xs = boundary_points(body, boundary_samples, t_max, seed)?;
    let probes: Vec<Vec<f64>> = SpherePoints::new(body.sample_dim(), seed.wrapping_add(3))
        .take(BALL_PROBES)
        .map(|u| body.embed(&u))
        .collect();
    let mut worst: f64 = 0.0;
    for x in &xs {
        let zeta = body.outward_normal(x)?;
        let c = sub(x, &scale(&zeta, 1.0 / beta));
        // the antipode of x, then the sphere of the ball
        let far = sub(x, &scale(&zeta, 2.0 / beta));
        worst = worst.max(body.distance(&far)?);
        for u in &probes {
            let q = add(&c, &scale(u, 1.0 / beta));
            worst = worst.max(body.distance(&q)?);
        }
    }
    Ok(CheckReport::new("inscribed-ball", xs.len(), worst, tol, seed))
}

/// Largest sampled `‖ζ(x) − ζ(y)‖/‖x − y‖` over nearby boundary points.
pub fn normal_lipschitz_estimate(body: &dyn ConvexBody, samples: usize, seed: u64) -> Result<f64> {
    let p = body.interior_point();
    let n = body.sample_dim();
    let t_max = 50.0 * (1.0 + norm(&p));
    let mut dirs = SpherePoints::new(n, seed);
    let mut local = SpherePoints::new(n, seed.wrapping_add(5));
    let mut best: f64 = 0.0;
    for i in 0..samples {
        let v = dirs.next().expect("infinite sequence");
        let w = local.next().expect("infinite sequence");
        let step = 10f64.powi(-2 - (i % 3) as i32);
        let v2 = crate::linalg::normalized(&add(&v, &scale(&w, step)), 1e-300).expect("perturbation is small");
        let (u1, u2) = (body.embed(&v), body.embed(&v2));
        let (Some(t1), Some(t2)) = (ray_boundary(body, &p, &u1, t_max)?, ray_boundary(body, &p, &u2, t_max)?) else {
            continue;
        };
        let x = add(&p, &scale(&u1, t1));
        let y = add(&p, &scale(&u2, t2));
        let d = dist(&x, &y);
        if d < 1e-9 {
            continue;
        }
        let z = sub(&body.outward_normal(&x)?, &body.outward_normal(&y)?);
        best = best.max(norm(&z) / d);
    }
    Ok(best)
}

/// Worst `dist(x, outer)` over sampled points `x` of `inner`, obtained by
/// projecting a ball of points onto `inner`.
pub fn containment_check(inner: &dyn ConvexBody, outer: &dyn ConvexBody, opts: CheckOptions) -> Result<CheckReport> {
    let pts: Vec<Vec<f64>> = BallPoints::new(inner.sample_dim(), opts.radius, opts.seed)
        .take(opts.samples)
        .map(|u| inner.embed(&u))
        .collect();
    let mut worst: f64 = 0.0;
    for y in &pts {
        let x = inner.project(y)?;
        worst = worst.max(outer.distance(&x)?);
    }
    Ok(CheckReport::new("containment", pts.len(), worst, opts.tol, opts.seed))
}

/// Worst `|d(x, A) − d(x, B)|`, zero when the two sets coincide.
pub fn same_set_check(a: &dyn ConvexBody, b: &dyn ConvexBody, opts: CheckOptions) -> Result<CheckReport> {
    let pts: Vec<Vec<f64>> = BallPoints::new(a.sample_dim(), opts.radius, opts.seed)
        .take(opts.samples)
        .map(|u| a.embed(&u))
        .collect();
    let mut worst: f64 = 0.0;
    for x in &pts {
        worst = worst.max((a.distance(x)? - b.distance(x)?).abs());
    }
    Ok(CheckReport::new("same-set", pts.len(), worst, opts.tol, opts.seed))
}

fn bound_report(name: impl Into<String>, estimate: f64, bound: f64, tol: f64, seed: u64, n: usize) -> CheckReport {
    let v = (estimate - bound).max(0.0) / bound.max(1.0);
    CheckReport::new(name, n, v, tol, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Functions,
    Cones,
    Composite,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Suite> {
        match s {
            "functions" => Ok(Suite::Functions),
            "cones" => Ok(Suite::Cones),
            "composite" => Ok(Suite::Composite),
            "all" => Ok(Suite::All),
            _ => Err(Error::invalid(format!(
                "unknown suite '{s}' (expected functions, cones, composite or all)"
            ))),
        }
    }
}

pub const SUITE_BETAS: [f64; 3] = [0.5, 1.0, 4.0];

/// The catalog used by the function suite.
pub fn catalog_functions() -> Vec<SublinearFn> {
    vec![
        SublinearFn::relu(),
        SublinearFn::euclidean_norm(3).expect("valid"),
        SublinearFn::one_norm(3).expect("valid"),
        SublinearFn::weighted_inf_norm(vec![1.0, 2.0]).expect("valid"),
        SublinearFn::max(3).expect("valid"),
        SublinearFn::max_eigen(2).expect("valid"),
        SublinearFn::polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]]).expect("valid"),
    ]
}

pub fn catalog_cones() -> Vec<ConeModel> {
    vec![
        ConeModel::orthant(3).expect("valid"),
        ConeModel::second_order(2).expect("valid"),
        ConeModel::psd(2).expect("valid"),
        ConeModel::exponential(),
    ]
}

fn tag(mut r: CheckReport, label: &str) -> CheckReport {
    r.check = format!("{label}/{}", r.check);
    r
}

/// Sandwich, ordering, offset, smoothness and gradient checks for one
/// function at one `β`.
pub fn function_checks(f: &SublinearFn, beta: f64, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let base = SmoothingSpec::for_function(f, Variant::MinInner, beta)?;
    let w = base.core.width;
    let spec = |v: Variant| base.with_variant(v);
    let opts = CheckOptions {
        radius: base.default_radius(),
        samples,
        seed,
        tol: 1e-6,
    };
    let mut out = Vec::new();
    for v in Variant::ALL {
        let s = spec(v);
        let label = format!("{}/{}/beta={beta}", f.name(), v.name());
        out.push(tag(quadratic_upper_check(&s, beta, opts)?, &label));
        let lip = lipschitz_grad_estimate(&s, opts.radius, samples, seed)?;
        out.push(tag(bound_report("gradient-lipschitz", lip, beta, 1e-6, seed, samples), &label));
        out.push(tag(fd_gradient_check(&s, CheckOptions { samples: samples / 4, tol: 1e-5, ..opts })?, &label));
        if v.is_inner() {
            out.push(tag(sandwich_check(f, &s, opts)?, &format!("{label}/dominates")));
        }
        if v.is_outer() {
            out.push(tag(sandwich_check(&s, f, opts)?, &format!("{label}/minorizes")));
        }
        let d = s.estimate_distance(opts.radius, 16, seed)?;
        out.push(tag(bound_report("distance", d, s.distance_bound(), 1e-6, seed, 16), &label));
    }
    let pairs = [
        (Variant::MinInner, Variant::MaxInner),
        (Variant::MinGeneral, Variant::MaxGeneral),
        (Variant::MinOuter, Variant::MaxOuter),
    ];
    let name = f.name();
    // the full-core member F sits below the translate member f
    for (hi, lo) in pairs {
        let label = format!("{name}/{}<={}/beta={beta}", lo.name(), hi.name());
        out.push(tag(sandwich_check(&spec(lo), &spec(hi), opts)?, &label));
    }
    for (a, b, k) in [
        (Variant::MinInner, Variant::MinGeneral, 0.5),
        (Variant::MinInner, Variant::MinOuter, 1.0),
        (Variant::MaxInner, Variant::MaxGeneral, 0.5),
        (Variant::MaxInner, Variant::MaxOuter, 1.0),
    ] {
        let label = format!("{name}/{}-{}/beta={beta}", a.name(), b.name());
        out.push(tag(offset_check(&spec(a), &spec(b), k * w / beta, opts)?, &label));
    }
    Ok(out)
}

/// Containment, ordering, offset and smoothness checks for one cone at one `β`.
pub fn cone_checks(k: &ConeModel, beta: f64, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let core = cone_core(k)?;
    let w = core.width;
    let set = |v: Variant| SmoothedSet::new(core.clone(), v, beta);
    let radius = 4.0 * (1.0 + norm(&core.center)) / beta;
    let opts = CheckOptions {
        radius,
        samples,
        seed,
        tol: 1e-6,
    };
    let name = k.name();
    let mut out = Vec::new();
    for v in Variant::ALL {
        let s = set(v)?;
        let label = format!("{name}/{}/beta={beta}", v.name());
        if v.is_inner() {
            out.push(tag(containment_check(&s, k, opts)?, &format!("{label}/inside")));
        }
        if v.is_outer() {
            out.push(tag(containment_check(k, &s, opts)?, &format!("{label}/contains")));
        }
        out.push(tag(set_smoothness_check(&s, beta, samples / 8, seed)?, &label));
        let lip = normal_lipschitz_estimate(&s, samples / 4, seed)?;
        out.push(tag(bound_report("normal-lipschitz", lip, beta, 1e-6, seed, samples / 4), &label));
    }
    for (lo, hi) in [
        (Variant::MinInner, Variant::MaxInner),
        (Variant::MinGeneral, Variant::MaxGeneral),
        (Variant::MinOuter, Variant::MaxOuter),
    ] {
        let label = format!("{name}/{}<={}/beta={beta}", lo.name(), hi.name());
        out.push(tag(containment_check(&set(lo)?, &set(hi)?, opts)?, &label));
    }
    // the general and outer members are rescaled dilations of the inner one
    for (inner, other, r) in [
        (Variant::MinInner, Variant::MinGeneral, w / 2.0),
        (Variant::MinInner, Variant::MinOuter, w),
        (Variant::MaxInner, Variant::MaxGeneral, w / 2.0),
        (Variant::MaxInner, Variant::MaxOuter, w),
    ] {
        let derived = set(inner)?.dilated(r / beta)?.scale_set(1.0 / (1.0 + r))?;
        let label = format!("{name}/{}-{}/beta={beta}", inner.name(), other.name());
        let rep = same_set_check(&derived, &set(other)?, CheckOptions { samples: samples / 4, ..opts })?;
        out.push(tag(CheckReport { check: "offset-identity".into(), ..rep }, &label));
    }
    Ok(out)
}

/// The composite certificate on two instances: an affine map and a curved
/// map with nonzero Jacobian Lipschitz constant.
pub fn composite_checks(samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut r = rng(seed);
    let (n, d) = (4, 3);
    let a: Vec<f64> = (0..n * d).map(|_| r.random::<f64>() * 2.0 - 1.0).collect();
    let b: Vec<f64> = (0..n).map(|_| r.random::<f64>() - 0.5).collect();
    let sigma = SublinearFn::max(n)?;
    let maps: Vec<(&str, Arc<dyn SmoothMap>)> = vec![
        ("affine", Arc::new(AffineMap::new(a.clone(), b.clone(), d)?)),
        ("soft-abs", Arc::new(SoftAbsMap::new(a, b, d)?)),
    ];
    let mut out = Vec::new();
    for (label, map) in maps {
        let m = map.lipschitz();
        let floor = sigma.lipschitz() * map.jacobian_lipschitz();
        for beta_prime in SUITE_BETAS {
            let beta = floor + m * m * beta_prime;
            for sur in [
                Surrogate::OptimalGeneral,
                Surrogate::OptimalInner,
                Surrogate::OptimalOuter,
                Surrogate::LogSumExp,
            ] {
                let c = CompositeSmoothing::new(sigma.clone(), map.clone(), beta, sur)?;
                let tag_ = format!("composite/{label}/{}/beta={beta:.4}", sur.name());
                let opts = CheckOptions {
                    radius: 3.0,
                    samples,
                    seed,
                    tol: 1e-6,
                };
                let lip = lipschitz_grad_estimate(&c, opts.radius, samples, seed)?;
                out.push(tag(bound_report("gradient-lipschitz", lip, beta, 1e-4, seed, samples), &tag_));
                let obj = CompositeObjective(&c);
                let gap = sample_points(d, opts.radius, samples, seed)
                    .iter()
                    .map(|x| Ok((c.value(x)? - obj.value(x)?).abs()))
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                out.push(tag(bound_report("value-gap", gap, c.distance_bound(), 1e-6, seed, samples), &tag_));
                out.push(tag(fd_gradient_check(&c, CheckOptions { samples: samples / 4, tol: 1e-5, ..opts })?, &tag_));
            }
        }
    }
    Ok(out)
}

/// Runs a suite over `β ∈ {½, 1, 4}`.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Functions | Suite::All) {
        for f in catalog_functions() {
            for beta in SUITE_BETAS {
                out.extend(function_checks(&f, beta, 400, seed)?);
            }
        }
    }
    if matches!(suite, Suite::Cones | Suite::All) {
        for k in catalog_cones() {
            for beta in SUITE_BETAS {
                out.extend(cone_checks(&k, beta, 160, seed)?);
            }
        }
    }
    if matches!(suite, Suite::Composite | Suite::All) {
        out.extend(composite_checks(400, seed)?);
    }
    Ok(out)
}
