//! Smoothing of compositions `σ ∘ G` and an accelerated gradient solver for
//! the smoothed minimax problem.
//!
//! For `G` with Lipschitz constant `M` and `L`-Lipschitz Jacobian, the
//! composite `x ↦ f(β′G(x))/β′` with `β′ = (β − M_σL)/M²` is `β`-smooth and
//! inherits the distance `dist(f, σ)/β′`.

use std::fmt::Debug;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_input, check_positive, Error, Result};
use crate::function::{compute_core, FunctionalCore, SmoothingSpec, Variant};
use crate::linalg::{axpy, dot, norm, spectral_norm, sub};
use crate::sampling::rng;
use crate::sublinear::{Family, SublinearFn};

pub trait SmoothMap: Debug + Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major `dim_out × dim_in` Jacobian.
    fn jacobian(&self, x: &[f64]) -> Vec<f64>;
    /// Lipschitz constant `M` of the map.
    fn lipschitz(&self) -> f64;
    /// Lipschitz constant `L` of the Jacobian.
    fn jacobian_lipschitz(&self) -> f64;
}

fn op_norm(a: &[f64], n: usize, d: usize) -> f64 {
    spectral_norm(a, n, d, 10_000, 1e-15)
}

fn check_matrix(a: &[f64], b: &[f64], d: usize) -> Result<usize> {
    if d == 0 || a.len() % d != 0 || a.len() / d != b.len() {
        return Err(Error::invalid("matrix shape does not match offset length"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    Ok(b.len())
}

/// `G(x) = Ax + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    a: Vec<f64>,
    b: Vec<f64>,
    d: usize,
    m: f64,
}

impl AffineMap {
    pub fn new(a: Vec<f64>, b: Vec<f64>, d: usize) -> Result<Self> {
        let n = check_matrix(&a, &b, d)?;
        let m = op_norm(&a, n, d);
        Ok(AffineMap { a, b, d, m })
    }

    pub fn identity(d: usize) -> Self {
        AffineMap::new(crate::linalg::identity(d), vec![0.0; d], d).expect("valid shape")
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }
}

impl SmoothMap for AffineMap {
    fn dim_in(&self) -> usize {
        self.d
    }

    fn dim_out(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.d;
        self.b
            .iter()
            .enumerate()
            .map(|(i, bi)| dot(&self.a[i * d..(i + 1) * d], x) + bi)
            .collect()
    }

    fn jacobian(&self, _x: &[f64]) -> Vec<f64> {
        self.a.clone()
    }

    fn lipschitz(&self) -> f64 {
        self.m
    }

    fn jacobian_lipschitz(&self) -> f64 {
        0.0
    }
}

/// `G_i(x) = √(1 + ⟨a_i, x⟩²) + b_i`, a convex map with curved Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAbsMap {
    a: Vec<f64>,
    b: Vec<f64>,
    d: usize,
    m: f64,
    l: f64,
}

impl SoftAbsMap {
    pub fn new(a: Vec<f64>, b: Vec<f64>, d: usize) -> Result<Self> {
        let n = check_matrix(&a, &b, d)?;
        let m = op_norm(&a, n, d);
        let row_max = (0..n).map(|i| norm(&a[i * d..(i + 1) * d])).fold(0.0, f64::max);
        Ok(SoftAbsMap { a, b, d, m, l: m * row_max })
    }
}

impl SmoothMap for SoftAbsMap {
    fn dim_in(&self) -> usize {
        self.d
    }

    fn dim_out(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let d = self.d;
        self.b
            .iter()
            .enumerate()
            .map(|(i, bi)| {
                let t = dot(&self.a[i * d..(i + 1) * d], x);
                (1.0 + t * t).sqrt() + bi
            })
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut j = self.a.clone();
        for i in 0..self.b.len() {
            let t = dot(&self.a[i * d..(i + 1) * d], x);
            let s = t / (1.0 + t * t).sqrt();
            j[i * d..(i + 1) * d].iter_mut().for_each(|v| *v *= s);
        }
        j
    }

    fn lipschitz(&self) -> f64 {
        self.m
    }

    fn jacobian_lipschitz(&self) -> f64 {
        self.l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Surrogate {
    OptimalGeneral,
    OptimalInner,
    OptimalOuter,
    LogSumExp,
}

impl Surrogate {
    pub fn name(self) -> &'static str {
        match self {
            Surrogate::OptimalGeneral => "optimal",
            Surrogate::OptimalInner => "optimal-inner",
            Surrogate::OptimalOuter => "optimal-outer",
            Surrogate::LogSumExp => "logsumexp",
        }
    }

    fn variant(self) -> Option<Variant> {
        match self {
            Surrogate::OptimalGeneral => Some(Variant::MinGeneral),
            Surrogate::OptimalInner => Some(Variant::MinInner),
            Surrogate::OptimalOuter => Some(Variant::MinOuter),
            Surrogate::LogSumExp => None,
        }
    }
}

/// `η · log Σ exp(z_i/η)` with max-shift, and its gradient `softmax(z/η)`.
pub fn log_sum_exp(z: &[f64], eta: f64) -> (f64, Vec<f64>) {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = z.iter().map(|v| ((v - m) / eta).exp()).collect();
    let s: f64 = w.iter().sum();
    (m + eta * s.ln(), w.iter().map(|v| v / s).collect())
}

#[derive(Debug, Clone)]
pub struct CompositeSmoothing {
    pub sigma: SublinearFn,
    pub core: FunctionalCore,
    pub map: Arc<dyn SmoothMap>,
    pub beta_target: f64,
    pub surrogate: Surrogate,
    spec: Option<SmoothingSpec>,
}

impl CompositeSmoothing {
    pub fn new(sigma: SublinearFn, map: Arc<dyn SmoothMap>, beta_target: f64, surrogate: Surrogate) -> Result<Self> {
        check_positive("beta", beta_target)?;
        if map.dim_out() != sigma.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: sigma.ambient_dim(),
                got: map.dim_out(),
            });
        }
        if surrogate == Surrogate::LogSumExp && *sigma.family() != Family::Max {
            return Err(Error::invalid("the log-sum-exp surrogate smooths max only"));
        }
        let core = compute_core(&sigma)?;
        let floor = sigma.lipschitz() * map.jacobian_lipschitz();
        if beta_target <= floor {
            return Err(Error::invalid(format!(
                "beta {beta_target} must exceed M_sigma * L = {floor}"
            )));
        }
        let mut c = CompositeSmoothing {
            sigma,
            core,
            map,
            beta_target,
            surrogate,
            spec: None,
        };
        if let Some(v) = surrogate.variant() {
            c.spec = Some(SmoothingSpec::new(c.core.clone(), v, c.inner_beta())?);
        }
        Ok(c)
    }

    /// Composite with a prescribed smoothing parameter `η = 1/β′`.
    pub fn with_eta(sigma: SublinearFn, map: Arc<dyn SmoothMap>, eta: f64, surrogate: Surrogate) -> Result<Self> {
        check_positive("eta", eta)?;
        let m = map.lipschitz();
        let beta = sigma.lipschitz() * map.jacobian_lipschitz() + m * m / eta;
        Self::new(sigma, map, beta, surrogate)
    }

    /// `β′ = (β − M_σL)/M²`.
    pub fn inner_beta(&self) -> f64 {
        let m = self.map.lipschitz();
        (self.beta_target - self.sigma.lipschitz() * self.map.jacobian_lipschitz()) / (m * m)
    }

    pub fn eta(&self) -> f64 {
        1.0 / self.inner_beta()
    }

    /// `(λ, Δ)` for the composite.
    pub fn certificate(&self) -> (f64, f64) {
        let m2 = self.map.lipschitz().powi(2);
        let delta = self.sigma.lipschitz() * self.map.jacobian_lipschitz();
        let lambda = match self.surrogate {
            Surrogate::OptimalGeneral => m2 * self.core.width / 2.0,
            Surrogate::OptimalInner | Surrogate::OptimalOuter => m2 * self.core.width,
            Surrogate::LogSumExp => m2 * (self.sigma.dim() as f64).ln(),
        };
        (lambda, delta)
    }

    /// `λ/(β − Δ)`.
    pub fn distance_bound(&self) -> f64 {
        let (l, d) = self.certificate();
        l / (self.beta_target - d)
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.map.dim_in())?;
        self.sigma.eval(&self.map.eval(x))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.map.dim_in())?;
        let z = self.map.eval(x);
        match &self.spec {
            Some(s) => s.eval(&z),
            None => Ok(log_sum_exp(&z, self.eta()).0),
        }
    }

    pub fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_input(x, self.map.dim_in())?;
        let z = self.map.eval(x);
        let (v, gz) = match &self.spec {
            Some(s) => s.value_grad(&z)?,
            None => log_sum_exp(&z, self.eta()),
        };
        let d = self.map.dim_in();
        let j = self.map.jacobian(x);
        let mut g = vec![0.0; d];
        for (i, gi) in gz.iter().enumerate() {
            axpy(*gi, &j[i * d..(i + 1) * d], &mut g);
        }
        Ok((v, g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub surrogate: Surrogate,
    pub iterations: usize,
    /// `σ(G(x)) − optimum`, when the optimum is known.
    pub final_gap: Option<f64>,
    pub eta: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    pub optimum: Option<f64>,
    pub max_iter: usize,
    pub instance: String,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            optimum: None,
            max_iter: 100_000,
            instance: "custom".into(),
        }
    }
}

/// Slack allowed in the sampled convexity inequality.
const CONVEXITY_TOL: f64 = 1e-9;

/// Constant-step accelerated gradient (1983 scheme, no restart).
///
/// Stops when `σ(G(x)) − optimum ≤ eps` if the optimum is known, else when
/// `‖∇f‖ ≤ eps·β/10`.
pub fn accelerated_minimize(
    c: &CompositeSmoothing,
    x0: &[f64],
    eps: f64,
    opts: &MinimizeOptions,
) -> Result<BenchRecord> {
    check_positive("eps", eps)?;
    check_input(x0, c.map.dim_in())?;
    let start = Instant::now();
    let beta = c.beta_target;
    let done = |x: &[f64], g: &[f64]| -> Result<(bool, Option<f64>)> {
        Ok(match opts.optimum {
            Some(opt) => {
                let gap = c.objective(x)? - opt;
                (gap <= eps, Some(gap))
            }
            None => (norm(g) <= eps * beta / 10.0, None),
        })
    };

    let mut x = x0.to_vec();
    let (mut fx, gx) = c.value_grad(&x)?;
    let (mut stop, mut gap) = done(&x, &gx)?;
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut k = 0;
    while !stop {
        if k == opts.max_iter {
            return Err(Error::NonConvergence {
                what: "accelerated gradient",
                iterations: k,
                residual: gap.unwrap_or(f64::NAN),
            });
        }
        k += 1;
        let (fy, gy) = c.value_grad(&y)?;
        let mut next = y.clone();
        axpy(-1.0 / beta, &gy, &mut next);
        let (fn_, gn) = c.value_grad(&next)?;

        // convexity: f(next) ≥ f(y) + ⟨∇f(y), next − y⟩
        let lin = fy + dot(&gy, &sub(&next, &y));
        if fn_ < lin - CONVEXITY_TOL * (1.0 + fy.abs()) {
            return Err(Error::NonConvex(format!(
                "gradient inequality violated by {:e} at iteration {k}",
                lin - fn_
            )));
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        y = next.iter().zip(&x).map(|(a, b)| a + mom * (a - b)).collect();
        x = next;
        fx = fn_;
        t = t_next;
        (stop, gap) = done(&x, &gn)?;
    }
    let _ = fx;
    Ok(BenchRecord {
        instance: opts.instance.clone(),
        n: c.map.dim_out(),
        d: c.map.dim_in(),
        epsilon: eps,
        surrogate: c.surrogate,
        iterations: k,
        final_gap: gap,
        eta: c.eta(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// `min_x max_i ⟨a_i, x⟩ + b_i` with a planted minimizer `x⋆` and optimum
/// `t⋆`: `d + 1` pieces are active at `x⋆` with a strictly positive
/// combination of their gradients equal to zero; the rest sit strictly below.
#[derive(Debug, Clone)]
pub struct PlantedMinimax {
    pub map: AffineMap,
    pub minimizer: Vec<f64>,
    pub optimum: f64,
    pub seed: u64,
}

impl PlantedMinimax {
    pub fn generate(n: usize, d: usize, seed: u64) -> Result<Self> {
        if d == 0 || n < d + 1 {
            return Err(Error::invalid("planted minimax needs n >= d + 1 >= 2"));
        }
        let mut r = rng(seed);
        let mut gauss = || -> f64 {
            // Box-Muller on the seeded stream
            let u1: f64 = r.random::<f64>().max(1e-300);
            let u2: f64 = r.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let x_star: Vec<f64> = (0..d).map(|_| gauss()).collect();
        let t_star = 1.0;

        let raw: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| gauss()).collect()).collect();
        let weights: Vec<f64> = (0..=d).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7).sin()).collect();
        let wsum: f64 = weights.iter().sum();
        let mut mean = vec![0.0; d];
        for (w, a) in weights.iter().zip(&raw) {
            axpy(w / wsum, a, &mut mean);
        }
        let mut a = Vec::with_capacity(n * d);
        let mut b = Vec::with_capacity(n);
        for (i, row) in raw.iter().enumerate() {
            let (row, drop) = if i <= d {
                (sub(row, &mean), 0.0)
            } else {
                (row.clone(), 0.5 + (i as f64 * 0.37).fract())
            };
            b.push(t_star - dot(&row, &x_star) - drop);
            a.extend(row);
        }
        Ok(PlantedMinimax {
            map: AffineMap::new(a, b, d)?,
            minimizer: x_star,
            optimum: t_star,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.map.dim_out()
    }

    pub fn d(&self) -> usize {
        self.map.dim_in()
    }

    pub fn label(&self) -> String {
        format!("planted-minimax(n={},d={},seed={})", self.n(), self.d(), self.seed)
    }

    /// Smoothing parameter giving a spread of `eps/2` between surrogate and
    /// `max`: `ε/(2 ln n)` for log-sum-exp, `ε/(2w_σ)` for the optimal family.
    pub fn eta_for(&self, surrogate: Surrogate, eps: f64) -> f64 {
        let n = self.n() as f64;
        match surrogate {
            Surrogate::LogSumExp => eps / (2.0 * n.ln()),
            _ => eps / (2.0 * 0.5 * (1.0 - 1.0 / n)),
        }
    }

    pub fn solve(&self, surrogate: Surrogate, eps: f64, max_iter: usize) -> Result<BenchRecord> {
        let sigma = SublinearFn::max(self.n())?;
        let eta = self.eta_for(surrogate, eps);
        let c = CompositeSmoothing::with_eta(sigma, Arc::new(self.map.clone()), eta, surrogate)?;
        let opts = MinimizeOptions {
            optimum: Some(self.optimum),
            max_iter,
            instance: self.label(),
        };
        accelerated_minimize(&c, &vec![0.0; self.d()], eps, &opts)
    }
}
