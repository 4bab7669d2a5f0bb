//! Numerical conic cores from sampled unit normals of `N_K(0)`.
//!
//! The core is approximated from outside by `{x : ⟨ζ_j, x⟩ ≤ −1}` over the
//! sampled normals, and its min-norm point is found by solving the
//! least-distance program through nonnegative least squares.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cone::{exponential, ConeKind, ConeModel, ConicCore};
use crate::error::{Error, Result};
use crate::function::Provenance;
use crate::linalg::{dist, dot, least_squares, norm, scale, solve_dense, sub};
use crate::sampling::{Halton, SpherePoints};

/// Normals closer than this are treated as duplicates.
pub const DEDUP_RESOLUTION: f64 = 1e-4;
const MEMBER_CHECKS: usize = 500;
const NORMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreEstimate {
    #[serde(skip)]
    cone: Option<ConeModel>,
    pub cone_name: String,
    pub normals: Vec<Vec<f64>>,
    pub center_estimate: Vec<f64>,
    pub width_estimate: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// `max_j ⟨ζ_j, center⟩ + 1`
    pub residual: f64,
}

impl CoreEstimate {
    pub fn cone(&self) -> &ConeModel {
        self.cone.as_ref().expect("estimates carry their cone")
    }

    pub fn into_core(self, unique: bool) -> ConicCore {
        ConicCore {
            cone: self.cone().clone(),
            center: self.center_estimate,
            width: self.width_estimate,
            unique,
            provenance: Provenance::Numeric,
            normals: Some(self.normals),
        }
    }
}

/// Unit-norm members of `K` used to validate sampled normals.
fn cone_members(k: &ConeModel, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if let ConeKind::Exponential = k.kind() {
        return Ok(exponential::sample_members(n, seed));
    }
    let mut out = Vec::with_capacity(n);
    for u in SpherePoints::new(k.intrinsic_dim(), seed).take(4 * n) {
        let p = k.project(&k.embed(&u))?.point;
        let np = norm(&p);
        if np > 1e-9 {
            out.push(scale(&p, 1.0 / np));
            if out.len() == n {
                break;
            }
        }
    }
    Ok(out)
}

fn dedup(candidates: impl IntoIterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let all: Vec<Vec<f64>> = candidates.into_iter().collect();
    thin_indices(&all, DEDUP_RESOLUTION)
        .into_iter()
        .map(|i| all[i].clone())
        .collect()
}

/// Indices of the first occurrence of every vector, dropping later ones
/// within `resolution` of a kept one.
pub fn thin_indices(vectors: &[Vec<f64>], resolution: f64) -> Vec<usize> {
    thin_with_owner(vectors, resolution).0
}

/// Thinned indices, plus for every vector the kept index it was merged into.
fn thin_with_owner(vectors: &[Vec<f64>], resolution: f64) -> (Vec<usize>, Vec<usize>) {
    let mut kept: Vec<usize> = Vec::new();
    let mut owner = vec![0; vectors.len()];
    let mut slabs: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let key = |v: f64| (v / resolution).floor() as i64;
    for (j, z) in vectors.iter().enumerate() {
        let k0 = key(z[0]);
        let near = slabs
            .range(k0 - 1..=k0 + 1)
            .flat_map(|(_, ids)| ids.iter())
            .find(|&&i| dist(&vectors[i], z) < resolution)
            .copied();
        match near {
            Some(i) => owner[j] = i,
            None => {
                slabs.entry(k0).or_default().push(j);
                kept.push(j);
                owner[j] = j;
            }
        }
    }
    (kept, owner)
}

/// Up to `n` unit normals of `K` at the origin, validated against 500 sampled
/// members of `K` and deduplicated. Prefixes are stable: the first normals of
/// a larger run coincide with a smaller run for the same seed.
pub fn sample_normal_fan(k: &ConeModel, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::invalid("normal sampling needs n >= 1"));
    }
    let members = cone_members(k, MEMBER_CHECKS, seed.wrapping_add(101))?;
    let valid = |z: &Vec<f64>| (norm(z) - 1.0).abs() <= 1e-9 && members.iter().all(|m| dot(z, m) <= NORMAL_TOL);

    let raw: Vec<Vec<f64>> = match k.kind() {
        ConeKind::Exponential => {
            let [a, b] = exponential::limit_normals();
            let curve = Halton::new(1, seed).map(|u| {
                let s = (std::f64::consts::PI * (u[0] - 0.5)).tan();
                exponential::curve_normal(s)
            });
            [a, b].into_iter().chain(curve.take(n.saturating_sub(2))).take(n).collect()
        }
        ConeKind::Lifted(_) => {
            return Err(Error::Unsupported("normal sampling of a lifted cone".into()));
        }
        _ => {
            // x − P_K(x) is a normal of K at the origin; samples inside the
            // polar give interior (redundant) normals and are skipped
            let mut out = Vec::with_capacity(n);
            for u in SpherePoints::new(k.intrinsic_dim(), seed).take(20 * n) {
                let y = k.embed(&u);
                let p = k.project(&y)?.point;
                let r = sub(&y, &p);
                let nr = norm(&r);
                if nr > 1e-9 && norm(&p) > 1e-9 {
                    out.push(scale(&r, 1.0 / nr));
                    if out.len() == n {
                        break;
                    }
                }
            }
            out
        }
    };
    if raw.is_empty() {
        return Err(Error::DegenerateSampling("every sample projected to itself".into()));
    }
    let accepted = raw.into_iter().filter(|z| valid(z));
    let normals = dedup(accepted);
    if normals.is_empty() {
        return Err(Error::DegenerateSampling("no sampled normal passed validation".into()));
    }
    Ok(normals)
}

/// Lawson-Hanson nonnegative least squares `min ‖Σ u_j c_j − f‖, u ≥ 0` over
/// the given columns.
pub fn nnls(columns: &[Vec<f64>], f: &[f64]) -> Result<Vec<f64>> {
    let m = columns.len();
    let rows = f.len();
    let mut u = vec![0.0; m];
    let mut passive: Vec<usize> = Vec::new();
    let scale_c = columns.iter().map(|c| norm(c)).fold(0.0_f64, f64::max).max(1.0);
    let tol = 1e-13 * scale_c * (1.0 + norm(f)) * (m as f64).sqrt().max(1.0);
    let max_outer = 3 * m.max(rows) + 50;

    let residual = |u: &[f64], passive: &[usize]| -> Vec<f64> {
        let mut r = f.to_vec();
        for &j in passive {
            for (ri, ci) in r.iter_mut().zip(&columns[j]) {
                *ri -= u[j] * ci;
            }
        }
        r
    };

    let mut blocked = vec![false; m];
    for outer in 0..max_outer {
        let r = residual(&u, &passive);
        let mut best = None;
        let mut best_w = tol;
        for j in 0..m {
            if blocked[j] || passive.contains(&j) {
                continue;
            }
            let w = dot(&columns[j], &r);
            if w > best_w {
                best_w = w;
                best = Some(j);
            }
        }
        let Some(t) = best else {
            return Ok(u);
        };
        passive.push(t);

        loop {
            let cols: Vec<&[f64]> = passive.iter().map(|&j| columns[j].as_slice()).collect();
            let Some(s) = least_squares(&cols, f) else {
                // dependent column: leave it out for the rest of the solve
                passive.retain(|&j| j != t);
                blocked[t] = true;
                break;
            };
            if s.iter().all(|v| *v > 0.0) {
                for (k, &j) in passive.iter().enumerate() {
                    u[j] = s[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in passive.iter().enumerate() {
                if s[k] <= 0.0 {
                    let a = u[j] / (u[j] - s[k]);
                    alpha = alpha.min(a);
                }
            }
            for (k, &j) in passive.iter().enumerate() {
                u[j] += alpha * (s[k] - u[j]);
            }
            let before = passive.len();
            passive.retain(|&j| u[j] > 1e-15);
            for j in 0..m {
                if !passive.contains(&j) {
                    u[j] = 0.0;
                }
            }
            if passive.len() == before {
                // guard against stalling on round-off
                let (k, _) = passive
                    .iter()
                    .enumerate()
                    .min_by(|a, b| u[*a.1].total_cmp(&u[*b.1]))
                    .expect("nonempty");
                u[passive[k]] = 0.0;
                passive.remove(k);
            }
            if passive.is_empty() {
                break;
            }
        }
        if outer + 1 == max_outer {
            break;
        }
    }
    let r = residual(&u, &passive);
    Err(Error::NonConvergence {
        what: "nonnegative least squares",
        iterations: max_outer,
        residual: norm(&r),
    })
}

/// Least-distance program `min ‖x‖ s.t. ⟨g_j, x⟩ ≥ h_j`.
pub fn least_distance(g: &[Vec<f64>], h: &[f64]) -> Result<Vec<f64>> {
    let n = g.first().map_or(0, |v| v.len());
    let columns: Vec<Vec<f64>> = g
        .iter()
        .zip(h)
        .map(|(gj, hj)| {
            let mut c = gj.clone();
            c.push(*hj);
            c
        })
        .collect();
    let mut f = vec![0.0; n + 1];
    f[n] = 1.0;
    let u = nnls(&columns, &f)?;
    let mut r = vec![0.0; n + 1];
    for (uj, c) in u.iter().zip(&columns) {
        for (ri, ci) in r.iter_mut().zip(c) {
            *ri += uj * ci;
        }
    }
    r[n] -= 1.0;
    if norm(&r) < 1e-12 {
        return Err(Error::Infeasible("halfspace system has no solution".into()));
    }
    let x: Vec<f64> = r[..n].iter().map(|v| -v / r[n]).collect();
    let support: Vec<usize> = (0..u.len()).filter(|&j| u[j] > 0.0).collect();
    Ok(polish_ldp(g, h, &support, x))
}

/// Worst constraint violation `max_j h_j − ⟨g_j, x⟩`.
fn ldp_violation(g: &[Vec<f64>], h: &[f64], x: &[f64]) -> f64 {
    g.iter().zip(h).map(|(gj, hj)| hj - dot(gj, x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Recovering `x` from the NNLS residual divides by a component of order
/// `1/‖x‖²`, which costs digits when `x` is long. Re-solving the KKT system
/// `x = Σ ν_a g_a`, `⟨g_b, x⟩ = h_b` on the support restores them; the
/// polished point is kept only if it is dual feasible and no less feasible.
fn polish_ldp(g: &[Vec<f64>], h: &[f64], support: &[usize], x: Vec<f64>) -> Vec<f64> {
    let k = support.len();
    if k == 0 {
        return x;
    }
    let mut gram = vec![0.0; k * k];
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            gram[a * k + b] = dot(&g[i], &g[j]);
        }
    }
    let rhs: Vec<f64> = support.iter().map(|&j| h[j]).collect();
    let Some(nu) = solve_dense(&gram, &rhs, k, 1e-14) else {
        return x;
    };
    if nu.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return x;
    }
    let mut y = vec![0.0; x.len()];
    for (v, &j) in nu.iter().zip(support) {
        for (yi, gi) in y.iter_mut().zip(&g[j]) {
            *yi += v * gi;
        }
    }
    if ldp_violation(g, h, &y) <= ldp_violation(g, h, &x).max(0.0) {
        y
    } else {
        x
    }
}

/// Normals added to the working set per round of constraint generation.
const WORKING_BATCH: usize = 12;

/// Least-distance projection of `z` onto `{x : ⟨ζ_j, x⟩ ≤ −1, j ∈ pool}` by
/// constraint generation from the `start` working set. Returns the point and
/// the final working set.
fn generate(normals: &[Vec<f64>], pool: &[usize], z: &[f64], start: Vec<usize>) -> Result<(Vec<f64>, Vec<usize>)> {
    let tol = 1e-12 * (1.0 + norm(z));
    let mut in_set = vec![false; normals.len()];
    let most_violated = |x: &[f64], in_set: &[bool]| -> Vec<usize> {
        let mut idx: Vec<(f64, usize)> = pool
            .iter()
            .filter(|&&j| !in_set[j])
            .map(|&j| (dot(&normals[j], x) + 1.0, j))
            .filter(|(v, _)| *v > tol)
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        if idx.len() > WORKING_BATCH {
            idx.select_nth_unstable_by(WORKING_BATCH, order);
            idx.truncate(WORKING_BATCH);
        }
        idx.sort_by(order);
        idx.into_iter().map(|(_, j)| j).collect()
    };

    let solve = |working: &[usize]| -> Result<Vec<f64>> {
        let g: Vec<Vec<f64>> = working.iter().map(|&j| scale(&normals[j], -1.0)).collect();
        let h: Vec<f64> = working.iter().map(|&j| 1.0 + dot(&normals[j], z)).collect();
        let y = least_distance(&g, &h)?;
        Ok(z.iter().zip(&y).map(|(a, b)| a + b).collect())
    };

    let mut working = start;
    for &j in &working {
        in_set[j] = true;
    }
    let mut x = if working.is_empty() { z.to_vec() } else { solve(&working)? };
    loop {
        let extra = most_violated(&x, &in_set);
        if extra.is_empty() {
            return Ok((x, working));
        }
        for &j in &extra {
            in_set[j] = true;
        }
        working.extend(extra);
        x = solve(&working)?;
    }
}

/// Projection onto `{x : ⟨ζ_j, x⟩ ≤ −1 ∀j}`.
///
/// Solves the least-distance program on a working set of the most violated
/// normals and adds violated ones until every constraint holds, so the cost
/// scales with the few active facets rather than with the sample size.
pub fn polyhedral_project(normals: &[Vec<f64>], z: &[f64]) -> Result<Vec<f64>> {
    let pool: Vec<usize> = (0..normals.len()).collect();
    Ok(generate(normals, &pool, z, Vec::new())?.0)
}

/// Spacing of the coarse normals used to warm-start projections.
pub const COARSE_RESOLUTION: f64 = 2e-3;

/// `{x : ⟨ζ_j, x⟩ ≤ −1}` for many sampled normals.
///
/// Projections first solve on a coarse subset, then refine over the fine
/// normals merged into the coarse working set, then verify against all.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    normals: Vec<Vec<f64>>,
    coarse: Vec<usize>,
    /// Fine normals merged into each normal (empty unless coarse).
    cluster: Vec<Vec<usize>>,
}

impl Polyhedron {
    pub fn new(normals: Vec<Vec<f64>>) -> Self {
        let (coarse, owner) = thin_with_owner(&normals, COARSE_RESOLUTION);
        let mut cluster = vec![Vec::new(); normals.len()];
        for (j, o) in owner.into_iter().enumerate() {
            cluster[o].push(j);
        }
        Polyhedron {
            normals,
            coarse,
            cluster,
        }
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normals.iter().all(|z| dot(z, x) <= -1.0 + tol)
    }

    /// Fine normals that may be violated at `x`: each lies within
    /// [`COARSE_RESOLUTION`] of its coarse owner, so a cluster is safe when
    /// `⟨ζ_c, x⟩ + 1 + resolution·‖x‖ ≤ 0`.
    fn suspects(&self, x: &[f64], tol: f64) -> Vec<usize> {
        let margin = COARSE_RESOLUTION * norm(x);
        self.coarse
            .iter()
            .filter(|&&c| dot(&self.normals[c], x) + 1.0 + margin > tol)
            .flat_map(|&c| self.cluster[c].iter().copied())
            .collect()
    }

    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        let tol = 1e-12 * (1.0 + norm(z));
        let (_, mut working) = generate(&self.normals, &self.coarse, z, Vec::new())?;
        loop {
            let local: Vec<usize> = working.iter().flat_map(|&j| self.cluster[j].iter().copied()).collect();
            let (x, w) = generate(&self.normals, &local, z, working)?;
            let before = w.len();
            let (x, w) = generate(&self.normals, &self.suspects(&x, tol), z, w)?;
            if w.len() == before {
                return Ok(x);
            }
            working = w;
        }
    }
}

pub const CENTER_TOL: f64 = 1e-6;

/// Min-norm point of the sampled outer approximation of the core.
pub fn estimate_core(k: &ConeModel, n: usize, seed: u64) -> Result<CoreEstimate> {
    let normals = sample_normal_fan(k, n, seed)?;
    let g: Vec<Vec<f64>> = normals.iter().map(|z| scale(z, -1.0)).collect();
    let h = vec![1.0; normals.len()];
    let center = least_distance(&g, &h)?;
    let residual = normals.iter().map(|z| dot(z, &center) + 1.0).fold(f64::NEG_INFINITY, f64::max);
    if residual > CENTER_TOL {
        return Err(Error::NonConvergence {
            what: "core center",
            iterations: normals.len(),
            residual,
        });
    }
    Ok(CoreEstimate {
        cone: Some(k.clone()),
        cone_name: k.name().to_string(),
        width_estimate: norm(&center) - 1.0,
        center_estimate: center,
        normals,
        n_samples: n,
        seed,
        residual,
    })
}

pub const PROBE_TOL: f64 = 1e-4;

/// Tests `C_K = x_K + K` at sampling resolution: points of `x_K + K` must
/// satisfy the sampled core halfspaces, and projections onto the sampled core
/// must lie in `x_K + K`.
pub fn uniqueness_probe(e: &CoreEstimate, samples: usize) -> Result<bool> {
    let k = e.cone();
    let c = &e.center_estimate;
    let radii = [0.25, 1.0, 2.0];
    for (i, u) in SpherePoints::new(k.intrinsic_dim(), e.seed ^ 0x5eed).take(samples).enumerate() {
        let r = radii[i % radii.len()];
        let u = scale(&k.embed(&u), r);

        let member = k.project(&u)?.point;
        let x: Vec<f64> = c.iter().zip(&member).map(|(a, b)| a + b).collect();
        if e.normals.iter().any(|z| dot(z, &x) > -1.0 + PROBE_TOL) {
            return Ok(false);
        }

        let y: Vec<f64> = c.iter().zip(&u).map(|(a, b)| a + b).collect();
        let p = polyhedral_project(&e.normals, &y)?;
        let shifted = sub(&p, c);
        let back = k.project(&shifted)?.point;
        if dist(&shifted, &back) > PROBE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_distance_simple() {
        // x1 ≥ 1, x2 ≥ 2 → (1, 2)
        let g = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let x = least_distance(&g, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        // x1 + x2 ≥ 2 → (1, 1)
        let x = least_distance(&[vec![1.0, 1.0]], &[2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        // x ≥ 1 and −x ≥ 1 is infeasible
        assert!(matches!(
            least_distance(&[vec![1.0], vec![-1.0]], &[1.0, 1.0]),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn nnls_matches_unconstrained_when_positive() {
        let cols = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let u = nnls(&cols, &[2.0, 3.0, 1.0]).unwrap();
        assert_eq!(u, vec![2.0, 3.0]);
        let u = nnls(&cols, &[-2.0, 3.0, 1.0]).unwrap();
        assert_eq!(u, vec![0.0, 3.0]);
    }

    #[test]
    fn orthant_normals_cluster_on_axes() {
        let k = ConeModel::orthant(2).unwrap();
        let normals = sample_normal_fan(&k, 500, 3).unwrap();
        for z in &normals {
            assert!(z.iter().all(|v| *v <= 0.0));
        }
        let on_axis = normals.iter().filter(|z| z.contains(&0.0)).count();
        assert!(on_axis >= 2);
    }

    #[test]
    fn soc_normals_have_expected_shape() {
        let k = ConeModel::second_order(2).unwrap();
        for z in sample_normal_fan(&k, 1000, 1).unwrap() {
            assert!((z[2] + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            assert!((norm(&z[..2]) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn polyhedral_projection_of_orthant_core() {
        let normals = vec![vec![-1.0, 0.0], vec![0.0, -1.0]];
        let p = polyhedral_project(&normals, &[0.0, 3.0]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] - 3.0).abs() < 1e-12);
    }
}
