//! Plot data: the five two-norm candidates and exponential-cone point clouds.

use std::fmt::Write as _;

use crate::cone::{cone_core, ray_boundary, ConeModel, ConicCore, ConvexBody, SmoothedSet};
use crate::error::{Error, Result};
use crate::function::Variant;
use crate::linalg::{add, norm, scale, sub};
use crate::numeric_core::Polyhedron;
use crate::sampling::SpherePoints;

/// Every float in emitted CSV uses this format (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Huber function, the Moreau envelope of `‖·‖`.
pub fn two_norm_f1(r: f64) -> f64 {
    if r <= 1.0 {
        0.5 * r * r
    } else {
        r - 0.5
    }
}

pub fn two_norm_f2(r: f64) -> f64 {
    two_norm_f1(r) + 0.25
}

/// Lower spherical cap, glued to a translate of the norm at `‖x‖ = 2`.
pub fn two_norm_f3(r: f64) -> f64 {
    let s2 = 2f64.sqrt();
    if r <= 2.0 {
        2.0 * s2 - (8.0 - r * r).sqrt()
    } else {
        r - 2.0 * (2.0 - s2)
    }
}

pub fn two_norm_f4(r: f64) -> f64 {
    two_norm_f3(r) + 6.0 * 2f64.sqrt() - 8.0
}

pub fn two_norm_f5(r: f64) -> f64 {
    (1.0 + r * r).sqrt() - 1.0
}

/// `sup |f_i − ‖·‖|` for the five candidates.
pub fn two_norm_distances() -> [f64; 5] {
    let s2 = 2f64.sqrt();
    [0.5, 0.25, 2.0 * (2.0 - s2), s2 * (6.0 * s2 - 8.0), 1.0]
}

/// Rows `x1, ‖x‖, f1..f5` along the slice `x = (x1, 0)`, `x1 ∈ [−lim, lim]`.
pub fn two_norm_csv(lim: f64, n: usize) -> Result<String> {
    if !(lim.is_finite() && lim > 0.0) || n < 2 {
        return Err(Error::invalid("need lim > 0 and at least 2 points"));
    }
    let mut s = String::from("x1,norm,f1,f2,f3,f4,f5\n");
    for i in 0..n {
        let t = -lim + 2.0 * lim * i as f64 / (n - 1) as f64;
        let r = t.abs();
        let vals = [
            t,
            r,
            two_norm_f1(r),
            two_norm_f2(r),
            two_norm_f3(r),
            two_norm_f4(r),
            two_norm_f5(r),
        ];
        let row: Vec<String> = vals.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(s, "{}", row.join(",")).expect("write to string");
    }
    Ok(s)
}

/// `shift + K`.
struct Translated<'a> {
    cone: &'a ConeModel,
    shift: Vec<f64>,
}

impl ConvexBody for Translated<'_> {
    fn dim(&self) -> usize {
        self.cone.ambient_dim()
    }
    fn interior_point(&self) -> Vec<f64> {
        add(&self.shift, &ConvexBody::interior_point(self.cone))
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.cone.contains(&sub(x, &self.shift))
    }
    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(add(&self.shift, &self.cone.project(&sub(x, &self.shift))?.point))
    }
}

/// The core `{x : ⟨ζ, x⟩ ≤ −1}` from sampled normals.
struct CoreBody<'a> {
    core: &'a ConicCore,
    poly: Polyhedron,
}

impl ConvexBody for CoreBody<'_> {
    fn dim(&self) -> usize {
        self.core.cone.ambient_dim()
    }
    fn interior_point(&self) -> Vec<f64> {
        scale(&self.core.center, 2.0)
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.poly.contains(x, 1e-9)
    }
    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.poly.project(x)
    }
}

fn cloud(body: &dyn ConvexBody, n: usize, radius: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let p = body.interior_point();
    let mut out = Vec::with_capacity(n);
    let mut dirs = SpherePoints::new(body.sample_dim(), seed);
    let mut tries = 0;
    while out.len() < n && tries < 50 * n.max(1) {
        tries += 1;
        let u = body.embed(&dirs.next().expect("infinite sequence"));
        if let Some(t) = ray_boundary(body, &p, &u, 2.0 * radius)? {
            let x = add(&p, &scale(&u, t));
            if norm(&x) <= radius {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// CSV `set,x,y,z` of boundary points of `K`, `x_K + K`, `C_K`, `s_in` and
/// `S_in` (unit smoothness) for the exponential cone, `n` rays per set.
pub fn exp_cone_csv(n: usize, radius: f64, seed: u64) -> Result<String> {
    if n == 0 || !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid("need n >= 1 and radius > 0"));
    }
    let k = ConeModel::exponential();
    let core = cone_core(&k)?;
    let normals = core
        .normals
        .as_deref()
        .ok_or_else(|| Error::Unsupported("exponential core has no sampled normals".into()))?;
    let shifted = Translated {
        cone: &k,
        shift: core.center.clone(),
    };
    let core_body = CoreBody {
        core: &core,
        poly: Polyhedron::new(normals.to_vec()),
    };
    let s_in = SmoothedSet::new(core.clone(), Variant::MinInner, 1.0)?;
    let big_s_in = SmoothedSet::new(core.clone(), Variant::MaxInner, 1.0)?;
    let sets: [(&str, &dyn ConvexBody); 5] = [
        ("K", &k),
        ("xK+K", &shifted),
        ("C_K", &core_body),
        ("s_in", &s_in),
        ("S_in", &big_s_in),
    ];
    let mut s = String::from("set,x,y,z\n");
    for (name, body) in sets {
        for p in cloud(body, n, radius, seed)? {
            writeln!(s, "{name},{},{},{}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2])).expect("write to string");
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_distances() {
        let fs: [fn(f64) -> f64; 5] = [two_norm_f1, two_norm_f2, two_norm_f3, two_norm_f4, two_norm_f5];
        let want = two_norm_distances();
        for (f, d) in fs.iter().zip(want) {
            let got = (0..=200_000)
                .map(|i| {
                    let r = i as f64 * 1e-3;
                    (f(r) - r).abs()
                })
                .fold(0.0, f64::max);
            // f5 only approaches its distance as r → ∞
            let tol = if d == 1.0 { 5e-3 } else { 1e-12 };
            assert!((got - d).abs() < tol, "{got} vs {d}");
        }
    }

    #[test]
    fn pieces_meet() {
        assert!((two_norm_f1(1.0 - 1e-12) - two_norm_f1(1.0 + 1e-12)).abs() < 1e-9);
        assert!((two_norm_f3(2.0 - 1e-12) - two_norm_f3(2.0 + 1e-12)).abs() < 1e-9);
    }

    #[test]
    fn csv_shape() {
        let s = two_norm_csv(3.0, 7).unwrap();
        assert_eq!(s.lines().count(), 8);
        assert!(s.lines().nth(4).unwrap().starts_with("0.0000000000000000e0,"));
    }
}
