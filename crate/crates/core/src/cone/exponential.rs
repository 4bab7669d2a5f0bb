//! Exponential cone `cl{(x,y,z) : y > 0, z ≥ y e^{x/y}}`.
//!
//! There is no closed-form projection; we search the boundary rays
//! `(t, 1, e^t)` and the face `{x ≤ 0, y = 0, z ≥ 0}` numerically.

use crate::linalg::{dot, norm, norm_sq, scale};
use crate::sampling::Halton;

/// Below this `y` the point is treated as lying on the `y = 0` face.
pub const BRANCH_Y: f64 = 1e-12;
pub const MEMBERSHIP_TOL: f64 = 1e-6;

pub fn contains(v: &[f64], tol: f64) -> bool {
    let (x, y, z) = (v[0], v[1], v[2]);
    let slack = tol * (1.0 + norm(v));
    if y > BRANCH_Y {
        // y e^{x/y} ≤ z, compared without overflow
        let lhs = y * (x / y).min(700.0).exp();
        lhs <= z + slack
    } else {
        y >= -slack && x <= slack && z >= -slack
    }
}

/// Membership in the dual cone `{u < 0, −u e^{v/u} ≤ e·w} ∪ {u = 0, v, w ≥ 0}`.
pub fn dual_contains(v: &[f64], tol: f64) -> bool {
    let (u, s, w) = (v[0], v[1], v[2]);
    let slack = tol * (1.0 + norm(v));
    if u < -BRANCH_Y {
        -u * (s / u).min(700.0).exp() <= std::f64::consts::E * w + slack
    } else {
        u <= slack && s >= -slack && w >= -slack
    }
}

/// Membership in the polar cone `−K*`.
pub fn polar_contains(v: &[f64], tol: f64) -> bool {
    dual_contains(&[-v[0], -v[1], -v[2]], tol)
}

fn unit_ray(t: f64) -> [f64; 3] {
    let e = t.exp();
    let n = (t * t + 1.0 + e * e).sqrt();
    [t / n, 1.0 / n, e / n]
}

const T_MIN: f64 = -40.0;
const T_MAX: f64 = 40.0;
const GRID: usize = 801;

/// Approximate Euclidean projection onto the cone.
pub fn project(v: &[f64]) -> Vec<f64> {
    if contains(v, 1e-14) {
        return v.to_vec();
    }
    if polar_contains(v, 1e-14) {
        return vec![0.0; 3];
    }
    let face = [v[0].min(0.0), 0.0, v[2].max(0.0)];
    let face_d = norm_sq(&[v[0] - face[0], v[1] - face[1], v[2] - face[2]]);

    let s = |t: f64| dot(&unit_ray(t), v);
    let h = (T_MAX - T_MIN) / (GRID - 1) as f64;
    let mut t_best = T_MIN;
    let mut s_best = f64::NEG_INFINITY;
    for i in 0..GRID {
        let t = T_MIN + h * i as f64;
        let val = s(t);
        if val > s_best {
            s_best = val;
            t_best = t;
        }
    }
    // golden-section refinement on the bracketing cell pair
    let (mut a, mut b) = (t_best - h, t_best + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (s(c), s(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = s(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = s(d);
        }
    }
    let t = 0.5 * (a + b);
    let proj = s(t);
    if proj > 0.0 && norm_sq(v) - proj * proj < face_d {
        scale(&unit_ray(t), proj)
    } else {
        face.to_vec()
    }
}

/// Unit polar normal on the curved part, `(1, −s, −e^{−s−1})/‖·‖`.
pub fn curve_normal(s: f64) -> Vec<f64> {
    let w = (-s - 1.0).min(700.0).exp();
    // scale by the largest entry first; ‖v‖² overflows for s ≲ −350
    let m = 1f64.max(s.abs()).max(w);
    let v = [1.0 / m, -s / m, -w / m];
    let n = norm(&v);
    v.iter().map(|x| x / n).collect()
}

/// The two limiting normals of the curve.
pub fn limit_normals() -> [Vec<f64>; 2] {
    [vec![0.0, -1.0, 0.0], vec![0.0, 0.0, -1.0]]
}

/// Deterministic unit-norm members of the cone, from both branches.
pub fn sample_members(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for (i, u) in Halton::new(3, seed).take(n).enumerate() {
        let p = if i % 5 == 4 {
            vec![-u[0], 0.0, u[1]]
        } else {
            let y = 0.02 + 3.0 * u[0];
            let r = -12.0 + 16.0 * u[1];
            let z = y * r.exp() * (1.0 + 2.0 * u[2] * u[2]);
            vec![r * y, y, z]
        };
        let n = norm(&p);
        if n > 0.0 {
            out.push(scale(&p, 1.0 / n));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_branches() {
        assert!(contains(&[0.0, 1.0, 1.0], 0.0));
        assert!(!contains(&[0.0, 1.0, 0.99], 0.0));
        assert!(contains(&[-1.0, 0.0, 0.0], 0.0));
        assert!(!contains(&[1.0, 0.0, 5.0], 1e-6));
        assert!(contains(&[0.0; 3], 0.0));
    }

    #[test]
    fn curve_normals_are_polar() {
        let members = sample_members(500, 3);
        for s in [-1e6, -700.0, -30.0, -2.0, 0.0, 0.7, 5.0, 40.0, 1e6] {
            let z = curve_normal(s);
            assert!((norm(&z) - 1.0).abs() < 1e-12);
            assert!(polar_contains(&z, 1e-9));
            for m in &members {
                assert!(dot(&z, m) <= 1e-8);
            }
        }
    }

    #[test]
    fn projection_satisfies_optimality() {
        let points = [
            [1.0, 1.0, 1.0],
            [2.0, -1.0, 0.5],
            [-1.0, -1.0, -1.0],
            [0.5, 0.2, -3.0],
            [-2.0, 0.5, 0.1],
        ];
        for v in points {
            let p = project(&v);
            assert!(contains(&p, 1e-9));
            let r: Vec<f64> = v.iter().zip(&p).map(|(a, b)| a - b).collect();
            // residual is polar and orthogonal to the projection
            assert!(polar_contains(&r, 1e-6), "{v:?} -> {p:?}");
            assert!(dot(&r, &p).abs() < 1e-6 * (1.0 + norm(&v)));
        }
    }
}
