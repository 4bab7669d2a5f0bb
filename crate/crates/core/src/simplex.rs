//! Projection onto the unit simplex and a small simplex-constrained QP solver.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, solve_dense};

/// Euclidean projection onto `{λ ≥ 0, Σλ = 1}` by the sort/threshold rule.
///
/// Returns the projection and the threshold `α` with `P_i = max(x_i − α, 0)`.
pub fn project_simplex_with_threshold(x: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..x.len()).collect();
    // stable: descending value, ascending index
    order.sort_by(|&i, &j| x[j].total_cmp(&x[i]).then(i.cmp(&j)));
    let mut cum = 0.0;
    let mut alpha = 0.0;
    for (k, &i) in order.iter().enumerate() {
        cum += x[i];
        let t = (cum - 1.0) / (k + 1) as f64;
        if k + 1 == order.len() || x[order[k + 1]] <= t {
            alpha = t;
            break;
        }
    }
    (x.iter().map(|v| (v - alpha).max(0.0)).collect(), alpha)
}

pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    project_simplex_with_threshold(x).0
}

/// `min ½ λᵀQλ − cᵀλ` over the unit simplex with `Q = VᵀV` for the columns
/// `V = [v_1 … v_m]`.
#[derive(Debug, Clone)]
pub struct SimplexQp<'a> {
    vertices: &'a [Vec<f64>],
    gram: Vec<f64>,
    lipschitz: f64,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub weights: Vec<f64>,
    /// `Σ λ_i v_i`
    pub combination: Vec<f64>,
    /// `½ λᵀQλ − cᵀλ`
    pub objective: f64,
    pub iterations: usize,
}

pub const QP_TOL: f64 = 1e-10;
const QP_MAX_ITER: usize = 200_000;

impl<'a> SimplexQp<'a> {
    pub fn new(vertices: &'a [Vec<f64>]) -> Self {
        let m = vertices.len();
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let g = dot(&vertices[i], &vertices[j]);
                gram[i * m + j] = g;
                gram[j * m + i] = g;
            }
        }
        let lipschitz = power_bound(&gram, m);
        SimplexQp {
            vertices,
            gram,
            lipschitz,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn grad(&self, lambda: &[f64], c: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| dot(&self.gram[i * m..(i + 1) * m], lambda) - c[i])
            .collect()
    }

    fn objective(&self, lambda: &[f64], c: &[f64]) -> f64 {
        let g = self.grad(lambda, c);
        // ½λᵀQλ − cᵀλ = ½λᵀ(Qλ − c) − ½cᵀλ
        0.5 * dot(lambda, &g) - 0.5 * dot(c, lambda)
    }

    /// Accelerated projected gradient with adaptive restart, followed by an
    /// exact solve of the KKT system on the detected support.
    pub fn solve(&self, c: &[f64]) -> Result<QpSolution> {
        let m = self.len();
        if m == 0 {
            return Err(Error::invalid("simplex QP with no vertices"));
        }
        if c.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: c.len(),
            });
        }
        let scale = 1.0 + c.iter().fold(0.0_f64, |a, v| a.max(v.abs())) + self.lipschitz;
        let step = if self.lipschitz > 0.0 {
            1.0 / self.lipschitz
        } else {
            1.0
        };

        let mut x = vec![1.0 / m as f64; m];
        let mut y = x.clone();
        let mut t = 1.0_f64;
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        while iterations < QP_MAX_ITER {
            iterations += 1;
            let g = self.grad(&y, c);
            let mut trial = y.clone();
            axpy(-step, &g, &mut trial);
            let next = project_simplex(&trial);

            // gradient mapping at x for the stopping rule
            let gx = self.grad(&next, c);
            let mut probe = next.clone();
            axpy(-step, &gx, &mut probe);
            let px = project_simplex(&probe);
            residual = next
                .iter()
                .zip(&px)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                / step;

            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let restart = dot(&g, &next.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>()) > 0.0;
            if restart {
                y = next.clone();
                t = 1.0;
            } else {
                let mom = (t - 1.0) / t_next;
                y = next
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| a + mom * (a - b))
                    .collect();
                t = t_next;
            }
            x = next;
            if residual <= QP_TOL * scale {
                break;
            }
        }
        if residual > QP_TOL * scale * 1e3 {
            return Err(Error::NonConvergence {
                what: "simplex QP",
                iterations,
                residual,
            });
        }

        let mut best = x;
        let mut best_obj = self.objective(&best, c);
        if let Some(polished) = self.polish(&best, c) {
            let obj = self.objective(&polished, c);
            if obj <= best_obj + 1e-14 * scale {
                best = polished;
                best_obj = obj;
            }
        }
        let dim = self.vertices[0].len();
        let mut combination = vec![0.0; dim];
        for (l, v) in best.iter().zip(self.vertices) {
            axpy(*l, v, &mut combination);
        }
        Ok(QpSolution {
            weights: best,
            combination,
            objective: best_obj,
            iterations,
        })
    }

    /// Solves `Q_SS λ_S + μ1 = c_S, Σλ_S = 1` on the support of `lambda`.
    fn polish(&self, lambda: &[f64], c: &[f64]) -> Option<Vec<f64>> {
        let m = self.len();
        let support: Vec<usize> = (0..m).filter(|&i| lambda[i] > 1e-9).collect();
        let k = support.len();
        if k == 0 {
            return None;
        }
        let n = k + 1;
        let mut a = vec![0.0; n * n];
        let mut rhs = vec![0.0; n];
        for (r, &i) in support.iter().enumerate() {
            for (s, &j) in support.iter().enumerate() {
                a[r * n + s] = self.gram[i * m + j];
            }
            a[r * n + k] = 1.0;
            a[k * n + r] = 1.0;
            rhs[r] = c[i];
        }
        rhs[k] = 1.0;
        let sol = solve_dense(&a, &rhs, n, 1e-13)?;
        if sol[..k].iter().any(|v| *v < -1e-12 || !v.is_finite()) {
            return None;
        }
        let mut out = vec![0.0; m];
        for (r, &i) in support.iter().enumerate() {
            out[i] = sol[r].max(0.0);
        }
        let s: f64 = out.iter().sum();
        out.iter_mut().for_each(|v| *v /= s);
        // KKT for the inactive coordinates: (Qλ − c)_i ≥ −μ
        let g = self.grad(&out, c);
        let mu = sol[k];
        let tol = 1e-9 * (1.0 + norm(c));
        if (0..m).any(|i| out[i] == 0.0 && g[i] + mu < -tol) {
            return None;
        }
        Some(out)
    }
}

/// Upper bound on `λ_max(Q)` for PSD `Q`: the smaller of the trace and the
/// Gershgorin radius. A power estimate from a fixed start can be zero when
/// that start is in the kernel (symmetric vertex sets sum to 0).
fn power_bound(q: &[f64], m: usize) -> f64 {
    let trace: f64 = (0..m).map(|i| q[i * m + i]).sum();
    let gersh = (0..m)
        .map(|i| q[i * m..(i + 1) * m].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    trace.min(gersh)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates every support set and solves the equality-constrained
    /// problem exactly; keeps the best feasible candidate.
    fn active_set_oracle(vertices: &[Vec<f64>], c: &[f64]) -> f64 {
        let m = vertices.len();
        let qp = SimplexQp::new(vertices);
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << m) {
            let support: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            let k = support.len();
            let n = k + 1;
            let mut a = vec![0.0; n * n];
            let mut rhs = vec![0.0; n];
            for (r, &i) in support.iter().enumerate() {
                for (s, &j) in support.iter().enumerate() {
                    a[r * n + s] = dot(&vertices[i], &vertices[j]);
                }
                a[r * n + k] = 1.0;
                a[k * n + r] = 1.0;
                rhs[r] = c[i];
            }
            rhs[k] = 1.0;
            if let Some(sol) = solve_dense(&a, &rhs, n, 1e-12) {
                if sol[..k].iter().all(|v| *v >= -1e-12) {
                    let mut l = vec![0.0; m];
                    for (r, &i) in support.iter().enumerate() {
                        l[i] = sol[r];
                    }
                    best = best.min(qp.objective(&l, c));
                }
            }
        }
        best
    }

    #[test]
    fn simplex_projection_examples() {
        let p = project_simplex(&[0.9, 0.4, -0.1]);
        assert!((p[0] - 0.75).abs() < 1e-15);
        assert!((p[1] - 0.25).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
        assert_eq!(project_simplex(&[1.0, 0.0]), vec![1.0, 0.0]);
        let (p, alpha) = project_simplex_with_threshold(&[0.0, 0.0]);
        assert_eq!(p, vec![0.5, 0.5]);
        assert_eq!(alpha, -0.5);
    }

    #[test]
    fn qp_matches_active_set_enumeration() {
        let vertices = vec![
            vec![1.0, 0.2],
            vec![-0.5, 1.0],
            vec![-0.7, -0.9],
            vec![0.3, -1.2],
            vec![2.0, 1.5],
        ];
        for c in [
            vec![0.0; 5],
            vec![1.0, -0.5, 0.25, 0.0, 2.0],
            vec![-3.0, 1.0, 1.0, 0.5, -1.0],
        ] {
            let qp = SimplexQp::new(&vertices);
            let sol = qp.solve(&c).unwrap();
            let oracle = active_set_oracle(&vertices, &c);
            assert!((sol.objective - oracle).abs() < 1e-10, "{} vs {}", sol.objective, oracle);
        }
    }

    #[test]
    fn qp_singleton_is_trivial() {
        let v = vec![vec![0.3, -0.4]];
        let sol = SimplexQp::new(&v).solve(&[1.0]).unwrap();
        assert_eq!(sol.weights, vec![1.0]);
        assert_eq!(sol.combination, vec![0.3, -0.4]);
    }
}
