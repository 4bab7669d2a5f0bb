//! Dense vector helpers and a cyclic Jacobi eigensolver for small symmetric
//! matrices.
//!
//! Symmetric matrices are stored as full row-major `d × d` slices so that the
//! trace inner product coincides with the Euclidean inner product of the
//! flattened arrays.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Returns `x / ‖x‖`, or `None` when `‖x‖ ≤ tiny`.
pub fn normalized(x: &[f64], tiny: f64) -> Option<Vec<f64>> {
    let n = norm(x);
    (n > tiny).then(|| scale(x, 1.0 / n))
}

/// Projection onto the closed ball `B(0, radius)`.
pub fn project_ball(x: &[f64], radius: f64) -> Vec<f64> {
    let n = norm(x);
    if n <= radius {
        x.to_vec()
    } else {
        scale(x, radius / n)
    }
}

pub fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

pub fn symmetrize(a: &mut [f64], d: usize) {
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (a[i * d + j] + a[j * d + i]);
            a[i * d + j] = v;
            a[j * d + i] = v;
        }
    }
}

pub fn is_symmetric(a: &[f64], d: usize, tol: f64) -> bool {
    let scale = 1.0 + a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (0..d).all(|i| ((i + 1)..d).all(|j| (a[i * d + j] - a[j * d + i]).abs() <= tol * scale))
}

/// Order of a square matrix stored as a flat slice of length `d²`.
pub fn matrix_order(len: usize) -> Option<usize> {
    let d = (len as f64).sqrt().round() as usize;
    (d * d == len).then_some(d)
}

/// Eigen-decomposition `A = Σ λ_i v_i v_iᵀ` with eigenvalues sorted in
/// descending order. `vectors` holds the eigenvectors as rows.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymmetricEigen {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// Rebuilds `Σ μ_i v_i v_iᵀ` for the given spectrum `mu`.
    pub fn recompose(&self, mu: &[f64]) -> Vec<f64> {
        let d = self.order();
        let mut out = vec![0.0; d * d];
        for (m, v) in mu.iter().zip(&self.vectors) {
            if *m == 0.0 {
                continue;
            }
            for i in 0..d {
                let mvi = m * v[i];
                for j in 0..d {
                    out[i * d + j] += mvi * v[j];
                }
            }
        }
        out
    }
}

pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver for a symmetric `d × d` matrix.
///
/// Sweeps until the off-diagonal Frobenius norm falls below
/// `1e-12 · max(1, ‖A‖_F)`.
pub fn jacobi_eigen(a: &[f64], d: usize) -> Result<SymmetricEigen> {
    if a.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            got: a.len(),
        });
    }
    let mut m = a.to_vec();
    symmetrize(&mut m, d);
    let mut v = identity(d);
    let fro = norm(&m).max(1.0);

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[i * d + j] * m[i * d + j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&m) <= JACOBI_TOL * fro;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p * d + q];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[p * d + p];
                let aqq = m[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..d {
                    let mkp = m[k * d + p];
                    let mkq = m[k * d + q];
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[p * d + k];
                    let mqk = m[q * d + k];
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                m[p * d + q] = 0.0;
                m[q * d + p] = 0.0;

                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off(&m) <= JACOBI_TOL * fro;
    }
    if !converged {
        return Err(Error::EigenNonConvergence { sweeps });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[j * d + j].total_cmp(&m[i * d + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * d + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..d).map(|k| v[k * d + i]).collect())
        .collect();
    Ok(SymmetricEigen { values, vectors })
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(a: &[f64], d: usize) -> Result<f64> {
    Ok(jacobi_eigen(a, d)?.values[0])
}

/// Solves the square system `A x = b` (row-major `A`) by Gaussian elimination
/// with partial pivoting. Returns `None` when a pivot falls below `tiny`.
pub fn solve_dense(a: &[f64], b: &[f64], n: usize, tiny: f64) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() <= tiny {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        for row in (col + 1)..n {
            let f = m[row * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..n {
            s -= m[row * n + k] * x[k];
        }
        x[row] = s / m[row * n + row];
    }
    Some(x)
}

/// Least-squares solution of `min ‖Σ_j z_j c_j − f‖` over the given columns,
/// by Householder QR. Returns `None` if the columns are numerically dependent.
pub fn least_squares(columns: &[&[f64]], f: &[f64]) -> Option<Vec<f64>> {
    let k = columns.len();
    let m = f.len();
    if k == 0 {
        return Some(Vec::new());
    }
    if k > m {
        return None;
    }
    // column-major working copy
    let mut a: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let mut rhs = f.to_vec();
    let scale = a.iter().map(|c| norm(c)).fold(0.0_f64, f64::max).max(1e-300);

    for j in 0..k {
        let alpha = {
            let tail = &a[j][j..];
            let n = norm(tail);
            if n <= 1e-13 * scale {
                return None;
            }
            if a[j][j] > 0.0 {
                -n
            } else {
                n
            }
        };
        let mut vvec: Vec<f64> = a[j][j..].to_vec();
        vvec[0] -= alpha;
        let vn = norm_sq(&vvec);
        if vn == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(j) {
            let s = 2.0 * dot(&vvec, &col[j..]) / vn;
            for (ci, vi) in col[j..].iter_mut().zip(&vvec) {
                *ci -= s * vi;
            }
        }
        let s = 2.0 * dot(&vvec, &rhs[j..]) / vn;
        for (ri, vi) in rhs[j..].iter_mut().zip(&vvec) {
            *ri -= s * vi;
        }
    }
    let mut z = vec![0.0; k];
    for row in (0..k).rev() {
        let mut s = rhs[row];
        for col in (row + 1)..k {
            s -= a[col][row] * z[col];
        }
        z[row] = s / a[row][row];
    }
    Some(z)
}

/// Power iteration estimate of the spectral norm of a row-major `n × d`
/// matrix. Converges from below; callers needing an upper bound should pad.
pub fn spectral_norm(a: &[f64], n: usize, d: usize, iterations: usize, tol: f64) -> f64 {
    if n == 0 || d == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut est = 0.0;
    for _ in 0..iterations {
        let ax: Vec<f64> = (0..n).map(|r| dot(&a[r * d..(r + 1) * d], &x)).collect();
        let mut atax = vec![0.0; d];
        for r in 0..n {
            axpy(ax[r], &a[r * d..(r + 1) * d], &mut atax);
        }
        let nn = norm(&atax);
        if nn == 0.0 {
            return 0.0;
        }
        let new_est = nn.sqrt();
        x = scale(&atax, 1.0 / nn);
        if (new_est - est).abs() <= tol * new_est {
            est = new_est;
            break;
        }
        est = new_est;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_input() {
        let a = [3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        let e = jacobi_eigen(&a, 3).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, -1.0]);
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let a = [4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, -3.0];
        let e = jacobi_eigen(&a, 3).unwrap();
        let back = e.recompose(&e.values);
        for (x, y) in a.iter().zip(&back) {
            assert!((x - y).abs() < 1e-12);
        }
        for i in 0..3 {
            for j in 0..3 {
                let ip = dot(&e.vectors[i], &e.vectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_rejects_wrong_length() {
        assert!(matches!(
            jacobi_eigen(&[1.0, 2.0, 3.0], 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dense_solve_and_least_squares() {
        let a = [2.0, 1.0, 1.0, 3.0];
        let x = solve_dense(&a, &[3.0, 5.0], 2, 1e-14).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);

        let c0 = [1.0, 0.0, 1.0];
        let c1 = [0.0, 1.0, 1.0];
        let z = least_squares(&[&c0, &c1], &[1.0, 2.0, 3.0]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 2.0).abs() < 1e-12);
        assert!(least_squares(&[&c0, &c0], &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = [3.0, 0.0, 0.0, -5.0, 0.0, 0.0];
        let s = spectral_norm(&a, 3, 2, 500, 1e-14);
        assert!((s - 5.0).abs() < 1e-9);
    }
}
