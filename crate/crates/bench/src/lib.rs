//! Shared fixtures for the criterion benches.

use conesmooth::sampling::BallPoints;
use conesmooth::{ConeModel, SmoothingSpec, SublinearFn, Variant};

/// Deterministic evaluation points in `B(0, radius)`.
pub fn points(dim: usize, radius: f64, n: usize) -> Vec<Vec<f64>> {
    BallPoints::new(dim, radius, 17).take(n).collect()
}

pub fn max_smoothing(d: usize, variant: Variant) -> SmoothingSpec {
    let f = SublinearFn::max(d).expect("d >= 1");
    SmoothingSpec::for_function(&f, variant, 1.0).expect("beta > 0")
}

/// A random-looking polytope support function with `m` vertices in `ℝ^d`.
/// Its core is computed numerically, so the maximal smoothings go through
/// the simplex QP.
pub fn polytope(d: usize, m: usize) -> SublinearFn {
    let verts = points(d, 1.0, m);
    SublinearFn::polytope(verts).expect("nonempty vertex set")
}

pub fn cones() -> Vec<(&'static str, ConeModel)> {
    vec![
        ("orthant-8", ConeModel::orthant(8).unwrap()),
        ("soc-8", ConeModel::second_order(8).unwrap()),
        ("psd-4", ConeModel::psd(4).unwrap()),
        ("exp", ConeModel::exponential()),
    ]
}
