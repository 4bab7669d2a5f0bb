//! Acceptance criteria, one line each. Runs every criterion on its own thread
//! and exits non-zero if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use conesmooth::verify::{fd_gradient_check, lipschitz_grad_estimate, run_suite, CheckOptions, Suite};
use conesmooth::{
    compute_core, cone_core, conic_lift, core_membership, estimate_core, uniqueness_probe, AffineMap, BoxSet,
    CompositeSmoothing, ConeModel, ConicCore, PlantedMinimax, SmoothingSpec, SublinearFn, Surrogate, Variant,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lib<T>(r: conesmooth::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn relu() -> Outcome {
    let f = SublinearFn::relu();
    let c = lib(compute_core(&f))?;
    ensure(
        c.center == vec![-0.5] && c.center_height == 0.0 && c.width == 0.125,
        format!("core {:?} {} {}", c.center, c.center_height, c.width),
    )?;
    let s = lib(SmoothingSpec::for_function(&f, Variant::MinGeneral, 1.0))?;
    let d = lib(s.estimate_distance(10.0, 64, 1))?;
    ensure((d - 1.0 / 16.0).abs() < 1e-9, format!("distance {d}"))?;
    Ok(format!("core (-1/2, 0, 1/8), distance {d:.12}"))
}

/// Inner `inf_z max(z) + ½ + ½‖y − z‖²` by a zooming grid over `z ∈ ℝ²`.
fn max2_envelope_oracle(y: [f64; 2]) -> f64 {
    let g = |z: [f64; 2]| z[0].max(z[1]) + 0.5 + 0.5 * ((y[0] - z[0]).powi(2) + (y[1] - z[1]).powi(2));
    let (mut c, mut h) = (y, 2.0);
    let mut best = g(c);
    for _ in 0..80 {
        let mut next = c;
        for i in -10..=10 {
            for j in -10..=10 {
                let z = [c[0] + h * i as f64 / 10.0, c[1] + h * j as f64 / 10.0];
                let v = g(z);
                if v < best {
                    best = v;
                    next = z;
                }
            }
        }
        c = next;
        h *= 0.6;
    }
    best
}

fn max_family() -> Outcome {
    let mut notes = Vec::new();
    for d in [2usize, 5, 50] {
        let f = lib(SublinearFn::max(d))?;
        for beta in [0.5, 1.0, 4.0] {
            let s = lib(SmoothingSpec::for_function(&f, Variant::MinGeneral, beta))?;
            let want = 0.25 * (1.0 - 1.0 / d as f64) / beta;
            let got = lib(s.estimate_distance(s.default_radius(), 32, 3))?;
            ensure((got - want).abs() < 1e-6, format!("d={d} beta={beta}: gap {got} vs {want}"))?;
        }
        notes.push(format!("d={d} ok"));
    }
    let f = lib(SublinearFn::max(2))?;
    let w = 0.25;
    let mut worst = 0.0_f64;
    for beta in [0.5, 1.0, 4.0] {
        let s = lib(SmoothingSpec::for_function(&f, Variant::MinGeneral, beta))?;
        for x in [[0.0, 0.0], [0.3, -0.2], [-1.0, 2.0], [0.7, 0.7], [2.5, -3.0], [-0.05, 0.1]] {
            let oracle = (max2_envelope_oracle([beta * x[0], beta * x[1]]) - w / 2.0) / beta;
            worst = worst.max((lib(s.eval(&x))? - oracle).abs());
        }
    }
    ensure(worst < 1e-5, format!("grid oracle mismatch {worst:e}"))?;
    Ok(format!("{}; grid oracle d=2 max err {worst:.2e}", notes.join(", ")))
}

fn norms() -> Outcome {
    let e = lib(SmoothingSpec::for_function(&lib(SublinearFn::euclidean_norm(2))?, Variant::MinGeneral, 1.0))?;
    let v0 = lib(e.eval(&[0.0, 0.0]))?;
    ensure((v0 - 0.25).abs() < 1e-15, format!("euclidean value at 0: {v0}"))?;
    let o = lib(SmoothingSpec::for_function(&lib(SublinearFn::one_norm(3))?, Variant::MinOuter, 1.0))?;
    let gap = lib(o.estimate_distance(o.default_radius(), 64, 5))?;
    ensure((gap - 1.5).abs() < 1e-6, format!("one-norm outer gap {gap}"))?;
    ensure(o.distance_bound() == 1.5, format!("certified {}", o.distance_bound()))?;
    Ok(format!("euclidean f(0) = {v0}, one-norm outer gap {gap:.9} (d/2 = 1.5)"))
}

fn cones() -> Outcome {
    let table = [
        ("orthant d=3", lib(ConeModel::orthant(3))?, 3f64.sqrt() - 1.0),
        ("soc d=2", lib(ConeModel::second_order(2))?, 2f64.sqrt() - 1.0),
        ("psd d=2", lib(ConeModel::psd(2))?, 2f64.sqrt() - 1.0),
    ];
    let mut worst = 0.0_f64;
    for (name, k, w) in &table {
        let c = lib(cone_core(k))?;
        ensure(c.width == *w, format!("{name}: closed form {} vs {w}", c.width))?;
        let e = lib(estimate_core(k, 5000, 7))?;
        let err = (e.width_estimate - w).abs().max(
            e.center_estimate
                .iter()
                .zip(&c.center)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
        ensure(err < 1e-3, format!("{name}: numeric core off by {err:e}"))?;
        worst = worst.max(err);
    }
    let e = lib(estimate_core(&ConeModel::exponential(), 20_000, 7))?;
    let want = [-1.11957, 1.0, 1.71471];
    let cerr = e.center_estimate.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let werr = (e.width_estimate - 1.27897).abs();
    ensure(cerr < 1e-2 && werr < 1e-2, format!("exp center {:?} width {}", e.center_estimate, e.width_estimate))?;
    Ok(format!(
        "closed forms exact, numeric max err {worst:.1e}; exp center ({:.5}, {:.5}, {:.5}) width {:.5}",
        e.center_estimate[0], e.center_estimate[1], e.center_estimate[2], e.width_estimate
    ))
}

fn uniqueness() -> Outcome {
    let cases = [
        ("orthant", lib(ConeModel::orthant(3))?, 5000, true),
        ("soc", lib(ConeModel::second_order(2))?, 5000, true),
        ("psd", lib(ConeModel::psd(2))?, 5000, true),
        ("exp", ConeModel::exponential(), 20_000, false),
    ];
    let mut got = Vec::new();
    for (name, k, n, want) in cases {
        let e = lib(estimate_core(&k, n, 7))?;
        let u = lib(uniqueness_probe(&e, 200))?;
        ensure(u == want, format!("{name}: probe says {u}"))?;
        got.push(if u { "Yes" } else { "No" });
    }
    Ok(got.join("/"))
}

fn suites() -> Outcome {
    let mut total = 0;
    for seed in [1, 7, 42] {
        for suite in [Suite::Functions, Suite::Cones, Suite::Composite] {
            let reports = lib(run_suite(suite, seed))?;
            let failed: Vec<_> = reports.iter().filter(|r| !r.pass).map(|r| r.check.clone()).collect();
            ensure(failed.is_empty(), format!("seed {seed}: {} failed, first {:?}", failed.len(), failed.first()))?;
            total += reports.len();
        }
    }
    Ok(format!("{total} checks at seeds 1, 7, 42"))
}

fn composite() -> Outcome {
    // fixed affine instance with M = ‖A‖ > 1
    let a = vec![1.0, 0.5, -0.3, 0.2, 1.5, 0.4, -0.7, 0.1, 1.2, 0.6, -0.4, 0.9];
    let b = vec![0.1, -0.2, 0.3, 0.0];
    let map = Arc::new(lib(AffineMap::new(a, b, 3))?);
    let sigma = lib(SublinearFn::max(4))?;
    let w = lib(compute_core(&sigma))?.width;
    let mut report = Vec::new();
    for beta in [0.5, 2.0, 8.0] {
        let c = lib(CompositeSmoothing::new(sigma.clone(), map.clone(), beta, Surrogate::OptimalGeneral))?;
        let m = conesmooth::SmoothMap::lipschitz(map.as_ref());
        let lip_bound = m * m * c.inner_beta();
        let lip = lib(lipschitz_grad_estimate(&c, 3.0, 2000, 7))?;
        ensure(lip <= lip_bound * (1.0 + 1e-4), format!("beta={beta}: lipschitz {lip} > {lip_bound}"))?;
        let gap_bound = m * m * w / 2.0 / beta;
        ensure((c.distance_bound() - gap_bound).abs() <= 1e-12 * gap_bound, "certificate arithmetic")?;
        let mut gap = 0.0_f64;
        for x in conesmooth::sampling::BallPoints::new(3, 3.0, 7).take(2000) {
            gap = gap.max((lib(c.value(&x))? - lib(c.objective(&x))?).abs());
        }
        ensure(gap <= gap_bound + 1e-6, format!("beta={beta}: gap {gap} > {gap_bound}"))?;
        report.push(format!("beta={beta}: L {lip:.4}/{lip_bound:.4}, gap {gap:.4}/{gap_bound:.4}"));
    }
    Ok(report.join("; "))
}

fn benchmark() -> Outcome {
    let inst = lib(PlantedMinimax::generate(64, 10, 7))?;
    let eps = 1e-2;
    let opt = lib(inst.solve(Surrogate::OptimalGeneral, eps, 1_000_000))?;
    let lse = lib(inst.solve(Surrogate::LogSumExp, eps, 1_000_000))?;
    for r in [&opt, &lse] {
        let gap = r.final_gap.ok_or("optimum unknown")?;
        ensure(gap <= eps, format!("{}: final gap {gap}", r.surrogate.name()))?;
    }
    ensure(
        opt.iterations < lse.iterations,
        format!("optimal {} vs logsumexp {} iterations", opt.iterations, lse.iterations),
    )?;
    Ok(format!(
        "iterations optimal {} vs logsumexp {}, ratio {:.3} (sqrt ln 64 = {:.3})",
        opt.iterations,
        lse.iterations,
        lse.iterations as f64 / opt.iterations as f64,
        64f64.ln().sqrt()
    ))
}

fn conic_lift_box() -> Outcome {
    let lift = lib(conic_lift(Arc::new(BoxSet::symmetric(2, 1.0)), vec![0.0, 0.0], 1.0))?;
    let bound = lift.outer_bound();
    let k = ConeModel::lifted(lift);
    let core = lib(ConicCore::from_lift(&k))?;
    let p = vec![0.0, 0.0, 2f64.sqrt()];
    ensure(core.center == p, format!("core point {:?}", core.center))?;
    ensure(lib(core_membership(&core, &p, 500))?, "core point rejected")?;
    ensure(bound == 1.0 - 1.0 / 2f64.sqrt(), format!("outer bound {bound}"))?;
    Ok(format!("(0, 0, sqrt 2) in core, outer bound {bound}"))
}

fn fd_gradients() -> Outcome {
    let mut n = 0;
    for f in conesmooth::verify::catalog_functions() {
        for v in Variant::ALL {
            for beta in [0.5, 1.0, 4.0] {
                let s = lib(SmoothingSpec::for_function(&f, v, beta))?;
                let opts = CheckOptions {
                    radius: 4.0,
                    samples: 200,
                    seed: 7,
                    tol: 1e-5,
                };
                let r = lib(fd_gradient_check(&s, opts))?;
                ensure(r.pass, format!("{} {} beta={beta}: {:e}", f.name(), v.name(), r.worst_violation))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} smoothings x 200 points"))
}

fn main() {
    let criteria: Vec<(&str, Duration, fn() -> Outcome)> = vec![
        ("1 relu core and distance", Duration::from_secs(1), relu),
        ("2 max family gap and grid oracle", Duration::from_secs(10), max_family),
        ("3 norm families", Duration::from_secs(5), norms),
        ("4 cone cores", Duration::from_secs(60), cones),
        ("5 uniqueness", Duration::from_secs(30), uniqueness),
        ("6 sandwich and threshold suites", Duration::from_secs(600), suites),
        ("7 composite certificate", Duration::from_secs(10), composite),
        ("8 minimax benchmark", Duration::from_secs(120), benchmark),
        ("9 conic lift", Duration::from_secs(10), conic_lift_box),
        ("10 finite-difference gradients", Duration::from_secs(60), fd_gradients),
    ];
    let handles: Vec<_> = criteria
        .into_iter()
        .map(|(name, budget, f)| {
            std::thread::spawn(move || {
                let t = Instant::now();
                let out = f();
                (name, budget, t.elapsed(), out)
            })
        })
        .collect();
    let mut failed = 0;
    for h in handles {
        let (name, budget, took, out) = h.join().expect("criterion thread panicked");
        let over = if took > budget { format!(" (over {budget:?} budget)") } else { String::new() };
        match out {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{took:.2?}]{over}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{took:.2?}]{over}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
