//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::{SQRT_2, TAU};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use pshardy_core::hardy::{
    canonical_ball_experiment, density_study, dilation_study, norm_boundary, norm_levels, norm_riesz,
    strict_inclusion_study, weakstar_study, LevelsLimit,
};
use pshardy_core::kernels::{poisson, poisson_convolve, poisson_kernel};
use pshardy_core::measures::{default_levels, monotonicity_table, mu_mass, mu_pair_contour, mu_pair_lj};
use pshardy_core::quadrature::periodic_integrate;
use pshardy_core::{AnalyticFunction, BoundaryAngle, Complex64, DiskPoint, Exhaustion, HardyExponent, TestField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(x: f64) -> HardyExponent {
    HardyExponent::new(x).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn kernel_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst_mass: f64 = 0.0;
    for _ in 0..200 {
        let z = Complex64::from_polar(0.99 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
        let breaks = if z.norm() > 0.9 { vec![z.arg()] } else { vec![] };
        let mass = periodic_integrate(|t| poisson_kernel(z, t), &breaks, 1e-13);
        worst_mass = worst_mass.max((mass.value - 1.0).abs());
    }
    ensure(worst_mass <= 1e-10, || format!("worst |∫P - 1| = {worst_mass:e}"))?;
    let mut worst_semigroup: f64 = 0.0;
    for k in 1..=9 {
        let t = k as f64 / 10.0;
        for z in [c(0.0, 0.0), c(0.5, 0.0), c(-0.3, 0.6), c(0.9, 0.0), c(0.0, -0.85), c(0.6, 0.6)] {
            let z = DiskPoint::new(z).map_err(err)?;
            for j in 0..12 {
                let phi = BoundaryAngle::new(TAU * j as f64 / 12.0);
                let lhs = poisson_convolve(t, phi, z, 1e-12).map_err(err)?;
                let rhs = poisson(DiskPoint::new(z.value() * t).map_err(err)?, phi);
                worst_semigroup = worst_semigroup.max((lhs - rhs).abs());
            }
        }
    }
    ensure(worst_semigroup <= 1e-8, || format!("worst convolution gap {worst_semigroup:e}"))?;
    Ok(format!("max |∫P - 1| = {worst_mass:.1e}, max convolution gap = {worst_semigroup:.1e}"))
}

fn lelong_jensen_anchor() -> Check {
    let u = Exhaustion::log_modulus();
    let phi = TestField::modulus_power(&AnalyticFunction::monomial(1), p(2.0));
    let mut worst: f64 = 0.0;
    for r in [0.5f64.ln(), -0.25, -0.125] {
        let v = mu_pair_lj(&u, r, &phi, 1e-9).map_err(err)?.value;
        let radius = r.exp();
        let circle_mean = periodic_integrate(|t| Complex64::from_polar(radius, t).norm_sqr(), &[], 1e-14).value;
        let closed = (2.0 * r).exp();
        ensure((v - closed).abs() <= 1e-6, || format!("r = {r}: {v} vs e^(2r) = {closed}"))?;
        ensure((v - circle_mean).abs() <= 1e-6, || format!("r = {r}: {v} vs circle mean {circle_mean}"))?;
        worst = worst.max((v - closed).abs()).max((v - circle_mean).abs());
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn dual_route_agreement() -> Check {
    let exhaustions = [
        Exhaustion::green_atom(c(0.5, 0.0)).map_err(err)?,
        Exhaustion::quadratic(),
        Exhaustion::mixed(),
        Exhaustion::new(vec![(c(0.3, 0.4), 0.6)], 0.4).map_err(err)?,
        Exhaustion::new(vec![(c(0.2, 0.1), 0.5), (c(-0.4, -0.3), 0.5)], 0.0).map_err(err)?,
    ];
    let f1 = AnalyticFunction::real_polynomial(&[1.0, 1.0]);
    let f2 = AnalyticFunction::real_polynomial(&[2.0, 0.0, 1.0]);
    let fields: [(TestField, AnalyticFunction, f64); 2] =
        [(TestField::modulus_power(&f1, p(2.0)), f1, 2.0), (TestField::modulus_power(&f2, p(3.0)), f2, 3.0)];
    let mut triples = 0;
    let mut worst_ratio: f64 = 0.0;
    for u in &exhaustions {
        for (phi, g, q) in &fields {
            for r in [-0.3, -0.05] {
                let lj = mu_pair_lj(u, r, phi, 1e-9).map_err(err)?;
                let ct = mu_pair_contour(u, r, |z| g.eval_raw(z).norm().powf(*q), 512).map_err(err)?;
                let gap = (lj.value - ct.value).abs();
                let budget = lj.report.est_error + ct.report.est_error;
                ensure(gap <= budget, || format!("u = {:?}, r = {r}: gap {gap:e} > budget {budget:e}", u.to_record()))?;
                worst_ratio = worst_ratio.max(gap / budget);
                triples += 1;
            }
        }
    }
    let mut worst_mass: f64 = 0.0;
    for r in [-0.45, -0.25, -0.1, -0.01, -1e-3] {
        let m = mu_mass(&Exhaustion::quadratic(), r, 1e-9).map_err(err)?.value;
        worst_mass = worst_mass.max((m - (1.0 + 2.0 * r)).abs());
    }
    ensure(worst_mass <= 1e-6, || format!("quadratic mass off by {worst_mass:e}"))?;
    Ok(format!("{triples} triples, max gap/budget = {worst_ratio:.2}; quadratic mass error {worst_mass:.1e}"))
}

fn three_route_norms() -> Check {
    let functions = [
        ("1+z", AnalyticFunction::real_polynomial(&[1.0, 1.0])),
        ("z^2", AnalyticFunction::monomial(2)),
        ("3+z-z^2", AnalyticFunction::real_polynomial(&[3.0, 1.0, -1.0])),
    ];
    let exhaustions = [
        ("atom(0)", Exhaustion::log_modulus()),
        ("atom(0.5)", Exhaustion::green_atom(c(0.5, 0.0)).map_err(err)?),
        ("quad", Exhaustion::quadratic()),
        ("mixed", Exhaustion::mixed()),
    ];
    let r_seq = [-0.01, -0.005, -0.002, -1e-3];
    let (mut worst_riesz, mut worst_levels, mut worst_last): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (fname, f) in &functions {
        for pv in [0.5, 1.0, 2.0, 4.0] {
            for (uname, u) in &exhaustions {
                let b = norm_boundary(f, p(pv), u, 1e-12);
                let r = norm_riesz(f, p(pv), u, 1e-9).map_err(err)?;
                let rel = (r.value - b.value).abs() / b.value;
                ensure(rel <= 1e-4, || format!("{fname}, p = {pv}, {uname}: riesz {} vs boundary {}", r.value, b.value))?;
                let l = norm_levels(f, p(pv), u, &r_seq, 1e-9, LevelsLimit::Linear).map_err(err)?;
                let table = l.table.as_ref().expect("levels table");
                ensure(table.flags["monotone"], || format!("{fname}, p = {pv}, {uname}: levels not monotone"))?;
                let gap = (l.value - b.value).abs() / b.value;
                ensure(gap <= 1e-3, || format!("{fname}, p = {pv}, {uname}: levels {} vs boundary {}", l.value, b.value))?;
                worst_riesz = worst_riesz.max(rel);
                worst_levels = worst_levels.max(gap);
                worst_last = worst_last.max((l.last_row.unwrap() - b.value).abs() / b.value);
            }
        }
    }
    let one_plus_z = &functions[0].1;
    let a = norm_boundary(one_plus_z, p(2.0), &exhaustions[1].1, 1e-12).value;
    let b = norm_boundary(one_plus_z, p(2.0), &exhaustions[0].1, 1e-12).value;
    ensure((a - 3f64.sqrt()).abs() <= 1e-6, || format!("atom(0.5) anchor {a}"))?;
    ensure((b - SQRT_2).abs() <= 1e-6, || format!("atom(0) anchor {b}"))?;
    Ok(format!("48 combos, max riesz rel gap {worst_riesz:.1e}, max levels rel gap {worst_levels:.1e} (last row alone {worst_last:.1e}); anchors exact"))
}

fn monotonicity() -> Check {
    let fields = [
        TestField::modulus_power(&AnalyticFunction::real_polynomial(&[1.0, 1.0]), p(2.0)),
        TestField::modulus_power(&AnalyticFunction::real_polynomial(&[3.0, 1.0, -1.0]), p(0.5)),
        TestField::constant(1.0),
    ];
    let exhaustions =
        [Exhaustion::quadratic(), Exhaustion::mixed(), Exhaustion::green_atom(c(0.5, 0.0)).map_err(err)?];
    let levels = default_levels(10);
    let mut tables = 0;
    for u in &exhaustions {
        for phi in &fields {
            let t = monotonicity_table(u, phi, &levels, 1e-9).map_err(err)?;
            ensure(t.flags["monotone"], || format!("monotonicity table fails for {:?}", u.to_record()))?;
            tables += 1;
        }
        let l = norm_levels(&AnalyticFunction::real_polynomial(&[1.0, 1.0]), p(2.0), u, &levels, 1e-9, LevelsLimit::Linear)
            .map_err(err)?;
        ensure(l.table.as_ref().unwrap().flags["monotone"], || "norm_levels table not monotone".into())?;
        tables += 1;
    }
    let mut samples = 0;
    for u in [Exhaustion::quadratic(), Exhaustion::mixed()] {
        for j in 0..64 {
            let theta = TAU * j as f64 / 64.0;
            let alpha = u.alpha_at(theta);
            let mut prev = f64::NEG_INFINITY;
            for &r in &levels {
                let v = u.p_r(r, theta, 1e-10).map_err(err)?;
                ensure(v.value >= prev - v.est_error, || format!("p_r drops at θ = {theta}, r = {r}"))?;
                ensure(v.value <= alpha + v.est_error, || format!("p_r exceeds α at θ = {theta}, r = {r}"))?;
                prev = v.value;
                samples += 1;
            }
        }
    }
    Ok(format!("{tables} tables monotone, {samples} partial masses ordered"))
}

fn weakstar() -> Check {
    let u = Exhaustion::green_atom(c(0.5, 0.0)).map_err(err)?;
    let h = AnalyticFunction::monomial(1);
    let phi = TestField::modulus_power(&h, p(2.0));
    let t = weakstar_study(&u, &h, &phi, p(2.0), &default_levels(10), 512, 1e-12).map_err(err)?;
    let pairing: Vec<f64> = t.series("pairing").map(|r| (r.value - 0.5).abs()).collect();
    let slack: Vec<f64> = t.series("pairing").map(|r| r.est_error).collect();
    for k in 1..pairing.len() {
        ensure(pairing[k] <= pairing[k - 1] + slack[k], || format!("error rises at k = {}: {:?}", k + 1, pairing))?;
    }
    let last = *pairing.last().unwrap();
    ensure(last <= 1e-3, || format!("error at k = 10 is {last:e}"))?;
    let mut worst_unit: f64 = 0.0;
    for row in t.series("unit") {
        let dev = (row.value - 0.5).abs();
        ensure(dev <= row.est_error, || format!("unit row at r = {}: {dev:e} > est {:e}", row.parameter, row.est_error))?;
        worst_unit = worst_unit.max(dev);
    }
    Ok(format!("error {:.2e} -> {last:.2e}; unit rows within est (max {worst_unit:.1e})", pairing[0]))
}

fn dilations() -> Check {
    let f = AnalyticFunction::real_polynomial(&[1.0, 1.0]);
    let u = Exhaustion::green_atom(c(0.5, 0.0)).map_err(err)?;
    let t_seq = [0.5, 0.9, 0.99];
    let table = dilation_study(&f, p(2.0), &u, &t_seq, 1e-12).map_err(err)?;
    for ((n, d), t) in table.series("norm").zip(table.series("difference")).zip(t_seq) {
        let sq = 1.0 + t + t * t;
        ensure((n.value * n.value - sq).abs() <= 1e-6, || format!("t = {t}: ‖f_t‖² = {}", n.value * n.value))?;
        ensure((d.value - (1.0 - t)).abs() <= 1e-6, || format!("t = {t}: ‖f_t - f‖ = {}", d.value))?;
    }
    ensure(table.flags["norm_nondecreasing"] && table.flags["difference_nonincreasing"], || "columns not monotone".into())?;
    Ok("‖f_t‖² = 1+t+t² and ‖f_t - f‖ = 1-t; both columns monotone".into())
}

fn canonical_balls() -> Check {
    let f = AnalyticFunction::real_polynomial(&[1.0, 1.0]);
    let t_seq = [0.5, 0.9, 0.99, 0.999];
    let table = canonical_ball_experiment(&f, p(2.0), &t_seq, 1e-12).map_err(err)?;
    for (row, t) in table.series("norm-p").zip(t_seq) {
        ensure((row.value - (2.0 + 2.0 * t)).abs() <= 1e-8, || format!("t = {t}: row {}", row.value))?;
        ensure((row.abs_error - 2.0 * (1.0 - t)).abs() <= 1e-8, || format!("t = {t}: gap {}", row.abs_error))?;
    }
    ensure(table.metrics["first_exit_index"] == 0.0, || format!("first exit index {}", table.metrics["first_exit_index"]))?;
    ensure(table.metrics["first_exit_parameter"] == 0.5, || "first exit not at t1".into())?;
    Ok("rows 2+2t, gaps 2(1-t), first exit at t1 = 0.5".into())
}

fn strict_inclusion() -> Check {
    let f = AnalyticFunction::power(c(1.0, 0.0), 0.375).map_err(err)?;
    let k_seq: Vec<usize> = (8..=20).collect();
    let table = strict_inclusion_study(&f, p(2.0), &k_seq, 1e-10).map_err(err)?;
    let ratios = table.values("ratio");
    let worst = ratios.iter().map(|q| (q - SQRT_2).abs()).fold(0.0, f64::max);
    ensure(worst <= 0.05, || format!("ratios {ratios:?}"))?;
    ensure(table.flags["classical_finite"], || "classical norm not finite".into())?;
    let classical = table.series("classical").next().unwrap();
    ensure(classical.converged, || "classical norm not converged".into())?;
    Ok(format!(
        "ratios in [{:.4}, {:.4}], max |ratio - √2| = {worst:.4}; classical norm^p = {:.6}",
        ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        ratios.iter().cloned().fold(0.0, f64::max),
        classical.value
    ))
}

fn density() -> Check {
    let f = AnalyticFunction::power(c(0.95, 0.0), 1.0).map_err(err)?;
    let schedule: Vec<(f64, usize)> = (1..=8).map(|j| (1.0 - 0.5f64.powi(j), 1usize << j)).collect();
    let table = density_study(&f, p(2.0), &Exhaustion::log_modulus(), &schedule, 1e-13).map_err(err)?;
    let mut worst: f64 = 1.0;
    for (row, &(t, n)) in table.series("section").zip(&schedule) {
        let q = 0.95 * t;
        let oracle = q.powi(n as i32 + 1) / (1.0 - q * q).sqrt();
        let factor = (row.value / oracle).max(oracle / row.value);
        ensure(factor <= 2.0, || format!("t = {t}, n = {n}: {} vs oracle {oracle}", row.value))?;
        worst = worst.max(factor);
    }
    let last = table.series("section").last().unwrap().value;
    ensure(last < 1e-3, || format!("final section error {last:e}"))?;
    Ok(format!("max factor to tail oracle {worst:.6}, final section error {last:.2e}"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut checked = Vec::new();
    for (name, ext) in [("norm", "csv"), ("balls", "csv"), ("weakstar", "json"), ("strict-inclusion", "csv")] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{name}-{run}.{ext}"));
            let status = Command::new(env!("CARGO_BIN_EXE_pshardy"))
                .arg(name)
                .arg("--config")
                .arg(configs_dir().join(format!("{name}.toml")))
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(err)?;
            ensure(status.status.success(), || format!("{name}: {}", String::from_utf8_lossy(&status.stderr)))?;
            outputs.push(std::fs::read(&out).map_err(err)?);
        }
        ensure(!outputs[0].is_empty() && outputs[0] == outputs[1], || format!("{name}: outputs differ"))?;
        checked.push(name);
    }
    Ok(format!("byte-identical reruns: {}", checked.join(", ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("kernel identities", kernel_identities),
        ("Lelong-Jensen classical anchor", lelong_jensen_anchor),
        ("dual-route measure agreement", dual_route_agreement),
        ("three-route norm agreement", three_route_norms),
        ("monotonicity", monotonicity),
        ("weak-* convergence", weakstar),
        ("dilations", dilations),
        ("canonical balls", canonical_balls),
        ("strict inclusion", strict_inclusion),
        ("polynomial density", density),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
