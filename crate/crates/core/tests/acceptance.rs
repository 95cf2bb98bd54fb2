//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are evaluated in full and reported as
//! FAIL, but do not fail the run; every other FAIL does.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use perimlab::adversarial::{adversarial_risk, equivalence_check, minimize_adversarial, ClassificationMeasure, Method};
use perimlab::gammalab::{compactness_fields, discrete_gradient_integral, minkowski_content_refined, recovery_shift, Trend};
use perimlab::geometry::{
    dilate, distance_transform, erode, squared_cell_distances, BinaryField, DensityPair, GridDomain, Point, ScalarField,
};
use perimlab::graph::{graph_convergence_experiment, EpsRule, LabelStrips};
use perimlab::limit::{default_trace_radius, per_limit, PolygonalSet};
use perimlab::nonlocal::{coarea_check, per_eps, per_eps_supform};
use perimlab::scenario::{bundled, bundled_ids, Options};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The strict-improvement part of criterion 3 cannot hold: every shift
/// `(-1, delta)` with `0 <= delta <= eps` has the same adversarial risk
/// `2 eps` as the unshifted set, and larger shifts cost `delta + eps`.
const KNOWN_FAILURES: &[usize] = &[3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ind(x: f64, lo: f64, hi: f64) -> f64 {
    f64::from(u8::from(x > lo && x < hi))
}

fn step_densities(d: &GridDomain) -> DensityPair {
    DensityPair::from_fns(d, |p| ind(p[0], 0.0, 1.0), |p| ind(p[0], -1.0, 0.0)).unwrap()
}

fn interval_set(d: &GridDomain, lo: f64, hi: f64) -> BinaryField {
    BinaryField::from_fn(d, |p| p[0] > lo && p[0] < hi)
}

/// Unions of random disks and rectangles with sprinkled cell noise.
fn noisy_set(d: &GridDomain, rng: &mut ChaCha8Rng) -> BinaryField {
    let mut a = smooth_set(d, rng);
    let noise = rng.gen_range(0.0..0.05);
    for i in 0..d.len() {
        if rng.gen::<f64>() < noise {
            a.set(i, !a.get(i));
        }
    }
    a
}

/// Unions of 1 to 4 random disks and rectangles.
fn smooth_set(d: &GridDomain, rng: &mut ChaCha8Rng) -> BinaryField {
    let shapes: Vec<(bool, Point, f64, f64)> = (0..rng.gen_range(1..5))
        .map(|_| {
            let c = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
            (rng.gen_bool(0.5), c, rng.gen_range(0.1..0.4), rng.gen_range(0.1..0.4))
        })
        .collect();
    BinaryField::from_fn(d, |p| {
        shapes.iter().any(|&(disk, c, a, b)| {
            if disk {
                (p[0] - c[0]).hypot(p[1] - c[1]) < a
            } else {
                (p[0] - c[0]).abs() < a && (p[1] - c[1]).abs() < b
            }
        })
    })
}

fn density_scenarios(d: &GridDomain) -> Vec<DensityPair> {
    vec![
        DensityPair::uniform(d, 0.5, 0.5).unwrap(),
        DensityPair::from_fns(d, |p| ind(p[0], 0.0, 1.0), |p| ind(p[0], -1.0, 0.0) + 0.1).unwrap(),
        DensityPair::from_fns(d, |p| (-(p[0] * p[0] + p[1] * p[1]) / 0.3).exp(), |p| 0.3 + 0.2 * p[1]).unwrap(),
        DensityPair::from_fns(d, |p| 1.0 + p[0], |p| 1.0 - 0.5 * p[1]).unwrap(),
        DensityPair::from_fns(d, |p| if (p[0] * 4.0).floor() as i64 % 2 == 0 { 0.9 } else { 0.1 }, |p| 0.2 + p[0] * p[0])
            .unwrap(),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let d = GridDomain::interval(-1.0, 1.0, 1024).unwrap();
    let rho = step_densities(&d);
    let a = interval_set(&d, -1.0, 0.0);
    let shifted = interval_set(&d, -1.0, 0.2);
    let r = default_trace_radius(&d);
    let p_a = per_eps(&a, &rho, 0.1).unwrap().total;
    let p_shift = per_eps(&shifted, &rho, 0.1).unwrap().total;
    let lim = per_limit(&a, &rho, r).unwrap();
    let swapped = rho.swapped();
    let p_sw = per_eps(&a, &swapped, 0.1).unwrap().total;
    let lim_sw = per_limit(&a, &swapped, r).unwrap();
    let elapsed = start.elapsed();
    let pass = (p_a - 2.0).abs() <= 0.02
        && (p_shift - 1.0).abs() <= 0.02
        && (lim - 1.0).abs() <= 0.05
        && p_sw == 0.0
        && lim_sw.abs() <= 0.05
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "per_eps(A)={p_a} per_eps(A_0.2)={p_shift} per_limit(A)={lim} swapped per_eps={p_sw} per_limit={lim_sw} ({elapsed:.2?})"
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let d = GridDomain::square(-1.0, 1.0, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sets: Vec<BinaryField> = (0..100).map(|_| noisy_set(&d, &mut rng)).collect();
    let mut failures = 0;
    let mut checks = 0;
    for rho in density_scenarios(&d) {
        let mu = ClassificationMeasure::new(rho);
        for (k, a) in sets.iter().enumerate() {
            let eps = [0.05, 0.1, 0.2][k % 3];
            checks += 1;
            if !equivalence_check(a, &mu, eps).unwrap().holds() {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(failures == 0 && elapsed < Duration::from_secs(30), format!("{checks} checks, {failures} mismatches ({elapsed:.2?})"))
}

fn criterion_3() -> Outcome {
    let d = GridDomain::interval(-1.0, 1.0, 1024).unwrap();
    let mu = ClassificationMeasure::new(step_densities(&d));
    let a = interval_set(&d, -1.0, 0.0);
    let risk_a = adversarial_risk(&a, &mu, 0.1).unwrap();
    let risk_shift = adversarial_risk(&interval_set(&d, -1.0, 0.2), &mu, 0.1).unwrap();
    let trained = minimize_adversarial(&mu, 0.1, &Method::Exhaustive1d { max_intervals: 1 }).unwrap();
    let values_ok = (risk_a - 0.2).abs() <= 0.004 && (risk_shift - 0.3).abs() <= 0.004;
    let below = trained.objective < 0.2;
    let strictly_beats = trained.objective < risk_a;
    outcome(
        values_ok && below && strictly_beats,
        format!(
            "risk(A)={risk_a} risk(A_0.2)={risk_shift} trained objective={} (< 0.2: {below}; strictly below risk(A): {strictly_beats})",
            trained.objective
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let d = GridDomain::interval(-1.0, 1.0, 1 << 18).unwrap();
    let rho = DensityPair::from_fns(&d, |p| 1.0 + 0.5 * p[0], |p| 0.8 + 0.3 * (3.0 * p[0]).sin()).unwrap();
    let ramp = ScalarField::from_fn(&d, |p| (p[0] + 0.5).clamp(0.0, 1.0));
    let plateaus = ScalarField::from_fn(&d, |p| ind(p[0], -0.5, 0.0) + 0.4 * ind(p[0], 0.2, 0.6));
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, u) in [("ramp", &ramp), ("two-plateau", &plateaus)] {
        let range = u.max() - u.min();
        let c64 = coarea_check(u, &rho, 0.1, 64).unwrap();
        let c256 = coarea_check(u, &rho, 0.1, 256).unwrap();
        let bounds = c64.gap() <= 5.0 * range / 64.0 && c256.gap() <= 5.0 * range / 256.0;
        // a 4x reduction up to round-off in the two accumulated sums
        let reduced = c256.gap() <= c64.gap() / 4.0 * (1.0 + 1e-9) + 1e-12;
        pass &= bounds && reduced;
        detail.push(format!(
            "{name}: gap64={:.3e} gap256={:.3e} ratio={:.6}",
            c64.gap(),
            c256.gap(),
            c64.gap() / c256.gap()
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    outcome(pass, format!("{} ({elapsed:.2?})", detail.join("; ")))
}

fn brute_squared(a: &BinaryField) -> Vec<f64> {
    let d = a.domain();
    let members: Vec<(usize, usize)> = (0..d.len()).filter(|&i| a.get(i)).map(|i| d.coords(i)).collect();
    (0..d.len())
        .map(|i| {
            let (x, y) = d.coords(i);
            members
                .iter()
                .map(|&(p, q)| (x.abs_diff(p).pow(2) + y.abs_diff(q).pow(2)) as f64)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut dt_bad = 0;
    for seed in 0..20 {
        let n = [16, 33, 64][seed % 3];
        let d = GridDomain::square(-1.0, 1.0, n).unwrap();
        let a = noisy_set(&d, &mut rng);
        let brute = brute_squared(&a);
        let fast = squared_cell_distances(&a);
        let dist = distance_transform(&a);
        let exact = fast == brute && (0..d.len()).all(|i| dist.get(i) == d.h() * brute[i].sqrt());
        dt_bad += usize::from(!exact);
    }
    let d = GridDomain::square(-1.0, 1.0, 64).unwrap();
    let mut duality_bad = 0;
    for k in 0..100 {
        let a = noisy_set(&d, &mut rng);
        let eps = [0.03, 0.07, 0.15, 0.3][k % 4];
        let lhs = erode(&a, eps).unwrap();
        let rhs = dilate(&a.complement(), eps).unwrap().complement();
        duality_bad += usize::from(lhs != rhs);
    }
    let mut sup_bad = 0;
    for (k, rho) in density_scenarios(&d).iter().cycle().take(20).enumerate() {
        let a = noisy_set(&d, &mut rng);
        let eps = [0.05, 0.1, 0.2, 0.12][k % 4];
        sup_bad += usize::from(per_eps(&a, rho, eps).unwrap() != per_eps_supform(&a, rho, eps).unwrap());
    }
    outcome(
        dt_bad == 0 && duality_bad == 0 && sup_bad == 0,
        format!("distance mismatches {dt_bad}/20, duality mismatches {duality_bad}/100, supform mismatches {sup_bad}/20"),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let d = GridDomain::square(-1.0, 1.0, 1024).unwrap();
    let rho = DensityPair::uniform(&d, 0.5, 0.5).unwrap();
    let disk = BinaryField::from_fn(&d, |p| p[0].hypot(p[1]) < 0.5);
    let lim = per_limit(&disk, &rho, default_trace_radius(&d)).unwrap();
    let lim_ok = (lim - std::f64::consts::PI).abs() <= 0.03 * std::f64::consts::PI;
    let ind_disk = |p: Point| p[0].hypot(p[1]) < 0.5;
    let report = minkowski_content_refined(&ind_disk, &[-1.0, -1.0], &[1.0, 1.0], 1024, &[0.2, 0.1, 0.05], std::f64::consts::PI)
        .unwrap();
    let trend = report.trend(true);
    let elapsed = start.elapsed();
    let values: Vec<String> = report.rows().iter().rev().map(|r| format!("{:.5}", r.value)).collect();
    outcome(
        lim_ok && trend == Trend::Decreasing && elapsed < Duration::from_secs(60),
        format!("per_limit(disk)={lim:.5} (h=1/512); M_eps over 0.2,0.1,0.05 = {} trend {trend:?} ({elapsed:.2?})", values.join(",")),
    )
}

fn criterion_7() -> Outcome {
    let d = GridDomain::interval(-1.0, 1.0, 1024).unwrap();
    let rho = step_densities(&d);
    let a = PolygonalSet::intervals(vec![(-1.0, 0.0)]).unwrap();
    let eta = 0.05;
    let s1 = recovery_shift(&a, &rho, eta).unwrap();
    let p1 = per_eps(&s1.rasterize(&d).unwrap(), &rho, 0.01).unwrap().total;
    let sym1 = a.symmetric_difference_measure(&s1, &d).unwrap();
    let swapped = rho.swapped();
    let s2 = recovery_shift(&a, &swapped, eta).unwrap();
    let p2 = per_eps(&s2.rasterize(&d).unwrap(), &swapped, 0.01).unwrap().total;
    let sym2 = a.symmetric_difference_measure(&s2, &d).unwrap();
    outcome(
        (p1 - 1.0).abs() <= 0.05 && p2 == 0.0 && sym1 <= 2.0 * eta && sym2 <= 2.0 * eta,
        format!("case 1: per_eps={p1} |A△A'|={sym1}; case 2: per_eps={p2} |A△A'|={sym2}"),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let d = GridDomain::square(-1.0, 1.0, 256).unwrap();
    let rho = DensityPair::uniform(&d, 0.125, 0.125).unwrap();
    let half = PolygonalSet::rectangle([-1.0, -1.0], [0.0, 1.0]).unwrap();
    let reference = per_limit(&half, &rho, default_trace_radius(&d)).unwrap();
    let seeds: Vec<u64> = (0..20).collect();
    let exp = graph_convergence_experiment(
        &rho,
        &|p: Point| p[0] < 0.0,
        reference,
        &[2000, 8000, 32000],
        &seeds,
        EpsRule::default(),
        LabelStrips::default(),
    )
    .unwrap();
    let errs = exp.median_errors();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let final_rel = errs[errs.len() - 1] / reference;
    let elapsed = start.elapsed();
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.5}")).collect();
    outcome(
        decreasing && final_rel <= 0.2 && elapsed < Duration::from_secs(300),
        format!("reference {reference:.5}; median |E_n - Per| = {} ; final relative {final_rel:.4} ({elapsed:.2?})", shown.join(", ")),
    )
}

fn criterion_9() -> Outcome {
    let d = GridDomain::square(-1.0, 1.0, 128).unwrap();
    let rho = DensityPair::from_fns(&d, |p| 0.6 + 0.3 * p[0], |p| 0.5 + 0.2 * (2.0 * p[1]).cos()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..20 {
        let a = smooth_set(&d, &mut rng);
        for eps in [0.05, 0.1] {
            let (u, v) = compactness_fields(&a, eps).unwrap();
            let per = per_eps(&a, &rho, eps).unwrap();
            let slack = 4.0 * d.h() / eps;
            let gu = discrete_gradient_integral(&u, rho.rho0()).unwrap() - per.outer;
            let gv = discrete_gradient_integral(&v, rho.rho1()).unwrap() - per.inner;
            worst = worst.max((gu.max(gv)) / slack);
            violations += usize::from(gu > slack) + usize::from(gv > slack);
        }
    }
    outcome(violations == 0, format!("{violations} violations; largest excess = {worst:.3} x 4h/eps"))
}

fn criterion_10() -> Outcome {
    let mut differing = Vec::new();
    for id in bundled_ids() {
        let prepared = bundled(id).unwrap().prepare(&Options::default()).unwrap();
        if prepared.run().unwrap() != prepared.run().unwrap() {
            differing.push(id);
        }
    }
    outcome(differing.is_empty(), format!("{} bundled scenarios, differing: {differing:?}", bundled_ids().len()))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "step-density nonlocal and limit perimeters", criterion_1),
        (2, "adversarial risk = Bayes risk + eps Per_eps, bitwise", criterion_2),
        (3, "adversarial values and trained objective", criterion_3),
        (4, "coarea identity under threshold quadrature", criterion_4),
        (5, "distance transform, duality and sup-form oracles", criterion_5),
        (6, "disk limit perimeter and Minkowski sweep", criterion_6),
        (7, "recovery shift", criterion_7),
        (8, "graph perimeter convergence", criterion_8),
        (9, "compactness gradient bounds", criterion_9),
        (10, "determinism of bundled scenarios", criterion_10),
    ];
    let mut unexpected = 0;
    for (k, name, run) in criteria {
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let known = !o.pass && KNOWN_FAILURES.contains(&k);
        let tag = if known { " [known failure]" } else { "" };
        println!("criterion {k:>2} {status}{tag}: {name}: {}", o.detail);
        if !o.pass && !known {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    }
}
