//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::time::{Duration, Instant};

use netadvect::bench::{self, ConvergenceReport, TriangleResolution};
use netadvect::edge::{self, EdgeProblem, NodeStencil};
use netadvect::kernels::{preferred_weight, Scheme, SchemeConfig, SpaceGrid, TimeGrid};
use netadvect::network;
use netadvect::nonlinear;
use netadvect::retardation::RetardationModel;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn study(scheme: Scheme) -> ConvergenceReport {
    bench::convergence_study(
        &bench::doubling(256, 2048, 2),
        bench::smooth_gaussian,
        &SchemeConfig::new(scheme),
    )
    .unwrap()
}

fn eocs(r: &ConvergenceReport) -> Vec<f64> {
    r.rows.iter().filter_map(|row| row.eoc).collect()
}

fn fmt_eocs(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>().join(", ")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let r = study(Scheme::ThirdOrder);
    let elapsed = start.elapsed();
    let e = eocs(&r);
    let last = *e.last().unwrap();
    outcome(
        (last - 3.0).abs() <= 0.15 && elapsed < Duration::from_secs(5),
        format!("third-order EOC [{}], {:.2}s", fmt_eocs(&e), elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let e = eocs(&study(Scheme::FixedWeight(1.0 / 3.0)));
    let last = *e.last().unwrap();
    outcome((last - 2.02).abs() <= 0.15, format!("w=1/3 EOC [{}]", fmt_eocs(&e)))
}

fn criterion_3() -> Outcome {
    let e = eocs(&study(Scheme::FirstOrder));
    outcome(e.iter().all(|x| (0.7..=1.0).contains(x)), format!("first-order EOC [{}]", fmt_eocs(&e)))
}

fn criterion_4() -> Outcome {
    let e = eocs(&study(Scheme::HighResolution));
    outcome(e.iter().all(|x| (2.3..=3.1).contains(x)), format!("HR EOC [{}]", fmt_eocs(&e)))
}

fn final_row_extremes(sc: &bench::EdgeScenario, scheme: Scheme) -> (f64, f64, f64) {
    let sol = edge::solve(&sc.problem, &SchemeConfig::new(scheme)).unwrap();
    let row = sol.row(sol.steps());
    let min = row.iter().copied().fold(f64::INFINITY, f64::min);
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max, sol.min())
}

fn criterion_5() -> Outcome {
    let sc = bench::smooth_gaussian(512, 256).unwrap();
    let (hr_min, hr_max, hr_all) = final_row_extremes(&sc, Scheme::HighResolution);
    let (th_min, _, _) = final_row_extremes(&sc, Scheme::ThirdOrder);
    outcome(
        hr_min >= -1e-14 && hr_all >= -1e-14 && hr_max <= 0.9951 + 5e-3 && th_min < 0.0,
        format!("HR min {hr_min:.3e} max {hr_max:.6}, third min {th_min:.3e}"),
    )
}

fn criterion_6() -> Outcome {
    let sc = bench::smooth_gaussian(256, 32).unwrap();
    let (hr_min, _, hr_all) = final_row_extremes(&sc, Scheme::HighResolution);
    let (th_min, _, _) = final_row_extremes(&sc, Scheme::ThirdOrder);
    outcome(
        hr_min >= -1e-13 && hr_all >= -1e-13 && th_min <= -1e-3,
        format!("C=8: HR min {hr_min:.3e}, third min {th_min:.3e}"),
    )
}

fn criterion_7() -> Outcome {
    let config = SchemeConfig::new(Scheme::HighResolution);
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=4 {
        let sc = bench::four_shapes(k, 1600, 160).unwrap();
        let sol = edge::solve(&sc.problem, &config).unwrap();
        let stats = sol.corrector_stats();
        let frac = stats.repeated as f64 / stats.nodes as f64;
        let ok = sol.min() >= -1e-13
            && sol.max() <= 1.0 + 1e-13
            && stats.max_repeats <= 1
            && frac <= 0.01
            && edge::dmp_check(&sol).is_empty();
        pass &= ok;
        parts.push(format!("shape{k} [{:.1e}, {:.6}] repeated {:.3}%", sol.min(), sol.max(), 100.0 * frac));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let config = SchemeConfig::new(Scheme::HighResolution);
    let mut pass = true;
    let mut worst_bound: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for cells in [400, 800] {
        for k in 1..=4 {
            let sc = bench::nonlinear_isotherm(k, cells).unwrap();
            let sol = edge::solve(&sc.problem, &config).unwrap();
            let a = edge::conservation_audit(&sol, &sc.problem).unwrap();
            let excess = (-sol.min()).max(sol.max() - 1.0).max(0.0);
            let rel = a.residual.abs() / a.inflow.abs();
            worst_bound = worst_bound.max(excess);
            worst_res = worst_res.max(rel);
            pass &= excess <= 1e-12 && rel <= 1e-10;
        }
    }
    outcome(pass, format!("worst bound excess {worst_bound:.1e}, worst residual/inflow {worst_res:.1e}"))
}

fn edge6_amplitude(h: f64, tau: f64) -> f64 {
    let model = bench::triangle_file(TriangleResolution::Uniform { h, tau }).unwrap().to_model().unwrap();
    let sol = network::solve_network(&model, &SchemeConfig::new(Scheme::ThirdOrder)).unwrap();
    let e6 = &sol.edges[model.edge_index("e6").unwrap()];
    e6.row(e6.steps()).iter().fold(0.0, |m, q| m.max(q.abs()))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let coarse = edge6_amplitude(1.0 / 8.0, 5.0 / 16.0);
    let fine = edge6_amplitude(1.0 / 16.0, 5.0 / 32.0);
    let elapsed = start.elapsed();
    outcome(
        fine < coarse && elapsed < Duration::from_secs(30),
        format!("max|q6(.,70)| {coarse:.3e} -> {fine:.3e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn random_problem(rng: &mut StdRng) -> EdgeProblem {
    let cells = rng.gen_range(4..40);
    let steps = rng.gen_range(4..40);
    let c = rng.gen_range(0.1..50.0);
    let grid = SpaceGrid::uniform(1.0, cells).unwrap();
    let time = TimeGrid::new(c / cells as f64 * steps as f64, steps).unwrap();
    let boundary = (0..=steps).map(|_| if rng.gen_bool(0.3) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
    let mut p = EdgeProblem::linear(grid, time, 1.0, 1.0, boundary);
    p.initial = (0..=cells).map(|_| rng.gen_range(-1.0..1.0)).collect();
    p
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_10() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut failures = Vec::new();

    // divisor positivity
    for _ in 0..10_000 {
        let c: f64 = rng.gen_range(1e-3..100.0);
        let w: f64 = rng.gen_range(0.0..=1.0);
        let psi: f64 = rng.gen_range(-2.0..=2.0);
        let floor = c.min(0.5);
        if edge::weighted_divisor(c, w) < floor || edge::limited_divisor(c, psi) < floor {
            failures.push(format!("divisor below floor at C = {c}"));
            break;
        }
    }

    // DMP and conservation on random data
    let first = SchemeConfig::new(Scheme::FirstOrder);
    let hr = SchemeConfig::new(Scheme::HighResolution);
    let mut worst_cons: f64 = 0.0;
    for case in 0..200 {
        let p = random_problem(&mut rng);
        for config in [&first, &hr] {
            let sol = edge::solve(&p, config).unwrap();
            if !edge::dmp_check(&sol).is_empty() {
                failures.push(format!("DMP violated in case {case} by {}", config.scheme.name()));
            }
            let a = edge::conservation_audit(&sol, &p).unwrap();
            worst_cons = worst_cons.max(a.relative_residual());
        }
    }
    if worst_cons > 1e-11 {
        failures.push(format!("conservation residual {worst_cons:.1e}"));
    }

    // linear reduction of the nonlinear solver
    let mut worst_lin: f64 = 0.0;
    for _ in 0..50 {
        let mut p = random_problem(&mut rng);
        let kappa = rng.gen_range(0.5..2.0);
        p.retardation = RetardationModel::Linear { kappa };
        let a = edge::solve_high_resolution(&p, &hr).unwrap();
        let b = nonlinear::solve_nonlinear_hr(&p, &hr).unwrap();
        let diff = a.values().iter().zip(b.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        worst_lin = worst_lin.max(diff);
    }
    if worst_lin > 1e-12 {
        failures.push(format!("nonlinear linear reduction off by {worst_lin:.1e}"));
    }

    // closed forms against a bisection oracle
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..10_000 {
        let st = NodeStencil {
            prev: rng.gen_range(-1.0..1.0),
            left: rng.gen_range(-1.0..1.0),
            left_next: rng.gen_range(-1.0..1.0),
            prev_flux: rng.gen_range(-1.0..1.0),
        };
        let c = rng.gen_range(0.1..50.0);
        let wbar = preferred_weight(c).unwrap();
        let psi = rng.gen_range(0.0..=2.0);
        let rhs = st.prev_flux + c * st.left;
        let qp = edge::predict_node(&st, c, wbar);
        let op = bisect(|q| edge::weighted_flux(q, &st, wbar) + c * q - rhs, -1e3, 1e3);
        let qc = edge::correct_node(&st, c, psi);
        let oc = bisect(|q| edge::limited_flux(q, &st, psi) + c * q - rhs, -1e3, 1e3);
        worst_oracle = worst_oracle.max((qp - op).abs()).max((qc - oc).abs());
    }
    if worst_oracle > 1e-12 {
        failures.push(format!("closed form vs bisection off by {worst_oracle:.1e}"));
    }

    let detail = if failures.is_empty() {
        format!(
            "conservation {worst_cons:.1e}, linear reduction {worst_lin:.1e}, oracle {worst_oracle:.1e}"
        )
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

#[test]
fn acceptance() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (k, run) in criteria {
        let o = run();
        println!("criterion {k:>2}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(k);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
