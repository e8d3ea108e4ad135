use netadvect::bench;
use netadvect::edge;
use netadvect::kernels::{preferred_weight, Scheme, SchemeConfig};
use netadvect::retardation::RetardationModel;

#[test]
fn direct_scheme_limits_harder_at_large_courant() {
    let sc = bench::smooth_gaussian(256, 16).unwrap();
    let exact = sc.exact.clone().unwrap();
    let inverse = edge::solve(&sc.problem, &SchemeConfig::new(Scheme::HighResolution)).unwrap();
    let direct = edge::solve(&sc.problem, &SchemeConfig::new(Scheme::DirectHR)).unwrap();
    assert!(bench::error_norm(&direct, exact.as_ref()) > bench::error_norm(&inverse, exact.as_ref()));
    assert!(edge::dmp_check(&direct).is_empty());
}

#[test]
fn direct_fixed_weight_oscillates_more() {
    let sc = bench::smooth_gaussian(256, 16).unwrap();
    let overshoot = |s: &edge::EdgeSolution| (s.max() - 1.0).max(0.0).max(-s.min());
    let inverse = edge::solve_fixed_weight(&sc.problem, preferred_weight(16.0).unwrap()).unwrap();
    let direct = edge::solve_direct_fixed(&sc.problem).unwrap();
    assert!(overshoot(&direct) > overshoot(&inverse), "{} {}", overshoot(&direct), overshoot(&inverse));
}

#[test]
fn four_shapes_bounds_by_scheme() {
    let hr = SchemeConfig::new(Scheme::HighResolution);
    let mut third_violations = 0;
    for k in 1..=4 {
        let sc = bench::four_shapes(k, 400, 40).unwrap();
        let sol = edge::solve(&sc.problem, &hr).unwrap();
        assert!(edge::dmp_check(&sol).is_empty(), "shape {k}");
        let a = edge::conservation_audit(&sol, &sc.problem).unwrap();
        assert!(a.residual.abs() <= 1e-11 * a.inflow, "shape {k}: {a:?}");
        let third = edge::solve_third_order(&sc.problem).unwrap();
        third_violations += edge::dmp_check(&third).len();
    }
    assert!(third_violations > 0);
}

#[test]
fn smooth_run_conserves() {
    let sc = bench::smooth_gaussian(512, 256).unwrap();
    for scheme in [Scheme::FirstOrder, Scheme::FixedWeight(1.0 / 3.0), Scheme::ThirdOrder, Scheme::WenoHeuristic, Scheme::HighResolution] {
        let sol = edge::solve(&sc.problem, &SchemeConfig::new(scheme)).unwrap();
        let a = edge::conservation_audit(&sol, &sc.problem).unwrap();
        assert!(a.residual.abs() <= 1e-11 * a.inflow, "{}: {a:?}", scheme.name());
    }
    let direct = edge::solve(&sc.problem, &SchemeConfig::new(Scheme::DirectHR)).unwrap();
    assert!(edge::conservation_audit(&direct, &sc.problem).is_err());
}

#[test]
fn isotherm_with_vanishing_quadratic_term_matches_linear() {
    let config = SchemeConfig::default();
    let linear = bench::four_shapes(3, 400, 50).unwrap();
    let mut nonlin = bench::nonlinear_isotherm(3, 400).unwrap();
    nonlin.problem.retardation = RetardationModel::Quadratic { a: 1.0, b: 0.0 };
    let a = edge::solve(&linear.problem, &config).unwrap();
    let b = edge::solve(&nonlin.problem, &config).unwrap();
    let diff = a.values().iter().zip(b.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff <= 1e-12, "{diff}");
}

#[test]
fn isotherm_with_fixed_minimal_courant() {
    let config = SchemeConfig { courant_min: Some(40.0 / 11.0), ..Default::default() };
    for k in 1..=4 {
        let sc = bench::nonlinear_isotherm(k, 400).unwrap();
        let sol = edge::solve(&sc.problem, &config).unwrap();
        assert!(sol.min() >= -1e-12 && sol.max() <= 1.0 + 1e-12, "shape {k}");
        assert!(edge::dmp_check_with(&sol, 1e-12).is_empty());
    }
}

#[test]
fn nonlinear_tail_shock_is_sharper_than_front_rarefaction() {
    // larger concentrations travel slower, so the tail of the pulse steepens
    // into a shock while its front spreads
    let sc = bench::nonlinear_isotherm(1, 800).unwrap();
    let sol = edge::solve(&sc.problem, &SchemeConfig::default()).unwrap();
    let row = sol.row(sol.steps());
    let x = sol.x();
    let peak = row.iter().copied().fold(0.0, f64::max);
    let crossing = |lo: f64, hi: f64, lead: bool| {
        let idx: Vec<usize> = (0..row.len()).filter(|&i| row[i] > lo * peak && row[i] < hi * peak).collect();
        let split = row.iter().position(|&q| q == peak).unwrap();
        let side: Vec<usize> = idx.into_iter().filter(|&i| (i > split) == lead).collect();
        x[*side.iter().max().unwrap()] - x[*side.iter().min().unwrap()]
    };
    let front = crossing(0.1, 0.9, true);
    let tail = crossing(0.1, 0.9, false);
    assert!(tail < 0.5 * front, "front {front} tail {tail}");
}
