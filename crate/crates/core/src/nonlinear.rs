//! Space marching with a nonlinear retardation `theta(q)`.
//!
//! The balance per node is `Theta_i^{n+1/2} + lambda Q_i^n =
//! Theta_i^{n-1/2} + lambda Q_{i-1}^n` with `lambda = tau v^n / h_i`, and every
//! flux is affine in `theta(Q_i^n)`. Each node therefore reduces to a scalar
//! equation `a theta(Q) + lambda Q = R` with `a >= 0`, which is monotone and
//! solved by a safeguarded Newton iteration. Limiter ratios are formed from
//! `theta` differences.

use crate::edge::{limited_bounds_hold, limiter_ratio, EdgeProblem, EdgeSolution, NodeStatus};
use crate::error::{Error, Result};
use crate::kernels::{limit, preferred_weight_unchecked, LimiterBranch, Scheme, SchemeConfig};
use crate::retardation::RetardationModel;

const ROOT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 60;
const MAX_WIDEN: usize = 8;

/// `(Q_i - Q_{i-1}) / (theta(Q_i) - theta(Q_{i-1})) * tau v / h`, or
/// `tau v / (theta'(Q_i) h)` when the values agree.
pub fn nonlinear_courant(q_i: f64, q_im1: f64, tau: f64, v: f64, h: f64, model: &RetardationModel) -> f64 {
    courant_from_lambda(q_i, q_im1, tau * v / h, model)
}

fn courant_from_lambda(q_i: f64, q_im1: f64, lambda: f64, model: &RetardationModel) -> f64 {
    if let Some(kappa) = model.capacity() {
        return lambda / kappa;
    }
    let dq = q_i - q_im1;
    let dtheta = model.theta(q_i) - model.theta(q_im1);
    if dq == 0.0 || dtheta == 0.0 {
        lambda / model.dtheta(q_i)
    } else {
        dq / dtheta * lambda
    }
}

/// `F(Q) = a theta(Q) + lambda Q - rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearNodeEquation {
    pub model: RetardationModel,
    pub a: f64,
    pub lambda: f64,
    pub rhs: f64,
}

impl NonlinearNodeEquation {
    pub fn residual(&self, q: f64) -> f64 {
        self.a * self.model.theta(q) + self.lambda * q - self.rhs
    }

    pub fn derivative(&self, q: f64) -> f64 {
        self.a * self.model.dtheta(q) + self.lambda
    }

    fn scale(&self, q: f64) -> f64 {
        (self.a * self.model.theta(q)).abs().max((self.lambda * q).abs()).max(self.rhs.abs()).max(f64::MIN_POSITIVE)
    }
}

/// Root of a monotone node equation inside `[lo, hi]`. The bracket is
/// widened geometrically (up to 8 times) when it does not contain a sign
/// change.
pub fn solve_node_scalar(eq: &NonlinearNodeEquation, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let (mut flo, mut fhi) = (eq.residual(lo), eq.residual(hi));
    debug_assert!(fhi >= flo, "node equation is not monotone on [{lo}, {hi}]");
    let mut width = (hi - lo).max(1e-3 * lo.abs().max(hi.abs()).max(1.0));
    let mut widened = 0;
    while flo > 0.0 || fhi < 0.0 {
        if widened == MAX_WIDEN {
            return Err(Error::NotBracketed { lo, hi });
        }
        if flo > 0.0 {
            lo -= width;
            flo = eq.residual(lo);
        }
        if fhi < 0.0 {
            hi += width;
            fhi = eq.residual(hi);
        }
        width *= 2.0;
        widened += 1;
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let f = eq.residual(x);
        if f.abs() <= ROOT_TOL * eq.scale(x) {
            return Ok(x);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = eq.derivative(x);
        let newton = x - f / d;
        x = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Known values around a node, in concentration and `theta` units.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    prev: f64,
    left: f64,
    left_next: f64,
    th_prev: f64,
    th_left: f64,
    th_left_next: f64,
    /// `Theta_i^{n-1/2}` (conserved units)
    prev_flux: f64,
}

impl Stencil {
    fn bracket(&self, top: bool) -> (f64, f64) {
        let mut lo = self.prev.min(self.left);
        let mut hi = self.prev.max(self.left);
        if !top {
            lo = lo.min(self.left_next);
            hi = hi.max(self.left_next);
        }
        (lo, hi)
    }

    fn magnitude(&self) -> f64 {
        self.th_prev.abs().max(self.th_left.abs()).max(self.th_left_next.abs())
    }
}

struct NodeSolver<'a> {
    model: RetardationModel,
    config: &'a SchemeConfig,
    lambda: f64,
    st: Stencil,
    top: bool,
}

struct NodeOut {
    q: f64,
    flux: f64,
    psi: f64,
    status: NodeStatus,
}

impl NodeSolver<'_> {
    fn solve(&self, a: f64, rhs: f64) -> Result<f64> {
        let eq = NonlinearNodeEquation { model: self.model, a, lambda: self.lambda, rhs };
        let (lo, hi) = self.st.bracket(self.top);
        solve_node_scalar(&eq, lo, hi)
    }

    fn base_rhs(&self) -> f64 {
        self.st.prev_flux + self.lambda * self.st.left
    }

    /// Courant number entering the limiter bound, evaluated at `q`.
    fn courant(&self, q: f64) -> f64 {
        self.config
            .courant_min
            .unwrap_or_else(|| courant_from_lambda(q, self.st.left, self.lambda, &self.model))
    }

    /// Preferred weight from the Courant number linearized at `Q_i^{n-1}`.
    fn preferred_weight(&self) -> f64 {
        preferred_weight_unchecked(self.lambda / self.model.dtheta(self.st.prev))
    }

    fn first_order(&self) -> Result<NodeOut> {
        let q = self.solve(1.0, self.base_rhs())?;
        Ok(NodeOut { q, flux: self.model.theta(q), psi: 0.0, status: NodeStatus::Direct })
    }

    fn top(&self, phi: f64, status: NodeStatus) -> Result<NodeOut> {
        let jump = self.st.th_left - self.st.th_prev;
        let q = self.solve(1.0, self.base_rhs() - 0.5 * phi * jump)?;
        Ok(NodeOut { q, flux: self.model.theta(q) + 0.5 * phi * jump, psi: phi, status })
    }

    fn weighted(&self, w: f64, status: NodeStatus) -> Result<NodeOut> {
        let st = &self.st;
        let jump = st.th_left - st.th_prev;
        let rhs = self.base_rhs() - 0.5 * (1.0 - w) * st.th_left_next - 0.5 * w * jump;
        let q = self.solve(0.5 * (1.0 + w), rhs)?;
        let th = self.model.theta(q);
        let flux = th + 0.5 * (1.0 - w) * (st.th_left_next - th) + 0.5 * w * jump;
        Ok(NodeOut { q, flux, psi: 0.0, status })
    }

    fn limited(&self, psi: f64) -> Result<(f64, f64)> {
        let rhs = self.base_rhs() - 0.5 * psi * self.st.th_left_next;
        let q = self.solve(1.0 - 0.5 * psi, rhs)?;
        let th = self.model.theta(q);
        Ok((q, th + 0.5 * psi * (self.st.th_left_next - th)))
    }

    /// Lower bound of the Courant number over the stencil, for the last level.
    fn courant_lower(&self) -> f64 {
        self.config.courant_min.unwrap_or_else(|| {
            let d = self.model.dtheta(self.st.prev).max(self.model.dtheta(self.st.left));
            self.lambda / d
        })
    }

    fn hr(&self, psi_prev: f64) -> Result<NodeOut> {
        let st = &self.st;
        if self.top {
            let phi = (2.0 * self.courant_lower() + psi_prev).min(1.0);
            let status = if phi < 1.0 { NodeStatus::Corrected { repeats: 0 } } else { NodeStatus::Predicted };
            return self.top(phi, status);
        }
        let tol = self.config.denominator_tolerance;
        let num = st.th_left - st.th_prev;
        let wbar = self.preferred_weight();

        let pred = self.weighted(wbar, NodeStatus::Predicted)?;
        let th_p = self.model.theta(pred.q);
        let scale = st.magnitude().max(th_p.abs());
        let mut psi = match limiter_ratio(num, st.th_left_next - th_p, tol, scale) {
            None => 0.0,
            Some(r) => {
                let l = limit(r, wbar, 2.0 * self.courant(pred.q) + psi_prev);
                if l.branch == LimiterBranch::Preferred {
                    return Ok(NodeOut { psi: l.value, ..pred });
                }
                l.value
            }
        };

        let mut repeats: u8 = 0;
        loop {
            let (q, flux) = self.limited(psi)?;
            let th = self.model.theta(q);
            let bound = 2.0 * self.courant(q) + psi_prev;
            if limited_bounds_hold(num, st.th_left_next - th, psi, bound, psi_prev) {
                return Ok(NodeOut { q, flux, psi, status: NodeStatus::Corrected { repeats } });
            }
            if u32::from(repeats) >= self.config.max_corrector_repeats {
                let out = self.first_order()?;
                return Ok(NodeOut { status: NodeStatus::Fallback { repeats }, ..out });
            }
            repeats += 1;
            psi = match limiter_ratio(num, st.th_left_next - th, tol, st.magnitude().max(th.abs())) {
                None => 0.0,
                Some(r) => limit(r, wbar, bound).value,
            };
        }
    }
}

/// Which flux family drives the nonlinear march.
#[derive(Debug, Clone, Copy)]
enum Family {
    FirstOrder,
    Weighted(Option<f64>),
    Limited,
}

fn march(problem: &EdgeProblem, config: &SchemeConfig, family: Family) -> Result<EdgeSolution> {
    problem.validate()?;
    config.validate()?;
    let model = problem.retardation;
    let limited = matches!(family, Family::Limited);
    let mut sol = EdgeSolution::new(problem, config.scheme, limited, true);
    let (cells, steps) = (problem.cells(), problem.steps());
    let tau = problem.time.tau();
    for i in 1..=cells {
        let h = problem.grid.h(i);
        let q0 = sol.get(i, 0);
        let th0 = model.theta(q0);
        let th_a = model.theta(sol.get(i - 1, 1));
        let th_b = model.theta(sol.get(i - 1, 0));
        let th_g = model.theta(sol.ghost(i));
        let (f0, psi0) = match family {
            Family::FirstOrder => (th0, 0.0),
            Family::Weighted(w) => {
                let w = w.unwrap_or_else(|| preferred_weight_unchecked(problem.velocity[0] * tau / (h * model.dtheta(q0))));
                (th0 + 0.5 * (1.0 - w) * (th_a - th0) + 0.5 * w * (th_b - th_g), 0.0)
            }
            Family::Limited => (th0 + 0.5 * (th_a - th0), 1.0),
        };
        sol.record(i, 0, q0, f0, psi0, NodeStatus::Direct);
        let (mut prev_flux, mut psi_prev) = (f0, psi0);
        for n in 1..=steps {
            let top = n == steps;
            let (prev, left) = (sol.get(i, n - 1), sol.get(i - 1, n));
            let left_next = if top { left } else { sol.get(i - 1, n + 1) };
            let st = Stencil {
                prev,
                left,
                left_next,
                th_prev: model.theta(prev),
                th_left: model.theta(left),
                th_left_next: model.theta(left_next),
                prev_flux,
            };
            let node = NodeSolver { model, config, lambda: tau * problem.velocity[n] / h, st, top };
            let out = match family {
                Family::FirstOrder => node.first_order()?,
                Family::Weighted(_) if top => node.top(1.0, NodeStatus::Direct)?,
                Family::Weighted(w) => node.weighted(w.unwrap_or_else(|| node.preferred_weight()), NodeStatus::Direct)?,
                Family::Limited => node.hr(psi_prev)?,
            };
            sol.record(i, n, out.q, out.flux, out.psi, out.status);
            prev_flux = out.flux;
            psi_prev = out.psi;
        }
    }
    Ok(sol)
}

/// Limited predictor-corrector scheme for a general retardation model.
pub fn solve_nonlinear_hr(problem: &EdgeProblem, config: &SchemeConfig) -> Result<EdgeSolution> {
    let config = SchemeConfig { scheme: Scheme::HighResolution, ..config.clone() };
    march(problem, &config, Family::Limited)
}

/// First-order implicit scheme `theta(Q) + lambda Q = theta(Q_old) + lambda Q_left`.
pub fn solve_nonlinear_first_order(problem: &EdgeProblem) -> Result<EdgeSolution> {
    march(problem, &SchemeConfig::new(Scheme::FirstOrder), Family::FirstOrder)
}

/// Dispatches on the configured scheme. The heuristic weights and the
/// direct scheme are only available for the linear model.
pub fn solve_nonlinear(problem: &EdgeProblem, config: &SchemeConfig) -> Result<EdgeSolution> {
    match config.scheme {
        Scheme::FirstOrder => march(problem, config, Family::FirstOrder),
        Scheme::FixedWeight(w) => march(problem, config, Family::Weighted(Some(w))),
        Scheme::ThirdOrder => march(problem, config, Family::Weighted(None)),
        Scheme::HighResolution => march(problem, config, Family::Limited),
        other => Err(Error::Unsupported(format!(
            "scheme {} is not available with nonlinear retardation",
            other.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge::{conservation_audit, dmp_check_with, solve_high_resolution};
    use crate::kernels::{SpaceGrid, TimeGrid};

    const QUAD: RetardationModel = RetardationModel::Quadratic { a: 0.9, b: 0.1 };

    #[test]
    fn courant_examples() {
        let lin = RetardationModel::Linear { kappa: 2.0 };
        assert_eq!(nonlinear_courant(0.3, 0.9, 0.5, 1.0, 0.25, &lin), 1.0);
        assert!((nonlinear_courant(1.0, 0.0, 0.5, 1.0, 0.25, &QUAD) - 2.0).abs() < 1e-15);
        assert!((nonlinear_courant(1.0, 1.0, 0.5, 1.0, 0.25, &QUAD) - 2.0 / 1.1).abs() < 1e-15);
    }

    #[test]
    fn quadratic_root() {
        let eq = NonlinearNodeEquation { model: QUAD, a: 1.0, lambda: 1.0, rhs: 1.9 };
        let q = solve_node_scalar(&eq, 0.0, 1.0).unwrap();
        let exact = (-19.0 + 437f64.sqrt()) / 2.0;
        assert!((q - exact).abs() < 1e-12, "{q} vs {exact}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let eq = NonlinearNodeEquation { model: QUAD, a: 0.4, lambda: 3.0, rhs: 0.0 };
        assert_eq!(solve_node_scalar(&eq, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn affine_equation_matches_closed_form() {
        let model = RetardationModel::Linear { kappa: 1.7 };
        let eq = NonlinearNodeEquation { model, a: 0.6, lambda: 2.5, rhs: 1.3 };
        let q = solve_node_scalar(&eq, -1.0, 1.0).unwrap();
        assert!((q - 1.3 / (0.6 * 1.7 + 2.5)).abs() < 1e-15);
    }

    #[test]
    fn bracket_is_widened() {
        let eq = NonlinearNodeEquation { model: QUAD, a: 1.0, lambda: 1.0, rhs: 5.0 };
        let q = solve_node_scalar(&eq, 0.0, 0.1).unwrap();
        assert!(eq.residual(q).abs() < 1e-11);
        let far = NonlinearNodeEquation { model: QUAD, a: 0.0, lambda: 1.0, rhs: 1e9 };
        assert!(matches!(solve_node_scalar(&far, 0.0, 0.1), Err(Error::NotBracketed { .. })));
    }

    fn pulse_problem(model: RetardationModel) -> EdgeProblem {
        let grid = SpaceGrid::uniform(2.0, 60).unwrap();
        let time = TimeGrid::new(1.5, 30).unwrap();
        let boundary = (0..=30).map(|n| if (0.1..0.5).contains(&time.time(n)) { 1.0 } else { 0.0 }).collect();
        let mut p = EdgeProblem::linear(grid, time, 1.0, 1.0, boundary);
        p.retardation = model;
        p
    }

    #[test]
    fn linear_model_reduces_to_linear_solver() {
        let p = pulse_problem(RetardationModel::Linear { kappa: 1.3 });
        let cfg = SchemeConfig::default();
        let a = solve_nonlinear_hr(&p, &cfg).unwrap();
        let b = solve_high_resolution(&p, &cfg).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn quadratic_pulse_is_bounded_and_conservative() {
        let p = pulse_problem(QUAD);
        let sol = solve_nonlinear_hr(&p, &SchemeConfig::default()).unwrap();
        assert!(sol.min() >= -1e-12 && sol.max() <= 1.0 + 1e-12);
        assert!(dmp_check_with(&sol, 1e-12).is_empty());
        let audit = conservation_audit(&sol, &p).unwrap();
        assert!(audit.relative_residual() < 1e-10, "{audit:?}");
    }

    #[test]
    fn constant_inflow_rises_monotonically() {
        let grid = SpaceGrid::uniform(1.0, 20).unwrap();
        let time = TimeGrid::new(2.0, 20).unwrap();
        let mut p = EdgeProblem::linear(grid, time, 1.0, 1.0, vec![0.8; 21]);
        p.retardation = QUAD;
        for sol in [solve_nonlinear_hr(&p, &SchemeConfig::default()).unwrap(), solve_nonlinear_first_order(&p).unwrap()] {
            for i in 1..=20 {
                for n in 1..=20 {
                    assert!(sol.get(i, n) >= sol.get(i, n - 1) - 1e-14);
                    assert!(sol.get(i, n) <= 0.8 + 1e-14);
                }
            }
        }
    }
}
