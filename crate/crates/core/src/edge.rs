//! Single-edge solvers for the linear advection equation.
//!
//! The compact inverse schemes are solved by space marching: the outer loop
//! runs over node columns `i = 1..=I`, the inner loop over time levels
//! `n = 1..=N`, and every node equation has a single unknown. All schemes
//! are written in conservative form
//!
//! ```text
//! h_i Theta_i^{n+1/2} + tau v^n Q_i^n = h_i Theta_i^{n-1/2} + tau v^n Q_{i-1}^n
//! ```
//!
//! and the time-level fluxes `Theta_i^{n+1/2}` are kept in the solution so the
//! discrete balance can be audited afterwards. Node functions work with
//! fluxes divided by the capacity, so the balance reads
//! `F_new + C Q = F_prev + C Q_left`.

use crate::error::{Error, Result};
use crate::kernels::{
    direct_preferred_weight, limit, preferred_weight_unchecked, weno_heuristic_weight, LimiterBranch, Scheme,
    SchemeConfig, SpaceGrid, TimeGrid,
};
use crate::nonlinear;
use crate::retardation::RetardationModel;

/// Data of a single-edge problem on a space-time grid.
#[derive(Debug, Clone)]
pub struct EdgeProblem {
    pub grid: SpaceGrid,
    pub time: TimeGrid,
    pub retardation: RetardationModel,
    /// `v^n = v(t^n)`, one sample per time level.
    pub velocity: Vec<f64>,
    /// Inflow values `q_0(t^n)` for `n = 0..=N`.
    pub boundary: Vec<f64>,
    /// Initial row `q(x_i, 0)`; entry 0 is overridden by `boundary[0]`.
    pub initial: Vec<f64>,
    /// Values at `t = -tau`. Defaults to a copy of the initial row.
    pub ghost: Option<Vec<f64>>,
}

impl EdgeProblem {
    /// Constant velocity and capacity, zero initial data.
    pub fn linear(grid: SpaceGrid, time: TimeGrid, kappa: f64, velocity: f64, boundary: Vec<f64>) -> Self {
        let cells = grid.cells();
        Self {
            velocity: vec![velocity; time.steps() + 1],
            initial: vec![0.0; cells + 1],
            grid,
            time,
            retardation: RetardationModel::Linear { kappa },
            boundary,
            ghost: None,
        }
    }

    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    pub fn steps(&self) -> usize {
        self.time.steps()
    }

    pub fn validate(&self) -> Result<()> {
        let (cells, steps) = (self.cells(), self.steps());
        self.retardation.validate()?;
        let expect = |name: &str, len: usize, want: usize| {
            if len == want {
                Ok(())
            } else {
                Err(Error::InvalidProblem(format!("{name} has {len} entries, expected {want}")))
            }
        };
        expect("velocity", self.velocity.len(), steps + 1)?;
        expect("boundary", self.boundary.len(), steps + 1)?;
        expect("initial row", self.initial.len(), cells + 1)?;
        if let Some(g) = &self.ghost {
            expect("ghost row", g.len(), cells + 1)?;
        }
        if let Some((n, v)) = self.velocity.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidProblem(format!("velocity at level {n} must be positive, got {v}")));
        }
        let finite = self
            .boundary
            .iter()
            .chain(&self.initial)
            .chain(self.ghost.iter().flatten())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidProblem("boundary and initial data must be finite".into()));
        }
        Ok(())
    }

    /// Local Courant number `C_i^n` computed with `kappa_min`.
    pub fn courant(&self, i: usize, n: usize) -> f64 {
        self.velocity[n] * self.time.tau() / (self.retardation.kappa_min() * self.grid.h(i))
    }

    pub(crate) fn ghost_value(&self, i: usize) -> f64 {
        match &self.ghost {
            Some(g) => g[i],
            None => self.initial[i],
        }
    }

    fn linear_capacity(&self) -> Result<f64> {
        self.retardation
            .capacity()
            .ok_or_else(|| Error::Configuration("this scheme needs a linear retardation model".into()))
    }

    /// `Some(C)` when the Courant number is the same at every node.
    pub fn constant_courant(&self) -> Option<f64> {
        let h = self.grid.uniform_step()?;
        let v0 = self.velocity[0];
        if self.velocity.iter().any(|v| (v - v0).abs() > 1e-12 * v0) {
            return None;
        }
        Some(v0 * self.time.tau() / (self.retardation.kappa_min() * h))
    }
}

/// How a node value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeStatus {
    /// Boundary, initial data, or a scheme without a corrector.
    #[default]
    Direct,
    /// Predictor accepted.
    Predicted,
    /// Corrected; `repeats` counts corrector solves after the first.
    Corrected { repeats: u8 },
    /// Every corrector attempt failed the bound test; first-order flux used.
    Fallback { repeats: u8 },
}

impl NodeStatus {
    pub fn repeats(self) -> u8 {
        match self {
            NodeStatus::Corrected { repeats } | NodeStatus::Fallback { repeats } => repeats,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorrectorStats {
    pub nodes: usize,
    pub predicted: usize,
    pub corrected: usize,
    /// Nodes that needed at least one corrector repetition.
    pub repeated: usize,
    pub fallback: usize,
    pub max_repeats: u8,
}

/// Space-time table of one edge solve. Column-major: node `(i, n)` lives at
/// `i * (N + 1) + n`.
#[derive(Debug, Clone)]
pub struct EdgeSolution {
    pub scheme: Scheme,
    pub time: TimeGrid,
    x: Vec<f64>,
    values: Vec<f64>,
    ghost: Vec<f64>,
    limiter: Option<Vec<f64>>,
    flux: Option<Vec<f64>>,
    status: Vec<NodeStatus>,
}

impl EdgeSolution {
    pub(crate) fn new(problem: &EdgeProblem, scheme: Scheme, limiter: bool, flux: bool) -> Self {
        let (cells, steps) = (problem.cells(), problem.steps());
        let ld = steps + 1;
        let size = (cells + 1) * ld;
        let mut values = vec![0.0; size];
        values[..ld].copy_from_slice(&problem.boundary);
        for i in 1..=cells {
            values[i * ld] = problem.initial[i];
        }
        let mut ghost: Vec<f64> = (0..=cells).map(|i| problem.ghost_value(i)).collect();
        if problem.ghost.is_none() {
            ghost[0] = problem.boundary[0];
        }
        Self {
            scheme,
            time: problem.time,
            x: problem.grid.nodes().to_vec(),
            values,
            ghost,
            limiter: limiter.then(|| vec![0.0; size]),
            flux: flux.then(|| vec![0.0; size]),
            status: vec![NodeStatus::Direct; size],
        }
    }

    #[inline]
    fn idx(&self, i: usize, n: usize) -> usize {
        i * (self.time.steps() + 1) + n
    }

    pub fn cells(&self) -> usize {
        self.x.len() - 1
    }

    pub fn steps(&self) -> usize {
        self.time.steps()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn get(&self, i: usize, n: usize) -> f64 {
        self.values[self.idx(i, n)]
    }

    /// Time series of node `i`.
    pub fn column(&self, i: usize) -> &[f64] {
        let a = self.idx(i, 0);
        &self.values[a..a + self.steps() + 1]
    }

    /// Spatial profile at level `n`.
    pub fn row(&self, n: usize) -> Vec<f64> {
        (0..=self.cells()).map(|i| self.get(i, n)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `t = -tau` used by the first time level.
    pub fn ghost(&self, i: usize) -> f64 {
        self.ghost[i]
    }

    /// Limiter value stored with node `(i, n)`, for the limited schemes.
    pub fn limiter(&self, i: usize, n: usize) -> Option<f64> {
        self.limiter.as_ref().map(|l| l[self.idx(i, n)])
    }

    /// Time-level flux `Theta_i^{n+1/2}` in conserved units, `i >= 1`.
    pub fn flux(&self, i: usize, n: usize) -> Option<f64> {
        self.flux.as_ref().map(|f| f[self.idx(i, n)])
    }

    pub fn has_flux(&self) -> bool {
        self.flux.is_some()
    }

    pub fn status(&self, i: usize, n: usize) -> NodeStatus {
        self.status[self.idx(i, n)]
    }

    pub fn corrector_stats(&self) -> CorrectorStats {
        let mut s = CorrectorStats::default();
        for i in 1..=self.cells() {
            for n in 1..=self.steps() {
                s.nodes += 1;
                let st = self.status(i, n);
                match st {
                    NodeStatus::Direct => {}
                    NodeStatus::Predicted => s.predicted += 1,
                    NodeStatus::Corrected { .. } => s.corrected += 1,
                    NodeStatus::Fallback { .. } => s.fallback += 1,
                }
                if st.repeats() > 0 {
                    s.repeated += 1;
                }
                s.max_repeats = s.max_repeats.max(st.repeats());
            }
        }
        s
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    #[inline]
    pub(crate) fn record(&mut self, i: usize, n: usize, q: f64, flux: f64, psi: f64, status: NodeStatus) {
        let k = self.idx(i, n);
        self.values[k] = q;
        if let Some(f) = self.flux.as_mut() {
            f[k] = flux;
        }
        if let Some(l) = self.limiter.as_mut() {
            l[k] = psi;
        }
        self.status[k] = status;
    }
}

/// Known values around node `(i, n)` of the compact inverse scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStencil {
    /// `Q_i^{n-1}`
    pub prev: f64,
    /// `Q_{i-1}^n`
    pub left: f64,
    /// `Q_{i-1}^{n+1}`
    pub left_next: f64,
    /// `Theta_i^{n-1/2} / kappa`
    pub prev_flux: f64,
}

impl NodeStencil {
    /// Stencil whose previous flux came from the limited form with `psi_prev`.
    pub fn with_limiter(prev: f64, left: f64, left_next: f64, psi_prev: f64) -> Self {
        Self { prev, left, left_next, prev_flux: prev + 0.5 * psi_prev * (left - prev) }
    }

    fn magnitude(&self) -> f64 {
        self.prev.abs().max(self.left.abs()).max(self.left_next.abs())
    }
}

/// `1 + C - (1 - w)/2`; at least `1/2 + C` for `w` in `[0, 1]`.
pub fn weighted_divisor(c: f64, w: f64) -> f64 {
    1.0 + c - 0.5 * (1.0 - w)
}

/// `1 + C - psi/2`; at least `C` for `psi <= 2`.
pub fn limited_divisor(c: f64, psi: f64) -> f64 {
    1.0 + c - 0.5 * psi
}

pub fn weighted_flux(q: f64, st: &NodeStencil, w: f64) -> f64 {
    q + 0.5 * (1.0 - w) * (st.left_next - q) + 0.5 * w * (st.left - st.prev)
}

pub fn limited_flux(q: f64, st: &NodeStencil, psi: f64) -> f64 {
    q + 0.5 * psi * (st.left_next - q)
}

/// Flux at the last time level, where `Q_{i-1}^{N+1}` is not available.
/// `phi = 1` is the `w = 1` stencil.
pub fn top_flux(q: f64, st: &NodeStencil, phi: f64) -> f64 {
    q + 0.5 * phi * (st.left - st.prev)
}

/// Weighted node equation solved for `Q_i^n`.
pub fn weighted_node(st: &NodeStencil, c: f64, w: f64) -> f64 {
    let div = weighted_divisor(c, w);
    assert!(div > 0.0, "non-positive divisor {div} (C = {c}, w = {w})");
    (st.prev_flux + c * st.left - 0.5 * (1.0 - w) * st.left_next - 0.5 * w * (st.left - st.prev)) / div
}

/// Predictor: the weighted node equation with the preferred weight.
pub fn predict_node(st: &NodeStencil, c: f64, wbar: f64) -> f64 {
    weighted_node(st, c, wbar)
}

/// Corrector: the limited node equation with a fixed limiter value.
pub fn correct_node(st: &NodeStencil, c: f64, psi: f64) -> f64 {
    let div = limited_divisor(c, psi);
    assert!(div > 0.0, "non-positive divisor {div} (C = {c}, psi = {psi})");
    (st.prev_flux + c * st.left - 0.5 * psi * st.left_next) / div
}

/// Last-level node equation.
pub fn top_node(st: &NodeStencil, c: f64, phi: f64) -> f64 {
    (st.prev_flux + c * st.left - 0.5 * phi * (st.left - st.prev)) / (1.0 + c)
}

/// `(Q_i^{n-1} + C Q_{i-1}^n) / (1 + C)`.
pub fn first_order_node(prev: f64, left: f64, c: f64) -> f64 {
    (prev + c * left) / (1.0 + c)
}

/// Ratio `num / den`, or `None` when `|den| <= tol * max(1, scale)`.
pub(crate) fn limiter_ratio(num: f64, den: f64, tol: f64, scale: f64) -> Option<f64> {
    if den == 0.0 || den.abs() <= tol * scale.max(1.0) {
        None
    } else {
        Some(num / den)
    }
}

/// Bound test for a limited node: with `phi = psi den / num` (that is
/// `psi / r`), require `0 <= phi <= bound` and `phi - psi_prev >= -2`.
pub(crate) fn limited_bounds_hold(num: f64, den: f64, psi: f64, bound: f64, psi_prev: f64) -> bool {
    if psi == 0.0 || den == 0.0 {
        return true;
    }
    if num == 0.0 {
        return false;
    }
    let phi = psi * den / num;
    phi.is_finite() && phi >= 0.0 && phi <= bound && phi - psi_prev >= -2.0
}

#[derive(Debug, Clone, Copy)]
struct NodeOut {
    q: f64,
    /// Normalized flux `Theta / kappa`.
    flux: f64,
    psi: f64,
    status: NodeStatus,
}

#[derive(Debug, Clone, Copy)]
struct NodeCtx {
    c: f64,
    top: bool,
    st: NodeStencil,
    psi_prev: f64,
}

/// Shared space-marching driver. `init` gets the level-0 stencil (with the
/// ghost value as `prev`), `Q_i^0` and `C_i^0` and returns the normalized
/// flux `Theta_i^{1/2} / kappa` and the seed limiter.
fn march(
    problem: &EdgeProblem,
    scheme: Scheme,
    limiter: bool,
    init: impl Fn(&NodeStencil, f64, f64) -> (f64, f64),
    mut node: impl FnMut(&NodeCtx) -> NodeOut,
) -> Result<EdgeSolution> {
    problem.validate()?;
    let kappa = problem.linear_capacity()?;
    let mut sol = EdgeSolution::new(problem, scheme, limiter, true);
    let (cells, steps) = (problem.cells(), problem.steps());
    let tau = problem.time.tau();
    for i in 1..=cells {
        let h = problem.grid.h(i);
        let st0 = NodeStencil {
            prev: sol.ghost(i),
            left: sol.get(i - 1, 0),
            left_next: sol.get(i - 1, 1),
            prev_flux: f64::NAN,
        };
        let q0 = sol.get(i, 0);
        let (f0, psi0) = init(&st0, q0, problem.velocity[0] * tau / (kappa * h));
        sol.record(i, 0, q0, kappa * f0, psi0, NodeStatus::Direct);
        let (mut prev_flux, mut psi_prev) = (f0, psi0);
        for n in 1..=steps {
            let top = n == steps;
            let st = NodeStencil {
                prev: sol.get(i, n - 1),
                left: sol.get(i - 1, n),
                left_next: if top { f64::NAN } else { sol.get(i - 1, n + 1) },
                prev_flux,
            };
            let c = problem.velocity[n] * tau / (kappa * h);
            let out = node(&NodeCtx { c, top, st, psi_prev });
            sol.record(i, n, out.q, kappa * out.flux, out.psi, out.status);
            prev_flux = out.flux;
            psi_prev = out.psi;
        }
    }
    Ok(sol)
}

fn plain(q: f64, flux: f64) -> NodeOut {
    NodeOut { q, flux, psi: 0.0, status: NodeStatus::Direct }
}

/// First-order implicit upwind scheme.
pub fn solve_first_order(problem: &EdgeProblem) -> Result<EdgeSolution> {
    march(
        problem,
        Scheme::FirstOrder,
        false,
        |_, q0, _| (q0, 0.0),
        |ctx| {
            let q = first_order_node(ctx.st.prev, ctx.st.left, ctx.c);
            plain(q, q)
        },
    )
}

fn solve_weighted_by(problem: &EdgeProblem, scheme: Scheme, weight: impl Fn(f64) -> f64) -> Result<EdgeSolution> {
    march(
        problem,
        scheme,
        false,
        |st0, q0, c0| (weighted_flux(q0, st0, weight(c0)), 0.0),
        |ctx| {
            if ctx.top {
                let q = top_node(&ctx.st, ctx.c, 1.0);
                return plain(q, top_flux(q, &ctx.st, 1.0));
            }
            let w = weight(ctx.c);
            let q = weighted_node(&ctx.st, ctx.c, w);
            plain(q, weighted_flux(q, &ctx.st, w))
        },
    )
}

/// Compact inverse scheme with a constant weight.
pub fn solve_fixed_weight(problem: &EdgeProblem, w: f64) -> Result<EdgeSolution> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Configuration(format!("fixed weight must lie in [0, 1], got {w}")));
    }
    solve_weighted_by(problem, Scheme::FixedWeight(w), |_| w)
}

/// Compact inverse scheme with the preferred weight of the local Courant number.
pub fn solve_third_order(problem: &EdgeProblem) -> Result<EdgeSolution> {
    solve_weighted_by(problem, Scheme::ThirdOrder, preferred_weight_unchecked)
}

/// Predictor with the preferred weight followed by a re-solve with the
/// heuristic smoothness weight.
pub fn solve_weno_heuristic(problem: &EdgeProblem, config: &SchemeConfig) -> Result<EdgeSolution> {
    config.validate()?;
    let eps = config.weno_epsilon;
    let threshold = config.weno_threshold;
    march(
        problem,
        Scheme::WenoHeuristic,
        false,
        |st0, q0, c0| (weighted_flux(q0, st0, preferred_weight_unchecked(c0)), 0.0),
        |ctx| {
            if ctx.top {
                let q = top_node(&ctx.st, ctx.c, 1.0);
                return plain(q, top_flux(q, &ctx.st, 1.0));
            }
            let st = &ctx.st;
            let wbar = preferred_weight_unchecked(ctx.c);
            let qp = predict_node(st, ctx.c, wbar);
            if threshold.is_some_and(|t| qp.abs() >= t) {
                return NodeOut { q: qp, flux: weighted_flux(qp, st, wbar), psi: 0.0, status: NodeStatus::Predicted };
            }
            let w = weno_heuristic_weight(st.left_next - qp, st.left - st.prev, wbar, eps);
            let q = weighted_node(st, ctx.c, w);
            NodeOut { q, flux: weighted_flux(q, st, w), psi: 0.0, status: NodeStatus::Corrected { repeats: 0 } }
        },
    )
}

/// Outcome of one limited node solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrNode {
    pub q: f64,
    /// Normalized flux `Theta / kappa`.
    pub flux: f64,
    pub psi: f64,
    pub status: NodeStatus,
}

/// Predictor-corrector for one interior node of the limited inverse scheme.
/// `psi_prev` must be the limiter that produced `st.prev_flux`.
pub fn hr_node(st: &NodeStencil, c: f64, psi_prev: f64, config: &SchemeConfig) -> HrNode {
    let wbar = preferred_weight_unchecked(c);
    let bound = 2.0 * c + psi_prev;
    let tol = config.denominator_tolerance;
    let num = st.left - st.prev;

    let qp = predict_node(st, c, wbar);
    let den = st.left_next - qp;
    let mut psi = match limiter_ratio(num, den, tol, st.magnitude().max(qp.abs())) {
        None => 0.0,
        Some(r) => {
            let l = limit(r, wbar, bound);
            if l.branch == LimiterBranch::Preferred {
                return HrNode { q: qp, flux: weighted_flux(qp, st, wbar), psi: l.value, status: NodeStatus::Predicted };
            }
            l.value
        }
    };

    let mut repeats: u8 = 0;
    loop {
        let q = correct_node(st, c, psi);
        let den = st.left_next - q;
        if limited_bounds_hold(num, den, psi, bound, psi_prev) {
            return HrNode { q, flux: limited_flux(q, st, psi), psi, status: NodeStatus::Corrected { repeats } };
        }
        if u32::from(repeats) >= config.max_corrector_repeats {
            let q = correct_node(st, c, 0.0);
            return HrNode { q, flux: q, psi: 0.0, status: NodeStatus::Fallback { repeats } };
        }
        repeats += 1;
        psi = match limiter_ratio(num, den, tol, st.magnitude().max(q.abs())) {
            None => 0.0,
            Some(r) => limit(r, wbar, bound).value,
        };
    }
}

/// Last-level node of the limited scheme: `phi = min(1, 2C + psi_prev)`
/// keeps both coefficients non-negative.
pub fn hr_top_node(st: &NodeStencil, c: f64, psi_prev: f64) -> HrNode {
    let phi = (2.0 * c + psi_prev).min(1.0);
    let q = top_node(st, c, phi);
    let status = if phi < 1.0 { NodeStatus::Corrected { repeats: 0 } } else { NodeStatus::Predicted };
    HrNode { q, flux: top_flux(q, st, phi), psi: phi, status }
}

/// Limited predictor-corrector inverse scheme.
pub fn solve_high_resolution(problem: &EdgeProblem, config: &SchemeConfig) -> Result<EdgeSolution> {
    config.validate()?;
    march(
        problem,
        Scheme::HighResolution,
        true,
        |st0, q0, _| (limited_flux(q0, st0, 1.0), 1.0),
        |ctx| {
            let out = if ctx.top {
                hr_top_node(&ctx.st, ctx.c, ctx.psi_prev)
            } else {
                hr_node(&ctx.st, ctx.c, ctx.psi_prev, config)
            };
            NodeOut { q: out.q, flux: out.flux, psi: out.psi, status: out.status }
        },
    )
}

/// Time-marching direct compact scheme. With `limited = false` every node
/// uses the preferred weight; otherwise the predictor-corrector with the
/// limiter bound `2/C + Phi_{i-1}` is applied. The last node of each level
/// uses the `w = 1` stencil since `Q_{I+1}^{n-1}` does not exist.
fn solve_direct(problem: &EdgeProblem, config: &SchemeConfig, limited: bool) -> Result<EdgeSolution> {
    problem.validate()?;
    problem.linear_capacity()?;
    let c = problem
        .constant_courant()
        .ok_or_else(|| Error::Configuration("the direct scheme needs a constant Courant number".into()))?;
    let wbar = direct_preferred_weight(c);
    let tol = config.denominator_tolerance;
    let mut sol = EdgeSolution::new(problem, Scheme::DirectHR, true, false);
    let (cells, steps) = (problem.cells(), problem.steps());
    for n in 1..=steps {
        // inflow flux seeded with the central limiter
        let mut phi_prev = 1.0;
        let q0 = sol.get(0, n);
        let mut flux_prev = q0 + 0.5 * (sol.get(1, n - 1) - q0);
        for i in 1..=cells {
            let prev = sol.get(i, n - 1);
            let left = sol.get(i - 1, n);
            let rhs = prev + c * flux_prev;
            let bound = 2.0 / c + phi_prev;
            let (q, flux, phi, status) = if i == cells {
                let phi = if limited { bound.min(1.0) } else { 1.0 };
                // q + C (q + phi/2 (prev - left)) = rhs
                let q = (rhs - 0.5 * c * phi * (prev - left)) / (1.0 + c);
                (q, q + 0.5 * phi * (prev - left), phi, NodeStatus::Direct)
            } else {
                let right = sol.get(i + 1, n - 1);
                let predicted = |w: f64| {
                    (rhs - 0.5 * c * (1.0 - w) * right - 0.5 * c * w * (prev - left)) / (1.0 + c - 0.5 * c * (1.0 - w))
                };
                let qp = predicted(wbar);
                let fp = qp + 0.5 * (1.0 - wbar) * (right - qp) + 0.5 * wbar * (prev - left);
                if !limited {
                    (qp, fp, 0.0, NodeStatus::Direct)
                } else {
                    let num = prev - left;
                    let scale = prev.abs().max(left.abs()).max(right.abs()).max(qp.abs());
                    let corrected = |phi: f64| (rhs - 0.5 * c * phi * right) / (1.0 + c - 0.5 * c * phi);
                    match limiter_ratio(num, right - qp, tol, scale).map(|s| limit(s, wbar, bound)) {
                        Some(l) if l.branch == LimiterBranch::Preferred => (qp, fp, l.value, NodeStatus::Predicted),
                        l => {
                            let phi = l.map_or(0.0, |l| l.value);
                            let q = corrected(phi);
                            if limited_bounds_hold(num, right - q, phi, bound, phi_prev) {
                                (q, q + 0.5 * phi * (right - q), phi, NodeStatus::Corrected { repeats: 0 })
                            } else {
                                let q = corrected(0.0);
                                (q, q, 0.0, NodeStatus::Fallback { repeats: 0 })
                            }
                        }
                    }
                }
            };
            sol.record(i, n, q, f64::NAN, phi, status);
            flux_prev = flux;
            phi_prev = phi;
        }
    }
    Ok(sol)
}

/// Limited direct compact scheme (constant Courant number only).
pub fn solve_direct_hr(problem: &EdgeProblem, config: &SchemeConfig) -> Result<EdgeSolution> {
    config.validate()?;
    solve_direct(problem, config, true)
}

/// Direct compact scheme with the fixed preferred weight.
pub fn solve_direct_fixed(problem: &EdgeProblem) -> Result<EdgeSolution> {
    solve_direct(problem, &SchemeConfig::default(), false)
}

/// Solves with the scheme selected in `config`; nonlinear retardation
/// models are routed to the nonlinear solver.
pub fn solve(problem: &EdgeProblem, config: &SchemeConfig) -> Result<EdgeSolution> {
    config.validate()?;
    if !problem.retardation.is_linear() {
        return nonlinear::solve_nonlinear(problem, config);
    }
    match config.scheme {
        Scheme::FirstOrder => solve_first_order(problem),
        Scheme::FixedWeight(w) => solve_fixed_weight(problem, w),
        Scheme::ThirdOrder => solve_third_order(problem),
        Scheme::WenoHeuristic => solve_weno_heuristic(problem, config),
        Scheme::HighResolution => solve_high_resolution(problem, config),
        Scheme::DirectHR => solve_direct_hr(problem, config),
    }
}

/// A node where the local bound `min(Q_i^{n-1}, Q_{i-1}^n) <= Q_i^n <= max(...)`
/// fails by `excess`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmpViolation {
    pub i: usize,
    pub n: usize,
    pub excess: f64,
}

/// Checks the local bound at every interior node, with tolerance
/// `1e-13 * max|Q|`.
pub fn dmp_check(solution: &EdgeSolution) -> Vec<DmpViolation> {
    dmp_check_with(solution, 1e-13)
}

pub fn dmp_check_with(solution: &EdgeSolution, rel_tol: f64) -> Vec<DmpViolation> {
    let scale = solution.values.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let tol = rel_tol * scale;
    let mut out = Vec::new();
    for i in 1..=solution.cells() {
        for n in 1..=solution.steps() {
            let (a, b) = (solution.get(i, n - 1), solution.get(i - 1, n));
            let q = solution.get(i, n);
            let excess = (a.min(b) - q).max(q - a.max(b));
            if excess > tol || q.is_nan() {
                out.push(DmpViolation { i, n, excess });
            }
        }
    }
    out
}

/// Discrete balance of one edge solve, in conserved units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservationAudit {
    /// `sum_i h_i Theta_i^{N+1/2}`
    pub stored: f64,
    /// `sum_i h_i Theta_i^{1/2}`
    pub initial: f64,
    /// `sum_{n>=1} tau v^n Q_0^n`
    pub inflow: f64,
    /// `sum_{n>=1} tau v^n Q_I^n`
    pub outflow: f64,
    /// `stored - initial - inflow + outflow`
    pub residual: f64,
    /// Sum of absolute values of all terms; the natural scale of `residual`.
    pub throughput: f64,
}

impl ConservationAudit {
    pub fn relative_residual(&self) -> f64 {
        if self.throughput == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / self.throughput
        }
    }
}

pub fn conservation_audit(solution: &EdgeSolution, problem: &EdgeProblem) -> Result<ConservationAudit> {
    if !solution.has_flux() {
        return Err(Error::Unsupported(format!(
            "scheme {} does not record time-level fluxes",
            solution.scheme.name()
        )));
    }
    if solution.cells() != problem.cells() || solution.steps() != problem.steps() {
        return Err(Error::InvalidProblem("solution and problem grids differ".into()));
    }
    let (cells, steps) = (solution.cells(), solution.steps());
    let tau = problem.time.tau();
    let mut a = ConservationAudit::default();
    for i in 1..=cells {
        let h = problem.grid.h(i);
        let top = h * solution.flux(i, steps).unwrap_or(0.0);
        let bottom = h * solution.flux(i, 0).unwrap_or(0.0);
        a.stored += top;
        a.initial += bottom;
        a.throughput += top.abs() + bottom.abs();
    }
    for n in 1..=steps {
        let s = tau * problem.velocity[n];
        let (qin, qout) = (s * solution.get(0, n), s * solution.get(cells, n));
        a.inflow += qin;
        a.outflow += qout;
        a.throughput += qin.abs() + qout.abs();
    }
    a.residual = a.stored - a.initial - a.inflow + a.outflow;
    Ok(a)
}
