//! Reference scenarios, the error norm and convergence tables.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::edge::{self, EdgeProblem, EdgeSolution};
use crate::error::{Error, Result};
use crate::kernels::{SchemeConfig, SpaceGrid, TimeGrid};
use crate::network::{self, NetworkEdge, NetworkModel, Vertex, VertexKind};
use crate::netfile::{Boundary, Coupling, EdgeEntry, KindName, NetworkFile, Signal, TimeSection, Velocity, VertexEntry};
use crate::retardation::RetardationModel;

/// Exact solution `q(x, t)` in edge-local coordinates.
pub type Exact = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A single-edge problem with an optional exact solution.
#[derive(Clone)]
pub struct EdgeScenario {
    pub name: String,
    pub problem: EdgeProblem,
    pub exact: Option<Exact>,
}

impl std::fmt::Debug for EdgeScenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EdgeScenario")
            .field("name", &self.name)
            .field("cells", &self.problem.cells())
            .field("steps", &self.problem.steps())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

fn edge_scenario(name: String, grid: SpaceGrid, time: TimeGrid, exact: Exact) -> EdgeScenario {
    let boundary = (0..=time.steps()).map(|n| exact(0.0, time.time(n))).collect();
    let mut problem = EdgeProblem::linear(grid, time, 1.0, 1.0, boundary);
    problem.initial = problem.grid.nodes().iter().map(|&x| exact(x, 0.0)).collect();
    EdgeScenario { name, problem, exact: Some(exact) }
}

/// Gaussian `exp(-40 (x - t + 1)^2)` on `(0, 2)` up to `T = 2` with unit
/// speed; the Courant number is `I / N`.
pub fn smooth_gaussian(cells: usize, steps: usize) -> Result<EdgeScenario> {
    let grid = SpaceGrid::uniform(2.0, cells)?;
    let time = TimeGrid::new(2.0, steps)?;
    let exact: Exact = Arc::new(|x, t| (-40.0 * (x - t + 1.0).powi(2)).exp());
    Ok(edge_scenario(format!("smooth_I{cells}_N{steps}"), grid, time, exact))
}

/// `smooth_gaussian` with `N = I / C`.
pub fn smooth_gaussian_courant(cells: usize, courant: f64) -> Result<EdgeScenario> {
    let steps = cells as f64 / courant;
    if !(steps >= 1.0 && steps.fract() == 0.0) {
        return Err(Error::Domain(format!("I = {cells} is not a multiple of C = {courant}")));
    }
    smooth_gaussian(cells, steps as usize)
}

/// Right ends `a_k` of the four shapes.
pub const SHAPE_OFFSETS: [f64; 4] = [0.6, 0.2, -0.2, -0.6];

/// Shape `k` (1-based) as a function of the time `s` since its leading edge
/// entered, supported on `[0, 0.4]`: a square pulse, a triangle, a
/// half-cosine hump and a smooth compactly supported bump, all with range
/// `[0, 1]`.
pub fn shape(k: usize, s: f64) -> f64 {
    let z = (s - 0.2) / 0.2;
    if !(0.0..=0.4).contains(&s) {
        return 0.0;
    }
    match k {
        1 => {
            if (0.05..=0.35).contains(&s) {
                1.0
            } else {
                0.0
            }
        }
        2 => (1.0 - z.abs()).max(0.0),
        3 => (0.5 * PI * z).cos().max(0.0),
        4 => {
            if z.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - z * z)).exp()
            } else {
                0.0
            }
        }
        _ => panic!("shape index must be 1..=4, got {k}"),
    }
}

fn shape_cells(k: usize, cells: usize) -> Result<usize> {
    if !(1..=4).contains(&k) {
        return Err(Error::Domain(format!("shape index must be 1..=4, got {k}")));
    }
    let c = (3.0 - SHAPE_OFFSETS[k - 1]) * cells as f64 / 4.0;
    Ok(c.round() as usize)
}

/// Shape `k` entering `(a_k, 3)` with unit speed, `T = 2`. `cells` counts
/// cells over a reference length of 4, so `h = 4 / cells`; the reference
/// `(1600, 160)` gives `h = 0.0025`, `tau = 0.0125` and `C = 5`.
pub fn four_shapes(k: usize, cells: usize, steps: usize) -> Result<EdgeScenario> {
    let local = shape_cells(k, cells)?;
    let grid = SpaceGrid::uniform(3.0 - SHAPE_OFFSETS[k - 1], local)?;
    let time = TimeGrid::new(2.0, steps)?;
    let exact: Exact = Arc::new(move |x, t| shape(k, t - x));
    Ok(edge_scenario(format!("shape{k}"), grid, time, exact))
}

pub const ISOTHERM: RetardationModel = RetardationModel::Quadratic { a: 0.9, b: 0.1 };

/// Shape `k` with retardation `0.9 q + 0.1 q^2`, `h = 4 / cells`,
/// `tau = 4 h`, so `C_max = 40/9` and `C_min = 40/11`. `cells` must be a
/// multiple of 8. The attached exact solution is that of the linear problem
/// and only serves as a visual reference.
pub fn nonlinear_isotherm(k: usize, cells: usize) -> Result<EdgeScenario> {
    if !cells.is_multiple_of(8) {
        return Err(Error::Domain(format!("cell count {cells} must be a multiple of 8")));
    }
    let mut s = four_shapes(k, cells, cells / 8)?;
    s.name = format!("isotherm{k}");
    s.problem.retardation = ISOTHERM;
    Ok(s)
}

/// `sum_{i,n} |Q_i^n - q(x_i, t^n)|` without any mesh weighting.
pub fn error_sum(solution: &EdgeSolution, exact: &dyn Fn(f64, f64) -> f64) -> f64 {
    let mut e = 0.0;
    for (i, &x) in solution.x().iter().enumerate() {
        for n in 0..=solution.steps() {
            e += (solution.get(i, n) - exact(x, solution.time.time(n))).abs();
        }
    }
    e
}

/// Space-time L1 error: [`error_sum`] scaled by `tau` and the mean cell
/// size. This is the norm whose magnitudes and rates appear in the
/// published convergence tables (first order, C = 2, I = 256 gives 0.0868).
pub fn error_norm(solution: &EdgeSolution, exact: &dyn Fn(f64, f64) -> f64) -> f64 {
    let x = solution.x();
    let h = (x[x.len() - 1] - x[0]) / solution.cells() as f64;
    h * solution.time.tau() * error_sum(solution, exact)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub steps: usize,
    pub error: f64,
    /// `log2(E_prev / E)`; `None` on the first row.
    pub eoc: Option<f64>,
    /// Extremes of the final time level.
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scheme: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn last_eoc(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.eoc)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("I,N,E,EOC,min,max\n");
        for r in &self.rows {
            let eoc = r.eoc.map_or_else(String::new, |e| format!("{e:.16e}"));
            s.push_str(&format!(
                "{},{},{:.16e},{},{:.16e},{:.16e}\n",
                r.cells, r.steps, r.error, eoc, r.min, r.max
            ));
        }
        s
    }
}

/// Runs a doubling sequence and tabulates errors and convergence orders.
pub fn convergence_study(
    levels: &[(usize, usize)],
    build: impl Fn(usize, usize) -> Result<EdgeScenario>,
    config: &SchemeConfig,
) -> Result<ConvergenceReport> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for &(cells, steps) in levels {
        let sc = build(cells, steps)?;
        let exact = sc
            .exact
            .clone()
            .ok_or_else(|| Error::Unsupported(format!("scenario {} has no exact solution", sc.name)))?;
        let sol = edge::solve(&sc.problem, config)?;
        let error = error_norm(&sol, exact.as_ref());
        let last = sol.row(sol.steps());
        let eoc = rows.last().map(|p| (p.error / error).log2());
        rows.push(ConvergenceRow {
            cells,
            steps,
            error,
            eoc,
            min: last.iter().copied().fold(f64::INFINITY, f64::min),
            max: last.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    Ok(ConvergenceReport { scheme: config.scheme.name(), rows })
}

/// Doubling levels `(I, I / C)` from `first` to `last` cells.
pub fn doubling(first: usize, last: usize, courant: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = first;
    while i <= last {
        out.push((i, i / courant));
        i *= 2;
    }
    out
}

/// Space-time resolution of the triangular network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TriangleResolution {
    /// `tau = 5/16`, `h = 1/2` on every edge.
    Coarse,
    /// `tau = 5/16` with per-edge steps giving `C = 2.5` (edge 5: `2.174`).
    Fine,
    /// The same `h` on every edge.
    Uniform { h: f64, tau: f64 },
}

pub const TRIANGLE_HORIZON: f64 = 70.0;
const TRIANGLE_LENGTHS: [f64; 6] = [5.0, 20.0, 20.0, 30.0, 20.0, 30.0];
const TRIANGLE_SPEEDS: [f64; 6] = [1.0, 2.0, 1.0, 1.0, 40.0 / 23.0, 1.0];

fn vertex(id: &str, kind: KindName) -> VertexEntry {
    VertexEntry { id: id.into(), kind }
}

/// The six-edge triangular network: one inflow, splits at `p1` (3/4, 1/4)
/// and `p2` (2/3, 1/3), merge at `p3`, two outflows. The sine inflow and the
/// initial Gaussian on edge 1 cancel on edge 6 for large times.
pub fn triangle_file(resolution: TriangleResolution) -> Result<NetworkFile> {
    let (tau, steps_h): (f64, [f64; 6]) = match resolution {
        TriangleResolution::Coarse => (5.0 / 16.0, [0.5; 6]),
        TriangleResolution::Fine => (5.0 / 16.0, [0.125, 0.25, 0.125, 0.125, 0.25, 0.125]),
        TriangleResolution::Uniform { h, tau } => (tau, [h; 6]),
    };
    let steps = (TRIANGLE_HORIZON / tau).round();
    if (steps * tau - TRIANGLE_HORIZON).abs() > 1e-9 {
        return Err(Error::Domain(format!("tau = {tau} does not divide T = {TRIANGLE_HORIZON}")));
    }
    let ends = [("in", "p1"), ("p1", "p2"), ("p1", "p3"), ("p2", "out4"), ("p2", "p3"), ("p3", "out6")];
    let mut edges = Vec::new();
    for k in 0..6 {
        let cells = TRIANGLE_LENGTHS[k] / steps_h[k];
        if (cells - cells.round()).abs() > 1e-9 {
            return Err(Error::Domain(format!("h = {} does not divide edge {}", steps_h[k], k + 1)));
        }
        edges.push(EdgeEntry {
            id: format!("e{}", k + 1),
            from: ends[k].0.into(),
            to: ends[k].1.into(),
            length: TRIANGLE_LENGTHS[k],
            kappa: Some(1.0),
            diameter: None,
            cells: cells.round() as usize,
            velocity: Velocity::Constant(TRIANGLE_SPEEDS[k]),
            initial: (k == 0).then_some(Signal::Gaussian { center: 2.5, width: 0.5 }),
        });
    }
    let alpha = |pairs: &[(&str, f64)]| pairs.iter().map(|(e, a)| (e.to_string(), *a)).collect();
    Ok(NetworkFile {
        time: TimeSection { horizon: TRIANGLE_HORIZON, steps: steps as usize },
        vertices: vec![
            vertex("in", KindName::Inflow),
            vertex("p1", KindName::Internal),
            vertex("p2", KindName::Internal),
            vertex("p3", KindName::Internal),
            vertex("out4", KindName::Outflow),
            vertex("out6", KindName::Outflow),
        ],
        edges,
        couplings: vec![
            Coupling { vertex: "p1".into(), alpha: alpha(&[("e2", 0.75), ("e3", 0.25)]) },
            Coupling { vertex: "p2".into(), alpha: alpha(&[("e4", 2.0 / 3.0), ("e5", 1.0 / 3.0)]) },
        ],
        boundaries: vec![Boundary {
            vertex: "in".into(),
            signal: Signal::Sine { amplitude: 1.0, angular_frequency: 2.0 * PI / 3.0 },
        }],
        retardation: None,
    })
}

/// Reference number of time steps of the sewer network.
pub const SEWER_STEPS: usize = 384;
pub const SEWER_HORIZON: f64 = 2.0;
/// Target Courant numbers per edge at `N = 384`.
pub const SEWER_COURANT: [f64; 17] = [
    2.61, 1.16, 1.21, 3.70, 3.58, 2.37, 1.69, 2.56, 8.015, 0.88, 2.12, 5.37, 5.18, 6.01, 2.42, 3.52, 2.15,
];
const SEWER_INFLOW: [f64; 5] = [0.30, 0.20, 0.25, 0.28, 0.17];
const SEWER_DIAMETER: [f64; 17] =
    [0.45, 0.45, 0.9, 0.55, 0.6, 0.45, 0.5, 0.45, 0.35, 0.9, 0.4, 0.33, 0.45, 0.5, 0.6, 0.8, 1.0];
const SEWER_EDGES: [(&str, &str); 17] = [
    ("BC1", "1"),
    ("BC2", "1"),
    ("1", "2"),
    ("2", "3"),
    ("3", "11"),
    ("BC3", "4"),
    ("4", "5"),
    ("5", "11"),
    ("BC4", "6"),
    ("6", "8"),
    ("BC5", "7"),
    ("7", "8"),
    ("8", "9"),
    ("9", "10"),
    ("10", "11"),
    ("11", "12"),
    ("12", "OUT"),
];
/// Edges from inflow `BC1` to the outflow.
pub const SEWER_PATH_BC1: [usize; 6] = [0, 2, 3, 4, 15, 16];
/// Edges from inflow `BC3` to the outflow.
pub const SEWER_PATH_BC3: [usize; 5] = [5, 6, 7, 15, 16];

/// Synthetic sewer-like network with 5 inflows, 12 internal vertices (three
/// of them merges, one three-way) and one outflow. The flow in each pipe is
/// the sum of the upstream inflow discharges, the capacity is the pipe cross
/// section, and lengths are chosen so that the Courant numbers at `N = 384`
/// equal [`SEWER_COURANT`]. Inflow `m` carries an impulse of height `m`.
pub fn sewer_file(steps: usize) -> Result<NetworkFile> {
    if steps == 0 {
        return Err(Error::Domain("step count must be positive".into()));
    }
    let tau_ref = SEWER_HORIZON / SEWER_STEPS as f64;
    let mut vertices: Vec<VertexEntry> = (1..=5).map(|m| vertex(&format!("BC{m}"), KindName::Inflow)).collect();
    vertices.extend((1..=12).map(|m| vertex(&m.to_string(), KindName::Internal)));
    vertices.push(vertex("OUT", KindName::Outflow));

    // discharge: every edge carries the sum of the inflows upstream of it
    let mut discharge = [0.0f64; 17];
    let mut upstream: std::collections::HashMap<&str, f64> = std::collections::HashMap::new();
    for (k, &(from, to)) in SEWER_EDGES.iter().enumerate() {
        let q = match from.strip_prefix("BC") {
            Some(m) => SEWER_INFLOW[m.parse::<usize>().expect("inflow index") - 1],
            None => upstream[from],
        };
        discharge[k] = q;
        *upstream.entry(to).or_insert(0.0) += q;
    }
    let edges = (0..17)
        .map(|k| {
            let cells = if matches!(k, 9 | 15 | 16) { 256 } else { 128 };
            let d = SEWER_DIAMETER[k];
            let kappa = PI * d * d / 4.0;
            let length = cells as f64 * tau_ref * discharge[k] / (kappa * SEWER_COURANT[k]);
            EdgeEntry {
                id: format!("e{k}"),
                from: SEWER_EDGES[k].0.into(),
                to: SEWER_EDGES[k].1.into(),
                length,
                kappa: None,
                diameter: Some(d),
                cells,
                velocity: Velocity::Constant(discharge[k]),
                initial: None,
            }
        })
        .collect();
    let boundaries = (1..=5)
        .map(|m| Boundary {
            vertex: format!("BC{m}"),
            signal: Signal::Impulse { c: m as f64, x0: -(1.0 + 0.1 * m as f64) },
        })
        .collect();
    Ok(NetworkFile {
        time: TimeSection { horizon: SEWER_HORIZON, steps },
        vertices,
        edges,
        couplings: Vec::new(),
        boundaries,
        retardation: None,
    })
}

/// Bundled copy of `sewer_file(384)`.
pub const SEWER_JSON: &str = include_str!("../data/sewer.json");

/// Independent single-edge scenarios as one network: each edge gets its own
/// inflow vertex `<name>_in` carrying the boundary column and its own outflow
/// vertex `<name>_out`. All scenarios must share the time grid.
pub fn edge_network(scenarios: &[EdgeScenario]) -> Result<NetworkModel> {
    let time = scenarios.first().ok_or_else(|| Error::Network("no edges".into()))?.problem.time;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (k, sc) in scenarios.iter().enumerate() {
        let p = &sc.problem;
        if p.time != time {
            return Err(Error::Network(format!("scenario {} uses a different time grid", sc.name)));
        }
        if p.ghost.is_some() {
            return Err(Error::Unsupported(format!("scenario {} prescribes ghost values", sc.name)));
        }
        vertices.push(Vertex {
            id: format!("{}_in", sc.name),
            kind: VertexKind::Inflow,
            boundary: Some(p.boundary.clone()),
            alpha: vec![(k, 1.0)],
        });
        vertices.push(Vertex { id: format!("{}_out", sc.name), kind: VertexKind::Outflow, boundary: None, alpha: Vec::new() });
        edges.push(NetworkEdge {
            id: sc.name.clone(),
            from: 2 * k,
            to: 2 * k + 1,
            grid: p.grid.clone(),
            retardation: p.retardation,
            velocity: p.velocity.clone(),
            initial: p.initial.clone(),
        });
    }
    let model = NetworkModel { time, vertices, edges };
    network::validate_and_order(&model)?;
    Ok(model)
}

/// Built-in scenarios by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Smooth,
    Shapes,
    Isotherm,
    Triangle,
    Sewer,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] =
        [ScenarioKind::Smooth, ScenarioKind::Shapes, ScenarioKind::Isotherm, ScenarioKind::Triangle, ScenarioKind::Sewer];

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown scenario {name:?}; try one of smooth, shapes, isotherm, triangle, sewer")))
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Smooth => "smooth",
            ScenarioKind::Shapes => "shapes",
            ScenarioKind::Isotherm => "isotherm",
            ScenarioKind::Triangle => "triangle",
            ScenarioKind::Sewer => "sewer",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ScenarioKind::Smooth => "Gaussian on (0, 2), unit speed, exact solution; --I 512 --N 256 (C = I/N)",
            ScenarioKind::Shapes => "four shapes on (a_k, 3), exact solution; --I 1600 --N 160 (C = I/(2N))",
            ScenarioKind::Isotherm => "four shapes with retardation 0.9q + 0.1q^2; --I 400, N = I/8",
            ScenarioKind::Triangle => "six-edge triangular network, T = 70; --resolution coarse|fine or --h/--tau",
            ScenarioKind::Sewer => "17-edge sewer-like network, T = 2; --N 384; paths BC1 and BC3",
        }
    }

    /// Edge paths reported by default, as `(name, edge indices)`.
    pub fn paths(self) -> Vec<(String, Vec<usize>)> {
        match self {
            ScenarioKind::Sewer => vec![
                ("BC1".into(), SEWER_PATH_BC1.to_vec()),
                ("BC3".into(), SEWER_PATH_BC3.to_vec()),
            ],
            ScenarioKind::Triangle => vec![("upper".into(), vec![0, 1, 4, 5]), ("lower".into(), vec![0, 2, 5])],
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_courant_numbers() {
        for (i, n, c) in [(512, 256, 2.0), (256, 32, 8.0), (256, 16, 16.0)] {
            let s = smooth_gaussian(i, n).unwrap();
            assert!((s.problem.courant(1, 0) - c).abs() < 1e-12);
        }
        assert!(smooth_gaussian_courant(100, 3.0).is_err());
    }

    #[test]
    fn exact_solution_has_zero_error() {
        let s = smooth_gaussian(32, 16).unwrap();
        let exact = s.exact.clone().unwrap();
        let mut sol = edge::solve_first_order(&s.problem).unwrap();
        for i in 0..=32 {
            for n in 0..=16 {
                let q = exact(sol.x()[i], sol.time.time(n));
                sol.record(i, n, q, 0.0, 0.0, edge::NodeStatus::Direct);
            }
        }
        assert_eq!(error_sum(&sol, exact.as_ref()), 0.0);
        assert_eq!(error_norm(&sol, exact.as_ref()), 0.0);
        assert!((error_sum(&sol, &|x, t| exact(x, t) + 0.5) - 0.5 * 33.0 * 17.0).abs() < 1e-9);
        let weighted = error_norm(&sol, &|x, t| exact(x, t) + 0.5);
        assert!((weighted - 0.5 * 33.0 * 17.0 / 16.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_table_magnitudes() {
        let r = convergence_study(&[(256, 128), (512, 256)], smooth_gaussian, &SchemeConfig::new(crate::kernels::Scheme::FirstOrder))
            .unwrap();
        assert!((r.rows[0].error - 0.0868).abs() < 5e-4, "{}", r.rows[0].error);
        assert!((r.rows[1].error - 0.0513).abs() < 5e-4, "{}", r.rows[1].error);
        assert!((r.rows[1].eoc.unwrap() - 0.76).abs() < 0.01);
    }

    #[test]
    fn shapes_have_unit_range() {
        for k in 1..=4 {
            let peak = (0..=400).map(|j| shape(k, j as f64 * 0.001)).fold(0.0, f64::max);
            assert!((peak - 1.0).abs() < 1e-12, "shape {k}");
            assert_eq!(shape(k, -0.01), 0.0);
            assert_eq!(shape(k, 0.41), 0.0);
        }
    }

    #[test]
    fn shape_reference_resolution() {
        let s = four_shapes(1, 1600, 160).unwrap();
        assert_eq!(s.problem.cells(), 960);
        assert!((s.problem.grid.h(1) - 0.0025).abs() < 1e-15);
        assert!((s.problem.time.tau() - 0.0125).abs() < 1e-15);
        assert!((s.problem.courant(5, 3) - 5.0).abs() < 1e-12);
        // the shape has travelled distance 2 at T
        let exact = s.exact.clone().unwrap();
        assert_eq!(exact(1.8, 2.0), 1.0);
    }

    #[test]
    fn isotherm_courant_range() {
        let s = nonlinear_isotherm(2, 400).unwrap();
        let lambda = s.problem.time.tau() / s.problem.grid.h(1);
        assert!((lambda / ISOTHERM.dtheta(0.0) - 40.0 / 9.0).abs() < 1e-12);
        assert!((lambda / ISOTHERM.dtheta(1.0) - 40.0 / 11.0).abs() < 1e-12);
        assert_eq!(s.problem.steps(), 50);
    }

    #[test]
    fn triangle_courant_numbers() {
        let coarse = triangle_file(TriangleResolution::Coarse).unwrap().to_model().unwrap();
        let want = [0.625, 1.25, 0.625, 0.625, 25.0 / 23.0, 0.625];
        for (k, w) in want.iter().enumerate() {
            assert!((coarse.courant(k, 1, 0) - w).abs() < 1e-12);
        }
        let fine = triangle_file(TriangleResolution::Fine).unwrap().to_model().unwrap();
        let want = [2.5, 2.5, 2.5, 2.5, 50.0 / 23.0, 2.5];
        for (k, w) in want.iter().enumerate() {
            assert!((fine.courant(k, 1, 0) - w).abs() < 1e-12);
        }
        assert_eq!(network::validate_and_order(&fine).unwrap().len(), 6);
        assert!(triangle_file(TriangleResolution::Uniform { h: 0.3, tau: 0.25 }).is_err());
    }

    #[test]
    fn sewer_geometry() {
        let model = sewer_file(SEWER_STEPS).unwrap().to_model().unwrap();
        assert_eq!(model.vertices.len(), 18);
        assert_eq!(model.edges.len(), 17);
        for (k, e) in model.edges.iter().enumerate() {
            assert!((model.courant(k, 1, 0) - SEWER_COURANT[k]).abs() < 1e-9);
            let d = 2.0 * (e.retardation.kappa_min() / PI).sqrt();
            assert!((0.3..=1.0).contains(&d));
            assert!((0.24..=1.0).contains(&e.grid.length()), "edge {k}: {}", e.grid.length());
        }
        let half = sewer_file(SEWER_STEPS / 2).unwrap().to_model().unwrap();
        for (k, c) in SEWER_COURANT.iter().enumerate() {
            assert!((half.courant(k, 1, 0) - 2.0 * c).abs() < 1e-9);
        }
        let bc3 = &model.vertices[2].boundary.as_ref().unwrap();
        assert!((bc3.iter().copied().fold(0.0, f64::max) - 3.0).abs() < 1e-3);
    }

    #[test]
    fn edge_network_matches_edge_solve() {
        let shapes: Vec<_> = (1..=4).map(|k| four_shapes(k, 80, 16).unwrap()).collect();
        let model = edge_network(&shapes).unwrap();
        let config = SchemeConfig::default();
        let sol = network::solve_network(&model, &config).unwrap();
        for (k, sc) in shapes.iter().enumerate() {
            let direct = edge::solve(&sc.problem, &config).unwrap();
            assert_eq!(direct.values(), sol.edges[k].values());
        }
        assert_eq!(ScenarioKind::from_name("sewer").unwrap(), ScenarioKind::Sewer);
        assert!(ScenarioKind::from_name("nope").is_err());
    }

    #[test]
    fn bundled_sewer_matches_generator() {
        let bundled = NetworkFile::parse(SEWER_JSON).unwrap();
        assert_eq!(bundled, sewer_file(SEWER_STEPS).unwrap());
    }
}
