//! Directed acyclic networks of edges coupled through concentrations at the
//! vertices.
//!
//! The concentration entering an outgoing edge `e` of vertex `m` is
//! `alpha_m^e * q_m`, where `q_m` is the sum of the outflow concentrations of
//! all edges ending in `m` (or the boundary signal at an inflow vertex).
//! Edges are solved level by level; edges on the same level are independent
//! and run in parallel.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::edge::{self, ConservationAudit, DmpViolation, EdgeProblem, EdgeSolution};
use crate::error::{Error, Result};
use crate::kernels::{SchemeConfig, SpaceGrid, TimeGrid};
use crate::retardation::RetardationModel;

const ALPHA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Inflow,
    Internal,
    Outflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub kind: VertexKind,
    /// Samples `q_m(t^n)`; required for inflow vertices only.
    pub boundary: Option<Vec<f64>>,
    /// Outgoing edge indices with their splitting coefficients.
    pub alpha: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkEdge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub grid: SpaceGrid,
    pub retardation: RetardationModel,
    /// `v(t^n)` for `n = 0..=N`.
    pub velocity: Vec<f64>,
    /// Initial row `q(x_i, 0)`.
    pub initial: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub time: TimeGrid,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<NetworkEdge>,
}

impl NetworkModel {
    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn incoming(&self, vertex: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.to == vertex).map(|(k, _)| k)
    }

    pub fn outgoing(&self, vertex: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.from == vertex).map(|(k, _)| k)
    }

    /// Courant number of edge `e` at node `i` and level `n`.
    pub fn courant(&self, e: usize, i: usize, n: usize) -> f64 {
        let edge = &self.edges[e];
        edge.velocity[n] * self.time.tau() / (edge.retardation.kappa_min() * edge.grid.h(i))
    }

    /// Single-edge problem for edge `e` with the given inflow column.
    pub fn edge_problem(&self, e: usize, boundary: Vec<f64>) -> EdgeProblem {
        let edge = &self.edges[e];
        EdgeProblem {
            grid: edge.grid.clone(),
            time: self.time,
            retardation: edge.retardation,
            velocity: edge.velocity.clone(),
            boundary,
            initial: edge.initial.clone(),
            ghost: None,
        }
    }
}

/// Checks the model and returns an edge order in which every edge follows
/// all edges feeding its start vertex.
pub fn validate_and_order(model: &NetworkModel) -> Result<Vec<usize>> {
    Ok(levels(model)?.into_iter().flatten().collect())
}

/// Edges grouped by depth: level 0 starts at inflow vertices, level `k + 1`
/// only depends on levels `0..=k`.
pub fn levels(model: &NetworkModel) -> Result<Vec<Vec<usize>>> {
    validate(model)?;
    let nv = model.vertices.len();
    let mut indegree = vec![0usize; nv];
    for e in &model.edges {
        indegree[e.to] += 1;
    }
    let mut depth = vec![0usize; nv];
    let mut ready: Vec<usize> = (0..nv).filter(|&v| indegree[v] == 0).collect();
    let mut edge_level = vec![usize::MAX; model.edges.len()];
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for k in model.outgoing(v) {
            edge_level[k] = depth[v];
            let to = model.edges[k].to;
            depth[to] = depth[to].max(depth[v] + 1);
            indegree[to] -= 1;
            if indegree[to] == 0 {
                ready.push(to);
            }
        }
    }
    if seen < nv {
        let v = (0..nv).find(|&v| indegree[v] > 0).unwrap_or(0);
        return Err(Error::Cycle(model.vertices[v].id.clone()));
    }
    let top = edge_level.iter().copied().max().unwrap_or(0);
    let mut out = vec![Vec::new(); top + 1];
    for (k, &l) in edge_level.iter().enumerate() {
        out[l].push(k);
    }
    Ok(out)
}

fn validate(model: &NetworkModel) -> Result<()> {
    let steps = model.time.steps();
    let nv = model.vertices.len();
    if model.edges.is_empty() {
        return Err(Error::Network("a network needs at least one edge".into()));
    }
    let mut ids = HashSet::new();
    for v in &model.vertices {
        if !ids.insert(v.id.as_str()) {
            return Err(Error::Network(format!("duplicate vertex id {:?}", v.id)));
        }
    }
    let mut ids = HashSet::new();
    for e in &model.edges {
        if !ids.insert(e.id.as_str()) {
            return Err(Error::Network(format!("duplicate edge id {:?}", e.id)));
        }
        if e.from >= nv || e.to >= nv {
            return Err(Error::Network(format!("edge {} references an unknown vertex", e.id)));
        }
        if e.from == e.to {
            return Err(Error::Cycle(model.vertices[e.from].id.clone()));
        }
        if e.velocity.len() != steps + 1 {
            return Err(Error::Network(format!(
                "edge {} has {} velocity samples, expected {}",
                e.id,
                e.velocity.len(),
                steps + 1
            )));
        }
        if let Some(v) = e.velocity.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Network(format!("edge {} has non-positive velocity {v}", e.id)));
        }
        if e.initial.len() != e.grid.cells() + 1 {
            return Err(Error::Network(format!("edge {} initial row has the wrong length", e.id)));
        }
        e.retardation.validate()?;
    }
    for (m, v) in model.vertices.iter().enumerate() {
        let n_in = model.incoming(m).count();
        let out: Vec<usize> = model.outgoing(m).collect();
        if n_in + out.len() == 0 {
            return Err(Error::OrphanVertex(v.id.clone()));
        }
        let shape_ok = match v.kind {
            VertexKind::Inflow => n_in == 0 && !out.is_empty(),
            VertexKind::Internal => n_in > 0 && !out.is_empty(),
            VertexKind::Outflow => n_in > 0 && out.is_empty(),
        };
        if !shape_ok {
            return Err(Error::Network(format!(
                "vertex {} of kind {:?} has {} incoming and {} outgoing edges",
                v.id,
                v.kind,
                n_in,
                out.len()
            )));
        }
        match (&v.boundary, v.kind) {
            (None, VertexKind::Inflow) => {
                return Err(Error::Network(format!("inflow vertex {} has no boundary signal", v.id)))
            }
            (Some(b), VertexKind::Inflow) if b.len() != steps + 1 => {
                return Err(Error::Network(format!("boundary of vertex {} has the wrong length", v.id)))
            }
            (Some(_), VertexKind::Internal | VertexKind::Outflow) => {
                return Err(Error::Network(format!("only inflow vertices take a boundary signal ({})", v.id)))
            }
            _ => {}
        }
        if v.kind == VertexKind::Outflow {
            if !v.alpha.is_empty() {
                return Err(Error::Network(format!("outflow vertex {} has an alpha row", v.id)));
            }
            continue;
        }
        let mut sum = 0.0;
        for &(k, a) in &v.alpha {
            if !out.contains(&k) {
                return Err(Error::Network(format!("alpha row of vertex {} names a non-outgoing edge", v.id)));
            }
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::Network(format!("alpha for vertex {} must be non-negative, got {a}", v.id)));
            }
            sum += a;
        }
        let covered: HashSet<usize> = v.alpha.iter().map(|&(k, _)| k).collect();
        if covered.len() != v.alpha.len() || covered.len() != out.len() {
            return Err(Error::Network(format!("alpha row of vertex {} must list each outgoing edge once", v.id)));
        }
        if (sum - 1.0).abs() > ALPHA_TOL {
            return Err(Error::AlphaSum { vertex: v.id.clone(), sum });
        }
    }
    Ok(())
}

/// Time series `q_m(t^n)` of a vertex: the boundary signal for inflow
/// vertices, otherwise the sum of the outflow columns of incoming edges.
pub fn vertex_signal(model: &NetworkModel, vertex: usize, solutions: &[Option<EdgeSolution>]) -> Result<Vec<f64>> {
    let v = &model.vertices[vertex];
    if let Some(b) = &v.boundary {
        return Ok(b.clone());
    }
    let mut sum: Option<Vec<f64>> = None;
    for k in model.incoming(vertex) {
        let sol = solutions.get(k).and_then(Option::as_ref).ok_or_else(|| {
            Error::Sequencing(format!("edge {} feeding vertex {} is not solved yet", model.edges[k].id, v.id))
        })?;
        let col = sol.column(sol.cells());
        match sum.as_mut() {
            None => sum = Some(col.to_vec()),
            Some(s) => s.iter_mut().zip(col).for_each(|(a, b)| *a += b),
        }
    }
    Ok(sum.unwrap_or_else(|| vec![0.0; model.time.steps() + 1]))
}

/// Inflow columns `alpha^e * q_m` for the outgoing edges of one vertex.
pub fn split_to_downstream(signal: &[f64], alpha: &[(usize, f64)]) -> Vec<(usize, Vec<f64>)> {
    alpha
        .iter()
        .map(|&(k, a)| (k, signal.iter().map(|q| a * q).collect()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct NetworkSolution {
    /// One solution per edge, in model order.
    pub edges: Vec<EdgeSolution>,
    /// `q_m(t^n)` per vertex, in model order.
    pub vertex_signals: Vec<Vec<f64>>,
    /// Inflow column handed to each edge.
    pub boundaries: Vec<Vec<f64>>,
}

/// Solves every edge with `config`, levels in sequence and edges within a
/// level in parallel.
pub fn solve_network(model: &NetworkModel, config: &SchemeConfig) -> Result<NetworkSolution> {
    solve_with_levels(model, config, levels(model)?)
}

/// Solves the edges strictly one after another in the given order; used to
/// check that results do not depend on scheduling.
pub fn solve_network_ordered(model: &NetworkModel, config: &SchemeConfig, order: &[usize]) -> Result<NetworkSolution> {
    validate(model)?;
    solve_with_levels(model, config, order.iter().map(|&k| vec![k]).collect())
}

fn solve_with_levels(model: &NetworkModel, config: &SchemeConfig, levels: Vec<Vec<usize>>) -> Result<NetworkSolution> {
    config.validate()?;
    let ne = model.edges.len();
    let mut solutions: Vec<Option<EdgeSolution>> = vec![None; ne];
    let mut boundaries: Vec<Option<Vec<f64>>> = vec![None; ne];
    let mut signals: HashMap<usize, Vec<f64>> = HashMap::new();
    for level in levels {
        let mut jobs = Vec::with_capacity(level.len());
        for &k in &level {
            let from = model.edges[k].from;
            if let std::collections::hash_map::Entry::Vacant(slot) = signals.entry(from) {
                slot.insert(vertex_signal(model, from, &solutions)?);
            }
            let alpha = model.vertices[from]
                .alpha
                .iter()
                .find(|(e, _)| *e == k)
                .map_or(1.0, |&(_, a)| a);
            let column = split_to_downstream(&signals[&from], &[(k, alpha)]).pop().map(|(_, c)| c);
            jobs.push((k, column.unwrap_or_default()));
        }
        let solved: Vec<(usize, Vec<f64>, Result<EdgeSolution>)> = jobs
            .into_par_iter()
            .map(|(k, column)| {
                let sol = edge::solve(&model.edge_problem(k, column.clone()), config);
                (k, column, sol)
            })
            .collect();
        for (k, column, sol) in solved {
            solutions[k] = Some(sol?);
            boundaries[k] = Some(column);
        }
    }
    let vertex_signals = (0..model.vertices.len())
        .map(|m| match signals.remove(&m) {
            Some(s) => Ok(s),
            None => vertex_signal(model, m, &solutions),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NetworkSolution {
        edges: solutions.into_iter().map(|s| s.expect("every edge is scheduled")).collect(),
        vertex_signals,
        boundaries: boundaries.into_iter().map(|b| b.expect("every edge is scheduled")).collect(),
    })
}

/// Balance of a whole network run.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkAudit {
    pub edges: Vec<ConservationAudit>,
    pub stored: f64,
    pub initial: f64,
    /// Mass entering through inflow vertices.
    pub inflow: f64,
    /// Mass leaving through outflow vertices.
    pub outflow: f64,
    /// Mass created at internal vertices by concentration coupling:
    /// outgoing minus incoming advective mass. Zero when the velocities at a
    /// junction match its splitting.
    pub junction_source: f64,
    /// `stored - initial - inflow + outflow - junction_source`
    pub residual: f64,
    pub throughput: f64,
}

impl NetworkAudit {
    pub fn relative_residual(&self) -> f64 {
        if self.throughput == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / self.throughput
        }
    }
}

pub fn network_audit(model: &NetworkModel, solution: &NetworkSolution) -> Result<NetworkAudit> {
    let mut audits = Vec::with_capacity(model.edges.len());
    let (mut stored, mut initial, mut inflow, mut outflow, mut source, mut throughput) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, sol) in solution.edges.iter().enumerate() {
        let a = edge::conservation_audit(sol, &model.edge_problem(k, solution.boundaries[k].clone()))?;
        let e = &model.edges[k];
        stored += a.stored;
        initial += a.initial;
        throughput += a.throughput;
        if model.vertices[e.from].kind == VertexKind::Inflow {
            inflow += a.inflow;
        } else {
            source += a.inflow;
        }
        if model.vertices[e.to].kind == VertexKind::Outflow {
            outflow += a.outflow;
        } else {
            source -= a.outflow;
        }
        audits.push(a);
    }
    let residual = stored - initial - inflow + outflow - source;
    Ok(NetworkAudit { edges: audits, stored, initial, inflow, outflow, junction_source: source, residual, throughput })
}

/// Local bound violations per edge.
pub fn network_dmp(solution: &NetworkSolution) -> Vec<(usize, Vec<DmpViolation>)> {
    solution
        .edges
        .iter()
        .enumerate()
        .map(|(k, s)| (k, edge::dmp_check(s)))
        .filter(|(_, v)| !v.is_empty())
        .collect()
}

/// Spatial profile along a chain of edges at level `n`, as `(x, Q)` pairs
/// with `x` accumulated over the chain. Junction nodes appear once.
pub fn path_profile(model: &NetworkModel, solution: &NetworkSolution, path: &[usize], n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut offset = 0.0;
    for (j, &k) in path.iter().enumerate() {
        let sol = &solution.edges[k];
        let skip = usize::from(j > 0);
        for i in skip..=sol.cells() {
            out.push((offset + sol.x()[i], sol.get(i, n)));
        }
        offset += model.edges[k].grid.length();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Scheme;

    fn edge(id: &str, from: usize, to: usize, length: f64, cells: usize, v: f64, steps: usize) -> NetworkEdge {
        NetworkEdge {
            id: id.into(),
            from,
            to,
            grid: SpaceGrid::uniform(length, cells).unwrap(),
            retardation: RetardationModel::Linear { kappa: 1.0 },
            velocity: vec![v; steps + 1],
            initial: vec![0.0; cells + 1],
        }
    }

    fn vertex(id: &str, kind: VertexKind, alpha: Vec<(usize, f64)>) -> Vertex {
        Vertex { id: id.into(), kind, boundary: None, alpha }
    }

    fn chain(steps: usize) -> NetworkModel {
        let time = TimeGrid::new(2.0, steps).unwrap();
        let mut src = vertex("in", VertexKind::Inflow, vec![(0, 1.0)]);
        src.boundary = Some((0..=steps).map(|n| (-20.0 * (time.time(n) - 0.6).powi(2)).exp()).collect());
        NetworkModel {
            time,
            vertices: vec![src, vertex("mid", VertexKind::Internal, vec![(1, 1.0)]), vertex("out", VertexKind::Outflow, vec![])],
            edges: vec![edge("a", 0, 1, 1.0, 20, 1.0, steps), edge("b", 1, 2, 1.5, 30, 1.0, steps)],
        }
    }

    #[test]
    fn chain_matches_single_long_edge() {
        let model = chain(40);
        for scheme in [Scheme::FirstOrder, Scheme::ThirdOrder, Scheme::HighResolution] {
            let cfg = SchemeConfig::new(scheme);
            let net = solve_network(&model, &cfg).unwrap();
            let long = EdgeProblem::linear(
                SpaceGrid::uniform(2.5, 50).unwrap(),
                model.time,
                1.0,
                1.0,
                model.vertices[0].boundary.clone().unwrap(),
            );
            let single = edge::solve(&long, &cfg).unwrap();
            for n in 0..=40 {
                for i in 0..=20 {
                    assert!((net.edges[0].get(i, n) - single.get(i, n)).abs() < 1e-12);
                }
                for i in 0..=30 {
                    assert!((net.edges[1].get(i, n) - single.get(20 + i, n)).abs() < 1e-12);
                }
            }
            assert_eq!(net.edges[1].column(0), net.edges[0].column(20));
        }
    }

    #[test]
    fn cycle_is_rejected() {
        let mut model = chain(4);
        model.vertices[2].kind = VertexKind::Internal;
        model.vertices[2].alpha = vec![(2, 1.0)];
        model.edges.push(edge("back", 2, 1, 1.0, 4, 1.0, 4));
        assert!(matches!(validate_and_order(&model), Err(Error::Cycle(_))));
    }

    #[test]
    fn alpha_row_must_sum_to_one() {
        let mut model = chain(4);
        model.vertices[1].alpha = vec![(1, 0.9)];
        let err = validate_and_order(&model).unwrap_err();
        assert_eq!(err.to_string(), "alpha row for vertex mid sums to 0.9");
    }

    #[test]
    fn orphan_vertex_is_rejected() {
        let mut model = chain(4);
        model.vertices.push(vertex("lost", VertexKind::Internal, vec![]));
        assert!(matches!(validate_and_order(&model), Err(Error::OrphanVertex(_))));
    }

    #[test]
    fn split_examples() {
        let cols = split_to_downstream(&[0.8], &[(1, 0.75), (2, 0.25)]);
        assert_eq!((cols[0].0, cols[1].0), (1, 2));
        assert!((cols[0].1[0] - 0.6).abs() < 1e-15);
        assert!((cols[1].1[0] - 0.2).abs() < 1e-15);
        assert_eq!(split_to_downstream(&[0.0, 0.0], &[(0, 1.0)]), vec![(0, vec![0.0, 0.0])]);
        assert_eq!(split_to_downstream(&[0.3, 0.7], &[(0, 1.0)]), vec![(0, vec![0.3, 0.7])]);
    }

    #[test]
    fn unsolved_upstream_is_a_sequencing_error() {
        let model = chain(4);
        assert!(matches!(vertex_signal(&model, 1, &[None, None]), Err(Error::Sequencing(_))));
    }

    #[test]
    fn chain_audit_balances() {
        let model = chain(40);
        let sol = solve_network(&model, &SchemeConfig::default()).unwrap();
        let audit = network_audit(&model, &sol).unwrap();
        assert!(audit.relative_residual() < 1e-12);
        assert!(audit.junction_source.abs() < 1e-14);
        assert!(network_dmp(&sol).is_empty());
        let profile = path_profile(&model, &sol, &[0, 1], 40);
        assert_eq!(profile.len(), 51);
        assert!((profile[50].0 - 2.5).abs() < 1e-15);
    }
}
