//! JSON description of a network run.
//!
//! ```json
//! {
//!   "time": { "T": 70.0, "N": 224 },
//!   "vertices": [ { "id": "in", "kind": "inflow" }, { "id": "out", "kind": "outflow" } ],
//!   "edges": [ { "id": "e1", "from": "in", "to": "out", "length": 5.0,
//!                "kappa": 1.0, "cells": 40, "velocity": 1.0 } ],
//!   "couplings": [],
//!   "boundaries": [ { "vertex": "in",
//!                     "signal": { "type": "sine", "amplitude": 1.0, "angular_frequency": 2.0943951023931953 } } ]
//! }
//! ```
//!
//! Each edge takes either `kappa` or `diameter` (capacity `pi d^2 / 4`),
//! unless a global `retardation` model is given. `velocity` is a number or
//! one sample per time level. An optional `initial` signal is evaluated at
//! the edge nodes. A vertex with a single outgoing edge may omit its
//! coupling row. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{SpaceGrid, TimeGrid};
use crate::network::{NetworkEdge, NetworkModel, Vertex, VertexKind};
use crate::retardation::RetardationModel;

/// Scalar function of time (boundaries) or position (initial rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Signal {
    Constant { c: f64 },
    /// `amplitude * sin(angular_frequency * s)`
    Sine { amplitude: f64, angular_frequency: f64 },
    /// `exp(-((s - center) / width)^2)`
    Gaussian { center: f64, width: f64 },
    /// `c * exp(-2 (3 (0 - 0.3 s) - x0)^10)`, a flat-topped pulse
    Impulse { c: f64, x0: f64 },
    /// Piecewise linear through `(s, value)` points, constant outside.
    Table { points: Vec<(f64, f64)> },
}

impl Signal {
    pub fn validate(&self) -> Result<()> {
        match self {
            Signal::Gaussian { width, .. } if (*width).partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) => {
                Err(Error::Parse(format!("gaussian width must be positive, got {width}")))
            }
            Signal::Table { points } => {
                if points.is_empty() {
                    return Err(Error::Parse("table signal needs at least one point".into()));
                }
                if points.windows(2).any(|p| p[1].0.partial_cmp(&p[0].0) != Some(std::cmp::Ordering::Greater)) {
                    return Err(Error::Parse("table points must have increasing abscissae".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Signal::Constant { c } => *c,
            Signal::Sine { amplitude, angular_frequency } => amplitude * (angular_frequency * s).sin(),
            Signal::Gaussian { center, width } => (-((s - center) / width).powi(2)).exp(),
            Signal::Impulse { c, x0 } => c * (-2.0 * (3.0 * (0.0 - 0.3 * s) - x0).powi(10)).exp(),
            Signal::Table { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if s <= first.0 {
                    return first.1;
                }
                if s >= last.0 {
                    return last.1;
                }
                let k = points.partition_point(|p| p.0 <= s);
                let (a, b) = (points[k - 1], points[k]);
                a.1 + (b.1 - a.1) * (s - a.0) / (b.0 - a.0)
            }
        }
    }

    pub fn sample(&self, time: &TimeGrid) -> Vec<f64> {
        (0..=time.steps()).map(|n| self.eval(time.time(n))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Inflow,
    Internal,
    Outflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub kind: KindName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Velocity {
    Constant(f64),
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    pub cells: usize,
    pub velocity: Velocity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Signal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub vertex: String,
    pub alpha: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Boundary {
    pub vertex: String,
    pub signal: Signal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub time: TimeSection,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    #[serde(default)]
    pub boundaries: Vec<Boundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retardation: Option<RetardationModel>,
}

impl NetworkFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network files always serialize")
    }

    /// Capacity of an edge from `kappa`, `diameter` or the global model.
    fn edge_retardation(&self, e: &EdgeEntry) -> Result<RetardationModel> {
        match (self.retardation, e.kappa, e.diameter) {
            (Some(m), None, None) => Ok(m),
            (Some(_), _, _) => Err(Error::Parse(format!(
                "edge {}: kappa/diameter cannot be combined with a global retardation model",
                e.id
            ))),
            (None, Some(kappa), None) => Ok(RetardationModel::Linear { kappa }),
            (None, None, Some(d)) => Ok(RetardationModel::Linear { kappa: PI * d * d / 4.0 }),
            (None, _, _) => Err(Error::Parse(format!("edge {}: give exactly one of kappa and diameter", e.id))),
        }
    }

    pub fn to_model(&self) -> Result<NetworkModel> {
        let time = TimeGrid::new(self.time.horizon, self.time.steps)?;
        let vertex = |id: &str, what: &str| {
            self.vertices
                .iter()
                .position(|v| v.id == id)
                .ok_or_else(|| Error::Parse(format!("{what} refers to unknown vertex {id:?}")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let grid = SpaceGrid::uniform(e.length, e.cells).map_err(|err| Error::Parse(format!("edge {}: {err}", e.id)))?;
            let velocity = match &e.velocity {
                Velocity::Constant(v) => vec![*v; time.steps() + 1],
                Velocity::Samples(s) => s.clone(),
            };
            let initial = match &e.initial {
                Some(sig) => {
                    sig.validate()?;
                    grid.nodes().iter().map(|&x| sig.eval(x)).collect()
                }
                None => vec![0.0; e.cells + 1],
            };
            edges.push(NetworkEdge {
                id: e.id.clone(),
                from: vertex(&e.from, &format!("edge {}", e.id))?,
                to: vertex(&e.to, &format!("edge {}", e.id))?,
                retardation: self.edge_retardation(e)?,
                grid,
                velocity,
                initial,
            });
        }
        let mut vertices: Vec<Vertex> = self
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id.clone(),
                kind: match v.kind {
                    KindName::Inflow => VertexKind::Inflow,
                    KindName::Internal => VertexKind::Internal,
                    KindName::Outflow => VertexKind::Outflow,
                },
                boundary: None,
                alpha: Vec::new(),
            })
            .collect();
        for b in &self.boundaries {
            b.signal.validate()?;
            let m = vertex(&b.vertex, "boundary")?;
            if vertices[m].boundary.replace(b.signal.sample(&time)).is_some() {
                return Err(Error::Parse(format!("vertex {} has two boundary signals", b.vertex)));
            }
        }
        let mut coupled = vec![false; vertices.len()];
        for c in &self.couplings {
            let m = vertex(&c.vertex, "coupling")?;
            if std::mem::replace(&mut coupled[m], true) {
                return Err(Error::Parse(format!("vertex {} has two coupling rows", c.vertex)));
            }
            for (edge, &a) in &c.alpha {
                let k = edges
                    .iter()
                    .position(|e| &e.id == edge)
                    .ok_or_else(|| Error::Parse(format!("coupling of vertex {} names unknown edge {edge:?}", c.vertex)))?;
                vertices[m].alpha.push((k, a));
            }
        }
        for (m, v) in vertices.iter_mut().enumerate() {
            if coupled[m] || v.kind == VertexKind::Outflow {
                continue;
            }
            let out: Vec<usize> = edges.iter().enumerate().filter(|(_, e)| e.from == m).map(|(k, _)| k).collect();
            if out.len() == 1 {
                v.alpha.push((out[0], 1.0));
            } else if out.len() > 1 {
                return Err(Error::Parse(format!("vertex {} splits into several edges but has no coupling row", v.id)));
            }
        }
        let model = NetworkModel { time, vertices, edges };
        crate::network::validate_and_order(&model)?;
        Ok(model)
    }
}
