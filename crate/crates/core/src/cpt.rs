//! Conditional probability tables and the pairwise edge conditionals used by
//! belief refinement.
//!
//! Every probability is an additive-smoothed frequency
//! `(count(v = 1, cfg) + s) / (count(cfg) + 2s)`, with `0.5` for a
//! configuration that has neither records nor smoothing mass.

use std::collections::HashMap;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::model::{BinaryDataset, LabelSchema};

/// `P(v = 1 | parents)` for every parent configuration. Bit `i` of a
/// configuration index is the value of `parents[i]`; parents are ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCpt {
    pub parents: Vec<usize>,
    pub p_one: Vec<f64>,
}

impl NodeCpt {
    pub fn config_of(&self, values: &[u8]) -> usize {
        self.parents
            .iter()
            .enumerate()
            .fold(0, |acc, (bit, &p)| acc | ((values[p] as usize) << bit))
    }
}

/// Pairwise conditionals for an edge `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeConditionals {
    pub from: usize,
    pub to: usize,
    /// Smoothed joint pseudo-counts, indexed `[from value][to value]`.
    pub joint: [[f64; 2]; 2],
    /// `P(to = 1 | from = 0)`, `P(to = 1 | from = 1)`.
    pub forward: [f64; 2],
    /// `P(from = 1 | to = 0)`, `P(from = 1 | to = 1)`.
    pub backward: [f64; 2],
}

impl EdgeConditionals {
    fn from_joint(from: usize, to: usize, joint: [[f64; 2]; 2]) -> Self {
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.5 };
        Self {
            from,
            to,
            joint,
            forward: [
                ratio(joint[0][1], joint[0][0] + joint[0][1]),
                ratio(joint[1][1], joint[1][0] + joint[1][1]),
            ],
            backward: [
                ratio(joint[1][0], joint[0][0] + joint[1][0]),
                ratio(joint[1][1], joint[0][1] + joint[1][1]),
            ],
        }
    }

    /// Smoothed marginal `P(from = 1)` implied by the joint.
    pub fn from_marginal(&self) -> f64 {
        let j = &self.joint;
        let total = j[0][0] + j[0][1] + j[1][0] + j[1][1];
        if total > 0.0 {
            (j[1][0] + j[1][1]) / total
        } else {
            0.5
        }
    }

    /// Smoothed marginal `P(to = 1)` implied by the joint.
    pub fn to_marginal(&self) -> f64 {
        let j = &self.joint;
        let total = j[0][0] + j[0][1] + j[1][0] + j[1][1];
        if total > 0.0 {
            (j[0][1] + j[1][1]) / total
        } else {
            0.5
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CptSet {
    schema: Arc<LabelSchema>,
    smoothing: f64,
    nodes: Vec<NodeCpt>,
    edges: Vec<EdgeConditionals>,
    edge_index: HashMap<(usize, usize), usize>,
}

fn smoothed(ones: f64, total: f64, s: f64) -> f64 {
    let den = total + 2.0 * s;
    if den > 0.0 {
        (ones + s) / den
    } else {
        0.5
    }
}

fn check_smoothing(s: f64) -> Result<()> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "smoothing must be a finite non-negative pseudo-count, got {s}"
        )));
    }
    Ok(())
}

/// Estimates node CPTs and pairwise edge conditionals from data.
pub fn fit_cpts(data: &BinaryDataset, graph: &CausalGraph, smoothing: f64) -> Result<CptSet> {
    check_smoothing(smoothing)?;
    if data.schema().labels() != graph.schema().labels() {
        return Err(Error::SchemaMismatch(
            "graph and dataset use different label schemas".into(),
        ));
    }
    if !graph.is_dag() {
        return Err(Error::NotADag(
            "CPTs need a fully oriented acyclic graph".into(),
        ));
    }
    let n = graph.n_nodes();
    let rows = data.n_rows();

    let nodes = (0..n)
        .map(|v| {
            let parents: Vec<usize> = graph.parents(v).collect();
            if parents.len() > crate::ci::MAX_CONDITIONING {
                return Err(Error::InvalidArgument(format!(
                    "`{}` has {} parents; at most {} are supported",
                    data.schema().name(v),
                    parents.len(),
                    crate::ci::MAX_CONDITIONING
                )));
            }
            let configs = 1usize << parents.len();
            let mut totals = vec![0u64; configs];
            let mut ones = vec![0u64; configs];
            let child = data.column(v);
            let cols: Vec<&[u8]> = parents.iter().map(|&p| data.column(p)).collect();
            for r in 0..rows {
                let cfg = cols
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (bit, col)| acc | ((col[r] as usize) << bit));
                totals[cfg] += 1;
                ones[cfg] += child[r] as u64;
            }
            let p_one = (0..configs)
                .map(|c| smoothed(ones[c] as f64, totals[c] as f64, smoothing))
                .collect();
            Ok(NodeCpt { parents, p_one })
        })
        .collect::<Result<Vec<_>>>()?;

    let edges = graph
        .edges()
        .into_iter()
        .map(|e| {
            let mut joint = [[smoothing; 2]; 2];
            let (a, b) = (data.column(e.from), data.column(e.to));
            for r in 0..rows {
                joint[a[r] as usize][b[r] as usize] += 1.0;
            }
            EdgeConditionals::from_joint(e.from, e.to, joint)
        })
        .collect();

    Ok(CptSet::assemble(
        graph.schema().clone(),
        smoothing,
        nodes,
        edges,
    ))
}

impl CptSet {
    fn assemble(
        schema: Arc<LabelSchema>,
        smoothing: f64,
        nodes: Vec<NodeCpt>,
        edges: Vec<EdgeConditionals>,
    ) -> Self {
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.from, e.to), i))
            .collect();
        Self {
            schema,
            smoothing,
            nodes,
            edges,
            edge_index,
        }
    }

    /// Builds a set from explicit node tables; edge conditionals start empty
    /// and can be added with [`CptSet::with_edges`].
    pub fn from_tables(schema: Arc<LabelSchema>, nodes: Vec<NodeCpt>) -> Result<Self> {
        if nodes.len() != schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} tables for {} labels",
                nodes.len(),
                schema.len()
            )));
        }
        for (v, node) in nodes.iter().enumerate() {
            if node.p_one.len() != 1 << node.parents.len() {
                return Err(Error::InvalidArgument(format!(
                    "`{}` has {} table entries for {} parents",
                    schema.name(v),
                    node.p_one.len(),
                    node.parents.len()
                )));
            }
            if node.p_one.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidArgument(format!(
                    "`{}` has a probability outside [0, 1]",
                    schema.name(v)
                )));
            }
            if node.parents.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "`{}` parents must be ascending and distinct",
                    schema.name(v)
                )));
            }
        }
        Ok(Self::assemble(schema, 0.0, nodes, Vec::new()))
    }

    /// Replaces the pairwise conditionals with those of `other` (same schema).
    pub fn with_edges(mut self, other: &CptSet) -> Result<Self> {
        if other.schema.labels() != self.schema.labels() {
            return Err(Error::SchemaMismatch(
                "CPT sets use different schemas".into(),
            ));
        }
        self.smoothing = other.smoothing;
        let edges = other.edges.clone();
        Ok(Self::assemble(
            self.schema,
            self.smoothing,
            self.nodes,
            edges,
        ))
    }

    pub fn schema(&self) -> &Arc<LabelSchema> {
        &self.schema
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn node(&self, v: usize) -> &NodeCpt {
        &self.nodes[v]
    }

    pub fn nodes(&self) -> &[NodeCpt] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeConditionals] {
        &self.edges
    }

    /// Conditionals for the directed edge `from -> to`, if present.
    pub fn edge(&self, from: usize, to: usize) -> Option<&EdgeConditionals> {
        self.edge_index.get(&(from, to)).map(|&i| &self.edges[i])
    }

    /// `P(v = 1 | parent values taken from a full assignment)`.
    pub fn p_one(&self, v: usize, values: &[u8]) -> f64 {
        let node = &self.nodes[v];
        node.p_one[node.config_of(values)]
    }

    /// Checks that the tables and pairwise conditionals match `graph`.
    pub fn check_graph(&self, graph: &CausalGraph) -> Result<()> {
        if graph.schema().labels() != self.schema.labels() {
            return Err(Error::SchemaMismatch(
                "graph and CPTs use different schemas".into(),
            ));
        }
        for v in 0..graph.n_nodes() {
            if !graph.parents(v).eq(self.nodes[v].parents.iter().copied()) {
                return Err(Error::SchemaMismatch(format!(
                    "parents of `{}` differ between graph and CPTs",
                    self.schema.name(v)
                )));
            }
        }
        for e in graph.edges() {
            if self.edge(e.from, e.to).is_none() {
                return Err(Error::SchemaMismatch(format!(
                    "no pairwise conditionals for {} -> {}",
                    self.schema.name(e.from),
                    self.schema.name(e.to)
                )));
            }
        }
        Ok(())
    }

    /// Draws `n` records by ancestral sampling along `order` (a topological
    /// order of the underlying graph).
    pub fn sample<R: Rng + ?Sized>(
        &self,
        order: &[usize],
        n: usize,
        rng: &mut R,
    ) -> Result<BinaryDataset> {
        let m = self.schema.len();
        let mut rows = Vec::with_capacity(n);
        let mut values = vec![0u8; m];
        for _ in 0..n {
            for &v in order {
                let p = self.p_one(v, &values);
                values[v] = (rng.gen::<f64>() < p) as u8;
            }
            rows.push(values.clone());
        }
        BinaryDataset::from_rows(self.schema.clone(), &rows)
    }

    pub fn to_json(&self) -> String {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(v, node)| {
                let table = node
                    .p_one
                    .iter()
                    .enumerate()
                    .map(|(cfg, &p)| (cfg.to_string(), p))
                    .collect();
                (
                    self.schema.name(v).to_string(),
                    NodeJson {
                        parents: node
                            .parents
                            .iter()
                            .map(|&p| self.schema.name(p).to_string())
                            .collect(),
                        table,
                    },
                )
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeJson {
                from: self.schema.name(e.from).to_string(),
                to: self.schema.name(e.to).to_string(),
                joint: e.joint,
                forward: e.forward,
                backward: e.backward,
            })
            .collect();
        let doc = CptJson {
            smoothing: self.smoothing,
            nodes,
            edges,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("cpt set serializes");
        s.push('\n');
        s
    }

    /// Parses a CPT document for `schema`. Edge conditionals are rebuilt
    /// from the stored joint counts.
    pub fn from_json(text: &str, schema: Arc<LabelSchema>) -> Result<Self> {
        let doc: CptJson = serde_json::from_str(text)?;
        let lookup = |name: &str| {
            schema
                .position(name)
                .ok_or_else(|| Error::UnknownLabel(name.to_string()))
        };
        if doc.nodes.len() != schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} CPT nodes for {} labels",
                doc.nodes.len(),
                schema.len()
            )));
        }
        let mut nodes = vec![None; schema.len()];
        for (name, node) in &doc.nodes {
            let v = lookup(name)?;
            let parents = node
                .parents
                .iter()
                .map(|p| lookup(p))
                .collect::<Result<Vec<_>>>()?;
            let configs = 1usize << parents.len();
            let p_one = (0..configs)
                .map(|cfg| {
                    node.table.get(&cfg.to_string()).copied().ok_or_else(|| {
                        Error::InvalidArgument(format!("`{name}` is missing configuration {cfg}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            nodes[v] = Some(NodeCpt { parents, p_one });
        }
        let nodes: Vec<NodeCpt> = nodes
            .into_iter()
            .map(|n| n.expect("all nodes present"))
            .collect();
        let mut set = Self::from_tables(schema.clone(), nodes)?;
        let edges = doc
            .edges
            .iter()
            .map(|e| {
                Ok(EdgeConditionals::from_joint(
                    lookup(&e.from)?,
                    lookup(&e.to)?,
                    e.joint,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        set = Self::assemble(set.schema, doc.smoothing, set.nodes, edges);
        Ok(set)
    }
}

#[derive(Serialize, Deserialize)]
struct CptJson {
    smoothing: f64,
    nodes: IndexMap<String, NodeJson>,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    parents: Vec<String>,
    /// Parent-configuration bitmask (decimal) → P(node = 1 | configuration).
    table: IndexMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    from: String,
    to: String,
    joint: [[f64; 2]; 2],
    forward: [f64; 2],
    backward: [f64; 2],
}
