//! Mixed (directed + undirected) graphs over a label schema.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabelSchema, Tier};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    None,
    Undirected,
    /// Row node points at column node.
    Out,
    /// Column node points at row node.
    In,
}

/// One edge as exposed to callers. Undirected edges report `from < to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub oriented: bool,
}

/// Graph with at most one edge per unordered node pair and no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    schema: Arc<LabelSchema>,
    n: usize,
    marks: Vec<Mark>,
}

impl CausalGraph {
    pub fn empty(schema: Arc<LabelSchema>) -> Self {
        let n = schema.len();
        Self {
            schema,
            n,
            marks: vec![Mark::None; n * n],
        }
    }

    pub fn from_edges(
        schema: Arc<LabelSchema>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut g = Self::empty(schema);
        for e in edges {
            g.check_pair(e.from, e.to)?;
            if g.adjacent(e.from, e.to) {
                return Err(Error::InvalidArgument(format!(
                    "more than one edge between `{}` and `{}`",
                    g.schema.name(e.from),
                    g.schema.name(e.to)
                )));
            }
            if e.oriented {
                g.set_directed(e.from, e.to);
            } else {
                g.set_undirected(e.from, e.to);
            }
        }
        Ok(g)
    }

    /// Convenience for tests and examples: directed edges by index.
    pub fn from_arcs(schema: Arc<LabelSchema>, arcs: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges(
            schema,
            arcs.iter().map(|&(from, to)| Edge {
                from,
                to,
                oriented: true,
            }),
        )
    }

    pub fn schema(&self) -> &Arc<LabelSchema> {
        &self.schema
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.schema.check_index(a)?;
        self.schema.check_index(b)?;
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "self-loop on `{}`",
                self.schema.name(a)
            )));
        }
        Ok(())
    }

    #[inline]
    fn mark(&self, a: usize, b: usize) -> Mark {
        self.marks[a * self.n + b]
    }

    pub fn set_undirected(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        self.marks[a * self.n + b] = Mark::Undirected;
        self.marks[b * self.n + a] = Mark::Undirected;
    }

    /// Sets (or reorients) the edge between `from` and `to` as `from -> to`.
    pub fn set_directed(&mut self, from: usize, to: usize) {
        debug_assert_ne!(from, to);
        self.marks[from * self.n + to] = Mark::Out;
        self.marks[to * self.n + from] = Mark::In;
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.marks[a * self.n + b] = Mark::None;
        self.marks[b * self.n + a] = Mark::None;
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) != Mark::None
    }

    /// True iff the edge `from -> to` is present.
    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.mark(from, to) == Mark::Out
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) == Mark::Undirected
    }

    /// All adjacent nodes, ascending.
    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.marks[a * self.n..(a + 1) * self.n];
        row.iter()
            .enumerate()
            .filter(|(_, m)| **m != Mark::None)
            .map(|(b, _)| b)
    }

    pub fn parents(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.marks[a * self.n..(a + 1) * self.n];
        row.iter()
            .enumerate()
            .filter(|(_, m)| **m == Mark::In)
            .map(|(b, _)| b)
    }

    pub fn children(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.marks[a * self.n..(a + 1) * self.n];
        row.iter()
            .enumerate()
            .filter(|(_, m)| **m == Mark::Out)
            .map(|(b, _)| b)
    }

    pub fn undirected_neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.marks[a * self.n..(a + 1) * self.n];
        row.iter()
            .enumerate()
            .filter(|(_, m)| **m == Mark::Undirected)
            .map(|(b, _)| b)
    }

    /// Edges in canonical order: by lower endpoint, then higher endpoint.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                match self.mark(a, b) {
                    Mark::None => {}
                    Mark::Undirected => out.push(Edge {
                        from: a,
                        to: b,
                        oriented: false,
                    }),
                    Mark::Out => out.push(Edge {
                        from: a,
                        to: b,
                        oriented: true,
                    }),
                    Mark::In => out.push(Edge {
                        from: b,
                        to: a,
                        oriented: true,
                    }),
                }
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.marks.iter().filter(|m| **m != Mark::None).count() / 2
    }

    pub fn n_undirected(&self) -> usize {
        self.marks
            .iter()
            .filter(|m| **m == Mark::Undirected)
            .count()
            / 2
    }

    /// Kahn's algorithm over directed edges, smallest ready index first.
    /// Undirected edges are ignored; `None` means the directed part has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indegree: Vec<usize> = (0..self.n).map(|v| self.parents(v).count()).collect();
        let mut ready: BTreeSet<usize> = (0..self.n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for c in self.children(v) {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    pub fn directed_part_is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// True iff every edge is oriented and the graph has no directed cycle.
    pub fn is_dag(&self) -> bool {
        self.n_undirected() == 0 && self.directed_part_is_acyclic()
    }

    /// Nodes with a directed path to any node of `targets`, including the targets.
    pub fn ancestors_of(&self, targets: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue: VecDeque<usize> = targets.iter().copied().collect();
        for &t in targets {
            seen[t] = true;
        }
        while let Some(v) = queue.pop_front() {
            for p in self.parents(v) {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// d-separation of `x` and `y` given `z` in a DAG, via the moralized
    /// ancestral graph.
    pub fn d_separated(&self, x: usize, y: usize, z: &[usize]) -> bool {
        let mut relevant = vec![x, y];
        relevant.extend_from_slice(z);
        let anc = self.ancestors_of(&relevant);
        let mut blocked = vec![false; self.n];
        for &v in z {
            blocked[v] = true;
        }

        let mut moral = vec![Vec::new(); self.n];
        for v in (0..self.n).filter(|&v| anc[v]) {
            let pa: Vec<usize> = self.parents(v).collect();
            for (i, &p) in pa.iter().enumerate() {
                moral[p].push(v);
                moral[v].push(p);
                for &q in &pa[i + 1..] {
                    moral[p].push(q);
                    moral[q].push(p);
                }
            }
        }

        let mut seen = vec![false; self.n];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(v) = queue.pop_front() {
            for &w in &moral[v] {
                if w == y {
                    return false;
                }
                if !seen[w] && !blocked[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        true
    }

    /// Same nodes, edges relabelled through `order` (`order[k]` = old index at
    /// new position `k`), matching [`LabelSchema::permuted`].
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let schema = Arc::new(self.schema.permuted(order)?);
        let mut new_pos = vec![0; self.n];
        for (k, &old) in order.iter().enumerate() {
            new_pos[old] = k;
        }
        Self::from_edges(
            schema,
            self.edges().into_iter().map(|e| Edge {
                from: new_pos[e.from],
                to: new_pos[e.to],
                oriented: e.oriented,
            }),
        )
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            nodes: self
                .schema
                .labels()
                .iter()
                .map(|l| NodeJson {
                    name: l.name.clone(),
                    tier: l.tier,
                })
                .collect(),
            edges: self
                .edges()
                .into_iter()
                .map(|e| EdgeJson {
                    from: self.schema.name(e.from).to_string(),
                    to: self.schema.name(e.to).to_string(),
                    oriented: e.oriented,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)?;
        let schema = Arc::new(LabelSchema::from_pairs(
            doc.nodes.into_iter().map(|n| (n.name, n.tier)),
        )?);
        let lookup = |name: &str| {
            schema
                .position(name)
                .ok_or_else(|| Error::UnknownLabel(name.to_string()))
        };
        let edges = doc
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    from: lookup(&e.from)?,
                    to: lookup(&e.to)?,
                    oriented: e.oriented,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_edges(schema.clone(), edges)
    }

    /// Graphviz export. Nodes of one tier share a rank; oriented edges are
    /// written `"A" -> "B";`, unoriented ones `"A" -- "B";`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph causal {\n  rankdir=TB;\n");
        for tier in Tier::ALL {
            let members: Vec<usize> = self.schema.indices_in(tier).collect();
            if members.is_empty() {
                continue;
            }
            let _ = write!(out, "  {{ rank=same;");
            for &i in &members {
                let _ = write!(out, " {};", dot_id(self.schema.name(i)));
            }
            out.push_str(" }\n");
        }
        for (i, l) in self.schema.labels().iter().enumerate() {
            let _ = writeln!(
                out,
                "  {} [tier=\"{}\"];",
                dot_id(self.schema.name(i)),
                l.tier
            );
        }
        for e in self.edges() {
            let op = if e.oriented { "->" } else { "--" };
            let _ = writeln!(
                out,
                "  {} {op} {};",
                dot_id(self.schema.name(e.from)),
                dot_id(self.schema.name(e.to))
            );
        }
        out.push_str("}\n");
        out
    }

    /// The subgraph induced by `nodes` (other nodes keep their labels but lose
    /// every edge).
    pub fn induced(&self, nodes: &[usize]) -> Self {
        let mut keep = vec![false; self.n];
        for &v in nodes {
            keep[v] = true;
        }
        let mut g = Self::empty(self.schema.clone());
        for e in self.edges() {
            if keep[e.from] && keep[e.to] {
                if e.oriented {
                    g.set_directed(e.from, e.to);
                } else {
                    g.set_undirected(e.from, e.to);
                }
            }
        }
        g
    }
}

fn dot_id(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Structural Hamming distance: one unit per node pair whose edge status
/// differs (missing, extra, or differently oriented).
pub fn structural_hamming_distance(a: &CausalGraph, b: &CausalGraph) -> Result<usize> {
    if a.schema.labels() != b.schema.labels() {
        return Err(Error::SchemaMismatch(
            "graphs are over different schemas".into(),
        ));
    }
    let n = a.n;
    let mut d = 0;
    for i in 0..n {
        for j in i + 1..n {
            if a.mark(i, j) != b.mark(i, j) {
                d += 1;
            }
        }
    }
    Ok(d)
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    name: String,
    tier: Tier,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    from: String,
    to: String,
    oriented: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(n: usize) -> Arc<LabelSchema> {
        Arc::new(
            LabelSchema::from_pairs((0..n).map(|i| (format!("v{i}"), Tier::ALL[i % 3]))).unwrap(),
        )
    }

    /// The learned graph sketched for the method overview: two components,
    /// 1 cause -> 2 reasons -> 3 symptoms, and 1 cause -> 1 reason -> 2 symptoms.
    fn two_component_graph() -> CausalGraph {
        let s = Arc::new(
            LabelSchema::from_pairs([
                ("P1", Tier::Cause),
                ("R1", Tier::Reason),
                ("R2", Tier::Reason),
                ("S1", Tier::Symptom),
                ("S2", Tier::Symptom),
                ("S3", Tier::Symptom),
                ("P2", Tier::Cause),
                ("R3", Tier::Reason),
                ("S4", Tier::Symptom),
                ("S5", Tier::Symptom),
            ])
            .unwrap(),
        );
        CausalGraph::from_arcs(
            s,
            &[
                (0, 1),
                (0, 2),
                (1, 3),
                (1, 4),
                (2, 5),
                (6, 7),
                (7, 8),
                (7, 9),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_graph_is_dag() {
        assert!(CausalGraph::empty(schema(0)).is_dag());
        assert!(CausalGraph::empty(schema(4)).is_dag());
    }

    #[test]
    fn three_cycle_is_not_dag() {
        let g = CausalGraph::from_arcs(schema(3), &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(!g.is_dag());
    }

    #[test]
    fn undirected_edge_is_not_dag() {
        let mut g = CausalGraph::empty(schema(2));
        g.set_undirected(0, 1);
        assert!(!g.is_dag());
        assert!(g.directed_part_is_acyclic());
    }

    #[test]
    fn two_component_overview_graph_is_dag() {
        let g = two_component_graph();
        assert!(g.is_dag());
        assert_eq!(g.n_edges(), 8);
        for e in g.edges() {
            assert!(g.schema().tier(e.from) < g.schema().tier(e.to));
        }
    }

    #[test]
    fn rejects_self_loops_and_double_edges() {
        assert!(CausalGraph::from_arcs(schema(2), &[(0, 0)]).is_err());
        assert!(CausalGraph::from_arcs(schema(2), &[(0, 1), (1, 0)]).is_err());
        assert!(CausalGraph::from_arcs(schema(2), &[(0, 5)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut g = two_component_graph();
        g.set_undirected(3, 4);
        let back = CausalGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn dot_lines() {
        let mut g = CausalGraph::from_arcs(schema(3), &[(0, 1)]).unwrap();
        g.set_undirected(1, 2);
        let dot = g.to_dot();
        assert!(dot.contains("  \"v0\" -> \"v1\";\n"));
        assert!(dot.contains("  \"v1\" -- \"v2\";\n"));
    }

    #[test]
    fn d_separation_on_collider_and_chain() {
        // 0 -> 1 <- 2, 1 -> 3
        let g = CausalGraph::from_arcs(schema(4), &[(0, 1), (2, 1), (1, 3)]).unwrap();
        assert!(g.d_separated(0, 2, &[]));
        assert!(!g.d_separated(0, 2, &[1]));
        assert!(!g.d_separated(0, 2, &[3]));
        assert!(!g.d_separated(0, 3, &[]));
        assert!(g.d_separated(0, 3, &[1]));
    }

    #[test]
    fn shd_counts_pairs() {
        let s = schema(3);
        let a = CausalGraph::from_arcs(s.clone(), &[(0, 1), (1, 2)]).unwrap();
        let b = CausalGraph::from_arcs(s.clone(), &[(1, 0), (0, 2)]).unwrap();
        // reversed 0-1, missing 1-2, extra 0-2
        assert_eq!(structural_hamming_distance(&a, &b).unwrap(), 3);
        assert_eq!(structural_hamming_distance(&a, &a).unwrap(), 0);
    }
}
