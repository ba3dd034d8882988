//! Damped neighbour updates of per-label beliefs over a learned DAG.
//!
//! Every iteration visits each node `x` in the sweep order and, for each
//! neighbour `x'`, computes the message
//!
//! ```text
//! p*(x' = 1) = p(x = 1) · P(x' = 1 | x = 1) + p(x = 0) · P(x' = 1 | x = 0)
//! ```
//!
//! using the forward pairwise table when `x -> x'` and the backward one when
//! `x' -> x`, then moves `p(x')` a fraction `epsilon` of the way toward it.

use std::sync::Arc;

use rayon::prelude::*;

use crate::cpt::CptSet;
use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::model::{clip, BeliefVector, LabelSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborMode {
    /// Messages flow along edges in both directions.
    #[default]
    ParentsAndChildren,
    /// Only parents update their children.
    ChildrenOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Updates are applied in place; later nodes in the sweep read them.
    #[default]
    Sequential,
    /// Messages read the beliefs from the end of the previous iteration.
    Jacobi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    pub epsilon: f64,
    pub tau: usize,
    /// Node visiting order; `None` means the graph's topological order
    /// (smallest index first among ready nodes).
    pub sweep_order: Option<Vec<usize>>,
    pub neighbors: NeighborMode,
    pub schedule: Schedule,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            tau: 20,
            sweep_order: None,
            neighbors: NeighborMode::default(),
            schedule: Schedule::default(),
        }
    }
}

impl RefineConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be in [0, 1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Beliefs after each iteration; entry 0 is the clipped input.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineTrace {
    beliefs: Vec<BeliefVector>,
}

impl RefineTrace {
    pub fn iterations(&self) -> &[BeliefVector] {
        &self.beliefs
    }

    pub fn initial(&self) -> &BeliefVector {
        &self.beliefs[0]
    }

    pub fn last(&self) -> &BeliefVector {
        self.beliefs.last().expect("trace has an initial entry")
    }

    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Link {
    target: usize,
    /// `P(target = 1 | source = 0)`, `P(target = 1 | source = 1)`.
    table: [f64; 2],
}

/// A graph and its conditionals compiled into per-node message lists.
#[derive(Debug, Clone)]
pub struct Refiner {
    schema: Arc<LabelSchema>,
    order: Vec<usize>,
    links: Vec<Vec<Link>>,
    config: RefineConfig,
}

impl Refiner {
    pub fn new(graph: &CausalGraph, cpts: &CptSet, config: RefineConfig) -> Result<Self> {
        config.validate()?;
        if !graph.is_dag() {
            return Err(Error::NotADag(
                "refinement needs a fully oriented acyclic graph".into(),
            ));
        }
        if graph.schema().labels() != cpts.schema().labels() {
            return Err(Error::SchemaMismatch(
                "graph and CPTs use different schemas".into(),
            ));
        }
        let n = graph.n_nodes();
        let order = match &config.sweep_order {
            None => graph.topological_order().expect("checked acyclic"),
            Some(order) => {
                let mut seen = vec![false; n];
                for &v in order {
                    if v >= n || std::mem::replace(&mut seen[v], true) {
                        return Err(Error::InvalidArgument(
                            "sweep order must be a permutation of the labels".into(),
                        ));
                    }
                }
                if order.len() != n {
                    return Err(Error::InvalidArgument(
                        "sweep order must be a permutation of the labels".into(),
                    ));
                }
                order.clone()
            }
        };
        let missing = |from: usize, to: usize| {
            Error::SchemaMismatch(format!(
                "no pairwise conditionals for {} -> {}",
                graph.schema().name(from),
                graph.schema().name(to)
            ))
        };
        let mut links = vec![Vec::new(); n];
        for (x, out) in links.iter_mut().enumerate() {
            // neighbours in canonical order, parents and children interleaved
            for nb in graph.neighbors(x) {
                if graph.has_arc(x, nb) {
                    let e = cpts.edge(x, nb).ok_or_else(|| missing(x, nb))?;
                    out.push(Link {
                        target: nb,
                        table: e.forward,
                    });
                } else if config.neighbors == NeighborMode::ParentsAndChildren {
                    let e = cpts.edge(nb, x).ok_or_else(|| missing(nb, x))?;
                    out.push(Link {
                        target: nb,
                        table: e.backward,
                    });
                }
            }
        }
        Ok(Self {
            schema: graph.schema().clone(),
            order,
            links,
            config,
        })
    }

    pub fn config(&self) -> &RefineConfig {
        &self.config
    }

    pub fn sweep_order(&self) -> &[usize] {
        &self.order
    }

    pub fn run(&self, init: &BeliefVector) -> Result<RefineTrace> {
        if init.schema().labels() != self.schema.labels() {
            return Err(Error::SchemaMismatch(
                "beliefs and graph use different schemas".into(),
            ));
        }
        let eps = self.config.epsilon;
        let keep = 1.0 - eps;
        let mut p: Vec<f64> = init.values().iter().copied().map(clip).collect();
        let mut trace = Vec::with_capacity(self.config.tau + 1);
        trace.push(BeliefVector::new(self.schema.clone(), p.clone())?);
        let mut prev = p.clone();
        for _ in 0..self.config.tau {
            if self.config.schedule == Schedule::Jacobi {
                prev.copy_from_slice(&p);
            }
            for &x in &self.order {
                for link in &self.links[x] {
                    let source = match self.config.schedule {
                        Schedule::Sequential => p[x],
                        Schedule::Jacobi => prev[x],
                    };
                    let message = clip(source * link.table[1] + (1.0 - source) * link.table[0]);
                    p[link.target] = eps * message + keep * p[link.target];
                }
            }
            trace.push(BeliefVector::new(self.schema.clone(), p.clone())?);
        }
        Ok(RefineTrace { beliefs: trace })
    }

    /// Refines independent instances in parallel; output order matches input.
    pub fn run_batch(&self, inits: &[BeliefVector]) -> Result<Vec<RefineTrace>> {
        inits.par_iter().map(|b| self.run(b)).collect()
    }
}

/// One-shot refinement of a single belief vector.
pub fn refine(
    init: &BeliefVector,
    graph: &CausalGraph,
    cpts: &CptSet,
    config: &RefineConfig,
) -> Result<RefineTrace> {
    Refiner::new(graph, cpts, config.clone())?.run(init)
}
