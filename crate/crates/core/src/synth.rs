//! Seeded synthetic benchmarks: a random tiered DAG, strong CPTs, ancestral
//! samples, and simulated base-predictor beliefs for the test records.
//! Test records always carry at least one positive label.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cpt::{fit_cpts, CptSet, NodeCpt};
use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::model::{clip, BeliefVector, BinaryDataset, LabelSchema, Tier, DELTA};

/// Rows drawn from the true model to tabulate its pairwise edge conditionals.
const PAIRWISE_SAMPLE: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Number of (Cause, Reason, Symptom) labels.
    pub tier_sizes: (usize, usize, usize),
    pub max_in_degree: usize,
    pub edge_prob: f64,
    /// Conditionals are drawn outside `[0.5 - strength, 0.5 + strength]`.
    pub cpt_strength: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub flip_rate: f64,
    pub jitter: f64,
    pub allow_tier_skip: bool,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            tier_sizes: (3, 4, 6),
            max_in_degree: 2,
            edge_prob: 0.5,
            cpt_strength: 0.35,
            n_train: 2000,
            n_test: 200,
            flip_rate: 0.2,
            jitter: 0.05,
            allow_tier_skip: false,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleSpec(m));
        let (c, r, s) = self.tier_sizes;
        if c + r + s == 0 {
            return bad("at least one label is required".into());
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return bad(format!(
                "edge_prob must be in [0, 1], got {}",
                self.edge_prob
            ));
        }
        if self.edge_prob > 0.0 && self.max_in_degree > 0 {
            let possible = c * r + r * s + if self.allow_tier_skip { c * s } else { 0 };
            if possible == 0 {
                return bad(format!(
                    "tier sizes ({c}, {r}, {s}) admit no cross-tier edge but edge_prob is {}",
                    self.edge_prob
                ));
            }
        }
        if !(self.cpt_strength > 0.0 && self.cpt_strength <= 0.5) {
            return bad(format!(
                "cpt_strength must be in (0, 0.5], got {}",
                self.cpt_strength
            ));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return bad("n_train and n_test must be positive".into());
        }
        if !(0.0..0.5).contains(&self.flip_rate) {
            return bad(format!(
                "flip_rate must be in [0, 0.5), got {}",
                self.flip_rate
            ));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return bad(format!("jitter must be non-negative, got {}", self.jitter));
        }
        Ok(())
    }

    pub fn schema(&self) -> LabelSchema {
        let (c, r, s) = self.tier_sizes;
        let names = (1..=c)
            .map(|i| (format!("C{i}"), Tier::Cause))
            .chain((1..=r).map(|i| (format!("R{i}"), Tier::Reason)))
            .chain((1..=s).map(|i| (format!("S{i}"), Tier::Symptom)));
        LabelSchema::from_pairs(names).expect("generated names are unique")
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub truth_graph: CausalGraph,
    pub truth_cpts: CptSet,
    pub train: BinaryDataset,
    pub test: BinaryDataset,
    pub base_beliefs: Vec<BeliefVector>,
}

/// Independent random streams so that, e.g., changing `n_test` leaves the
/// graph and training data untouched.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn random_tiered_dag(
    spec: &SyntheticSpec,
    schema: Arc<LabelSchema>,
    rng: &mut ChaCha8Rng,
) -> CausalGraph {
    let mut g = CausalGraph::empty(schema.clone());
    for v in 0..schema.len() {
        let tier = schema.tier(v);
        let mut candidates: Vec<usize> = (0..schema.len())
            .filter(|&u| {
                let t = schema.tier(u);
                match (t, tier) {
                    (Tier::Cause, Tier::Reason) | (Tier::Reason, Tier::Symptom) => true,
                    (Tier::Cause, Tier::Symptom) => spec.allow_tier_skip,
                    _ => false,
                }
            })
            .collect();
        candidates.shuffle(rng);
        let mut indegree = 0;
        for u in candidates {
            if indegree >= spec.max_in_degree {
                break;
            }
            if rng.gen::<f64>() < spec.edge_prob {
                g.set_directed(u, v);
                indegree += 1;
            }
        }
    }
    g
}

/// Width of the intervals conditionals are drawn from, beyond the strength gap.
const CPT_BAND: f64 = 0.15;

/// Root priors are drawn from this range.
const ROOT_PRIOR: (f64, f64) = (0.3, 0.7);

/// Excitatory tables: each child with parents is a noisy OR or a noisy AND
/// of them, chosen at random. "On" configurations draw from
/// `[0.5 + s, 0.5 + s + band]`, the rest from `[0.5 - s - band, 0.5 - s]`,
/// both clamped to `[DELTA, 1 - DELTA]`.
fn random_cpts(spec: &SyntheticSpec, graph: &CausalGraph, rng: &mut ChaCha8Rng) -> Result<CptSet> {
    let s = spec.cpt_strength;
    let high = (
        (0.5 + s).min(1.0 - DELTA),
        (0.5 + s + CPT_BAND).min(1.0 - DELTA),
    );
    let low = ((0.5 - s - CPT_BAND).max(DELTA), (0.5 - s).max(DELTA));
    let uniform = |(a, b): (f64, f64), rng: &mut ChaCha8Rng| a + (b - a) * rng.gen::<f64>();
    let nodes = (0..graph.n_nodes())
        .map(|v| {
            let parents: Vec<usize> = graph.parents(v).collect();
            let full = (1usize << parents.len()) - 1;
            let and_gate = parents.len() > 1 && rng.gen::<bool>();
            let p_one = (0..=full)
                .map(|cfg| {
                    if parents.is_empty() {
                        uniform(ROOT_PRIOR, rng)
                    } else if (and_gate && cfg == full) || (!and_gate && cfg != 0) {
                        uniform(high, rng)
                    } else {
                        uniform(low, rng)
                    }
                })
                .collect();
            NodeCpt { parents, p_one }
        })
        .collect();
    CptSet::from_tables(graph.schema().clone(), nodes)
}

/// Simulated upstream predictor: each label's indicator is flipped with
/// probability `flip_rate` and reported with the matching calibrated
/// confidence (`1 - flip_rate` or `flip_rate`), plus Gaussian jitter of
/// standard deviation `jitter`.
pub fn simulate_beliefs<R: Rng + ?Sized>(
    truth: &BinaryDataset,
    flip_rate: f64,
    jitter: f64,
    rng: &mut R,
) -> Result<Vec<BeliefVector>> {
    let noise = Normal::new(0.0, jitter).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    (0..truth.n_rows())
        .map(|r| {
            let p = truth
                .row(r)
                .into_iter()
                .map(|t| {
                    let flipped = rng.gen::<f64>() < flip_rate;
                    let shown = if flipped { 1.0 - t as f64 } else { t as f64 };
                    let jitter = if jitter > 0.0 { noise.sample(rng) } else { 0.0 };
                    clip(shown * (1.0 - flip_rate) + (1.0 - shown) * flip_rate + jitter)
                })
                .collect();
            BeliefVector::new(truth.schema().clone(), p)
        })
        .collect()
}

/// Rows from `tables` that carry at least one positive label; all-negative
/// draws are discarded. Gives up after `100 * n` draws.
fn labelled_sample(
    tables: &CptSet,
    order: &[usize],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BinaryDataset> {
    let mut rows = Vec::with_capacity(n);
    let mut drawn = 0;
    while rows.len() < n {
        if drawn >= 100 * n {
            return Err(Error::InfeasibleSpec(
                "the generated model almost never produces a record with a positive label".into(),
            ));
        }
        let batch = tables.sample(order, n, rng)?;
        drawn += n;
        rows.extend(batch.rows().filter(|r| r.contains(&1)).take(n - rows.len()));
    }
    BinaryDataset::from_rows(tables.schema().clone(), &rows)
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let schema = Arc::new(spec.schema());
    let truth_graph = random_tiered_dag(spec, schema, &mut stream(spec.seed, 0));
    let order = truth_graph
        .topological_order()
        .expect("tiered graphs are acyclic");
    let tables = random_cpts(spec, &truth_graph, &mut stream(spec.seed, 1))?;
    let train = tables.sample(&order, spec.n_train, &mut stream(spec.seed, 2))?;
    let test = labelled_sample(&tables, &order, spec.n_test, &mut stream(spec.seed, 3))?;
    let base_beliefs = simulate_beliefs(
        &test,
        spec.flip_rate,
        spec.jitter,
        &mut stream(spec.seed, 4),
    )?;
    let reference = tables.sample(&order, PAIRWISE_SAMPLE, &mut stream(spec.seed, 5))?;
    let truth_cpts = tables.with_edges(&fit_cpts(&reference, &truth_graph, 1.0)?)?;
    Ok(SyntheticData {
        truth_graph,
        truth_cpts,
        train,
        test,
        base_beliefs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_graph_respects_tiers_and_in_degree() {
        for seed in 0..20 {
            let spec = SyntheticSpec {
                seed,
                n_train: 10,
                n_test: 10,
                ..SyntheticSpec::default()
            };
            let data = generate(&spec).unwrap();
            let g = &data.truth_graph;
            assert!(g.is_dag());
            for v in 0..g.n_nodes() {
                assert!(g.parents(v).count() <= spec.max_in_degree);
            }
            for e in g.edges() {
                let (a, b) = (g.schema().tier(e.from), g.schema().tier(e.to));
                assert_eq!(b.rank(), a.rank() + 1, "{a} -> {b}");
            }
        }
    }

    #[test]
    fn noiseless_beliefs_equal_truth() {
        let spec = SyntheticSpec {
            flip_rate: 0.0,
            jitter: 0.0,
            n_train: 10,
            n_test: 50,
            ..SyntheticSpec::default()
        };
        let data = generate(&spec).unwrap();
        for (r, b) in data.base_beliefs.iter().enumerate() {
            for (c, &p) in b.values().iter().enumerate() {
                assert_eq!(p, clip(data.test.get(r, c) as f64));
            }
        }
    }

    #[test]
    fn deterministic_tables_give_structural_equations() {
        let spec = SyntheticSpec {
            cpt_strength: 0.5,
            n_train: 200,
            n_test: 10,
            seed: 3,
            ..SyntheticSpec::default()
        };
        let data = generate(&spec).unwrap();
        let inner: Vec<usize> = (0..data.truth_graph.n_nodes())
            .filter(|&v| data.truth_graph.parents(v).count() > 0)
            .collect();
        assert!(!inner.is_empty());
        for &v in &inner {
            let node = data.truth_cpts.node(v);
            assert!(node.p_one.iter().all(|&p| p == DELTA || p == 1.0 - DELTA));
        }
        for r in 0..data.train.n_rows() {
            let row = data.train.row(r);
            for &v in &inner {
                let p = data.truth_cpts.p_one(v, &row);
                assert_eq!(row[v], (p > 0.5) as u8, "row {r} label {v}");
            }
        }
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let bad = SyntheticSpec {
            tier_sizes: (3, 0, 6),
            ..SyntheticSpec::default()
        };
        assert!(matches!(generate(&bad), Err(Error::InfeasibleSpec(_))));
        let bad = SyntheticSpec {
            flip_rate: 0.5,
            ..SyntheticSpec::default()
        };
        assert!(generate(&bad).is_err());
    }
}
