//! PC search with tiered background knowledge.
//!
//! The skeleton phase is the order-independent ("stable") variant: adjacency
//! sets are frozen at the start of each conditioning depth, every remaining
//! edge is tested against them, and removals are applied once the depth is
//! complete. Orientation applies tier knowledge first, then unshielded
//! colliders, then Meek's rules R1-R4 until nothing changes.

use std::collections::HashMap;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::ci::{CiConfig, CiTest, ContingencyTest};
use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::model::{BinaryDataset, LabelSchema, Tier};

/// Edge constraints implied by the Cause → Reason → Symptom ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TierKnowledge {
    schema: Arc<LabelSchema>,
    enforced: bool,
    allow_tier_skip: bool,
}

impl TierKnowledge {
    /// No edges within a tier; cross-tier edges point to the higher tier.
    /// Cause–Symptom edges are forbidden unless `allow_tier_skip`.
    pub fn tiered(schema: Arc<LabelSchema>, allow_tier_skip: bool) -> Self {
        for tier in Tier::ALL {
            if schema.indices_in(tier).next().is_none() {
                warn!("tier {tier} has no labels");
            }
        }
        Self {
            schema,
            enforced: true,
            allow_tier_skip,
        }
    }

    /// No background knowledge at all; discovery yields a CPDAG.
    pub fn unconstrained(schema: Arc<LabelSchema>) -> Self {
        Self {
            schema,
            enforced: false,
            allow_tier_skip: true,
        }
    }

    pub fn schema(&self) -> &Arc<LabelSchema> {
        &self.schema
    }

    pub fn is_enforced(&self) -> bool {
        self.enforced
    }

    pub fn allow_tier_skip(&self) -> bool {
        self.allow_tier_skip
    }

    /// True iff an edge `from -> to` is not allowed.
    pub fn forbids(&self, from: usize, to: usize) -> bool {
        if !self.enforced {
            return false;
        }
        let (tf, tt) = (self.schema.tier(from), self.schema.tier(to));
        if tf >= tt {
            return true;
        }
        !self.allow_tier_skip && tf == Tier::Cause && tt == Tier::Symptom
    }

    /// True iff no edge of either direction may join `a` and `b`.
    pub fn forbids_pair(&self, a: usize, b: usize) -> bool {
        self.forbids(a, b) && self.forbids(b, a)
    }

    /// The only direction an `a`–`b` edge may take, when knowledge fixes one.
    pub fn required_direction(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        match (self.forbids(a, b), self.forbids(b, a)) {
            (false, true) => Some((a, b)),
            (true, false) => Some((b, a)),
            _ => None,
        }
    }

    /// Unordered pairs `(a, b)`, `a < b`, that may carry an edge.
    pub fn legal_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.schema.len();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| !self.forbids_pair(a, b))
            .collect()
    }
}

/// Conditioning sets that separated removed skeleton edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetMap {
    sets: HashMap<(usize, usize), Vec<usize>>,
}

impl SepsetMap {
    fn key(a: usize, b: usize) -> (usize, usize) {
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn insert(&mut self, a: usize, b: usize, mut set: Vec<usize>) {
        set.sort_unstable();
        self.sets.insert(Self::key(a, b), set);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&[usize]> {
        self.sets.get(&Self::key(a, b)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Entries sorted by pair.
    pub fn entries(&self) -> Vec<((usize, usize), &[usize])> {
        let mut v: Vec<_> = self.sets.iter().map(|(k, s)| (*k, s.as_slice())).collect();
        v.sort_unstable_by_key(|(k, _)| *k);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcConfig {
    pub ci: CiConfig,
    pub max_cond: usize,
    pub strict: bool,
}

impl Default for PcConfig {
    fn default() -> Self {
        Self {
            ci: CiConfig::default(),
            max_cond: 3,
            strict: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Skeleton {
    pub graph: CausalGraph,
    pub sepsets: SepsetMap,
    pub low_power_skips: usize,
    pub tests_run: usize,
}

#[derive(Debug, Clone)]
pub struct Orientation {
    pub graph: CausalGraph,
    /// Collider arms skipped because the opposite direction was already set.
    pub collider_conflicts: usize,
    /// Colliders skipped because an arm would violate tier knowledge.
    pub knowledge_vetoes: usize,
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub graph: CausalGraph,
    pub sepsets: SepsetMap,
    pub low_power_skips: usize,
    pub tests_run: usize,
    pub collider_conflicts: usize,
    pub knowledge_vetoes: usize,
}

/// Calls `f` on every size-`k` subset of `items` in lexicographic order of
/// positions; stops early when `f` returns `true`.
fn any_subset(
    items: &[usize],
    k: usize,
    mut f: impl FnMut(&[usize]) -> Result<bool>,
) -> Result<bool> {
    if k > items.len() {
        return Ok(false);
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0; k];
    loop {
        for (slot, &i) in buf.iter_mut().zip(&idx) {
            *slot = items[i];
        }
        if f(&buf)? {
            return Ok(true);
        }
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(false);
            }
            i -= 1;
            if idx[i] != i + items.len() - k {
                break;
            }
            if i == 0 {
                return Ok(false);
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct EdgeOutcome {
    sepset: Option<Vec<usize>>,
    low_power: usize,
    tests: usize,
}

fn test_edge(
    test: &dyn CiTest,
    x: usize,
    y: usize,
    adjacency: &[Vec<usize>],
    depth: usize,
) -> Result<EdgeOutcome> {
    let mut out = EdgeOutcome {
        sepset: None,
        low_power: 0,
        tests: 0,
    };
    let from_x: Vec<usize> = adjacency[x].iter().copied().filter(|&v| v != y).collect();
    let from_y: Vec<usize> = adjacency[y].iter().copied().filter(|&v| v != x).collect();

    for (side, candidates) in [from_x.as_slice(), from_y.as_slice()]
        .into_iter()
        .enumerate()
    {
        if side == 1 && depth == 0 {
            break;
        }
        let found = any_subset(candidates, depth, |z| {
            // subsets drawn entirely from adj(x) were already tried
            if side == 1 && z.iter().all(|v| from_x.contains(v)) {
                return Ok(false);
            }
            let r = test.test(x, y, z)?;
            out.tests += 1;
            if r.low_power {
                out.low_power += 1;
            }
            if r.independent {
                out.sepset = Some(z.to_vec());
            }
            Ok(r.independent)
        })?;
        if found {
            break;
        }
    }
    Ok(out)
}

/// Stable-PC skeleton search using any independence test.
pub fn learn_skeleton_with(
    test: &dyn CiTest,
    knowledge: &TierKnowledge,
    max_cond: usize,
) -> Result<Skeleton> {
    let schema = knowledge.schema().clone();
    if test.n_vars() != schema.len() {
        return Err(Error::SchemaMismatch(format!(
            "test covers {} variables, knowledge {}",
            test.n_vars(),
            schema.len()
        )));
    }
    let legal = knowledge.legal_pairs();
    if knowledge.is_enforced() && legal.is_empty() && schema.len() > 1 {
        return Err(Error::NoLegalEdges);
    }

    let mut graph = CausalGraph::empty(schema);
    for &(a, b) in &legal {
        graph.set_undirected(a, b);
    }
    let mut sepsets = SepsetMap::default();
    let mut low_power_skips = 0;
    let mut tests_run = 0;

    for depth in 0..=max_cond {
        let adjacency: Vec<Vec<usize>> = (0..graph.n_nodes())
            .map(|v| graph.neighbors(v).collect())
            .collect();
        let edges = graph.edges();
        let testable = edges
            .iter()
            .any(|e| adjacency[e.from].len().max(adjacency[e.to].len()) > depth);
        if !testable {
            break;
        }
        let outcomes = edges
            .par_iter()
            .map(|e| test_edge(test, e.from, e.to, &adjacency, depth))
            .collect::<Result<Vec<_>>>()?;
        for (e, outcome) in edges.iter().zip(outcomes) {
            low_power_skips += outcome.low_power;
            tests_run += outcome.tests;
            if let Some(set) = outcome.sepset {
                graph.remove_edge(e.from, e.to);
                sepsets.insert(e.from, e.to, set);
            }
        }
    }
    if low_power_skips > 0 {
        warn!("{low_power_skips} independence test(s) skipped for low power and treated as independent");
    }
    Ok(Skeleton {
        graph,
        sepsets,
        low_power_skips,
        tests_run,
    })
}

/// Stable-PC skeleton on data with the configured contingency test.
pub fn learn_skeleton(
    data: &BinaryDataset,
    knowledge: &TierKnowledge,
    config: &PcConfig,
) -> Result<Skeleton> {
    check_schema(data.schema(), knowledge.schema())?;
    let test = ContingencyTest::new(data, config.ci)?;
    learn_skeleton_with(&test, knowledge, config.max_cond)
}

fn check_schema(a: &LabelSchema, b: &LabelSchema) -> Result<()> {
    if a.labels() != b.labels() {
        return Err(Error::SchemaMismatch(
            "dataset and knowledge use different label schemas".into(),
        ));
    }
    Ok(())
}

fn meek_orients(g: &CausalGraph, a: usize, b: usize) -> bool {
    // R1: c -> a - b, c and b nonadjacent
    if g.parents(a).any(|c| c != b && !g.adjacent(c, b)) {
        return true;
    }
    // R2: a -> c -> b
    if g.children(a).any(|c| g.has_arc(c, b)) {
        return true;
    }
    let undirected: Vec<usize> = g.undirected_neighbors(a).filter(|&c| c != b).collect();
    // R3: a - c -> b, a - d -> b, c and d nonadjacent
    let into_b: Vec<usize> = undirected
        .iter()
        .copied()
        .filter(|&c| g.has_arc(c, b))
        .collect();
    for (i, &c) in into_b.iter().enumerate() {
        if into_b[i + 1..].iter().any(|&d| !g.adjacent(c, d)) {
            return true;
        }
    }
    // R4: a - c -> d -> b, a adjacent to d, c and b nonadjacent
    for &c in &undirected {
        if g.adjacent(c, b) {
            continue;
        }
        if g.children(c)
            .any(|d| d != a && g.has_arc(d, b) && g.adjacent(a, d))
        {
            return true;
        }
    }
    false
}

/// Applies Meek's rules until no undirected edge changes.
pub fn meek_closure(g: &mut CausalGraph, knowledge: &TierKnowledge) {
    loop {
        let mut changed = false;
        for a in 0..g.n_nodes() {
            let candidates: Vec<usize> = g.undirected_neighbors(a).collect();
            for b in candidates {
                if g.has_undirected(a, b) && !knowledge.forbids(a, b) && meek_orients(g, a, b) {
                    g.set_directed(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

fn check_knowledge(g: &CausalGraph, knowledge: &TierKnowledge) -> Result<()> {
    for e in g.edges() {
        let bad = if e.oriented {
            knowledge.forbids(e.from, e.to)
        } else {
            knowledge.forbids_pair(e.from, e.to)
        };
        if bad {
            return Err(Error::KnowledgeViolation {
                from: g.schema().name(e.from).to_string(),
                to: g.schema().name(e.to).to_string(),
            });
        }
    }
    Ok(())
}

/// Orients a skeleton: tier knowledge, then colliders, then Meek's rules.
pub fn orient(
    skeleton: &CausalGraph,
    sepsets: &SepsetMap,
    knowledge: &TierKnowledge,
    strict: bool,
) -> Result<Orientation> {
    check_schema(skeleton.schema(), knowledge.schema())?;
    let mut g = skeleton.clone();
    let n = g.n_nodes();

    for e in g.edges() {
        if e.oriented {
            continue;
        }
        if knowledge.forbids_pair(e.from, e.to) {
            return Err(Error::KnowledgeViolation {
                from: g.schema().name(e.from).to_string(),
                to: g.schema().name(e.to).to_string(),
            });
        }
        if let Some((from, to)) = knowledge.required_direction(e.from, e.to) {
            g.set_directed(from, to);
        }
    }

    let mut collider_conflicts = 0;
    let mut knowledge_vetoes = 0;
    for z in 0..n {
        let around: Vec<usize> = skeleton.neighbors(z).collect();
        for (i, &x) in around.iter().enumerate() {
            for &y in &around[i + 1..] {
                if skeleton.adjacent(x, y) {
                    continue;
                }
                let Some(sep) = sepsets.get(x, y) else {
                    continue;
                };
                if sep.contains(&z) {
                    continue;
                }
                if knowledge.forbids(x, z) || knowledge.forbids(y, z) {
                    knowledge_vetoes += 1;
                    continue;
                }
                for arm in [x, y] {
                    if g.has_arc(z, arm) {
                        collider_conflicts += 1;
                    } else {
                        g.set_directed(arm, z);
                    }
                }
            }
        }
    }
    if collider_conflicts > 0 {
        warn!("{collider_conflicts} conflicting collider orientation(s) skipped");
    }

    meek_closure(&mut g, knowledge);

    if !g.directed_part_is_acyclic() {
        return Err(Error::CycleIntroduced);
    }
    check_knowledge(&g, knowledge)?;
    let unoriented = g.n_undirected();
    if strict && unoriented > 0 {
        return Err(Error::NotFullyOriented { unoriented });
    }
    Ok(Orientation {
        graph: g,
        collider_conflicts,
        knowledge_vetoes,
    })
}

/// Skeleton search followed by orientation, with an arbitrary test.
pub fn discover_with(
    test: &dyn CiTest,
    knowledge: &TierKnowledge,
    max_cond: usize,
    strict: bool,
) -> Result<Discovery> {
    let skeleton = learn_skeleton_with(test, knowledge, max_cond)?;
    let oriented = orient(&skeleton.graph, &skeleton.sepsets, knowledge, strict)?;
    Ok(Discovery {
        graph: oriented.graph,
        sepsets: skeleton.sepsets,
        low_power_skips: skeleton.low_power_skips,
        tests_run: skeleton.tests_run,
        collider_conflicts: oriented.collider_conflicts,
        knowledge_vetoes: oriented.knowledge_vetoes,
    })
}

/// Full PC run on data.
pub fn discover(
    data: &BinaryDataset,
    knowledge: &TierKnowledge,
    config: &PcConfig,
) -> Result<Discovery> {
    check_schema(data.schema(), knowledge.schema())?;
    let test = ContingencyTest::new(data, config.ci)?;
    discover_with(&test, knowledge, config.max_cond, config.strict)
}
