#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use causal_refine::{BinaryDataset, CausalGraph, LabelSchema, Tier};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn schema_of(tiers: &[Tier]) -> Arc<LabelSchema> {
    Arc::new(
        LabelSchema::from_pairs(
            tiers
                .iter()
                .enumerate()
                .map(|(i, &t)| (format!("{t}{i}"), t)),
        )
        .unwrap(),
    )
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n_rows: usize, n_cols: usize) -> BinaryDataset {
    let tiers: Vec<Tier> = (0..n_cols).map(|i| Tier::ALL[i % 3]).collect();
    let bias: Vec<f64> = (0..n_cols).map(|_| rng.gen_range(0.1..0.9)).collect();
    let rows: Vec<Vec<u8>> = (0..n_rows)
        .map(|_| bias.iter().map(|&b| rng.gen_bool(b) as u8).collect())
        .collect();
    BinaryDataset::from_rows(schema_of(&tiers), &rows).unwrap()
}

/// G² by entropy decomposition over row tuples, stratum by stratum.
/// Returns (statistic, number of non-empty strata).
pub fn brute_force_g2(data: &BinaryDataset, x: usize, y: usize, z: &[usize]) -> (f64, usize) {
    let mut strata: BTreeMap<Vec<u8>, [[f64; 2]; 2]> = BTreeMap::new();
    for r in 0..data.n_rows() {
        let key: Vec<u8> = z.iter().map(|&c| data.get(r, c)).collect();
        strata.entry(key).or_default()[data.get(r, x) as usize][data.get(r, y) as usize] += 1.0;
    }
    let xlogx = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
    let mut g = 0.0;
    for t in strata.values() {
        let n: f64 = t.iter().flatten().sum();
        let cells: f64 = t.iter().flatten().map(|&v| xlogx(v)).sum();
        let rows: f64 = (0..2).map(|a| xlogx(t[a][0] + t[a][1])).sum();
        let cols: f64 = (0..2).map(|b| xlogx(t[0][b] + t[1][b])).sum();
        g += 2.0 * (cells - rows - cols + xlogx(n));
    }
    (g.max(0.0), strata.len())
}

/// Random DAG over at least two tiers with edges from lower to strictly
/// higher tiers only, so tier knowledge orients every edge. The flag says
/// whether Cause -> Symptom edges must be allowed.
pub fn random_tiered_dag(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    edge_prob: f64,
) -> (CausalGraph, bool) {
    let n = rng.gen_range(2..=max_nodes);
    let mut tiers: Vec<Tier> = loop {
        let t: Vec<Tier> = (0..n).map(|_| Tier::ALL[rng.gen_range(0..3)]).collect();
        if t.iter().any(|&x| x != t[0]) {
            break t;
        }
    };
    tiers.sort_by_key(|t| t.rank());
    let schema = schema_of(&tiers);
    let mut arcs = Vec::new();
    let mut skip = false;
    for a in 0..n {
        for b in 0..n {
            if tiers[a].rank() < tiers[b].rank() && rng.gen_bool(edge_prob) {
                skip |= tiers[b].rank() - tiers[a].rank() == 2;
                arcs.push((a, b));
            }
        }
    }
    // with only Cause and Symptom labels present, skipping is the only legal edge
    let has = |t: Tier| tiers.contains(&t);
    skip |= !has(Tier::Reason);
    (CausalGraph::from_arcs(schema, &arcs).unwrap(), skip)
}

/// True if the directed part of `g` contains a cycle, by exhaustive search
/// over simple paths.
pub fn has_cycle_brute_force(n: usize, arcs: &[(usize, usize)]) -> bool {
    fn dfs(v: usize, start: usize, arcs: &[(usize, usize)], on_path: &mut Vec<bool>) -> bool {
        for &(a, b) in arcs {
            if a != v {
                continue;
            }
            if b == start {
                return true;
            }
            if !on_path[b] {
                on_path[b] = true;
                if dfs(b, start, arcs, on_path) {
                    return true;
                }
                on_path[b] = false;
            }
        }
        false
    }
    (0..n).any(|s| {
        let mut on_path = vec![false; n];
        on_path[s] = true;
        dfs(s, s, arcs, &mut on_path)
    })
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_causal-refine")
}
