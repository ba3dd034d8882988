//! F-measure scoring and iteration-curve experiments.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpt::{fit_cpts, CptSet};
use crate::error::{Error, Result};
use crate::graph::{structural_hamming_distance, CausalGraph};
use crate::meanshift::select_labels;
use crate::model::{BeliefVector, BinaryDataset};
use crate::pc::{discover, PcConfig, TierKnowledge};
use crate::refine::{RefineConfig, Refiner};
use crate::synth::{generate, SyntheticSpec};

/// Set-based F1 between predicted and true label sets; 1 when both are empty.
pub fn f_measure(predicted: &[usize], truth: &[usize]) -> f64 {
    let p: BTreeSet<usize> = predicted.iter().copied().collect();
    let t: BTreeSet<usize> = truth.iter().copied().collect();
    if p.is_empty() && t.is_empty() {
        return 1.0;
    }
    let hits = p.intersection(&t).count();
    2.0 * hits as f64 / (p.len() + t.len()) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub epsilon: f64,
    pub tau: usize,
    pub bandwidth: f64,
    /// `per_instance_f1[t][i]`: F1 of instance `i` after `t` iterations.
    pub per_instance_f1: Vec<Vec<f64>>,
    /// Mean over instances for `t = 0..=tau`.
    pub mean_f1: Vec<f64>,
    pub baseline_f1: f64,
}

impl EvalReport {
    pub fn best_gain(&self) -> f64 {
        self.mean_f1
            .iter()
            .skip(1)
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - self.baseline_f1
    }
}

/// Learning and refinement settings shared by every experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub pc: PcConfig,
    pub allow_tier_skip: bool,
    pub smoothing: f64,
    pub refine: RefineConfig,
    pub bandwidth: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pc: PcConfig::default(),
            allow_tier_skip: false,
            smoothing: 1.0,
            refine: RefineConfig::default(),
            bandwidth: 0.1,
        }
    }
}

/// Refines every base belief vector and scores each iteration against the
/// positives of the matching `truth` row.
pub fn evaluate_refinement(
    graph: &CausalGraph,
    cpts: &CptSet,
    base_beliefs: &[BeliefVector],
    truth: &BinaryDataset,
    refine: &RefineConfig,
    bandwidth: f64,
) -> Result<EvalReport> {
    if base_beliefs.len() != truth.n_rows() {
        return Err(Error::SchemaMismatch(format!(
            "{} belief rows for {} truth rows",
            base_beliefs.len(),
            truth.n_rows()
        )));
    }
    if truth.schema().labels() != graph.schema().labels() {
        return Err(Error::SchemaMismatch(
            "truth and graph use different schemas".into(),
        ));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let refiner = Refiner::new(graph, cpts, refine.clone())?;
    let scores: Vec<Vec<f64>> = base_beliefs
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let trace = refiner.run(b)?;
            let positives = truth.positives(i);
            trace
                .iterations()
                .iter()
                .map(|beliefs| Ok(f_measure(&select_labels(beliefs, bandwidth)?, &positives)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let iterations = refine.tau + 1;
    let per_instance_f1: Vec<Vec<f64>> = (0..iterations)
        .map(|t| scores.iter().map(|s| s[t]).collect())
        .collect();
    let mean_f1: Vec<f64> = per_instance_f1.iter().map(|row| mean(row)).collect();
    Ok(EvalReport {
        epsilon: refine.epsilon,
        tau: refine.tau,
        bandwidth,
        baseline_f1: mean_f1[0],
        per_instance_f1,
        mean_f1,
    })
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// A graph and conditionals learned from training data.
#[derive(Debug, Clone)]
pub struct LearnedModel {
    pub graph: CausalGraph,
    pub cpts: CptSet,
    pub low_power_skips: usize,
}

pub fn learn_model(train: &BinaryDataset, config: &ExperimentConfig) -> Result<LearnedModel> {
    let knowledge = TierKnowledge::tiered(train.schema().clone(), config.allow_tier_skip);
    let found = discover(train, &knowledge, &config.pc)?;
    if !found.graph.is_dag() {
        return Err(Error::NotFullyOriented {
            unoriented: found.graph.n_undirected(),
        });
    }
    let cpts = fit_cpts(train, &found.graph, config.smoothing)?;
    Ok(LearnedModel {
        graph: found.graph,
        cpts,
        low_power_skips: found.low_power_skips,
    })
}

/// Discover on `train`, fit CPTs, refine each test instance, score every iteration.
pub fn run_experiment(
    train: &BinaryDataset,
    test: &BinaryDataset,
    base_beliefs: &[BeliefVector],
    config: &ExperimentConfig,
) -> Result<EvalReport> {
    let model = learn_model(train, config)?;
    evaluate_refinement(
        &model.graph,
        &model.cpts,
        base_beliefs,
        test,
        &config.refine,
        config.bandwidth,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    /// SHD between the learned and the generating graph.
    pub shd: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub epsilon: f64,
    pub runs: Vec<SeedRun>,
    /// Per-iteration mean of the seed curves.
    pub mean_curve: Vec<f64>,
}

impl CurveFamily {
    pub fn best_gain(&self) -> f64 {
        let base = self.mean_curve[0];
        self.mean_curve
            .iter()
            .skip(1)
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - base
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    /// Generator settings; absent for evaluations of files on disk.
    pub spec: Option<SyntheticSpec>,
    pub alpha: Option<f64>,
    pub tau: usize,
    pub bandwidth: f64,
    pub families: Vec<CurveFamily>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `epsilon,seed,iteration,mean_f1`, one row per seed and iteration.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("epsilon,seed,iteration,mean_f1\n");
        for fam in &self.families {
            for run in &fam.runs {
                for (t, v) in run.report.mean_f1.iter().enumerate() {
                    let _ = writeln!(out, "{},{},{t},{v}", fam.epsilon, run.seed);
                }
            }
        }
        out
    }
}

/// Seeds × update rates on freshly generated data; the split-per-seed
/// protocol behind the iteration curves.
pub fn run_benchmark(
    spec: &SyntheticSpec,
    seeds: &[u64],
    epsilons: &[f64],
    config: &ExperimentConfig,
) -> Result<BenchmarkReport> {
    if seeds.is_empty() || epsilons.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one seed and one epsilon".into(),
        ));
    }
    let per_seed: Vec<Vec<SeedRun>> = seeds
        .par_iter()
        .map(|&seed| {
            let spec = SyntheticSpec {
                seed,
                ..spec.clone()
            };
            let data = generate(&spec)?;
            let model = learn_model(&data.train, config)?;
            let shd = structural_hamming_distance(&model.graph, &data.truth_graph)?;
            epsilons
                .iter()
                .map(|&epsilon| {
                    let refine = RefineConfig {
                        epsilon,
                        ..config.refine.clone()
                    };
                    let report = evaluate_refinement(
                        &model.graph,
                        &model.cpts,
                        &data.base_beliefs,
                        &data.test,
                        &refine,
                        config.bandwidth,
                    )?;
                    Ok(SeedRun { seed, shd, report })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let families = epsilons
        .iter()
        .enumerate()
        .map(|(k, &epsilon)| {
            let runs: Vec<SeedRun> = per_seed.iter().map(|r| r[k].clone()).collect();
            let mean_curve = (0..=config.refine.tau)
                .map(|t| mean(&runs.iter().map(|r| r.report.mean_f1[t]).collect::<Vec<_>>()))
                .collect();
            CurveFamily {
                epsilon,
                runs,
                mean_curve,
            }
        })
        .collect();
    Ok(BenchmarkReport {
        spec: Some(spec.clone()),
        alpha: Some(config.pc.ci.alpha),
        tau: config.refine.tau,
        bandwidth: config.bandwidth,
        families,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Wraps one file-based evaluation so it shares the benchmark's output formats.
pub fn single_run_report(reports: Vec<EvalReport>, seed: u64) -> BenchmarkReport {
    let tau = reports.first().map_or(0, |r| r.tau);
    let bandwidth = reports.first().map_or(0.0, |r| r.bandwidth);
    BenchmarkReport {
        spec: None,
        alpha: None,
        tau,
        bandwidth,
        families: reports
            .into_iter()
            .map(|report| CurveFamily {
                epsilon: report.epsilon,
                mean_curve: report.mean_f1.clone(),
                runs: vec![SeedRun {
                    seed,
                    shd: 0,
                    report,
                }],
            })
            .collect(),
    }
}

/// Labels predicted for each instance after the final iteration.
pub fn predicted_sets(beliefs: &[BeliefVector], bandwidth: f64) -> Result<Vec<Vec<usize>>> {
    beliefs
        .iter()
        .map(|b| select_labels(b, bandwidth))
        .collect()
}
