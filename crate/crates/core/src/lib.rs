//! Tiered causal discovery over binary diagnostic labels and graph-based
//! refinement of per-label predictions.
//!
//! The pipeline: learn a Cause → Reason → Symptom DAG with the PC algorithm
//! ([`pc`]), estimate its conditional probabilities ([`cpt`]), then pull an
//! upstream predictor's per-label marginals toward what their graph
//! neighbours imply ([`refine`]) and pick how many labels to emit
//! ([`meanshift`]). [`synth`] and [`eval`] provide a seeded benchmark.

pub mod ci;
pub mod cpt;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod meanshift;
pub mod model;
pub mod pc;
pub mod refine;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{structural_hamming_distance, CausalGraph, Edge};
pub use model::{BeliefVector, BinaryDataset, Label, LabelSchema, Tier, DELTA};
