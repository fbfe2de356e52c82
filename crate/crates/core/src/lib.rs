//! Unsupervised domain adaptation by selective pseudo-labeling.
//!
//! Source and target feature vectors are reduced with PCA, aligned in a
//! supervised locality preserving subspace, and target samples are labeled
//! by combining nearest class prototypes with a structured prediction over
//! K-means clusters. Confident target samples are admitted class by class
//! into the subspace fit over a fixed number of iterations.

pub mod data;
pub mod error;
pub mod io;
pub mod labeling;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod selection;
pub mod subspace;
pub mod synth;

pub use data::{
    validate_pair, ClassPartition, DomainDataset, DomainTag, GroundTruth, LabelingMode,
    PseudoLabel, PseudoLabelSet, RunConfig, SelectionMode, ValidatedPair,
};
pub use error::{Error, Result, Stage};
pub use pipeline::{nn_baseline, run, run_ablation, AdaptationResult, Snapshot, Warning};
