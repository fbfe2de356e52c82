//! End-to-end adaptation: PCA, source-only SLPP, initial pseudo-labels,
//! then `T` rounds of select → refit → relabel.

use std::fmt;

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::data::{
    validate_pair, DomainDataset, GroundTruth, LabelingMode, PseudoLabelSet, RunConfig,
    SelectionMode, ValidatedPair,
};
use crate::error::{Error, Result, Stage};
use crate::labeling::{
    compute_prototypes, fuse, kmeans_clusters, label_from, match_clusters, ncp_probabilities,
    sp_probabilities,
};
use crate::metrics::evaluate;
use crate::preprocess::{l2_normalize_columns, pca_fit_matrix, pca_transform};
use crate::selection::select;
use crate::subspace::{embed, slpp_fit, SlppModel};

/// Non-fatal conditions met during a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Zero vectors left unnormalized.
    ZeroVectors { stage: String, count: usize },
    /// PCA dimensionality reduced to the numerical rank.
    RankTruncated { requested: usize, kept: usize },
    /// `d2` lowered to the effective PCA dimensionality.
    SubspaceClamped { requested: usize, used: usize },
    /// A class mean was the zero vector.
    ZeroPrototype { iteration: usize, class: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ZeroVectors { stage, count } => {
                write!(f, "{count} zero vector(s) left unnormalized in {stage}")
            }
            Warning::RankTruncated { requested, kept } => write!(
                f,
                "PCA dimensionality {requested} exceeds numerical rank; kept {kept}"
            ),
            Warning::SubspaceClamped { requested, used } => {
                write!(f, "SLPP dimensionality {requested} lowered to {used}")
            }
            Warning::ZeroPrototype { iteration, class } => {
                write!(
                    f,
                    "iteration {iteration}: class {class} prototype is the zero vector"
                )
            }
        }
    }
}

/// State after iteration `k` (0 is the source-only model).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub k: usize,
    /// Target samples used in the fit that produced this state.
    pub selected: usize,
    /// Accuracy (%) when ground truth was supplied.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationResult {
    pub predictions: Vec<usize>,
    pub pseudo_labels: PseudoLabelSet,
    pub snapshots: Vec<Snapshot>,
    pub model: SlppModel,
    pub config: RunConfig,
    pub warnings: Vec<Warning>,
}

impl AdaptationResult {
    pub fn final_accuracy(&self) -> Option<f64> {
        self.snapshots.last().and_then(|s| s.accuracy)
    }
}

/// PCA-reduced, L2-normalized samples shared by every run on a task.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Source columns first, then target columns.
    all: Array2<f64>,
    n_source: usize,
    source_labels: Vec<usize>,
    num_classes: usize,
    warnings: Vec<Warning>,
}

impl Prepared {
    pub fn new(pair: &ValidatedPair, d1: usize) -> Result<Self> {
        let x = concatenate(
            Axis(1),
            &[
                pair.source().features().view(),
                pair.target().features().view(),
            ],
        )
        .expect("validated pair shares the feature dimension");
        let pca = pca_fit_matrix(x.view(), d1).map_err(|e| e.at(Stage::Pca))?;
        let mut warnings = Vec::new();
        if let Some(requested) = pca.truncated_from {
            warnings.push(Warning::RankTruncated {
                requested,
                kept: pca.output_dim(),
            });
        }
        let reduced = pca_transform(&pca, x.view()).map_err(|e| e.at(Stage::Pca))?;
        let (all, zeros) = l2_normalize_columns(reduced);
        if zeros > 0 {
            warnings.push(Warning::ZeroVectors {
                stage: "pca".into(),
                count: zeros,
            });
        }
        Ok(Prepared {
            all,
            n_source: pair.source().len(),
            source_labels: pair.source_labels().to_vec(),
            num_classes: pair.num_classes(),
            warnings,
        })
    }

    pub fn dim(&self) -> usize {
        self.all.nrows()
    }

    pub fn source(&self) -> ArrayView2<'_, f64> {
        self.all.slice(s![.., ..self.n_source])
    }

    pub fn target(&self) -> ArrayView2<'_, f64> {
        self.all.slice(s![.., self.n_source..])
    }

    pub fn n_target(&self) -> usize {
        self.all.ncols() - self.n_source
    }
}

/// Runs the full adaptation. Target labels, if present, are used only for
/// the per-iteration accuracy.
pub fn run(src: &DomainDataset, tgt: &DomainDataset, cfg: &RunConfig) -> Result<AdaptationResult> {
    let truth = tgt.ground_truth();
    let pair = validate_pair(src, tgt).map_err(|e| e.at(Stage::Validate))?;
    run_validated(&pair, cfg, truth.as_ref())
}

pub fn run_validated(
    pair: &ValidatedPair,
    cfg: &RunConfig,
    truth: Option<&GroundTruth>,
) -> Result<AdaptationResult> {
    cfg.validate(pair.source().dim())
        .map_err(|e| e.at(Stage::Validate))?;
    let prepared = Prepared::new(pair, cfg.d1)?;
    run_prepared(&prepared, cfg, truth)
}

pub fn run_prepared(
    prepared: &Prepared,
    cfg: &RunConfig,
    truth: Option<&GroundTruth>,
) -> Result<AdaptationResult> {
    if cfg.iterations == 0 {
        return Err(Error::Config("iteration count must be at least 1".into()).at(Stage::Validate));
    }
    if let Some(t) = truth {
        if t.as_slice().len() != prepared.n_target() {
            return Err(Error::DimensionMismatch {
                context: "ground truth length",
                expected: prepared.n_target(),
                found: t.as_slice().len(),
            }
            .at(Stage::Validate));
        }
    }
    let mut warnings = prepared.warnings.clone();
    let d2 = cfg.d2.min(prepared.dim());
    if d2 < cfg.d2 {
        warnings.push(Warning::SubspaceClamped {
            requested: cfg.d2,
            used: d2,
        });
    }
    let accuracy = |labels: &PseudoLabelSet| -> Result<Option<f64>> {
        truth
            .map(|t| evaluate(&labels.classes(), t.as_slice()))
            .transpose()
    };

    let source_only = slpp_fit(
        prepared.source(),
        &prepared.source_labels,
        prepared.all.view(),
        d2,
    )
    .map_err(|e| e.at(Stage::Slpp))?;
    let mut labels = pseudo_label(prepared, &source_only, cfg.labeling, 0, &mut warnings)?;
    let mut model = source_only.clone();
    let mut snapshots = vec![Snapshot {
        k: 0,
        selected: 0,
        accuracy: accuracy(&labels)?,
    }];

    for k in 1..=cfg.iterations {
        let chosen = select(&labels, k, cfg.iterations, cfg.selection)
            .map_err(|e| e.at(Stage::Selection))?;
        model = if chosen.is_empty() {
            source_only.clone()
        } else {
            let target_cols = prepared.target().select(Axis(1), &chosen.indices());
            let labeled = concatenate(Axis(1), &[prepared.source(), target_cols.view()])
                .expect("same row count");
            let mut fit_labels = prepared.source_labels.clone();
            fit_labels.extend(chosen.classes());
            slpp_fit(labeled.view(), &fit_labels, prepared.all.view(), d2)
                .map_err(|e| e.at(Stage::Slpp))?
        };
        labels = pseudo_label(prepared, &model, cfg.labeling, k, &mut warnings)?;
        snapshots.push(Snapshot {
            k,
            selected: chosen.len(),
            accuracy: accuracy(&labels)?,
        });
    }

    Ok(AdaptationResult {
        predictions: labels.classes(),
        pseudo_labels: labels,
        snapshots,
        model,
        config: *cfg,
        warnings,
    })
}

fn pseudo_label(
    prepared: &Prepared,
    model: &SlppModel,
    mode: LabelingMode,
    iteration: usize,
    warnings: &mut Vec<Warning>,
) -> Result<PseudoLabelSet> {
    let stage = |e: Error| e.at(Stage::Labeling);
    let (z, zeros) = embed(model, prepared.all.view()).map_err(stage)?;
    if zeros > 0 {
        warnings.push(Warning::ZeroVectors {
            stage: format!("embedding (iteration {iteration})"),
            count: zeros,
        });
    }
    let zs = z.slice(s![.., ..prepared.n_source]);
    let zt = z.slice(s![.., prepared.n_source..]);
    let protos =
        compute_prototypes(zs, &prepared.source_labels, prepared.num_classes).map_err(stage)?;
    for &class in &protos.zero_classes {
        warnings.push(Warning::ZeroPrototype { iteration, class });
    }

    let structured = || -> Result<_> {
        let clusters = kmeans_clusters(zt, &protos)?;
        let (matched, _) = match_clusters(&clusters, &protos)?;
        sp_probabilities(zt, &matched)
    };
    let table = match mode {
        LabelingMode::Ncp => ncp_probabilities(zt, &protos).map_err(stage)?,
        LabelingMode::Sp => structured().map_err(stage)?,
        LabelingMode::Fused => {
            let p1 = ncp_probabilities(zt, &protos).map_err(stage)?;
            let p2 = structured().map_err(stage)?;
            fuse(&p1, &p2).map_err(stage)?
        }
    };
    Ok(label_from(&table))
}

/// One cell of the ablation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationEntry {
    pub labeling: LabelingMode,
    pub selection: SelectionMode,
    pub result: AdaptationResult,
}

/// Every combination of labeling and selection mode on one task, sharing
/// the PCA step. `base` supplies `d1`, `d2`, `T` and the seed.
pub fn run_ablation(
    src: &DomainDataset,
    tgt: &DomainDataset,
    base: &RunConfig,
) -> Result<Vec<AblationEntry>> {
    let truth = tgt.ground_truth();
    let pair = validate_pair(src, tgt).map_err(|e| e.at(Stage::Validate))?;
    base.validate(pair.source().dim())
        .map_err(|e| e.at(Stage::Validate))?;
    let prepared = Prepared::new(&pair, base.d1)?;
    let mut entries = Vec::with_capacity(9);
    for selection in SelectionMode::ALL {
        for labeling in LabelingMode::ALL {
            let cfg = RunConfig {
                labeling,
                selection,
                ..*base
            };
            entries.push(AblationEntry {
                labeling,
                selection,
                result: run_prepared(&prepared, &cfg, truth.as_ref())?,
            });
        }
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub predictions: Vec<usize>,
    pub accuracy: Option<f64>,
}

/// 1-nearest-neighbor on the raw features after L2 normalization, with no
/// adaptation. Ties go to the lowest source index.
pub fn nn_baseline(src: &DomainDataset, tgt: &DomainDataset) -> Result<BaselineResult> {
    let truth = tgt.ground_truth();
    let pair = validate_pair(src, tgt).map_err(|e| e.at(Stage::Validate))?;
    let (xs, _) = l2_normalize_columns(pair.source().features().clone());
    let (xt, _) = l2_normalize_columns(pair.target().features().clone());
    let source_sq: Vec<f64> = xs.columns().into_iter().map(|c| c.dot(&c)).collect();
    let cross = xt.t().dot(&xs);
    let labels = pair.source_labels();
    let predictions: Vec<usize> = cross
        .rows()
        .into_iter()
        .map(|row| {
            // ‖t − s‖² up to the constant ‖t‖².
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, &dot) in row.iter().enumerate() {
                let d = source_sq[j] - 2.0 * dot;
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            labels[best]
        })
        .collect();
    let accuracy = truth
        .map(|t| evaluate(&predictions, t.as_slice()))
        .transpose()?;
    Ok(BaselineResult {
        predictions,
        accuracy,
    })
}
