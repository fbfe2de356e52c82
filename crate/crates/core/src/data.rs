//! Dataset containers, pseudo-label bookkeeping and run configuration.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Source,
    Target,
}

/// Feature matrix (`d × n`, one sample per column) with optional class ids.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDataset {
    features: Array2<f64>,
    labels: Option<Vec<usize>>,
    num_classes: usize,
    tag: DomainTag,
}

impl DomainDataset {
    /// Labeled dataset; the label space is `0..=max(labels)`.
    pub fn labeled(features: Array2<f64>, labels: Vec<usize>, tag: DomainTag) -> Result<Self> {
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::with_classes(features, labels, num_classes, tag)
    }

    /// Labeled dataset over an explicit label space `0..num_classes`.
    pub fn with_classes(
        features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        tag: DomainTag,
    ) -> Result<Self> {
        check_features(&features)?;
        if labels.len() != features.ncols() {
            return Err(Error::DimensionMismatch {
                context: "label count",
                expected: features.ncols(),
                found: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidInput(format!(
                "label {bad} outside label space of size {num_classes}"
            )));
        }
        Ok(DomainDataset {
            features,
            labels: Some(labels),
            num_classes,
            tag,
        })
    }

    pub fn unlabeled(features: Array2<f64>, tag: DomainTag) -> Result<Self> {
        check_features(&features)?;
        Ok(DomainDataset {
            features,
            labels: None,
            num_classes: 0,
            tag,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.ncols() == 0
    }

    /// Copies the labels into the evaluation-only channel.
    pub fn ground_truth(&self) -> Option<GroundTruth> {
        self.labels.clone().map(GroundTruth)
    }

    /// Same features, labels dropped.
    pub fn without_labels(&self) -> DomainDataset {
        DomainDataset {
            features: self.features.clone(),
            labels: None,
            num_classes: 0,
            tag: self.tag,
        }
    }
}

fn check_features(features: &Array2<f64>) -> Result<()> {
    if features.ncols() == 0 || features.nrows() == 0 {
        return Err(Error::InvalidInput(
            "dataset has no samples or no features".into(),
        ));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "dataset has non-finite feature values".into(),
        ));
    }
    Ok(())
}

/// Target labels kept apart from the adaptation pipeline; read only by
/// accuracy metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth(pub Vec<usize>);

impl GroundTruth {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Source and target that passed [`validate_pair`]. The target copy never
/// carries labels.
#[derive(Debug, Clone)]
pub struct ValidatedPair {
    source: DomainDataset,
    target: DomainDataset,
    num_classes: usize,
}

impl ValidatedPair {
    pub fn source(&self) -> &DomainDataset {
        &self.source
    }

    pub fn target(&self) -> &DomainDataset {
        &self.target
    }

    pub fn source_labels(&self) -> &[usize] {
        self.source.labels().expect("validated source is labeled")
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }
}

/// Checks that the pair shares a feature dimension, the source is fully
/// labeled and every class of the label space has a source sample.
pub fn validate_pair(src: &DomainDataset, tgt: &DomainDataset) -> Result<ValidatedPair> {
    if src.dim() != tgt.dim() {
        return Err(Error::DimensionMismatch {
            context: "target feature dimension",
            expected: src.dim(),
            found: tgt.dim(),
        });
    }
    let labels = src
        .labels()
        .ok_or_else(|| Error::InvalidInput("source dataset must be labeled".into()))?;
    let num_classes = src.num_classes();
    if num_classes == 0 {
        return Err(Error::InvalidInput("source label space is empty".into()));
    }
    let mut counts = vec![0usize; num_classes];
    for &l in labels {
        counts[l] += 1;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass { class });
    }
    Ok(ValidatedPair {
        source: src.clone(),
        target: tgt.without_labels(),
        num_classes,
    })
}

/// One pseudo-labeled target sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabel {
    pub index: usize,
    pub class: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PseudoLabelSet {
    entries: Vec<PseudoLabel>,
}

impl PseudoLabelSet {
    /// Rejects duplicate indices and confidences outside `[0, 1]`.
    pub fn new(entries: Vec<PseudoLabel>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if !seen.insert(e.index) {
                return Err(Error::InvalidInput(format!(
                    "duplicate pseudo-label for target {}",
                    e.index
                )));
            }
            if !(0.0..=1.0).contains(&e.confidence) {
                return Err(Error::InvalidInput(format!(
                    "confidence {} for target {} outside [0, 1]",
                    e.confidence, e.index
                )));
            }
        }
        Ok(PseudoLabelSet { entries })
    }

    pub fn empty() -> Self {
        PseudoLabelSet::default()
    }

    pub fn entries(&self) -> &[PseudoLabel] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    pub fn classes(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.class).collect()
    }
}

/// Target indices grouped by pseudo-label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    members: Vec<Vec<usize>>,
}

impl ClassPartition {
    pub fn from_labels(labels: &PseudoLabelSet, num_classes: usize) -> Result<Self> {
        let mut members = vec![Vec::new(); num_classes];
        for e in labels.entries() {
            let slot = members.get_mut(e.class).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "pseudo-label class {} outside label space of size {num_classes}",
                    e.class
                ))
            })?;
            slot.push(e.index);
        }
        Ok(ClassPartition { members })
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    pub fn count(&self, class: usize) -> usize {
        self.members[class].len()
    }

    pub fn num_classes(&self) -> usize {
        self.members.len()
    }
}

/// Which probability table drives pseudo-labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelingMode {
    /// Nearest class prototype.
    Ncp,
    /// Structured prediction over matched K-means clusters.
    Sp,
    /// Elementwise maximum of both.
    Fused,
}

/// How pseudo-labeled targets join the subspace fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Never; the source-only projection is kept.
    None,
    /// Every pseudo-labeled target, every iteration.
    All,
    /// Class-wise top fraction growing with the iteration.
    Progressive,
}

impl LabelingMode {
    pub const ALL: [LabelingMode; 3] = [LabelingMode::Ncp, LabelingMode::Sp, LabelingMode::Fused];
}

impl SelectionMode {
    pub const ALL: [SelectionMode; 3] = [
        SelectionMode::None,
        SelectionMode::All,
        SelectionMode::Progressive,
    ];
}

impl fmt::Display for LabelingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelingMode::Ncp => "ncp",
            LabelingMode::Sp => "sp",
            LabelingMode::Fused => "fused",
        })
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMode::None => "none",
            SelectionMode::All => "all",
            SelectionMode::Progressive => "progressive",
        })
    }
}

impl FromStr for LabelingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ncp" => Ok(LabelingMode::Ncp),
            "sp" => Ok(LabelingMode::Sp),
            "fused" => Ok(LabelingMode::Fused),
            other => Err(Error::Config(format!("unknown labeling mode '{other}'"))),
        }
    }
}

impl FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(SelectionMode::None),
            "all" => Ok(SelectionMode::All),
            "progressive" => Ok(SelectionMode::Progressive),
            other => Err(Error::Config(format!("unknown selection mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    /// PCA dimensionality.
    pub d1: usize,
    /// SLPP subspace dimensionality.
    pub d2: usize,
    /// Number of refinement iterations `T`.
    pub iterations: usize,
    pub labeling: LabelingMode,
    pub selection: SelectionMode,
    pub seed: u64,
}

impl RunConfig {
    pub const DEFAULT_D2: usize = 128;
    pub const DEFAULT_ITERATIONS: usize = 10;

    pub fn new(d1: usize) -> Self {
        RunConfig {
            d1,
            d2: Self::DEFAULT_D2.min(d1),
            iterations: Self::DEFAULT_ITERATIONS,
            labeling: LabelingMode::Fused,
            selection: SelectionMode::Progressive,
            seed: 0,
        }
    }

    /// Checks `1 ≤ d2 ≤ d1 ≤ dim` and `T ≥ 1`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.d2 == 0 {
            return Err(Error::Config("d2 must be at least 1".into()));
        }
        if self.d2 > self.d1 {
            return Err(Error::Config(format!(
                "d2 ({}) exceeds d1 ({})",
                self.d2, self.d1
            )));
        }
        if self.d1 > dim {
            return Err(Error::Config(format!(
                "d1 ({}) exceeds feature dimension ({dim})",
                self.d1
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iteration count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Documented `d1` presets for the standard benchmarks (`d2 = 128`, `T = 10`).
pub const D1_PRESETS: [(&str, usize); 4] = [
    ("office-caltech", 128),
    ("office31", 512),
    ("imageclef-da", 128),
    ("office-home", 1024),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn features(d: usize, n: usize) -> Array2<f64> {
        Array2::from_shape_fn((d, n), |(i, j)| (i * n + j) as f64)
    }

    #[test]
    fn valid_pair() {
        let src = DomainDataset::labeled(features(4, 6), vec![0, 1, 2, 0, 1, 2], DomainTag::Source)
            .unwrap();
        let tgt = DomainDataset::unlabeled(features(4, 5), DomainTag::Target).unwrap();
        let pair = validate_pair(&src, &tgt).unwrap();
        assert_eq!(pair.num_classes(), 3);
    }

    #[test]
    fn dimension_mismatch() {
        let src = DomainDataset::labeled(features(4, 2), vec![0, 1], DomainTag::Source).unwrap();
        let tgt = DomainDataset::unlabeled(features(5, 2), DomainTag::Target).unwrap();
        assert!(matches!(
            validate_pair(&src, &tgt),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn missing_source_class() {
        let src = DomainDataset::with_classes(features(4, 3), vec![0, 1, 0], 3, DomainTag::Source)
            .unwrap();
        let tgt = DomainDataset::unlabeled(features(4, 2), DomainTag::Target).unwrap();
        assert!(matches!(
            validate_pair(&src, &tgt),
            Err(Error::EmptyClass { class: 2 })
        ));
    }

    #[test]
    fn unlabeled_source_rejected() {
        let src = DomainDataset::unlabeled(features(4, 2), DomainTag::Source).unwrap();
        let tgt = DomainDataset::unlabeled(features(4, 2), DomainTag::Target).unwrap();
        assert!(validate_pair(&src, &tgt).is_err());
    }

    #[test]
    fn target_labels_are_quarantined() {
        let src = DomainDataset::labeled(features(2, 2), vec![0, 1], DomainTag::Source).unwrap();
        let tgt = DomainDataset::labeled(features(2, 2), vec![1, 0], DomainTag::Target).unwrap();
        let pair = validate_pair(&src, &tgt).unwrap();
        assert!(pair.target().labels().is_none());
        assert_eq!(tgt.ground_truth().unwrap().as_slice(), &[1, 0]);
    }

    #[test]
    fn pseudo_label_set_invariants() {
        let ok = PseudoLabelSet::new(vec![
            PseudoLabel {
                index: 0,
                class: 1,
                confidence: 0.5,
            },
            PseudoLabel {
                index: 1,
                class: 0,
                confidence: 1.0,
            },
        ]);
        assert!(ok.is_ok());
        let dup = PseudoLabelSet::new(vec![
            PseudoLabel {
                index: 0,
                class: 1,
                confidence: 0.5,
            },
            PseudoLabel {
                index: 0,
                class: 0,
                confidence: 0.5,
            },
        ]);
        assert!(dup.is_err());
        let bad = PseudoLabelSet::new(vec![PseudoLabel {
            index: 0,
            class: 1,
            confidence: 1.5,
        }]);
        assert!(bad.is_err());
    }

    #[test]
    fn config_bounds() {
        let mut cfg = RunConfig::new(8);
        assert!(cfg.validate(8).is_ok());
        assert!(cfg.validate(7).is_err());
        cfg.d2 = 9;
        assert!(cfg.validate(8).is_err());
        cfg.d2 = 4;
        cfg.iterations = 0;
        assert!(cfg.validate(8).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(
            "FUSED".parse::<LabelingMode>().unwrap(),
            LabelingMode::Fused
        );
        assert_eq!(
            "progressive".parse::<SelectionMode>().unwrap(),
            SelectionMode::Progressive
        );
        assert!("knn".parse::<LabelingMode>().is_err());
    }

    #[test]
    fn partition_groups_by_class() {
        let pl = PseudoLabelSet::new(vec![
            PseudoLabel {
                index: 3,
                class: 1,
                confidence: 0.2,
            },
            PseudoLabel {
                index: 0,
                class: 0,
                confidence: 0.9,
            },
            PseudoLabel {
                index: 5,
                class: 1,
                confidence: 0.4,
            },
        ])
        .unwrap();
        let part = ClassPartition::from_labels(&pl, 3).unwrap();
        assert_eq!(part.members(1), &[3, 5]);
        assert_eq!(part.count(0), 1);
        assert_eq!(part.count(2), 0);
    }
}
