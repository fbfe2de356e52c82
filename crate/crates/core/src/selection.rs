//! Class-wise progressive selection of confident pseudo-labels.

use crate::data::{PseudoLabel, PseudoLabelSet, SelectionMode};
use crate::error::{Error, Result};

/// Per-class quota at iteration `k` of `total`: `⌊k·count/total⌋`.
pub fn class_quota(count: usize, k: usize, total: usize) -> usize {
    (k * count / total).min(count)
}

/// Pseudo-labels admitted to the subspace fit at iteration `k` (1-based).
///
/// In progressive mode each class keeps its `⌊k·n_c/T⌋` most confident
/// samples, ordered by confidence and then by ascending target index. The
/// result is sorted by target index and recomputed from scratch every call.
pub fn select(
    pl: &PseudoLabelSet,
    k: usize,
    total: usize,
    mode: SelectionMode,
) -> Result<PseudoLabelSet> {
    if total == 0 || k == 0 || k > total {
        return Err(Error::InvalidInput(format!(
            "selection iteration {k} outside 1..={total}"
        )));
    }
    let mut chosen: Vec<PseudoLabel> = match mode {
        SelectionMode::None => Vec::new(),
        SelectionMode::All => pl.entries().to_vec(),
        SelectionMode::Progressive => {
            let classes = pl.entries().iter().map(|e| e.class + 1).max().unwrap_or(0);
            let mut by_class: Vec<Vec<PseudoLabel>> = vec![Vec::new(); classes];
            for e in pl.entries() {
                by_class[e.class].push(*e);
            }
            by_class
                .into_iter()
                .flat_map(|mut members| {
                    let quota = class_quota(members.len(), k, total);
                    members.sort_by(|a, b| {
                        b.confidence
                            .total_cmp(&a.confidence)
                            .then(a.index.cmp(&b.index))
                    });
                    members.truncate(quota);
                    members
                })
                .collect()
        }
    };
    chosen.sort_by_key(|e| e.index);
    PseudoLabelSet::new(chosen)
}
