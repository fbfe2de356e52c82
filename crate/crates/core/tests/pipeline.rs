use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spl_core::synth::{gen_synthetic, generate, SynthConfig};
use spl_core::{
    nn_baseline, run, run_ablation, DomainDataset, DomainTag, LabelingMode, RunConfig,
    SelectionMode,
};

fn config(d: usize) -> RunConfig {
    RunConfig {
        d2: d,
        ..RunConfig::new(d)
    }
}

#[test]
fn identical_distributions_are_labeled_perfectly() {
    let (src, tgt) = gen_synthetic(5, 30, 20, 0.0, 4).unwrap();
    let result = run(&src, &tgt, &config(20)).unwrap();
    assert_eq!(result.final_accuracy(), Some(100.0));
    assert_eq!(result.snapshots.len(), 11);
    assert_eq!(result.predictions.len(), tgt.len());
}

#[test]
fn single_iteration_progressive_matches_all() {
    let (src, tgt) = gen_synthetic(4, 25, 10, 5.0, 9).unwrap();
    let base = RunConfig {
        iterations: 1,
        ..config(10)
    };
    let progressive = run(&src, &tgt, &base).unwrap();
    let all = run(
        &src,
        &tgt,
        &RunConfig {
            selection: SelectionMode::All,
            ..base
        },
    )
    .unwrap();
    assert_eq!(progressive.predictions, all.predictions);
    assert_eq!(progressive.pseudo_labels, all.pseudo_labels);
    assert_eq!(progressive.snapshots, all.snapshots);
}

#[test]
fn none_mode_snapshots_are_constant() {
    let (src, tgt) = gen_synthetic(4, 25, 10, 6.0, 2).unwrap();
    let result = run(
        &src,
        &tgt,
        &RunConfig {
            selection: SelectionMode::None,
            ..config(10)
        },
    )
    .unwrap();
    let first = &result.snapshots[0];
    for s in &result.snapshots {
        assert_eq!(s.accuracy, first.accuracy);
        assert_eq!(s.selected, 0);
    }
}

#[test]
fn selection_is_total_at_the_last_iteration() {
    let (src, tgt) = gen_synthetic(3, 20, 8, 3.0, 5).unwrap();
    let result = run(&src, &tgt, &config(8)).unwrap();
    assert_eq!(result.snapshots.last().unwrap().selected, tgt.len());
    let selected: Vec<usize> = result.snapshots.iter().map(|s| s.selected).collect();
    assert!(selected.windows(2).all(|w| w[0] <= w[1]), "{selected:?}");
}

#[test]
fn runs_are_deterministic() {
    let (src, tgt) = gen_synthetic(4, 20, 12, 4.0, 3).unwrap();
    let cfg = config(12);
    assert_eq!(
        run(&src, &tgt, &cfg).unwrap(),
        run(&src, &tgt, &cfg).unwrap()
    );
}

#[test]
fn target_labels_only_feed_the_metric() {
    let (src, tgt) = gen_synthetic(4, 20, 12, 4.0, 8).unwrap();
    let with = run(&src, &tgt, &config(12)).unwrap();
    let without = run(&src, &tgt.without_labels(), &config(12)).unwrap();
    assert_eq!(with.predictions, without.predictions);
    assert_eq!(with.model, without.model);
    assert!(without.snapshots.iter().all(|s| s.accuracy.is_none()));
}

#[test]
fn stage_failures_name_the_stage() {
    let (src, tgt) = gen_synthetic(3, 10, 6, 1.0, 1).unwrap();
    let err = run(&src, &tgt, &RunConfig { d2: 7, ..config(6) }).unwrap_err();
    assert!(err.to_string().contains("validate"), "{err}");
}

#[test]
fn baseline_on_a_copy_is_perfect() {
    let (src, _) = gen_synthetic(6, 15, 10, 0.0, 0).unwrap();
    let copy = DomainDataset::labeled(
        src.features().clone(),
        src.labels().unwrap().to_vec(),
        DomainTag::Target,
    )
    .unwrap();
    assert_eq!(nn_baseline(&src, &copy).unwrap().accuracy, Some(100.0));
}

#[test]
fn baseline_on_unrelated_domains_is_chance() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut draw = |n: usize| {
        let x = Array2::from_shape_fn((8, n), |_| rng.random_range(-1.0..1.0));
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        (x, y)
    };
    let (xs, ys) = draw(1000);
    let (xt, yt) = draw(1000);
    let src = DomainDataset::labeled(xs, ys, DomainTag::Source).unwrap();
    let tgt = DomainDataset::labeled(xt, yt, DomainTag::Target).unwrap();
    let acc = nn_baseline(&src, &tgt).unwrap().accuracy.unwrap();
    assert!((acc - 50.0).abs() <= 5.0, "{acc}");
}

#[test]
fn large_shift_degrades_the_baseline() {
    let (mut zero, mut shifted) = (0.0, 0.0);
    for seed in 0..5 {
        let (s, t) = gen_synthetic(5, 40, 20, 0.0, seed).unwrap();
        zero += nn_baseline(&s, &t).unwrap().accuracy.unwrap();
        let (s, t) = gen_synthetic(5, 40, 20, 10.0, seed).unwrap();
        shifted += nn_baseline(&s, &t).unwrap().accuracy.unwrap();
    }
    assert!(shifted < zero, "shifted {shifted} vs zero {zero}");
}

/// Closer classes (5σ) leave room for the modes to differ.
#[test]
fn ablation_ordering_on_closer_classes() {
    let (mut none, mut all, mut prog, mut ncp1, mut sp1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for seed in 0..10 {
        let (src, tgt) = generate(&SynthConfig {
            separation: 5.0,
            ..SynthConfig::new(5, 40, 20, 4.0, seed)
        })
        .unwrap();
        for entry in run_ablation(&src, &tgt, &config(20)).unwrap() {
            let r = &entry.result;
            match (entry.labeling, entry.selection) {
                (LabelingMode::Fused, SelectionMode::None) => none += r.final_accuracy().unwrap(),
                (LabelingMode::Fused, SelectionMode::All) => all += r.final_accuracy().unwrap(),
                (LabelingMode::Fused, SelectionMode::Progressive) => {
                    prog += r.final_accuracy().unwrap()
                }
                (LabelingMode::Ncp, SelectionMode::Progressive) => {
                    ncp1 += r.snapshots[1].accuracy.unwrap()
                }
                (LabelingMode::Sp, SelectionMode::Progressive) => {
                    sp1 += r.snapshots[1].accuracy.unwrap()
                }
                _ => {}
            }
        }
    }
    assert!(
        none <= all && all <= prog,
        "none {none} all {all} progressive {prog}"
    );
    assert!(sp1 >= ncp1, "sp {sp1} ncp {ncp1}");
}

/// Snapshot accuracy should rarely drop from one iteration to the next.
#[test]
fn snapshot_accuracy_is_mostly_non_decreasing() {
    let monotone = (0..20u64)
        .filter(|&seed| {
            let (src, tgt) = gen_synthetic(5, 40, 20, 4.0, seed).unwrap();
            let r = run(&src, &tgt, &config(20)).unwrap();
            let acc: Vec<f64> = r.snapshots.iter().map(|s| s.accuracy.unwrap()).collect();
            acc.windows(2).all(|w| w[0] <= w[1])
        })
        .count();
    assert!(monotone >= 18, "{monotone}/20 runs monotone");
}
