//! Synthetic source/target pairs with a controllable domain shift.
//!
//! Each class is an isotropic Gaussian blob. Class means sit at equal
//! pairwise distance `separation` (in units of the noise σ). The target
//! copy of every blob is rotated by a small angle in a random plane and
//! translated by a random vector of length `shift` σ. The rotation angle
//! grows with the shift, so `shift = 0` gives identically distributed
//! domains.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{DomainDataset, DomainTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    /// Translation length, in σ.
    pub shift: f64,
    /// Distance between any two class means, in σ.
    pub separation: f64,
    pub sigma: f64,
    /// Rotation angle per σ of shift, in radians.
    pub rotation_per_shift: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(classes: usize, per_class: usize, dim: usize, shift: f64, seed: u64) -> Self {
        SynthConfig {
            classes,
            per_class,
            dim,
            shift,
            separation: 10.0,
            sigma: 1.0,
            rotation_per_shift: 0.05,
            seed,
        }
    }
}

/// Source and target with default separation (10σ) and rotation.
pub fn gen_synthetic(
    classes: usize,
    per_class: usize,
    dim: usize,
    shift_magnitude: f64,
    seed: u64,
) -> Result<(DomainDataset, DomainDataset)> {
    generate(&SynthConfig::new(
        classes,
        per_class,
        dim,
        shift_magnitude,
        seed,
    ))
}

pub fn generate(cfg: &SynthConfig) -> Result<(DomainDataset, DomainDataset)> {
    if cfg.classes < 2 || cfg.per_class < 2 {
        return Err(Error::Config(
            "synthetic data needs at least 2 classes and 2 samples per class".into(),
        ));
    }
    if cfg.dim < 2 {
        return Err(Error::Config(
            "synthetic data needs at least 2 dimensions".into(),
        ));
    }
    if !(cfg.shift >= 0.0 && cfg.separation > 0.0 && cfg.sigma > 0.0) {
        return Err(Error::Config(
            "shift must be nonnegative; separation and sigma positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.dim;

    let directions = random_directions(cfg.classes, d, &mut rng);
    let means = directions * (cfg.separation * cfg.sigma / std::f64::consts::SQRT_2);

    let plane = random_directions(2, d, &mut rng);
    let rotation = plane_rotation(&plane, cfg.rotation_per_shift * cfg.shift);
    let offset = random_directions(1, d, &mut rng).column(0).to_owned() * (cfg.shift * cfg.sigma);

    let source = sample_blobs(&means, cfg, &mut rng);
    let (target_clean, target_labels) = sample_blobs(&means, cfg, &mut rng);
    let target_x = rotation.dot(&target_clean) + offset.view().insert_axis(Axis(1));

    let (sx, sl) = shuffle_columns(source.0, source.1, &mut rng);
    let (tx, tl) = shuffle_columns(target_x, target_labels, &mut rng);
    Ok((
        DomainDataset::with_classes(sx, sl, cfg.classes, DomainTag::Source)?,
        DomainDataset::with_classes(tx, tl, cfg.classes, DomainTag::Target)?,
    ))
}

// Orthonormal columns when `count ≤ d`, otherwise independent unit vectors.
fn random_directions(count: usize, d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut v = Array2::<f64>::from_shape_fn((d, count), |_| StandardNormal.sample(rng));
    for k in 0..count {
        if k < d {
            for j in 0..k {
                let r = v.column(j).dot(&v.column(k));
                let vj = v.column(j).to_owned();
                v.column_mut(k).scaled_add(-r, &vj);
            }
        }
        let norm = v.column(k).dot(&v.column(k)).sqrt();
        v.column_mut(k).mapv_inplace(|x| x / norm);
    }
    v
}

// Rotation by `angle` in the plane spanned by the two orthonormal columns.
fn plane_rotation(plane: &Array2<f64>, angle: f64) -> Array2<f64> {
    let d = plane.nrows();
    let u = plane.column(0).insert_axis(Axis(1));
    let w = plane.column(1).insert_axis(Axis(1));
    let uu = u.dot(&u.t());
    let ww = w.dot(&w.t());
    let wu = w.dot(&u.t());
    let uw = u.dot(&w.t());
    Array2::eye(d) + (uu + ww) * (angle.cos() - 1.0) + (wu - uw) * angle.sin()
}

fn sample_blobs(
    means: &Array2<f64>,
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> (Array2<f64>, Vec<usize>) {
    let n = cfg.classes * cfg.per_class;
    let mut x = Array2::<f64>::zeros((cfg.dim, n));
    let mut labels = Vec::with_capacity(n);
    for (j, mut col) in x.columns_mut().into_iter().enumerate() {
        let class = j / cfg.per_class;
        labels.push(class);
        for (r, slot) in col.iter_mut().enumerate() {
            let noise: f64 = StandardNormal.sample(rng);
            *slot = means[[r, class]] + cfg.sigma * noise;
        }
    }
    (x, labels)
}

fn shuffle_columns(
    x: Array2<f64>,
    labels: Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> (Array2<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(rng);
    let shuffled = x.select(Axis(1), &order);
    let l = order.iter().map(|&i| labels[i]).collect();
    (shuffled, l)
}
