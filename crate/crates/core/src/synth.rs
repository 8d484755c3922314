//! Synthetic data: NARMA sequences, polygon radial profiles, Gaussian noise
//! and a smooth two-class bump dataset.
//!
//! Every generator is a pure function of its seed.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{znormalize, Label, LabeledDataset, TimeSeries};

/// Runs with any `|s| > DIVERGENCE_LIMIT` are discarded.
pub const DIVERGENCE_LIMIT: f64 = 10.0;
/// Consecutive discarded runs tolerated before giving up.
pub const MAX_REGENERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NarmaConfig {
    /// 10 or 20.
    pub order: usize,
    pub length: usize,
    pub seed: u64,
}

impl NarmaConfig {
    pub fn validate(&self) -> Result<()> {
        check_order(self.order)?;
        if self.length <= self.order {
            return Err(Error::invalid(format!(
                "NARMA length {} must exceed the order {}",
                self.length, self.order
            )));
        }
        Ok(())
    }
}

fn check_order(order: usize) -> Result<()> {
    if order != 10 && order != 20 {
        return Err(Error::invalid(format!("NARMA order must be 10 or 20, got {order}")));
    }
    Ok(())
}

/// NARMA output driven by an explicit input sequence. The first `order`
/// outputs are zero.
pub fn narma_from_input(order: usize, u: &[f64]) -> Result<Vec<f64>> {
    check_order(order)?;
    let len = u.len();
    let mut s = vec![0.0; len];
    for t in order.saturating_sub(1)..len.saturating_sub(1) {
        let window: f64 = s[t + 1 - order..=t].iter().sum();
        let drive = 1.5 * u[t + 1 - order] * u[t];
        s[t + 1] = if order == 10 {
            0.3 * s[t] + 0.05 * s[t] * window + drive + 0.1
        } else {
            (0.3 * s[t] + 0.05 * s[t] * window + drive + 0.01).tanh() + 0.2
        };
    }
    Ok(s)
}

fn uniform_input(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(0.0..=0.5)).collect()
}

fn diverged(s: &[f64]) -> bool {
    s.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
}

/// A generated sequence and the seed that finally produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct NarmaSeries {
    pub series: TimeSeries,
    pub seed: u64,
}

/// Generates one NARMA sequence with input `u ~ U[0, 0.5]`, bumping the seed
/// after each divergent run.
pub fn narma_generate(cfg: &NarmaConfig) -> Result<NarmaSeries> {
    cfg.validate()?;
    for attempt in 0..=MAX_REGENERATIONS as u64 {
        let seed = cfg.seed.wrapping_add(attempt);
        let s = narma_from_input(cfg.order, &uniform_input(cfg.length, seed))?;
        if !diverged(&s) {
            return Ok(NarmaSeries {
                series: TimeSeries::univariate(s)?,
                seed,
            });
        }
    }
    Err(Error::Diverged {
        attempts: MAX_REGENERATIONS + 1,
    })
}

/// Train/test split of order-10 (label 1) and order-20 (label 2) windows.
#[derive(Debug, Clone)]
pub struct NarmaDataset {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Seed of the shared input sequence actually used.
    pub seed: u64,
}

/// Generates an order-10 and an order-20 mother sequence of `length` points
/// from the same input, cuts each into `per_class` disjoint raw windows of
/// `subseq_len` from the start, and puts a random half of each
/// class in the training set.
pub fn make_narma_dataset(length: usize, per_class: usize, subseq_len: usize, seed: u64) -> Result<NarmaDataset> {
    if per_class < 2 || subseq_len == 0 {
        return Err(Error::invalid("need at least two windows per class of positive length"));
    }
    if length < per_class * subseq_len {
        return Err(Error::invalid(format!(
            "length {length} is shorter than {per_class} windows of {subseq_len}"
        )));
    }
    if length <= 20 {
        return Err(Error::invalid("NARMA length must exceed 20"));
    }
    let mut found = None;
    for attempt in 0..=MAX_REGENERATIONS as u64 {
        let s = seed.wrapping_add(attempt);
        let u = uniform_input(length, s);
        let ten = narma_from_input(10, &u)?;
        let twenty = narma_from_input(20, &u)?;
        if !diverged(&ten) && !diverged(&twenty) {
            found = Some((s, ten, twenty));
            break;
        }
    }
    let (used, ten, twenty) = found.ok_or(Error::Diverged {
        attempts: MAX_REGENERATIONS + 1,
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(used ^ 0x9e37_79b9_7f4a_7c15);
    let n_train = per_class / 2;
    let (mut train_s, mut train_l, mut test_s, mut test_l) = (vec![], vec![], vec![], vec![]);
    for (label, mother) in [(1 as Label, &ten), (2, &twenty)] {
        let windows: Vec<TimeSeries> = mother
            .chunks_exact(subseq_len)
            .take(per_class)
            .map(|w| TimeSeries::univariate(w.to_vec()))
            .collect::<Result<_>>()?;
        let mut order: Vec<usize> = (0..per_class).collect();
        order.shuffle(&mut rng);
        for (rank, &i) in order.iter().enumerate() {
            let (s, l) = if rank < n_train {
                (&mut train_s, &mut train_l)
            } else {
                (&mut test_s, &mut test_l)
            };
            s.push(windows[i].clone());
            l.push(label);
        }
    }
    Ok(NarmaDataset {
        train: LabeledDataset::new(format!("NARMA{subseq_len}_TRAIN"), train_s, train_l)?,
        test: LabeledDataset::new(format!("NARMA{subseq_len}_TEST"), test_s, test_l)?,
        seed: used,
    })
}

/// Distance from the centre of a regular `sides`-gon (unit circumradius, a
/// vertex on the positive x axis) to its boundary along `samples` equally
/// spaced rays.
pub fn polygon_shape_series(sides: usize, samples: usize) -> Result<TimeSeries> {
    if sides < 3 || samples < sides {
        return Err(Error::invalid(format!(
            "polygon needs sides >= 3 and samples >= sides, got {sides} and {samples}"
        )));
    }
    let sector = 2.0 * PI / sides as f64;
    let apothem = (PI / sides as f64).cos();
    let values = (0..samples)
        .map(|j| {
            let theta = 2.0 * PI * j as f64 / samples as f64;
            let within = theta.rem_euclid(sector) - sector / 2.0;
            apothem / within.cos()
        })
        .collect();
    TimeSeries::univariate(values)
}

/// One radial series per side count, labeled by that count.
pub fn polygon_dataset(sides: &[usize], samples: usize) -> Result<LabeledDataset> {
    let series = sides
        .iter()
        .map(|&k| polygon_shape_series(k, samples))
        .collect::<Result<Vec<_>>>()?;
    let labels = sides.iter().map(|&k| k as Label).collect();
    LabeledDataset::new("polygons", series, labels)
}

/// Adds i.i.d. `N(0, sigma^2)` noise. `sigma == 0` returns the input as is.
pub fn add_gaussian_noise(x: &TimeSeries, sigma: f64, seed: u64) -> Result<TimeSeries> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(format!("noise level {sigma} must be >= 0")));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TimeSeries::new(
        x.as_slice().iter().map(|v| v + normal.sample(&mut rng)).collect(),
        x.dims(),
    )
}

/// Noisy copy of every series, drawing from one random stream in item
/// order.
pub fn add_noise_to_dataset(ds: &LabeledDataset, sigma: f64, seed: u64) -> Result<LabeledDataset> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(format!("noise level {sigma} must be >= 0")));
    }
    if sigma == 0.0 {
        return Ok(ds.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ds.try_map(|s| {
        let noisy = s.as_slice().iter().map(|v| v + normal.sample(&mut rng)).collect();
        TimeSeries::new(noisy, s.dims())
    })
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One smooth plateau series. Class 1 has a shallow dip just before the
/// rise and just after the fall; class 2 does not.
fn bump_series(class: Label, length: usize, rng: &mut ChaCha8Rng) -> Result<TimeSeries> {
    let centre = rng.random_range(0.44..0.56);
    let half_width = rng.random_range(0.2..0.27);
    let height = rng.random_range(0.9..1.1);
    let edge = rng.random_range(0.025..0.035);
    let (rise, fall) = (centre - half_width, centre + half_width);
    let values = (0..length)
        .map(|i| {
            let t = i as f64 / (length - 1) as f64;
            let plateau = logistic((t - rise) / edge) - logistic((t - fall) / edge);
            let mut v = height * plateau;
            if class == 1 {
                let dip = |at: f64| (-((t - at) / 0.03).powi(2)).exp();
                v -= 0.3 * (dip(rise - 0.07) + dip(fall + 0.07));
            }
            v
        })
        .collect();
    Ok(znormalize(&TimeSeries::univariate(values)?))
}

/// Two-class smooth series in the spirit of gesture recordings that differ
/// only in a short local feature. `per_class` items of each class, z-normalized.
pub fn bump_dataset(per_class: usize, length: usize, seed: u64) -> Result<LabeledDataset> {
    if per_class == 0 || length < 10 {
        return Err(Error::invalid("bump dataset needs items and length >= 10"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = Vec::with_capacity(2 * per_class);
    let mut labels = Vec::with_capacity(2 * per_class);
    for _ in 0..per_class {
        for class in [1, 2] {
            series.push(bump_series(class, length, &mut rng)?);
            labels.push(class);
        }
    }
    LabeledDataset::new("Bumps", series, labels)
}

/// Default bundled split: 30 training and 30 test series of length 150.
pub fn bump_split(seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    let train = bump_dataset(15, 150, seed)?.with_name("Bumps_TRAIN");
    let test = bump_dataset(15, 150, seed.wrapping_add(1_000_003))?.with_name("Bumps_TEST");
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn narma10_zero_input() {
        let s = narma_from_input(10, &[0.0; 14]).unwrap();
        assert!(s[..10].iter().all(|v| *v == 0.0));
        assert!((s[10] - 0.1).abs() < 1e-15);
        assert!((s[11] - 0.1305).abs() < 1e-12);
    }

    #[test]
    fn narma20_zero_input() {
        let s = narma_from_input(20, &[0.0; 22]).unwrap();
        assert!(s[..20].iter().all(|v| *v == 0.0));
        assert!((s[20] - 0.209_999_666_7).abs() < 1e-9);
        assert_eq!(s[20], 0.01f64.tanh() + 0.2);
    }

    #[test]
    fn bad_orders() {
        assert!(narma_from_input(15, &[0.0; 30]).is_err());
        assert!(narma_generate(&NarmaConfig { order: 10, length: 10, seed: 0 }).is_err());
    }

    #[test]
    fn narma_is_seeded_and_bounded() {
        let cfg = NarmaConfig { order: 20, length: 3000, seed: 7 };
        let a = narma_generate(&cfg).unwrap();
        assert_eq!(a, narma_generate(&cfg).unwrap());
        assert!(a.series.as_slice().iter().all(|v| *v > -0.8 && *v < 1.2));
        let ten = narma_generate(&NarmaConfig { order: 10, ..cfg }).unwrap();
        assert!(ten.series.as_slice().iter().all(|v| v.abs() <= DIVERGENCE_LIMIT));
    }

    #[test]
    fn narma_dataset_protocol() {
        let d = make_narma_dataset(50 * 40, 50, 40, 3).unwrap();
        assert_eq!(d.train.len(), 50);
        assert_eq!(d.test.len(), 50);
        let ones = d.train.labels().iter().filter(|l| **l == 1).count();
        assert_eq!(ones, 25);
        assert!(d.train.series().iter().all(|s| s.len() == 40));
        assert!(make_narma_dataset(100, 50, 40, 3).is_err());
        let again = make_narma_dataset(50 * 40, 50, 40, 3).unwrap();
        assert_eq!(again.train, d.train);
        assert_eq!(again.test, d.test);
    }

    #[test]
    fn narma_windows_are_disjoint_prefix_chunks() {
        let (len, w) = (10 * 30, 30);
        let d = make_narma_dataset(len, 10, w, 11).unwrap();
        let u = uniform_input(len, d.seed);
        let ten = narma_from_input(10, &u).unwrap();
        let expected: Vec<TimeSeries> = ten
            .chunks_exact(w)
            .map(|c| TimeSeries::univariate(c.to_vec()).unwrap())
            .collect();
        let mut seen = [false; 10];
        for (s, l) in d.train.iter().chain(d.test.iter()) {
            if l == 1 {
                let k = expected.iter().position(|e| e == s).expect("window of the mother sequence");
                assert!(!seen[k]);
                seen[k] = true;
            }
        }
        assert!(seen.iter().all(|v| *v));
    }

    #[test]
    fn square_profile() {
        let s = polygon_shape_series(4, 8).unwrap();
        let v = s.as_slice();
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!((v[1] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((v[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_limits_and_period() {
        let circle = polygon_shape_series(100, 400).unwrap();
        let (lo, hi) = circle.as_slice().iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi - lo < 0.01);
        for k in 3..9 {
            let m = k * 12;
            let s = polygon_shape_series(k, m).unwrap();
            let v = s.as_slice();
            let apothem = (PI / k as f64).cos();
            for j in 0..m {
                assert!((v[j] - v[(j + m / k) % m]).abs() < 1e-9);
                assert!(v[j] >= apothem - 1e-12 && v[j] <= 1.0 + 1e-12);
            }
        }
        assert!(polygon_shape_series(2, 10).is_err());
        assert!(polygon_shape_series(6, 5).is_err());
    }

    #[test]
    fn noise_properties() {
        let x = TimeSeries::univariate((0..1000).map(|i| (i as f64).sin()).collect()).unwrap();
        assert_eq!(add_gaussian_noise(&x, 0.0, 1).unwrap(), x);
        assert_eq!(add_gaussian_noise(&x, 0.5, 9).unwrap(), add_gaussian_noise(&x, 0.5, 9).unwrap());
        assert!(add_gaussian_noise(&x, -1.0, 9).is_err());
    }

    #[test]
    fn noise_std_matches_sigma() {
        let n = 1_000_000;
        let x = TimeSeries::univariate(vec![0.0; n]).unwrap();
        let sigma = 0.7;
        let y = add_gaussian_noise(&x, sigma, 2024).unwrap();
        let mean = y.as_slice().iter().sum::<f64>() / n as f64;
        let std = (y.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((std - sigma).abs() < 0.01 * sigma, "{std}");
    }

    #[test]
    fn bump_dataset_shape() {
        let (train, test) = bump_split(1).unwrap();
        assert_eq!((train.len(), test.len()), (30, 30));
        assert_eq!(train.classes(), vec![1, 2]);
        assert!(train.series().iter().all(|s| s.len() == 150));
        assert_ne!(train.series()[0], test.series()[0]);
        assert_eq!(bump_split(1).unwrap().0, train);
    }
}
