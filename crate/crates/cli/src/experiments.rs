//! Experiment drivers that turn datasets and metric configurations into
//! result records. Every run is seeded; wall-clock time is the only field
//! that differs between identical invocations.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::Value;
use statewarp::reservoir::predictability;
use statewarp::synth::{add_noise_to_dataset, make_narma_dataset};
use statewarp::{evaluate, loocv_accuracy, select_network, CrjParams, EvalResult, LabeledDataset, Metric, MetricKind, ResultRecord};

use crate::config::MetricConfig;

/// Offset separating noise seeds from network seeds.
const NOISE_SEED_OFFSET: u64 = 1 << 32;

/// First network seed of repetition `rep`; candidates use consecutive seeds.
pub fn network_seed(base: u64, rep: usize, candidates: usize) -> u64 {
    base.wrapping_add((rep * candidates.max(1)) as u64)
}

/// Noise seed of one split (0 train, 1 test) in repetition `rep`. The same
/// seed is used at every noise level, so levels differ only in scale.
pub fn noise_seed(base: u64, rep: usize, split: u64) -> u64 {
    base.wrapping_add(NOISE_SEED_OFFSET)
        .wrapping_add(2 * rep as u64 + split)
}

/// Shared settings of the repeated experiments.
#[derive(Debug, Clone)]
pub struct Plan {
    pub metrics: Vec<MetricConfig>,
    pub seed: u64,
    pub reps: usize,
    /// Networks tried by leave-one-out selection for dsw.
    pub candidates: usize,
    pub znormalize: bool,
    pub keep_predictions: bool,
}

impl Plan {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            bail!("--reps must be at least 1");
        }
        if self.candidates == 0 {
            bail!("--candidates must be at least 1");
        }
        Ok(())
    }
}

/// A metric fitted on training data and its test outcome.
pub struct Fitted {
    pub metric: Metric,
    pub train_accuracy: f64,
    pub eval: EvalResult,
    pub params: Value,
}

/// Fits `cfg` on `train` (network selection for dsw, nothing otherwise) and
/// classifies `test`.
pub fn fit_and_evaluate(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &MetricConfig,
    seed: u64,
    candidates: usize,
) -> Result<Fitted> {
    let dims = train.series().first().context("empty training set")?.dims();
    let (metric, train_accuracy, params) = if cfg.kind == MetricKind::Dsw {
        let sel = select_network(train, candidates, &cfg.crj_for(dims, seed), seed)?;
        let params = cfg.params_json(Some(sel.model.params()));
        let acc = sel.accuracy();
        (Metric::Dsw(sel.model), acc, params)
    } else {
        let metric = cfg.build(dims)?;
        let acc = loocv_accuracy(train, &metric)?;
        (metric, acc, cfg.params_json(None))
    };
    let eval = evaluate(train, test, &metric)?;
    Ok(Fitted {
        metric,
        train_accuracy,
        eval,
        params,
    })
}

/// One record for one dataset, metric and repetition. Failures become
/// records with the error message instead of aborting the batch.
pub fn run_one(
    dataset: &str,
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &MetricConfig,
    seed: u64,
    candidates: usize,
    keep_predictions: bool,
) -> (ResultRecord, Option<Fitted>) {
    let start = Instant::now();
    let base = ResultRecord::new(dataset, cfg.name(), "-", seed);
    let (mut rec, fitted) = match fit_and_evaluate(train, test, cfg, seed, candidates) {
        Ok(f) => {
            let mut rec = base.with_eval(&f.eval, keep_predictions);
            rec.params_digest = f.metric.params_digest();
            rec.train_accuracy = Some(f.train_accuracy);
            rec.params = Some(f.params.clone());
            if cfg.kind == MetricKind::Dsw {
                annotate(&mut rec, "candidates", Value::from(candidates));
            }
            (rec, Some(f))
        }
        Err(e) => (base.with_failure(format!("{e:#}")), None),
    };
    rec.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    (rec, fitted)
}

/// Adds run context (noise or data seeds, candidate count) to the record's
/// parameter object so a single record is enough to rerun it.
fn annotate(rec: &mut ResultRecord, key: &str, value: Value) {
    if let Some(Value::Object(m)) = &mut rec.params {
        m.insert(key.to_string(), value);
    }
}

fn maybe_znormalize(ds: &LabeledDataset, on: bool) -> LabeledDataset {
    if on {
        ds.znormalized()
    } else {
        ds.clone()
    }
}

/// Plain train/test classification, every metric and repetition.
pub fn classify(dataset: &str, train: &LabeledDataset, test: &LabeledDataset, plan: &Plan) -> Vec<ResultRecord> {
    let (train, test) = (maybe_znormalize(train, plan.znormalize), maybe_znormalize(test, plan.znormalize));
    let jobs: Vec<(usize, &MetricConfig)> = (0..plan.reps)
        .flat_map(|r| plan.metrics.iter().map(move |m| (r, m)))
        .collect();
    jobs.par_iter()
        .map(|&(rep, cfg)| {
            let seed = network_seed(plan.seed, rep, plan.candidates);
            let (mut rec, _) = run_one(dataset, &train, &test, cfg, seed, plan.candidates, plan.keep_predictions);
            rec.experiment = Some("classify".into());
            rec.rep = Some(rep);
            rec
        })
        .collect()
}

/// Error rates with Gaussian noise of each level added to both splits.
pub fn robustness(
    dataset: &str,
    train: &LabeledDataset,
    test: &LabeledDataset,
    sigmas: &[f64],
    plan: &Plan,
) -> Vec<ResultRecord> {
    let (train, test) = (maybe_znormalize(train, plan.znormalize), maybe_znormalize(test, plan.znormalize));
    let jobs: Vec<(usize, f64, &MetricConfig)> = (0..plan.reps)
        .flat_map(|r| sigmas.iter().flat_map(move |&s| plan.metrics.iter().map(move |m| (r, s, m))))
        .collect();
    jobs.par_iter()
        .map(|&(rep, sigma, cfg)| {
            let seed = network_seed(plan.seed, rep, plan.candidates);
            let noisy = add_noise_to_dataset(&train, sigma, noise_seed(plan.seed, rep, 0))
                .and_then(|tr| Ok((tr, add_noise_to_dataset(&test, sigma, noise_seed(plan.seed, rep, 1))?)));
            let mut rec = match noisy {
                Ok((tr, te)) => run_one(dataset, &tr, &te, cfg, seed, plan.candidates, plan.keep_predictions).0,
                Err(e) => ResultRecord::new(dataset, cfg.name(), "-", seed).with_failure(e.to_string()),
            };
            let noise_seeds = [noise_seed(plan.seed, rep, 0), noise_seed(plan.seed, rep, 1)];
            annotate(&mut rec, "noise_seeds", Value::from(noise_seeds.to_vec()));
            rec.experiment = Some("robustness".into());
            rec.parameter = Some("sigma".into());
            rec.value = Some(sigma);
            rec.rep = Some(rep);
            rec
        })
        .collect()
}

/// NARMA order-10 vs order-20 classification per window length. The
/// dataset of repetition `rep` is generated from seed `plan.seed + rep`.
pub fn lengthscale(windows: &[usize], per_class: usize, plan: &Plan) -> Vec<ResultRecord> {
    let jobs: Vec<(usize, usize, &MetricConfig)> = (0..plan.reps)
        .flat_map(|r| windows.iter().flat_map(move |&w| plan.metrics.iter().map(move |m| (r, w, m))))
        .collect();
    jobs.par_iter()
        .map(|&(rep, w, cfg)| {
            let data_seed = plan.seed.wrapping_add(rep as u64);
            let name = format!("NARMA{w}");
            let net_seed = network_seed(plan.seed, rep, plan.candidates);
            let mut rec = match make_narma_dataset(per_class * w, per_class, w, data_seed) {
                Ok(d) => {
                    let (tr, te) = (maybe_znormalize(&d.train, plan.znormalize), maybe_znormalize(&d.test, plan.znormalize));
                    let mut rec = run_one(&name, &tr, &te, cfg, net_seed, plan.candidates, plan.keep_predictions).0;
                    annotate(&mut rec, "data_seed", Value::from(d.seed));
                    annotate(&mut rec, "per_class", Value::from(per_class));
                    rec
                }
                Err(e) => ResultRecord::new(&name, cfg.name(), "-", net_seed).with_failure(e.to_string()),
            };
            rec.experiment = Some("lengthscale".into());
            rec.parameter = Some("subseq_len".into());
            rec.value = Some(w as f64);
            rec.rep = Some(rep);
            rec
        })
        .collect()
}

/// Copy of `base` with one numeric field replaced. Integer fields only take
/// integral values.
pub fn set_crj_field(base: &CrjParams, field: &str, value: f64) -> Result<CrjParams> {
    if matches!(field, "seed" | "input_dims") {
        bail!("{field} cannot be swept");
    }
    let mut v = serde_json::to_value(base)?;
    let map = v.as_object_mut().expect("params serialize to an object");
    let Some(current) = map.get(field) else {
        bail!("unknown reservoir parameter {field:?}");
    };
    let new = if current.is_u64() {
        if value < 0.0 || value.fract() != 0.0 {
            bail!("{field} takes nonnegative integers, got {value}");
        }
        Value::from(value as u64)
    } else {
        Value::from(value)
    };
    map.insert(field.to_string(), new);
    let p: CrjParams = serde_json::from_value(v)?;
    p.validate()?;
    Ok(p)
}

/// DSW error and training-set predictability while one reservoir field
/// varies over `grid`.
pub fn sweep(
    dataset: &str,
    train: &LabeledDataset,
    test: &LabeledDataset,
    dsw: &MetricConfig,
    field: &str,
    grid: &[f64],
    plan: &Plan,
) -> Result<Vec<ResultRecord>> {
    if dsw.kind != MetricKind::Dsw {
        bail!("sweeps vary reservoir parameters and need the dsw metric");
    }
    let configs = grid
        .iter()
        .map(|&v| {
            let crj = set_crj_field(&dsw.crj, field, v).with_context(|| format!("grid value {v}"))?;
            Ok((v, MetricConfig { crj, ..dsw.clone() }))
        })
        .collect::<Result<Vec<_>>>()?;
    let (train, test) = (maybe_znormalize(train, plan.znormalize), maybe_znormalize(test, plan.znormalize));
    let jobs: Vec<(usize, &(f64, MetricConfig))> = (0..plan.reps)
        .flat_map(|r| configs.iter().map(move |c| (r, c)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(rep, (value, cfg))| {
            let seed = network_seed(plan.seed, rep, plan.candidates);
            let (mut rec, fitted) = run_one(dataset, &train, &test, cfg, seed, plan.candidates, plan.keep_predictions);
            if let Some(Fitted { metric: Metric::Dsw(model), .. }) = &fitted {
                match predictability(model.network(), &train) {
                    Ok(p) => rec.predictability = Some(p),
                    Err(e) => rec = rec.with_failure(format!("predictability: {e}")),
                }
            }
            rec.experiment = Some("sweep".into());
            rec.parameter = Some(field.to_string());
            rec.value = Some(*value);
            rec.rep = Some(rep);
            rec
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use statewarp::synth::bump_split;

    fn plan(metrics: &str, reps: usize) -> Plan {
        Plan {
            metrics: MetricConfig::parse_list(metrics, None, 0).unwrap(),
            seed: 0,
            reps,
            candidates: 2,
            znormalize: false,
            keep_predictions: false,
        }
    }

    #[test]
    fn seeds_do_not_collide_across_reps() {
        let seeds: Vec<u64> = (0..5).flat_map(|r| (0..3).map(move |k| network_seed(9, r, 3) + k)).collect();
        let mut dedup = seeds.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), seeds.len());
        assert_ne!(noise_seed(0, 0, 0), noise_seed(0, 0, 1));
        assert_ne!(noise_seed(0, 0, 1), noise_seed(0, 1, 0));
    }

    #[test]
    fn sweep_fields() {
        let base = CrjParams::default();
        assert_eq!(set_crj_field(&base, "scaling", 0.3).unwrap().scaling, 0.3);
        assert_eq!(set_crj_field(&base, "reservoir_size", 8.0).unwrap().reservoir_size, 8);
        assert!(set_crj_field(&base, "reservoir_size", 8.5).is_err());
        assert!(set_crj_field(&base, "seed", 1.0).is_err());
        assert!(set_crj_field(&base, "nope", 1.0).is_err());
        assert!(set_crj_field(&base, "reservoir_size", 1.0).is_err());
    }

    #[test]
    fn robustness_covers_the_grid_and_is_repeatable() {
        let (train, test) = bump_split(3).unwrap();
        let (train, test) = (train.subset(&(0..8).collect::<Vec<_>>()).unwrap(), test.subset(&[0, 1, 2, 3]).unwrap());
        let p = plan("ed,dsw", 2);
        let a = robustness("b", &train, &test, &[0.0, 0.5], &p);
        let b = robustness("b", &train, &test, &[0.0, 0.5], &p);
        assert_eq!(a.len(), 8);
        for (x, y) in a.iter().zip(&b) {
            assert!(!x.is_failed(), "{:?}", x.failed);
            assert_eq!((x.error_rate, &x.params_digest, x.train_accuracy), (y.error_rate, &y.params_digest, y.train_accuracy));
        }
    }

    #[test]
    fn failures_become_records() {
        let (train, test) = bump_split(3).unwrap();
        let short = test.try_map(|s| s.prefix(100)).unwrap();
        let recs = classify("b", &train, &short, &plan("ed,dtw", 1));
        let ed = recs.iter().find(|r| r.metric == "ed").unwrap();
        assert!(ed.failed.as_deref().unwrap().contains("length mismatch"));
        assert!(!recs.iter().find(|r| r.metric == "dtw").unwrap().is_failed());
    }
}
