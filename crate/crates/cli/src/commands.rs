use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;
use statewarp::distance::derivative_transform;
use statewarp::record::{load_jsonl, save_jsonl, sort_records, write_jsonl};
use statewarp::stats::{agglomerative_cluster, sharpshooter, Alpha, ErrorTable, Quadrant, RankReport};
use statewarp::synth::{
    add_noise_to_dataset, bump_split, make_narma_dataset, narma_generate, polygon_dataset, NarmaConfig,
};
use statewarp::ucr::{infer_delimiter, save_ucr, scan_archive};
use statewarp::{dsw_align, dtw, pairwise_distances, znormalize, LabeledDataset, Metric, ResultRecord};

use crate::args::*;
use crate::config::{fmt12, load_dataset, load_series, parse_grid, parse_usize_grid, parse_usize_list, MetricConfig};
use crate::experiments::{self, Plan};
use crate::Status;

fn dataset_name(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    stem.strip_suffix("_TRAIN").map(str::to_string).unwrap_or(stem)
}

fn plan(run: &RunArgs, keep_predictions: bool) -> Result<Plan> {
    let plan = Plan {
        metrics: MetricConfig::parse_list(&run.metric, run.params.as_deref(), run.seed)?,
        seed: run.seed,
        reps: run.reps,
        candidates: run.candidates,
        znormalize: run.znormalize,
        keep_predictions,
    };
    plan.validate()?;
    Ok(plan)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Grouping key of a record: dataset plus the varied parameter, if any.
fn record_key(r: &ResultRecord) -> String {
    match (&r.parameter, r.value) {
        (Some(p), Some(v)) => format!("{}[{p}={}]", r.dataset, fmt12(v)),
        _ => r.dataset.clone(),
    }
}

fn summary(records: &[ResultRecord]) -> String {
    let mut groups: BTreeMap<(String, &str), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((record_key(r), r.metric.as_str())).or_default().push(r);
    }
    let mut out = format!("{:<32} {:<6} {:>10} {:>5} {:>7}\n", "dataset", "metric", "mean_error", "runs", "failed");
    for ((key, metric), rs) in &groups {
        let ok: Vec<f64> = rs.iter().filter(|r| !r.is_failed()).map(|r| r.error_rate).collect();
        let mean = if ok.is_empty() {
            "-".to_string()
        } else {
            format!("{:.4}", ok.iter().sum::<f64>() / ok.len() as f64)
        };
        let _ = writeln!(out, "{key:<32} {metric:<6} {mean:>10} {:>5} {:>7}", rs.len(), rs.len() - ok.len());
    }
    out
}

/// Sorted records to `out` as JSON lines with a summary on stdout, or to
/// stdout when no file is given.
fn emit(mut records: Vec<ResultRecord>, out: Option<&Path>) -> Result<Status> {
    sort_records(&mut records);
    for r in records.iter().filter(|r| r.is_failed()) {
        eprintln!(
            "warning: {} {} failed: {}",
            record_key(r),
            r.metric,
            r.failed.as_deref().unwrap_or_default()
        );
    }
    match out {
        Some(path) => {
            save_jsonl(path, &records)?;
            print!("{}", summary(&records));
        }
        None => write_jsonl(io::stdout().lock(), &records)?,
    }
    Ok(if records.iter().any(ResultRecord::is_failed) {
        Status::PartialFailure
    } else {
        Status::Ok
    })
}

fn load_pair(args: &PairArgs) -> Result<(statewarp::TimeSeries, statewarp::TimeSeries, MetricConfig)> {
    let delim = args.data.delimiter.as_deref();
    let mut a = load_series(&args.a, args.row, delim)?;
    let mut b = load_series(&args.b, args.row, delim)?;
    if args.metric.znormalize {
        a = znormalize(&a);
        b = znormalize(&b);
    }
    let cfg = MetricConfig::parse(&args.metric.metric, args.metric.params.as_deref(), args.metric.seed)?;
    Ok((a, b, cfg))
}

pub fn dist(args: &PairArgs) -> Result<Status> {
    let (a, b, cfg) = load_pair(args)?;
    let metric = cfg.build(a.dims())?;
    let d = metric.distance(&a, &b)?;
    println!("{}", fmt12(d));
    if let Some(out) = &args.out {
        let body = json!({
            "metric": cfg.name(),
            "distance": d,
            "params_digest": metric.params_digest(),
            "params": cfg.params_json(None),
        });
        write_file(out, &format!("{body:#}\n"))?;
    }
    Ok(Status::Ok)
}

pub fn align(args: &AlignArgs) -> Result<Status> {
    let (a, b, cfg) = load_pair(&args.pair)?;
    let alignment = match cfg.build(a.dims())? {
        Metric::Dtw { band } => dtw(&a, &b, band)?,
        Metric::Ddtw => dtw(&derivative_transform(&a)?, &derivative_transform(&b)?, None)?,
        Metric::Dsw(model) => dsw_align(&a, &b, &model)?,
        other => bail!("{} has no alignment path; use dtw, ddtw or dsw", other.name()),
    };
    let text = match args.format {
        PathFormat::Csv => alignment.path.to_csv(),
        PathFormat::Json => format!(
            "{:#}\n",
            json!({ "metric": cfg.name(), "cost": alignment.cost, "path": alignment.path })
        ),
    };
    match &args.pair.out {
        Some(out) => {
            write_file(out, &text)?;
            println!("{}", fmt12(alignment.cost));
        }
        None => print!("{text}"),
    }
    Ok(Status::Ok)
}

pub fn classify(args: &ClassifyArgs) -> Result<Status> {
    let plan = plan(&args.run, args.predictions)?;
    let delim = args.data.delimiter.as_deref();
    let pairs: Vec<(String, PathBuf, PathBuf)> = match (&args.dir, &args.train, &args.test) {
        (Some(dir), _, _) => {
            let entries = scan_archive(dir)?;
            if entries.is_empty() {
                bail!("no <Name>/<Name>_TRAIN and _TEST pairs under {}", dir.display());
            }
            entries.into_iter().map(|e| (e.name, e.train, e.test)).collect()
        }
        (None, Some(train), Some(test)) => vec![(dataset_name(train), train.clone(), test.clone())],
        _ => bail!("give --train and --test, or --dir"),
    };
    let mut records = Vec::new();
    for (name, train, test) in &pairs {
        match load_dataset(train, delim).and_then(|tr| Ok((tr, load_dataset(test, delim)?))) {
            Ok((tr, te)) => records.extend(experiments::classify(name, &tr, &te, &plan)),
            Err(e) if args.dir.is_some() => {
                for rep in 0..plan.reps {
                    for cfg in &plan.metrics {
                        let mut r = ResultRecord::new(name, cfg.name(), "-", plan.seed).with_failure(format!("{e:#}"));
                        r.experiment = Some("classify".into());
                        r.rep = Some(rep);
                        records.push(r);
                    }
                }
            }
            Err(e) => return Err(e),
        }
    }
    emit(records, args.run.out.as_deref())
}

pub fn robustness(args: &RobustnessArgs) -> Result<Status> {
    let plan = plan(&args.run, false)?;
    let sigmas = parse_grid(&args.grid)?;
    if sigmas.iter().any(|s| *s < 0.0) {
        bail!("noise levels must be >= 0");
    }
    let (name, train, test) = match (&args.train, &args.test) {
        (Some(tr), Some(te)) => {
            let delim = args.data.delimiter.as_deref();
            (dataset_name(tr), load_dataset(tr, delim)?, load_dataset(te, delim)?)
        }
        _ => {
            let (tr, te) = bump_split(args.run.seed)?;
            ("Bumps".to_string(), tr, te)
        }
    };
    emit(experiments::robustness(&name, &train, &test, &sigmas, &plan), args.run.out.as_deref())
}

pub fn lengthscale(args: &LengthscaleArgs) -> Result<Status> {
    let plan = plan(&args.run, false)?;
    let windows = parse_usize_grid(&args.grid)?;
    if args.per_class < 2 {
        bail!("--per-class must be at least 2");
    }
    emit(experiments::lengthscale(&windows, args.per_class, &plan), args.run.out.as_deref())
}

pub fn sweep(args: &SweepArgs) -> Result<Status> {
    let dsw = MetricConfig::parse("dsw", args.params.as_deref(), args.seed)?;
    let plan = Plan {
        metrics: vec![dsw.clone()],
        seed: args.seed,
        reps: args.reps,
        candidates: args.candidates,
        znormalize: args.znormalize,
        keep_predictions: false,
    };
    plan.validate()?;
    let grid = parse_grid(&args.grid)?;
    let delim = args.data.delimiter.as_deref();
    let (train, test) = (load_dataset(&args.train, delim)?, load_dataset(&args.test, delim)?);
    let records = experiments::sweep(&dataset_name(&args.train), &train, &test, &dsw, &args.param, &grid, &plan)?;
    emit(records, args.out.as_deref())
}

pub fn shapes(args: &ShapesArgs) -> Result<Status> {
    let sides = parse_usize_list(&args.sides)?;
    let metrics = MetricConfig::parse_list(&args.metric, args.params.as_deref(), args.seed)?;
    let ds = add_noise_to_dataset(&polygon_dataset(&sides, args.samples)?, args.noise, args.seed)?;
    let mut text = String::new();
    let mut reports = Vec::new();
    for cfg in &metrics {
        let metric = cfg.build(1)?;
        let d = pairwise_distances(&ds, &ds, &metric).with_context(|| format!("{} distances", cfg.name()))?;
        let merges = agglomerative_cluster(&d)?;
        let _ = writeln!(text, "{}:", cfg.name());
        for (step, m) in merges.iter().enumerate() {
            let _ = writeln!(
                text,
                "  {} = {} + {}  height {}",
                sides.len() + step,
                m.left,
                m.right,
                fmt12(m.height)
            );
        }
        reports.push(json!({
            "metric": cfg.name(),
            "params_digest": metric.params_digest(),
            "params": cfg.params_json(None),
            "labels": ds.labels(),
            "distances": d.to_rows(),
            "merges": merges,
        }));
    }
    let body = json!({
        "sides": sides,
        "samples": args.samples,
        "noise": args.noise,
        "seed": args.seed,
        "metrics": reports,
    });
    match &args.out {
        Some(out) => {
            write_file(out, &format!("{body:#}\n"))?;
            print!("{text}");
        }
        None => println!("{body:#}"),
    }
    Ok(Status::Ok)
}

fn save_split(dir: &Path, name: &str, train: &LabeledDataset, test: &LabeledDataset) -> Result<()> {
    let sub = dir.join(name);
    fs::create_dir_all(&sub).with_context(|| format!("creating {}", sub.display()))?;
    save_ucr(train, sub.join(format!("{name}_TRAIN")), ',')?;
    save_ucr(test, sub.join(format!("{name}_TEST")), ',')?;
    println!("{}", sub.display());
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<Status> {
    match &args.kind {
        SynthKind::Narma { order, length, seed, out } => {
            let g = narma_generate(&NarmaConfig {
                order: *order,
                length: *length,
                seed: *seed,
            })?;
            let ds = LabeledDataset::new(format!("NARMA{order}"), vec![g.series], vec![*order as i64])?;
            save_ucr(&ds, out, infer_delimiter(out))?;
            if g.seed != *seed {
                eprintln!("note: seed {seed} diverged; used seed {}", g.seed);
            }
        }
        SynthKind::NarmaDataset {
            subseq_len,
            per_class,
            seed,
            znormalize,
            out,
        } => {
            let d = make_narma_dataset(per_class * subseq_len, *per_class, *subseq_len, *seed)?;
            let (tr, te) = if *znormalize {
                (d.train.znormalized(), d.test.znormalized())
            } else {
                (d.train, d.test)
            };
            save_split(out, &format!("NARMA{subseq_len}"), &tr, &te)?;
        }
        SynthKind::Bumps { seed, out } => {
            let (tr, te) = bump_split(*seed)?;
            save_split(out, "Bumps", &tr, &te)?;
        }
        SynthKind::Polygons { sides, samples, out } => {
            let ds = polygon_dataset(&parse_usize_list(sides)?, *samples)?;
            save_ucr(&ds, out, infer_delimiter(out))?;
        }
        SynthKind::Noise {
            input,
            sigma,
            seed,
            data,
            out,
        } => {
            let ds = load_dataset(input, data.delimiter.as_deref())?;
            save_ucr(&add_noise_to_dataset(&ds, *sigma, *seed)?, out, infer_delimiter(out))?;
        }
    }
    Ok(Status::Ok)
}

/// Records from files and from `.jsonl` files directly inside directories.
fn collect_records(paths: &[PathBuf]) -> Result<Vec<ResultRecord>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    let mut out = Vec::new();
    for f in &files {
        out.extend(load_jsonl(f).with_context(|| format!("reading {}", f.display()))?);
    }
    let failed = out.iter().filter(|r| r.is_failed()).count();
    if failed > 0 {
        eprintln!("note: skipping {failed} failed records");
    }
    out.retain(|r| !r.is_failed());
    if out.is_empty() {
        bail!("no usable records in the given files");
    }
    Ok(out)
}

#[derive(Default)]
struct Mean {
    error: f64,
    train_accuracy: f64,
    n: usize,
    n_train: usize,
}

/// Mean test error and training accuracy per (dataset key, metric),
/// averaging over repetitions.
fn averages(records: &[ResultRecord]) -> BTreeMap<String, BTreeMap<String, Mean>> {
    let mut out: BTreeMap<String, BTreeMap<String, Mean>> = BTreeMap::new();
    for r in records {
        let m = out.entry(record_key(r)).or_default().entry(r.metric.clone()).or_default();
        m.error += r.error_rate;
        m.n += 1;
        if let Some(a) = r.train_accuracy {
            m.train_accuracy += a;
            m.n_train += 1;
        }
    }
    out
}

pub fn sharpshooter_report(args: &SharpshooterArgs) -> Result<Status> {
    let means = averages(&collect_records(&args.results)?);
    let mut points = Vec::new();
    let mut counts: BTreeMap<String, usize> = ["TP", "TN", "FP", "FN"].iter().map(|q| (q.to_string(), 0)).collect();
    let mut text = String::new();
    for (key, by_metric) in &means {
        let (Some(a), Some(b)) = (by_metric.get(&args.a), by_metric.get(&args.b)) else {
            continue;
        };
        if a.n_train == 0 || b.n_train == 0 {
            continue;
        }
        let s = sharpshooter(
            a.train_accuracy / a.n_train as f64,
            b.train_accuracy / b.n_train as f64,
            1.0 - a.error / a.n as f64,
            1.0 - b.error / b.n as f64,
        )
        .with_context(|| format!("dataset {key}"))?;
        *counts.get_mut(&s.quadrant.to_string()).expect("all quadrants counted") += 1;
        let _ = writeln!(
            text,
            "{key:<32} expected {:>8.4} actual {:>8.4} {}",
            s.expected, s.actual, s.quadrant
        );
        points.push(json!({ "dataset": key, "expected": s.expected, "actual": s.actual, "quadrant": s.quadrant }));
    }
    if points.is_empty() {
        bail!("no dataset has training and test results for both {} and {}", args.a, args.b);
    }
    let n = points.len() as f64;
    let percentages: BTreeMap<&String, f64> = counts.iter().map(|(q, c)| (q, 100.0 * *c as f64 / n)).collect();
    let _ = writeln!(
        text,
        "{} vs {} over {} datasets: {}",
        args.a,
        args.b,
        points.len(),
        [Quadrant::TP, Quadrant::TN, Quadrant::FP, Quadrant::FN]
            .iter()
            .map(|q| format!("{q} {}", counts[&q.to_string()]))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let body = json!({ "a": args.a, "b": args.b, "points": points, "counts": counts, "percentages": percentages });
    if let Some(out) = &args.out {
        write_file(out, &format!("{body:#}\n"))?;
    }
    print!("{text}");
    Ok(Status::Ok)
}

pub fn ranks(args: &RanksArgs) -> Result<Status> {
    let alpha = Alpha::from_value(args.alpha)?;
    let means = averages(&collect_records(&args.results)?);
    let methods: Vec<String> = means
        .values()
        .flat_map(|m| m.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut datasets = Vec::new();
    let mut rows = Vec::new();
    for (key, by_metric) in &means {
        let row: Option<Vec<f64>> = methods
            .iter()
            .map(|m| by_metric.get(m).map(|v| v.error / v.n as f64))
            .collect();
        match row {
            Some(row) => {
                datasets.push(key.clone());
                rows.push(row);
            }
            None => eprintln!("note: {key} lacks some methods; left out"),
        }
    }
    if datasets.is_empty() {
        return Err(anyhow!("no dataset has results for all of {}", methods.join(", ")));
    }
    let report = RankReport::from_table(&ErrorTable::new(datasets, methods, rows)?, alpha)?;
    if let Some(out) = &args.out {
        write_file(out, &format!("{:#}\n", serde_json::to_value(&report)?))?;
    }
    let mut stdout = io::stdout().lock();
    write!(stdout, "{}", report.to_text())?;
    Ok(Status::Ok)
}
