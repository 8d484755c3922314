//! Turning command-line text into library values.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use statewarp::ucr::{infer_delimiter, load_ucr};
use statewarp::{CrjParams, DswModel, LabeledDataset, Metric, MetricKind, TimeSeries, WdtwParams};

/// A metric name with its parameters resolved against the defaults.
#[derive(Debug, Clone)]
pub struct MetricConfig {
    pub kind: MetricKind,
    pub band: Option<usize>,
    pub wdtw: WdtwParams,
    /// Network template; `seed` is the default network seed.
    pub crj: CrjParams,
}

fn object_keys<T: Serialize>(v: &T) -> Vec<String> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

/// Overlays the keys of `overrides` on the JSON form of `base`.
fn overlay<T: Serialize + DeserializeOwned>(base: &T, overrides: &Map<String, Value>) -> Result<T> {
    let mut v = serde_json::to_value(base)?;
    if let Value::Object(m) = &mut v {
        for (k, val) in overrides {
            m.insert(k.clone(), val.clone());
        }
    }
    Ok(serde_json::from_value(v)?)
}

impl MetricConfig {
    /// Parses one metric name. `params` is a JSON object whose keys may
    /// target any metric; keys that no metric knows are rejected.
    pub fn parse(name: &str, params: Option<&str>, seed: u64) -> Result<Self> {
        let kind: MetricKind = name.parse()?;
        let overrides = match params {
            None => Map::new(),
            Some(text) => match serde_json::from_str(text).context("--params is not valid JSON")? {
                Value::Object(m) => m,
                _ => bail!("--params must be a JSON object"),
            },
        };
        let crj_keys = object_keys(&CrjParams::default());
        let wdtw_keys = object_keys(&WdtwParams::default());
        for k in overrides.keys() {
            if k != "band" && !crj_keys.contains(k) && !wdtw_keys.contains(k) {
                bail!("unknown parameter {k:?}");
            }
        }
        let pick = |keys: &[String]| -> Map<String, Value> {
            overrides
                .iter()
                .filter(|(k, _)| keys.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect()
        };
        let crj: CrjParams = overlay(&CrjParams { seed, ..CrjParams::default() }, &pick(&crj_keys))
            .context("invalid reservoir parameters")?;
        crj.validate()?;
        let wdtw: WdtwParams = overlay(&WdtwParams::default(), &pick(&wdtw_keys)).context("invalid weighting parameters")?;
        wdtw.validate()?;
        let band = match overrides.get("band") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| anyhow!("band must be a nonnegative integer"))? as usize,
            ),
        };
        Ok(Self { kind, band, wdtw, crj })
    }

    /// Comma-separated list of metrics sharing one parameter object.
    pub fn parse_list(names: &str, params: Option<&str>, seed: u64) -> Result<Vec<Self>> {
        let mut out: Vec<Self> = Vec::new();
        for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let cfg = Self::parse(name, params, seed)?;
            if out.iter().any(|c| c.kind == cfg.kind) {
                bail!("metric {name} listed twice");
            }
            out.push(cfg);
        }
        if out.is_empty() {
            bail!("no metric given");
        }
        Ok(out)
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Network template adapted to series of `dims` channels.
    pub fn crj_for(&self, dims: usize, seed: u64) -> CrjParams {
        CrjParams {
            input_dims: dims,
            seed,
            ..self.crj.clone()
        }
    }

    /// The metric with a fixed network (no selection) for `dims` channels.
    pub fn build(&self, dims: usize) -> Result<Metric> {
        Ok(match self.kind {
            MetricKind::Ed => Metric::Euclidean,
            MetricKind::Dtw => Metric::Dtw { band: self.band },
            MetricKind::Ddtw => Metric::Ddtw,
            MetricKind::Wdtw => Metric::Wdtw(self.wdtw),
            MetricKind::Wddtw => Metric::Wddtw(self.wdtw),
            MetricKind::Cid => Metric::Cid,
            MetricKind::Dsw => Metric::Dsw(DswModel::from_params(&self.crj_for(dims, self.crj.seed))?),
        })
    }

    /// Parameters that determine this metric, as JSON.
    pub fn params_json(&self, crj: Option<&CrjParams>) -> Value {
        match self.kind {
            MetricKind::Dsw => serde_json::to_value(crj.unwrap_or(&self.crj)).unwrap_or(Value::Null),
            MetricKind::Wdtw | MetricKind::Wddtw => serde_json::to_value(self.wdtw).unwrap_or(Value::Null),
            MetricKind::Dtw => serde_json::json!({ "band": self.band }),
            _ => Value::Object(Map::new()),
        }
    }
}

/// Grid values from `start:step:end` (end included within 1e-12), a comma
/// list, or a single number. Values are rounded to 12 significant digits so
/// `0.1:0.2:1.9` yields exactly 0.1, 0.3, ..., 1.9.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().with_context(|| format!("bad number {s:?} in grid"))?;
        if !v.is_finite() {
            bail!("grid values must be finite");
        }
        Ok(v)
    };
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if step == 0.0 || (end - start) * step < 0.0 {
                bail!("grid step {step} cannot reach {end} from {start}");
            }
            let count = ((end - start) / step + 1e-12 / step.abs()).floor() as usize + 1;
            if count > 1_000_000 {
                bail!("grid has too many points");
            }
            (0..count).map(|k| round12(start + k as f64 * step)).collect()
        }
        [single] => single.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => bail!("grid must be start:step:end or a comma list"),
    };
    if values.is_empty() {
        bail!("empty grid");
    }
    Ok(values)
}

fn round12(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Grid of positive integers.
pub fn parse_usize_grid(text: &str) -> Result<Vec<usize>> {
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(anyhow!("grid value {v} is not a positive integer"))
            }
        })
        .collect()
}

/// Twelve significant digits, trailing zeros removed.
pub fn fmt12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        format!("{}e{e}", trim_zeros(mantissa.to_string()))
    };
    s
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn parse_delimiter(text: Option<&str>, path: &Path) -> Result<char> {
    Ok(match text {
        None => infer_delimiter(path),
        Some("tab") | Some("\\t") | Some("\t") => '\t',
        Some("space") | Some("whitespace") | Some(" ") => ' ',
        Some(s) if s.chars().count() == 1 => s.chars().next().expect("one char"),
        Some(s) => bail!("delimiter must be one character, tab or space, got {s:?}"),
    })
}

pub fn load_dataset(path: &Path, delimiter: Option<&str>) -> Result<LabeledDataset> {
    let delim = parse_delimiter(delimiter, path)?;
    load_ucr(path, delim).with_context(|| format!("reading {}", path.display()))
}

/// Reads one series. With `row`, the file is UCR-format and that record is
/// taken; otherwise a single line is a univariate series and several lines
/// are time steps with one column per channel.
pub fn load_series(path: &Path, row: Option<usize>, delimiter: Option<&str>) -> Result<TimeSeries> {
    if let Some(k) = row {
        let ds = load_dataset(path, delimiter)?;
        return ds
            .series()
            .get(k)
            .cloned()
            .ok_or_else(|| anyhow!("{} has {} records, no record {k}", path.display(), ds.len()));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let split = |line: &str| -> Result<Vec<f64>> {
        line.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().with_context(|| format!("bad value {t:?} in {}", path.display())))
            .collect()
    };
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let series = match lines.as_slice() {
        [] => bail!("{} holds no values", path.display()),
        [one] => TimeSeries::univariate(split(one)?)?,
        many => {
            let rows = many.iter().map(|l| split(l)).collect::<Result<Vec<_>>>()?;
            TimeSeries::from_rows(&rows)?
        }
    };
    Ok(series)
}

/// Parses a comma list of positive integers.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad integer {t:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("0.1:0.2:1.9").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[4], 0.9);
        assert_eq!(g[9], 1.9);
        assert_eq!(parse_grid("0.1:0.2:1.1").unwrap(), vec![0.1, 0.3, 0.5, 0.7, 0.9, 1.1]);
        assert_eq!(parse_grid("1:1:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("3:-1:1").unwrap(), vec![3.0, 2.0, 1.0]);
        assert_eq!(parse_grid("0.5,2").unwrap(), vec![0.5, 2.0]);
        assert_eq!(parse_grid("0:0.3:1").unwrap().len(), 4);
        assert!(parse_grid("0:0:1").is_err());
        assert!(parse_grid("1:1:0").is_err());
        assert!(parse_grid("a:b").is_err());
        assert!(parse_usize_grid("0.5:1:2").is_err());
        assert_eq!(parse_usize_grid("100:100:400").unwrap(), vec![100, 200, 300, 400]);
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(2.0 / 3.0 * 1000.0), "666.666666667");
        assert_eq!(fmt12(1.5e-9), "1.5e-9");
        assert_eq!(fmt12(-0.25), "-0.25");
        assert_eq!(fmt12(123456789012345.0), "1.23456789012e14");
    }

    #[test]
    fn params_route_to_their_metric() {
        let p = Some(r#"{"band": 3, "scaling": 0.5, "steepness": 0.1}"#);
        let dtw = MetricConfig::parse("dtw", p, 7).unwrap();
        assert_eq!(dtw.band, Some(3));
        let dsw = MetricConfig::parse("dsw", p, 7).unwrap();
        assert_eq!(dsw.crj.scaling, 0.5);
        assert_eq!(dsw.crj.seed, 7);
        assert_eq!(dsw.wdtw.steepness, 0.1);
        assert!(MetricConfig::parse("dsw", Some(r#"{"scalin": 0.5}"#), 0).is_err());
        assert!(MetricConfig::parse("dsw", Some(r#"{"reservoir_size": 1}"#), 0).is_err());
        assert!(MetricConfig::parse("nope", None, 0).is_err());
        assert!(MetricConfig::parse_list("dtw,dtw", None, 0).is_err());
        assert_eq!(MetricConfig::parse_list("ed, dsw", None, 0).unwrap().len(), 2);
    }

    #[test]
    fn fixed_dsw_uses_data_width() {
        let cfg = MetricConfig::parse("dsw", None, 1).unwrap();
        let x = TimeSeries::from_rows(&[[0.0, 1.0], [1.0, 0.5], [0.2, 0.1]]).unwrap();
        assert!(cfg.build(1).unwrap().distance(&x, &x).is_err());
        assert_eq!(cfg.build(2).unwrap().distance(&x, &x).unwrap(), 0.0);
    }
}
