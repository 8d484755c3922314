//! A runtime-selectable distance and pairwise distance tables.
//!
//! Each metric splits into a per-series preparation step (derivatives,
//! complexity estimates, reservoir states) and a pairwise comparison, so a
//! dataset is prepared once and compared many times.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{
    complexity_estimate, complexity_factor, derivative_transform, dtw_cost, euclidean, WdtwParams,
};
use crate::dsw::DswModel;
use crate::error::{Error, Result};
use crate::series::{DistanceMatrix, LabeledDataset, TimeSeries};

/// Metric names as used on the command line and in result records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Ed,
    Dtw,
    Ddtw,
    Wdtw,
    Wddtw,
    Cid,
    Dsw,
}

impl MetricKind {
    pub const ALL: [MetricKind; 7] = [
        MetricKind::Ed,
        MetricKind::Dtw,
        MetricKind::Ddtw,
        MetricKind::Wdtw,
        MetricKind::Wddtw,
        MetricKind::Cid,
        MetricKind::Dsw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Ed => "ed",
            MetricKind::Dtw => "dtw",
            MetricKind::Ddtw => "ddtw",
            MetricKind::Wdtw => "wdtw",
            MetricKind::Wddtw => "wddtw",
            MetricKind::Cid => "cid",
            MetricKind::Dsw => "dsw",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown metric {s:?}; expected one of ed, dtw, ddtw, wdtw, wddtw, cid, dsw"
                ))
            })
    }
}

#[derive(Debug, Clone)]
pub enum Metric {
    Euclidean,
    Dtw { band: Option<usize> },
    Ddtw,
    Wdtw(WdtwParams),
    Wddtw(WdtwParams),
    Cid,
    Dsw(DswModel),
}

/// A series after a metric's per-series preprocessing.
#[derive(Debug, Clone)]
pub struct Prepared {
    series: TimeSeries,
    complexity: f64,
}

impl Prepared {
    pub fn series(&self) -> &TimeSeries {
        &self.series
    }
}

impl Metric {
    pub fn kind(&self) -> MetricKind {
        match self {
            Metric::Euclidean => MetricKind::Ed,
            Metric::Dtw { .. } => MetricKind::Dtw,
            Metric::Ddtw => MetricKind::Ddtw,
            Metric::Wdtw(_) => MetricKind::Wdtw,
            Metric::Wddtw(_) => MetricKind::Wddtw,
            Metric::Cid => MetricKind::Cid,
            Metric::Dsw(_) => MetricKind::Dsw,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().name()
    }

    pub fn dtw() -> Self {
        Metric::Dtw { band: None }
    }

    pub fn prepare(&self, x: &TimeSeries) -> Result<Prepared> {
        let (series, complexity) = match self {
            Metric::Euclidean | Metric::Dtw { .. } | Metric::Wdtw(_) => (x.clone(), 0.0),
            Metric::Ddtw | Metric::Wddtw(_) => (derivative_transform(x)?, 0.0),
            Metric::Cid => (x.clone(), complexity_estimate(x)?),
            Metric::Dsw(model) => (model.states(x)?.into_series(), 0.0),
        };
        Ok(Prepared { series, complexity })
    }

    pub fn compare(&self, a: &Prepared, b: &Prepared) -> Result<f64> {
        let (q, c) = (&a.series, &b.series);
        match self {
            Metric::Euclidean => euclidean(q, c),
            Metric::Dtw { band } => dtw_cost(q, c, *band),
            Metric::Ddtw | Metric::Dsw(_) => dtw_cost(q, c, None),
            Metric::Wdtw(p) | Metric::Wddtw(p) => crate::distance::wdtw(q, c, p),
            Metric::Cid => Ok(dtw_cost(q, c, None)? * complexity_factor(a.complexity, b.complexity)),
        }
    }

    pub fn distance(&self, q: &TimeSeries, c: &TimeSeries) -> Result<f64> {
        self.compare(&self.prepare(q)?, &self.prepare(c)?)
    }

    /// Prepares every series of a dataset, in parallel.
    pub fn prepare_all(&self, ds: &LabeledDataset) -> Result<Vec<Prepared>> {
        ds.series()
            .par_iter()
            .enumerate()
            .map(|(i, s)| self.prepare(s).map_err(|e| e.at_item(i)))
            .collect()
    }

    /// Digest of the metric's parameters, if it has any.
    pub fn params_digest(&self) -> String {
        match self {
            Metric::Dsw(m) => m.digest(),
            Metric::Wdtw(p) | Metric::Wddtw(p) => {
                format!("g={},w={}", p.steepness, p.max_weight)
            }
            Metric::Dtw { band: Some(r) } => format!("band={r}"),
            _ => String::from("-"),
        }
    }
}

/// `entries[i][j] = metric(a[i], b[j])`. Cells are evaluated in parallel;
/// values do not depend on evaluation order.
pub fn pairwise_distances(a: &LabeledDataset, b: &LabeledDataset, metric: &Metric) -> Result<DistanceMatrix> {
    let pa = metric.prepare_all(a)?;
    let pb = metric.prepare_all(b)?;
    prepared_cross(&pa, &pb, metric)
}

pub(crate) fn prepared_cross(pa: &[Prepared], pb: &[Prepared], metric: &Metric) -> Result<DistanceMatrix> {
    let cols = pb.len();
    let rows: Vec<Vec<f64>> = pa
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            pb.iter()
                .enumerate()
                .map(|(j, y)| metric.compare(x, y).map_err(|e| e.at_pair(i, j)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    DistanceMatrix::new(pa.len(), cols, rows.concat())
}

/// Square table of one prepared set against itself. Only the upper
/// triangle is computed; every metric in this crate is exactly symmetric.
pub(crate) fn prepared_self(p: &[Prepared], metric: &Metric) -> Result<DistanceMatrix> {
    let n = p.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| metric.compare(&p[i], &p[j]).map_err(|e| e.at_pair(i, j)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + 1 + k;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    DistanceMatrix::new(n, n, entries)
}
