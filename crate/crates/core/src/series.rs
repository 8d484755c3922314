//! Time series, labeled datasets and distance tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A length-`L`, `d`-variate real-valued sequence stored row-major.
///
/// Row `t` holds the `d` observations at time `t`. Every value is finite and
/// both `L` and `d` are at least one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries", into = "RawSeries")]
pub struct TimeSeries {
    values: Vec<f64>,
    dims: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSeries {
    dims: usize,
    values: Vec<f64>,
}

impl TryFrom<RawSeries> for TimeSeries {
    type Error = Error;

    fn try_from(raw: RawSeries) -> Result<Self> {
        TimeSeries::new(raw.values, raw.dims)
    }
}

impl From<TimeSeries> for RawSeries {
    fn from(ts: TimeSeries) -> Self {
        RawSeries {
            dims: ts.dims,
            values: ts.values,
        }
    }
}

impl TimeSeries {
    /// Builds a series from row-major values with `dims` channels per row.
    pub fn new(values: Vec<f64>, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::invalid("series must have at least one channel"));
        }
        if values.is_empty() {
            return Err(Error::invalid("series must have at least one time point"));
        }
        if values.len() % dims != 0 {
            return Err(Error::invalid(format!(
                "{} values do not form rows of width {dims}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at time {}",
                pos / dims
            )));
        }
        Ok(Self { values, dims })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1)
    }

    /// Builds a series from a list of equally wide rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dims = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dims);
        for (t, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dims {
                return Err(Error::invalid(format!(
                    "row {t} has width {}, expected {dims}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(values, dims)
    }

    /// Internal constructor for values that are finite by construction.
    pub(crate) fn from_parts_unchecked(values: Vec<f64>, dims: usize) -> Self {
        debug_assert!(dims > 0 && !values.is_empty() && values.len() % dims == 0);
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values, dims }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len() / self.dims
    }

    /// Always false: a series holds at least one time point.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dims..(t + 1) * self.dims]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.dims)
    }

    /// Row-major view of all values.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values of channel `k` across time.
    pub fn channel(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(k).step_by(self.dims).copied()
    }

    /// First `len` time points.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::invalid(format!(
                "prefix length {len} outside 1..={}",
                self.len()
            )));
        }
        Ok(Self::from_parts_unchecked(
            self.values[..len * self.dims].to_vec(),
            self.dims,
        ))
    }

    /// Applies `f` to every value; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect(), self.dims)
    }
}

/// Shifts and scales each channel to zero mean and unit population standard
/// deviation. Channels with (numerically) zero variance become all zeros.
pub fn znormalize(x: &TimeSeries) -> TimeSeries {
    let len = x.len();
    let dims = x.dims();
    let n = len as f64;
    let mut out = x.as_slice().to_vec();
    for k in 0..dims {
        let mean = x.channel(k).sum::<f64>() / n;
        let var = x.channel(k).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        let degenerate = std <= 1e-12 * (1.0 + mean.abs());
        for t in 0..len {
            let v = &mut out[t * dims + k];
            *v = if degenerate { 0.0 } else { (*v - mean) / std };
        }
    }
    TimeSeries::from_parts_unchecked(out, dims)
}

/// Class labels are opaque integers; no contiguity is assumed.
pub type Label = i64;

/// A named list of series with one label each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    name: String,
    series: Vec<TimeSeries>,
    labels: Vec<Label>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, series: Vec<TimeSeries>, labels: Vec<Label>) -> Result<Self> {
        if series.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        if series.is_empty() {
            return Err(Error::invalid("dataset must hold at least one series"));
        }
        Ok(Self {
            name: name.into(),
            series,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TimeSeries, Label)> {
        self.series.iter().zip(self.labels.iter().copied())
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> Vec<Label> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Applies a fallible transform to every series, keeping labels.
    pub fn try_map(&self, mut f: impl FnMut(&TimeSeries) -> Result<TimeSeries>) -> Result<Self> {
        let series = self
            .series
            .iter()
            .enumerate()
            .map(|(i, s)| f(s).map_err(|e| e.at_item(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: self.name.clone(),
            series,
            labels: self.labels.clone(),
        })
    }

    pub fn znormalized(&self) -> Self {
        Self {
            name: self.name.clone(),
            series: self.series.iter().map(znormalize).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Keeps the items at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let series = indices.iter().map(|&i| self.series[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(self.name.clone(), series, labels)
    }
}

/// An `m x n` table of nonnegative finite distances, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(v) = entries.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("distance entry {v} is not a finite nonnegative number")));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged distance rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Exact symmetry check.
    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }
}
