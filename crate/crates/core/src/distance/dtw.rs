//! The warping engine shared by DTW, its variants and DSW.
//!
//! Cumulative cost at cell `(i, j)` is `local(i, j) + min(diag, left, down)`
//! where `diag = (i-1, j-1)`, `left = (i, j-1)` and `down = (i-1, j)`. The
//! returned value is the raw cumulative sum along the best path.

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Monotone, continuous, boundary-anchored index pairing between two
/// sequences. Pairs are 0-based in memory; exports are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentPath {
    pairs: Vec<(usize, usize)>,
}

impl AlignmentPath {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks boundary, continuity and monotonicity against the two lengths.
    pub fn is_valid_for(&self, len_a: usize, len_b: usize) -> bool {
        let (Some(&first), Some(&last)) = (self.pairs.first(), self.pairs.last()) else {
            return false;
        };
        first == (0, 0)
            && last == (len_a - 1, len_b - 1)
            && self.pairs.windows(2).all(|w| {
                let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
                matches!((di, dj), (0, 1) | (1, 0) | (1, 1))
            })
    }

    /// Two-column CSV with a `a_index,b_index` header, 1-based.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a_index,b_index\n");
        for (a, b) in &self.pairs {
            out.push_str(&format!("{},{}\n", a + 1, b + 1));
        }
        out
    }

    /// JSON array of 1-based `[a, b]` pairs.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path serializes")
    }
}

impl Serialize for AlignmentPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.pairs.len()))?;
        for (a, b) in &self.pairs {
            seq.serialize_element(&[a + 1, b + 1])?;
        }
        seq.end()
    }
}

/// Squared Euclidean distance between two points.
#[inline(always)]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

pub(crate) fn check_dims(q: &TimeSeries, c: &TimeSeries) -> Result<()> {
    if q.dims() != c.dims() {
        return Err(Error::DimensionMismatch {
            left: q.dims(),
            right: c.dims(),
        });
    }
    Ok(())
}

pub(crate) fn check_band(band: Option<usize>, rows: usize, cols: usize) -> Result<()> {
    match band {
        Some(r) if r < rows.abs_diff(cols) => Err(Error::InfeasibleBand {
            band: r,
            left: rows,
            right: cols,
        }),
        _ => Ok(()),
    }
}

/// Minimum of two non-NaN values. Compiles to a single compare, unlike
/// `f64::min`, which matters on the serial chain through the DP row.
#[inline(always)]
fn min2(a: f64, b: f64) -> f64 {
    if b < a {
        b
    } else {
        a
    }
}

#[inline]
fn band_range(i: usize, cols: usize, band: Option<usize>) -> (usize, usize) {
    match band {
        None => (0, cols - 1),
        Some(r) => (i.saturating_sub(r), (i + r).min(cols - 1)),
    }
}

/// Cost-only DP holding two rows of the shorter side.
pub(crate) fn warp_cost<F>(rows: usize, cols: usize, band: Option<usize>, local: F) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    if cols > rows {
        // Transposing leaves every cumulative value unchanged.
        return warp_cost_rows(cols, rows, band, |j, i| local(i, j));
    }
    warp_cost_rows(rows, cols, band, local)
}

fn warp_cost_rows<F>(rows: usize, cols: usize, band: Option<usize>, local: F) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    // Index k in a row buffer stands for column k - 1; slot 0 is a sentinel.
    let mut prev = vec![f64::INFINITY; cols + 1];
    let mut cur = vec![f64::INFINITY; cols + 1];
    prev[0] = 0.0;
    for i in 0..rows {
        let (lo, hi) = band_range(i, cols, band);
        if hi + 2 <= cols {
            cur[hi + 2] = f64::INFINITY;
        }
        let mut left = f64::INFINITY;
        for j in lo..=hi {
            left = local(i, j) + min2(left, min2(prev[j], prev[j + 1]));
            cur[j + 1] = left;
        }
        cur[lo] = f64::INFINITY;
        std::mem::swap(&mut prev, &mut cur);
        if i == 0 {
            // Drop the virtual origin so later rows cannot reach it.
            prev[0] = f64::INFINITY;
            cur[0] = f64::INFINITY;
        }
    }
    prev[cols]
}

/// Full-matrix DP with path recovery.
///
/// Among equally cheap paths the one reported is chosen step by step from
/// the origin, preferring the diagonal move, then advancing in the second
/// sequence, then in the first. Only moves along exactly tied cumulative
/// values are followed, so the path sums to the returned cost bitwise.
pub(crate) fn warp_with_path<F>(
    rows: usize,
    cols: usize,
    band: Option<usize>,
    local: F,
) -> (f64, AlignmentPath)
where
    F: Fn(usize, usize) -> f64,
{
    let inf = f64::INFINITY;
    let mut acc = vec![inf; rows * cols];
    let mut cell = vec![inf; rows * cols];
    let at = |acc: &[f64], i: usize, j: usize| acc[i * cols + j];
    for i in 0..rows {
        let (lo, hi) = band_range(i, cols, band);
        for j in lo..=hi {
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { at(&acc, i - 1, j - 1) } else { inf };
                let left = if j > 0 { at(&acc, i, j - 1) } else { inf };
                let down = if i > 0 { at(&acc, i - 1, j) } else { inf };
                diag.min(left).min(down)
            };
            let l = local(i, j);
            cell[i * cols + j] = l;
            acc[i * cols + j] = l + best;
        }
    }
    let cost = at(&acc, rows - 1, cols - 1);

    // `p` feeds `k` when k's cumulative value is exactly local(k) + acc(p).
    let feeds = |p: usize, k: usize| acc[p].is_finite() && cell[k] + acc[p] == acc[k];

    // Cells from which the end is reachable through feeding moves.
    let mut good = vec![false; rows * cols];
    good[rows * cols - 1] = true;
    for i in (0..rows).rev() {
        for j in (0..cols).rev() {
            let k = i * cols + j;
            if !good[k] || (i, j) == (0, 0) {
                continue;
            }
            if i > 0 && j > 0 && feeds(k - cols - 1, k) {
                good[k - cols - 1] = true;
            }
            if j > 0 && feeds(k - 1, k) {
                good[k - 1] = true;
            }
            if i > 0 && feeds(k - cols, k) {
                good[k - cols] = true;
            }
        }
    }

    let mut pairs = Vec::with_capacity(rows + cols);
    let (mut i, mut j) = (0, 0);
    pairs.push((0, 0));
    while (i, j) != (rows - 1, cols - 1) {
        let k = i * cols + j;
        let next = [(1, 1), (0, 1), (1, 0)]
            .into_iter()
            .map(|(di, dj)| (i + di, j + dj))
            .find(|&(ni, nj)| {
                ni < rows && nj < cols && good[ni * cols + nj] && feeds(k, ni * cols + nj)
            })
            .expect("an optimal continuation exists from every good cell");
        (i, j) = next;
        pairs.push(next);
    }
    (cost, AlignmentPath { pairs })
}

/// Result of a DTW alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub cost: f64,
    pub path: AlignmentPath,
}

/// Cost-only DTW on row-major values of width `d`, rows of `a` outermost.
///
/// Each row of local costs is filled one channel at a time from a
/// channel-major copy of `b`, which keeps the inner loops contiguous. The
/// per-cell accumulation order matches [`sq_dist`], so values are bitwise
/// equal to the generic kernel.
fn sq_euclid_warp_cost(a: &[f64], b: &[f64], d: usize, band: Option<usize>) -> f64 {
    let (rows, cols) = (a.len() / d, b.len() / d);
    let bt: Vec<f64> = if d == 1 {
        b.to_vec()
    } else {
        (0..d).flat_map(|k| b.iter().skip(k).step_by(d).copied()).collect()
    };
    let mut local = vec![0.0; cols];
    let mut prev = vec![f64::INFINITY; cols + 1];
    let mut cur = vec![f64::INFINITY; cols + 1];
    prev[0] = 0.0;
    for i in 0..rows {
        let (lo, hi) = band_range(i, cols, band);
        let row = &mut local[lo..=hi];
        row.fill(0.0);
        for (k, &x) in a[i * d..(i + 1) * d].iter().enumerate() {
            let channel = &bt[k * cols + lo..=k * cols + hi];
            for (l, &y) in row.iter_mut().zip(channel) {
                let diff = x - y;
                *l += diff * diff;
            }
        }
        if hi + 2 <= cols {
            cur[hi + 2] = f64::INFINITY;
        }
        let mut left = f64::INFINITY;
        for j in lo..=hi {
            left = local[j] + min2(left, min2(prev[j], prev[j + 1]));
            cur[j + 1] = left;
        }
        cur[lo] = f64::INFINITY;
        std::mem::swap(&mut prev, &mut cur);
        if i == 0 {
            prev[0] = f64::INFINITY;
            cur[0] = f64::INFINITY;
        }
    }
    prev[cols]
}

/// DTW cost with squared-Euclidean point cost, without the path.
///
/// `band` is a Sakoe-Chiba radius; `None` means unconstrained.
pub fn dtw_cost(q: &TimeSeries, c: &TimeSeries, band: Option<usize>) -> Result<f64> {
    check_dims(q, c)?;
    check_band(band, q.len(), c.len())?;
    // The transposed problem has the same cumulative values; keep the
    // shorter series on the inner axis.
    let (a, b) = if c.len() > q.len() { (c, q) } else { (q, c) };
    Ok(sq_euclid_warp_cost(a.as_slice(), b.as_slice(), q.dims(), band))
}

/// DTW cost together with an optimal alignment path.
pub fn dtw(q: &TimeSeries, c: &TimeSeries, band: Option<usize>) -> Result<Alignment> {
    check_dims(q, c)?;
    check_band(band, q.len(), c.len())?;
    let (cost, path) = warp_with_path(q.len(), c.len(), band, |i, j| sq_dist(q.row(i), c.row(j)));
    Ok(Alignment { cost, path })
}
