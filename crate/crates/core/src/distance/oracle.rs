//! Brute-force alignment oracle used to check the DP engine.
//!
//! Walks every path that starts at `(0, 0)`, ends at the last cell and moves
//! by `(0,1)`, `(1,0)` or `(1,1)`, and keeps the smallest cumulative cost.

use crate::distance::dtw::{check_dims, sq_dist};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Largest length either side may have.
pub const ENUMERATION_LIMIT: usize = 8;

/// Minimum cumulative `local` cost over all valid paths on a
/// `rows x cols` grid. Costs accumulate in path order.
pub fn enumerate_min_cost<F>(rows: usize, cols: usize, local: F) -> Result<f64>
where
    F: Fn(usize, usize) -> f64,
{
    if rows > ENUMERATION_LIMIT || cols > ENUMERATION_LIMIT || rows == 0 || cols == 0 {
        return Err(Error::EnumerationGuard {
            limit: ENUMERATION_LIMIT,
            left: rows,
            right: cols,
        });
    }

    fn walk<F: Fn(usize, usize) -> f64>(
        i: usize,
        j: usize,
        sum: f64,
        end: (usize, usize),
        local: &F,
        best: &mut f64,
    ) {
        if (i, j) == end {
            *best = best.min(sum);
            return;
        }
        for (di, dj) in [(1, 1), (0, 1), (1, 0)] {
            let (ni, nj) = (i + di, j + dj);
            if ni <= end.0 && nj <= end.1 {
                walk(ni, nj, local(ni, nj) + sum, end, local, best);
            }
        }
    }

    let mut best = f64::INFINITY;
    walk(0, 0, local(0, 0), (rows - 1, cols - 1), &local, &mut best);
    Ok(best)
}

/// Exhaustive DTW cost with squared-Euclidean point cost.
pub fn enumerate_paths_cost(q: &TimeSeries, c: &TimeSeries) -> Result<f64> {
    check_dims(q, c)?;
    enumerate_min_cost(q.len(), c.len(), |i, j| sq_dist(q.row(i), c.row(j)))
}

/// Number of valid paths on a grid, for sanity checks on the walker.
pub fn count_paths(rows: usize, cols: usize) -> u64 {
    // Delannoy numbers D(m, n) with m = rows - 1, n = cols - 1.
    let (m, n) = (rows - 1, cols - 1);
    let mut d = vec![vec![1u64; n + 1]; m + 1];
    for a in 1..=m {
        for b in 1..=n {
            d[a][b] = d[a - 1][b] + d[a][b - 1] + d[a - 1][b - 1];
        }
    }
    d[m][n]
}
