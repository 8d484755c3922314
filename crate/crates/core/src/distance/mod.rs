//! Lock-step and elastic distances.
//!
//! Elastic distances use the squared Euclidean point cost and return the raw
//! cumulative sum along the best path, with no terminal square root.

mod dtw;
pub mod oracle;
mod variants;

pub use dtw::{dtw, dtw_cost, Alignment, AlignmentPath};
pub use oracle::{enumerate_min_cost, enumerate_paths_cost};
pub use variants::{
    cid_dtw, complexity_estimate, complexity_factor, ddtw, derivative_transform, wddtw, wdtw,
    WdtwParams, COMPLEXITY_FLOOR,
};

pub(crate) use dtw::{check_dims, sq_dist};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Euclidean (lock-step) distance; both series must share length and width.
pub fn euclidean(q: &TimeSeries, c: &TimeSeries) -> Result<f64> {
    check_dims(q, c)?;
    if q.len() != c.len() {
        return Err(Error::LengthMismatch {
            left: q.len(),
            right: c.len(),
        });
    }
    Ok(sq_dist(q.as_slice(), c.as_slice()).sqrt())
}
