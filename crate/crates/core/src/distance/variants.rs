//! DTW baselines: derivative, weighted, weighted-derivative and
//! complexity-invariant forms.

use serde::{Deserialize, Serialize};

use crate::distance::dtw::{check_dims, dtw_cost, sq_dist, warp_cost};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Derivative estimate per channel: interior points use
/// `((x[i] - x[i-1]) + (x[i+1] - x[i-1]) / 2) / 2`, endpoints copy their
/// neighbour.
pub fn derivative_transform(q: &TimeSeries) -> Result<TimeSeries> {
    let len = q.len();
    if len < 3 {
        return Err(Error::TooShort {
            op: "derivative transform",
            needed: 3,
            got: len,
        });
    }
    let d = q.dims();
    let x = q.as_slice();
    let mut out = vec![0.0; x.len()];
    for t in 1..len - 1 {
        for k in 0..d {
            let (prev, cur, next) = (x[(t - 1) * d + k], x[t * d + k], x[(t + 1) * d + k]);
            out[t * d + k] = ((cur - prev) + (next - prev) / 2.0) / 2.0;
        }
    }
    for k in 0..d {
        out[k] = out[d + k];
        out[(len - 1) * d + k] = out[(len - 2) * d + k];
    }
    TimeSeries::new(out, d)
}

pub fn ddtw(q: &TimeSeries, c: &TimeSeries) -> Result<f64> {
    dtw_cost(&derivative_transform(q)?, &derivative_transform(c)?, None)
}

/// Logistic warping-penalty parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WdtwParams {
    /// Steepness of the logistic weight, `>= 0`.
    pub steepness: f64,
    /// Upper asymptote of the weight, `> 0`.
    #[serde(default = "default_max_weight")]
    pub max_weight: f64,
}

fn default_max_weight() -> f64 {
    1.0
}

impl Default for WdtwParams {
    fn default() -> Self {
        Self {
            steepness: 0.05,
            max_weight: 1.0,
        }
    }
}

impl WdtwParams {
    pub fn new(steepness: f64, max_weight: f64) -> Result<Self> {
        let p = Self {
            steepness,
            max_weight,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.steepness.is_finite() && self.steepness >= 0.0) {
            return Err(Error::invalid("WDTW steepness must be finite and >= 0"));
        }
        if !(self.max_weight.is_finite() && self.max_weight > 0.0) {
            return Err(Error::invalid("WDTW max weight must be finite and > 0"));
        }
        Ok(())
    }

    /// `w[a] = max_weight / (1 + exp(-steepness * (a - len / 2)))` for
    /// phase difference `a` in `0..len`.
    pub fn weights(&self, len: usize) -> Vec<f64> {
        let mid = len as f64 / 2.0;
        (0..len)
            .map(|a| self.max_weight / (1.0 + (-self.steepness * (a as f64 - mid)).exp()))
            .collect()
    }
}

pub fn wdtw(q: &TimeSeries, c: &TimeSeries, p: &WdtwParams) -> Result<f64> {
    check_dims(q, c)?;
    p.validate()?;
    let w = p.weights(q.len().max(c.len()));
    Ok(warp_cost(q.len(), c.len(), None, |i, j| {
        w[i.abs_diff(j)] * sq_dist(q.row(i), c.row(j))
    }))
}

pub fn wddtw(q: &TimeSeries, c: &TimeSeries, p: &WdtwParams) -> Result<f64> {
    wdtw(&derivative_transform(q)?, &derivative_transform(c)?, p)
}

/// `sqrt(sum of squared successive differences)`, summed over channels.
pub fn complexity_estimate(q: &TimeSeries) -> Result<f64> {
    if q.len() < 2 {
        return Err(Error::TooShort {
            op: "complexity estimate",
            needed: 2,
            got: q.len(),
        });
    }
    let total: f64 = q
        .rows()
        .zip(q.rows().skip(1))
        .map(|(a, b)| sq_dist(b, a))
        .sum();
    Ok(total.sqrt())
}

/// Floor on the smaller complexity so constant series give a finite factor.
pub const COMPLEXITY_FLOOR: f64 = 1e-12;

pub fn complexity_factor(ce_q: f64, ce_c: f64) -> f64 {
    ce_q.max(ce_c) / ce_q.min(ce_c).max(COMPLEXITY_FLOOR)
}

pub fn cid_dtw(q: &TimeSeries, c: &TimeSeries) -> Result<f64> {
    let cf = complexity_factor(complexity_estimate(q)?, complexity_estimate(c)?);
    Ok(dtw_cost(q, c, None)? * cf)
}
