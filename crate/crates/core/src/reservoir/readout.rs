use nalgebra::{DMatrix, DVector};

use super::{series_to_states, CrjNetwork, StateSequence};
use crate::error::{Error, Result};
use crate::series::{LabeledDataset, TimeSeries};

/// Ridge penalties searched by cross validation.
pub const DEFAULT_LAMBDA_GRID: [f64; 7] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0];
pub const DEFAULT_FOLDS: usize = 5;

/// Linear readout `f = W s + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    /// `O x N` output weights.
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub lambda: f64,
}

impl ReadoutModel {
    pub fn predict(&self, state: &[f64]) -> Vec<f64> {
        let s = DVector::from_column_slice(state);
        (&self.weights * s + &self.bias).iter().copied().collect()
    }

    fn predict_rows(&self, features: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = features * self.weights.transpose();
        for mut row in out.row_iter_mut() {
            row += self.bias.transpose();
        }
        out
    }
}

/// Closed-form ridge regression on row-per-sample `features` (`T x N`) and
/// `targets` (`T x O`). With `fit_bias` a constant column is appended and
/// left unpenalized. Returns `O x N` weights and the bias.
pub fn ridge_solve(
    features: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    lambda: f64,
    fit_bias: bool,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if features.nrows() != targets.nrows() || features.nrows() == 0 {
        return Err(Error::invalid("features and targets need the same nonzero row count"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("ridge parameter {lambda} must be positive")));
    }
    let n = features.ncols();
    let design = if fit_bias {
        features.clone().insert_column(n, 1.0)
    } else {
        features.clone()
    };
    let width = design.ncols();
    let mut gram = design.transpose() * &design;
    for k in 0..n {
        gram[(k, k)] += lambda;
    }
    let rhs = design.transpose() * targets;
    let sol = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("singular ridge system".into()))?,
    };
    let weights = sol.rows(0, n).transpose();
    let bias = if fit_bias {
        sol.row(width - 1).transpose()
    } else {
        DVector::zeros(targets.ncols())
    };
    Ok((weights, bias))
}

fn sse(model: &ReadoutModel, features: &DMatrix<f64>, targets: &DMatrix<f64>) -> f64 {
    (model.predict_rows(features) - targets).norm_squared()
}

fn to_matrix(ts: &TimeSeries) -> DMatrix<f64> {
    DMatrix::from_row_slice(ts.len(), ts.dims(), ts.as_slice())
}

fn pick_rows(m: &DMatrix<f64>, idx: impl Iterator<Item = usize>) -> DMatrix<f64> {
    let idx: Vec<usize> = idx.collect();
    m.select_rows(idx.iter())
}

/// Fits a readout, choosing the ridge penalty by `folds`-fold cross
/// validation on mean squared error over contiguous folds. Row `t` of
/// `targets` is the desired output for state `t`.
pub fn train_readout_ridge(
    states: &StateSequence,
    targets: &TimeSeries,
    lambda_grid: &[f64],
    folds: usize,
) -> Result<ReadoutModel> {
    let rows = states.len();
    if targets.len() != rows {
        return Err(Error::LengthMismatch {
            left: rows,
            right: targets.len(),
        });
    }
    if folds < 2 || rows < folds {
        return Err(Error::invalid(format!(
            "{rows} rows cannot be split into {folds} folds"
        )));
    }
    if lambda_grid.is_empty() {
        return Err(Error::invalid("empty ridge grid"));
    }
    let x = to_matrix(states.as_series());
    let y = to_matrix(targets);

    let mut best: Option<(f64, f64)> = None;
    for &lambda in lambda_grid {
        let mut err = 0.0;
        for f in 0..folds {
            let (lo, hi) = (f * rows / folds, (f + 1) * rows / folds);
            let train_idx = (0..lo).chain(hi..rows);
            let (xt, yt) = (pick_rows(&x, train_idx.clone()), pick_rows(&y, train_idx));
            let (weights, bias) = ridge_solve(&xt, &yt, lambda, true)?;
            let model = ReadoutModel { weights, bias, lambda };
            err += sse(&model, &pick_rows(&x, lo..hi), &pick_rows(&y, lo..hi));
        }
        let mse = err / (rows * y.ncols()) as f64;
        if best.is_none_or(|(_, b)| mse < b) {
            best = Some((lambda, mse));
        }
    }
    let lambda = best.expect("non-empty grid").0;
    let (weights, bias) = ridge_solve(&x, &y, lambda, true)?;
    Ok(ReadoutModel { weights, bias, lambda })
}

/// One-step-ahead prediction error of a readout trained on the pooled
/// states of a dataset, as RMSE over that same data.
///
/// The state at step `t` has seen `x[t..t+n]` for input window `n`, so its
/// target is the next unseen point `x[t+n]`.
pub fn predictability(net: &CrjNetwork, train: &LabeledDataset) -> Result<f64> {
    let window = net.params().input_window.max(1);
    let mut feats = Vec::new();
    let mut targs = Vec::new();
    let mut dims = None;
    for (i, s) in train.series().iter().enumerate() {
        if s.len() < window + 1 {
            return Err(Error::TooShort {
                op: "predictability",
                needed: window + 1,
                got: s.len(),
            }
            .at_item(i));
        }
        let states = series_to_states(net, s).map_err(|e| e.at_item(i))?;
        for t in 0..s.len() - window {
            feats.extend_from_slice(states.state(t));
            targs.extend_from_slice(s.row(t + window));
        }
        dims = Some(s.dims());
    }
    let dims = dims.expect("datasets are non-empty");
    let states = StateSequence::new(TimeSeries::new(feats, net.size())?);
    let targets = TimeSeries::new(targs, dims)?;
    let model = train_readout_ridge(&states, &targets, &DEFAULT_LAMBDA_GRID, DEFAULT_FOLDS)?;
    let x = to_matrix(states.as_series());
    let y = to_matrix(&targets);
    Ok((sse(&model, &x, &y) / (y.nrows() * y.ncols()) as f64).sqrt())
}
