//! Cycle reservoir with jumps (CRJ): construction, state conversion and the
//! ridge readout used for predictability analysis.
//!
//! The state update is `s(t) = tanh(R s(t-1) + V x(t))` where `R` is the
//! fixed recurrent matrix and `V` the input matrix. Neurons form a
//! unidirectional ring with weight `cycle_weight`; every `jump_length`-th
//! neuron starting at neuron 0 is linked to the next one (and the last back
//! to neuron 0) in both directions with weight `jump_weight`. The ring and
//! jump weights fix the shape of `R`; `scaling` then sets its spectral
//! radius.

mod readout;
mod spectral;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub use readout::{
    predictability, ridge_solve, train_readout_ridge, ReadoutModel, DEFAULT_FOLDS,
    DEFAULT_LAMBDA_GRID,
};
pub use spectral::{spectral_radius, spectral_rescale};

/// Network hyper-parameters. Serialized field names are part of the
/// on-disk format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrjParams {
    /// Number of reservoir neurons, `>= 2`.
    pub reservoir_size: usize,
    /// Distance between jump-connected neurons, `1 <= jump_length < reservoir_size`.
    pub jump_length: usize,
    /// Magnitude of every input weight.
    pub input_weight: f64,
    /// Ring weight before rescaling.
    pub cycle_weight: f64,
    /// Jump weight before rescaling; zero disables jumps.
    pub jump_weight: f64,
    /// Target spectral radius of the recurrent matrix.
    pub scaling: f64,
    /// Number of successive time points fed per step.
    pub input_window: usize,
    /// Channels of the raw input series.
    #[serde(default = "one")]
    pub input_dims: usize,
    /// Seed for the input sign pattern.
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl Default for CrjParams {
    fn default() -> Self {
        Self {
            reservoir_size: 5,
            jump_length: 2,
            input_weight: 0.2,
            cycle_weight: 0.5,
            jump_weight: 0.4,
            scaling: 0.85,
            input_window: 2,
            input_dims: 1,
            seed: 0,
        }
    }
}

impl CrjParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(m.to_string()));
        if self.reservoir_size < 2 {
            return bad("reservoir size must be at least 2");
        }
        if self.jump_length == 0 || self.jump_length >= self.reservoir_size {
            return bad("jump length must lie in 1..reservoir_size");
        }
        if self.input_window == 0 || self.input_dims == 0 {
            return bad("input window and input dims must be positive");
        }
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.input_weight) || !finite_pos(self.cycle_weight) || !finite_pos(self.scaling) {
            return bad("input weight, cycle weight and scaling must be positive and finite");
        }
        if !(self.jump_weight.is_finite() && self.jump_weight >= 0.0) {
            return bad("jump weight must be finite and nonnegative");
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Width of one embedded input row.
    pub fn input_width(&self) -> usize {
        self.input_window * self.input_dims
    }

    /// Short hex digest of the canonical JSON form, seed included.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("params serialize");
        Sha256::digest(json.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Recurrent and input matrices of one reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct CrjNetwork {
    recurrent: DMatrix<f64>,
    input: DMatrix<f64>,
    params: CrjParams,
}

/// Ordered (row, col) positions of the jump edges, excluding positions the
/// ring already occupies.
pub fn jump_edges(size: usize, jump: usize) -> Vec<(usize, usize)> {
    let nodes: Vec<usize> = (0..size).step_by(jump).collect();
    let on_ring = |r: usize, c: usize| r == (c + 1) % size;
    let mut edges = Vec::new();
    let mut links: Vec<(usize, usize)> = nodes.windows(2).map(|w| (w[0], w[1])).collect();
    if let (Some(&first), Some(&last)) = (nodes.first(), nodes.last()) {
        links.push((last, first));
    }
    for (a, b) in links {
        if a == b {
            continue;
        }
        for pos in [(a, b), (b, a)] {
            if !on_ring(pos.0, pos.1) && !edges.contains(&pos) {
                edges.push(pos);
            }
        }
    }
    edges
}

/// Builds the ring-plus-jumps network and rescales it to `p.scaling`.
pub fn build_crj(p: &CrjParams) -> Result<CrjNetwork> {
    p.validate()?;
    let n = p.reservoir_size;
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        r[((i + 1) % n, i)] = p.cycle_weight;
    }
    if p.jump_weight > 0.0 {
        for (a, b) in jump_edges(n, p.jump_length) {
            r[(a, b)] = p.jump_weight;
        }
    }
    let recurrent = spectral_rescale(&r, p.scaling)?;

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let width = p.input_width();
    // Filled row by row so the sign stream order is independent of storage layout.
    let mut input = DMatrix::zeros(n, width);
    for i in 0..n {
        for k in 0..width {
            input[(i, k)] = if rng.random_bool(0.5) { p.input_weight } else { -p.input_weight };
        }
    }
    Ok(CrjNetwork {
        recurrent,
        input,
        params: p.clone(),
    })
}

impl CrjNetwork {
    /// Wraps explicit matrices. Only shapes are checked, so degenerate
    /// networks (for example a single neuron) can be expressed.
    pub fn from_parts(params: CrjParams, recurrent: DMatrix<f64>, input: DMatrix<f64>) -> Result<Self> {
        let n = recurrent.nrows();
        if n == 0 || !recurrent.is_square() || input.nrows() != n || input.ncols() == 0 {
            return Err(Error::invalid("recurrent must be NxN and input Nxm"));
        }
        if recurrent.iter().chain(input.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("network weights must be finite"));
        }
        Ok(Self {
            recurrent,
            input,
            params,
        })
    }

    pub fn recurrent(&self) -> &DMatrix<f64> {
        &self.recurrent
    }

    pub fn input(&self) -> &DMatrix<f64> {
        &self.input
    }

    pub fn params(&self) -> &CrjParams {
        &self.params
    }

    pub fn size(&self) -> usize {
        self.recurrent.nrows()
    }

    pub fn input_width(&self) -> usize {
        self.input.ncols()
    }

    pub fn digest(&self) -> String {
        self.params.digest()
    }

    /// Largest singular value of the input matrix.
    pub fn input_operator_norm(&self) -> f64 {
        self.input
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// `tanh(R s + V x)` for one step.
    fn step(&self, state: &[f64], x: &[f64], out: &mut [f64]) {
        let n = self.size();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut pre = 0.0;
            for (j, s) in state.iter().enumerate() {
                pre += self.recurrent[(i, j)] * s;
            }
            for (k, v) in x.iter().enumerate() {
                pre += self.input[(i, k)] * v;
            }
            *o = pre.tanh();
        }
    }
}

/// Reservoir activations, one row of `N` values per time point.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    states: TimeSeries,
}

impl StateSequence {
    pub fn new(states: TimeSeries) -> Self {
        Self { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn size(&self) -> usize {
        self.states.dims()
    }

    pub fn state(&self, t: usize) -> &[f64] {
        self.states.row(t)
    }

    pub fn as_series(&self) -> &TimeSeries {
        &self.states
    }

    pub fn into_series(self) -> TimeSeries {
        self.states
    }
}

/// Feeds `n` successive points per step: row `t` concatenates
/// `x[t], ..., x[t+n-1]`, repeating the last point past the end.
pub fn window_embed(x: &TimeSeries, n: usize) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::invalid("input window must be positive"));
    }
    if n == 1 {
        return Ok(x.clone());
    }
    let len = x.len();
    let mut out = Vec::with_capacity(len * n * x.dims());
    for t in 0..len {
        for k in 0..n {
            out.extend_from_slice(x.row((t + k).min(len - 1)));
        }
    }
    Ok(TimeSeries::from_parts_unchecked(out, n * x.dims()))
}

/// Drives the network with an already embedded series starting from `s0`.
pub fn run_states(net: &CrjNetwork, x: &TimeSeries, s0: &[f64]) -> Result<StateSequence> {
    if x.dims() != net.input_width() {
        return Err(Error::DimensionMismatch {
            left: x.dims(),
            right: net.input_width(),
        });
    }
    let n = net.size();
    if s0.len() != n {
        return Err(Error::DimensionMismatch {
            left: s0.len(),
            right: n,
        });
    }
    let mut out = vec![0.0; x.len() * n];
    let mut prev = s0.to_vec();
    for (t, row) in x.rows().enumerate() {
        let cur = &mut out[t * n..(t + 1) * n];
        net.step(&prev, row, cur);
        prev.copy_from_slice(cur);
    }
    Ok(StateSequence::new(TimeSeries::new(out, n)?))
}

/// Embeds a raw series with the network's window and runs it from the zero
/// state.
pub fn series_to_states(net: &CrjNetwork, x: &TimeSeries) -> Result<StateSequence> {
    let window = net.params().input_window.max(1);
    if x.dims() * window != net.input_width() {
        return Err(Error::DimensionMismatch {
            left: x.dims() * window,
            right: net.input_width(),
        });
    }
    let embedded = window_embed(x, window)?;
    run_states(net, &embedded, &vec![0.0; net.size()])
}

/// `|| tanh(R s + V (x + eps)) - tanh(R s + V x) ||_2` for a single step.
pub fn one_step_noise_gap(net: &CrjNetwork, x: &[f64], eps: &[f64], s: &[f64]) -> Result<f64> {
    if x.len() != net.input_width() || eps.len() != x.len() {
        return Err(Error::DimensionMismatch {
            left: x.len().max(eps.len()),
            right: net.input_width(),
        });
    }
    if s.len() != net.size() {
        return Err(Error::DimensionMismatch {
            left: s.len(),
            right: net.size(),
        });
    }
    let noisy: Vec<f64> = x.iter().zip(eps).map(|(a, e)| a + e).collect();
    let mut clean_out = vec![0.0; net.size()];
    let mut noisy_out = vec![0.0; net.size()];
    net.step(s, x, &mut clean_out);
    net.step(s, &noisy, &mut noisy_out);
    Ok(crate::distance::sq_dist(&clean_out, &noisy_out).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nonzeros(m: &DMatrix<f64>) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    v.push((i, j));
                }
            }
        }
        v
    }

    fn params(n: usize, jump: usize) -> CrjParams {
        CrjParams {
            reservoir_size: n,
            jump_length: jump,
            ..CrjParams::default()
        }
    }

    #[test]
    fn four_neurons_jump_two() {
        let net = build_crj(&params(4, 2)).unwrap();
        let nz = nonzeros(net.recurrent());
        assert_eq!(nz.len(), 6);
        for pos in [(1, 0), (2, 1), (3, 2), (0, 3), (0, 2), (2, 0)] {
            assert!(nz.contains(&pos), "missing {pos:?}");
        }
    }

    #[test]
    fn two_neurons_collapse_onto_ring() {
        let net = build_crj(&params(2, 1)).unwrap();
        assert_eq!(nonzeros(net.recurrent()), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn jump_pattern_for_default_size() {
        // Nodes 0, 2, 4 linked 0-2, 2-4 and back 4-0; 4-0 is partly the ring.
        assert_eq!(jump_edges(5, 2), vec![(0, 2), (2, 0), (2, 4), (4, 2), (4, 0)]);
    }

    #[test]
    fn invalid_params() {
        assert!(build_crj(&params(4, 4)).is_err());
        assert!(build_crj(&params(1, 1)).is_err());
        assert!(build_crj(&CrjParams { scaling: 0.0, ..CrjParams::default() }).is_err());
        assert!(build_crj(&CrjParams { jump_weight: -0.1, ..CrjParams::default() }).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let p = CrjParams { seed: 42, ..CrjParams::default() };
        assert_eq!(build_crj(&p).unwrap(), build_crj(&p).unwrap());
        let other = build_crj(&p.with_seed(43)).unwrap();
        assert_ne!(build_crj(&p).unwrap().input(), other.input());
    }

    #[test]
    fn input_entries_have_fixed_magnitude() {
        let p = CrjParams { input_window: 3, input_dims: 2, input_weight: 0.7, ..CrjParams::default() };
        let net = build_crj(&p).unwrap();
        assert_eq!(net.input().shape(), (5, 6));
        assert!(net.input().iter().all(|v| v.abs() == 0.7));
    }

    #[test]
    fn params_json_round_trip_and_digest() {
        let p = CrjParams { seed: 9, ..CrjParams::default() };
        let json = serde_json::to_string(&p).unwrap();
        for key in ["reservoir_size", "jump_length", "input_weight", "cycle_weight", "jump_weight", "scaling", "input_window", "seed"] {
            assert!(json.contains(key), "{key}");
        }
        let back: CrjParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.digest(), p.digest());
        assert_ne!(p.digest(), p.with_seed(10).digest());
        assert!(serde_json::from_str::<CrjParams>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn window_examples() {
        let x = TimeSeries::univariate(vec![1.0, 2.0, 3.0]).unwrap();
        let e = window_embed(&x, 2).unwrap();
        assert_eq!(e.dims(), 2);
        assert_eq!(e.as_slice(), &[1.0, 2.0, 2.0, 3.0, 3.0, 3.0]);
        assert_eq!(window_embed(&x, 1).unwrap(), x);
        let m = TimeSeries::from_rows(&[[1.0, 10.0], [2.0, 20.0]]).unwrap();
        let e = window_embed(&m, 2).unwrap();
        assert_eq!(e.row(0), &[1.0, 10.0, 2.0, 20.0]);
        assert_eq!(e.row(1), &[2.0, 20.0, 2.0, 20.0]);
        assert!(window_embed(&x, 0).is_err());
    }

    #[test]
    fn zero_input_keeps_zero_state() {
        let net = build_crj(&CrjParams::default()).unwrap();
        let x = TimeSeries::new(vec![0.0; 20], 2).unwrap();
        let s = run_states(&net, &x, &[0.0; 5]).unwrap();
        assert!(s.as_series().as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_neuron_step() {
        let net = CrjNetwork::from_parts(
            CrjParams { input_window: 1, ..CrjParams::default() },
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        let x = TimeSeries::univariate(vec![1.0]).unwrap();
        let s = run_states(&net, &x, &[0.0]).unwrap();
        assert!((s.state(0)[0] - 0.761_594_155_955_764_9).abs() < 1e-12);
    }

    #[test]
    fn run_states_shape_errors() {
        let net = build_crj(&CrjParams::default()).unwrap();
        let x = TimeSeries::univariate(vec![0.0; 4]).unwrap();
        assert!(run_states(&net, &x, &[0.0; 5]).is_err());
        let x2 = window_embed(&x, 2).unwrap();
        assert!(run_states(&net, &x2, &[0.0; 4]).is_err());
    }

    #[test]
    fn noise_gap_zero_and_linear_regime() {
        let net = build_crj(&CrjParams::default()).unwrap();
        let x = [0.0, 0.0];
        let s = [0.0; 5];
        assert_eq!(one_step_noise_gap(&net, &[0.3, -0.2], &[0.0, 0.0], &[0.1; 5]).unwrap(), 0.0);
        let eps = [1e-8, -2e-8];
        let gap = one_step_noise_gap(&net, &x, &eps, &s).unwrap();
        let v_eps: f64 = (0..5)
            .map(|i| (net.input()[(i, 0)] * eps[0] + net.input()[(i, 1)] * eps[1]).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((gap - v_eps).abs() <= 0.01 * v_eps, "{gap} vs {v_eps}");
    }

    proptest! {
        #[test]
        fn states_are_causal_and_bounded(
            vals in prop::collection::vec(-3.0f64..3.0, 2..60),
            cut in 1usize..60,
            seed in 0u64..1000,
        ) {
            let net = build_crj(&CrjParams { seed, ..CrjParams::default() }).unwrap();
            let x = window_embed(&TimeSeries::univariate(vals).unwrap(), 2).unwrap();
            let full = run_states(&net, &x, &[0.0; 5]).unwrap();
            prop_assert!(full.as_series().as_slice().iter().all(|v| v.abs() < 1.0));
            let cut = cut.min(x.len());
            let part = run_states(&net, &x.prefix(cut).unwrap(), &[0.0; 5]).unwrap();
            prop_assert_eq!(part.as_series().as_slice(), &full.as_series().as_slice()[..cut * 5]);
        }

        #[test]
        fn rescaled_radius_matches(
            n in 2usize..40,
            jump_frac in 0.0f64..1.0,
            rc in 0.05f64..2.0,
            rj in 0.0f64..2.0,
            scaling in 0.05f64..2.0,
        ) {
            let jump = 1 + ((n - 1) as f64 * jump_frac) as usize % (n - 1);
            let p = CrjParams { reservoir_size: n, jump_length: jump, cycle_weight: rc, jump_weight: rj, scaling, ..CrjParams::default() };
            let net = build_crj(&p).unwrap();
            let r = spectral_radius(net.recurrent()).unwrap();
            prop_assert!((r - scaling).abs() < 1e-10, "{} vs {}", r, scaling);
        }
    }
}
