//! Dynamic state warping: DTW over reservoir state trajectories.
//!
//! Both series are converted to state sequences by the same network, starting
//! from the zero state, and the sequences are aligned with the DTW engine.
//! States are aligned as produced; no normalization is applied to them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::loocv_accuracy;
use crate::distance::{dtw, dtw_cost, Alignment};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::reservoir::{build_crj, series_to_states, CrjNetwork, CrjParams, StateSequence};
use crate::series::{znormalize, LabeledDataset, TimeSeries};

/// Number of random networks compared when selecting one by LOOCV.
pub const DEFAULT_CANDIDATES: usize = 20;

/// The network shared by every comparison, plus whether raw inputs are
/// z-normalized before conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DswModelSpec", into = "DswModelSpec")]
pub struct DswModel {
    network: CrjNetwork,
    normalize: bool,
}

/// Serialized form: the network is rebuilt from its parameters and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DswModelSpec {
    params: CrjParams,
    #[serde(default)]
    normalize: bool,
}

impl TryFrom<DswModelSpec> for DswModel {
    type Error = Error;

    fn try_from(spec: DswModelSpec) -> Result<Self> {
        Ok(DswModel::from_params(&spec.params)?.with_normalization(spec.normalize))
    }
}

impl From<DswModel> for DswModelSpec {
    fn from(m: DswModel) -> Self {
        DswModelSpec {
            params: m.network.params().clone(),
            normalize: m.normalize,
        }
    }
}

impl DswModel {
    pub fn new(network: CrjNetwork) -> Self {
        Self {
            network,
            normalize: false,
        }
    }

    pub fn from_params(p: &CrjParams) -> Result<Self> {
        Ok(Self::new(build_crj(p)?))
    }

    pub fn with_normalization(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn network(&self) -> &CrjNetwork {
        &self.network
    }

    pub fn params(&self) -> &CrjParams {
        self.network.params()
    }

    pub fn normalizes(&self) -> bool {
        self.normalize
    }

    pub fn digest(&self) -> String {
        self.network.digest()
    }

    /// State trajectory of one raw series.
    pub fn states(&self, x: &TimeSeries) -> Result<StateSequence> {
        if self.normalize {
            series_to_states(&self.network, &znormalize(x))
        } else {
            series_to_states(&self.network, x)
        }
    }
}

pub fn dsw_distance(q: &TimeSeries, c: &TimeSeries, m: &DswModel) -> Result<f64> {
    dtw_cost(m.states(q)?.as_series(), m.states(c)?.as_series(), None)
}

/// Optimal state alignment together with its cost.
pub fn dsw_align(q: &TimeSeries, c: &TimeSeries, m: &DswModel) -> Result<Alignment> {
    dtw(m.states(q)?.as_series(), m.states(c)?.as_series(), None)
}

/// Outcome of LOOCV network selection.
#[derive(Debug, Clone)]
pub struct NetworkSelection {
    pub model: DswModel,
    /// Index of the chosen candidate.
    pub chosen: usize,
    /// LOOCV 1NN accuracy of every candidate, by index.
    pub accuracies: Vec<f64>,
}

impl NetworkSelection {
    pub fn accuracy(&self) -> f64 {
        self.accuracies[self.chosen]
    }
}

/// Builds `candidates` networks with seeds `seed, seed+1, ...` (the template
/// seed is ignored) and keeps the one with the best LOOCV 1NN accuracy on
/// `train`; ties go to the lowest index. The input width is taken from the
/// training data.
pub fn select_network(
    train: &LabeledDataset,
    candidates: usize,
    template: &CrjParams,
    seed: u64,
) -> Result<NetworkSelection> {
    if candidates == 0 {
        return Err(Error::invalid("need at least one candidate network"));
    }
    if train.len() < 2 || train.classes().len() < 2 {
        return Err(Error::invalid("selection needs at least two series from two classes"));
    }
    let dims = train.series()[0].dims();
    let models = (0..candidates)
        .map(|k| {
            let p = CrjParams {
                input_dims: dims,
                seed: seed.wrapping_add(k as u64),
                ..template.clone()
            };
            DswModel::from_params(&p)
        })
        .collect::<Result<Vec<_>>>()?;

    let accuracies = models
        .par_iter()
        .map(|m| loocv_accuracy(train, &Metric::Dsw(m.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut chosen = 0;
    for (k, &a) in accuracies.iter().enumerate() {
        if a > accuracies[chosen] {
            chosen = k;
        }
    }
    Ok(NetworkSelection {
        model: models.into_iter().nth(chosen).expect("chosen in range"),
        chosen,
        accuracies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::window_embed;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::univariate(v.to_vec()).unwrap()
    }

    #[test]
    fn identical_series_are_at_zero() {
        let m = DswModel::from_params(&CrjParams::default()).unwrap();
        let q = ts(&[0.1, 0.5, -1.0, 2.0, 0.0]);
        assert_eq!(dsw_distance(&q, &q, &m).unwrap(), 0.0);
        let a = dsw_align(&q, &q, &m).unwrap();
        assert_eq!(a.path.pairs(), &[(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]);
    }

    #[test]
    fn equals_explicit_pipeline() {
        let m = DswModel::from_params(&CrjParams { seed: 3, ..CrjParams::default() }).unwrap();
        let q = ts(&[0.1, 0.5, -1.0, 2.0, 0.0, 0.3]);
        let c = ts(&[1.0, 0.2, -0.4, 0.9]);
        let zero = vec![0.0; 5];
        let sq = crate::reservoir::run_states(m.network(), &window_embed(&q, 2).unwrap(), &zero).unwrap();
        let sc = crate::reservoir::run_states(m.network(), &window_embed(&c, 2).unwrap(), &zero).unwrap();
        let expected = dtw_cost(sq.as_series(), sc.as_series(), None).unwrap();
        assert_eq!(dsw_distance(&q, &c, &m).unwrap().to_bits(), expected.to_bits());
        let a = dsw_align(&q, &c, &m).unwrap();
        assert_eq!(a.cost.to_bits(), expected.to_bits());
        assert!(a.path.is_valid_for(6, 4));
        assert!(a.path.len() >= 6);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = DswModel::from_params(&CrjParams::default()).unwrap();
        let wide = TimeSeries::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(dsw_distance(&wide, &wide, &m), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn model_json_rebuilds_network() {
        let m = DswModel::from_params(&CrjParams { seed: 77, ..CrjParams::default() })
            .unwrap()
            .with_normalization(true);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"seed\":77"));
        let back: DswModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    fn two_class() -> LabeledDataset {
        let mut series = Vec::new();
        let mut labels = Vec::new();
        for k in 0..4 {
            let off = k as f64 * 0.05;
            series.push(ts(&[0.0 + off, 0.1, 0.2, 0.1, 0.0]));
            labels.push(1);
            series.push(ts(&[2.0 + off, 2.5, 3.0, 2.5, 2.0]));
            labels.push(2);
        }
        LabeledDataset::new("toy", series, labels).unwrap()
    }

    #[test]
    fn single_candidate_is_returned() {
        let sel = select_network(&two_class(), 1, &CrjParams::default(), 5).unwrap();
        assert_eq!(sel.chosen, 0);
        assert_eq!(sel.model.params().seed, 5);
    }

    #[test]
    fn selection_maximizes_loocv_and_is_deterministic() {
        let ds = two_class();
        let sel = select_network(&ds, 4, &CrjParams::default(), 10).unwrap();
        for (k, &acc) in sel.accuracies.iter().enumerate() {
            let m = DswModel::from_params(&CrjParams { seed: 10 + k as u64, ..CrjParams::default() }).unwrap();
            assert_eq!(loocv_accuracy(&ds, &Metric::Dsw(m)).unwrap(), acc);
            assert!(sel.accuracy() >= acc);
        }
        assert_eq!(sel.accuracy(), 1.0);
        let again = select_network(&ds, 4, &CrjParams::default(), 10).unwrap();
        assert_eq!(again.model.digest(), sel.model.digest());
    }

    #[test]
    fn degenerate_training_sets() {
        let one = LabeledDataset::new("x", vec![ts(&[0.0, 1.0])], vec![1]).unwrap();
        assert!(select_network(&one, 3, &CrjParams::default(), 0).is_err());
        let same = LabeledDataset::new("x", vec![ts(&[0.0, 1.0]), ts(&[1.0, 0.0])], vec![1, 1]).unwrap();
        assert!(select_network(&same, 3, &CrjParams::default(), 0).is_err());
        assert!(select_network(&two_class(), 0, &CrjParams::default(), 0).is_err());
    }
}
