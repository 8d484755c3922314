//! Elastic time-series distances, including dynamic state warping: DTW
//! applied to the state trajectories of a fixed cycle reservoir with jumps.
//!
//! The crate also carries the pieces needed to benchmark those distances:
//! UCR-format I/O, 1NN classification, synthetic generators and ranking
//! statistics.

pub mod classify;
pub mod distance;
pub mod dsw;
mod error;
pub mod metric;
pub mod record;
pub mod reservoir;
mod series;
pub mod stats;
pub mod synth;
pub mod ucr;

pub use classify::{evaluate, loocv_accuracy, one_nn_predict, EvalResult};
pub use distance::{dtw, dtw_cost, euclidean, Alignment, AlignmentPath, WdtwParams};
pub use dsw::{dsw_align, dsw_distance, select_network, DswModel, NetworkSelection};
pub use error::{Error, Result};
pub use metric::{pairwise_distances, Metric, MetricKind};
pub use record::ResultRecord;
pub use reservoir::{build_crj, CrjNetwork, CrjParams, StateSequence};
pub use series::{znormalize, DistanceMatrix, Label, LabeledDataset, TimeSeries};
