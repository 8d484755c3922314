//! JSON-lines result records shared by every experiment.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::EvalResult;
use crate::error::{Error, Result};
use crate::series::Label;

/// One dataset x metric x parameter outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub dataset: String,
    pub metric: String,
    pub params_digest: String,
    pub seed: u64,
    pub error_rate: f64,
    /// Wall-clock time; not reproducible and not compared across runs.
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<Vec<(Label, Label)>>,
    /// Experiment that produced the record (`classify`, `robustness`, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    /// Name of the varied parameter and its value, for grid experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<usize>,
    /// Leave-one-out 1NN accuracy on the training set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_accuracy: Option<f64>,
    /// Readout RMSE of one-step-ahead prediction on the training set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictability: Option<f64>,
    /// Full parameter set of the metric, when it has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    /// Error message of a failed run; `error_rate` is NaN-free 1.0 then.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed: Option<String>,
}

impl ResultRecord {
    pub fn new(dataset: impl Into<String>, metric: impl Into<String>, params_digest: impl Into<String>, seed: u64) -> Self {
        Self {
            dataset: dataset.into(),
            metric: metric.into(),
            params_digest: params_digest.into(),
            seed,
            error_rate: 1.0,
            runtime_ms: 0.0,
            predictions: None,
            experiment: None,
            parameter: None,
            value: None,
            rep: None,
            train_accuracy: None,
            predictability: None,
            params: None,
            failed: None,
        }
    }

    pub fn with_eval(mut self, r: &EvalResult, keep_predictions: bool) -> Self {
        self.error_rate = r.error_rate;
        self.runtime_ms = r.runtime_ms;
        if keep_predictions {
            self.predictions = Some(r.predictions.clone());
        }
        self
    }

    pub fn with_failure(mut self, message: impl Into<String>) -> Self {
        self.error_rate = 1.0;
        self.failed = Some(message.into());
        self
    }

    pub fn is_failed(&self) -> bool {
        self.failed.is_some()
    }

    /// Ordering key used when writing files: dataset, metric, parameter
    /// value, repetition.
    fn sort_key(&self) -> (&str, &str, &str, f64, usize) {
        (
            &self.dataset,
            &self.metric,
            self.parameter.as_deref().unwrap_or(""),
            self.value.unwrap_or(f64::NEG_INFINITY),
            self.rep.unwrap_or(0),
        )
    }
}

/// Sorts records into their canonical file order.
pub fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| {
        let (ka, kb) = (a.sort_key(), b.sort_key());
        ka.0.cmp(kb.0)
            .then(ka.1.cmp(kb.1))
            .then(ka.2.cmp(kb.2))
            .then(ka.3.total_cmp(&kb.3))
            .then(ka.4.cmp(&kb.4))
    });
}

pub fn write_jsonl(mut out: impl Write, records: &[ResultRecord]) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r)?;
        writeln!(out, "{line}").map_err(|source| Error::Io {
            path: "<output>".into(),
            source,
        })?;
    }
    Ok(())
}

pub fn save_jsonl(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records)?;
    fs::write(path, buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: "<input>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(r);
    }
    Ok(out)
}

pub fn load_jsonl(path: &Path) -> Result<Vec<ResultRecord>> {
    let f = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_jsonl(BufReader::new(f))
}
