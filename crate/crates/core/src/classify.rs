//! One-nearest-neighbour classification under any [`Metric`].
//!
//! Ties between equally near training items go to the lowest index.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{prepared_cross, prepared_self, Metric};
use crate::series::{DistanceMatrix, Label, LabeledDataset, TimeSeries};

/// Index of the smallest entry, skipping `exclude`; first wins on ties.
pub fn nearest_index(row: &[f64], exclude: Option<usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &d) in row.iter().enumerate() {
        if Some(j) == exclude {
            continue;
        }
        if best.is_none_or(|b| d < row[b]) {
            best = Some(j);
        }
    }
    best
}

pub fn one_nn_predict(train: &LabeledDataset, query: &TimeSeries, metric: &Metric) -> Result<Label> {
    let q = metric.prepare(query)?;
    let row = train
        .series()
        .iter()
        .enumerate()
        .map(|(j, s)| {
            metric
                .prepare(s)
                .and_then(|p| metric.compare(&q, &p))
                .map_err(|e| e.at_item(j))
        })
        .collect::<Result<Vec<_>>>()?;
    let j = nearest_index(&row, None).expect("training set is non-empty");
    Ok(train.labels()[j])
}

/// Leave-one-out accuracy given a square table over the training items.
pub fn loocv_from_matrix(d: &DistanceMatrix, labels: &[Label]) -> Result<f64> {
    let n = labels.len();
    if n < 2 || !d.is_square() || d.rows() != n {
        return Err(Error::invalid("LOOCV needs a square table over at least two items"));
    }
    let hits = (0..n)
        .filter(|&i| {
            let j = nearest_index(d.row(i), Some(i)).expect("n >= 2");
            labels[j] == labels[i]
        })
        .count();
    Ok(hits as f64 / n as f64)
}

/// Fraction of training items whose nearest other item shares their label.
pub fn loocv_accuracy(train: &LabeledDataset, metric: &Metric) -> Result<f64> {
    if train.len() < 2 {
        return Err(Error::invalid("LOOCV needs at least two items"));
    }
    let prepared = metric.prepare_all(train)?;
    loocv_from_matrix(&prepared_self(&prepared, metric)?, train.labels())
}

/// Test-set 1NN outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub error_rate: f64,
    /// `(true, predicted)` per test item, in test order.
    pub predictions: Vec<(Label, Label)>,
    pub runtime_ms: f64,
}

impl EvalResult {
    pub fn accuracy(&self) -> f64 {
        1.0 - self.error_rate
    }

    pub fn misclassified(&self) -> usize {
        self.predictions.iter().filter(|(t, p)| t != p).count()
    }
}

/// Predictions from a `test x train` table.
pub fn predict_from_matrix(d: &DistanceMatrix, train_labels: &[Label]) -> Result<Vec<Label>> {
    if d.cols() != train_labels.len() || d.cols() == 0 {
        return Err(Error::invalid("table width must match the training set"));
    }
    Ok((0..d.rows())
        .map(|i| train_labels[nearest_index(d.row(i), None).expect("non-empty row")])
        .collect())
}

/// Classifies every test item against `train`.
pub fn evaluate(train: &LabeledDataset, test: &LabeledDataset, metric: &Metric) -> Result<EvalResult> {
    let start = Instant::now();
    let pa = metric.prepare_all(test)?;
    let pb = metric.prepare_all(train)?;
    let d = prepared_cross(&pa, &pb, metric).map_err(|e| match e {
        Error::Pair { row, source, .. } => source.at_item(row),
        other => other,
    })?;
    let predicted = predict_from_matrix(&d, train.labels())?;
    let predictions: Vec<(Label, Label)> = test.labels().iter().copied().zip(predicted).collect();
    let wrong = predictions.iter().filter(|(t, p)| t != p).count();
    Ok(EvalResult {
        error_rate: wrong as f64 / predictions.len() as f64,
        predictions,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[&[f64]], labels: &[Label]) -> LabeledDataset {
        let series = rows.iter().map(|r| TimeSeries::univariate(r.to_vec()).unwrap()).collect();
        LabeledDataset::new("t", series, labels.to_vec()).unwrap()
    }

    #[test]
    fn query_equal_to_training_item() {
        let train = ds(&[&[0.0, 1.0, 2.0], &[5.0, 5.0, 5.0], &[1.0, 0.0, 1.0]], &[7, 8, 9]);
        for (i, s) in train.series().iter().enumerate() {
            assert_eq!(one_nn_predict(&train, s, &Metric::dtw()).unwrap(), train.labels()[i]);
        }
        let single = ds(&[&[3.0, 3.0]], &[42]);
        let q = TimeSeries::univariate(vec![-10.0, 8.0, 1.0]).unwrap();
        assert_eq!(one_nn_predict(&single, &q, &Metric::dtw()).unwrap(), 42);
    }

    #[test]
    fn nearer_label_by_hand_dtw() {
        // DTW([0,0,0], [1,0,0]) = 1 and DTW([0,0,0], [2,0,0]) = 4.
        let train = ds(&[&[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0]], &[1, 2]);
        let q = TimeSeries::univariate(vec![0.0, 0.0, 0.0]).unwrap();
        let m = Metric::dtw();
        assert_eq!(m.distance(&q, &train.series()[1]).unwrap(), 1.0);
        assert_eq!(m.distance(&q, &train.series()[0]).unwrap(), 4.0);
        assert_eq!(one_nn_predict(&train, &q, &m).unwrap(), 2);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(nearest_index(&[3.0, 1.0, 1.0], None), Some(1));
        assert_eq!(nearest_index(&[1.0, 1.0, 1.0], Some(0)), Some(1));
        let train = ds(&[&[1.0, 1.0], &[1.0, 1.0]], &[5, 6]);
        let q = TimeSeries::univariate(vec![0.0, 0.0]).unwrap();
        assert_eq!(one_nn_predict(&train, &q, &Metric::Euclidean).unwrap(), 5);
    }

    #[test]
    fn loocv_examples() {
        let pair = ds(&[&[0.0, 1.0], &[0.0, 1.1]], &[1, 2]);
        assert_eq!(loocv_accuracy(&pair, &Metric::Euclidean).unwrap(), 0.0);
        let copies = ds(&[&[0.5, 1.0], &[0.5, 1.0], &[0.5, 1.0]], &[4, 4, 4]);
        assert_eq!(loocv_accuracy(&copies, &Metric::dtw()).unwrap(), 1.0);
        assert!(loocv_accuracy(&ds(&[&[0.0]], &[1]), &Metric::Euclidean).is_err());
    }

    #[test]
    fn loocv_hand_table() {
        let d = DistanceMatrix::from_rows(&[
            vec![0.0, 1.0, 2.0, 4.0],
            vec![1.0, 0.0, 3.0, 0.5],
            vec![2.0, 3.0, 0.0, 1.0],
            vec![4.0, 0.5, 1.0, 0.0],
        ])
        .unwrap();
        // Neighbours: 0->1, 1->3, 2->3, 3->1.
        let labels = [1, 1, 2, 2];
        // Hits: 0 (1==1) yes, 1 (1 vs 2) no, 2 (2==2) yes, 3 (2 vs 1) no.
        assert_eq!(loocv_from_matrix(&d, &labels).unwrap(), 0.5);
    }

    #[test]
    fn evaluate_subset_and_adversarial() {
        let train = ds(&[&[0.0, 1.0, 2.0], &[3.0, 3.0, 1.0], &[-1.0, 0.0, 0.5]], &[1, 2, 3]);
        let test = train.subset(&[2, 0]).unwrap();
        let r = evaluate(&train, &test, &Metric::Euclidean).unwrap();
        assert_eq!(r.error_rate, 0.0);
        assert_eq!(r.predictions, vec![(3, 3), (1, 1)]);

        let flipped = LabeledDataset::new("f", train.series().to_vec(), vec![9, 9, 9]).unwrap();
        let r = evaluate(&train, &flipped, &Metric::dtw()).unwrap();
        assert_eq!(r.error_rate, 1.0);
        assert_eq!(r.misclassified(), 3);
    }

    #[test]
    fn evaluate_errors_name_the_item() {
        let train = ds(&[&[0.0, 1.0, 2.0]], &[1]);
        let test = ds(&[&[0.0, 1.0, 2.0], &[0.0, 1.0]], &[1, 1]);
        match evaluate(&train, &test, &Metric::Euclidean).unwrap_err() {
            Error::Item { index: 1, .. } => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn squaring_distances_changes_no_prediction() {
        let d = DistanceMatrix::from_rows(&[vec![0.3, 0.2, 0.9], vec![1.5, 1.5, 0.1], vec![0.0, 2.0, 0.0]]).unwrap();
        let sq = DistanceMatrix::from_rows(
            &d.to_rows().iter().map(|r| r.iter().map(|v| v * v).collect()).collect::<Vec<_>>(),
        )
        .unwrap();
        let labels = [1, 2, 3];
        assert_eq!(predict_from_matrix(&d, &labels).unwrap(), predict_from_matrix(&sq, &labels).unwrap());
    }
}
