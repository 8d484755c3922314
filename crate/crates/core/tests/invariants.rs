use proptest::prelude::*;
use statewarp::distance::{cid_dtw, wdtw};
use statewarp::stats::{average_ranks, friedman_statistic, ErrorTable};
use statewarp::ucr::{format_ucr, parse_ucr};
use statewarp::{
    dsw_distance, dtw, dtw_cost, euclidean, evaluate, loocv_accuracy, pairwise_distances, CrjParams, DswModel,
    LabeledDataset, Metric, TimeSeries, WdtwParams,
};

fn series(max_len: usize) -> impl Strategy<Value = TimeSeries> {
    prop::collection::vec(-3.0f64..3.0, 1..max_len).prop_map(|v| TimeSeries::univariate(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dtw_is_symmetric_and_bounded_by_lockstep(a in series(30), b in series(30)) {
        let ab = dtw_cost(&a, &b, None).unwrap();
        prop_assert_eq!(ab.to_bits(), dtw_cost(&b, &a, None).unwrap().to_bits());
        prop_assert!(ab >= 0.0);
        if a.len() == b.len() {
            let ed = euclidean(&a, &b).unwrap();
            prop_assert!(ab <= ed * ed * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn narrowing_the_band_never_lowers_the_cost(a in series(25), b in series(25), extra in 0usize..5) {
        let need = a.len().abs_diff(b.len());
        let tight = dtw_cost(&a, &b, Some(need)).unwrap();
        let loose = dtw_cost(&a, &b, Some(need + extra)).unwrap();
        prop_assert!(loose <= tight);
        prop_assert!(dtw_cost(&a, &b, None).unwrap() <= loose);
        if need > 0 {
            prop_assert!(dtw_cost(&a, &b, Some(need - 1)).is_err());
        }
    }

    #[test]
    fn path_cost_equals_reported_cost(a in series(20), b in series(20)) {
        let al = dtw(&a, &b, None).unwrap();
        prop_assert!(al.path.is_valid_for(a.len(), b.len()));
        let along: f64 = al.path.pairs().iter().map(|&(i, j)| (a.row(i)[0] - b.row(j)[0]).powi(2)).sum();
        prop_assert_eq!(along.to_bits(), al.cost.to_bits());
    }

    #[test]
    fn flat_weights_halve_dtw(a in series(20), b in series(20)) {
        let w = wdtw(&a, &b, &WdtwParams::new(0.0, 1.0).unwrap()).unwrap();
        prop_assert!((w - dtw_cost(&a, &b, None).unwrap() / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn complexity_correction_never_shrinks_dtw(a in series(20), b in series(20)) {
        prop_assume!(a.len() >= 2 && b.len() >= 2);
        prop_assert!(cid_dtw(&a, &b).unwrap() >= dtw_cost(&a, &b, None).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn dsw_is_a_dtw_on_states(a in series(25), b in series(25), seed in 0u64..1000) {
        let m = DswModel::from_params(&CrjParams { seed, ..CrjParams::default() }).unwrap();
        let d = dsw_distance(&a, &b, &m).unwrap();
        prop_assert_eq!(d.to_bits(), dsw_distance(&b, &a, &m).unwrap().to_bits());
        prop_assert_eq!(dsw_distance(&a, &a, &m).unwrap(), 0.0);
        let sa = m.states(&a).unwrap();
        prop_assert!(sa.as_series().as_slice().iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn mean_ranks_sum_to_the_triangle_number(rows in prop::collection::vec(prop::collection::vec(0u8..4, 4), 2..10)) {
        let t = ErrorTable::from_rows(rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect()).unwrap();
        let ranks = average_ranks(&t).unwrap();
        prop_assert!((ranks.iter().sum::<f64>() - 10.0).abs() < 1e-9);
        let (chi2, df) = friedman_statistic(&t).unwrap();
        prop_assert!(chi2 >= 0.0);
        prop_assert_eq!(df, 3);
    }
}

fn dataset(rows: &[(i64, &[f64])]) -> LabeledDataset {
    let series = rows.iter().map(|(_, v)| TimeSeries::univariate(v.to_vec()).unwrap()).collect();
    LabeledDataset::new("t", series, rows.iter().map(|(l, _)| *l).collect()).unwrap()
}

#[test]
fn ucr_text_round_trips_through_classification() {
    let train = dataset(&[(1, &[0.0, 0.1, 0.0, 0.1]), (1, &[0.1, 0.0, 0.1, 0.0]), (2, &[3.0, 3.1, 2.9, 3.0]), (2, &[2.9, 3.0, 3.1, 3.0])]);
    let text = format_ucr(&train, ',').unwrap();
    let back = parse_ucr(&text, ',', "t").unwrap();
    assert_eq!(back.labels(), train.labels());
    let test = dataset(&[(1, &[0.05, 0.05, 0.0]), (2, &[3.0, 3.0, 3.0, 3.0, 3.0])]);
    for metric in [Metric::dtw(), Metric::Cid, Metric::Dsw(DswModel::from_params(&CrjParams::default()).unwrap())] {
        assert_eq!(evaluate(&back, &test, &metric).unwrap().error_rate, 0.0, "{}", metric.name());
        assert_eq!(loocv_accuracy(&back, &metric).unwrap(), 1.0);
    }
    let d = pairwise_distances(&back, &back, &Metric::dtw()).unwrap();
    assert!(d.is_symmetric());
    assert!((0..4).all(|i| d.get(i, i) == 0.0));
}
