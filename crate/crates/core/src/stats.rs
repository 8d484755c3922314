//! Benchmark statistics: ranks, Friedman and Nemenyi tests, sharpshooter
//! quadrants, Pearson correlation and average-linkage clustering.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::DistanceMatrix;

/// Error rates, one row per dataset and one column per method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ErrorTable {
    pub fn new(datasets: Vec<String>, methods: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != datasets.len() {
            return Err(Error::invalid("one row per dataset required"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != methods.len() {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries for {} methods",
                    r.len(),
                    methods.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(Self { datasets, methods, rows })
    }

    /// Unnamed table, for quick use.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        Self::new(
            (0..rows.len()).map(|i| format!("d{i}")).collect(),
            (0..k).map(|j| format!("m{j}")).collect(),
            rows,
        )
    }

    pub fn n_datasets(&self) -> usize {
        self.rows.len()
    }

    pub fn n_methods(&self) -> usize {
        self.methods.len()
    }
}

/// Ranks within one row, 1 for the smallest value, ties averaged.
pub fn rank_row(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Mean rank of each method over all datasets.
pub fn average_ranks(t: &ErrorTable) -> Result<Vec<f64>> {
    if t.n_datasets() == 0 || t.n_methods() < 2 {
        return Err(Error::invalid("ranking needs at least one dataset and two methods"));
    }
    let mut sums = vec![0.0; t.n_methods()];
    for row in &t.rows {
        for (s, r) in sums.iter_mut().zip(rank_row(row)) {
            *s += r;
        }
    }
    let n = t.n_datasets() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Friedman chi-square statistic and its degrees of freedom.
pub fn friedman_statistic(t: &ErrorTable) -> Result<(f64, usize)> {
    if t.n_datasets() < 2 {
        return Err(Error::invalid("Friedman test needs at least two datasets"));
    }
    let ranks = average_ranks(t)?;
    let (n, k) = (t.n_datasets() as f64, t.n_methods() as f64);
    let sum_sq: f64 = ranks.iter().map(|r| r * r).sum();
    let chi2 = 12.0 * n / (k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
    // Cancellation can leave a tiny negative value when all ranks are equal.
    Ok((chi2.max(0.0), t.n_methods() - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alpha {
    #[serde(rename = "0.05")]
    P05,
    #[serde(rename = "0.10")]
    P10,
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::P05 => 0.05,
            Alpha::P10 => 0.10,
        }
    }

    pub fn from_value(a: f64) -> Result<Self> {
        if (a - 0.05).abs() < 1e-12 {
            Ok(Alpha::P05)
        } else if (a - 0.10).abs() < 1e-12 {
            Ok(Alpha::P10)
        } else {
            Err(Error::invalid(format!("significance level must be 0.05 or 0.10, got {a}")))
        }
    }
}

/// Two-tailed Nemenyi critical values (studentized range over sqrt 2) for
/// k = 2..=10 methods.
const Q_05: [f64; 9] = [1.960, 2.344, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

pub fn nemenyi_q(k: usize, alpha: Alpha) -> Result<f64> {
    if !(2..=10).contains(&k) {
        return Err(Error::invalid(format!("Nemenyi table covers 2..=10 methods, got {k}")));
    }
    Ok(match alpha {
        Alpha::P05 => Q_05[k - 2],
        Alpha::P10 => Q_10[k - 2],
    })
}

/// Minimum mean-rank gap for a significant difference.
pub fn nemenyi_cd(k: usize, n: usize, alpha: Alpha) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("critical difference needs at least one dataset"));
    }
    let q = nemenyi_q(k, alpha)?;
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    /// Gain expected and obtained.
    TP,
    /// Loss expected and obtained.
    TN,
    /// Gain expected, loss obtained.
    FP,
    /// Loss expected, gain obtained.
    FN,
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sharpshooter {
    pub expected: f64,
    pub actual: f64,
    pub quadrant: Quadrant,
}

/// Train and test accuracy ratios of method `a` over method `b`. A ratio of
/// exactly 1 counts as a gain.
pub fn sharpshooter(train_a: f64, train_b: f64, test_a: f64, test_b: f64) -> Result<Sharpshooter> {
    for v in [train_a, train_b, test_a, test_b] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(format!("accuracy {v} is not a nonnegative number")));
        }
    }
    if train_b == 0.0 || test_b == 0.0 {
        return Err(Error::invalid("baseline accuracy is zero"));
    }
    let expected = train_a / train_b;
    let actual = test_a / test_b;
    let quadrant = match (expected >= 1.0, actual >= 1.0) {
        (true, true) => Quadrant::TP,
        (false, false) => Quadrant::TN,
        (true, false) => Quadrant::FP,
        (false, true) => Quadrant::FN,
    };
    Ok(Sharpshooter {
        expected,
        actual,
        quadrant,
    })
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooShort {
            op: "pearson",
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("correlation of a constant sequence"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// One merge: clusters `left` and `right` join at `height` into cluster
/// `n + step`. Ids below `n` are the original points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Average-linkage agglomerative clustering of a precomputed distance table.
/// At equal heights the pair with the smallest (left, right) ids merges
/// first.
pub fn agglomerative_cluster(d: &DistanceMatrix) -> Result<Vec<Merge>> {
    if !d.is_square() {
        return Err(Error::invalid("clustering needs a square table"));
    }
    if !d.is_symmetric() {
        return Err(Error::invalid("clustering needs a symmetric table"));
    }
    let n = d.rows();
    // Active clusters: (id, size), with the cluster distance table kept in
    // step with their order.
    let mut active: Vec<(usize, usize)> = (0..n).map(|i| (i, 1)).collect();
    let mut dist: Vec<Vec<f64>> = d.to_rows();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                let h = dist[a][b];
                let ids = {
                    let (x, y) = (active[a].0, active[b].0);
                    (x.min(y), x.max(y))
                };
                let better = match best {
                    None => true,
                    Some((bh, bids, _, _)) => h < bh || (h == bh && ids < bids),
                };
                if better {
                    best = Some((h, ids, a, b));
                }
            }
        }
        let (height, (left, right), a, b) = best.expect("two active clusters");
        let (sa, sb) = (active[a].1, active[b].1);
        let merged: Vec<f64> = (0..active.len())
            .map(|c| (sa as f64 * dist[a][c] + sb as f64 * dist[b][c]) / (sa + sb) as f64)
            .collect();
        let id = n + merges.len();
        merges.push(Merge {
            left,
            right,
            height,
            size: sa + sb,
        });
        // Replace `a` by the merged cluster and drop `b` (b > a).
        active[a] = (id, sa + sb);
        for (c, row) in dist.iter_mut().enumerate() {
            row[a] = merged[c];
        }
        dist[a] = merged;
        dist[a][a] = 0.0;
        active.remove(b);
        dist.remove(b);
        for row in &mut dist {
            row.remove(b);
        }
    }
    Ok(merges)
}

/// Mean ranks with pairwise significance at a critical difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub methods: Vec<String>,
    pub datasets: usize,
    pub mean_ranks: Vec<f64>,
    pub friedman_chi2: f64,
    pub friedman_df: usize,
    pub alpha: f64,
    pub critical_difference: f64,
    /// For each method, the methods whose mean rank differs by more than
    /// the critical difference.
    pub significant: Vec<Vec<String>>,
}

impl RankReport {
    pub fn from_table(t: &ErrorTable, alpha: Alpha) -> Result<Self> {
        let mean_ranks = average_ranks(t)?;
        let (friedman_chi2, friedman_df) = friedman_statistic(t)?;
        let cd = nemenyi_cd(t.n_methods(), t.n_datasets(), alpha)?;
        let significant = mean_ranks
            .iter()
            .map(|ri| {
                t.methods
                    .iter()
                    .zip(&mean_ranks)
                    .filter(|(_, rj)| (ri - *rj).abs() > cd)
                    .map(|(m, _)| m.clone())
                    .collect()
            })
            .collect();
        Ok(Self {
            methods: t.methods.clone(),
            datasets: t.n_datasets(),
            mean_ranks,
            friedman_chi2,
            friedman_df,
            alpha: alpha.value(),
            critical_difference: cd,
            significant,
        })
    }

    /// Plain-text summary, best mean rank first.
    pub fn to_text(&self) -> String {
        let mut order: Vec<usize> = (0..self.methods.len()).collect();
        order.sort_by(|&a, &b| self.mean_ranks[a].total_cmp(&self.mean_ranks[b]).then(a.cmp(&b)));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "datasets {}  friedman chi2 {:.6} (df {})  CD {:.6} at alpha {:.2}",
            self.datasets, self.friedman_chi2, self.friedman_df, self.critical_difference, self.alpha
        );
        for i in order {
            let sig = if self.significant[i].is_empty() {
                "-".to_string()
            } else {
                self.significant[i].join(",")
            };
            let _ = writeln!(out, "{:<12} {:>8.4}  significant vs: {}", self.methods[i], self.mean_ranks[i], sig);
        }
        out
    }
}
