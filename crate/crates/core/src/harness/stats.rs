//! Per-trial records and their aggregates.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub rounds: u64,
    pub terminated: bool,
    pub verdict: String,
    pub success: bool,
    /// Candidates after every round, for the protocols that have them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub terminated: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_rounds: f64,
    pub median_rounds: f64,
    pub min_rounds: u64,
    pub max_rounds: u64,
    /// Mean candidate count per round; finished trials keep their last value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidate_curve: Vec<f64>,
}

pub fn median(values: &[u64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    }
}

impl Summary {
    pub fn from_records(records: &[TrialRecord]) -> Summary {
        let rounds: Vec<u64> = records.iter().map(|r| r.rounds).collect();
        let trials = records.len();
        let successes = records.iter().filter(|r| r.success).count();
        let len = records.iter().map(|r| r.candidates.len()).max().unwrap_or(0);
        let with_curve: Vec<&TrialRecord> = records.iter().filter(|r| !r.candidates.is_empty()).collect();
        let candidate_curve = (0..len)
            .map(|i| {
                let sum: u64 = with_curve
                    .iter()
                    .map(|r| *r.candidates.get(i).or(r.candidates.last()).unwrap() as u64)
                    .sum();
                sum as f64 / with_curve.len() as f64
            })
            .collect();
        Summary {
            trials,
            terminated: records.iter().filter(|r| r.terminated).count(),
            successes,
            success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            mean_rounds: if trials == 0 { 0.0 } else { rounds.iter().sum::<u64>() as f64 / trials as f64 },
            median_rounds: median(&rounds),
            min_rounds: rounds.iter().copied().min().unwrap_or(0),
            max_rounds: rounds.iter().copied().max().unwrap_or(0),
            candidate_curve,
        }
    }
}

/// Least-squares fit of `y = alpha·log2(x) + beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub alpha: f64,
    pub beta: f64,
    /// Largest `|y - fit| / y` over the points.
    pub max_relative_residual: f64,
}

pub fn fit_log2(points: &[(f64, f64)]) -> LogFit {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(points).map(|(x, (_, y))| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let alpha = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let beta = my - alpha * mx;
    let max_relative_residual = xs
        .iter()
        .zip(points)
        .map(|(x, (_, y))| ((y - (alpha * x + beta)) / y).abs())
        .fold(0.0, f64::max);
    LogFit { alpha, beta, max_relative_residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(trial: usize, rounds: u64, success: bool, candidates: Vec<u32>) -> TrialRecord {
        TrialRecord { trial, seed: 0, n: 1, rounds, terminated: true, verdict: String::new(), success, candidates }
    }

    #[test]
    fn summary_of_a_few_trials() {
        let s = Summary::from_records(&[
            record(0, 10, true, vec![4, 2, 1]),
            record(1, 20, false, vec![4, 1]),
            record(2, 30, true, vec![]),
        ]);
        assert_eq!(s.successes, 2);
        assert_eq!(s.median_rounds, 20.0);
        assert_eq!(s.mean_rounds, 20.0);
        assert_eq!((s.min_rounds, s.max_rounds), (10, 30));
        assert_eq!(s.candidate_curve, vec![4.0, 1.5, 1.0]);
    }

    #[test]
    fn exact_log_fit() {
        let pts: Vec<(f64, f64)> = [16.0, 64.0, 256.0, 1024.0].iter().map(|n: &f64| (*n, 3.0 * n.log2() + 5.0)).collect();
        let f = fit_log2(&pts);
        assert!((f.alpha - 3.0).abs() < 1e-9 && (f.beta - 5.0).abs() < 1e-9);
        assert!(f.max_relative_residual < 1e-9);
    }

    proptest! {
        #[test]
        fn median_lies_between_min_and_max(v in proptest::collection::vec(0u64..1000, 1..50)) {
            let m = median(&v);
            prop_assert!(m >= *v.iter().min().unwrap() as f64);
            prop_assert!(m <= *v.iter().max().unwrap() as f64);
        }

        #[test]
        fn summary_is_recomputable(rounds in proptest::collection::vec(1u64..500, 1..30)) {
            let recs: Vec<TrialRecord> = rounds.iter().enumerate().map(|(i, r)| record(i, *r, r % 2 == 0, vec![])).collect();
            let s = Summary::from_records(&recs);
            let json = serde_json::to_string(&recs).unwrap();
            let back: Vec<TrialRecord> = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(Summary::from_records(&back), s);
        }
    }
}
