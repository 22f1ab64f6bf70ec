//! Classification metrics and experiment reports. Dangerous is the
//! positive class.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neural::Verdict;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, predicted_dangerous: bool, dangerous: bool) {
        match (predicted_dangerous, dangerous) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

pub fn confusion(predictions: &[Verdict], dangerous: &[bool]) -> Result<Confusion, EvalError> {
    if predictions.len() != dangerous.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: dangerous.len(),
        });
    }
    let mut c = Confusion::default();
    for (p, &y) in predictions.iter().zip(dangerous) {
        c.add(*p == Verdict::Dangerous, y);
    }
    Ok(c)
}

/// Which metrics hit a zero denominator (and were reported as 0).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degenerate {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
    pub accuracy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub degenerate: Degenerate,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// F1 is computed as `2tp / (2tp + fp + fn)`, the harmonic mean of
/// precision and recall without the intermediate rounding.
pub fn metrics(c: &Confusion) -> Metrics {
    let (precision, dp) = ratio(c.tp, c.tp + c.fp);
    let (recall, dr) = ratio(c.tp, c.tp + c.fn_);
    let (f1, df) = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_);
    let (accuracy, da) = ratio(c.tp + c.tn, c.total());
    Metrics {
        precision,
        recall,
        f1,
        accuracy,
        degenerate: Degenerate {
            precision: dp,
            recall: dr,
            f1: df,
            accuracy: da,
        },
    }
}

/// One evaluated commit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub commit: String,
    pub dangerous: bool,
    pub prediction: Verdict,
    pub probability: f64,
    pub change_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: String,
    pub n: usize,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

impl SplitReport {
    pub fn from_records(split: &str, records: &[EvalRecord]) -> Self {
        let c = confusion_of(records);
        SplitReport {
            split: split.to_string(),
            n: records.len(),
            confusion: c,
            metrics: metrics(&c),
        }
    }
}

fn confusion_of(records: &[EvalRecord]) -> Confusion {
    let mut c = Confusion::default();
    for r in records {
        c.add(r.prediction == Verdict::Dangerous, r.dangerous);
    }
    c
}

/// Metrics over commits whose change rate lies in `[lower, upper)` (the
/// last bucket also takes 1.0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeRateBucket {
    pub decile: usize,
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

pub fn decile_of(rate: f64) -> usize {
    ((rate * 10.0).floor().max(0.0) as usize).min(9)
}

/// Ten fixed-width change-rate buckets, empty ones included.
pub fn change_rate_buckets(records: &[EvalRecord]) -> Vec<ChangeRateBucket> {
    (0..10)
        .map(|d| {
            let c = confusion_of(
                &records
                    .iter()
                    .filter(|r| decile_of(r.change_rate) == d)
                    .cloned()
                    .collect::<Vec<_>>(),
            );
            ChangeRateBucket {
                decile: d,
                lower: d as f64 / 10.0,
                upper: (d + 1) as f64 / 10.0,
                n: c.total(),
                confusion: c,
                metrics: metrics(&c),
            }
        })
        .collect()
}

pub const CURVE_FOLDS: usize = 5;

/// Training-set sizes for 1..=5 cumulative folds of `n` items.
pub fn fold_sizes(n: usize) -> Vec<usize> {
    (1..=CURVE_FOLDS).map(|k| (k * n).div_ceil(CURVE_FOLDS)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub folds: usize,
    pub train_size: usize,
    pub metrics: Metrics,
}

/// Calls `evaluate` with the first 1, 2, .., 5 folds of `train`; it returns
/// test-set records for a model trained on that prefix.
pub fn training_size_curve<T, E, F>(train: &[T], mut evaluate: F) -> Result<Vec<CurvePoint>, E>
where
    F: FnMut(&[T]) -> Result<Vec<EvalRecord>, E>,
{
    fold_sizes(train.len())
        .into_iter()
        .enumerate()
        .map(|(k, size)| {
            let records = evaluate(&train[..size])?;
            Ok(CurvePoint {
                folds: k + 1,
                train_size: size,
                metrics: metrics(&confusion_of(&records)),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub splits: Vec<SplitReport>,
    pub change_rate_buckets: Vec<ChangeRateBucket>,
    pub training_size_curve: Vec<CurvePoint>,
}

impl Report {
    /// Per-split metrics plus change-rate buckets of the last split.
    pub fn new(splits: &[(&str, &[EvalRecord])], curve: Vec<CurvePoint>) -> Self {
        Report {
            splits: splits
                .iter()
                .map(|(name, recs)| SplitReport::from_records(name, recs))
                .collect(),
            change_rate_buckets: splits.last().map_or_else(Vec::new, |(_, r)| change_rate_buckets(r)),
            training_size_curve: curve,
        }
    }
}
