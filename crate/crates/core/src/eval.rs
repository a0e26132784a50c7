//! Train/test splitting and binary evaluation of a fitted classifier.

use crate::classifier::{classify, BayesNet};
use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::rng::SeqRng;
use serde::Serialize;

/// How to split a labeled dataset into train and test parts.
#[derive(Clone, Copy, Debug)]
pub struct SplitSpec {
    /// Fraction of rows (per class when stratified) assigned to training.
    pub ratio: f64,
    /// When set, each class is shuffled and split separately so class
    /// proportions carry over to both sides.
    pub stratified: bool,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(ratio: f64, seed: u64) -> Self {
        SplitSpec {
            ratio,
            stratified: true,
            seed,
        }
    }
}

/// Confusion counts and derived rates for one binary comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub positive_class: String,
    pub tp: usize,
    pub fp: usize,
    pub r#fn: usize,
    pub tn: usize,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub n_train: usize,
    pub n_test: usize,
}

fn ratio_count(n: usize, ratio: f64) -> usize {
    (ratio * n as f64).ceil() as usize
}

/// Splits a labeled dataset into (train, test) row-index sets.
///
/// Stratified mode shuffles each class's rows with one seeded stream (classes
/// visited in sorted-label order) and sends the first ceil(ratio * n_class)
/// of each to training. Both sides preserve original row order. Every class
/// needs at least two rows so neither side can lose a class entirely.
pub fn split(data: &DataSet, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.ratio > 0.0 && spec.ratio < 1.0) {
        return Err(Error::param(
            "split_ratio",
            "must lie strictly between 0 and 1",
        ));
    }
    let classes = data
        .classes
        .as_ref()
        .ok_or_else(|| Error::data("split requires a class column"))?;
    let mut rng = SeqRng::new(spec.seed);
    let mut train: Vec<usize> = Vec::new();
    let mut test: Vec<usize> = Vec::new();
    if spec.stratified {
        for label in data.class_labels() {
            let mut members: Vec<usize> = (0..data.n_rows())
                .filter(|&i| classes[i] == label)
                .collect();
            if members.len() < 2 {
                return Err(Error::data(format!(
                    "class `{label}` has only {} row(s); stratified split needs at least 2",
                    members.len()
                )));
            }
            rng.shuffle(&mut members);
            let k = ratio_count(members.len(), spec.ratio).min(members.len() - 1);
            let k = k.max(1);
            train.extend_from_slice(&members[..k]);
            test.extend_from_slice(&members[k..]);
        }
    } else {
        let mut order: Vec<usize> = (0..data.n_rows()).collect();
        if order.len() < 2 {
            return Err(Error::data("split needs at least 2 rows"));
        }
        rng.shuffle(&mut order);
        let k = ratio_count(order.len(), spec.ratio)
            .min(order.len() - 1)
            .max(1);
        train.extend_from_slice(&order[..k]);
        test.extend_from_slice(&order[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Classifies every test row and tallies a binary confusion matrix against
/// `positive_class`. Degenerate denominators yield rate 0.
pub fn evaluate(net: &BayesNet, test: &DataSet, positive_class: &str) -> Result<EvalReport> {
    let classes = test
        .classes
        .as_ref()
        .ok_or_else(|| Error::data("evaluation requires a class column"))?;
    if !net.class_labels.iter().any(|l| l == positive_class) {
        return Err(Error::data(format!(
            "positive class `{positive_class}` is not a class of the model"
        )));
    }
    let feature_idx: Vec<usize> = net
        .attributes
        .iter()
        .map(|name| {
            test.attribute_index(name)
                .ok_or_else(|| Error::data(format!("test data is missing attribute `{name}`")))
        })
        .collect::<Result<_>>()?;
    let (mut tp, mut fp, mut fneg, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (row, label) in test.rows.iter().zip(classes) {
        let values: Vec<f64> = feature_idx.iter().map(|&i| row[i]).collect();
        let pred = classify(net, &values)?;
        let actual_pos = label == positive_class;
        let predicted_pos = pred.label == positive_class;
        match (actual_pos, predicted_pos) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            (false, false) => tn += 1,
        }
    }
    let n_test = test.n_rows();
    let rate = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(EvalReport {
        positive_class: positive_class.to_string(),
        tp,
        fp,
        r#fn: fneg,
        tn,
        accuracy: rate(tp + tn, n_test),
        sensitivity: rate(tp, tp + fneg),
        specificity: rate(tn, tn + fp),
        n_train: net.n_train,
        n_test,
    })
}
