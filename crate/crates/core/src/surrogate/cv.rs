use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{train, SurrogateSpec, TrainedSurrogate};
use super::SurrogateError;
use crate::satisfaction::{LabeledSample, SatisfactionModel, ZotOracle, NUM_LEVELS};
use crate::seeding;

/// Something that fits a satisfaction classifier to labeled data.
pub trait Learner: Sync {
    type Model: SatisfactionModel;
    fn fit(&self, train: &[LabeledSample]) -> Result<Self::Model, SurrogateError>;
}

impl Learner for SurrogateSpec {
    type Model = TrainedSurrogate;
    fn fit(&self, data: &[LabeledSample]) -> Result<TrainedSurrogate, SurrogateError> {
        train(self, data)
    }
}

/// Ignores the training data and answers with the ground-truth oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleLearner;

impl Learner for OracleLearner {
    type Model = ZotOracle;
    fn fit(&self, _: &[LabeledSample]) -> Result<ZotOracle, SurrogateError> {
        Ok(ZotOracle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracy: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across folds.
    pub std: f64,
}

/// Indices split into `folds` groups; every class is dealt round-robin after a
/// seeded shuffle, so each fold holds its proportional share of a class ±1.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, SurrogateError> {
    if folds < 2 || labels.len() < folds {
        return Err(SurrogateError::TooFewSamples { needed: folds.max(2), got: labels.len() });
    }
    let mut rng = seeding::rng(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_LEVELS + 1];
    for (i, &l) in labels.iter().enumerate() {
        by_class[(l as usize).min(NUM_LEVELS)].push(i);
    }
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            out[next].push(i);
            next = (next + 1) % folds;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Stratified k-fold cross-validation; folds are fitted in parallel.
pub fn cross_validate<L: Learner>(
    learner: &L,
    data: &[LabeledSample],
    folds: usize,
    seed: u64,
) -> Result<CvReport, SurrogateError> {
    let labels: Vec<u8> = data.iter().map(|s| s.satisfaction).collect();
    let split = stratified_folds(&labels, folds, seed)?;
    let fold_accuracy = split
        .par_iter()
        .map(|test_idx| {
            let mut in_test = vec![false; data.len()];
            for &i in test_idx {
                in_test[i] = true;
            }
            let train_set: Vec<LabeledSample> =
                data.iter().zip(&in_test).filter(|(_, t)| !**t).map(|(s, _)| s.clone()).collect();
            let model = learner.fit(&train_set)?;
            let hits = test_idx
                .iter()
                .filter(|&&i| model.level(&data[i].context, data[i].delta as f64) == data[i].satisfaction)
                .count();
            Ok(hits as f64 / test_idx.len() as f64)
        })
        .collect::<Result<Vec<f64>, SurrogateError>>()?;
    let k = fold_accuracy.len() as f64;
    let mean = fold_accuracy.iter().sum::<f64>() / k;
    let std = (fold_accuracy.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
    Ok(CvReport { fold_accuracy, mean, std })
}
