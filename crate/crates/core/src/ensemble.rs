//! Edit-level system combination.
//!
//! Edits proposed by k systems are pooled, each candidate is described by
//! which systems voted for it (one vote block per coarse edit type), and a
//! logistic regression scores it. Candidates at or above a tuned threshold
//! are kept, conflicts are resolved greedily by probability, and the
//! survivors are applied to the source.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{apply_edits, extract_edits, Edit, TokenSeq};
use crate::score::{match_edits, Counts, DEFAULT_BETA};

pub const FEATURE_LAYOUT: &str = "type_x_votes_v1";

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("expected {expected} hypotheses, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("training data has a single label class; returning an untuned model")]
    DegenerateData { model: Box<EnsembleModel> },
    #[error("no training records")]
    EmptyDev,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditCandidate {
    pub edit: Edit,
    /// `votes[i]` is set when system i proposed the edit.
    pub votes: Vec<bool>,
}

impl EditCandidate {
    pub fn type_onehot(&self) -> [f64; 3] {
        let mut onehot = [0.0; 3];
        onehot[self.edit.op_type().index()] = 1.0;
        onehot
    }

    pub fn vote_count(&self) -> usize {
        self.votes.iter().filter(|v| **v).count()
    }
}

/// Union of every system's edits, identical edits merged, sorted by span.
pub fn pool_edits(source: &TokenSeq, hypotheses: &[TokenSeq]) -> Vec<EditCandidate> {
    let k = hypotheses.len();
    let mut pooled: BTreeMap<Edit, Vec<bool>> = BTreeMap::new();
    for (system, hyp) in hypotheses.iter().enumerate() {
        for edit in extract_edits(source, hyp) {
            pooled.entry(edit).or_insert_with(|| vec![false; k])[system] = true;
        }
    }
    pooled
        .into_iter()
        .map(|(edit, votes)| EditCandidate { edit, votes })
        .collect()
}

/// `3k` features: the vote bits placed in the block of the edit's type
/// (Missing, Replace, Unnecessary), zeros elsewhere.
pub fn featurize(candidate: &EditCandidate, k: usize) -> Vec<f64> {
    let mut features = vec![0.0; 3 * k];
    let offset = candidate.edit.op_type().index() * k;
    for (i, vote) in candidate.votes.iter().take(k).enumerate() {
        if *vote {
            features[offset + i] = 1.0;
        }
    }
    features
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub k: usize,
    pub beta: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
    pub feature_layout: String,
}

impl EnsembleModel {
    pub fn probability(&self, candidate: &EditCandidate) -> f64 {
        let z: f64 = featurize(candidate, self.k)
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        if self.feature_layout != FEATURE_LAYOUT {
            return Err(EnsembleError::InvalidModel(format!(
                "unknown feature layout {:?}",
                self.feature_layout
            )));
        }
        if self.k == 0 || self.weights.len() != 3 * self.k {
            return Err(EnsembleError::InvalidModel(format!(
                "{} weights for k = {}",
                self.weights.len(),
                self.k
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(EnsembleError::InvalidModel(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if !self.weights.iter().chain([&self.bias, &self.beta]).all(|v| v.is_finite()) {
            return Err(EnsembleError::InvalidModel("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EnsembleError> {
        let model: EnsembleModel =
            serde_json::from_str(text).map_err(|e| EnsembleError::InvalidModel(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }
}

/// Keep candidates with probability at or above `threshold`, then accept them
/// in order of descending probability (smaller start, then shorter span on
/// ties), skipping any that conflict with an accepted edit.
pub fn select_edits(scored: &[(EditCandidate, f64)], threshold: f64) -> Vec<Edit> {
    let mut order: Vec<&(EditCandidate, f64)> =
        scored.iter().filter(|(_, p)| *p >= threshold).collect();
    order.sort_by(|(a, pa), (b, pb)| {
        pb.total_cmp(pa)
            .then(a.edit.start().cmp(&b.edit.start()))
            .then((a.edit.end() - a.edit.start()).cmp(&(b.edit.end() - b.edit.start())))
            .then(a.edit.cmp(&b.edit))
    });
    let mut accepted: Vec<Edit> = Vec::new();
    for (candidate, _) in order {
        if accepted.iter().all(|e| !e.conflicts_with(&candidate.edit)) {
            accepted.push(candidate.edit.clone());
        }
    }
    accepted.sort();
    accepted
}

fn score_candidates(
    source: &TokenSeq,
    hypotheses: &[TokenSeq],
    model: &EnsembleModel,
) -> Vec<(EditCandidate, f64)> {
    pool_edits(source, hypotheses)
        .into_iter()
        .map(|c| {
            let p = model.probability(&c);
            (c, p)
        })
        .collect()
}

pub fn combine(
    source: &TokenSeq,
    hypotheses: &[TokenSeq],
    model: &EnsembleModel,
) -> Result<TokenSeq, EnsembleError> {
    if hypotheses.len() != model.k {
        return Err(EnsembleError::ArityMismatch {
            expected: model.k,
            got: hypotheses.len(),
        });
    }
    let scored = score_candidates(source, hypotheses, model);
    let edits = select_edits(&scored, model.threshold);
    Ok(apply_edits(source, &edits).expect("selected edits are conflict-free"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DevRecord {
    pub source: TokenSeq,
    pub hypotheses: Vec<TokenSeq>,
    pub gold: Vec<Edit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub beta: f64,
    pub l2: f64,
    pub epochs: usize,
    pub lr: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            l2: 1e-4,
            epochs: 2000,
            lr: 1.0,
        }
    }
}

struct Example {
    features: Vec<f64>,
    label: f64,
}

/// Full-batch gradient descent on mean cross-entropy plus `l2 * |theta|^2`,
/// from zero. The penalty covers the bias too and is applied as a proximal
/// step, so any `l2 >= 0` is stable.
fn fit(examples: &[Example], dim: usize, config: &TrainConfig) -> (Vec<f64>, f64) {
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    if examples.is_empty() {
        return (weights, bias);
    }
    let n = examples.len() as f64;
    let shrink = 1.0 / (1.0 + 2.0 * config.lr * config.l2);
    let mut grad = vec![0.0; dim];
    for _ in 0..config.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_bias = 0.0;
        for ex in examples {
            let z: f64 = ex
                .features
                .iter()
                .zip(&weights)
                .map(|(x, w)| x * w)
                .sum::<f64>()
                + bias;
            let residual = sigmoid(z) - ex.label;
            for (g, x) in grad.iter_mut().zip(&ex.features) {
                *g += residual * x;
            }
            grad_bias += residual;
        }
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w = (*w - config.lr * g / n) * shrink;
        }
        bias = (bias - config.lr * grad_bias / n) * shrink;
    }
    (weights, bias)
}

/// Corpus counts on `dev` when accepting candidates at `threshold`.
pub fn dev_counts(
    dev: &[DevRecord],
    scored: &[Vec<(EditCandidate, f64)>],
    threshold: f64,
) -> Counts {
    dev.iter()
        .zip(scored)
        .map(|(record, cands)| {
            let edits = select_edits(cands, threshold);
            let output = apply_edits(&record.source, &edits).expect("selected edits apply");
            match_edits(&extract_edits(&record.source, &output), &record.gold)
        })
        .fold(Counts::default(), |acc, c| acc + c)
}

pub fn train(dev: &[DevRecord], k: usize, config: &TrainConfig) -> Result<EnsembleModel, EnsembleError> {
    if dev.is_empty() {
        return Err(EnsembleError::EmptyDev);
    }
    if !(config.l2 >= 0.0 && config.lr > 0.0 && config.beta > 0.0) {
        return Err(EnsembleError::InvalidConfig(format!("{config:?}")));
    }
    let mut examples = Vec::new();
    for record in dev {
        if record.hypotheses.len() != k {
            return Err(EnsembleError::ArityMismatch {
                expected: k,
                got: record.hypotheses.len(),
            });
        }
        for candidate in pool_edits(&record.source, &record.hypotheses) {
            let label = if record.gold.contains(&candidate.edit) { 1.0 } else { 0.0 };
            examples.push(Example {
                features: featurize(&candidate, k),
                label,
            });
        }
    }

    let (weights, bias) = fit(&examples, 3 * k, config);
    let mut model = EnsembleModel {
        k,
        beta: config.beta,
        weights,
        bias,
        threshold: 0.5,
        feature_layout: FEATURE_LAYOUT.to_owned(),
    };

    let positives = examples.iter().filter(|e| e.label > 0.5).count();
    if positives == 0 || positives == examples.len() {
        log::warn!("all {} candidates share one label", examples.len());
        return Err(EnsembleError::DegenerateData {
            model: Box::new(model),
        });
    }

    let scored: Vec<Vec<(EditCandidate, f64)>> = dev
        .iter()
        .map(|r| score_candidates(&r.source, &r.hypotheses, &model))
        .collect();
    let mut thresholds: Vec<f64> = scored.iter().flatten().map(|(_, p)| *p).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    // descending sweep; only a strictly better F moves the threshold down
    let mut best: Option<(f64, f64)> = None;
    for t in thresholds {
        let f = dev_counts(dev, &scored, t).f_beta(config.beta);
        if best.is_none_or(|(_, best_f)| f > best_f) {
            best = Some((t, f));
        }
    }
    if let Some((t, f)) = best {
        log::info!("tuned threshold {t:.6} (dev F{} = {f:.4})", config.beta);
        model.threshold = t;
    }
    Ok(model)
}
