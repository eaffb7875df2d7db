//! Edit-level precision, recall and F-beta.
//!
//! Hypothesis edits are matched exactly (span and replacement) against each
//! annotator's edits. Per sentence the annotator that maximizes the running
//! corpus F-beta is chosen, lowest annotator id on ties, and counts are summed
//! over the corpus before any ratio is taken.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{extract_edits, Edit, OpType, TokenSeq};

pub const DEFAULT_BETA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("{name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("cannot score an empty corpus")]
    EmptyCorpus,
    #[error("record {0} has no annotations")]
    NoAnnotations(usize),
}

fn check_beta(beta: f64) -> Result<(), ScoreError> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(ScoreError::Domain {
            name: "beta",
            value: beta,
        })
    }
}

/// F-beta from precision and recall; 0 when both are 0.
pub fn fbeta(precision: f64, recall: f64, beta: f64) -> Result<f64, ScoreError> {
    for (name, value) in [("precision", precision), ("recall", recall)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(ScoreError::Domain { name, value });
        }
    }
    check_beta(beta)?;
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + b2) * precision * recall / denom)
}

/// Round half-up to `decimals` places.
pub fn round_half_up(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    ((value * scale) + 0.5 + 1e-9).floor() / scale
}

/// Percent with one decimal, half-up, e.g. `0.75722` -> `"75.7"`.
pub fn percent(value: f64) -> String {
    format!("{:.1}", round_half_up(value * 100.0, 1))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, fp, fn_ }
    }

    /// `tp / (tp + fp)`, or 1.0 when nothing was proposed.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    /// `tp / (tp + fn)`, or 1.0 when nothing was required.
    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn f_beta(&self, beta: f64) -> f64 {
        fbeta(self.precision(), self.recall(), beta).expect("ratios lie in [0, 1]")
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(self, rhs: Counts) -> Counts {
        Counts::new(self.tp + rhs.tp, self.fp + rhs.fp, self.fn_ + rhs.fn_)
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        *self = *self + rhs;
    }
}

/// Counts split by coarse operation type, indexed by [`OpType::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TypedCounts(pub [Counts; 3]);

impl TypedCounts {
    pub fn get(&self, op: OpType) -> Counts {
        self.0[op.index()]
    }

    pub fn total(&self) -> Counts {
        self.0.iter().fold(Counts::default(), |acc, c| acc + *c)
    }
}

impl AddAssign for TypedCounts {
    fn add_assign(&mut self, rhs: TypedCounts) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

/// Exact-match counts between two edit sets over the same source.
pub fn match_edits(hyp: &[Edit], reference: &[Edit]) -> Counts {
    match_edits_typed(hyp, reference).total()
}

/// Like [`match_edits`], attributing TP/FP to the hypothesis edit's type and
/// FN to the reference edit's type.
pub fn match_edits_typed(hyp: &[Edit], reference: &[Edit]) -> TypedCounts {
    let mut out = TypedCounts::default();
    for edit in hyp {
        let slot = &mut out.0[edit.op_type().index()];
        if reference.contains(edit) {
            slot.tp += 1;
        } else {
            slot.fp += 1;
        }
    }
    for edit in reference {
        if !hyp.contains(edit) {
            out.0[edit.op_type().index()].fn_ += 1;
        }
    }
    out
}

/// One sentence to score: a hypothesis against one or more reference edit sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoringRecord {
    pub source: TokenSeq,
    pub hypothesis: TokenSeq,
    pub annotations: Vec<Vec<Edit>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
}

impl Metrics {
    pub fn from_counts(counts: Counts, beta: f64) -> Self {
        Self {
            tp: counts.tp,
            fp: counts.fp,
            fn_: counts.fn_,
            precision: counts.precision(),
            recall: counts.recall(),
            f_beta: counts.f_beta(beta),
        }
    }

    pub fn counts(&self) -> Counts {
        Counts::new(self.tp, self.fp, self.fn_)
    }

    fn rounded(&self) -> Self {
        Self {
            precision: round_half_up(self.precision, 4),
            recall: round_half_up(self.recall, 4),
            f_beta: round_half_up(self.f_beta, 4),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub beta: f64,
    pub sentences: usize,
    pub overall: Metrics,
    pub per_type: BTreeMap<OpType, Metrics>,
    /// Annotator chosen for each sentence, in input order.
    #[serde(skip)]
    pub chosen_annotators: Vec<usize>,
}

impl ScoreReport {
    /// Tab-separated table: one header line and one row per category.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let f_label = format!("F{}", self.beta);
        writeln!(out, "sentences\t{}", self.sentences).unwrap();
        writeln!(out, "category\tTP\tFP\tFN\tP\tR\t{f_label}").unwrap();
        let rows = std::iter::once(("overall".to_string(), &self.overall))
            .chain(self.per_type.iter().map(|(op, m)| (op.to_string(), m)));
        for (name, m) in rows {
            writeln!(
                out,
                "{name}\t{}\t{}\t{}\t{}\t{}\t{}",
                m.tp,
                m.fp,
                m.fn_,
                percent(m.precision),
                percent(m.recall),
                percent(m.f_beta)
            )
            .unwrap();
        }
        out
    }

    /// Single JSON object; ratios rounded half-up to four decimals.
    pub fn to_json(&self) -> String {
        let rounded = ScoreReport {
            overall: self.overall.rounded(),
            per_type: self
                .per_type
                .iter()
                .map(|(op, m)| (*op, m.rounded()))
                .collect(),
            ..self.clone()
        };
        serde_json::to_string_pretty(&rounded).expect("report serializes")
    }
}

/// Streaming corpus scorer. Annotator selection depends on everything seen
/// so far, so records must be pushed in corpus order.
#[derive(Debug, Clone)]
pub struct CorpusScorer {
    beta: f64,
    totals: TypedCounts,
    chosen: Vec<usize>,
}

impl CorpusScorer {
    pub fn new(beta: f64) -> Result<Self, ScoreError> {
        check_beta(beta)?;
        Ok(Self {
            beta,
            totals: TypedCounts::default(),
            chosen: Vec::new(),
        })
    }

    /// Add one sentence given its hypothesis edits; returns the chosen annotator.
    pub fn push_edits(
        &mut self,
        hyp: &[Edit],
        annotations: &[Vec<Edit>],
    ) -> Result<usize, ScoreError> {
        if annotations.is_empty() {
            return Err(ScoreError::NoAnnotations(self.chosen.len()));
        }
        let running = self.totals.total();
        let mut best: Option<(usize, f64, TypedCounts)> = None;
        for (id, reference) in annotations.iter().enumerate() {
            let counts = match_edits_typed(hyp, reference);
            let f = (running + counts.total()).f_beta(self.beta);
            if best.as_ref().is_none_or(|(_, best_f, _)| f > *best_f) {
                best = Some((id, f, counts));
            }
        }
        let (id, _, counts) = best.expect("at least one annotation");
        self.totals += counts;
        self.chosen.push(id);
        Ok(id)
    }

    pub fn push(&mut self, record: &ScoringRecord) -> Result<usize, ScoreError> {
        let hyp = extract_edits(&record.source, &record.hypothesis);
        self.push_edits(&hyp, &record.annotations)
    }

    pub fn totals(&self) -> TypedCounts {
        self.totals
    }

    pub fn finish(self) -> Result<ScoreReport, ScoreError> {
        if self.chosen.is_empty() {
            return Err(ScoreError::EmptyCorpus);
        }
        let per_type = OpType::ALL
            .iter()
            .map(|op| (*op, Metrics::from_counts(self.totals.get(*op), self.beta)))
            .collect();
        Ok(ScoreReport {
            beta: self.beta,
            sentences: self.chosen.len(),
            overall: Metrics::from_counts(self.totals.total(), self.beta),
            per_type,
            chosen_annotators: self.chosen,
        })
    }
}

pub fn score_corpus<'a, I>(records: I, beta: f64) -> Result<ScoreReport, ScoreError>
where
    I: IntoIterator<Item = &'a ScoringRecord>,
{
    let mut scorer = CorpusScorer::new(beta)?;
    for record in records {
        scorer.push(record)?;
    }
    scorer.finish()
}
