//! Token alignment and edit extraction.
//!
//! Sentences are whitespace-tokenized [`TokenSeq`]s. [`extract_edits`] runs a
//! weighted Levenshtein alignment over tokens and turns runs of non-match
//! operations into [`Edit`]s. Costs are kept in half units so that the
//! case-only substitution (0.5) stays integral.
//!
//! Backtracing starts at the end of both sequences and prefers
//! match > substitution > deletion > insertion, which pushes deletions of
//! duplicated tokens to the left.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const MATCH_COST: u32 = 0;
const CASE_SUB_COST: u32 = 1;
const SUB_COST: u32 = 2;
const INDEL_COST: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("edits [{0}, {1}) and [{2}, {3}) overlap")]
    Overlap(usize, usize, usize, usize),
    #[error("edit span [{start}, {end}) exceeds source length {len}")]
    OutOfBounds { start: usize, end: usize, len: usize },
    #[error("edit span start {start} is after end {end}")]
    InvertedSpan { start: usize, end: usize },
    #[error("empty edit at {0}: no span and no replacement")]
    EmptyEdit(usize),
    #[error("invalid token {0:?}: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),
}

/// An ordered list of non-empty, whitespace-free tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Split on Unicode whitespace. Never fails; empty input gives an empty sequence.
    pub fn tokenize(text: &str) -> Self {
        Self(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, AlignError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(AlignError::InvalidToken(bad.clone()));
        }
        Ok(Self(tokens))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn slice(&self, start: usize, end: usize) -> TokenSeq {
        TokenSeq(self.0[start..end].to_vec())
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

/// Convenience: tokenizes on whitespace.
impl From<&str> for TokenSeq {
    fn from(text: &str) -> Self {
        TokenSeq::tokenize(text)
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl std::ops::Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

pub fn tokenize(text: &str) -> TokenSeq {
    TokenSeq::tokenize(text)
}

/// Coarse edit operation type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpType {
    Missing,
    Replace,
    Unnecessary,
}

impl OpType {
    pub const ALL: [OpType; 3] = [OpType::Missing, OpType::Replace, OpType::Unnecessary];

    pub fn index(self) -> usize {
        match self {
            OpType::Missing => 0,
            OpType::Replace => 1,
            OpType::Unnecessary => 2,
        }
    }

    /// Single-letter code used in M2 files.
    pub fn code(self) -> &'static str {
        match self {
            OpType::Missing => "M",
            OpType::Replace => "R",
            OpType::Unnecessary => "U",
        }
    }
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpType::Missing => "Missing",
            OpType::Replace => "Replace",
            OpType::Unnecessary => "Unnecessary",
        })
    }
}

/// Replacement of source tokens `[start, end)` with `replacement`.
///
/// Equality and hashing cover the span and the replacement only; the
/// operation type is derived from them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawEdit", into = "RawEdit")]
pub struct Edit {
    start: usize,
    end: usize,
    replacement: TokenSeq,
}

impl Edit {
    pub fn new(start: usize, end: usize, replacement: TokenSeq) -> Result<Self, AlignError> {
        if start > end {
            return Err(AlignError::InvertedSpan { start, end });
        }
        if start == end && replacement.is_empty() {
            return Err(AlignError::EmptyEdit(start));
        }
        Ok(Self {
            start,
            end,
            replacement,
        })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn replacement(&self) -> &TokenSeq {
        &self.replacement
    }

    pub fn op_type(&self) -> OpType {
        if self.start == self.end {
            OpType::Missing
        } else if self.replacement.is_empty() {
            OpType::Unnecessary
        } else {
            OpType::Replace
        }
    }

    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    /// Whether two edits cannot both be applied to the same source.
    ///
    /// Spans that share a token conflict, an insertion strictly inside
    /// another span conflicts, and two insertions at the same position conflict.
    pub fn conflicts_with(&self, other: &Edit) -> bool {
        if self.is_insertion() && other.is_insertion() {
            return self.start == other.start;
        }
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, [{}], {})",
            self.start,
            self.end,
            self.replacement.join(", "),
            self.op_type()
        )
    }
}

#[derive(Serialize, Deserialize)]
struct RawEdit {
    start: usize,
    end: usize,
    replacement: TokenSeq,
    #[serde(default, rename = "type", skip_deserializing)]
    op_type: Option<OpType>,
}

impl TryFrom<RawEdit> for Edit {
    type Error = AlignError;

    fn try_from(raw: RawEdit) -> Result<Self, AlignError> {
        Edit::new(raw.start, raw.end, raw.replacement)
    }
}

impl From<Edit> for RawEdit {
    fn from(edit: Edit) -> Self {
        let op_type = Some(edit.op_type());
        RawEdit {
            start: edit.start,
            end: edit.end,
            replacement: edit.replacement,
            op_type,
        }
    }
}

/// Check the edit-set invariants against a source of `source_len` tokens:
/// spans in bounds, sorted by `(start, end)`, and pairwise conflict-free.
pub fn validate_edit_set(source_len: usize, edits: &[Edit]) -> Result<(), AlignError> {
    for edit in edits {
        if edit.end > source_len {
            return Err(AlignError::OutOfBounds {
                start: edit.start,
                end: edit.end,
                len: source_len,
            });
        }
    }
    for pair in edits.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if (a.start, a.end) > (b.start, b.end) || a.conflicts_with(b) {
            return Err(AlignError::Overlap(a.start, a.end, b.start, b.end));
        }
    }
    Ok(())
}

/// Sort `edits` by span and apply them to `source`.
pub fn apply_edits(source: &TokenSeq, edits: &[Edit]) -> Result<TokenSeq, AlignError> {
    let mut sorted: Vec<&Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.start, e.end));
    for edit in &sorted {
        if edit.end > source.len() {
            return Err(AlignError::OutOfBounds {
                start: edit.start,
                end: edit.end,
                len: source.len(),
            });
        }
    }
    for pair in sorted.windows(2) {
        if pair[0].conflicts_with(pair[1]) {
            return Err(AlignError::Overlap(
                pair[0].start,
                pair[0].end,
                pair[1].start,
                pair[1].end,
            ));
        }
    }

    let mut out = Vec::with_capacity(source.len());
    let mut pos = 0;
    for edit in sorted {
        out.extend_from_slice(&source.0[pos..edit.start]);
        out.extend(edit.replacement.0.iter().cloned());
        pos = edit.end;
    }
    out.extend_from_slice(&source.0[pos..]);
    Ok(TokenSeq(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignOp {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// A full token alignment from source to target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub ops: Vec<AlignOp>,
    cost_half_units: u32,
}

impl Alignment {
    pub fn cost(&self) -> f64 {
        f64::from(self.cost_half_units) / 2.0
    }
}

fn sub_cost(a: &str, b: &str) -> u32 {
    if a == b {
        MATCH_COST
    } else if a.to_lowercase() == b.to_lowercase() {
        CASE_SUB_COST
    } else {
        SUB_COST
    }
}

/// Minimum-cost alignment of `source` onto `target`.
pub fn align(source: &TokenSeq, target: &TokenSeq) -> Alignment {
    let (n, m) = (source.len(), target.len());
    let width = m + 1;
    let mut dist = vec![0u32; (n + 1) * width];
    for i in 1..=n {
        dist[i * width] = i as u32 * INDEL_COST;
    }
    for (j, cell) in dist[..width].iter_mut().enumerate() {
        *cell = j as u32 * INDEL_COST;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = dist[(i - 1) * width + j - 1] + sub_cost(&source[i - 1], &target[j - 1]);
            let del = dist[(i - 1) * width + j] + INDEL_COST;
            let ins = dist[i * width + j - 1] + INDEL_COST;
            dist[i * width + j] = diag.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dist[i * width + j];
        if i > 0 && j > 0 {
            let cost = sub_cost(&source[i - 1], &target[j - 1]);
            if here == dist[(i - 1) * width + j - 1] + cost {
                ops.push(if cost == MATCH_COST {
                    AlignOp::Match
                } else {
                    AlignOp::Substitute
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == dist[(i - 1) * width + j] + INDEL_COST {
            ops.push(AlignOp::Delete);
            i -= 1;
        } else {
            ops.push(AlignOp::Insert);
            j -= 1;
        }
    }
    ops.reverse();

    Alignment {
        ops,
        cost_half_units: dist[n * width + m],
    }
}

/// Turn an alignment into edits.
///
/// A maximal run of non-match operations becomes one edit, except that a run
/// made only of substitutions yields one single-token edit per substitution.
pub fn edits_from_alignment(alignment: &Alignment, target: &TokenSeq) -> Vec<Edit> {
    let mut edits = Vec::new();
    let (mut i, mut j) = (0, 0);
    let ops = &alignment.ops;
    let mut k = 0;
    while k < ops.len() {
        if ops[k] == AlignOp::Match {
            i += 1;
            j += 1;
            k += 1;
            continue;
        }
        let run_end = ops[k..]
            .iter()
            .position(|op| *op == AlignOp::Match)
            .map_or(ops.len(), |p| k + p);
        let run = &ops[k..run_end];
        if run.iter().all(|op| *op == AlignOp::Substitute) {
            for _ in run {
                edits.push(Edit {
                    start: i,
                    end: i + 1,
                    replacement: target.slice(j, j + 1),
                });
                i += 1;
                j += 1;
            }
        } else {
            let (si, sj) = (i, j);
            for op in run {
                match op {
                    AlignOp::Substitute => {
                        i += 1;
                        j += 1;
                    }
                    AlignOp::Delete => i += 1,
                    AlignOp::Insert => j += 1,
                    AlignOp::Match => unreachable!(),
                }
            }
            edits.push(Edit {
                start: si,
                end: i,
                replacement: target.slice(sj, j),
            });
        }
        k = run_end;
    }
    edits
}

/// Edits that turn `source` into `target`, sorted by span.
pub fn extract_edits(source: &TokenSeq, target: &TokenSeq) -> Vec<Edit> {
    edits_from_alignment(&align(source, target), target)
}

/// Render `hypothesis` with `<R>`, `<M>` and `<U>` markup relative to `source`.
///
/// Replaced segments carry the hypothesis tokens, inserted segments carry
/// the new tokens, and deleted source tokens are re-inserted inside `<U>`.
pub fn tag_diff(source: &TokenSeq, hypothesis: &TokenSeq) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut pos = 0;
    for edit in extract_edits(source, hypothesis) {
        parts.extend(source[pos..edit.start].iter().cloned());
        let (tag, body) = match edit.op_type() {
            OpType::Missing => ("M", edit.replacement.to_string()),
            OpType::Replace => ("R", edit.replacement.to_string()),
            OpType::Unnecessary => ("U", source.slice(edit.start, edit.end).to_string()),
        };
        parts.push(format!("<{tag}>{body}</{tag}>"));
        pos = edit.end;
    }
    parts.extend(source[pos..].iter().cloned());
    parts.join(" ")
}
