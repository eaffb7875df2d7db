//! Recovered-target construction.
//!
//! The recovered target keeps only those gold edits that the LLM also made
//! (same span, same replacement) and leaves every other token as in the source.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::align::{apply_edits, extract_edits, Edit, TokenSeq};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryTriple {
    pub source: TokenSeq,
    pub gold: TokenSeq,
    pub overcorrected: TokenSeq,
}

impl RecoveryTriple {
    pub fn new(
        source: impl Into<TokenSeq>,
        gold: impl Into<TokenSeq>,
        overcorrected: impl Into<TokenSeq>,
    ) -> Self {
        Self {
            source: source.into(),
            gold: gold.into(),
            overcorrected: overcorrected.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub recovered: TokenSeq,
    pub kept_edits: Vec<Edit>,
    pub dropped_gold_edits: Vec<Edit>,
    pub spurious_llm_edits: Vec<Edit>,
}

pub fn build_recovered(triple: &RecoveryTriple) -> RecoveryResult {
    let gold_edits = extract_edits(&triple.source, &triple.gold);
    let llm_edits = extract_edits(&triple.source, &triple.overcorrected);
    let llm_set: HashSet<&Edit> = llm_edits.iter().collect();
    let gold_set: HashSet<&Edit> = gold_edits.iter().collect();

    let (kept_edits, dropped_gold_edits): (Vec<Edit>, Vec<Edit>) = gold_edits
        .iter()
        .cloned()
        .partition(|e| llm_set.contains(e));
    let spurious_llm_edits = llm_edits
        .iter()
        .filter(|e| !gold_set.contains(e))
        .cloned()
        .collect();

    // kept edits are a subset of one valid extraction, so they never conflict
    let recovered =
        apply_edits(&triple.source, &kept_edits).expect("subset of a valid edit set applies");

    RecoveryResult {
        recovered,
        kept_edits,
        dropped_gold_edits,
        spurious_llm_edits,
    }
}

/// Element-wise [`build_recovered`] over a fallible record stream.
///
/// Failed records pass through as errors tagged with their zero-based index.
pub fn recover_corpus<I, E>(triples: I) -> impl Iterator<Item = Result<RecoveryResult, (usize, E)>>
where
    I: IntoIterator<Item = Result<RecoveryTriple, E>>,
{
    triples
        .into_iter()
        .enumerate()
        .map(|(idx, triple)| triple.map(|t| build_recovered(&t)).map_err(|e| (idx, e)))
}
