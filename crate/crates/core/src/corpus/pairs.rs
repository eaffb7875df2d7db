use serde::{Deserialize, Serialize};

use crate::recover::{build_recovered, RecoveryTriple};

use super::shuffle::permutation;
use super::CorpusError;

const SOURCE_PREFIX: &str = "source : ";
const OVERCORRECT_PREFIX: &str = "overcorrect : ";

/// Encoder input pairing a source sentence with its LLM rewrite.
pub fn format_model_input(source: &str, overcorrect: &str) -> String {
    format!("{SOURCE_PREFIX}{source}\n{OVERCORRECT_PREFIX}{overcorrect}")
}

/// Inverse of [`format_model_input`].
pub fn parse_model_input(input: &str) -> Result<(String, String), CorpusError> {
    let (first, second) = input
        .split_once('\n')
        .ok_or_else(|| CorpusError::ModelInput("expected two lines".into()))?;
    let source = first
        .strip_prefix(SOURCE_PREFIX)
        .ok_or_else(|| CorpusError::ModelInput(format!("missing {SOURCE_PREFIX:?}")))?;
    let overcorrect = second
        .strip_prefix(OVERCORRECT_PREFIX)
        .ok_or_else(|| CorpusError::ModelInput(format!("missing {OVERCORRECT_PREFIX:?}")))?;
    if overcorrect.contains('\n') {
        return Err(CorpusError::ModelInput("more than two lines".into()));
    }
    Ok((source.to_owned(), overcorrect.to_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Gold,
    Recovered,
}

/// Double-target training assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// gold pairs first, then recovered pairs, as separate streams
    Seq,
    /// both kinds in one seeded shuffle
    Mix,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Seq => "seq",
            Strategy::Mix => "mix",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingPair {
    pub record_id: u64,
    pub source: String,
    pub overcorrect: String,
    pub target: String,
    pub target_kind: TargetKind,
}

#[derive(Serialize, Deserialize)]
struct PairLine {
    record_id: u64,
    input: String,
    target: String,
    target_kind: TargetKind,
}

impl TrainingPair {
    pub fn input(&self) -> String {
        format_model_input(&self.source, &self.overcorrect)
    }

    /// One JSON Lines record: `{record_id, input, target, target_kind}`.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&PairLine {
            record_id: self.record_id,
            input: self.input(),
            target: self.target.clone(),
            target_kind: self.target_kind,
        })
        .expect("pair serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self, CorpusError> {
        let raw: PairLine = serde_json::from_str(line)
            .map_err(|e| CorpusError::ModelInput(e.to_string()))?;
        let (source, overcorrect) = parse_model_input(&raw.input)?;
        Ok(Self {
            record_id: raw.record_id,
            source,
            overcorrect,
            target: raw.target,
            target_kind: raw.target_kind,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmittedPairs {
    Seq {
        gold: Vec<TrainingPair>,
        recovered: Vec<TrainingPair>,
    },
    Mix(Vec<TrainingPair>),
}

impl EmittedPairs {
    pub fn len(&self) -> usize {
        match self {
            EmittedPairs::Seq { gold, recovered } => gold.len() + recovered.len(),
            EmittedPairs::Mix(pairs) => pairs.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = &TrainingPair> + '_> {
        match self {
            EmittedPairs::Seq { gold, recovered } => Box::new(gold.iter().chain(recovered)),
            EmittedPairs::Mix(pairs) => Box::new(pairs.iter()),
        }
    }
}

/// A gold pair and a recovered pair for every triple; record ids are the
/// triples' positions.
pub fn emit_pairs<I>(triples: I, strategy: Strategy, seed: u64) -> EmittedPairs
where
    I: IntoIterator<Item = RecoveryTriple>,
{
    let mut gold = Vec::new();
    let mut recovered = Vec::new();
    for (idx, triple) in triples.into_iter().enumerate() {
        let record_id = idx as u64;
        let result = build_recovered(&triple);
        let source = triple.source.to_string();
        let overcorrect = triple.overcorrected.to_string();
        gold.push(TrainingPair {
            record_id,
            source: source.clone(),
            overcorrect: overcorrect.clone(),
            target: triple.gold.to_string(),
            target_kind: TargetKind::Gold,
        });
        recovered.push(TrainingPair {
            record_id,
            source,
            overcorrect,
            target: result.recovered.to_string(),
            target_kind: TargetKind::Recovered,
        });
    }

    match strategy {
        Strategy::Seq => EmittedPairs::Seq { gold, recovered },
        Strategy::Mix => {
            // pair index 2i is record i's gold pair, 2i + 1 its recovered pair
            let mut slots: Vec<Option<TrainingPair>> = gold
                .into_iter()
                .zip(recovered)
                .flat_map(|(g, r)| [Some(g), Some(r)])
                .collect();
            let order = permutation(slots.len(), seed);
            EmittedPairs::Mix(
                order
                    .into_iter()
                    .map(|i| slots[i].take().expect("permutation visits each index once"))
                    .collect(),
            )
        }
    }
}
