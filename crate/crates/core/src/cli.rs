//! Command-line front end. Every subcommand reads files, writes files, and is
//! also callable as a library function so tests can inject a provider.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::align::{apply_edits, tag_diff, TokenSeq};
use crate::corpus::{
    emit_pairs, parse_m2, AnnotatedSentence, EmittedPairs, Manifest, Strategy, TrainingPair,
};
use crate::ensemble::{self, DevRecord, EnsembleError, EnsembleModel, TrainConfig};
use crate::llm::{
    overcorrect_corpus, CompletionClient, CompletionProvider, HttpProvider, MockProvider,
    OvercorrectionSettings, ResponseCache,
};
use crate::recover::{build_recovered, RecoveryTriple};
use crate::score::{score_corpus, ScoreReport, ScoringRecord, DEFAULT_BETA};

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_FAILURE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Operational(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Operational(_) => 1,
            CliError::Input(_) | CliError::Io { .. } => 2,
        }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// Echoes the source back; no network.
    #[default]
    Mock,
    /// OpenAI-compatible chat completions endpoint.
    Http,
}

/// Optional TOML config. Anything given on the command line wins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub strategy: Option<Strategy>,
    pub beta: Option<f64>,
    pub provider: ProviderConfig,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: Option<ProviderKind>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub max_attempts: Option<u32>,
    pub max_in_flight: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub cache: Option<PathBuf>,
    pub failure_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub l2: Option<f64>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Parser)]
#[command(name = "poco", version, about = "Overcorrection-aware GEC data pipeline and scorer")]
pub struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ask an LLM to overcorrect every source sentence of an M2 file.
    Overcorrect(OvercorrectArgs),
    /// Build gold and recovered training pairs.
    Emit(EmitArgs),
    /// Score hypotheses against an M2 file.
    Score(ScoreArgs),
    /// Fit an edit-level ensemble on a dev set.
    EnsembleTrain(EnsembleTrainArgs),
    /// Combine system outputs with a trained ensemble.
    EnsembleApply(EnsembleApplyArgs),
    /// Print tagged diffs between sources and hypotheses.
    Tagdiff(TagdiffArgs),
    /// Write recovered targets, one sentence per line.
    Recover(RecoverArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProviderArgs {
    #[arg(long, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Credentials come from the POCO_API_KEY environment variable.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    /// JSONL replay cache; created if missing.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Largest tolerated fraction of failed records before exiting with 1.
    #[arg(long)]
    pub failure_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OvercorrectArgs {
    #[arg(long)]
    pub m2: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub provider: ProviderArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EmitArgs {
    #[arg(long)]
    pub m2: PathBuf,
    /// JSONL written by `overcorrect`.
    #[arg(long)]
    pub overcorrections: PathBuf,
    /// Output prefix: `<out>.jsonl` for mix, `<out>.gold.jsonl` and
    /// `<out>.recovered.jsonl` for seq, plus `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: Option<Strategy>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub m2: PathBuf,
    /// One hypothesis per line, tokens separated by single spaces.
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleTrainArgs {
    /// Dev set with gold annotations (annotator 0 is the label source).
    #[arg(long)]
    pub m2: PathBuf,
    /// One hypothesis file per system.
    #[arg(long = "hyp", required = true, num_args = 1..)]
    pub hyps: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleApplyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Source sentences, one per line.
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long = "hyp", required = true, num_args = 1..)]
    pub hyps: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TagdiffArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub hyp: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub m2: PathBuf,
    #[arg(long)]
    pub overcorrections: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// One line of the `overcorrect` output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvercorrectionRecord {
    pub record_id: u64,
    pub source: String,
    pub overcorrected: String,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Overcorrect(args) => {
            let settings = ResolvedProvider::resolve(&args.provider, &config.provider);
            let provider = settings.build_provider();
            cmd_overcorrect(&args, &settings, provider).map(|_| ())
        }
        Command::Emit(args) => cmd_emit(&args, &config).map(|_| ()),
        Command::Score(args) => {
            let report = cmd_score(&args, &config)?;
            stdout
                .write_all(report.to_text().as_bytes())
                .map_err(io_err(Path::new("<stdout>")))
        }
        Command::EnsembleTrain(args) => cmd_ensemble_train(&args, &config).map(|_| ()),
        Command::EnsembleApply(args) => cmd_ensemble_apply(&args),
        Command::Tagdiff(args) => cmd_tagdiff(&args, stdout),
        Command::Recover(args) => cmd_recover(&args),
    }
}

/// Provider settings after merging flags over config over defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedProvider {
    pub kind: ProviderKind,
    pub endpoint: String,
    pub timeout_secs: u64,
    pub cache: Option<PathBuf>,
    pub failure_tolerance: f64,
    #[serde(flatten)]
    pub overcorrection: OvercorrectionSettings,
}

impl ResolvedProvider {
    pub fn resolve(flags: &ProviderArgs, config: &ProviderConfig) -> Self {
        let defaults = OvercorrectionSettings::default();
        Self {
            kind: flags.provider.or(config.kind).unwrap_or_default(),
            endpoint: flags
                .endpoint
                .clone()
                .or_else(|| config.endpoint.clone())
                .unwrap_or_else(|| DEFAULT_ENDPOINT.to_owned()),
            timeout_secs: flags.timeout_secs.or(config.timeout_secs).unwrap_or(60),
            cache: flags.cache.clone().or_else(|| config.cache.clone()),
            failure_tolerance: flags
                .failure_tolerance
                .or(config.failure_tolerance)
                .unwrap_or(DEFAULT_FAILURE_TOLERANCE),
            overcorrection: OvercorrectionSettings {
                model: flags
                    .model
                    .clone()
                    .or_else(|| config.model.clone())
                    .unwrap_or(defaults.model),
                temperature: flags
                    .temperature
                    .or(config.temperature)
                    .unwrap_or(defaults.temperature),
                max_attempts: flags
                    .max_attempts
                    .or(config.max_attempts)
                    .unwrap_or(defaults.max_attempts),
                max_in_flight: flags
                    .max_in_flight
                    .or(config.max_in_flight)
                    .unwrap_or(defaults.max_in_flight),
            },
        }
    }

    pub fn build_provider(&self) -> Arc<dyn CompletionProvider> {
        match self.kind {
            ProviderKind::Mock => Arc::new(MockProvider::echo()),
            ProviderKind::Http => Arc::new(HttpProvider::from_env(
                self.endpoint.clone(),
                Duration::from_secs(self.timeout_secs),
            )),
        }
    }
}

fn read_m2(path: &Path) -> Result<Vec<AnnotatedSentence>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_m2(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn manifest_path(output: &Path) -> PathBuf {
    with_suffix(output, ".manifest.json")
}

fn check_count(what: &str, expected: usize, got: usize) -> Result<(), CliError> {
    if expected != got {
        return Err(CliError::input(format!(
            "{what}: expected {expected} lines, found {got}"
        )));
    }
    Ok(())
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("record serializes"));
        out.push('\n');
    }
    out
}

fn gold_target(sentence: &AnnotatedSentence) -> TokenSeq {
    apply_edits(&sentence.source, sentence.edits_of(0))
        .expect("parsed annotations are conflict-free")
}

/// Overcorrect every sentence of `args.m2` with `provider`. Writes the JSONL
/// output and its manifest, then fails with exit code 1 if the share of
/// failed records exceeds the tolerance.
pub fn cmd_overcorrect(
    args: &OvercorrectArgs,
    settings: &ResolvedProvider,
    provider: Arc<dyn CompletionProvider>,
) -> Result<Vec<OvercorrectionRecord>, CliError> {
    let sentences = read_m2(&args.m2)?;
    let sources: Vec<String> = sentences.iter().map(|s| s.source.to_string()).collect();

    let mut client = CompletionClient::new(provider);
    if let Some(path) = &settings.cache {
        let cache = ResponseCache::open(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        client = client.with_cache(Arc::new(cache));
    }
    let results = overcorrect_corpus(&sources, &settings.overcorrection, &client);
    let failures = results.iter().filter(|r| r.failure.is_some()).count();
    let records: Vec<OvercorrectionRecord> = results
        .into_iter()
        .enumerate()
        .map(|(idx, r)| OvercorrectionRecord {
            record_id: idx as u64,
            source: r.source,
            overcorrected: r.overcorrected,
        })
        .collect();
    write_file(&args.out, &jsonl(&records))?;

    let mut manifest = Manifest::new("overcorrect", json!(settings));
    manifest
        .count("records", records.len() as u64)
        .count("provider_failures", failures as u64)
        .input(&args.m2)
        .map_err(io_err(&args.m2))?;
    manifest.outputs.push(args.out.display().to_string());
    write_file(&manifest_path(&args.out), &manifest.to_json())?;

    let rate = if records.is_empty() {
        0.0
    } else {
        failures as f64 / records.len() as f64
    };
    if rate > settings.failure_tolerance {
        return Err(CliError::Operational(format!(
            "{failures} of {} records failed (tolerance {})",
            records.len(),
            settings.failure_tolerance
        )));
    }
    Ok(records)
}

fn read_overcorrections(path: &Path) -> Result<Vec<OvercorrectionRecord>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| {
            serde_json::from_str(line)
                .map_err(|e| CliError::input(format!("{}:{}: {e}", path.display(), idx + 1)))
        })
        .collect()
}

fn load_triples(m2: &Path, overcorrections: &Path) -> Result<Vec<RecoveryTriple>, CliError> {
    let sentences = read_m2(m2)?;
    let records = read_overcorrections(overcorrections)?;
    check_count(
        &overcorrections.display().to_string(),
        sentences.len(),
        records.len(),
    )?;
    sentences
        .iter()
        .zip(records)
        .enumerate()
        .map(|(idx, (sentence, record))| {
            if record.record_id != idx as u64 {
                return Err(CliError::input(format!(
                    "{}: record {} has record_id {}",
                    overcorrections.display(),
                    idx,
                    record.record_id
                )));
            }
            if TokenSeq::tokenize(&record.source) != sentence.source {
                return Err(CliError::input(format!(
                    "{}: record {idx} source differs from the M2 sentence",
                    overcorrections.display()
                )));
            }
            Ok(RecoveryTriple {
                source: sentence.source.clone(),
                gold: gold_target(sentence),
                overcorrected: TokenSeq::tokenize(&record.overcorrected),
            })
        })
        .collect()
}

/// Returns the paths written, data files first and the manifest last.
pub fn cmd_emit(args: &EmitArgs, config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    let strategy = args.strategy.or(config.strategy).unwrap_or(Strategy::Mix);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let triples = load_triples(&args.m2, &args.overcorrections)?;
    let n = triples.len();
    let emitted = emit_pairs(triples, strategy, seed);

    let to_lines = |pairs: &[TrainingPair]| -> String {
        pairs.iter().map(|p| p.to_json_line() + "\n").collect()
    };
    let mut written = Vec::new();
    match &emitted {
        EmittedPairs::Mix(pairs) => {
            let path = with_suffix(&args.out, ".jsonl");
            write_file(&path, &to_lines(pairs))?;
            written.push(path);
        }
        EmittedPairs::Seq { gold, recovered } => {
            for (suffix, pairs) in [(".gold.jsonl", gold), (".recovered.jsonl", recovered)] {
                let path = with_suffix(&args.out, suffix);
                write_file(&path, &to_lines(pairs))?;
                written.push(path);
            }
        }
    }

    let mut manifest = Manifest::new("emit", json!({ "strategy": strategy, "seed": seed }));
    manifest
        .count("records", n as u64)
        .count("pairs", emitted.len() as u64)
        .input(&args.m2)
        .map_err(io_err(&args.m2))?
        .input(&args.overcorrections)
        .map_err(io_err(&args.overcorrections))?;
    manifest.outputs = written.iter().map(|p| p.display().to_string()).collect();
    let path = manifest_path(&args.out);
    write_file(&path, &manifest.to_json())?;
    written.push(path);
    Ok(written)
}

pub fn cmd_score(args: &ScoreArgs, config: &PipelineConfig) -> Result<ScoreReport, CliError> {
    let beta = args.beta.or(config.beta).unwrap_or(DEFAULT_BETA);
    let sentences = read_m2(&args.m2)?;
    let hyps = read_lines(&args.hyp)?;
    check_count(&args.hyp.display().to_string(), sentences.len(), hyps.len())?;
    let records: Vec<ScoringRecord> = sentences
        .into_iter()
        .zip(hyps)
        .map(|(s, h)| ScoringRecord {
            hypothesis: TokenSeq::tokenize(&h),
            annotations: s.reference_sets(),
            source: s.source,
        })
        .collect();
    let report = score_corpus(&records, beta).map_err(|e| CliError::input(e.to_string()))?;
    if let Some(path) = &args.json {
        write_file(path, &(report.to_json() + "\n"))?;
    }
    Ok(report)
}

fn read_systems(paths: &[PathBuf], expected: usize) -> Result<Vec<Vec<String>>, CliError> {
    paths
        .iter()
        .map(|p| {
            let lines = read_lines(p)?;
            check_count(&p.display().to_string(), expected, lines.len())?;
            Ok(lines)
        })
        .collect()
}

fn hypotheses_at(systems: &[Vec<String>], idx: usize) -> Vec<TokenSeq> {
    systems.iter().map(|s| TokenSeq::tokenize(&s[idx])).collect()
}

pub fn cmd_ensemble_train(
    args: &EnsembleTrainArgs,
    config: &PipelineConfig,
) -> Result<EnsembleModel, CliError> {
    let defaults = TrainConfig::default();
    let train_config = TrainConfig {
        beta: args.beta.or(config.beta).unwrap_or(defaults.beta),
        l2: args.l2.or(config.ensemble.l2).unwrap_or(defaults.l2),
        epochs: args.epochs.or(config.ensemble.epochs).unwrap_or(defaults.epochs),
        lr: args.lr.or(config.ensemble.lr).unwrap_or(defaults.lr),
    };
    let sentences = read_m2(&args.m2)?;
    let systems = read_systems(&args.hyps, sentences.len())?;
    let dev: Vec<DevRecord> = sentences
        .iter()
        .enumerate()
        .map(|(idx, s)| DevRecord {
            source: s.source.clone(),
            hypotheses: hypotheses_at(&systems, idx),
            gold: s.edits_of(0).to_vec(),
        })
        .collect();

    let model = match ensemble::train(&dev, args.hyps.len(), &train_config) {
        Ok(model) => model,
        Err(EnsembleError::DegenerateData { model }) => {
            log::warn!("dev labels are all identical; writing an untuned model (threshold 0.5)");
            *model
        }
        Err(e) => return Err(CliError::input(e.to_string())),
    };
    write_file(&args.out, &(model.to_json() + "\n"))?;
    Ok(model)
}

pub fn cmd_ensemble_apply(args: &EnsembleApplyArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.model).map_err(io_err(&args.model))?;
    let model = EnsembleModel::from_json(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", args.model.display())))?;
    let sources = read_lines(&args.source)?;
    let systems = read_systems(&args.hyps, sources.len())?;
    let mut out = String::new();
    for (idx, source) in sources.iter().enumerate() {
        let combined = ensemble::combine(&TokenSeq::tokenize(source), &hypotheses_at(&systems, idx), &model)
            .map_err(|e| CliError::input(e.to_string()))?;
        out.push_str(&combined.to_string());
        out.push('\n');
    }
    write_file(&args.out, &out)
}

pub fn cmd_tagdiff(args: &TagdiffArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let sources = read_lines(&args.source)?;
    let hyps = read_lines(&args.hyp)?;
    check_count(&args.hyp.display().to_string(), sources.len(), hyps.len())?;
    let out: String = sources
        .iter()
        .zip(&hyps)
        .map(|(s, h)| tag_diff(&TokenSeq::tokenize(s), &TokenSeq::tokenize(h)) + "\n")
        .collect();
    match &args.out {
        Some(path) => write_file(path, &out),
        None => stdout
            .write_all(out.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

pub fn cmd_recover(args: &RecoverArgs) -> Result<(), CliError> {
    let triples = load_triples(&args.m2, &args.overcorrections)?;
    let mut out = String::new();
    let (mut kept, mut dropped) = (0usize, 0usize);
    for triple in &triples {
        let result = build_recovered(triple);
        kept += result.kept_edits.len();
        dropped += result.dropped_gold_edits.len();
        out.push_str(&result.recovered.to_string());
        out.push('\n');
    }
    log::info!("recovered {} sentences: {kept} gold edits kept, {dropped} dropped", triples.len());
    write_file(&args.out, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_win_over_config() {
        let config: PipelineConfig = toml::from_str(
            r#"
            seed = 7
            [provider]
            kind = "http"
            model = "from-config"
            max_in_flight = 2
            "#,
        )
        .unwrap();
        assert_eq!(config.seed, Some(7));
        let cli = Cli::try_parse_from([
            "poco", "overcorrect", "--m2", "a.m2", "--out", "o.jsonl", "--model", "from-flag",
        ])
        .unwrap();
        let Command::Overcorrect(args) = cli.command else { panic!() };
        let resolved = ResolvedProvider::resolve(&args.provider, &config.provider);
        assert_eq!(resolved.kind, ProviderKind::Http);
        assert_eq!(resolved.overcorrection.model, "from-flag");
        assert_eq!(resolved.overcorrection.max_in_flight, 2);
        assert_eq!(resolved.overcorrection.temperature, 1.0);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sede = 1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::Operational("x".into()).exit_code(), 1);
    }

    #[test]
    fn suffixes_append() {
        assert_eq!(with_suffix(Path::new("out/train"), ".gold.jsonl"), PathBuf::from("out/train.gold.jsonl"));
        assert_eq!(manifest_path(Path::new("o.jsonl")), PathBuf::from("o.jsonl.manifest.json"));
    }
}
