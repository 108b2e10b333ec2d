//! `whow`: moderator discourse analytics from transcripts to report tables.

mod bundle;
mod commands;
mod config;
mod render;
mod sources;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bundle::Bundle;
use config::{ConfigError, RunConfig, SplitFilter};

#[derive(Parser)]
#[command(
    name = "whow",
    version,
    about = "Why/How/Who analytics for moderated multi-party transcripts"
)]
struct Cli {
    /// Run configuration (`key = value` lines, `schema_version = 1`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; every command writes only below it.
    #[arg(long, global = true, default_value = "whow-out")]
    out: PathBuf,
    /// Base seed for random baselines.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert source transcripts into the canonical corpus under OUT/corpus.
    Ingest(IngestArgs),
    /// Split a plain-text file into sentences, one per line.
    Segment(SegmentArgs),
    /// Label moderator sentences with a chat-completion model.
    Annotate(AnnotateArgs),
    /// Majority-vote human annotations into consensus labels.
    Aggregate(AggregateArgs),
    /// Inter-annotator agreement (Krippendorff's alpha).
    Agree(AgreeArgs),
    /// Score model labels against gold labels.
    Eval(EvalArgs),
    /// Moderation-strategy tables: acts given motives, speaker transitions, target metrics.
    Analyze(AnalyzeArgs),
    /// Collect every rendered table into OUT/report.md.
    Report,
}

#[derive(Args, Clone)]
pub struct Scope {
    /// Corpus directory of `.jsonl` episodes [default: OUT/corpus].
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Comma-separated splits to include, or `all`.
    #[arg(long)]
    split: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Whow,
    Insq,
    Npr,
}

#[derive(Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    format: FormatArg,
    /// A transcript file or a directory of them.
    #[arg(long = "in")]
    input: PathBuf,
    /// Write the files that parse even if others fail.
    #[arg(long)]
    keep_going: bool,
}

#[derive(Args)]
pub struct SegmentArgs {
    /// Plain-text file.
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// One prompt per sentence for all dimensions.
    Mt,
    /// One prompt per sentence and dimension.
    St,
}

#[derive(Args)]
pub struct AnnotateArgs {
    #[command(flatten)]
    scope: Scope,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Response cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    /// Comma-separated episode ids [default: every episode in scope].
    #[arg(long)]
    episodes: Option<String>,
    #[arg(long)]
    concurrency: Option<usize>,
    #[arg(long)]
    rate_per_min: Option<f64>,
    /// Prompt templates (TOML) replacing the bundled ones.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Exit 0 even when some sentences could not be labelled.
    #[arg(long)]
    keep_going: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TiebreakArg {
    Priority,
    Flag,
    External,
}

#[derive(Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    scope: Scope,
    /// Human annotation file (JSONL).
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long, value_enum)]
    tiebreak: Option<TiebreakArg>,
    /// Manual tie resolutions for `--tiebreak external`.
    #[arg(long)]
    resolutions: Option<PathBuf>,
}

#[derive(Args)]
pub struct AgreeArgs {
    #[command(flatten)]
    scope: Scope,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Comma-separated dimensions (DA, IM, CM, SM, TS).
    #[arg(long)]
    dims: Option<String>,
}

#[derive(Args)]
pub struct EvalArgs {
    #[command(flatten)]
    scope: Scope,
    /// Gold label source.
    #[arg(long, default_value = "consensus")]
    gold: String,
    /// Label sources to score, e.g. `model:gpt-4o:mt`.
    #[arg(long, required = true, num_args = 1..)]
    pred: Vec<String>,
    #[arg(long)]
    dims: Option<String>,
    /// Classes in the macro average: `union` of gold and predicted, or `gold`.
    #[arg(long)]
    universe: Option<String>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    scope: Scope,
    /// Label source: `consensus`, `human` (one label per sentence) or `model:<name>[:mt|st]`.
    #[arg(long)]
    source: Option<String>,
    /// Sources to compare pairwise, cell by cell.
    #[arg(long, num_args = 2..)]
    compare: Vec<String>,
    /// Count an act once per sentence instead of once per turn.
    #[arg(long)]
    per_sentence_counts: bool,
    /// Average conditional rows over all episodes, with zeros where the motive is absent.
    #[arg(long)]
    zero_fill: bool,
}

/// Shared state for one invocation.
pub struct Ctx {
    pub out: PathBuf,
    pub config: RunConfig,
    pub config_path: Option<PathBuf>,
    pub quiet: bool,
}

impl Ctx {
    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    pub fn warn(&self, msg: impl AsRef<str>) {
        eprintln!("warning: {}", msg.as_ref());
    }

    pub fn bundle(&self, step: impl Into<String>, command: &str) -> anyhow::Result<Bundle> {
        let mut b = Bundle::new(
            &self.out,
            step,
            command,
            self.config.hash(),
            self.config.seed,
        );
        if let Some(p) = &self.config_path {
            b.note_input(p)?;
        }
        Ok(b)
    }

    pub fn corpus_dir(&self) -> PathBuf {
        self.config
            .corpus
            .clone()
            .unwrap_or_else(|| self.out.join("corpus"))
    }

    fn apply_scope(&mut self, scope: &Scope) -> Result<(), ConfigError> {
        if let Some(c) = &scope.corpus {
            self.config.corpus = Some(c.clone());
        }
        if let Some(s) = &scope.split {
            self.config.split = SplitFilter::parse(s)?;
        }
        Ok(())
    }
}

fn existing(path: &Path, what: &str) -> Result<PathBuf, ConfigError> {
    if path.exists() {
        Ok(path.to_path_buf())
    } else {
        Err(ConfigError(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let mut ctx = Ctx {
        out: cli.out,
        config,
        config_path: cli.config,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Ingest(a) => {
            existing(&a.input, "input")?;
            commands::ingest::run(&ctx, &a)
        }
        Command::Segment(a) => {
            existing(&a.input, "input")?;
            commands::segment::run(&ctx, &a)
        }
        Command::Annotate(a) => {
            ctx.apply_scope(&a.scope)?;
            let c = &mut ctx.config;
            if let Some(m) = &a.model {
                c.model = Some(m.clone());
            }
            if let Some(m) = a.mode {
                c.mode = if m == ModeArg::Mt { "mt" } else { "st" }.into();
            }
            if let Some(p) = &a.cache {
                c.cache_dir = Some(p.clone());
            }
            if let Some(e) = &a.endpoint {
                c.endpoint_url = e.clone();
            }
            if let Some(n) = a.concurrency {
                c.concurrency = n;
            }
            if let Some(r) = a.rate_per_min {
                c.rate_per_min = Some(r);
            }
            if let Some(t) = &a.templates {
                c.templates = Some(existing(t, "templates file")?);
            }
            commands::annotate::run(&ctx, &a)
        }
        Command::Aggregate(a) => {
            ctx.apply_scope(&a.scope)?;
            if let Some(p) = &a.annotations {
                ctx.config.human_annotations = Some(existing(p, "annotation file")?);
            }
            if let Some(p) = &a.resolutions {
                ctx.config.resolutions = Some(existing(p, "resolutions file")?);
            }
            if let Some(t) = a.tiebreak {
                ctx.config.tiebreak = match t {
                    TiebreakArg::Priority => "priority",
                    TiebreakArg::Flag => "flag",
                    TiebreakArg::External => "external",
                }
                .into();
            }
            commands::aggregate::run(&ctx)
        }
        Command::Agree(a) => {
            ctx.apply_scope(&a.scope)?;
            if let Some(p) = &a.annotations {
                ctx.config.human_annotations = Some(existing(p, "annotation file")?);
            }
            let dims = commands::parse_dims(a.dims.as_deref())?;
            commands::agree::run(&ctx, &dims)
        }
        Command::Eval(a) => {
            ctx.apply_scope(&a.scope)?;
            if let Some(u) = &a.universe {
                ctx.config.class_universe = config::parse_universe(u)?;
            }
            let dims = commands::parse_dims(a.dims.as_deref())?;
            commands::eval::run(&ctx, &a, &dims)
        }
        Command::Analyze(a) => {
            ctx.apply_scope(&a.scope)?;
            if let Some(s) = &a.source {
                ctx.config.source = s.clone();
            }
            ctx.config.per_sentence_counts |= a.per_sentence_counts;
            ctx.config.zero_fill_conditionals |= a.zero_fill;
            commands::analyze::run(&ctx, &a.compare)
        }
        Command::Report => commands::report::run(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
