use anyhow::{anyhow, Result};
use serde_json::json;
use whow_core::aggregate::{aggregate_all, ExternalResolutions, TiebreakPolicy};
use whow_core::schema::{read_annotations, write_annotations, Annotation};

use crate::config::ConfigError;
use crate::sources::{load_annotations, load_corpus, Source};
use crate::Ctx;

pub fn run(ctx: &Ctx) -> Result<()> {
    let mut bundle = ctx.bundle("aggregate", "aggregate")?;
    let corpus = load_corpus(ctx, &mut bundle)?;
    let path = Source::Human.path(ctx)?;
    let anns = load_annotations(&mut bundle, &path, "the human annotation export", &corpus)?;
    let policy = match ctx.config.tiebreak.as_str() {
        "priority" => TiebreakPolicy::PriorityOrder,
        "flag" => TiebreakPolicy::FlagOnly,
        "external" => {
            let p = ctx.config.resolutions.clone().ok_or_else(|| {
                ConfigError("`--tiebreak external` needs --resolutions or `resolutions`".into())
            })?;
            let bytes = bundle.read_input(&p)?;
            let res: Vec<Annotation> = read_annotations(&bytes[..])?;
            TiebreakPolicy::External(ExternalResolutions::new(res))
        }
        other => return Err(ConfigError(format!("unknown tiebreak policy `{other}`")).into()),
    };
    let agg = aggregate_all(&anns, &policy, &corpus).map_err(|e| anyhow!("{e}"))?;

    let consensus: Vec<Annotation> = agg.iter().map(|a| a.to_annotation()).collect();
    let mut buf = Vec::new();
    write_annotations(&consensus, &mut buf)?;
    bundle.write("annotations/consensus.jsonl", &buf)?;

    let mut sidecar = String::new();
    let (mut tied, mut unresolved) = (0, 0);
    for a in agg.iter().filter(|a| !a.tie_flags.is_empty()) {
        tied += 1;
        unresolved += usize::from(!a.unresolved.is_empty());
        let line = json!({
            "key": a.key,
            "ties": a.tie_flags,
            "unresolved": a.unresolved,
            "annotators": a.annotator_count,
            "votes": a.votes,
        });
        sidecar.push_str(&line.to_string());
        sidecar.push('\n');
    }
    bundle.write("annotations/consensus_ties.jsonl", sidecar.as_bytes())?;
    ctx.info(format!(
        "aggregate: {} sentences, {tied} with ties, {unresolved} unresolved",
        agg.len()
    ));
    if unresolved > 0 {
        ctx.warn(format!("{unresolved} tied sentences carry placeholder labels; see annotations/consensus_ties.jsonl"));
    }
    bundle.finish()
}
