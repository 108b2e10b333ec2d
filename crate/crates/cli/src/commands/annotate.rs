use std::time::Duration;

use anyhow::{bail, Result};
use serde_json::json;
use whow_core::llm::{run_job, AnnotationJob, HttpChatClient, JobMode, Templates};
use whow_core::schema::write_annotations;

use crate::config::ConfigError;
use crate::sources::{load_corpus, model_output};
use crate::{AnnotateArgs, Ctx};

fn job_from(ctx: &Ctx, a: &AnnotateArgs) -> Result<AnnotationJob> {
    let c = &ctx.config;
    let model = c
        .model
        .clone()
        .ok_or_else(|| ConfigError("annotate needs --model or `model`".into()))?;
    let mode = match c.mode.as_str() {
        "mt" => JobMode::Multi,
        "st" => JobMode::Single,
        m => return Err(ConfigError(format!("mode must be `mt` or `st`, got `{m}`")).into()),
    };
    let cache = c
        .cache_dir
        .clone()
        .ok_or_else(|| ConfigError("annotate needs --cache or `cache_dir`".into()))?;
    let mut job = AnnotationJob::new(&model, mode, cache);
    job.endpoint = c.endpoint_url.clone();
    job.temperature = c.temperature;
    job.concurrency = c.concurrency.max(1);
    job.retries = c.retries;
    job.rate_per_min = c.rate_per_min;
    if let Some(t) = &c.templates {
        job.templates = Templates::load(t)?;
    }
    if let Some(list) = &a.episodes {
        job.episodes = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
    }
    Ok(job)
}

pub fn run(ctx: &Ctx, a: &AnnotateArgs) -> Result<()> {
    let job = job_from(ctx, a)?;
    let mut bundle = ctx.bundle(format!("annotate {}", job.annotator), "annotate")?;
    if let Some(t) = &ctx.config.templates {
        bundle.note_input(t)?;
    }
    let corpus = load_corpus(ctx, &mut bundle)?;
    let client = HttpChatClient::from_env(Duration::from_secs(ctx.config.timeout_secs));
    let (anns, report) = run_job(&job, &corpus, &client)?;

    let rel = model_output(&job.model, job.mode.short());
    let mut buf = Vec::new();
    write_annotations(&anns, &mut buf)?;
    bundle.write(&rel, &buf)?;
    let report_rel = format!("{}_report.json", rel.trim_end_matches(".jsonl"));
    bundle.write_json(
        &report_rel,
        &json!({
            "annotator": job.annotator,
            "model": job.model,
            "mode": job.mode,
            "endpoint": job.endpoint,
            "temperature": job.temperature,
            "report": report,
        }),
    )?;
    bundle.finish()?;

    ctx.info(format!(
        "annotate: {} sentences, {} prompts, {} cached, {} network calls, {} retries",
        report.sentences, report.prompts, report.cache_hits, report.network_calls, report.retries
    ));
    if !report.gaps.is_empty() {
        for g in report.gaps.iter().take(5) {
            ctx.warn(format!("{} [{}]: {}", g.key, g.task, g.error));
        }
        let msg = format!(
            "{} prompts ended without labels; see {report_rel}",
            report.gaps.len()
        );
        if a.keep_going {
            ctx.warn(msg);
        } else {
            bail!("{msg} (rerun with --keep-going to accept partial output)");
        }
    }
    Ok(())
}
