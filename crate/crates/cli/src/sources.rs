use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use whow_core::analysis::LabelIndex;
use whow_core::corpus::{ingest_transcript, Corpus, DomainTag, SourceFormat};
use whow_core::schema::{read_annotations, validate_annotation, Annotation};

use crate::bundle::Bundle;
use crate::config::ConfigError;
use crate::Ctx;

/// File-name-safe form of an id.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Loads the corpus directory, keeping episodes in the configured splits.
pub fn load_corpus(ctx: &Ctx, bundle: &mut Bundle) -> Result<Corpus> {
    let dir = ctx.corpus_dir();
    if !dir.is_dir() {
        bail!(
            "corpus directory {} not found (produce it with `whow ingest`)",
            dir.display()
        );
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!(
            "corpus directory {} holds no .jsonl episodes (produce them with `whow ingest`)",
            dir.display()
        );
    }
    let mut episodes = Vec::new();
    for p in paths {
        let bytes = bundle.read_input(&p)?;
        let ep = ingest_transcript(&bytes, SourceFormat::WhowJsonl)
            .with_context(|| format!("{}", p.display()))?;
        if ctx.config.split.keeps(ep.split()) {
            episodes.push(ep);
        }
    }
    if episodes.is_empty() {
        bail!(
            "no episodes in {} match split `{}`",
            dir.display(),
            ctx.config.split.render()
        );
    }
    Ok(Corpus::new("corpus", episodes)?)
}

/// Domains present in the corpus, in table order.
pub fn domains(corpus: &Corpus) -> Vec<DomainTag> {
    let mut d: Vec<DomainTag> = corpus.episodes().iter().map(|e| e.domain()).collect();
    d.sort();
    d.dedup();
    d
}

pub fn by_domain(corpus: &Corpus, domain: DomainTag) -> Corpus {
    corpus.filter(|e| e.domain() == domain)
}

/// Where a label set comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Human,
    Consensus,
    Model { name: String, mode: String },
}

impl Source {
    pub fn parse(s: &str) -> Result<Source, ConfigError> {
        match s {
            "human" => Ok(Source::Human),
            "consensus" => Ok(Source::Consensus),
            _ => {
                let rest = s.strip_prefix("model:").ok_or_else(|| {
                    ConfigError(format!(
                        "unknown label source `{s}` (human, consensus or model:<name>)"
                    ))
                })?;
                let (name, mode) = match rest.rsplit_once(':') {
                    Some((n, m)) if m == "mt" || m == "st" => (n, m),
                    _ => (rest, "mt"),
                };
                if name.is_empty() {
                    return Err(ConfigError(format!(
                        "label source `{s}` lacks a model name"
                    )));
                }
                Ok(Source::Model {
                    name: name.into(),
                    mode: mode.into(),
                })
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            Source::Human => "human".into(),
            Source::Consensus => "consensus".into(),
            Source::Model { name, mode } => format!("model:{name}:{mode}"),
        }
    }

    pub fn path(&self, ctx: &Ctx) -> Result<PathBuf> {
        match self {
            Source::Human => ctx.config.human_annotations.clone().ok_or_else(|| {
                ConfigError(
                    "no human annotation file (pass --annotations or set `human_annotations`)"
                        .into(),
                )
                .into()
            }),
            Source::Consensus => Ok(ctx.out.join("annotations/consensus.jsonl")),
            Source::Model { name, mode } => Ok(ctx.out.join(model_output(name, mode))),
        }
    }

    fn producer(&self) -> String {
        match self {
            Source::Human => "the human annotation export".into(),
            Source::Consensus => "`whow aggregate`".into(),
            Source::Model { name, mode } => format!("`whow annotate --model {name} --mode {mode}`"),
        }
    }
}

pub fn model_output(name: &str, mode: &str) -> String {
    format!("annotations/model_{}_{mode}.jsonl", file_stem(name))
}

fn read_file(bundle: &mut Bundle, path: &Path, producer: &str) -> Result<Vec<Annotation>> {
    if !path.exists() {
        bail!("{} not found (produced by {producer})", path.display());
    }
    let bytes = bundle.read_input(path)?;
    read_annotations(&bytes[..]).with_context(|| format!("{}", path.display()))
}

/// Annotations for episodes in `corpus`, validated against them. Labels
/// for episodes outside the corpus (other splits) are dropped.
pub fn load_annotations(
    bundle: &mut Bundle,
    path: &Path,
    producer: &str,
    corpus: &Corpus,
) -> Result<Vec<Annotation>> {
    let all = read_file(bundle, path, producer)?;
    let mut out = Vec::with_capacity(all.len());
    let mut problems = Vec::new();
    for a in all {
        let Some(ep) = corpus.episode(&a.key.episode) else {
            continue;
        };
        match validate_annotation(&a, ep) {
            Ok(()) => out.push(a),
            Err(v) => problems.push(format!("{} ({}): {:?}", a.key, a.annotator, v)),
        }
    }
    if !problems.is_empty() {
        let shown = problems
            .iter()
            .take(5)
            .cloned()
            .collect::<Vec<_>>()
            .join("; ");
        bail!(
            "{}: {} invalid annotations: {shown}",
            path.display(),
            problems.len()
        );
    }
    Ok(out)
}

/// One label per sentence from `source`.
pub fn load_labels(
    ctx: &Ctx,
    bundle: &mut Bundle,
    source: &Source,
    corpus: &Corpus,
) -> Result<Vec<Annotation>> {
    let path = source.path(ctx)?;
    let anns = load_annotations(bundle, &path, &source.producer(), corpus)?;
    let mut per_key: BTreeMap<_, usize> = BTreeMap::new();
    for a in &anns {
        *per_key.entry(&a.key).or_default() += 1;
    }
    if let Some((key, n)) = per_key.iter().find(|(_, n)| **n > 1) {
        return Err(anyhow!(
            "source `{}` has {n} labels for sentence {key}; aggregate them first and use `consensus`",
            source.id()
        ));
    }
    Ok(anns)
}

pub fn label_index(anns: &[Annotation]) -> Result<LabelIndex> {
    LabelIndex::from_labeled(anns).map_err(|e| anyhow!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_ids() {
        assert_eq!(Source::parse("consensus").unwrap(), Source::Consensus);
        assert_eq!(
            Source::parse("model:gpt-4o").unwrap(),
            Source::Model {
                name: "gpt-4o".into(),
                mode: "mt".into()
            }
        );
        assert_eq!(
            Source::parse("model:org:x:st").unwrap().id(),
            "model:org:x:st"
        );
        assert!(Source::parse("gpt").is_err());
        assert!(Source::parse("model:").is_err());
        assert_eq!(
            model_output("org/x:1", "st"),
            "annotations/model_org_x_1_st.jsonl"
        );
    }
}
