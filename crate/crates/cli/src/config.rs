use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use whow_core::corpus::Split;
use whow_core::eval::ClassUniverse;

use crate::bundle::sha256_hex;

pub const SCHEMA_VERSION: u32 = 1;

/// A problem with the configuration file or flag values; reported as a
/// usage error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Which episodes a command looks at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitFilter {
    All,
    Only(Vec<Split>),
}

impl SplitFilter {
    pub fn parse(s: &str) -> Result<SplitFilter, ConfigError> {
        let s = s.trim();
        if s.is_empty() || s == "all" {
            return Ok(SplitFilter::All);
        }
        let mut splits = s
            .split(',')
            .map(|p| Split::parse(p).ok_or_else(|| bad(format!("unknown split `{}`", p.trim()))))
            .collect::<Result<Vec<_>, _>>()?;
        splits.sort();
        splits.dedup();
        Ok(SplitFilter::Only(splits))
    }

    pub fn keeps(&self, split: Split) -> bool {
        match self {
            SplitFilter::All => true,
            SplitFilter::Only(v) => v.contains(&split),
        }
    }

    pub fn render(&self) -> String {
        match self {
            SplitFilter::All => "all".into(),
            SplitFilter::Only(v) => v.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","),
        }
    }
}

/// Effective settings for one run: file values overridden by flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub human_annotations: Option<PathBuf>,
    pub resolutions: Option<PathBuf>,
    pub split: SplitFilter,
    pub source: String,
    pub tiebreak: String,
    pub seed: u64,
    pub per_sentence_counts: bool,
    pub zero_fill_conditionals: bool,
    pub class_universe: ClassUniverse,
    pub endpoint_url: String,
    pub model: Option<String>,
    pub mode: String,
    pub temperature: f64,
    pub concurrency: usize,
    pub retries: usize,
    pub rate_per_min: Option<f64>,
    pub timeout_secs: u64,
    pub cache_dir: Option<PathBuf>,
    pub templates: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            human_annotations: None,
            resolutions: None,
            split: SplitFilter::All,
            source: "consensus".into(),
            tiebreak: "priority".into(),
            seed: 0,
            per_sentence_counts: false,
            zero_fill_conditionals: false,
            class_universe: ClassUniverse::Union,
            endpoint_url: "http://localhost:8000/v1/chat/completions".into(),
            model: None,
            mode: "mt".into(),
            temperature: 0.0,
            concurrency: 4,
            retries: 3,
            rate_per_min: None,
            timeout_secs: 120,
            cache_dir: None,
            templates: None,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(format!("`{key}` expects true or false, got `{v}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| bad(format!("`{key}` expects a number, got `{v}`")))
}

pub fn parse_universe(v: &str) -> Result<ClassUniverse, ConfigError> {
    match v {
        "union" => Ok(ClassUniverse::Union),
        "gold" | "gold_only" => Ok(ClassUniverse::GoldOnly),
        _ => Err(bad(format!(
            "class universe must be `union` or `gold`, got `{v}`"
        ))),
    }
}

/// Splits `key = value` lines; `#` starts a comment line.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut pairs = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("config line {}: expected `key = value`", i + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if pairs.insert(k.clone(), v).is_some() {
            return Err(bad(format!("config line {}: `{k}` set twice", i + 1)));
        }
    }
    Ok(pairs)
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
        let mut pairs = parse_pairs(text)?;
        let version = pairs
            .remove("schema_version")
            .ok_or_else(|| bad("config lacks `schema_version`"))?;
        if version != SCHEMA_VERSION.to_string() {
            return Err(bad(format!(
                "config schema_version {version} is not supported (expected {SCHEMA_VERSION})"
            )));
        }
        let path = |v: &str| base.join(v);
        let mut c = RunConfig::default();
        for (k, v) in pairs {
            match k.as_str() {
                "corpus" => c.corpus = Some(path(&v)),
                "human_annotations" => c.human_annotations = Some(path(&v)),
                "resolutions" => c.resolutions = Some(path(&v)),
                "split" => c.split = SplitFilter::parse(&v)?,
                "source" => c.source = v,
                "tiebreak" => c.tiebreak = v,
                "seed" => c.seed = parse_num(&k, &v)?,
                "per_sentence_counts" => c.per_sentence_counts = parse_bool(&k, &v)?,
                "zero_fill_conditionals" => c.zero_fill_conditionals = parse_bool(&k, &v)?,
                "class_universe" => c.class_universe = parse_universe(&v)?,
                "endpoint_url" => c.endpoint_url = v,
                "model" => c.model = Some(v),
                "mode" => c.mode = v,
                "temperature" => c.temperature = parse_num(&k, &v)?,
                "concurrency" => c.concurrency = parse_num(&k, &v)?,
                "retries" => c.retries = parse_num(&k, &v)?,
                "rate_per_min" => c.rate_per_min = Some(parse_num(&k, &v)?),
                "timeout_secs" => c.timeout_secs = parse_num(&k, &v)?,
                "cache_dir" => c.cache_dir = Some(path(&v)),
                "templates" => c.templates = Some(path(&v)),
                _ => return Err(bad(format!("unknown config key `{k}`"))),
            }
        }
        // pure inputs must exist now; pipeline products are checked when used
        for (key, p) in [
            ("human_annotations", &c.human_annotations),
            ("resolutions", &c.resolutions),
            ("templates", &c.templates),
        ] {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(bad(format!(
                        "`{key}` refers to missing file {}",
                        p.display()
                    )));
                }
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text, path.parent().unwrap_or(Path::new("")))
    }

    /// Canonical `key = value` listing of every effective setting.
    pub fn canonical(&self) -> String {
        let p = |o: &Option<PathBuf>| {
            o.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let universe = match self.class_universe {
            ClassUniverse::Union => "union",
            ClassUniverse::GoldOnly => "gold",
        };
        let lines = [
            ("schema_version", SCHEMA_VERSION.to_string()),
            ("cache_dir", p(&self.cache_dir)),
            ("class_universe", universe.to_string()),
            ("concurrency", self.concurrency.to_string()),
            ("corpus", p(&self.corpus)),
            ("endpoint_url", self.endpoint_url.clone()),
            ("human_annotations", p(&self.human_annotations)),
            ("mode", self.mode.clone()),
            ("model", self.model.clone().unwrap_or_default()),
            ("per_sentence_counts", self.per_sentence_counts.to_string()),
            (
                "rate_per_min",
                self.rate_per_min.map(|r| r.to_string()).unwrap_or_default(),
            ),
            ("resolutions", p(&self.resolutions)),
            ("retries", self.retries.to_string()),
            ("seed", self.seed.to_string()),
            ("source", self.source.clone()),
            ("split", self.split.render()),
            ("temperature", self.temperature.to_string()),
            ("templates", p(&self.templates)),
            ("tiebreak", self.tiebreak.clone()),
            ("timeout_secs", self.timeout_secs.to_string()),
            (
                "zero_fill_conditionals",
                self.zero_fill_conditionals.to_string(),
            ),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.canonical().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_relative_to_base() {
        let c = RunConfig::parse(
            "# run\nschema_version = 1\ncorpus = data/corpus\nsplit = test, dev\nseed = 7\nper_sentence_counts = yes\n",
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(c.corpus, Some(PathBuf::from("/cfg/data/corpus")));
        assert_eq!(c.split, SplitFilter::Only(vec![Split::Dev, Split::Test]));
        assert_eq!(c.seed, 7);
        assert!(c.per_sentence_counts);
    }

    #[test]
    fn rejects_bad_files() {
        let base = Path::new(".");
        assert!(RunConfig::parse("corpus = x\n", base)
            .unwrap_err()
            .0
            .contains("schema_version"));
        assert!(RunConfig::parse("schema_version = 2\n", base)
            .unwrap_err()
            .0
            .contains("not supported"));
        assert!(RunConfig::parse("schema_version = 1\ncolour = red\n", base)
            .unwrap_err()
            .0
            .contains("unknown config key"));
        assert!(RunConfig::parse("schema_version = 1\nseed = x\n", base).is_err());
        assert!(RunConfig::parse(
            "schema_version = 1\nhuman_annotations = /nope/x.jsonl\n",
            base
        )
        .is_err());
    }

    #[test]
    fn hash_tracks_effective_values() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
