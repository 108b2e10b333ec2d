use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Corpus, DomainTag, Episode, EpisodeHeader, RawTurn, Role, Speaker, Split};
use super::segment::segment_text;
use super::CorpusError;

/// Source formats understood by [`ingest_transcript`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    /// Canonical interchange: header line, then one line per turn.
    WhowJsonl,
    /// Debate transcripts with `Name (for)` style speaker labels.
    InsqJson,
    /// Radio panel transcripts with `NAME, host` style speaker labels.
    NprJson,
}

impl SourceFormat {
    pub fn parse(s: &str) -> Option<SourceFormat> {
        match s {
            "whow" | "whow_jsonl" => Some(SourceFormat::WhowJsonl),
            "insq" | "insq_json" => Some(SourceFormat::InsqJson),
            "npr" | "npr_json" => Some(SourceFormat::NprJson),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SourceFormat::WhowJsonl => "whow_jsonl",
            SourceFormat::InsqJson => "insq_json",
            SourceFormat::NprJson => "npr_json",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub merges: usize,
    pub segmented_turns: usize,
}

// Speaker-label suffix tables, matched case-insensitively. Unmatched labels
// become participants.
const INSQ_ROLES: &[(&str, Role)] = &[
    ("(mod)", Role::Moderator),
    ("(moderator)", Role::Moderator),
    ("(for)", Role::ForTeam),
    ("(against)", Role::AgainstTeam),
    ("(audience)", Role::AudienceMember),
];

const NPR_ROLES: &[(&str, Role)] = &[
    (", host", Role::Moderator),
    (", moderator", Role::Moderator),
    (", guest", Role::Participant),
    (", caller", Role::AudienceMember),
];

#[derive(Serialize, Deserialize)]
struct HeaderRecord {
    kind: String,
    id: String,
    domain: DomainTag,
    topic: String,
    split: String,
    speakers: Vec<Speaker>,
}

#[derive(Serialize, Deserialize)]
struct TurnRecord {
    kind: String,
    index: usize,
    speaker: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentences: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

#[derive(Deserialize)]
struct InsqEpisode {
    id: String,
    title: String,
    #[serde(default)]
    split: Option<String>,
    transcript: Vec<InsqTurn>,
}

#[derive(Deserialize)]
struct InsqTurn {
    speaker: String,
    #[serde(default)]
    paragraphs: Vec<String>,
    #[serde(default)]
    sentences: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct NprEpisode {
    id: String,
    title: String,
    #[serde(default)]
    split: Option<String>,
    utterances: Vec<NprUtterance>,
}

#[derive(Deserialize)]
struct NprUtterance {
    speaker: String,
    #[serde(default)]
    utterance: String,
    #[serde(default)]
    sentences: Option<Vec<String>>,
}

/// Parses one episode from `source` and returns it merged and validated.
pub fn ingest_transcript(source: &[u8], format: SourceFormat) -> Result<Episode, CorpusError> {
    ingest_transcript_with_stats(source, format).map(|(ep, _)| ep)
}

pub fn ingest_transcript_with_stats(
    source: &[u8],
    format: SourceFormat,
) -> Result<(Episode, IngestStats), CorpusError> {
    let text = decode_utf8(source)?;
    let (header, turns, segmented_turns) = match format {
        SourceFormat::WhowJsonl => parse_whow(text)?,
        SourceFormat::InsqJson => parse_insq(text)?,
        SourceFormat::NprJson => parse_npr(text)?,
    };
    let (episode, merges) = Episode::new(header, turns)?;
    Ok((
        episode,
        IngestStats {
            merges,
            segmented_turns,
        },
    ))
}

fn decode_utf8(source: &[u8]) -> Result<&str, CorpusError> {
    std::str::from_utf8(source).map_err(|e| {
        let line = source[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        CorpusError::InvalidUtf8 { line }
    })
}

fn malformed(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_split(raw: Option<&str>, line: usize) -> Result<Split, CorpusError> {
    let raw = raw.unwrap_or("unsplit");
    Split::parse(raw).ok_or_else(|| malformed(line, format!("unknown split `{raw}`")))
}

fn sentences_or_segment(
    sentences: Option<Vec<String>>,
    text: &str,
    segmented: &mut usize,
) -> Vec<String> {
    match sentences {
        Some(s) => s,
        None => {
            *segmented += 1;
            segment_text(text).into_iter().map(|s| s.text).collect()
        }
    }
}

type Parsed = (EpisodeHeader, Vec<RawTurn>, usize);

fn parse_whow(text: &str) -> Result<Parsed, CorpusError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (line_no, first) = lines.next().ok_or_else(|| malformed(1, "empty stream"))?;
    let header: HeaderRecord = serde_json::from_str(first)
        .map_err(|e| malformed(line_no, format!("episode header: {e}")))?;
    if header.kind != "episode" {
        return Err(malformed(
            line_no,
            format!("expected kind `episode`, found `{}`", header.kind),
        ));
    }
    let split = parse_split(Some(&header.split), line_no)?;
    let mut turns = Vec::new();
    let mut segmented = 0;
    for (line_no, line) in lines {
        let rec: TurnRecord =
            serde_json::from_str(line).map_err(|e| malformed(line_no, e.to_string()))?;
        if rec.kind != "turn" {
            return Err(malformed(
                line_no,
                format!("expected kind `turn`, found `{}`", rec.kind),
            ));
        }
        if rec.index != turns.len() {
            return Err(malformed(
                line_no,
                format!(
                    "turn index {} out of sequence (expected {})",
                    rec.index,
                    turns.len()
                ),
            ));
        }
        if rec.sentences.is_none() && rec.text.is_none() {
            return Err(malformed(
                line_no,
                "turn has neither `sentences` nor `text`",
            ));
        }
        let text = rec.text.unwrap_or_default();
        let sentences = sentences_or_segment(rec.sentences, &text, &mut segmented);
        turns.push(RawTurn::new(rec.speaker, sentences));
    }
    let header = EpisodeHeader {
        id: header.id,
        domain: header.domain,
        topic: header.topic,
        split,
        speakers: header.speakers,
    };
    Ok((header, turns, segmented))
}

fn split_role(label: &str, table: &[(&str, Role)]) -> (String, Role) {
    let trimmed = label.trim();
    let lower = trimmed.to_lowercase();
    for (suffix, role) in table {
        if lower.ends_with(suffix) {
            let name = trimmed[..trimmed.len() - suffix.len()].trim().to_string();
            return (name, *role);
        }
    }
    (trimmed.to_string(), Role::Participant)
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

/// Registers the speaker behind `label` (first occurrence wins) and returns its id.
fn register(speakers: &mut Vec<Speaker>, label: &str, table: &[(&str, Role)]) -> String {
    let (name, role) = split_role(label, table);
    let id = slug(&name);
    if !speakers.iter().any(|s| s.id == id) {
        speakers.push(Speaker::new(id.clone(), name, role));
    }
    id
}

fn json_error(e: serde_json::Error) -> CorpusError {
    malformed(e.line(), e.to_string())
}

fn parse_insq(text: &str) -> Result<Parsed, CorpusError> {
    let raw: InsqEpisode = serde_json::from_str(text).map_err(json_error)?;
    let split = parse_split(raw.split.as_deref(), 1)?;
    let mut speakers = Vec::new();
    let mut turns = Vec::new();
    let mut segmented = 0;
    for t in raw.transcript {
        let id = register(&mut speakers, &t.speaker, INSQ_ROLES);
        let joined = t.paragraphs.join(" ");
        turns.push(RawTurn::new(
            id,
            sentences_or_segment(t.sentences, &joined, &mut segmented),
        ));
    }
    let header = EpisodeHeader {
        id: raw.id,
        domain: DomainTag::Debate,
        topic: raw.title,
        split,
        speakers,
    };
    Ok((header, turns, segmented))
}

fn parse_npr(text: &str) -> Result<Parsed, CorpusError> {
    let raw: NprEpisode = serde_json::from_str(text).map_err(json_error)?;
    let split = parse_split(raw.split.as_deref(), 1)?;
    let mut speakers = Vec::new();
    let mut turns = Vec::new();
    let mut segmented = 0;
    for u in raw.utterances {
        let id = register(&mut speakers, &u.speaker, NPR_ROLES);
        turns.push(RawTurn::new(
            id,
            sentences_or_segment(u.sentences, &u.utterance, &mut segmented),
        ));
    }
    let header = EpisodeHeader {
        id: raw.id,
        domain: DomainTag::Panel,
        topic: raw.title,
        split,
        speakers,
    };
    Ok((header, turns, segmented))
}

/// Writes the canonical one-object-per-line form of an episode.
pub fn write_whow_jsonl<W: Write>(ep: &Episode, mut w: W) -> io::Result<()> {
    let header = HeaderRecord {
        kind: "episode".into(),
        id: ep.id().to_string(),
        domain: ep.domain(),
        topic: ep.topic().to_string(),
        split: ep.split().as_str().to_string(),
        speakers: ep.speakers().to_vec(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for turn in ep.turns() {
        let rec = TurnRecord {
            kind: "turn".into(),
            index: turn.index,
            speaker: turn.speaker_id.clone(),
            sentences: Some(turn.sentences.iter().map(|s| s.text.clone()).collect()),
            text: None,
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Loads every `*.jsonl` episode file in `dir` (sorted by file name).
pub fn read_corpus_dir(dir: &Path, name: &str) -> Result<Corpus, CorpusError> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut episodes = Vec::with_capacity(paths.len());
    for path in paths {
        let bytes = fs::read(&path)?;
        let ep =
            ingest_transcript(&bytes, SourceFormat::WhowJsonl).map_err(|e| CorpusError::File {
                path: path.display().to_string(),
                source: Box::new(e),
            })?;
        episodes.push(ep);
    }
    Corpus::new(name, episodes)
}
