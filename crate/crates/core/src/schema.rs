//! The label space: motives (why), dialogue acts (how) and target speakers (who).

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{DomainTag, Episode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Motive {
    Informational,
    Coordinative,
    Social,
}

impl Motive {
    pub const ALL: [Motive; 3] = [Motive::Informational, Motive::Coordinative, Motive::Social];

    pub fn code(self) -> &'static str {
        match self {
            Motive::Informational => "IM",
            Motive::Coordinative => "CM",
            Motive::Social => "SM",
        }
    }

    /// Name used in prompts and model answers.
    pub fn prompt_name(self) -> &'static str {
        match self {
            Motive::Informational => "informational motive",
            Motive::Coordinative => "coordinative motive",
            Motive::Social => "social motive",
        }
    }

    pub fn parse(s: &str) -> Option<Motive> {
        let s = s.trim().to_ascii_lowercase();
        let s = s.strip_suffix(" motive").unwrap_or(&s);
        match s {
            "im" | "informational" | "information" => Some(Motive::Informational),
            "cm" | "coordinative" | "coordination" => Some(Motive::Coordinative),
            "sm" | "social" => Some(Motive::Social),
            _ => None,
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Motive::Informational => Dimension::IM,
            Motive::Coordinative => Dimension::CM,
            Motive::Social => Dimension::SM,
        }
    }
}

/// Multi-label motive flags. All-false is a legal value.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct MotiveSet {
    #[serde(rename = "IM")]
    pub informational: bool,
    #[serde(rename = "CM")]
    pub coordinative: bool,
    #[serde(rename = "SM")]
    pub social: bool,
}

impl MotiveSet {
    pub fn new(informational: bool, coordinative: bool, social: bool) -> Self {
        MotiveSet {
            informational,
            coordinative,
            social,
        }
    }

    pub fn get(&self, m: Motive) -> bool {
        match m {
            Motive::Informational => self.informational,
            Motive::Coordinative => self.coordinative,
            Motive::Social => self.social,
        }
    }

    pub fn set(&mut self, m: Motive, value: bool) {
        match m {
            Motive::Informational => self.informational = value,
            Motive::Coordinative => self.coordinative = value,
            Motive::Social => self.social = value,
        }
    }

    pub fn present(&self) -> impl Iterator<Item = Motive> + '_ {
        Motive::ALL.into_iter().filter(|m| self.get(*m))
    }

    pub fn is_empty(&self) -> bool {
        self.present().next().is_none()
    }

    /// All eight combinations, all-false first.
    pub fn all_combinations() -> Vec<MotiveSet> {
        (0..8u8)
            .map(|b| MotiveSet::new(b & 1 != 0, b & 2 != 0, b & 4 != 0))
            .collect()
    }
}

/// Mutually exclusive dialogue act. Declaration order is the default
/// tie-break priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DialogueAct {
    Probing,
    Confronting,
    Instruction,
    Interpretation,
    Supplement,
    Utility,
}

impl DialogueAct {
    pub const ALL: [DialogueAct; 6] = [
        DialogueAct::Probing,
        DialogueAct::Confronting,
        DialogueAct::Instruction,
        DialogueAct::Interpretation,
        DialogueAct::Supplement,
        DialogueAct::Utility,
    ];

    pub fn code(self) -> &'static str {
        match self {
            DialogueAct::Probing => "prob",
            DialogueAct::Confronting => "conf",
            DialogueAct::Instruction => "inst",
            DialogueAct::Interpretation => "inte",
            DialogueAct::Supplement => "supp",
            DialogueAct::Utility => "util",
        }
    }

    pub fn prompt_name(self) -> &'static str {
        match self {
            DialogueAct::Probing => "Probing",
            DialogueAct::Confronting => "Confronting",
            DialogueAct::Instruction => "Instruction",
            DialogueAct::Interpretation => "Interpretation",
            DialogueAct::Supplement => "Supplement",
            DialogueAct::Utility => "All Utility",
        }
    }

    pub fn parse(s: &str) -> Option<DialogueAct> {
        let s = s.trim().to_ascii_lowercase();
        let act = match s.as_str() {
            "prob" | "probing" => DialogueAct::Probing,
            "conf" | "confronting" => DialogueAct::Confronting,
            "inst" | "instruction" => DialogueAct::Instruction,
            "inte" | "interpretation" => DialogueAct::Interpretation,
            "supp" | "supplement" => DialogueAct::Supplement,
            "util" | "utility" | "all utility" => DialogueAct::Utility,
            _ => return None,
        };
        Some(act)
    }
}

impl Serialize for Motive {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl fmt::Display for DialogueAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for DialogueAct {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for DialogueAct {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        DialogueAct::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown dialogue act `{s}`")))
    }
}

/// Addressee of a moderator sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetLabel {
    /// A named non-moderator speaker, by speaker id.
    Speaker(String),
    Unknown,
    /// The moderator themself.
    SelfTarget,
    Everyone,
    Audience,
    SupportTeam,
    AgainstTeam,
    AllSpeakers,
}

impl TargetLabel {
    pub fn canonical(&self) -> String {
        match self {
            TargetLabel::Speaker(id) => format!("speaker:{id}"),
            other => other.group_name().expect("group label").to_string(),
        }
    }

    fn group_name(&self) -> Option<&'static str> {
        Some(match self {
            TargetLabel::Speaker(_) => return None,
            TargetLabel::Unknown => "unknown",
            TargetLabel::SelfTarget => "self",
            TargetLabel::Everyone => "everyone",
            TargetLabel::Audience => "audience",
            TargetLabel::SupportTeam => "support_team",
            TargetLabel::AgainstTeam => "against_team",
            TargetLabel::AllSpeakers => "all_speakers",
        })
    }

    /// Display form used in prompt option lists.
    pub fn prompt_name(&self, ep: &Episode) -> String {
        match self {
            TargetLabel::Speaker(id) => match ep.speaker(id) {
                Some(s) => match s.role {
                    crate::corpus::Role::ForTeam | crate::corpus::Role::AgainstTeam => {
                        format!("{}- {}", s.display_name, s.role.tag())
                    }
                    _ => s.display_name.clone(),
                },
                None => id.clone(),
            },
            TargetLabel::Unknown => "Unknown".into(),
            TargetLabel::SelfTarget => "Self".into(),
            TargetLabel::Everyone => "Everyone".into(),
            TargetLabel::Audience => "Audience".into(),
            TargetLabel::SupportTeam => "Support team".into(),
            TargetLabel::AgainstTeam => "Against team".into(),
            TargetLabel::AllSpeakers => "All speakers".into(),
        }
    }

    /// Parses a group label or `speaker:<id>`, accepting the naming
    /// variants found in published label files ("Support team",
    /// "support side", "All speakers", ...).
    pub fn parse_canonical(s: &str) -> Option<TargetLabel> {
        let trimmed = s.trim();
        if let Some(id) = trimmed.strip_prefix("speaker:") {
            let id = id.trim();
            return (!id.is_empty()).then(|| TargetLabel::Speaker(id.to_string()));
        }
        let norm: String = trimmed
            .to_lowercase()
            .chars()
            .map(|c| if c == '_' || c == '-' { ' ' } else { c })
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        Some(match norm.as_str() {
            "unknown" | "unknkown" => TargetLabel::Unknown,
            "self" | "moderator" => TargetLabel::SelfTarget,
            "everyone" => TargetLabel::Everyone,
            "audience" => TargetLabel::Audience,
            "support team" | "support side" | "for team" | "for side" => TargetLabel::SupportTeam,
            "against team" | "against side" => TargetLabel::AgainstTeam,
            "all speakers" => TargetLabel::AllSpeakers,
            _ => return None,
        })
    }

    /// Resolves a label string against an episode: canonical forms, speaker
    /// ids, or speaker display names (optionally with a `- for`/`- against`
    /// suffix).
    pub fn resolve(s: &str, ep: &Episode) -> Option<TargetLabel> {
        if let Some(label) = TargetLabel::parse_canonical(s) {
            return Some(label);
        }
        let wanted = s.trim();
        let base = wanted
            .rsplit_once('-')
            .filter(|(_, tag)| {
                matches!(
                    tag.trim().to_lowercase().as_str(),
                    "for" | "against" | "mod" | "speaker" | "audience"
                )
            })
            .map(|(name, _)| name.trim())
            .unwrap_or(wanted);
        let speaker = ep.speakers().iter().find(|sp| {
            sp.id == wanted
                || sp.display_name.eq_ignore_ascii_case(base)
                || sp.display_name.eq_ignore_ascii_case(wanted)
        })?;
        if speaker.is_moderator() {
            Some(TargetLabel::SelfTarget)
        } else {
            Some(TargetLabel::Speaker(speaker.id.clone()))
        }
    }

    /// True for labels naming one individual participant.
    pub fn is_individual(&self) -> bool {
        matches!(self, TargetLabel::Speaker(_))
    }
}

impl fmt::Display for TargetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl FromStr for TargetLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TargetLabel::parse_canonical(s).ok_or_else(|| format!("unknown target label `{s}`"))
    }
}

impl Serialize for TargetLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical())
    }
}

impl<'de> Deserialize<'de> for TargetLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The five annotation dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    DA,
    IM,
    CM,
    SM,
    TS,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::DA,
        Dimension::IM,
        Dimension::CM,
        Dimension::SM,
        Dimension::TS,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Dimension::DA => "DA",
            Dimension::IM => "IM",
            Dimension::CM => "CM",
            Dimension::SM => "SM",
            Dimension::TS => "TS",
        }
    }

    pub fn parse(s: &str) -> Option<Dimension> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.code().eq_ignore_ascii_case(s.trim()))
    }

    pub fn motive(self) -> Option<Motive> {
        match self {
            Dimension::IM => Some(Motive::Informational),
            Dimension::CM => Some(Motive::Coordinative),
            Dimension::SM => Some(Motive::Social),
            _ => None,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Address of one moderator sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SentenceKey {
    pub episode: String,
    pub turn: usize,
    pub sentence: usize,
}

impl SentenceKey {
    pub fn new(episode: impl Into<String>, turn: usize, sentence: usize) -> Self {
        SentenceKey {
            episode: episode.into(),
            turn,
            sentence,
        }
    }
}

impl fmt::Display for SentenceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}.{}", self.episode, self.turn, self.sentence)
    }
}

/// One annotator's judgement of one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub key: SentenceKey,
    /// `human:<id>`, `model:<name>:<mode>` or `consensus`.
    pub annotator: String,
    pub motives: MotiveSet,
    pub act: DialogueAct,
    pub target: TargetLabel,
    pub rationale: Option<String>,
}

/// Read access shared by raw and aggregated annotations.
pub trait Labeled {
    fn key(&self) -> &SentenceKey;
    fn motives(&self) -> MotiveSet;
    fn act(&self) -> DialogueAct;
    fn target(&self) -> &TargetLabel;

    /// The label on one dimension as a canonical string
    /// (`prob`, `true`/`false`, `speaker:eli`, ...).
    fn label(&self, dim: Dimension) -> String {
        match dim {
            Dimension::DA => self.act().code().to_string(),
            Dimension::TS => self.target().canonical(),
            m => self
                .motives()
                .get(m.motive().expect("motive dimension"))
                .to_string(),
        }
    }
}

impl Labeled for Annotation {
    fn key(&self) -> &SentenceKey {
        &self.key
    }
    fn motives(&self) -> MotiveSet {
        self.motives
    }
    fn act(&self) -> DialogueAct {
        self.act
    }
    fn target(&self) -> &TargetLabel {
        &self.target
    }
}

/// Target options for an episode, in prompt order: unknown, self,
/// everyone, audience (debate), one label per non-moderator speaker in
/// declaration order, the two team labels (debate), all speakers.
pub fn target_vocabulary(ep: &Episode) -> Vec<TargetLabel> {
    let debate = ep.domain() == DomainTag::Debate;
    let mut v = vec![
        TargetLabel::Unknown,
        TargetLabel::SelfTarget,
        TargetLabel::Everyone,
    ];
    if debate {
        v.push(TargetLabel::Audience);
    }
    v.extend(
        ep.participants()
            .map(|s| TargetLabel::Speaker(s.id.clone())),
    );
    if debate {
        v.push(TargetLabel::SupportTeam);
        v.push(TargetLabel::AgainstTeam);
    }
    v.push(TargetLabel::AllSpeakers);
    v
}

/// Distinct labels of one dimension in display order: acts in priority
/// order, `false` before `true`, targets as group labels around the
/// individual speakers (sorted by id). Unrecognised strings go last.
pub fn ordered_labels(dim: Dimension, labels: impl IntoIterator<Item = String>) -> Vec<String> {
    fn rank(dim: Dimension, label: &str) -> (usize, String) {
        let r = match dim {
            Dimension::DA => DialogueAct::parse(label).map(|a| a as usize),
            Dimension::TS => TargetLabel::parse_canonical(label).map(|t| match t {
                TargetLabel::Unknown => 0,
                TargetLabel::SelfTarget => 1,
                TargetLabel::Everyone => 2,
                TargetLabel::Audience => 3,
                TargetLabel::Speaker(_) => 4,
                TargetLabel::SupportTeam => 5,
                TargetLabel::AgainstTeam => 6,
                TargetLabel::AllSpeakers => 7,
            }),
            _ => match label {
                "false" => Some(0),
                "true" => Some(1),
                _ => None,
            },
        };
        (r.unwrap_or(usize::MAX), label.to_string())
    }
    let set: std::collections::BTreeSet<String> = labels.into_iter().collect();
    let mut out: Vec<String> = set.into_iter().collect();
    out.sort_by_key(|l| rank(dim, l));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("annotation belongs to episode `{found}`, not `{expected}`")]
    WrongEpisode { expected: String, found: String },
    #[error("sentence {0} does not exist")]
    NoSuchSentence(SentenceKey),
    #[error("sentence is not a moderator sentence")]
    NotModeratorSentence,
    #[error("label not in domain vocabulary: {0}")]
    TargetNotInVocabulary(String),
    #[error("annotator id is empty")]
    EmptyAnnotator,
}

/// Checks key resolution and target legality. Never panics; collects all
/// violations.
pub fn validate_annotation(a: &Annotation, ep: &Episode) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if a.key.episode != ep.id() {
        out.push(Violation::WrongEpisode {
            expected: ep.id().to_string(),
            found: a.key.episode.clone(),
        });
    } else {
        match ep.turns().get(a.key.turn) {
            Some(turn) if turn.sentences.get(a.key.sentence).is_some() => {
                if !ep.is_moderator_turn(turn) {
                    out.push(Violation::NotModeratorSentence);
                }
            }
            _ => out.push(Violation::NoSuchSentence(a.key.clone())),
        }
    }
    if !target_vocabulary(ep).contains(&a.target) {
        out.push(Violation::TargetNotInVocabulary(a.target.canonical()));
    }
    if a.annotator.trim().is_empty() {
        out.push(Violation::EmptyAnnotator);
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// (key, annotator) pairs that occur more than once.
pub fn duplicate_annotations(anns: &[Annotation]) -> Vec<(SentenceKey, String)> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for a in anns {
        if !seen.insert((&a.key, a.annotator.as_str())) {
            dups.push((a.key.clone(), a.annotator.clone()));
        }
    }
    dups
}

#[derive(Debug, Error)]
pub enum AnnotationFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Serialize, Deserialize)]
struct AnnotationRecord {
    episode: String,
    turn: usize,
    sentence: usize,
    annotator: String,
    motives: MotiveSet,
    act: DialogueAct,
    target: TargetLabel,
    rationale: Option<String>,
}

impl From<&Annotation> for AnnotationRecord {
    fn from(a: &Annotation) -> Self {
        AnnotationRecord {
            episode: a.key.episode.clone(),
            turn: a.key.turn,
            sentence: a.key.sentence,
            annotator: a.annotator.clone(),
            motives: a.motives,
            act: a.act,
            target: a.target.clone(),
            rationale: a.rationale.clone(),
        }
    }
}

impl From<AnnotationRecord> for Annotation {
    fn from(r: AnnotationRecord) -> Self {
        Annotation {
            key: SentenceKey::new(r.episode, r.turn, r.sentence),
            annotator: r.annotator,
            motives: r.motives,
            act: r.act,
            target: r.target,
            rationale: r.rationale,
        }
    }
}

pub fn annotation_to_json(a: &Annotation) -> String {
    serde_json::to_string(&AnnotationRecord::from(a)).expect("annotation serializes")
}

/// Reads the annotation JSONL format. Blank lines are skipped.
pub fn read_annotations<R: BufRead>(reader: R) -> Result<Vec<Annotation>, AnnotationFileError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord =
            serde_json::from_str(&line).map_err(|e| AnnotationFileError::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
        out.push(rec.into());
    }
    Ok(out)
}

pub fn write_annotations<W: Write>(anns: &[Annotation], mut w: W) -> io::Result<()> {
    for a in anns {
        w.write_all(annotation_to_json(a).as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
