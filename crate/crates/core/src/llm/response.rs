use serde_json::{json, Map, Value};
use thiserror::Error;

use super::prompt::{PromptMode, PROMPT_MOTIVE_ORDER};
use crate::corpus::Episode;
use crate::schema::{
    target_vocabulary, Annotation, DialogueAct, Dimension, Motive, MotiveSet, SentenceKey,
    TargetLabel,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("no JSON object in response")]
    NoJson,
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("unknown motive `{0}`")]
    UnknownMotive(String),
    #[error("unknown dialogue act `{0}`")]
    UnknownAct(String),
    #[error("unknown target speaker `{0}`")]
    UnknownTarget(String),
    #[error("verdict must be 0 or 1, got `{0}`")]
    BadVerdict(String),
}

/// A response that could not be turned into labels. Keeps the raw text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub raw: String,
}

/// Labels recovered from one response. Single-task answers fill one slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResponseFragment {
    /// Indexed like [`Motive::ALL`].
    pub motives: [Option<bool>; 3],
    pub act: Option<DialogueAct>,
    pub target: Option<TargetLabel>,
    pub reason: Option<String>,
}

impl ResponseFragment {
    pub fn merge(&mut self, other: ResponseFragment) {
        for (slot, v) in self.motives.iter_mut().zip(other.motives) {
            if v.is_some() {
                *slot = v;
            }
        }
        self.act = other.act.or(self.act);
        self.target = other.target.or(self.target.take());
        self.reason = match (self.reason.take(), other.reason) {
            (Some(a), Some(b)) => Some(format!("{a}\n{b}")),
            (a, b) => a.or(b),
        };
    }

    /// A full annotation once every dimension is present.
    pub fn into_annotation(self, key: SentenceKey, annotator: &str) -> Option<Annotation> {
        let [im, cm, sm] = self.motives;
        Some(Annotation {
            key,
            annotator: annotator.to_string(),
            motives: MotiveSet::new(im?, cm?, sm?),
            act: self.act?,
            target: self.target?,
            rationale: self.reason,
        })
    }

    pub fn from_annotation(a: &Annotation) -> ResponseFragment {
        ResponseFragment {
            motives: Motive::ALL.map(|m| Some(a.motives.get(m))),
            act: Some(a.act),
            target: Some(a.target.clone()),
            reason: a.rationale.clone(),
        }
    }
}

/// The first parseable JSON object in `raw`, skipping prose and code fences.
pub fn first_json_object(raw: &str) -> Option<Map<String, Value>> {
    let bytes = raw.as_bytes();
    let mut start = 0;
    while let Some(off) = raw[start..].find('{') {
        let open = start + off;
        let (mut depth, mut in_str, mut escaped) = (0usize, false, false);
        let mut end = None;
        for (i, &b) in bytes[open..].iter().enumerate() {
            if in_str {
                match b {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(open + i + 1);
                        break;
                    }
                }
                _ => {}
            }
        }
        if let Some(end) = end {
            if let Ok(Value::Object(map)) = serde_json::from_str(&raw[open..end]) {
                return Some(map);
            }
        }
        start = open + 1;
    }
    None
}

fn field<'a>(obj: &'a Map<String, Value>, names: &[&str]) -> Option<&'a Value> {
    names.iter().find_map(|n| obj.get(*n)).or_else(|| {
        obj.iter()
            .find(|(k, _)| names.iter().any(|n| k.trim().eq_ignore_ascii_case(n)))
            .map(|(_, v)| v)
    })
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.trim().to_string(),
        other => other.to_string(),
    }
}

fn parse_motives(v: &Value) -> Result<[Option<bool>; 3], ParseErrorKind> {
    let names: Vec<String> = match v {
        Value::Null => vec![],
        Value::Array(items) => items.iter().map(value_text).collect(),
        Value::String(s) => s.split(',').map(|p| p.trim().to_string()).collect(),
        other => return Err(ParseErrorKind::UnknownMotive(other.to_string())),
    };
    let mut set = MotiveSet::default();
    for name in names {
        if name.is_empty() || name.eq_ignore_ascii_case("none") {
            continue;
        }
        let m = Motive::parse(&name).ok_or_else(|| ParseErrorKind::UnknownMotive(name.clone()))?;
        set.set(m, true);
    }
    Ok(Motive::ALL.map(|m| Some(set.get(m))))
}

/// Maps an answer like `"7 (Jacob Weisberg- against)"`, `"7"`,
/// `"Support team"` or a speaker name to a label in the episode's
/// vocabulary. A name inside the parentheses wins over the number.
pub fn parse_target(text: &str, ep: &Episode) -> Option<TargetLabel> {
    let vocab = target_vocabulary(ep);
    let in_vocab = |t: TargetLabel| vocab.contains(&t).then_some(t);
    let text = text.trim().trim_matches('"').trim();
    let by_ordinal = |n: &str| {
        n.trim()
            .parse::<usize>()
            .ok()
            .and_then(|i| vocab.get(i).cloned())
    };
    if let Some(t) = by_ordinal(text) {
        return Some(t);
    }
    if let Some((num, rest)) = text.split_once('(') {
        if let Some(inner) = rest.trim_end().strip_suffix(')') {
            if num.trim().chars().all(|c| c.is_ascii_digit()) && !num.trim().is_empty() {
                return TargetLabel::resolve(inner, ep)
                    .and_then(in_vocab)
                    .or_else(|| by_ordinal(num));
            }
        }
    }
    TargetLabel::resolve(text, ep).and_then(in_vocab)
}

fn parse_verdict(v: &Value) -> Result<bool, ParseErrorKind> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) if n.as_f64() == Some(0.0) => Ok(false),
        Value::Number(n) if n.as_f64() == Some(1.0) => Ok(true),
        Value::String(s) if s.trim() == "0" => Ok(false),
        Value::String(s) if s.trim() == "1" => Ok(true),
        other => Err(ParseErrorKind::BadVerdict(value_text(other))),
    }
}

const ACT_KEYS: &[&str] = &["dialogue act", "dialogue_act", "act"];
const TARGET_KEYS: &[&str] = &[
    "target speaker(s)",
    "target speaker",
    "target speakers",
    "target",
];
const MOTIVE_KEYS: &[&str] = &["motives", "motive"];

/// Extracts labels from a model answer for the given prompt mode.
pub fn parse_response(
    raw: &str,
    mode: PromptMode,
    ep: &Episode,
) -> Result<ResponseFragment, ParseError> {
    parse_inner(raw, mode, ep).map_err(|kind| ParseError {
        kind,
        raw: raw.to_string(),
    })
}

fn parse_inner(
    raw: &str,
    mode: PromptMode,
    ep: &Episode,
) -> Result<ResponseFragment, ParseErrorKind> {
    let obj = first_json_object(raw).ok_or(ParseErrorKind::NoJson)?;
    let mut frag = ResponseFragment {
        reason: field(&obj, &["reason"]).map(value_text),
        ..ResponseFragment::default()
    };
    let want_act = matches!(mode, PromptMode::Multi | PromptMode::Single(Dimension::DA));
    let want_target = matches!(mode, PromptMode::Multi | PromptMode::Single(Dimension::TS));
    if want_act {
        let v = field(&obj, ACT_KEYS).ok_or(ParseErrorKind::MissingField("dialogue act"))?;
        let s = value_text(v);
        frag.act = Some(DialogueAct::parse(&s).ok_or(ParseErrorKind::UnknownAct(s))?);
    }
    if want_target {
        let v =
            field(&obj, TARGET_KEYS).ok_or(ParseErrorKind::MissingField("target speaker(s)"))?;
        let s = value_text(v);
        frag.target = Some(parse_target(&s, ep).ok_or(ParseErrorKind::UnknownTarget(s))?);
    }
    match mode {
        PromptMode::Multi => {
            let v = field(&obj, MOTIVE_KEYS).ok_or(ParseErrorKind::MissingField("motives"))?;
            frag.motives = parse_motives(v)?;
        }
        PromptMode::Single(dim) => {
            if let Some(m) = dim.motive() {
                let v = field(&obj, &["verdict"]).ok_or(ParseErrorKind::MissingField("verdict"))?;
                let i = Motive::ALL.iter().position(|x| *x == m).unwrap();
                frag.motives[i] = Some(parse_verdict(v)?);
            }
        }
    }
    Ok(frag)
}

fn target_answer(t: &TargetLabel, ep: &Episode) -> String {
    let i = target_vocabulary(ep).iter().position(|v| v == t);
    match i {
        Some(i) => format!("{i} ({})", t.prompt_name(ep)),
        None => t.prompt_name(ep),
    }
}

/// Writes labels in the answer format a model is asked for. Inverse of
/// [`parse_response`] on complete fragments.
pub fn render_response(frag: &ResponseFragment, mode: PromptMode, ep: &Episode) -> String {
    let reason = frag.reason.clone().unwrap_or_default();
    let value = match mode {
        PromptMode::Multi => {
            let motives: Vec<&str> = PROMPT_MOTIVE_ORDER
                .iter()
                .filter(|m| {
                    frag.motives[Motive::ALL.iter().position(|x| x == *m).unwrap()] == Some(true)
                })
                .map(|m| m.prompt_name())
                .collect();
            json!({
                "motives": motives,
                "dialogue act": frag.act.map(|a| a.prompt_name()),
                "target speaker(s)": frag.target.as_ref().map(|t| target_answer(t, ep)),
                "reason": reason,
            })
        }
        PromptMode::Single(Dimension::DA) => {
            json!({"dialogue act": frag.act.map(|a| a.prompt_name()), "reason": reason})
        }
        PromptMode::Single(Dimension::TS) => {
            json!({"target speaker(s)": frag.target.as_ref().map(|t| target_answer(t, ep)), "reason": reason})
        }
        PromptMode::Single(dim) => {
            let m = dim.motive().expect("motive dimension");
            let v =
                frag.motives[Motive::ALL.iter().position(|x| *x == m).unwrap()].unwrap_or(false);
            json!({"verdict": u8::from(v), "reason": reason})
        }
    };
    value.to_string()
}
