use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;

use super::LlmError;
use crate::corpus::{DomainTag, Episode, Turn};
use crate::schema::{target_vocabulary, DialogueAct, Dimension, Motive, SentenceKey};

const DEFAULT_TEMPLATES: &str = include_str!("../../templates/prompts.toml");

/// Motive order used in prompts and answers.
pub const PROMPT_MOTIVE_ORDER: [Motive; 3] =
    [Motive::Informational, Motive::Social, Motive::Coordinative];
/// Act order used in prompts.
pub const PROMPT_ACT_ORDER: [DialogueAct; 6] = [
    DialogueAct::Probing,
    DialogueAct::Confronting,
    DialogueAct::Supplement,
    DialogueAct::Interpretation,
    DialogueAct::Instruction,
    DialogueAct::Utility,
];

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Scenario {
    pub debate: String,
    pub panel: String,
    pub generic: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct TaskText {
    pub motive: String,
    pub act: String,
    pub target: String,
    pub multi: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct SectionText {
    pub motive_single: String,
    pub motive_multi: String,
    pub act: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ContextText {
    pub before: String,
    pub target: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct LabelText {
    pub definition: String,
    pub examples: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct FormatText {
    pub verdict: String,
    pub act: String,
    pub target: String,
    pub multi: String,
}

/// All prompt text. Loaded from the bundled template file or a user copy.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Templates {
    pub retry_reminder: String,
    pub scenario: Scenario,
    pub task: TaskText,
    pub section: SectionText,
    pub context: ContextText,
    /// Keyed by motive code (`IM`), act code (`prob`) or `target`.
    pub labels: BTreeMap<String, LabelText>,
    pub format: FormatText,
}

impl Templates {
    pub fn parse(text: &str) -> Result<Templates, LlmError> {
        let t: Templates = toml::from_str(text).map_err(|e| LlmError::Template(e.to_string()))?;
        let required = Motive::ALL
            .iter()
            .map(|m| m.code())
            .chain(DialogueAct::ALL.iter().map(|a| a.code()))
            .chain(["target"]);
        for key in required {
            if !t.labels.contains_key(key) {
                return Err(LlmError::Template(format!("no label text for `{key}`")));
            }
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Templates, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Template(format!("{}: {e}", path.display())))?;
        Templates::parse(&text)
    }

    pub fn bundled_text() -> &'static str {
        DEFAULT_TEMPLATES
    }

    fn label(&self, key: &str) -> &LabelText {
        &self.labels[key]
    }
}

impl Default for Templates {
    fn default() -> Self {
        Templates::parse(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }
}

/// Which dimension(s) a prompt asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PromptMode {
    Single(Dimension),
    Multi,
}

impl PromptMode {
    /// The five single-task prompts for one sentence, in dispatch order.
    pub const SINGLE_TASKS: [PromptMode; 5] = [
        PromptMode::Single(Dimension::DA),
        PromptMode::Single(Dimension::TS),
        PromptMode::Single(Dimension::IM),
        PromptMode::Single(Dimension::CM),
        PromptMode::Single(Dimension::SM),
    ];

    /// Stable code used in cache keys.
    pub fn code(self) -> String {
        match self {
            PromptMode::Single(d) => format!("single:{}", d.code()),
            PromptMode::Multi => "multi".to_string(),
        }
    }
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub mode: PromptMode,
    /// Whole turns shown before the target's turn.
    pub context_before: usize,
    /// Whole turns shown after the target's turn.
    pub context_after: usize,
    pub templates: Templates,
}

impl PromptSpec {
    pub fn new(mode: PromptMode) -> Self {
        PromptSpec {
            mode,
            context_before: 5,
            context_after: 2,
            templates: Templates::default(),
        }
    }
}

fn speaker_tag(ep: &Episode, turn: &Turn) -> String {
    match ep.speaker(&turn.speaker_id) {
        Some(s) => format!("{} ({})", s.display_name, s.role.tag()),
        None => turn.speaker_id.clone(),
    }
}

fn render_lines(ep: &Episode, turn: &Turn, range: std::ops::Range<usize>) -> Option<String> {
    let text: Vec<&str> = turn.sentences[range]
        .iter()
        .map(|s| s.text.as_str())
        .collect();
    (!text.is_empty()).then(|| format!("{}: {}", speaker_tag(ep, turn), text.join(" ")))
}

/// Numbered target options: `"0 (Unknown)", "1 (Self)", ...`.
pub fn target_options(ep: &Episode) -> String {
    target_vocabulary(ep)
        .iter()
        .enumerate()
        .map(|(i, t)| format!("\"{i} ({})\"", t.prompt_name(ep)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn label_block(name: &str, text: &LabelText) -> String {
    format!("{name}: {} examples: {}", text.definition, text.examples)
}

/// Builds the annotation prompt for one moderator sentence.
///
/// Context windows are clamped to the episode. Sentences of the target's
/// own turn before and after it are shown with the prior and posterior
/// context respectively.
pub fn build_prompt(
    ep: &Episode,
    key: &SentenceKey,
    spec: &PromptSpec,
) -> Result<String, LlmError> {
    let t = &spec.templates;
    let turn = ep
        .turns()
        .get(key.turn)
        .filter(|turn| key.episode == ep.id() && key.sentence < turn.sentences.len())
        .ok_or_else(|| LlmError::BadKey(key.clone(), "no such sentence"))?;
    if !ep.is_moderator_turn(turn) {
        return Err(LlmError::BadKey(key.clone(), "not a moderator sentence"));
    }

    let mut parts: Vec<String> = Vec::new();
    let scenario = match ep.domain() {
        DomainTag::Debate => &t.scenario.debate,
        DomainTag::Panel => &t.scenario.panel,
        DomainTag::Generic => &t.scenario.generic,
    };
    parts.push(scenario.replace("{topic}", ep.topic()));

    match spec.mode {
        PromptMode::Single(dim) => match dim.motive() {
            Some(m) => {
                parts.push(t.task.motive.replace("{label}", m.prompt_name()));
                parts.push(t.section.motive_single.replace("{label}", m.prompt_name()));
                parts.push(label_block(m.prompt_name(), t.label(m.code())));
            }
            None if dim == Dimension::DA => {
                parts.push(t.task.act.clone());
                parts.push(act_section(t));
            }
            None => {
                parts.push(t.task.target.clone());
                parts.push(target_section(t));
            }
        },
        PromptMode::Multi => {
            parts.push(t.task.multi.clone());
            let mut motives = vec![t.section.motive_multi.clone()];
            motives.extend(
                PROMPT_MOTIVE_ORDER
                    .iter()
                    .map(|m| label_block(m.prompt_name(), t.label(m.code()))),
            );
            parts.push(motives.join("\n\n"));
            parts.push(act_section(t));
            parts.push(target_section(t));
        }
    }

    let turns = ep.turns();
    let mut before = vec![t.context.before.clone()];
    let first = key.turn.saturating_sub(spec.context_before);
    before.extend(
        turns[first..key.turn]
            .iter()
            .filter_map(|tu| render_lines(ep, tu, 0..tu.sentences.len())),
    );
    before.extend(render_lines(ep, turn, 0..key.sentence));
    parts.push(before.join("\n\n"));

    parts.push(format!(
        "{}\n\n{}",
        t.context.target,
        render_lines(ep, turn, key.sentence..key.sentence + 1).unwrap()
    ));

    let mut after = vec![t.context.after.clone()];
    after.extend(render_lines(
        ep,
        turn,
        key.sentence + 1..turn.sentences.len(),
    ));
    let last = (key.turn + 1 + spec.context_after).min(turns.len());
    after.extend(
        turns[key.turn + 1..last]
            .iter()
            .filter_map(|tu| render_lines(ep, tu, 0..tu.sentences.len())),
    );
    parts.push(after.join("\n\n"));

    let format = match spec.mode {
        PromptMode::Single(Dimension::DA) => t.format.act.clone(),
        PromptMode::Single(Dimension::TS) => {
            t.format.target.replace("{targets}", &target_options(ep))
        }
        PromptMode::Single(_) => t.format.verdict.clone(),
        PromptMode::Multi => t.format.multi.replace("{targets}", &target_options(ep)),
    };
    parts.push(format);
    Ok(parts.join("\n\n"))
}

fn act_section(t: &Templates) -> String {
    let mut out = vec![t.section.act.clone()];
    out.extend(
        PROMPT_ACT_ORDER
            .iter()
            .map(|a| label_block(a.prompt_name(), t.label(a.code()))),
    );
    out.join("\n\n")
}

fn target_section(t: &Templates) -> String {
    format!(
        "{}\n\n{}",
        t.section.target,
        label_block("Target speaker", t.label("target"))
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EpisodeHeader, RawTurn, Role, Speaker, Split};

    pub(crate) fn debate() -> Episode {
        let speakers = vec![
            Speaker::new("donvan", "John Donvan", Role::Moderator),
            Speaker::new("pariser", "Eli Pariser", Role::ForTeam),
            Speaker::new("vaidhyanathan", "Siva Vaidhyanathan", Role::ForTeam),
            Speaker::new("morozov", "Evgeny Morozov", Role::AgainstTeam),
            Speaker::new("weisberg", "Jacob Weisberg", Role::AgainstTeam),
        ];
        let header = EpisodeHeader {
            id: "internet".into(),
            domain: DomainTag::Debate,
            topic: "When It Comes To Politics, The Internet Is Closing Our Minds".into(),
            split: Split::Test,
            speakers,
        };
        let turns = vec![
            RawTurn::new("donvan", vec!["Welcome.".into()]),
            RawTurn::new("pariser", vec!["Just a little story.".into()]),
            RawTurn::new("morozov", vec!["That was your publicist.".into()]),
            RawTurn::new("pariser", vec!["Oh, I was wondering about that.".into()]),
            RawTurn::new(
                "donvan",
                vec![
                    "Let me-- Jacob, I think Eli left a pretty good image hanging out there."
                        .into(),
                    "That landed pretty well I think, so can you respond to that?".into(),
                ],
            ),
            RawTurn::new(
                "weisberg",
                vec!["But a guy who called into a radio show?".into()],
            ),
            RawTurn::new("donvan", vec!["Siva.".into()]),
            RawTurn::new("vaidhyanathan", vec!["Thanks.".into()]),
        ];
        Episode::new(header, turns).unwrap().0
    }

    #[test]
    fn single_motive_prompt_layout() {
        let ep = debate();
        let p = build_prompt(
            &ep,
            &SentenceKey::new("internet", 4, 1),
            &PromptSpec::new(PromptMode::Single(Dimension::IM)),
        )
        .unwrap();
        assert!(p.starts_with("Your role is an annotator, annotating the moderation behavior and speech of a debate TV show. The debate topic is \"When It Comes To Politics"));
        assert!(p.contains("please label if the target utterance carries informational motive?"));
        assert!(p.ends_with("{\"verdict\": 0 or 1,\"reason\": String} For example:  answer: {\"verdict\": 1, \"reason\": \"The moderator asks a question to Joe Smith aimed at eliciting his viewpoint or reaction to a statement from the recent policy change for combatting climate change......\"}"));
        let order = [
            "Dialogue context before the target sentence:",
            "Eli Pariser (for): Just a little story.",
            "Evgeny Morozov (against): That was your publicist.",
            "John Donvan (mod): Let me-- Jacob",
            "Target sentence:\n\nJohn Donvan (mod): That landed pretty well I think, so can you respond to that?",
            "Dialogue context after the target sentence:",
            "Jacob Weisberg (against): But a guy",
            "John Donvan (mod): Siva.",
        ];
        let mut at = 0;
        for piece in order {
            let found = p[at..]
                .find(piece)
                .unwrap_or_else(|| panic!("missing or out of order: {piece}"));
            at += found + piece.len();
        }
        assert!(
            !p.contains("Siva Vaidhyanathan (for): Thanks."),
            "posterior window is two turns"
        );
        assert!(!p.contains("social motive:"));
    }

    #[test]
    fn multi_prompt_lists_eleven_targets() {
        let ep = debate();
        let p = build_prompt(
            &ep,
            &SentenceKey::new("internet", 4, 1),
            &PromptSpec::new(PromptMode::Multi),
        )
        .unwrap();
        let expected = r#""target speaker(s)": String(one option from "0 (Unknown)", "1 (Self)", "2 (Everyone)", "3 (Audience)", "4 (Eli Pariser- for)", "5 (Siva Vaidhyanathan- for)", "6 (Evgeny Morozov- against)", "7 (Jacob Weisberg- against)", "8 (Support team)", "9 (Against team)", "10 (All speakers)"),"reason": String}"#;
        assert!(p.contains(expected), "{p}");
        for label in [
            "informational motive:",
            "social motive:",
            "coordinative motive:",
            "Probing:",
            "All Utility:",
            "Target speaker:",
        ] {
            assert!(p.contains(label), "{label}");
        }
    }

    #[test]
    fn first_turn_has_empty_prior_context() {
        let ep = debate();
        let p = build_prompt(
            &ep,
            &SentenceKey::new("internet", 0, 0),
            &PromptSpec::new(PromptMode::Single(Dimension::DA)),
        )
        .unwrap();
        assert!(p.contains("Dialogue context before the target sentence:\n\nTarget sentence:"));
    }

    #[test]
    fn prompt_is_deterministic_and_rejects_participant_keys() {
        let ep = debate();
        let spec = PromptSpec::new(PromptMode::Multi);
        let key = SentenceKey::new("internet", 6, 0);
        assert_eq!(
            build_prompt(&ep, &key, &spec).unwrap(),
            build_prompt(&ep, &key, &spec).unwrap()
        );
        assert!(build_prompt(&ep, &SentenceKey::new("internet", 1, 0), &spec).is_err());
        assert!(build_prompt(&ep, &SentenceKey::new("internet", 4, 9), &spec).is_err());
    }

    #[test]
    fn templates_require_every_label() {
        let broken = Templates::bundled_text().replace("[labels.supp]", "[labels.other]");
        assert!(matches!(
            Templates::parse(&broken),
            Err(LlmError::Template(_))
        ));
    }
}
