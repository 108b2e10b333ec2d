use std::collections::BTreeMap;

use anyhow::Result;
use serde_json::{json, Value};
use whow_core::analysis::{
    act_conditioned_transitions, compare_sources, compare_tables, conditional_table,
    state_sequence, transition_matrix, who_metrics, Cell as Slot, CellTest, LabelIndex, Side,
    SpeakerState, EPISODE_FINAL_IS_INTERACTIVE, EPISODE_INITIAL_IS_PROACTIVE,
};
use whow_core::corpus::{Corpus, DomainTag};
use whow_core::schema::{DialogueAct, Motive};
use whow_core::{ActTransitions, ConditionalTable, SourceComparison, TransitionMatrix, WhoMetrics};

use crate::bundle::Bundle;
use crate::render::{self, Cell, Table};
use crate::sources::{
    by_domain, domains, file_stem, label_index, load_corpus, load_labels, Source,
};
use crate::Ctx;

fn act_columns() -> Vec<String> {
    DialogueAct::ALL
        .iter()
        .map(|a| a.code().to_string())
        .collect()
}

/// Acts-given-motives table; `mark` decides the significance suffix of a cell.
fn conditional(title: String, t: &ConditionalTable, mark: &dyn Fn(Slot) -> &'static str) -> Table {
    let mut cols = act_columns();
    cols.push("p(m)".into());
    let mut table = Table::new(title, cols);
    let value = |slot: Slot, absent: &str| match t.value(slot) {
        Some(v) => Cell::marked(v, mark(slot)),
        None => Cell::absent(absent),
    };
    for motive in Motive::ALL {
        let mut cells: Vec<Cell> = DialogueAct::ALL
            .iter()
            .map(|&act| value(Slot::Conditional { motive, act }, "motive never occurs"))
            .collect();
        cells.push(value(Slot::Motive { motive }, "no labelled sentences"));
        table.row(motive.code(), cells);
    }
    let mut cells: Vec<Cell> = DialogueAct::ALL
        .iter()
        .map(|&act| value(Slot::Act { act }, "no labelled sentences"))
        .collect();
    cells.push(Cell::absent(""));
    table.row("p(d)", cells);
    table
}

fn star_for(tests: &[CellTest<f64>], side: Side) -> impl Fn(Slot) -> &'static str + '_ {
    move |slot| match tests.iter().find(|t| t.cell == slot) {
        Some(t) if t.outcome.flagged() == Some(side) => "*",
        _ => "",
    }
}

fn transitions(title: String, m: &TransitionMatrix) -> Table {
    let names: Vec<String> = SpeakerState::ALL
        .iter()
        .map(|s| s.code().to_string())
        .collect();
    let mut table = Table::new(title, names);
    for from in SpeakerState::ALL {
        let cells = SpeakerState::ALL
            .iter()
            .map(|&to| {
                if !TransitionMatrix::is_possible(from, to) {
                    Cell::absent("impossible")
                } else {
                    Cell::opt(m.prob(from, to), "no transitions from this state")
                }
            })
            .collect();
        table.row(from.code(), cells);
    }
    table
}

fn act_table(title: String, t: &ActTransitions) -> Table {
    let cols = ["continuation", "rotation", "transitions", "episode end"]
        .map(String::from)
        .to_vec();
    let mut table = Table::new(title, cols);
    for (act, row) in &t.rows {
        table.row(
            act.code(),
            vec![
                Cell::opt(row.p_continuation, "never followed by a participant"),
                Cell::opt(row.p_rotation, "never followed by a participant"),
                Cell::Count(row.continuation + row.rotation),
                Cell::Count(row.episode_end),
            ],
        );
    }
    table
}

fn warn_unannotated(ctx: &Ctx, source: &str, n: usize) {
    if n > 0 {
        ctx.warn(format!(
            "{n} moderator sentences have no `{source}` label and are left out"
        ));
    }
}

fn labels_for(
    ctx: &Ctx,
    bundle: &mut Bundle,
    source: &Source,
    corpus: &Corpus,
) -> Result<LabelIndex> {
    label_index(&load_labels(ctx, bundle, source, corpus)?)
}

pub fn run(ctx: &Ctx, compare: &[String]) -> Result<()> {
    let source = Source::parse(&ctx.config.source)?;
    let compare = compare
        .iter()
        .map(|s| Source::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut bundle = ctx.bundle("analyze", "analyze")?;
    let corpus = load_corpus(ctx, &mut bundle)?;
    let labels = labels_for(ctx, &mut bundle, &source, &corpus)?;
    let zero_fill = ctx.config.zero_fill_conditionals;
    let per_sentence = ctx.config.per_sentence_counts;
    let doms = domains(&corpus);
    let subs: Vec<(DomainTag, Corpus)> = doms.iter().map(|&d| (d, by_domain(&corpus, d))).collect();

    // acts given motives, with stars from the cross-domain test
    let cond: Vec<(DomainTag, ConditionalTable)> = subs
        .iter()
        .map(|(d, c)| (*d, conditional_table(c, &labels, zero_fill)))
        .collect();
    warn_unannotated(
        ctx,
        &source.id(),
        cond.iter().map(|(_, t)| t.unannotated.len()).sum(),
    );
    let tests: Vec<CellTest<f64>> = match cond.as_slice() {
        [(_, a), (_, b)] => compare_tables(a, b),
        _ => Vec::new(),
    };
    let mut tables = Vec::new();
    for (i, (d, t)) in cond.iter().enumerate() {
        let side = if i == 0 { Side::A } else { Side::B };
        let plural = if t.episode_count == 1 { "" } else { "s" };
        let title = format!(
            "Acts given motives, {} ({} episode{plural})",
            d.as_str(),
            t.episode_count
        );
        tables.push(conditional(title, t, &star_for(&tests, side)));
    }
    if let Some(first) = tables.first_mut() {
        first.notes.push(match cond.as_slice() {
            [(a, _), (b, _)] => format!(
                "* marks a significantly larger value than in the other domain ({} vs {}; Welch t-test, two-sided, p <= 0.05).",
                a.as_str(),
                b.as_str()
            ),
            _ => "Cross-domain significance needs exactly two domains; no cells are marked.".into(),
        });
        first.notes.push(format!(
            "Source: {}. Episodes without a motive are {} that row's mean.",
            source.id(),
            if zero_fill {
                "counted as zeros in"
            } else {
                "left out of"
            }
        ));
    }
    bundle.write(
        "tables/conditional.md",
        render::markdown(&tables).as_bytes(),
    )?;
    bundle.write("tables/conditional.csv", &render::csv(&tables)?)?;
    let domains_js: BTreeMap<&str, &ConditionalTable> =
        cond.iter().map(|(d, t)| (d.as_str(), t)).collect();
    bundle.write_json(
        "tables/conditional.json",
        &json!({ "source": source.id(), "zero_fill": zero_fill, "domains": domains_js, "cross_domain_tests": tests }),
    )?;

    // speaker-state transitions
    let mut tables = Vec::new();
    let mut trans_js = serde_json::Map::new();
    for (d, c) in &subs {
        let seqs: Vec<_> = c
            .sorted_episodes()
            .into_iter()
            .map(state_sequence)
            .collect();
        match transition_matrix::<f64>(&seqs) {
            Ok(m) => {
                tables.push(transitions(
                    format!("Speaker-state transitions, {}", d.as_str()),
                    &m,
                ));
                trans_js.insert(d.as_str().into(), json!(m));
            }
            Err(e) => {
                ctx.warn(format!("{}: {e}", d.as_str()));
                trans_js.insert(d.as_str().into(), json!({ "error": e.to_string() }));
            }
        }
    }
    if let Some(first) = tables.first_mut() {
        first.notes.push(
            "Rows are the current state, columns the next; -- marks impossible transitions.".into(),
        );
    }
    bundle.write(
        "tables/transitions.md",
        render::markdown(&tables).as_bytes(),
    )?;
    bundle.write("tables/transitions.csv", &render::csv(&tables)?)?;
    bundle.write_json("tables/transitions.json", &Value::Object(trans_js))?;

    // next-speaker state after each act
    let mut tables = Vec::new();
    let mut plot = serde_json::Map::new();
    for (d, c) in &subs {
        let t: ActTransitions = act_conditioned_transitions(c, &labels, per_sentence);
        tables.push(act_table(
            format!("Next speaker after each moderator act, {}", d.as_str()),
            &t,
        ));
        let bars: Vec<Value> = t
            .rows
            .iter()
            .map(|(act, r)| {
                json!({
                    "act": act.code(),
                    "continuation": r.p_continuation,
                    "rotation": r.p_rotation,
                    "counts": { "continuation": r.continuation, "rotation": r.rotation, "episode_end": r.episode_end },
                })
            })
            .collect();
        plot.insert(d.as_str().into(), Value::Array(bars));
    }
    bundle.write(
        "tables/act_transitions.md",
        render::markdown(&tables).as_bytes(),
    )?;
    bundle.write("tables/act_transitions.csv", &render::csv(&tables)?)?;
    bundle.write_json(
        "plots/act_transitions.json",
        &json!({ "source": source.id(), "per_sentence_counts": per_sentence, "series": ["continuation", "rotation"], "domains": plot }),
    )?;

    // target-speaker metrics
    let cols = ["Pro-activity", "Interactivity", "Specificity", "M"]
        .map(String::from)
        .to_vec();
    let mut who = Table::new(
        "Moderator target selection (share of moderator turns)",
        cols,
    );
    let mut who_js = serde_json::Map::new();
    for (d, c) in &subs {
        let w: WhoMetrics = who_metrics(c, &labels);
        who.row(
            d.as_str(),
            vec![
                Cell::num(w.pro_activity),
                Cell::num(w.interactivity),
                Cell::num(w.specificity),
                Cell::Count(w.moderator_turns as u64),
            ],
        );
        who_js.insert(d.as_str().into(), json!(w));
    }
    who.notes.push(format!(
        "Episode-opening turns count as pro-active: {EPISODE_INITIAL_IS_PROACTIVE}. Episode-closing turns count as interactive: {EPISODE_FINAL_IS_INTERACTIVE}."
    ));
    bundle.write("tables/who.md", who.markdown().as_bytes())?;
    bundle.write("tables/who.csv", &render::csv(std::slice::from_ref(&who))?)?;
    bundle.write_json("tables/who.json", &Value::Object(who_js))?;

    // pairwise source comparison
    let indexes = compare
        .iter()
        .map(|s| labels_for(ctx, &mut bundle, s, &corpus).map(|i| (s.id(), i)))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..indexes.len() {
        for j in i + 1..indexes.len() {
            let ((a, ia), (b, ib)) = (&indexes[i], &indexes[j]);
            let mut tables = Vec::new();
            let mut js = serde_json::Map::new();
            for (d, c) in &subs {
                let cmp: SourceComparison = compare_sources(c, ia, ib, zero_fill);
                if !cmp.coverage_mismatch.is_empty() {
                    ctx.warn(format!(
                        "{}: {} sentences are labelled by only one of `{a}` and `{b}`",
                        d.as_str(),
                        cmp.coverage_mismatch.len()
                    ));
                }
                let title = |s: &str| format!("Acts given motives, {} ({s})", d.as_str());
                tables.push(conditional(
                    title(a),
                    &cmp.left,
                    &star_for(&cmp.tests, Side::A),
                ));
                tables.push(conditional(
                    title(b),
                    &cmp.right,
                    &star_for(&cmp.tests, Side::B),
                ));
                js.insert(d.as_str().into(), json!(cmp));
            }
            if let Some(first) = tables.first_mut() {
                first.notes.push(
                    "* marks a significantly larger value than the other source over the same episodes (Welch t-test, two-sided, p <= 0.05)."
                        .into(),
                );
            }
            let stem = format!("tables/compare_{}_vs_{}", file_stem(a), file_stem(b));
            bundle.write(&format!("{stem}.md"), render::markdown(&tables).as_bytes())?;
            bundle.write(&format!("{stem}.csv"), &render::csv(&tables)?)?;
            bundle.write_json(
                &format!("{stem}.json"),
                &json!({ "left": a, "right": b, "domains": js }),
            )?;
        }
    }
    ctx.info(format!(
        "analyze: {} episodes, source {}",
        corpus.len(),
        source.id()
    ));
    bundle.finish()
}
