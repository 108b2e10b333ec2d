use std::collections::BTreeSet;

use anyhow::Result;
use serde_json::{json, Value};
use whow_core::aggregate::{annotator_alpha, vote_cooccurrence};
use whow_core::corpus::{Corpus, DomainTag, Split};
use whow_core::schema::{Annotation, Dimension};
use whow_core::AlphaReport;

use super::dim_names;
use crate::render::{self, Cell, Table};
use crate::sources::{domains, load_annotations, load_corpus, Source};
use crate::Ctx;

fn subset(
    anns: &[Annotation],
    corpus: &Corpus,
    keep: impl Fn(DomainTag, Split) -> bool,
) -> Vec<Annotation> {
    anns.iter()
        .filter(|a| {
            corpus
                .episode(&a.key.episode)
                .is_some_and(|e| keep(e.domain(), e.split()))
        })
        .cloned()
        .collect()
}

fn alpha_row(report: &AlphaReport, dims: &[Dimension]) -> (Vec<Cell>, Value) {
    let mut cells = Vec::new();
    let mut js = serde_json::Map::new();
    for d in dims {
        match &report.alpha[d] {
            Ok(v) => {
                cells.push(Cell::num(*v));
                js.insert(d.code().into(), json!(v));
            }
            Err(e) => {
                cells.push(Cell::absent(e.to_string()));
                js.insert(d.code().into(), json!({ "error": e.to_string() }));
            }
        }
    }
    (
        cells,
        json!({ "alpha": js, "units": report.unit_count, "annotators": report.annotator_count }),
    )
}

pub fn run(ctx: &Ctx, dims: &[Dimension]) -> Result<()> {
    let mut bundle = ctx.bundle("agree", "agree")?;
    let corpus = load_corpus(ctx, &mut bundle)?;
    let path = Source::Human.path(ctx)?;
    let anns = load_annotations(&mut bundle, &path, "the human annotation export", &corpus)?;

    let mut pooled = Table::new(
        "Inter-annotator agreement (Krippendorff's alpha)",
        dim_names(dims),
    );
    let mut per_split = Table::new("Inter-annotator agreement by split", dim_names(dims));
    let mut rows = Vec::new();
    let mut plots = serde_json::Map::new();
    for domain in domains(&corpus) {
        let dom = subset(&anns, &corpus, |d, _| d == domain);
        if dom.is_empty() {
            continue;
        }
        let report: AlphaReport = annotator_alpha(&dom, dims);
        let (cells, js) = alpha_row(&report, dims);
        pooled.row(domain.as_str(), cells);
        rows.push(
            json!({ "domain": domain.as_str(), "split": ctx.config.split.render(), "result": js }),
        );

        let splits: BTreeSet<Split> = dom
            .iter()
            .filter_map(|a| corpus.episode(&a.key.episode))
            .map(|e| e.split())
            .collect();
        for split in &splits {
            let part = subset(&anns, &corpus, |d, s| d == domain && s == *split);
            let report: AlphaReport = annotator_alpha(&part, dims);
            let (cells, js) = alpha_row(&report, dims);
            per_split.row(format!("{} ({})", domain.as_str(), split.as_str()), cells);
            rows.push(json!({ "domain": domain.as_str(), "split": split.as_str(), "result": js }));
        }

        let m = vote_cooccurrence(&dom, Dimension::DA);
        plots.insert(
            domain.as_str().into(),
            json!({
                "dimension": "DA",
                "labels": m.labels,
                "counts": m.counts,
                "row_normalized": m.row_normalized::<f64>(),
            }),
        );
    }
    pooled.notes.push(format!(
        "Splits: {}. Undefined values are shown as --.",
        ctx.config.split.render()
    ));
    let tables = [pooled, per_split];
    bundle.write("tables/agreement.md", render::markdown(&tables).as_bytes())?;
    bundle.write("tables/agreement.csv", &render::csv(&tables)?)?;
    bundle.write_json(
        "tables/agreement.json",
        &json!({ "dimensions": dim_names(dims), "rows": rows }),
    )?;
    bundle.write_json("plots/vote_cooccurrence.json", &Value::Object(plots))?;
    ctx.info(format!(
        "agree: {} annotations over {} episodes",
        anns.len(),
        corpus.len()
    ));
    bundle.finish()
}
