use anyhow::{anyhow, Result};
use serde_json::{json, Value};
use whow_core::eval::{confusion, evaluate, model_human_alpha, random_baseline, BASELINE_SEEDS};
use whow_core::schema::{Annotation, Dimension};
use whow_core::EvalReport;

use super::dim_names;
use crate::render::{self, Cell, Table};
use crate::sources::{by_domain, domains, load_labels, Source};
use crate::{Ctx, EvalArgs};

fn in_corpus(anns: &[Annotation], corpus: &whow_core::corpus::Corpus) -> Vec<Annotation> {
    anns.iter()
        .filter(|a| corpus.episode(&a.key.episode).is_some())
        .cloned()
        .collect()
}

pub fn run(ctx: &Ctx, args: &EvalArgs, dims: &[Dimension]) -> Result<()> {
    let gold_src = Source::parse(&args.gold)?;
    let preds = args
        .pred
        .iter()
        .map(|p| Source::parse(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut bundle = ctx.bundle("eval", "eval")?;
    let corpus = crate::sources::load_corpus(ctx, &mut bundle)?;
    let gold_all = load_labels(ctx, &mut bundle, &gold_src, &corpus)?;
    let pred_all = preds
        .iter()
        .map(|p| load_labels(ctx, &mut bundle, p, &corpus).map(|a| (p.id(), a)))
        .collect::<Result<Vec<_>>>()?;
    let seeds: Vec<u64> = BASELINE_SEEDS.iter().map(|s| s + ctx.config.seed).collect();
    let universe = ctx.config.class_universe;

    let mut f1 = Table::new("Macro-F1 against gold labels", dim_names(dims));
    let mut agreement = Table::new(
        "Agreement between gold labels and model labels (Krippendorff's alpha)",
        dim_names(dims),
    );
    f1.corner = "Model".into();
    agreement.corner = "Model".into();
    let mut classes = csv::Writer::from_writer(Vec::new());
    classes.write_record([
        "source",
        "domain",
        "dimension",
        "class",
        "precision",
        "recall",
        "f1",
        "support",
    ])?;
    let mut summary = Vec::new();
    let mut matrices = Vec::new();

    for domain in domains(&corpus) {
        let sub = by_domain(&corpus, domain);
        let gold = in_corpus(&gold_all, &sub);
        if gold.is_empty() {
            continue;
        }
        let d = domain.as_str();
        let mut random = Vec::new();
        let mut random_js = serde_json::Map::new();
        for &dim in dims {
            let v: f64 =
                random_baseline(&gold, &sub, dim, &seeds, universe).map_err(|e| anyhow!("{e}"))?;
            random.push(Cell::num(v));
            random_js.insert(dim.code().into(), json!(v));
        }
        f1.row(format!("Random ({d})"), random);
        summary.push(json!({ "model": "random", "domain": d, "macro_f1": random_js, "sentences": gold.len() }));

        for (id, pred) in &pred_all {
            let pred = in_corpus(pred, &sub);
            let report: EvalReport =
                evaluate(&gold, &pred, dims, universe).map_err(|e| anyhow!("{id} ({d}): {e}"))?;
            let mut f1_js = serde_json::Map::new();
            let mut alpha_js = serde_json::Map::new();
            let mut alpha_cells = Vec::new();
            for &dim in dims {
                let scores = &report.dimensions[&dim];
                f1_js.insert(dim.code().into(), json!(scores.macro_f1));
                for c in &scores.classes {
                    classes.write_record([
                        id.as_str(),
                        d,
                        dim.code(),
                        &c.class,
                        &c.precision.to_string(),
                        &c.recall.to_string(),
                        &c.f1.to_string(),
                        &c.support.to_string(),
                    ])?;
                }
                match model_human_alpha::<f64, _, _>(&gold, &pred, dim) {
                    Ok(a) => {
                        alpha_cells.push(Cell::num(a));
                        alpha_js.insert(dim.code().into(), json!(a));
                    }
                    Err(e) => {
                        alpha_cells.push(Cell::absent(e.to_string()));
                        alpha_js.insert(dim.code().into(), json!({ "error": e.to_string() }));
                    }
                }
                let m = confusion(&gold, &pred, dim).map_err(|e| anyhow!("{e}"))?;
                matrices.push(json!({
                    "source": id,
                    "domain": d,
                    "dimension": dim.code(),
                    "labels": m.labels,
                    "counts": m.counts,
                    "row_normalized": m.row_normalized::<f64>(),
                }));
            }
            f1.row(
                format!("{id} ({d})"),
                dims.iter()
                    .map(|dim| Cell::num(report.dimensions[dim].macro_f1))
                    .collect(),
            );
            agreement.row(format!("{id} ({d})"), alpha_cells);
            summary.push(json!({
                "model": id,
                "domain": d,
                "macro_f1": f1_js,
                "alpha": alpha_js,
                "sentences": gold.len(),
            }));
        }
    }
    f1.notes.push(format!(
        "Gold: {}. Random baseline: mean of seeds {:?}. Classes: {:?}.",
        gold_src.id(),
        seeds,
        universe
    ));

    let tables = [f1, agreement];
    bundle.write("tables/eval.md", render::markdown(&tables).as_bytes())?;
    bundle.write("tables/eval.csv", &render::csv(&tables)?)?;
    bundle.write("tables/eval_classes.csv", &classes.into_inner()?)?;
    bundle.write_json(
        "tables/eval.json",
        &json!({ "gold": gold_src.id(), "universe": universe, "seeds": seeds, "rows": summary }),
    )?;
    bundle.write_json("plots/confusion.json", &Value::Array(matrices))?;
    ctx.info(format!(
        "eval: {} gold sentences, {} label sources",
        gold_all.len(),
        pred_all.len()
    ));
    bundle.finish()
}
