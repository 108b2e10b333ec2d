mod support;

use std::fs;

use support::{check, fixtures, pipeline, read_json, snapshot, whow, whow_bare, MODEL};

fn code(out: &std::process::Output) -> Option<i32> {
    out.status.code()
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ingest_both(out: &std::path::Path) {
    for (fmt, dir) in [("insq", "raw/insq"), ("npr", "raw/npr")] {
        let input = fixtures().join(dir);
        check(
            &whow(
                out,
                &["ingest", "--format", fmt, "--in", input.to_str().unwrap()],
            ),
            "ingest",
        )
        .unwrap();
    }
}

#[test]
fn unknown_format_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = whow_bare(dir.path(), &["ingest", "--format", "srt", "--in", "x"]);
    assert_eq!(code(&out), Some(2));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "schema_version = 1\ncolour = blue\n").unwrap();
    let out = whow_bare(dir.path(), &["--config", conf.to_str().unwrap(), "report"]);
    assert_eq!(code(&out), Some(2));
    assert!(stderr(&out).contains("colour"));
    fs::write(&conf, "seed = 3\n").unwrap();
    assert_eq!(
        code(&whow_bare(
            dir.path(),
            &["--config", conf.to_str().unwrap(), "report"]
        )),
        Some(2)
    );
}

#[test]
fn ingest_writes_one_file_per_episode_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    ingest_both(dir.path());
    let first = snapshot(dir.path());
    let corpus: Vec<&String> = first.keys().filter(|k| k.starts_with("corpus")).collect();
    assert_eq!(corpus.len(), 2, "{corpus:?}");
    ingest_both(dir.path());
    assert_eq!(first, snapshot(dir.path()));
}

#[test]
fn missing_corpus_names_the_producing_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = whow(dir.path(), &["aggregate"]);
    assert_eq!(code(&out), Some(1));
    assert!(stderr(&out).contains("whow ingest"), "{}", stderr(&out));
}

#[test]
fn rerunning_a_step_replaces_its_manifest_entry() {
    let dir = tempfile::tempdir().unwrap();
    ingest_both(dir.path());
    for _ in 0..2 {
        check(&whow(dir.path(), &["agree", "--dims", "DA,TS"]), "agree").unwrap();
    }
    let manifest = read_json(&dir.path().join("manifest.json"));
    let steps = manifest["steps"].as_object().unwrap();
    assert_eq!(steps.keys().filter(|k| k.starts_with("agree")).count(), 1);
    let outputs = steps["agree"]["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o["path"] == "tables/agreement.md"));
    let md = fs::read_to_string(dir.path().join("tables/agreement.md")).unwrap();
    assert!(md.contains("| DA | TS |"), "{md}");
}

#[test]
fn uncached_prompts_against_a_dead_endpoint_are_gaps() {
    let dir = tempfile::tempdir().unwrap();
    ingest_both(dir.path());
    let cache = dir.path().join("fresh-cache");
    let cache = cache.to_str().unwrap();
    let args = [
        "annotate",
        "--cache",
        cache,
        "--episodes",
        "panel-water-rights",
    ];
    let out = whow(dir.path(), &args);
    assert_eq!(code(&out), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("--keep-going"));
    let mut keep = args.to_vec();
    keep.push("--keep-going");
    assert_eq!(code(&whow(dir.path(), &keep)), Some(0));
    let report = read_json(&dir.path().join("annotations/model_gpt-4o_mt_report.json"));
    assert_eq!(report["report"]["gaps"].as_array().unwrap().len(), 12);
    assert_eq!(report["report"]["annotations"], 0);
}

#[test]
fn shipped_cache_covers_both_prompt_modes() {
    let dir = tempfile::tempdir().unwrap();
    ingest_both(dir.path());
    check(
        &whow(dir.path(), &["annotate", "--mode", "st"]),
        "annotate st",
    )
    .unwrap();
    let report = read_json(&dir.path().join("annotations/model_gpt-4o_st_report.json"));
    assert_eq!(report["report"]["prompts"], 140);
    assert_eq!(report["report"]["network_calls"], 0);
}

#[test]
fn multi_annotator_source_needs_aggregation() {
    let dir = tempfile::tempdir().unwrap();
    ingest_both(dir.path());
    let out = whow(dir.path(), &["analyze", "--source", "human"]);
    assert_eq!(code(&out), Some(1));
    assert!(stderr(&out).contains("aggregate"), "{}", stderr(&out));
}

#[test]
fn unknown_label_source_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    ingest_both(dir.path());
    assert_eq!(
        code(&whow(dir.path(), &["eval", "--pred", "oracle"])),
        Some(2)
    );
}

#[test]
fn report_without_tables_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&whow(dir.path(), &["report"])), Some(1));
}

#[test]
fn paired_comparison_has_one_table_per_source_and_domain() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path()).unwrap();
    let md = fs::read_to_string(
        dir.path()
            .join("tables/compare_consensus_vs_model_gpt-4o_mt.md"),
    )
    .unwrap();
    for d in ["debate", "panel"] {
        for s in ["consensus", MODEL] {
            assert!(
                md.contains(&format!("### Acts given motives, {d} ({s})")),
                "{d} {s}"
            );
        }
    }
    let js = read_json(
        &dir.path()
            .join("tables/compare_consensus_vs_model_gpt-4o_mt.json"),
    );
    assert_eq!(
        js["domains"]["debate"]["tests"].as_array().unwrap().len(),
        3 * 6 + 3 + 6
    );
    let report = fs::read_to_string(dir.path().join("report.md")).unwrap();
    let order: Vec<usize> = [
        "Inter-annotator",
        "Macro-F1",
        "Acts given motives",
        "Speaker-state",
        "Next speaker",
        "Moderator target",
    ]
    .iter()
    .map(|h| report.find(h).unwrap_or_else(|| panic!("{h} missing")))
    .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "{order:?}");
}

#[test]
fn segment_writes_one_sentence_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("talk.txt");
    fs::write(
        &input,
        "Welcome back. Dr. Lee joins us today.\n\nShall we begin? Yes.\n",
    )
    .unwrap();
    check(
        &whow_bare(dir.path(), &["segment", "--in", input.to_str().unwrap()]),
        "segment",
    )
    .unwrap();
    let text = fs::read_to_string(dir.path().join("segments/talk.txt")).unwrap();
    assert_eq!(
        text.lines().collect::<Vec<_>>(),
        [
            "Welcome back.",
            "Dr. Lee joins us today.",
            "Shall we begin?",
            "Yes."
        ]
    );
}
