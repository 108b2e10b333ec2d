//! Helpers for driving the `whow` binary against the bundled fixtures.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const MODEL: &str = "model:gpt-4o:mt";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn config() -> PathBuf {
    fixtures().join("whow.conf")
}

/// Runs `whow --out OUT ARGS...` with the fixture config.
pub fn whow(out: &Path, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_whow"));
    cmd.arg("--quiet")
        .arg("--config")
        .arg(config())
        .arg("--out")
        .arg(out)
        .args(args);
    // never let a real key reach the unreachable endpoint
    cmd.env_remove("WHOW_LLM_API_KEY");
    cmd.output().expect("whow binary runs")
}

/// Runs without the fixture config.
pub fn whow_bare(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whow"))
        .arg("--quiet")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("whow binary runs")
}

pub fn check(out: &Output, what: &str) -> Result<(), String> {
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "`{what}` exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

/// ingest -> aggregate -> agree -> annotate -> eval -> analyze -> report.
pub fn pipeline(out: &Path) -> Result<(), String> {
    let raw = fixtures().join("raw");
    let insq = raw.join("insq");
    let npr = raw.join("npr");
    let steps: Vec<Vec<&str>> = vec![
        vec!["ingest", "--format", "insq", "--in", insq.to_str().unwrap()],
        vec!["ingest", "--format", "npr", "--in", npr.to_str().unwrap()],
        vec!["aggregate"],
        vec!["agree"],
        vec!["annotate"],
        vec!["eval", "--pred", MODEL],
        vec!["analyze", "--compare", "consensus", MODEL],
        vec!["report"],
    ];
    for args in steps {
        check(&whow(out, &args), &args.join(" "))?;
    }
    Ok(())
}

/// Every file below `root`, keyed by relative path.
pub fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, acc);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                acc.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(root, root, &mut acc);
    acc
}

pub fn read_json(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}
