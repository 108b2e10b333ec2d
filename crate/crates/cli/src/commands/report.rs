use std::fs;

use anyhow::{bail, Result};

use crate::Ctx;

const ORDER: [&str; 6] = [
    "agreement",
    "eval",
    "conditional",
    "transitions",
    "act_transitions",
    "who",
];

/// Concatenates the rendered tables into `report.md`.
pub fn run(ctx: &Ctx) -> Result<()> {
    let mut bundle = ctx.bundle("report", "report")?;
    let dir = ctx.out.join("tables");
    let mut names: Vec<String> = ORDER.iter().map(|n| format!("{n}.md")).collect();
    if dir.is_dir() {
        let mut compares: Vec<String> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.starts_with("compare_") && n.ends_with(".md"))
            .collect();
        compares.sort();
        names.extend(compares);
    }
    let mut text = String::from("# Moderation analytics report\n");
    let mut found = 0;
    for name in names {
        let path = dir.join(&name);
        if !path.is_file() {
            continue;
        }
        let body = String::from_utf8(bundle.read_input(&path)?)?;
        text.push('\n');
        text.push_str(body.trim_end());
        text.push('\n');
        found += 1;
    }
    if found == 0 {
        bail!(
            "no tables under {} (run agree, eval or analyze first)",
            dir.display()
        );
    }
    bundle.write("report.md", text.as_bytes())?;
    ctx.info(format!("report: {found} table files"));
    bundle.finish()
}
