use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Result};
use whow_core::corpus::{ingest_transcript_with_stats, write_whow_jsonl, SourceFormat};

use crate::sources::file_stem;
use crate::{Ctx, FormatArg, IngestArgs};

pub fn run(ctx: &Ctx, args: &IngestArgs) -> Result<()> {
    let (format, ext) = match args.format {
        FormatArg::Whow => (SourceFormat::WhowJsonl, "jsonl"),
        FormatArg::Insq => (SourceFormat::InsqJson, "json"),
        FormatArg::Npr => (SourceFormat::NprJson, "json"),
    };
    let files: Vec<PathBuf> = if args.input.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(&args.input)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == ext))
            .collect();
        v.sort();
        v
    } else {
        vec![args.input.clone()]
    };
    if files.is_empty() {
        bail!("no .{ext} files in {}", args.input.display());
    }

    let mut bundle = ctx.bundle(format!("ingest {}", args.input.display()), "ingest")?;
    let mut episodes: BTreeMap<String, (PathBuf, Vec<u8>)> = BTreeMap::new();
    let mut failures = 0;
    for f in &files {
        let bytes = bundle.read_input(f)?;
        match ingest_transcript_with_stats(&bytes, format) {
            Ok((ep, stats)) => {
                if let Some((first, _)) = episodes.get(ep.id()) {
                    eprintln!(
                        "{}: episode id `{}` already read from {}",
                        f.display(),
                        ep.id(),
                        first.display()
                    );
                    failures += 1;
                    continue;
                }
                ctx.info(format!(
                    "{}: episode {} ({} turns, {} merged, {} segmented)",
                    f.display(),
                    ep.id(),
                    ep.turns().len(),
                    stats.merges,
                    stats.segmented_turns
                ));
                let mut buf = Vec::new();
                write_whow_jsonl(&ep, &mut buf)?;
                episodes.insert(ep.id().to_string(), (f.clone(), buf));
            }
            Err(e) => {
                eprintln!("{}: {e}", f.display());
                failures += 1;
            }
        }
    }
    if failures > 0 && !args.keep_going {
        bail!(
            "{failures} of {} files failed; nothing written (use --keep-going to write the rest)",
            files.len()
        );
    }
    for (id, (_, buf)) in &episodes {
        bundle.write(&format!("corpus/{}.jsonl", file_stem(id)), buf)?;
    }
    ctx.info(format!(
        "ingest: {} episodes written, {failures} failed",
        episodes.len()
    ));
    bundle.finish()
}
