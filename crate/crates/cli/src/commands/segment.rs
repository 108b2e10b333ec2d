use anyhow::Result;
use whow_core::corpus::segment_text;

use crate::sources::file_stem;
use crate::{Ctx, SegmentArgs};

pub fn run(ctx: &Ctx, args: &SegmentArgs) -> Result<()> {
    let mut bundle = ctx.bundle(format!("segment {}", args.input.display()), "segment")?;
    let bytes = bundle.read_input(&args.input)?;
    let text = String::from_utf8(bytes)?;
    let mut out = String::new();
    let mut n = 0;
    for paragraph in text.split("\n\n") {
        for s in segment_text(&paragraph.replace('\n', " ")) {
            out.push_str(&s.text);
            out.push('\n');
            n += 1;
        }
    }
    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("input");
    let path = bundle.write(&format!("segments/{}.txt", file_stem(stem)), out.as_bytes())?;
    ctx.info(format!(
        "segment: {n} sentences written to {}",
        path.display()
    ));
    bundle.finish()
}
