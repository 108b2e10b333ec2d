use super::Sentence;

/// Titles and abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "gen", "sen", "rep", "gov",
    "col", "lt", "sgt", "capt", "rev", "hon", "u.s", "u.k", "e.g", "i.e",
];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '?' | '!' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | ')' | ']')
}

fn opens_sentence(c: char) -> bool {
    c.is_uppercase() || matches!(c, '"' | '\'' | '“' | '‘' | '(')
}

/// The word immediately before byte offset `end`, letters and inner periods.
fn word_before(text: &str, end: usize) -> &str {
    let head = &text[..end];
    let start = head
        .char_indices()
        .rev()
        .find(|&(_, c)| !(c.is_alphanumeric() || c == '.'))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(0);
    &head[start..]
}

fn guarded(text: &str, period_at: usize) -> bool {
    let word = word_before(text, period_at);
    if word.is_empty() {
        return false;
    }
    let mut chars = word.chars();
    // Single capital initial, as in "John F. Kennedy".
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if c.is_uppercase() {
            return true;
        }
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Splits text into sentences.
///
/// A boundary is sentence-final punctuation (`.`, `?`, `!`, `…`, runs of
/// them, plus trailing quotes or brackets) followed by whitespace and then a
/// capital letter or an opening quote. A period after a listed abbreviation
/// or a single capital initial is not a boundary. Output sentences are
/// slices of the trimmed input; only the whitespace at boundaries is lost.
pub fn segment_text(text: &str) -> Vec<Sentence> {
    let text = text.trim();
    let mut out = Vec::new();
    if text.is_empty() {
        return out;
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && is_terminal(chars[j].1) {
            j += 1;
        }
        let single_period = c == '.' && j == i + 1;
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = k > j
            && k < chars.len()
            && opens_sentence(chars[k].1)
            && !(single_period && guarded(text, pos));
        if boundary {
            let end = chars[j].0;
            push(&mut out, &text[start..end]);
            start = chars[k].0;
            i = k;
        } else {
            i = j.max(i + 1);
        }
    }
    push(&mut out, &text[start..]);
    out
}

fn push(out: &mut Vec<Sentence>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(Sentence {
            index: out.len(),
            text: piece.to_string(),
        });
    }
}
