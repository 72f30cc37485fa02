//! Shared tokenizer used by both the metrics and the rule labeler.

/// Lowercases and splits on anything that is not a letter or digit.
/// Punctuation never survives as a token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Collapses every run of whitespace into one space and trims the ends.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits at sentence boundaries: `.`, `;`, `:`, newline, and their
/// full-width counterparts.
pub fn sentences(text: &str) -> impl Iterator<Item = &str> {
    text.split(['.', ';', ':', '\n', '\r', '。', '；', '：']).filter(|s| !s.trim().is_empty())
}
