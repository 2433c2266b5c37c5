use std::sync::OnceLock;

use regex::Regex;

fn filler_line() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^\s*(sure|certainly|of course|absolutely|okay|ok|here is|here's|here are|below is)\b")
            .expect("filler regex")
    })
}

/// Drops a single leading conversational line ("Sure, here is ...",
/// "Here is the revised subsection:") and trims the result. Nothing else
/// is touched.
pub fn strip_leading_filler(text: &str) -> String {
    let trimmed = text.trim();
    let (first, rest) = match trimmed.split_once('\n') {
        Some((first, rest)) => (first, rest),
        None => (trimmed, ""),
    };
    if filler_line().is_match(first) {
        rest.trim().to_string()
    } else {
        trimmed.to_string()
    }
}
