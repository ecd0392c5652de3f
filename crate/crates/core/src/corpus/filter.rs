//! Paragraph filtering rules.
//!
//! Rules are checked in a fixed order and the first failing rule names the
//! rejection: paragraph-length, tokenize-error, sentence-length, end-mark,
//! caps-ending, adjacent-duplicate. Filtering is a pure per-paragraph
//! function; token counts are taken after tokenization.

use super::tokenizer::Tokenize;
use super::{Domain, Paragraph};
use std::fmt;

pub const MIN_SENTENCES: usize = 4;
pub const MAX_SENTENCES: usize = 7;
pub const MIN_TOKENS: usize = 5;
pub const MAX_TOKENS: usize = 25;

/// Accepted sentence-final punctuation, including quoted-dialogue endings.
pub const END_MARKS: [&str; 6] = [".", "!", "?", ".\"", "!\"", "?\""];

/// Why a raw paragraph was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    ParagraphLength { got: usize },
    TokenizeError { sentence: usize },
    SentenceLength { sentence: usize, got: usize },
    EndMark { sentence: usize },
    CapsEnding,
    AdjacentDuplicate { first: usize },
}

impl RejectReason {
    /// Stable code used in rejection logs.
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::ParagraphLength { .. } => "paragraph-length",
            RejectReason::TokenizeError { .. } => "tokenize-error",
            RejectReason::SentenceLength { .. } => "sentence-length",
            RejectReason::EndMark { .. } => "end-mark",
            RejectReason::CapsEnding => "caps-ending",
            RejectReason::AdjacentDuplicate { .. } => "adjacent-duplicate",
        }
    }

    /// Every code, in check order.
    pub const CODES: [&'static str; 6] = [
        "paragraph-length",
        "tokenize-error",
        "sentence-length",
        "end-mark",
        "caps-ending",
        "adjacent-duplicate",
    ];
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

fn ends_with_mark(raw: &str) -> bool {
    let trimmed = raw.trim_end();
    END_MARKS.iter().any(|m| trimmed.ends_with(m))
}

/// True when the final two or more alphabetic words are fully uppercase,
/// the signature pattern of news by-lines.
fn caps_ending(raw_last: &str) -> bool {
    let mut run = 0;
    for word in raw_last.split_whitespace().rev() {
        if !word.chars().any(|c| c.is_alphabetic()) {
            continue;
        }
        let all_upper = word
            .chars()
            .filter(|c| c.is_alphabetic())
            .all(|c| c.is_uppercase());
        if !all_upper {
            break;
        }
        run += 1;
        if run >= 2 {
            return true;
        }
    }
    false
}

/// Tokenizes raw sentences and applies every filtering rule, returning a
/// [`Paragraph`] on acceptance or the first failing rule on rejection.
pub fn filter_paragraph<T: Tokenize>(
    id: impl Into<String>,
    domain: Domain,
    raw: &[String],
    tokenizer: &T,
) -> Result<Paragraph, RejectReason> {
    let n = raw.len();
    if !(MIN_SENTENCES..=MAX_SENTENCES).contains(&n) {
        return Err(RejectReason::ParagraphLength { got: n });
    }
    let mut sentences = Vec::with_capacity(n);
    for (i, s) in raw.iter().enumerate() {
        match tokenizer.tokenize(s) {
            Ok(tokens) => sentences.push(tokens),
            Err(_) => return Err(RejectReason::TokenizeError { sentence: i }),
        }
    }
    for (i, tokens) in sentences.iter().enumerate() {
        if !(MIN_TOKENS..=MAX_TOKENS).contains(&tokens.len()) {
            return Err(RejectReason::SentenceLength {
                sentence: i,
                got: tokens.len(),
            });
        }
    }
    for (i, s) in raw.iter().enumerate() {
        if !ends_with_mark(s) {
            return Err(RejectReason::EndMark { sentence: i });
        }
    }
    if caps_ending(raw.last().expect("length checked")) {
        return Err(RejectReason::CapsEnding);
    }
    for i in 0..n - 1 {
        if sentences[i] == sentences[i + 1] {
            return Err(RejectReason::AdjacentDuplicate { first: i });
        }
    }
    Ok(Paragraph {
        id: id.into(),
        domain,
        sentences,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tokenizer::DefaultTokenizer;
    use super::*;

    fn raw(lines: &[&str]) -> Vec<String> {
        lines.iter().map(|s| s.to_string()).collect()
    }

    fn ok_lines(n: usize) -> Vec<String> {
        (0..n)
            .map(|i| format!("the number {i} cat sat on the mat."))
            .collect()
    }

    fn run(lines: &[String]) -> Result<Paragraph, RejectReason> {
        filter_paragraph("p", Domain::Synthetic, lines, &DefaultTokenizer)
    }

    #[test]
    fn accepts_clean_paragraph() {
        let p = run(&ok_lines(4)).unwrap();
        assert_eq!(p.sentences.len(), 4);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_three_sentences() {
        assert_eq!(
            run(&ok_lines(3)),
            Err(RejectReason::ParagraphLength { got: 3 })
        );
    }

    #[test]
    fn rejects_eight_sentences() {
        assert_eq!(
            run(&ok_lines(8)),
            Err(RejectReason::ParagraphLength { got: 8 })
        );
    }

    #[test]
    fn rejects_short_sentence() {
        let mut lines = ok_lines(5);
        lines[2] = "too few words.".into();
        let got = run(&lines).unwrap_err();
        assert_eq!(got, RejectReason::SentenceLength { sentence: 2, got: 4 });
    }

    #[test]
    fn rejects_long_sentence() {
        let mut lines = ok_lines(4);
        lines[1] = format!("{} and on.", vec!["word"; 30].join(" "));
        assert_eq!(run(&lines).unwrap_err().code(), "sentence-length");
    }

    #[test]
    fn rejects_caps_ending() {
        let mut lines = ok_lines(5);
        lines[4] = "the markets closed early today SAID JOHN REUTERS.".into();
        assert_eq!(run(&lines), Err(RejectReason::CapsEnding));
    }

    #[test]
    fn single_trailing_acronym_is_fine() {
        let mut lines = ok_lines(5);
        lines[4] = "the new plan was approved by NASA.".into();
        assert!(run(&lines).is_ok());
    }

    #[test]
    fn caps_only_checked_on_last_sentence() {
        let mut lines = ok_lines(5);
        lines[0] = "the markets closed early today SAID JOHN REUTERS.".into();
        assert!(run(&lines).is_ok());
    }

    #[test]
    fn rejects_missing_end_mark() {
        let mut lines = ok_lines(4);
        lines[3] = "this sentence just trails off and then".into();
        assert_eq!(run(&lines), Err(RejectReason::EndMark { sentence: 3 }));
    }

    #[test]
    fn accepts_quoted_dialogue_ending() {
        let mut lines = ok_lines(4);
        lines[3] = "and then she said \"we should go home now.\"".into();
        assert!(run(&lines).is_ok());
    }

    #[test]
    fn rejects_adjacent_duplicates() {
        let mut lines = ok_lines(4);
        lines[2] = lines[1].clone();
        assert_eq!(run(&lines), Err(RejectReason::AdjacentDuplicate { first: 1 }));
    }

    #[test]
    fn duplicate_comparison_is_post_tokenization() {
        let mut lines = ok_lines(4);
        lines[2] = lines[1].to_uppercase();
        assert_eq!(run(&lines).unwrap_err().code(), "adjacent-duplicate");
    }

    #[test]
    fn rejects_untokenizable_sentence() {
        let mut lines = ok_lines(4);
        lines[1] = "      ".into();
        assert_eq!(run(&lines), Err(RejectReason::TokenizeError { sentence: 1 }));
    }

    #[test]
    fn paragraph_length_outranks_sentence_length() {
        let lines = raw(&["too short.", "also short.", "and this."]);
        assert_eq!(run(&lines).unwrap_err().code(), "paragraph-length");
    }
}
