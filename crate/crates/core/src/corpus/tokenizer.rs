//! Sentence tokenization.
//!
//! The pipeline treats the tokenizer as pluggable; the default lowercases
//! and splits a sentence into alphanumeric runs and single punctuation
//! characters. `"Don't stop."` becomes `["don", "'", "t", "stop", "."]`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TokenizeError {
    #[error("sentence produced no tokens")]
    Empty,
}

/// Anything that can split one sentence string into tokens.
pub trait Tokenize {
    fn tokenize(&self, sentence: &str) -> Result<Vec<String>, TokenizeError>;
}

/// Default tokenizer: lowercase, alphanumeric runs are words, every other
/// non-whitespace character is its own token.
#[derive(Debug, Default, Clone, Copy)]
pub struct DefaultTokenizer;

impl Tokenize for DefaultTokenizer {
    fn tokenize(&self, sentence: &str) -> Result<Vec<String>, TokenizeError> {
        let mut tokens = Vec::new();
        let mut word = String::new();
        for ch in sentence.chars() {
            if ch.is_alphanumeric() {
                word.extend(ch.to_lowercase());
            } else {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                if !ch.is_whitespace() {
                    tokens.push(ch.to_string());
                }
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
        if tokens.is_empty() {
            return Err(TokenizeError::Empty);
        }
        Ok(tokens)
    }
}

impl<F> Tokenize for F
where
    F: Fn(&str) -> Result<Vec<String>, TokenizeError>,
{
    fn tokenize(&self, sentence: &str) -> Result<Vec<String>, TokenizeError> {
        self(sentence)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_words_and_punctuation() {
        let toks = DefaultTokenizer.tokenize("The cat sat, didn't it?").unwrap();
        assert_eq!(
            toks,
            vec!["the", "cat", "sat", ",", "didn", "'", "t", "it", "?"]
        );
    }

    #[test]
    fn lowercases() {
        let toks = DefaultTokenizer.tokenize("HELLO World").unwrap();
        assert_eq!(toks, vec!["hello", "world"]);
    }

    #[test]
    fn whitespace_only_is_an_error() {
        assert_eq!(
            DefaultTokenizer.tokenize("   \t "),
            Err(TokenizeError::Empty)
        );
    }

    #[test]
    fn closures_are_tokenizers() {
        let upper = |s: &str| {
            Ok(s.split_whitespace()
                .map(|w| w.to_uppercase())
                .collect::<Vec<_>>())
        };
        assert_eq!(upper.tokenize("a b").unwrap(), vec!["A", "B"]);
    }
}
