//! Tokenization, stopword filtering and n-gram profiles.
//!
//! Every other module goes through [`tokenize`] so that similarity scores,
//! index postings and query terms agree on what a word is. Letters, digits
//! and underscore are word characters; any other character separates
//! tokens. Tokens are lowercased and never stemmed.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Placeholder for the unknown answer to the preceding series question.
pub const PREVIOUS_ANSWER: &str = "PREVIOUS_ANSWER";

const ENGLISH_V1: &str = include_str!("../data/stopwords-en-v1.txt");

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Ordered lowercase word tokens of one text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    /// Wraps pre-split tokens, rejecting empty tokens or tokens with
    /// whitespace.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(Error::contract(format!("invalid token {bad:?}")));
        }
        Ok(TokenStream(tokens))
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }

    /// Tokens joined by single spaces.
    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A token together with the byte range it came from in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
    pub token: String,
}

/// Splits `text` into word tokens, keeping the byte range of each token in
/// the original (not lowercased) text.
pub fn token_spans(text: &str) -> Vec<TokenSpan> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                push_span(&mut spans, text, s, i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push_span(&mut spans, text, s, text.len());
    }
    spans
}

fn push_span(spans: &mut Vec<TokenSpan>, text: &str, start: usize, end: usize) {
    // Lowercasing can introduce combining marks (e.g. U+0130); drop them so
    // every token stays inside the word alphabet.
    let token: String = text[start..end]
        .to_lowercase()
        .chars()
        .filter(|&c| is_word_char(c))
        .collect();
    if !token.is_empty() {
        spans.push(TokenSpan { start, end, token });
    }
}

/// Lowercases and splits on maximal runs of non-word characters.
pub fn tokenize(text: &str) -> TokenStream {
    TokenStream(token_spans(text).into_iter().map(|s| s.token).collect())
}

/// An n-gram: exactly `n` consecutive tokens.
pub type Gram = Vec<String>;

/// Multiset of the n-grams of one token stream at a single order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramProfile {
    n: usize,
    grams: BTreeMap<Gram, usize>,
}

impl NGramProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grams(&self) -> &BTreeMap<Gram, usize> {
        &self.grams
    }

    pub fn count(&self, gram: &[String]) -> usize {
        self.grams.get(gram).copied().unwrap_or(0)
    }

    /// Number of distinct grams.
    pub fn distinct(&self) -> usize {
        self.grams.len()
    }

    /// Sum of all gram counts.
    pub fn total(&self) -> usize {
        self.grams.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }
}

/// Sliding-window n-grams of `tokens`, without boundary padding.
///
/// Only orders 1, 2 and 3 are supported.
pub fn ngrams(tokens: &TokenStream, n: usize) -> Result<NGramProfile> {
    if !(1..=3).contains(&n) {
        return Err(Error::contract(format!("gram order must be 1, 2 or 3, got {n}")));
    }
    let mut grams = BTreeMap::new();
    for window in tokens.as_slice().windows(n) {
        *grams.entry(window.to_vec()).or_insert(0) += 1;
    }
    Ok(NGramProfile { n, grams })
}

/// Fixed set of lowercase stopwords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    /// The bundled English list (version 1).
    pub fn english() -> &'static StopwordList {
        static LIST: OnceLock<StopwordList> = OnceLock::new();
        LIST.get_or_init(|| StopwordList::parse(ENGLISH_V1))
    }

    pub fn empty() -> StopwordList {
        StopwordList { words: HashSet::new() }
    }

    /// Parses the one-token-per-line format. Blank lines and lines whose
    /// first non-blank character is `#` are ignored.
    pub fn parse(text: &str) -> StopwordList {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopwordList { words }
    }

    pub fn from_file(path: &Path) -> Result<StopwordList> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopwordList::parse(&text))
    }

    pub fn from_words<I, S>(words: I) -> StopwordList
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordList {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        if token.chars().any(char::is_uppercase) {
            self.words.contains(&token.to_lowercase())
        } else {
            self.words.contains(token)
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl fmt::Display for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join())
    }
}

/// Removes stopwords, preserving the order of the remaining tokens.
pub fn strip_stopwords(tokens: &TokenStream, stops: &StopwordList) -> TokenStream {
    TokenStream(
        tokens
            .iter()
            .filter(|t| !stops.contains(t))
            .map(str::to_owned)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> TokenStream {
        TokenStream::from_tokens(words.iter().copied()).unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Who was Shakespeare?"), toks(&["who", "was", "shakespeare"]));
        assert_eq!(
            tokenize("PREVIOUS_ANSWER's size"),
            toks(&["previous_answer", "s", "size"])
        );
        assert_eq!(tokenize("  325m,  1,063ft "), toks(&["325m", "1", "063ft"]));
    }

    #[test]
    fn spans_point_into_original_text() {
        let text = "Who was Shakespeare?";
        let spans = token_spans(text);
        assert_eq!(spans.len(), 3);
        assert_eq!(&text[spans[2].start..spans[2].end], "Shakespeare");
        assert_eq!(spans[2].token, "shakespeare");
    }

    #[test]
    fn ngram_examples() {
        let t = toks(&["who", "was", "shakespeare"]);
        let uni = ngrams(&t, 1).unwrap();
        assert_eq!(uni.distinct(), 3);
        assert!(uni.grams().values().all(|&c| c == 1));

        let bi = ngrams(&t, 2).unwrap();
        let keys: Vec<_> = bi.grams().keys().cloned().collect();
        assert_eq!(
            keys,
            vec![
                vec!["was".to_string(), "shakespeare".to_string()],
                vec!["who".to_string(), "was".to_string()],
            ]
        );

        assert!(ngrams(&toks(&["a"]), 3).unwrap().is_empty());
    }

    #[test]
    fn ngram_order_is_checked() {
        let t = toks(&["a"]);
        assert!(matches!(ngrams(&t, 0), Err(Error::Contract(_))));
        assert!(matches!(ngrams(&t, 4), Err(Error::Contract(_))));
    }

    #[test]
    fn stopword_examples() {
        let stops = StopwordList::from_words(["who", "was"]);
        assert_eq!(
            strip_stopwords(&toks(&["who", "was", "shakespeare"]), &stops),
            toks(&["shakespeare"])
        );
        assert!(strip_stopwords(&TokenStream::default(), &stops).is_empty());
        let the = StopwordList::from_words(["the"]);
        assert_eq!(
            strip_stopwords(&toks(&["the", "the", "eiffel", "tower"]), &the),
            toks(&["eiffel", "tower"])
        );
    }

    #[test]
    fn stopword_file_format() {
        let list = StopwordList::parse("# header\nThe\n\n  of \n#not\n");
        assert_eq!(list.len(), 2);
        assert!(list.contains("the"));
        assert!(list.contains("THE"));
        assert!(list.contains("of"));
        assert!(!list.contains("#not"));
    }

    #[test]
    fn bundled_list_is_loaded() {
        let en = StopwordList::english();
        assert!(en.len() > 100);
        assert!(en.contains("the"));
        assert!(!en.contains("during"));
        assert!(!en.contains("tower"));
    }

    #[test]
    fn from_tokens_rejects_bad_tokens() {
        assert!(TokenStream::from_tokens(["ok", ""]).is_err());
        assert!(TokenStream::from_tokens(["a b"]).is_err());
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,40}") {
            let once = tokenize(&text);
            prop_assert_eq!(tokenize(&once.join()), once.clone());
            for t in &once {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn unigram_total_equals_token_count(text in "[a-d ]{0,30}") {
            let t = tokenize(&text);
            prop_assert_eq!(ngrams(&t, 1).unwrap().total(), t.len());
            for n in 1..=3 {
                let p = ngrams(&t, n).unwrap();
                prop_assert_eq!(p.total(), t.len().saturating_sub(n - 1));
                prop_assert!(p.grams().keys().all(|g| g.len() == n));
                prop_assert!(p.grams().values().all(|&c| c >= 1));
            }
        }

        #[test]
        fn strip_is_shrinking_and_idempotent(text in "[a-e ]{0,30}") {
            let stops = StopwordList::from_words(["a", "c"]);
            let t = tokenize(&text);
            let once = strip_stopwords(&t, &stops);
            prop_assert!(once.len() <= t.len());
            prop_assert_eq!(strip_stopwords(&once, &stops), once);
        }
    }
}
