use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::train::ToyCorpus;

pub const UNKNOWN_TOKEN: &str = "<unk>";

/// Whitespace-tokenised corpus with first-appearance vocabulary.
///
/// With `max_vocab`, only the first `max_vocab` distinct words keep their own id;
/// later ones map to `<unk>`, which is appended only if needed.
pub fn corpus_from_text(text: &str, max_vocab: Option<usize>) -> Result<ToyCorpus> {
    if max_vocab == Some(0) {
        return Err(Error::arg("max vocabulary must be positive"));
    }
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.is_empty() {
        return Err(Error::arg("corpus is empty"));
    }
    let limit = max_vocab.unwrap_or(usize::MAX);
    let mut vocab: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut unk = None;
    let mut tokens = Vec::with_capacity(words.len());
    for w in &words {
        let id = match index.get(w) {
            Some(&id) => id,
            None if vocab.len() < limit => {
                vocab.push(w.to_string());
                index.insert(w, vocab.len() - 1);
                vocab.len() - 1
            }
            None => *unk.get_or_insert_with(|| match index.get(UNKNOWN_TOKEN) {
                Some(&id) => id,
                None => {
                    vocab.push(UNKNOWN_TOKEN.to_string());
                    vocab.len() - 1
                }
            }),
        };
        tokens.push(id);
    }
    let split = tokens.len() * 9 / 10;
    ToyCorpus::new(tokens, vocab, split)
}

pub fn ingest_corpus(path: &Path, max_vocab: Option<usize>) -> Result<ToyCorpus> {
    let bytes = std::fs::read(path)?;
    if bytes.is_empty() {
        return Err(Error::arg(format!("corpus file {} is empty", path.display())));
    }
    let text =
        String::from_utf8(bytes).map_err(|e| Error::Encoding(format!("{} is not valid UTF-8: {e}", path.display())))?;
    corpus_from_text(&text, max_vocab)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let c = corpus_from_text("a b a", None).unwrap();
        assert_eq!((c.tokens(), c.vocab()), (&[0, 1, 0][..], &["a".to_string(), "b".to_string()][..]));
        let c = corpus_from_text("a b", Some(1)).unwrap();
        assert_eq!(c.tokens(), [0, 1]);
        assert_eq!(c.vocab(), ["a", "<unk>"]);
        let text: Vec<String> = (0..100).map(|i| format!("w{}", i % 7)).collect();
        let c = corpus_from_text(&text.join(" "), None).unwrap();
        assert_eq!((c.train().len(), c.validation().len()), (90, 10));
    }

    #[test]
    fn unknown_token_only_when_needed() {
        let c = corpus_from_text("a b a b", Some(2)).unwrap();
        assert_eq!(c.vocab(), ["a", "b"]);
        let c = corpus_from_text("a b c d c", Some(2)).unwrap();
        assert_eq!(c.tokens(), [0, 1, 2, 2, 2]);
    }

    #[test]
    fn errors() {
        assert_eq!(corpus_from_text("  \n ", None).unwrap_err().kind(), crate::ErrorKind::Argument);
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.txt");
        std::fs::write(&empty, b"").unwrap();
        assert_eq!(ingest_corpus(&empty, None).unwrap_err().kind(), crate::ErrorKind::Argument);
        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, [0x61, 0x20, 0xff, 0xfe]).unwrap();
        assert!(matches!(ingest_corpus(&bad, None).unwrap_err(), Error::Encoding(_)));
    }
}
