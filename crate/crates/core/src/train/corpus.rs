use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Token ids over a fixed vocabulary with a train/validation boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyCorpus {
    tokens: Vec<usize>,
    vocab: Vec<String>,
    split: usize,
}

impl ToyCorpus {
    /// `tokens[..split]` trains, `tokens[split..]` validates and must be non-empty.
    pub fn new(tokens: Vec<usize>, vocab: Vec<String>, split: usize) -> Result<Self> {
        if let Some(&bad) = tokens.iter().find(|&&t| t >= vocab.len()) {
            return Err(Error::invalid(format!("token id {bad} out of range for vocabulary of {}", vocab.len())));
        }
        if split >= tokens.len() {
            return Err(Error::invalid(format!(
                "split {split} leaves no validation data in a corpus of {} tokens",
                tokens.len()
            )));
        }
        Ok(ToyCorpus { tokens, vocab, split })
    }

    /// Ids in first-appearance order, split 90/10 rounded down.
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Result<Self> {
        let mut vocab: Vec<String> = Vec::new();
        let mut index = std::collections::HashMap::new();
        let tokens = words
            .iter()
            .map(|w| {
                *index.entry(w.as_ref().to_string()).or_insert_with(|| {
                    vocab.push(w.as_ref().to_string());
                    vocab.len() - 1
                })
            })
            .collect::<Vec<_>>();
        let split = tokens.len() * 9 / 10;
        ToyCorpus::new(tokens, vocab, split)
    }

    /// `a b a b ...`
    pub fn repetitive(len: usize) -> Result<Self> {
        let words: Vec<&str> = (0..len).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
        ToyCorpus::from_words(&words)
    }

    /// Independent uniform draws over `vocab_size` tokens named `t0, t1, ...`.
    pub fn uniform_random(vocab_size: usize, len: usize, seed: u64) -> Result<Self> {
        if vocab_size == 0 {
            return Err(Error::arg("vocabulary size must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tokens = (0..len).map(|_| rng.random_range(0..vocab_size)).collect();
        let vocab = (0..vocab_size).map(|i| format!("t{i}")).collect();
        ToyCorpus::new(tokens, vocab, len * 9 / 10)
    }

    /// Nested bracket groups `( ( ) ) ( ( ) ) ...` of the given depth.
    pub fn balanced(depth: usize, len: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::arg("bracket depth must be positive"));
        }
        let unit: Vec<&str> = std::iter::repeat("(").take(depth).chain(std::iter::repeat(")").take(depth)).collect();
        let words: Vec<&str> = unit.iter().cycle().take(len).copied().collect();
        ToyCorpus::from_words(&words)
    }

    /// Short subject-verb-object sentences from a fixed template grammar.
    pub fn templated(sentences: usize, seed: u64) -> Result<Self> {
        const SUBJECTS: [&str; 6] = ["the cat", "the dog", "a king", "a queen", "the man", "the woman"];
        const VERBS: [&str; 4] = ["sees", "likes", "follows", "greets"];
        const OBJECTS: [&str; 5] = ["the bird", "a child", "the river", "a tree", "the city"];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut words = Vec::new();
        for _ in 0..sentences {
            let s = SUBJECTS[rng.random_range(0..SUBJECTS.len())];
            let v = VERBS[rng.random_range(0..VERBS.len())];
            let o = OBJECTS[rng.random_range(0..OBJECTS.len())];
            words.extend(s.split(' '));
            words.push(v);
            words.extend(o.split(' '));
            words.push(".");
        }
        ToyCorpus::from_words(&words)
    }

    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn train(&self) -> &[usize] {
        &self.tokens[..self.split]
    }

    pub fn validation(&self) -> &[usize] {
        &self.tokens[self.split..]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}
