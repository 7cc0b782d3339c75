use std::collections::HashMap;

use super::Tokenizer;

/// Token-to-index map built from training text. Indices are dense and
/// assigned in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokenizer: Tokenizer,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

/// Sparse feature vector: `(index, value)` sorted by index.
pub type SparseVec = Vec<(u32, f64)>;

impl Vocabulary {
    pub fn build<'a>(tokenizer: Tokenizer, texts: impl IntoIterator<Item = &'a str>) -> Vocabulary {
        let mut vocab = Vocabulary {
            tokenizer,
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for text in texts {
            for tok in tokenizer.tokenize(text) {
                if !vocab.index.contains_key(&tok) {
                    vocab.index.insert(tok.clone(), vocab.tokens.len() as u32);
                    vocab.tokens.push(tok);
                }
            }
        }
        vocab
    }

    pub fn from_tokens(tokenizer: Tokenizer, tokens: Vec<String>) -> Result<Vocabulary, String> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(format!("duplicate vocabulary token `{t}`"));
            }
        }
        Ok(Vocabulary {
            tokenizer,
            tokens,
            index,
        })
    }

    pub fn tokenizer(&self) -> Tokenizer {
        self.tokenizer
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// Token counts, L2-normalized. Out-of-vocabulary tokens are dropped.
    pub fn featurize(&self, text: &str) -> SparseVec {
        let mut counts: HashMap<u32, f64> = HashMap::new();
        for tok in self.tokenizer.tokenize(text) {
            if let Some(i) = self.get(&tok) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        let mut v: SparseVec = counts.into_iter().collect();
        v.sort_unstable_by_key(|&(i, _)| i);
        let norm = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, x) in &mut v {
                *x /= norm;
            }
        }
        v
    }
}
