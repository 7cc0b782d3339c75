use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Whitespace split, punctuation as separate tokens, lowercased.
    WhitespacePunct,
    /// Overlapping codepoint bigrams with whitespace removed.
    CharBigram,
}

impl Tokenizer {
    /// Character bigrams for Japanese and Chinese, word tokens elsewhere.
    pub fn for_language(tag: &str) -> Tokenizer {
        let primary = tag.split(['-', '_']).next().unwrap_or(tag).to_ascii_lowercase();
        match primary.as_str() {
            "ja" | "zh" => Tokenizer::CharBigram,
            _ => Tokenizer::WhitespacePunct,
        }
    }

    pub fn parse(s: &str) -> Option<Tokenizer> {
        match s {
            "whitespace_punct" => Some(Tokenizer::WhitespacePunct),
            "char_bigram" => Some(Tokenizer::CharBigram),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tokenizer::WhitespacePunct => "whitespace_punct",
            Tokenizer::CharBigram => "char_bigram",
        }
    }

    pub fn tokenize(self, text: &str) -> Vec<String> {
        match self {
            Tokenizer::WhitespacePunct => whitespace_punct(text),
            Tokenizer::CharBigram => char_bigrams(text),
        }
    }
}

fn whitespace_punct(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if c.is_alphanumeric() || is_joiner(c) {
                current.extend(c.to_lowercase());
            } else {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

// combining marks keep scripts like Devanagari in one token
fn is_joiner(c: char) -> bool {
    matches!(c as u32, 0x0300..=0x036F | 0x0900..=0x0DFF | 0x200C | 0x200D)
}

fn char_bigrams(text: &str) -> Vec<String> {
    let chars: Vec<char> = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    match chars.len() {
        0 => Vec::new(),
        1 => vec![chars[0].to_string()],
        _ => chars.windows(2).map(|w| w.iter().collect()).collect(),
    }
}
