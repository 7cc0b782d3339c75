use std::fmt;

use serde::{Deserialize, Serialize};

/// A sentiment polarity score: 1 very negative, 2 negative, 3 neutral,
/// 4 positive, 5 very positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Score(u8);

impl Score {
    pub const MIN: Score = Score(1);
    pub const MAX: Score = Score(5);
    pub const CLASSES: usize = 5;

    pub fn new(value: i64) -> Option<Score> {
        (1..=5).contains(&value).then_some(Score(value as u8))
    }

    /// Score for a 0-based class index.
    pub fn from_index(index: usize) -> Score {
        assert!(index < Self::CLASSES, "class index {index} out of range");
        Score(index as u8 + 1)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = Score> {
        (1..=5).map(Score)
    }
}

impl TryFrom<u8> for Score {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Score::new(v as i64).ok_or_else(|| format!("score {v} outside 1..=5"))
    }
}

impl From<Score> for u8 {
    fn from(s: Score) -> u8 {
        s.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
