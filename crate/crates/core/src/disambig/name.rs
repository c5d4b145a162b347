//! Name normalization and parsing.

use std::fmt;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Case-folds, strips diacritics, turns `.` into a separator, and collapses
/// runs of whitespace.
pub fn normalize(raw: &str) -> String {
    let folded: String = raw
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .map(|c| if c == '.' { ' ' } else { c })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonName {
    pub last: String,
    /// Given-name tokens in order; single letters for initials.
    pub given: Vec<String>,
}

impl PersonName {
    /// Accepts `Given Middle Last` or `Last, Given Middle`.
    pub fn parse(raw: &str) -> Option<Self> {
        if let Some((last, given)) = raw.split_once(',') {
            let last = normalize(last);
            if last.is_empty() {
                return None;
            }
            let given = normalize(given)
                .split(' ')
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect();
            return Some(Self { last, given });
        }
        let norm = normalize(raw);
        let mut tokens: Vec<String> = norm.split(' ').filter(|t| !t.is_empty()).map(String::from).collect();
        let last = tokens.pop()?;
        Some(Self { last, given: tokens })
    }

    pub fn first_initial(&self) -> Option<char> {
        self.given.first().and_then(|g| g.chars().next())
    }

    pub fn initials(&self) -> String {
        self.given.iter().filter_map(|g| g.chars().next()).collect()
    }

    pub fn block_key(&self) -> BlockKey {
        BlockKey {
            last: self.last.clone(),
            initial: self.first_initial(),
        }
    }

    /// Given-name information beyond the first initial, if any.
    pub fn detail(&self) -> Option<NameDetail> {
        let first = self.given.first()?;
        if first.chars().count() > 1 {
            Some(NameDetail::FirstName(first.clone()))
        } else if self.given.len() > 1 {
            Some(NameDetail::Initials(self.initials()))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NameDetail {
    FirstName(String),
    Initials(String),
}

/// Normalized (last name, first initial).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockKey {
    pub last: String,
    pub initial: Option<char>,
}

impl fmt::Display for BlockKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.initial {
            Some(c) => write!(f, "{}|{}", self.last, c),
            None => write!(f, "{}|", self.last),
        }
    }
}
