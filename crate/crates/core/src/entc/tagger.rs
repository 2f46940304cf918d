use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// A typed token span `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl TypedSpan {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        TypedSpan {
            start,
            end,
            label: label.into(),
        }
    }

    pub fn surface<'a>(&self, tokens: &'a [String]) -> &'a [String] {
        &tokens[self.start..self.end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PronounClass {
    Subject,
    Object,
    Possessive,
    Reflexive,
}

/// Everything a swap transformation needs to know about a token sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaggedSpans {
    pub entities: Vec<TypedSpan>,
    pub numbers: Vec<TypedSpan>,
    pub pronouns: Vec<(usize, PronounClass)>,
}

/// Finds entity, number and pronoun sites in pretokenized text.
pub trait SpanTagger: Send + Sync {
    fn tag(&self, tokens: &[String]) -> TaggedSpans;

    /// Pronouns that may replace a pronoun of `class` (lowercase).
    fn pronoun_class_members(&self, class: PronounClass) -> &[String];
}

/// Pronoun inventory: which surface forms belong to which class for tagging,
/// and which forms are swap candidates for each class.
#[derive(Debug, Clone)]
pub struct PronounTable {
    tagging: HashMap<String, PronounClass>,
    members: HashMap<PronounClass, Vec<String>>,
}

impl PronounTable {
    pub fn new(classes: &[(PronounClass, &[&str])]) -> Self {
        let mut tagging = HashMap::new();
        let mut members = HashMap::new();
        for (class, words) in classes {
            for w in *words {
                tagging.entry(w.to_string()).or_insert(*class);
            }
            members.insert(*class, words.iter().map(|w| w.to_string()).collect());
        }
        PronounTable { tagging, members }
    }

    pub fn class_of(&self, token: &str) -> Option<PronounClass> {
        self.tagging.get(&token.to_lowercase()).copied()
    }

    pub fn members(&self, class: PronounClass) -> &[String] {
        self.members.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl Default for PronounTable {
    /// Third-person pronouns. "her" is tagged as an object; it is still a
    /// possessive swap candidate.
    fn default() -> Self {
        PronounTable::new(&[
            (PronounClass::Subject, &["he", "she", "they"]),
            (PronounClass::Object, &["him", "her", "them"]),
            (PronounClass::Possessive, &["his", "her", "their"]),
            (PronounClass::Reflexive, &["himself", "herself", "themselves"]),
        ])
    }
}

const NUMBER_WORDS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
];

const CAPITALIZED_STOPWORDS: [&str; 24] = [
    "The", "A", "An", "In", "On", "At", "Of", "For", "But", "And", "Or", "It", "This", "That", "These", "Those",
    "There", "Here", "If", "When", "While", "After", "Before", "As",
];

/// Integer value of a number token: plain digits (commas allowed) or a word up to twenty.
pub fn integer_value(token: &str) -> Option<i64> {
    let lower = token.to_lowercase();
    if let Some(i) = NUMBER_WORDS.iter().position(|w| *w == lower) {
        return Some(i as i64);
    }
    let digits: String = token.chars().filter(|c| *c != ',').collect();
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
        return digits.parse().ok();
    }
    None
}

/// Render `value` in the style of `like`: a number word if `like` was one and
/// the value has a word form, digits otherwise.
pub fn render_integer(value: i64, like: &str) -> String {
    let lower = like.to_lowercase();
    let was_word = NUMBER_WORDS.contains(&lower.as_str());
    if was_word && (0..NUMBER_WORDS.len() as i64).contains(&value) {
        let w = NUMBER_WORDS[value as usize];
        if like.chars().next().is_some_and(char::is_uppercase) {
            title_case(w)
        } else {
            w.to_string()
        }
    } else {
        value.to_string()
    }
}

pub fn is_number(token: &str) -> bool {
    if integer_value(token).is_some() {
        return true;
    }
    let t: String = token.chars().filter(|c| *c != ',').collect();
    t.parse::<f64>().is_ok() && t.chars().any(|c| c.is_ascii_digit())
}

pub fn title_case(token: &str) -> String {
    let mut chars = token.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

/// Rule-based tagger: gazetteer lookup for typed entities, capitalized runs for
/// untyped ones (`ENTITY`), digit/number-word tokens for numbers, and a fixed
/// pronoun table.
#[derive(Debug, Clone, Default)]
pub struct LexiconTagger {
    /// Lowercased, space-joined surface form -> entity type.
    gazetteer: HashMap<String, String>,
    max_entry_len: usize,
    pronouns: PronounTable,
}

impl LexiconTagger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_entry(mut self, surface: &str, label: &str) -> Self {
        self.add_entry(surface, label);
        self
    }

    pub fn with_pronouns(mut self, pronouns: PronounTable) -> Self {
        self.pronouns = pronouns;
        self
    }

    pub fn add_entry(&mut self, surface: &str, label: &str) {
        let key: Vec<String> = surface.split_whitespace().map(str::to_lowercase).collect();
        self.max_entry_len = self.max_entry_len.max(key.len());
        self.gazetteer.insert(key.join(" "), label.to_string());
    }

    /// Load a gazetteer of `surface<TAB>TYPE` lines.
    pub fn from_gazetteer(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut tagger = LexiconTagger::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, label) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected `surface<TAB>type`"))?;
            tagger.add_entry(surface.trim(), label.trim());
        }
        Ok(tagger)
    }

    fn gazetteer_match(&self, tokens: &[String], start: usize) -> Option<(usize, &str)> {
        let longest = self.max_entry_len.min(tokens.len() - start);
        (1..=longest).rev().find_map(|len| {
            let key = tokens[start..start + len]
                .iter()
                .map(|t| t.to_lowercase())
                .collect::<Vec<_>>()
                .join(" ");
            self.gazetteer.get(&key).map(|label| (len, label.as_str()))
        })
    }
}

impl SpanTagger for LexiconTagger {
    fn tag(&self, tokens: &[String]) -> TaggedSpans {
        let mut spans = TaggedSpans::default();
        let mut i = 0;
        while i < tokens.len() {
            let tok = &tokens[i];
            if let Some(class) = self.pronouns.class_of(tok) {
                spans.pronouns.push((i, class));
                i += 1;
                continue;
            }
            if is_number(tok) {
                spans.numbers.push(TypedSpan::new(i, i + 1, "NUM"));
                i += 1;
                continue;
            }
            if let Some((len, label)) = self.gazetteer_match(tokens, i) {
                spans.entities.push(TypedSpan::new(i, i + len, label));
                i += len;
                continue;
            }
            let starts_run = is_capitalized(tok) && !CAPITALIZED_STOPWORDS.contains(&tok.as_str());
            if starts_run {
                let mut j = i + 1;
                while j < tokens.len()
                    && is_capitalized(&tokens[j])
                    && self.pronouns.class_of(&tokens[j]).is_none()
                    && self.gazetteer_match(tokens, j).is_none()
                {
                    j += 1;
                }
                // A lone capitalized first word is usually just sentence case.
                if i > 0 || j - i > 1 {
                    spans.entities.push(TypedSpan::new(i, j, "ENTITY"));
                }
                i = j;
                continue;
            }
            i += 1;
        }
        spans
    }

    fn pronoun_class_members(&self, class: PronounClass) -> &[String] {
        self.pronouns.members(class)
    }
}
