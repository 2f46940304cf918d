use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary factuality label. `NonFactual` always means erroneous; on the wire it is `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Factual,
    NonFactual,
}

impl Label {
    pub fn from_nonfactual(flag: bool) -> Self {
        if flag {
            Label::NonFactual
        } else {
            Label::Factual
        }
    }

    pub fn is_nonfactual(self) -> bool {
        self == Label::NonFactual
    }

    pub fn to_wire(self) -> u8 {
        self.is_nonfactual() as u8
    }

    pub fn from_wire(value: u8, field: &str) -> Result<Self> {
        match value {
            0 => Ok(Label::Factual),
            1 => Ok(Label::NonFactual),
            other => Err(Error::validation(field, format!("expected 0 or 1, got {other}"))),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Factual => Label::NonFactual,
            Label::NonFactual => Label::Factual,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Factual => write!(f, "factual"),
            Label::NonFactual => write!(f, "non-factual"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ParseRepr {
    #[default]
    Basic,
    Collapsed,
}

impl ParseRepr {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseRepr::Basic => "basic",
            ParseRepr::Collapsed => "collapsed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(ParseRepr::Basic),
            "collapsed" => Ok(ParseRepr::Collapsed),
            other => Err(Error::validation("parse_repr", format!("unknown representation `{other}`"))),
        }
    }
}

/// Where a label set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    EntC,
    GenC,
    Human,
    ModelPrediction,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::EntC => "entc",
            Provenance::GenC => "genc",
            Provenance::Human => "human",
            Provenance::ModelPrediction => "pred",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "entc" => Ok(Provenance::EntC),
            "genc" => Ok(Provenance::GenC),
            "human" => Ok(Provenance::Human),
            "pred" => Ok(Provenance::ModelPrediction),
            other => Err(Error::validation("provenance", format!("unknown provenance `{other}`"))),
        }
    }
}

/// A directed dependency between two summary tokens, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub head: usize,
    pub child: usize,
    pub relation: String,
}

impl Arc {
    pub fn new(head: usize, child: usize, relation: impl Into<String>) -> Self {
        Arc {
            head,
            child,
            relation: relation.into(),
        }
    }

    pub fn touches(&self, token: usize) -> bool {
        self.head == token || self.child == token
    }
}

/// Dependency parse of a single summary sentence.
///
/// Construction validates bounds, self-loops and duplicate triples; the basic
/// representation must additionally form a single-rooted tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyParse {
    arcs: Vec<Arc>,
    token_count: usize,
    representation: ParseRepr,
}

impl DependencyParse {
    pub fn new(arcs: Vec<Arc>, token_count: usize, representation: ParseRepr) -> Result<Self> {
        let parse = DependencyParse {
            arcs,
            token_count,
            representation,
        };
        parse.validate()?;
        Ok(parse)
    }

    /// A parse with no arcs. Only valid as a basic tree for one token.
    pub fn empty(token_count: usize, representation: ParseRepr) -> Result<Self> {
        Self::new(Vec::new(), token_count, representation)
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn representation(&self) -> ParseRepr {
        self.representation
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Tokens touched by at least one arc.
    pub fn incident_tokens(&self) -> Vec<bool> {
        let mut incident = vec![false; self.token_count];
        for arc in &self.arcs {
            incident[arc.head] = true;
            incident[arc.child] = true;
        }
        incident
    }

    /// Head index of every token for a basic tree; `None` marks the root.
    pub fn heads(&self) -> Vec<Option<usize>> {
        let mut heads = vec![None; self.token_count];
        for arc in &self.arcs {
            heads[arc.child] = Some(arc.head);
        }
        heads
    }

    pub fn root(&self) -> Option<usize> {
        if self.representation != ParseRepr::Basic || self.token_count == 0 {
            return None;
        }
        self.heads().iter().position(Option::is_none)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, arc) in self.arcs.iter().enumerate() {
            if arc.head >= self.token_count || arc.child >= self.token_count {
                return Err(Error::validation(
                    "arcs",
                    format!(
                        "arc {i} ({}, {}) out of range for {} tokens",
                        arc.head, arc.child, self.token_count
                    ),
                ));
            }
            if arc.head == arc.child {
                return Err(Error::validation("arcs", format!("arc {i} is a self-loop on token {}", arc.head)));
            }
            if !seen.insert((arc.head, arc.child, arc.relation.as_str())) {
                return Err(Error::validation(
                    "arcs",
                    format!("duplicate arc ({}, {}, {})", arc.head, arc.child, arc.relation),
                ));
            }
        }
        if self.representation == ParseRepr::Basic {
            self.validate_tree()?;
        }
        Ok(())
    }

    fn validate_tree(&self) -> Result<()> {
        if self.token_count == 0 {
            return Err(Error::validation("arcs", "basic parse over zero tokens"));
        }
        if self.arcs.len() + 1 != self.token_count {
            return Err(Error::validation(
                "arcs",
                format!(
                    "basic tree over {} tokens needs {} arcs, found {}",
                    self.token_count,
                    self.token_count - 1,
                    self.arcs.len()
                ),
            ));
        }
        let mut heads = vec![None; self.token_count];
        for arc in &self.arcs {
            if heads[arc.child].replace(arc.head).is_some() {
                return Err(Error::validation("arcs", format!("token {} has more than one head", arc.child)));
            }
        }
        // n-1 arcs with unique children leave exactly one root; any cycle would
        // leave some token unable to reach it.
        for start in 0..self.token_count {
            let mut cur = start;
            let mut steps = 0;
            while let Some(h) = heads[cur] {
                cur = h;
                steps += 1;
                if steps > self.token_count {
                    return Err(Error::validation("arcs", format!("cycle through token {start}")));
                }
            }
        }
        Ok(())
    }
}

/// A source document, pretokenized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub meta: BTreeMap<String, String>,
    /// Optional dependencies over document tokens (union of per-sentence parses).
    pub dependencies: Option<Vec<Arc>>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, tokens: Vec<String>) -> Result<Self> {
        let doc = Document {
            id: id.into(),
            text: text.into(),
            tokens,
            meta: BTreeMap::new(),
            dependencies: None,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn from_tokens(id: impl Into<String>, tokens: Vec<String>) -> Result<Self> {
        let text = tokens.join(" ");
        Self::new(id, text, tokens)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::validation("doc_tokens", "document has no tokens"));
        }
        let normalized: Vec<&str> = self.text.split_whitespace().collect();
        let joined: Vec<&str> = self.tokens.iter().flat_map(|t| t.split_whitespace()).collect();
        if normalized != joined {
            return Err(Error::validation("doc_tokens", "tokens do not reproduce the document text"));
        }
        if let Some(deps) = &self.dependencies {
            for arc in deps {
                if arc.head >= self.tokens.len() || arc.child >= self.tokens.len() || arc.head == arc.child {
                    return Err(Error::validation(
                        "doc_arcs",
                        format!("invalid document arc ({}, {})", arc.head, arc.child),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn generation_model(&self) -> Option<&str> {
        self.meta.get("model").map(String::as_str)
    }
}

/// A single summary sentence with its parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummarySentence {
    pub id: String,
    pub tokens: Vec<String>,
    pub parse: DependencyParse,
}

impl SummarySentence {
    pub fn new(id: impl Into<String>, tokens: Vec<String>, parse: DependencyParse) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::validation("sum_tokens", "summary has no tokens"));
        }
        if parse.token_count() != tokens.len() {
            return Err(Error::validation(
                "arcs",
                format!("parse covers {} tokens, summary has {}", parse.token_count(), tokens.len()),
            ));
        }
        Ok(SummarySentence {
            id: id.into(),
            tokens,
            parse,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Labels at up to three granularities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactLabelSet {
    pub sentence_label: Label,
    /// `true` marks a non-factual word.
    pub word_mask: Option<Vec<bool>>,
    pub arc_labels: Option<Vec<Label>>,
    pub provenance: Provenance,
}

impl FactLabelSet {
    pub fn sentence_only(sentence_label: Label, provenance: Provenance) -> Self {
        FactLabelSet {
            sentence_label,
            word_mask: None,
            arc_labels: None,
            provenance,
        }
    }

    pub fn validate(&self, parse: &DependencyParse) -> Result<()> {
        if let Some(mask) = &self.word_mask {
            if mask.len() != parse.token_count() {
                return Err(Error::validation(
                    "word_mask",
                    format!("length {} but summary has {} tokens", mask.len(), parse.token_count()),
                ));
            }
            let any = mask.iter().any(|&w| w);
            match self.sentence_label {
                Label::Factual if any => {
                    return Err(Error::validation("word_mask", "factual sentence has highlighted words"));
                }
                Label::NonFactual if !any => {
                    return Err(Error::validation("word_mask", "non-factual sentence has no highlighted word"));
                }
                _ => {}
            }
        }
        if let Some(arcs) = &self.arc_labels {
            if arcs.len() != parse.len() {
                return Err(Error::validation(
                    "arc_labels",
                    format!("{} labels for {} arcs", arcs.len(), parse.len()),
                ));
            }
            let any = arcs.iter().any(|l| l.is_nonfactual());
            if any && self.sentence_label == Label::Factual {
                return Err(Error::validation("arc_labels", "non-factual arc in a factual sentence"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorCategory {
    EntityRelated,
    EventRelated,
    NounPhraseRelated,
    Other,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 4] = [
        ErrorCategory::EntityRelated,
        ErrorCategory::EventRelated,
        ErrorCategory::NounPhraseRelated,
        ErrorCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::EntityRelated => "entity",
            ErrorCategory::EventRelated => "event",
            ErrorCategory::NounPhraseRelated => "np",
            ErrorCategory::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ErrorCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::validation("error_tags.cat", format!("unknown category `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Intrinsic,
    Extrinsic,
    NotApplicable,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::Intrinsic, Orientation::Extrinsic, Orientation::NotApplicable];

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Intrinsic => "intrinsic",
            Orientation::Extrinsic => "extrinsic",
            Orientation::NotApplicable => "na",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Orientation::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::validation("error_tags.orient", format!("unknown orientation `{s}`")))
    }
}

/// A manually assigned error-taxonomy tag over a summary token span `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorTag {
    pub category: ErrorCategory,
    pub orientation: Orientation,
    pub start: usize,
    pub end: usize,
}

impl ErrorTag {
    pub fn validate(&self, token_count: usize) -> Result<()> {
        if self.start >= self.end || self.end > token_count {
            return Err(Error::validation(
                "error_tags",
                format!("span [{}, {}) invalid for {} tokens", self.start, self.end, token_count),
            ));
        }
        if self.category == ErrorCategory::Other && self.orientation != Orientation::NotApplicable {
            return Err(Error::validation("error_tags", "`other` errors carry no orientation"));
        }
        Ok(())
    }
}

/// The record every module consumes and produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedExample {
    pub document: Document,
    pub summary: SummarySentence,
    pub labels: FactLabelSet,
    pub error_tags: Option<Vec<ErrorTag>>,
}

impl AnnotatedExample {
    pub fn id(&self) -> &str {
        &self.summary.id
    }

    pub fn validate(&self) -> Result<()> {
        self.document.validate()?;
        self.labels.validate(&self.summary.parse)?;
        if let Some(tags) = &self.error_tags {
            for tag in tags {
                tag.validate(self.summary.len())?;
            }
        }
        Ok(())
    }
}
