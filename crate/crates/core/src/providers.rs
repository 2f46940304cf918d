//! Pluggable external components: paraphrase generation and dependency parsing.
//!
//! Each interface ships with a deterministic in-process implementation for
//! hermetic runs; the command-backed parser wraps any external tool that
//! emits tabular parses.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};

use crate::data::{ingest_parse, read_conll, Arc, DependencyParse, ParseRepr, SummarySentence};
use crate::error::{Error, Result};
use crate::rng::fnv1a;

/// A paraphrase with token alignment back to its source sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paraphrase {
    pub tokens: Vec<String>,
    /// For each paraphrase token, the aligned source token (if any).
    pub alignment: Vec<Option<usize>>,
    /// Parse of the paraphrase, when the provider can supply one.
    pub parse: Option<DependencyParse>,
}

/// Returns the k-th ranked paraphrase of a sentence.
pub trait ParaphraseProvider: Send + Sync {
    /// `rank` is 1-based. Rank 1 must be returned whenever any result exists.
    fn paraphrase(&self, sentence: &SummarySentence, rank: usize) -> Result<Option<Paraphrase>>;
}

/// Produces a dependency parse for pretokenized text.
pub trait ParserProvider: Send + Sync {
    fn parse(&self, tokens: &[String]) -> Result<DependencyParse>;
}

/// Rule-based stand-in for a beam-search paraphraser.
///
/// Lower ranks stay close to the input; deeper ranks stack progressively
/// less faithful rewrites:
///
/// * every rank: synonym substitution (aligned 1:1)
/// * rank >= 3: a trailing adjunct clause of the root moves to the front
/// * rank >= 6: an unaligned modifier is inserted before the object/subject
/// * rank >= 9: subject and object head words swap places
#[derive(Debug, Clone)]
pub struct MockParaphraser {
    synonyms: BTreeMap<String, String>,
    modifiers: Vec<String>,
    beam: usize,
}

impl Default for MockParaphraser {
    fn default() -> Self {
        let synonyms = [
            ("said", "stated"),
            ("big", "large"),
            ("small", "little"),
            ("quickly", "rapidly"),
            ("begin", "start"),
            ("buy", "purchase"),
            ("help", "assist"),
            ("show", "demonstrate"),
            ("people", "individuals"),
            ("children", "kids"),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        let modifiers = ["new", "former", "local", "senior", "secret", "rare"]
            .into_iter()
            .map(String::from)
            .collect();
        MockParaphraser {
            synonyms,
            modifiers,
            beam: 10,
        }
    }
}

impl MockParaphraser {
    pub fn new(synonyms: BTreeMap<String, String>, modifiers: Vec<String>, beam: usize) -> Self {
        MockParaphraser {
            synonyms,
            modifiers,
            beam,
        }
    }

    fn substitute(&self, tokens: &mut [String]) {
        for tok in tokens.iter_mut() {
            if let Some(syn) = self.synonyms.get(&tok.to_lowercase()) {
                *tok = if tok.chars().next().is_some_and(char::is_uppercase) {
                    crate::entc::title_case(syn)
                } else {
                    syn.clone()
                };
            }
        }
    }
}

/// Contiguous token range covered by the subtree of `node`.
fn subtree_span(heads: &[Option<usize>], node: usize) -> Option<(usize, usize)> {
    let in_subtree = |mut t: usize| loop {
        if t == node {
            return true;
        }
        match heads[t] {
            Some(h) => t = h,
            None => return false,
        }
    };
    let members: Vec<usize> = (0..heads.len()).filter(|&t| in_subtree(t)).collect();
    let (lo, hi) = (*members.first()?, *members.last()?);
    (hi - lo + 1 == members.len()).then_some((lo, hi + 1))
}

fn is_punct(tok: &str) -> bool {
    tok.chars().all(|c| c.is_ascii_punctuation())
}

/// Apply a permutation (`order[new] = old`) to tokens, alignment and parse.
fn permute(
    tokens: &[String],
    alignment: &[Option<usize>],
    parse: &DependencyParse,
    order: &[usize],
) -> Result<(Vec<String>, Vec<Option<usize>>, DependencyParse)> {
    let mut inverse = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        inverse[old] = new;
    }
    let arcs = parse
        .arcs()
        .iter()
        .map(|a| Arc::new(inverse[a.head], inverse[a.child], a.relation.clone()))
        .collect();
    Ok((
        order.iter().map(|&o| tokens[o].clone()).collect(),
        order.iter().map(|&o| alignment[o]).collect(),
        DependencyParse::new(arcs, order.len(), parse.representation())?,
    ))
}

impl ParaphraseProvider for MockParaphraser {
    fn paraphrase(&self, sentence: &SummarySentence, rank: usize) -> Result<Option<Paraphrase>> {
        if rank == 0 || rank > self.beam {
            return Ok(None);
        }
        let mut tokens = sentence.tokens.clone();
        let mut alignment: Vec<Option<usize>> = (0..tokens.len()).map(Some).collect();
        let mut parse = sentence.parse.clone();
        self.substitute(&mut tokens);

        let basic_root = parse.root();
        if let (true, Some(root)) = (rank >= 3, basic_root) {
            let heads = parse.heads();
            let n = tokens.len();
            let end = if n > 0 && is_punct(&tokens[n - 1]) { n - 1 } else { n };
            let adjunct = parse
                .arcs()
                .iter()
                .filter(|a| a.head == root && a.child > root)
                .filter(|a| ["obl", "advmod", "advcl", "nmod"].iter().any(|r| a.relation.starts_with(r)))
                .filter_map(|a| subtree_span(&heads, a.child))
                .find(|&(lo, hi)| hi == end && lo > root);
            if let Some((lo, hi)) = adjunct {
                let order: Vec<usize> = (lo..hi).chain(0..lo).chain(hi..n).collect();
                (tokens, alignment, parse) = permute(&tokens, &alignment, &parse, &order)?;
            }
        }

        let root = parse.root();
        let child_with = |parse: &DependencyParse, rel: &str| {
            root.and_then(|r| parse.arcs().iter().find(|a| a.head == r && a.relation == rel).map(|a| a.child))
        };

        if rank >= 6 && !self.modifiers.is_empty() {
            if let Some(target) = child_with(&parse, "obj").or_else(|| child_with(&parse, "nsubj")) {
                let key = tokens.join(" ");
                let pick = (fnv1a(key.as_bytes()) as usize).wrapping_add(rank) % self.modifiers.len();
                let modifier = self.modifiers[pick].clone();
                // the modifier takes the target's position and attaches to the shifted target
                parse = crate::data::edit::insert(&parse, target, 1, target, "amod")?;
                tokens.insert(target, modifier);
                alignment.insert(target, None);
            }
        }

        if rank >= 9 {
            if let (Some(s), Some(o)) = (child_with(&parse, "nsubj"), child_with(&parse, "obj")) {
                tokens.swap(s, o);
                alignment.swap(s, o);
            }
        }

        Ok(Some(Paraphrase {
            tokens,
            alignment,
            parse: Some(parse),
        }))
    }
}

/// Runs an external parser: tokens go to stdin one per line, a tabular parse
/// comes back on stdout.
#[derive(Debug, Clone)]
pub struct CommandParser {
    pub program: String,
    pub args: Vec<String>,
    pub representation: ParseRepr,
}

impl CommandParser {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        CommandParser {
            program: program.into(),
            args,
            representation: ParseRepr::Basic,
        }
    }
}

impl ParserProvider for CommandParser {
    fn parse(&self, tokens: &[String]) -> Result<DependencyParse> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Provider(format!("cannot start parser `{}`: {e}", self.program)))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            let input = tokens.join("\n") + "\n";
            stdin
                .write_all(input.as_bytes())
                .map_err(|e| Error::Provider(format!("parser stdin: {e}")))?;
        }
        let output = child
            .wait_with_output()
            .map_err(|e| Error::Provider(format!("parser failed: {e}")))?;
        if !output.status.success() {
            return Err(Error::Provider(format!("parser exited with {}", output.status)));
        }
        let text = String::from_utf8_lossy(&output.stdout);
        let sentences = read_conll(&text)?;
        let rows = sentences
            .first()
            .ok_or_else(|| Error::Provider("parser produced no sentence".into()))?;
        ingest_parse(tokens, rows, self.representation)
    }
}
