//! Projection of a dependency parse through token-level edits.
//!
//! Synthetic transformations rewrite summary tokens; rather than re-parsing,
//! the original parse is carried across the edit. Basic trees stay trees.

use std::collections::HashSet;

use super::types::{Arc, DependencyParse, ParseRepr};
use crate::error::{Error, Result};

type Head = Option<(usize, String)>;

fn heads_of(parse: &DependencyParse) -> Vec<Head> {
    let mut heads = vec![None; parse.token_count()];
    for arc in parse.arcs() {
        heads[arc.child] = Some((arc.head, arc.relation.clone()));
    }
    heads
}

fn from_heads(heads: Vec<Head>, repr: ParseRepr) -> Result<DependencyParse> {
    let n = heads.len();
    let arcs = heads
        .into_iter()
        .enumerate()
        .filter_map(|(child, h)| h.map(|(head, rel)| Arc::new(head, child, rel)))
        .collect();
    DependencyParse::new(arcs, n, repr)
}

fn dedup(arcs: Vec<Arc>) -> Vec<Arc> {
    let mut seen = HashSet::new();
    arcs.into_iter()
        .filter(|a| a.head != a.child && seen.insert(a.clone()))
        .collect()
}

/// Replace tokens `[start, start + old_len)` by `new_len` fresh tokens.
///
/// Equal-length replacements keep the parse unchanged. Otherwise the last new
/// token inherits the attachment of the replaced span and any dependents of the
/// span; remaining new tokens attach to it with `filler_rel`.
pub fn splice(
    parse: &DependencyParse,
    start: usize,
    old_len: usize,
    new_len: usize,
    filler_rel: &str,
) -> Result<DependencyParse> {
    let n = parse.token_count();
    if start + old_len > n {
        return Err(Error::validation("span", format!("[{start}, {}) exceeds {n} tokens", start + old_len)));
    }
    if old_len == new_len {
        return Ok(parse.clone());
    }
    if new_len == 0 {
        return delete_span(parse, start, old_len);
    }
    if old_len == 0 {
        return Err(Error::validation("span", "use `insert` for pure insertions"));
    }
    let end = start + old_len;
    let new_root = start + new_len - 1;
    let map = |i: usize| -> usize {
        if i < start {
            i
        } else if i < end {
            new_root
        } else {
            i - old_len + new_len
        }
    };
    match parse.representation() {
        ParseRepr::Basic => {
            let old = heads_of(parse);
            let span_root = (start..end)
                .rev()
                .find(|&i| old[i].as_ref().is_none_or(|(h, _)| *h < start || *h >= end))
                .expect("a tree span always has a token attached outside it");
            let mut heads: Vec<Head> = vec![None; n - old_len + new_len];
            for (i, h) in old.iter().enumerate() {
                if (start..end).contains(&i) {
                    continue;
                }
                heads[map(i)] = h.as_ref().map(|(h, r)| (map(*h), r.clone()));
            }
            heads[new_root] = old[span_root].as_ref().map(|(h, r)| (map(*h), r.clone()));
            for h in heads.iter_mut().take(new_root).skip(start) {
                *h = Some((new_root, filler_rel.to_string()));
            }
            from_heads(heads, ParseRepr::Basic)
        }
        ParseRepr::Collapsed => {
            let mut arcs: Vec<Arc> = parse
                .arcs()
                .iter()
                .map(|a| Arc::new(map(a.head), map(a.child), a.relation.clone()))
                .collect();
            arcs.extend((start..new_root).map(|j| Arc::new(new_root, j, filler_rel)));
            DependencyParse::new(dedup(arcs), n - old_len + new_len, ParseRepr::Collapsed)
        }
    }
}

/// Insert `count` tokens at position `at`, each attached to old token `head`.
pub fn insert(parse: &DependencyParse, at: usize, count: usize, head: usize, rel: &str) -> Result<DependencyParse> {
    let n = parse.token_count();
    if at > n || head >= n {
        return Err(Error::validation("span", format!("insertion at {at} / head {head} out of range")));
    }
    let map = |i: usize| if i < at { i } else { i + count };
    let mut arcs: Vec<Arc> = parse
        .arcs()
        .iter()
        .map(|a| Arc::new(map(a.head), map(a.child), a.relation.clone()))
        .collect();
    arcs.extend((at..at + count).map(|j| Arc::new(map(head), j, rel)));
    DependencyParse::new(arcs, n + count, parse.representation())
}

/// Remove tokens `[start, start + len)`.
///
/// In a basic tree, dependents of removed tokens climb to the nearest
/// surviving ancestor; if the root is removed, the first orphan becomes root.
pub fn delete_span(parse: &DependencyParse, start: usize, len: usize) -> Result<DependencyParse> {
    let n = parse.token_count();
    let end = start + len;
    if end > n || len >= n {
        return Err(Error::validation("span", format!("cannot delete [{start}, {end}) from {n} tokens")));
    }
    let map = |i: usize| if i < start { i } else { i - len };
    let removed = |i: usize| (start..end).contains(&i);
    match parse.representation() {
        ParseRepr::Basic => {
            let old = heads_of(parse);
            let mut heads: Vec<Head> = vec![None; n - len];
            let mut orphans = Vec::new();
            for (i, h) in old.iter().enumerate() {
                if removed(i) {
                    continue;
                }
                let mut cur = h.clone();
                let rel = h.as_ref().map(|(_, r)| r.clone());
                while let Some((hd, _)) = &cur {
                    if !removed(*hd) {
                        break;
                    }
                    cur = old[*hd].clone();
                }
                match cur {
                    Some((hd, _)) => heads[map(i)] = Some((map(hd), rel.expect("has head"))),
                    None => orphans.push((map(i), rel)),
                }
            }
            if let Some(&(root, _)) = orphans.first() {
                for (o, rel) in orphans.into_iter().skip(1) {
                    heads[o] = Some((root, rel.unwrap_or_else(|| "dep".into())));
                }
            }
            from_heads(heads, ParseRepr::Basic)
        }
        ParseRepr::Collapsed => {
            let arcs = parse
                .arcs()
                .iter()
                .filter(|a| !removed(a.head) && !removed(a.child))
                .map(|a| Arc::new(map(a.head), map(a.child), a.relation.clone()))
                .collect();
            DependencyParse::new(arcs, n - len, ParseRepr::Collapsed)
        }
    }
}
