//! Ingestion of tabular (CoNLL-X / CoNLL-U style) dependency parses.

use std::collections::HashSet;

use super::types::{Arc, DependencyParse, ParseRepr};
use crate::error::{Error, Result};

/// One token row of a tabular parse. Heads are 1-based with `0` for the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConllRow {
    pub id: usize,
    pub form: String,
    pub head: usize,
    pub deprel: String,
    /// Enhanced/collapsed dependencies, `head:rel|head:rel`, if the column is filled.
    pub deps: Option<String>,
}

impl ConllRow {
    pub fn new(id: usize, form: impl Into<String>, head: usize, deprel: impl Into<String>) -> Self {
        ConllRow {
            id,
            form: form.into(),
            head,
            deprel: deprel.into(),
            deps: None,
        }
    }
}

/// Split tabular text into sentences of rows.
///
/// Comment lines, multiword ranges (`3-4`) and empty nodes (`5.1`) are skipped.
/// Sentences are separated by blank lines. Line numbers in errors are 1-based.
pub fn read_conll(text: &str) -> Result<Vec<Vec<ConllRow>>> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(Error::parse(line_no, format!("expected at least 8 columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id = cols[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad token id `{}`", cols[0])))?;
        let head = cols[6]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad head `{}`", cols[6])))?;
        let deps = cols
            .get(8)
            .filter(|d| !d.is_empty() && **d != "_")
            .map(|d| d.to_string());
        current.push(ConllRow {
            id,
            form: cols[1].to_string(),
            head,
            deprel: cols[7].to_string(),
            deps,
        });
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

/// Convert rows aligned 1:1 with `tokens` into a 0-based [`DependencyParse`].
///
/// The root attachment (head 0) produces no arc. For the collapsed
/// representation the `deps` column is used when present, falling back to the
/// basic head/relation. Error line numbers refer to row positions (1-based).
pub fn ingest_parse(tokens: &[String], rows: &[ConllRow], representation: ParseRepr) -> Result<DependencyParse> {
    if rows.len() != tokens.len() {
        return Err(Error::parse(
            0,
            format!("{} rows for {} tokens", rows.len(), tokens.len()),
        ));
    }
    let n = tokens.len();
    let mut arcs = Vec::with_capacity(n.saturating_sub(1));
    for (pos, (row, token)) in rows.iter().zip(tokens).enumerate() {
        let line = pos + 1;
        if row.id != pos + 1 {
            return Err(Error::parse(line, format!("row id {} out of sequence", row.id)));
        }
        if &row.form != token {
            return Err(Error::parse(line, format!("row form `{}` does not match token `{token}`", row.form)));
        }
        let heads: Vec<(usize, String)> = match (representation, &row.deps) {
            (ParseRepr::Collapsed, Some(deps)) => parse_deps(deps, line)?,
            _ => vec![(row.head, row.deprel.clone())],
        };
        for (head, rel) in heads {
            if head > n {
                return Err(Error::parse(line, format!("head {head} out of range for {n} tokens")));
            }
            if head == row.id {
                return Err(Error::parse(line, "token is its own head"));
            }
            if head != 0 {
                arcs.push(Arc::new(head - 1, pos, rel));
            }
        }
    }
    if representation == ParseRepr::Basic {
        check_acyclic(&arcs, n)?;
        let roots = n - arcs.len();
        if roots != 1 {
            return Err(Error::parse(0, format!("expected a single root, found {roots}")));
        }
    }
    let mut seen = HashSet::new();
    arcs.retain(|a| seen.insert(a.clone()));
    DependencyParse::new(arcs, n, representation).map_err(|e| Error::parse(0, e.to_string()))
}

fn parse_deps(deps: &str, line: usize) -> Result<Vec<(usize, String)>> {
    deps.split('|')
        .map(|item| {
            let (head, rel) = item
                .split_once(':')
                .ok_or_else(|| Error::parse(line, format!("bad deps item `{item}`")))?;
            let head = head
                .parse()
                .map_err(|_| Error::parse(line, format!("bad deps head `{head}`")))?;
            Ok((head, rel.to_string()))
        })
        .collect()
}

fn check_acyclic(arcs: &[Arc], n: usize) -> Result<()> {
    let mut heads = vec![None; n];
    for arc in arcs {
        heads[arc.child] = Some(arc.head);
    }
    for start in 0..n {
        let mut cur = start;
        let mut steps = 0;
        while let Some(h) = heads[cur] {
            cur = h;
            steps += 1;
            if steps > n {
                return Err(Error::parse(start + 1, "cycle detected"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn single_token_root_only() {
        let parse = ingest_parse(&toks("Hello"), &[ConllRow::new(1, "Hello", 0, "root")], ParseRepr::Basic).unwrap();
        assert_eq!(parse.len(), 0);
        assert_eq!(parse.token_count(), 1);
    }

    #[test]
    fn dogs_bark() {
        let rows = [ConllRow::new(1, "dogs", 2, "nsubj"), ConllRow::new(2, "bark", 0, "root")];
        let parse = ingest_parse(&toks("dogs bark"), &rows, ParseRepr::Basic).unwrap();
        assert_eq!(parse.arcs(), &[Arc::new(1, 0, "nsubj")]);
    }

    #[test]
    fn self_head_rejected() {
        let rows = [ConllRow::new(1, "dogs", 1, "nsubj"), ConllRow::new(2, "bark", 0, "root")];
        let err = ingest_parse(&toks("dogs bark"), &rows, ParseRepr::Basic).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn cycle_rejected() {
        let rows = [
            ConllRow::new(1, "a", 2, "dep"),
            ConllRow::new(2, "b", 1, "dep"),
            ConllRow::new(3, "c", 0, "root"),
        ];
        let err = ingest_parse(&toks("a b c"), &rows, ParseRepr::Basic).unwrap_err();
        assert!(err.to_string().contains("cycle"), "{err}");
    }

    #[test]
    fn head_out_of_range() {
        let rows = [ConllRow::new(1, "a", 5, "dep"), ConllRow::new(2, "b", 0, "root")];
        assert!(ingest_parse(&toks("a b"), &rows, ParseRepr::Basic).is_err());
    }

    #[test]
    fn misaligned_rows() {
        let rows = [ConllRow::new(1, "a", 0, "root")];
        assert!(ingest_parse(&toks("a b"), &rows, ParseRepr::Basic).is_err());
    }

    #[test]
    fn reads_tabular_text_with_comments_and_ranges() {
        let text = "# sent_id = 1\n\
                    1\tThe\tthe\tDET\tDT\t_\t2\tdet\t_\t_\n\
                    2\tdog\tdog\tNOUN\tNN\t_\t3\tnsubj\t_\t_\n\
                    3-4\tbarks.\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    3\tbarks\tbark\tVERB\tVBZ\t_\t0\troot\t_\t_\n\
                    4\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_\n\
                    \n\
                    1\tYes\tyes\tINTJ\tUH\t_\t0\troot\t_\t_\n";
        let sents = read_conll(text).unwrap();
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[0].len(), 4);
        let parse = ingest_parse(&toks("The dog barks ."), &sents[0], ParseRepr::Basic).unwrap();
        assert_eq!(parse.root(), Some(2));
        assert_eq!(parse.len(), 3);
    }

    #[test]
    fn collapsed_uses_deps_column() {
        let text = "1\tcreated\tcreate\tVERB\t_\t_\t0\troot\t0:root\t_\n\
                    2\twith\twith\tADP\t_\t_\t3\tcase\t3:case\t_\n\
                    3\tnecklace\tnecklace\tNOUN\t_\t_\t1\tobl\t1:obl:with\t_\n";
        let sents = read_conll(text).unwrap();
        let parse = ingest_parse(&toks("created with necklace"), &sents[0], ParseRepr::Collapsed).unwrap();
        assert!(parse.arcs().contains(&Arc::new(0, 2, "obl:with")));
    }

    #[test]
    fn short_row_is_parse_error_with_line() {
        let err = read_conll("1\ta\tb\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
