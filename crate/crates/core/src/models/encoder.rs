use std::collections::HashSet;
use std::io::Write;
use std::process::{Command, Stdio};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{child_rng, fnv1a};

/// Encoder output for one (document; summary) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    /// Sequence-level vector (the `[CLS]` analogue).
    pub pooled: Vec<f64>,
    /// One vector per summary token.
    pub tokens: Vec<Vec<f64>>,
}

/// Contextual token vectors for a (document; summary) pair.
///
/// Trainable encoders expose a flat parameter vector and a backward pass;
/// frozen encoders keep the defaults.
pub trait EncoderProvider: Send + Sync {
    fn spec(&self) -> EncoderSpec;

    fn dim(&self) -> usize;

    fn encode(&self, document: &[String], summary: &[String]) -> Result<Encoding>;

    fn params(&self) -> &[f64] {
        &[]
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut []
    }

    /// Add d(loss)/d(params) into `grad`, given the gradients with respect to
    /// the pooled vector and each token vector of `encode(document, summary)`.
    fn backward(
        &self,
        _document: &[String],
        _summary: &[String],
        _grad_pooled: &[f64],
        _grad_tokens: &[Vec<f64>],
        _grad: &mut [f64],
    ) -> Result<()> {
        Ok(())
    }
}

/// Serializable description of an encoder, stored with every checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EncoderSpec {
    Mock { dim: usize, buckets: usize, max_seq: usize },
    Command { program: String, args: Vec<String>, dim: usize, max_seq: usize },
}

pub const DEFAULT_DIM: usize = 32;
pub const DEFAULT_BUCKETS: usize = 64;
pub const DEFAULT_MAX_SEQ: usize = 512;

impl Default for EncoderSpec {
    fn default() -> Self {
        EncoderSpec::Mock {
            dim: DEFAULT_DIM,
            buckets: DEFAULT_BUCKETS,
            max_seq: DEFAULT_MAX_SEQ,
        }
    }
}

impl EncoderSpec {
    /// Parse an encoder key: `mock` or `cmd:<program>`. The command encoder's
    /// output dimension must be given separately.
    pub fn from_key(key: &str, dim: usize, max_seq: usize) -> Result<Self> {
        if key == "mock" {
            return Ok(EncoderSpec::Mock {
                dim,
                buckets: DEFAULT_BUCKETS,
                max_seq,
            });
        }
        if let Some(cmd) = key.strip_prefix("cmd:") {
            let mut parts = cmd.split_whitespace().map(String::from);
            let program = parts
                .next()
                .ok_or_else(|| Error::Config {
                    key: "encoder".into(),
                    message: "empty command".into(),
                })?;
            return Ok(EncoderSpec::Command {
                program,
                args: parts.collect(),
                dim,
                max_seq,
            });
        }
        Err(Error::Config {
            key: "encoder".into(),
            message: format!("unknown encoder `{key}` (expected `mock` or `cmd:<program>`)"),
        })
    }

    pub fn key(&self) -> String {
        match self {
            EncoderSpec::Mock { .. } => "mock".into(),
            EncoderSpec::Command { program, args, .. } => {
                let mut key = format!("cmd:{program}");
                for a in args {
                    key.push(' ');
                    key.push_str(a);
                }
                key
            }
        }
    }

    /// Build the encoder; `seed` initializes trainable parameters.
    pub fn build(&self, seed: u64) -> Result<Box<dyn EncoderProvider>> {
        match self {
            EncoderSpec::Mock { dim, buckets, max_seq } => {
                Ok(Box::new(MockEncoder::new(*dim, *buckets, *max_seq, seed)?))
            }
            EncoderSpec::Command {
                program,
                args,
                dim,
                max_seq,
            } => Ok(Box::new(CommandEncoder {
                program: program.clone(),
                args: args.clone(),
                dim: *dim,
                max_seq: *max_seq,
            })),
        }
    }
}

/// Document tokens that fit next to the summary in a `max_seq` budget with
/// three special tokens. Documents lose their tail; summaries are never cut.
pub fn truncate_document<'a>(document: &'a [String], summary_len: usize, max_seq: usize) -> &'a [String] {
    let budget = max_seq.saturating_sub(summary_len + 3);
    &document[..document.len().min(budget)]
}

/// Unordered, lowercased adjacent token pairs.
pub fn adjacent_pairs(tokens: &[String]) -> HashSet<(String, String)> {
    tokens
        .windows(2)
        .map(|w| unordered(&w[0], &w[1]))
        .collect()
}

pub fn unordered(a: &str, b: &str) -> (String, String) {
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

const BIAS: usize = 0;
const IN_DOC: usize = 1;
const LEFT_IN_DOC: usize = 2;
const RIGHT_IN_DOC: usize = 3;
const DENSE: usize = 4;

/// Deterministic stand-in for a pretrained encoder.
///
/// Each summary token gets a sparse binary feature vector: a bias, whether the
/// token occurs in the document, whether its left/right adjacent pair occurs
/// adjacently in the document (true at sentence edges), a hashed token
/// identity and a hashed left-bigram identity. The token vector is
/// `tanh(P x)` with a trainable, Gaussian-initialized `P`; the pooled vector
/// is the mean token vector.
#[derive(Debug, Clone)]
pub struct MockEncoder {
    dim: usize,
    buckets: usize,
    max_seq: usize,
    /// Row-major `dim x features`.
    weights: Vec<f64>,
}

impl MockEncoder {
    pub fn new(dim: usize, buckets: usize, max_seq: usize, seed: u64) -> Result<Self> {
        if dim == 0 || buckets == 0 {
            return Err(Error::validation("encoder", "dimension and bucket count must be positive"));
        }
        let features = DENSE + 2 * buckets;
        let mut rng = child_rng(seed, &["mock-encoder"]);
        let normal = Normal::new(0.0, 0.5).expect("valid normal");
        let weights = (0..dim * features).map(|_| normal.sample(&mut rng)).collect();
        Ok(MockEncoder {
            dim,
            buckets,
            max_seq,
            weights,
        })
    }

    fn features(&self) -> usize {
        DENSE + 2 * self.buckets
    }

    /// Active feature indices per summary token.
    pub fn active_features(&self, document: &[String], summary: &[String]) -> Vec<Vec<usize>> {
        let doc = truncate_document(document, summary.len(), self.max_seq);
        let vocab: HashSet<String> = doc.iter().map(|t| t.to_lowercase()).collect();
        let pairs = adjacent_pairs(doc);
        let pair_in_doc = |i: usize, j: usize| pairs.contains(&unordered(&summary[i], &summary[j]));
        let n = summary.len();
        (0..n)
            .map(|i| {
                let mut f = vec![BIAS];
                if vocab.contains(&summary[i].to_lowercase()) {
                    f.push(IN_DOC);
                }
                if i == 0 || pair_in_doc(i - 1, i) {
                    f.push(LEFT_IN_DOC);
                }
                if i + 1 == n || pair_in_doc(i, i + 1) {
                    f.push(RIGHT_IN_DOC);
                }
                let lower = summary[i].to_lowercase();
                f.push(DENSE + (fnv1a(lower.as_bytes()) % self.buckets as u64) as usize);
                let prev = if i == 0 { "<s>".to_string() } else { summary[i - 1].to_lowercase() };
                let bigram = format!("{prev}\u{1f}{lower}");
                f.push(DENSE + self.buckets + (fnv1a(bigram.as_bytes()) % self.buckets as u64) as usize);
                f
            })
            .collect()
    }

    fn token_vector(&self, active: &[usize]) -> Vec<f64> {
        let h = self.features();
        (0..self.dim)
            .map(|r| {
                let row = &self.weights[r * h..(r + 1) * h];
                active.iter().map(|&j| row[j]).sum::<f64>().tanh()
            })
            .collect()
    }

    /// Flat parameter indices touched by the given active features.
    pub fn param_indices(&self, active: &[usize]) -> Vec<usize> {
        let h = self.features();
        (0..self.dim)
            .flat_map(|r| active.iter().map(move |&j| r * h + j))
            .collect()
    }
}

impl EncoderProvider for MockEncoder {
    fn spec(&self) -> EncoderSpec {
        EncoderSpec::Mock {
            dim: self.dim,
            buckets: self.buckets,
            max_seq: self.max_seq,
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, document: &[String], summary: &[String]) -> Result<Encoding> {
        if summary.is_empty() {
            return Err(Error::validation("sum_tokens", "cannot encode an empty summary"));
        }
        let tokens: Vec<Vec<f64>> = self
            .active_features(document, summary)
            .iter()
            .map(|a| self.token_vector(a))
            .collect();
        let n = tokens.len() as f64;
        let pooled = (0..self.dim)
            .map(|r| tokens.iter().map(|v| v[r]).sum::<f64>() / n)
            .collect();
        Ok(Encoding { pooled, tokens })
    }

    fn params(&self) -> &[f64] {
        &self.weights
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    fn backward(
        &self,
        document: &[String],
        summary: &[String],
        grad_pooled: &[f64],
        grad_tokens: &[Vec<f64>],
        grad: &mut [f64],
    ) -> Result<()> {
        let h = self.features();
        let n = summary.len() as f64;
        for (i, active) in self.active_features(document, summary).iter().enumerate() {
            let v = self.token_vector(active);
            for r in 0..self.dim {
                let upstream = grad_tokens.get(i).map_or(0.0, |g| g[r]) + grad_pooled.get(r).map_or(0.0, |g| g / n);
                if upstream == 0.0 {
                    continue;
                }
                let local = upstream * (1.0 - v[r] * v[r]);
                for &j in active {
                    grad[r * h + j] += local;
                }
            }
        }
        Ok(())
    }
}

/// Frozen encoder backed by an external program. The program receives
/// `{"document": [...], "summary": [...]}` on stdin and must print
/// `{"pooled": [...], "tokens": [[...], ...]}` on stdout.
#[derive(Debug, Clone)]
pub struct CommandEncoder {
    pub program: String,
    pub args: Vec<String>,
    pub dim: usize,
    pub max_seq: usize,
}

#[derive(Serialize)]
struct CommandRequest<'a> {
    document: &'a [String],
    summary: &'a [String],
}

#[derive(Deserialize)]
struct CommandResponse {
    pooled: Vec<f64>,
    tokens: Vec<Vec<f64>>,
}

impl EncoderProvider for CommandEncoder {
    fn spec(&self) -> EncoderSpec {
        EncoderSpec::Command {
            program: self.program.clone(),
            args: self.args.clone(),
            dim: self.dim,
            max_seq: self.max_seq,
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, document: &[String], summary: &[String]) -> Result<Encoding> {
        let request = CommandRequest {
            document: truncate_document(document, summary.len(), self.max_seq),
            summary,
        };
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Provider(format!("cannot start encoder `{}`: {e}", self.program)))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            let body = serde_json::to_vec(&request).expect("request serializes");
            stdin
                .write_all(&body)
                .map_err(|e| Error::Provider(format!("encoder stdin: {e}")))?;
        }
        let output = child
            .wait_with_output()
            .map_err(|e| Error::Provider(format!("encoder failed: {e}")))?;
        if !output.status.success() {
            return Err(Error::Provider(format!("encoder exited with {}", output.status)));
        }
        let resp: CommandResponse = serde_json::from_slice(&output.stdout)
            .map_err(|e| Error::Provider(format!("bad encoder output: {e}")))?;
        let ok_dims = resp.pooled.len() == self.dim
            && resp.tokens.len() == summary.len()
            && resp.tokens.iter().all(|v| v.len() == self.dim);
        if !ok_dims {
            return Err(Error::Provider(format!(
                "encoder output does not match dim {} and {} tokens",
                self.dim,
                summary.len()
            )));
        }
        let finite = resp.pooled.iter().chain(resp.tokens.iter().flatten()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::Provider("encoder produced non-finite values".into()));
        }
        Ok(Encoding {
            pooled: resp.pooled,
            tokens: resp.tokens,
        })
    }
}
