//! Flat `key = value` configuration with per-key provenance.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use factspan::Error;
use sha2::{Digest, Sha256};

/// Every recognized key with its default. Training defaults follow the usual
/// encoder fine-tuning recipe (Adam, linear decay, no warmup).
pub const DEFAULTS: &[(&str, &str)] = &[
    ("seed", "13"),
    ("strict", "true"),
    // synthetic data
    ("per_claim", "0"),
    ("noise_rate", "0.05"),
    ("noise_mode", "both"),
    ("transforms", "entity,number,pronoun,negation,noise,paraphrase"),
    ("ratio", "1:1"),
    ("do_support", "false"),
    ("gazetteer", "none"),
    ("paraphraser", "mock"),
    ("parser", "none"),
    ("rank", "10"),
    // models
    ("kind", "dae"),
    ("encoder", "mock"),
    ("encoder_dim", "32"),
    ("max_seq", "512"),
    ("lr", "2e-5"),
    ("batch", "8"),
    ("epochs", "3"),
    ("max_steps", "none"),
    ("eval_every", "100"),
    ("freeze_encoder", "false"),
    ("hidden", "none"),
    ("grad_clip", "1"),
    ("weight_decay", "0"),
    ("warmup_steps", "0"),
    ("threshold", "0.5"),
    ("seeds", "1"),
    // evaluation
    ("averaging", "micro"),
    ("include_punct", "true"),
    ("undefined", "marker"),
    ("mode", "others"),
    ("cap", "200"),
    // masking
    ("normalization", "sum"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Flag => "flag",
        })
    }
}

fn config_error(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn default_of(key: &str) -> Option<&'static str> {
    DEFAULTS.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

/// Parse a config file body. Sections, nesting and unknown keys are rejected
/// with the offending line number.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, (String, usize)>, Error> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            return Err(config_error("<file>", format!("line {line_no}: sections are not supported")));
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_error("<file>", format!("line {line_no}: expected `key = value`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains('.') || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(config_error(key, format!("line {line_no}: keys are flat identifiers")));
        }
        if value.starts_with('{') || value.starts_with('[') {
            return Err(config_error(key, format!("line {line_no}: nested values are not supported")));
        }
        if default_of(key).is_none() {
            return Err(config_error(key, format!("line {line_no}: unknown key")));
        }
        if out.insert(key.to_string(), (value.to_string(), line_no)).is_some() {
            return Err(config_error(key, format!("line {line_no}: duplicate key")));
        }
    }
    Ok(out)
}

/// Fully resolved configuration for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    entries: BTreeMap<String, (String, Source)>,
}

impl Resolved {
    /// Resolve `keys` with precedence flag > file > default.
    pub fn resolve(keys: &[&str], file: Option<&Path>, flags: &[(&str, Option<String>)]) -> Result<Self, Error> {
        let from_file = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        Self::resolve_with(keys, &from_file, flags)
    }

    pub fn resolve_with(
        keys: &[&str],
        from_file: &BTreeMap<String, (String, usize)>,
        flags: &[(&str, Option<String>)],
    ) -> Result<Self, Error> {
        let mut entries = BTreeMap::new();
        for &key in keys {
            let default = default_of(key).ok_or_else(|| config_error(key, "not a configuration key"))?;
            entries.insert(key.to_string(), (default.to_string(), Source::Default));
        }
        for (key, (value, _)) in from_file {
            if let Some(slot) = entries.get_mut(key) {
                *slot = (value.clone(), Source::File);
            }
        }
        for (key, value) in flags {
            if let Some(value) = value {
                let slot = entries
                    .get_mut(*key)
                    .ok_or_else(|| config_error(*key, "flag is not a key of this command"))?;
                *slot = (value.clone(), Source::Flag);
            }
        }
        Ok(Resolved { entries })
    }

    pub fn raw(&self, key: &str) -> Result<&str, Error> {
        self.entries
            .get(key)
            .map(|(v, _)| v.as_str())
            .ok_or_else(|| config_error(key, "not resolved for this command"))
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.entries.get(key).map(|(_, s)| *s)
    }

    pub fn get<T>(&self, key: &str) -> Result<T, Error>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let raw = self.raw(key)?;
        raw.parse::<T>().map_err(|e| {
            config_error(
                key,
                format!("cannot read `{raw}` as {} ({e})", std::any::type_name::<T>()),
            )
        })
    }

    /// Like [`get`](Self::get), with `none` meaning absent.
    pub fn get_opt<T>(&self, key: &str) -> Result<Option<T>, Error>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if self.raw(key)? == "none" {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    /// `key = value  # source` lines, sorted by key.
    pub fn describe(&self) -> String {
        self.entries
            .iter()
            .map(|(k, (v, s))| format!("{k} = {v}  # {s}\n"))
            .collect()
    }

    pub fn sources(&self) -> BTreeMap<String, (String, String)> {
        self.entries
            .iter()
            .map(|(k, (v, s))| (k.clone(), (v.clone(), s.to_string())))
            .collect()
    }

    /// Digest of the resolved values (not their provenance).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, (v, _)) in &self.entries {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }
}
