//! Headline preprocessing: tokenisation, stopword removal, vocabulary and
//! fixed-length integer encoding.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use chrono::NaiveDate;
use thiserror::Error;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

pub const DEFAULT_MAX_LEN: usize = 16;
pub const DEFAULT_MIN_COUNT: usize = 2;

const BUNDLED_STOPWORDS: &str = include_str!("stopwords_en.txt");

#[derive(Debug, Error, PartialEq)]
pub enum TextError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, TextError>;

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn remove_stopwords(tokens: &[String], stoplist: &HashSet<String>) -> Vec<String> {
    tokens.iter().filter(|t| !stoplist.contains(*t)).cloned().collect()
}

/// One token per line; blank lines and surrounding whitespace ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines().map(|l| l.trim().to_lowercase()).filter(|l| !l.is_empty()).collect()
}

/// The bundled English list (about 150 words).
pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(BUNDLED_STOPWORDS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
    counts: Vec<usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    /// Id of `token`, or `UNK`.
    pub fn id(&self, token: &str) -> usize {
        self.token_to_id.get(token).copied().unwrap_or(UNK)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    pub fn count(&self, id: usize) -> usize {
        self.counts.get(id).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `id<TAB>token<TAB>count` lines.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (id, (tok, c)) in self.id_to_token.iter().zip(&self.counts).enumerate() {
            writeln!(s, "{id}\t{tok}\t{c}").unwrap();
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut id_to_token = Vec::new();
        let mut counts = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let err = |reason: String| TextError::Parse { line: i + 1, reason };
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", parts.len())));
            }
            let id: usize = parts[0].parse().map_err(|e| err(format!("bad id: {e}")))?;
            if id != id_to_token.len() {
                return Err(err(format!("ids must be contiguous, expected {}", id_to_token.len())));
            }
            id_to_token.push(parts[1].to_string());
            counts.push(parts[2].parse().map_err(|e| err(format!("bad count: {e}")))?);
        }
        if id_to_token.len() < 2 || id_to_token[PAD] != PAD_TOKEN || id_to_token[UNK] != UNK_TOKEN {
            return Err(TextError::Parse { line: 1, reason: "PAD and UNK must occupy ids 0 and 1".into() });
        }
        let token_to_id = id_to_token.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Self { token_to_id, id_to_token, counts })
    }
}

/// Ids by descending frequency, ties broken lexicographically; tokens seen
/// fewer than `min_count` times fold into `UNK`.
pub fn build_vocabulary(docs: &[Vec<String>], min_count: usize) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(TextError::InvalidMinCount);
    }
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for tok in docs.iter().flatten() {
        *freq.entry(tok.as_str()).or_default() += 1;
    }
    if freq.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut unk_count = 0;
    let mut kept: Vec<(&str, usize)> = Vec::new();
    for (tok, c) in freq {
        if c >= min_count && tok != PAD_TOKEN && tok != UNK_TOKEN {
            kept.push((tok, c));
        } else {
            unk_count += c;
        }
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

    let mut id_to_token = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
    let mut counts = vec![0, unk_count];
    for (tok, c) in kept {
        id_to_token.push(tok.to_string());
        counts.push(c);
    }
    let token_to_id = id_to_token.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Ok(Vocabulary { token_to_id, id_to_token, counts })
}

/// Truncates to `max_len` or right-pads with `PAD`.
pub fn encode(tokens: &[String], vocab: &Vocabulary, max_len: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = tokens.iter().take(max_len).map(|t| vocab.id(t)).collect();
    ids.resize(max_len, PAD);
    ids
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDoc {
    pub date: NaiveDate,
    pub token_ids: Vec<usize>,
    pub label: Option<u8>,
}

impl EncodedDoc {
    /// Ids with right padding stripped.
    pub fn content(&self) -> &[usize] {
        let end = self.token_ids.iter().rposition(|&t| t != PAD).map_or(0, |i| i + 1);
        &self.token_ids[..end]
    }
}

/// Tokenise, drop stopwords.
pub fn preprocess(text: &str, stoplist: &HashSet<String>) -> Vec<String> {
    remove_stopwords(&tokenize(text), stoplist)
}
