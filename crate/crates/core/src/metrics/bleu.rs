//! Corpus-level BLEU-4 with clipped modified n-gram precisions, add-one
//! smoothing on the n >= 2 precisions, uniform weights, and brevity penalty.
//! Statistics pool associatively so parallel reduction equals sequential
//! reduction exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_NGRAM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BleuError {
    #[error("cannot compute BLEU over an empty corpus")]
    EmptyCorpus,
}

/// Split on whitespace, then split off the YAML-significant punctuation
/// characters `: - , { } [ ] " '` as standalone tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let mut current = String::new();
        for c in chunk.chars() {
            if matches!(c, ':' | '-' | ',' | '{' | '}' | '[' | ']' | '"' | '\'') {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

/// Per-sample n-gram statistics: clipped match counts and totals for
/// n = 1..4 plus hypothesis and reference lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuStats {
    pub matches: [u64; MAX_NGRAM],
    pub totals: [u64; MAX_NGRAM],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    /// Clipped n-gram statistics for one (reference, hypothesis) pair.
    pub fn from_pair<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> Self {
        let mut stats = BleuStats {
            hyp_len: hypothesis.len() as u64,
            ref_len: reference.len() as u64,
            ..Default::default()
        };
        for n in 1..=MAX_NGRAM {
            if hypothesis.len() < n {
                break;
            }
            let ref_counts = ngram_counts(reference, n);
            let mut hyp_counts: HashMap<Vec<&str>, u64> = HashMap::new();
            for gram in hypothesis.windows(n) {
                let key: Vec<&str> = gram.iter().map(AsRef::as_ref).collect();
                *hyp_counts.entry(key).or_insert(0) += 1;
            }
            let mut matches = 0;
            let mut total = 0;
            for (gram, count) in &hyp_counts {
                total += count;
                matches += (*count).min(ref_counts.get(gram).copied().unwrap_or(0));
            }
            stats.matches[n - 1] = matches;
            stats.totals[n - 1] = total;
        }
        stats
    }

    /// Pool two statistics; commutative and associative.
    pub fn combine(&self, other: &BleuStats) -> BleuStats {
        let mut out = *self;
        for n in 0..MAX_NGRAM {
            out.matches[n] += other.matches[n];
            out.totals[n] += other.totals[n];
        }
        out.hyp_len += other.hyp_len;
        out.ref_len += other.ref_len;
        out
    }

    /// Corpus score from pooled statistics, scaled to [0, 100].
    ///
    /// Unigram precision is unsmoothed (no overlap really is zero); higher
    /// orders get add-one smoothing. The brevity penalty is
    /// `exp(1 - r/h)` when the hypothesis side is shorter.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 {
            return 0.0;
        }
        if self.totals[0] == 0 || self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for n in 0..MAX_NGRAM {
            let precision = if n == 0 {
                self.matches[0] as f64 / self.totals[0] as f64
            } else {
                (self.matches[n] as f64 + 1.0) / (self.totals[n] as f64 + 1.0)
            };
            log_sum += precision.ln() / MAX_NGRAM as f64;
        }
        let brevity = if self.hyp_len < self.ref_len {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        } else {
            1.0
        };
        100.0 * brevity * log_sum.exp()
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            let key: Vec<&str> = gram.iter().map(AsRef::as_ref).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU over (reference, hypothesis) token pairs.
pub fn bleu_corpus<S: AsRef<str>>(pairs: &[(Vec<S>, Vec<S>)]) -> Result<f64, BleuError> {
    if pairs.is_empty() {
        return Err(BleuError::EmptyCorpus);
    }
    let pooled = pairs
        .iter()
        .map(|(r, h)| BleuStats::from_pair(r, h))
        .fold(BleuStats::default(), |acc, s| acc.combine(&s));
    Ok(pooled.score())
}
