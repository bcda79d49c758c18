//! Periodicity of finite words: cyclic shifts, weak and complete periods,
//! minimal periods via the border array, and merging of overlapping
//! periodic occurrences.

use num_integer::Integer;
use thiserror::Error;

use crate::word_model::{LetterId, Occurrence, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PeriodicityError {
    #[error("cyclic shift of the empty word")]
    EmptyWord,
    #[error("word has no minimal period in the requested mode")]
    NoMinimalPeriod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeriodMode {
    /// `δδ…δ δ_{0..r-1}`: tiling anchored at the left end.
    WeakLeft,
    /// `δ_{r..}δ…δ`: tiling anchored at the right end.
    WeakRight,
    /// Whole copies of the period only.
    Complete,
}

/// `Cyc_n(δ)`; `n` is reduced modulo `|δ|`, negative shifts rotate right.
pub fn cyclic_shift(word: &[LetterId], n: i64) -> Result<Word, PeriodicityError> {
    if word.is_empty() {
        return Err(PeriodicityError::EmptyWord);
    }
    let r = n.rem_euclid(word.len() as i64) as usize;
    Ok(word[r..].iter().chain(&word[..r]).copied().collect())
}

/// Whether `word` tiles with `period` in the given mode. The empty word is
/// periodic with every period.
pub fn is_periodic(word: &[LetterId], period: &[LetterId], mode: PeriodMode) -> bool {
    assert!(!period.is_empty(), "period must be nonempty");
    let p = period.len();
    match mode {
        PeriodMode::WeakLeft => word.iter().enumerate().all(|(i, &c)| c == period[i % p]),
        PeriodMode::WeakRight => {
            let n = word.len();
            word.iter()
                .enumerate()
                .all(|(i, &c)| c == period[p - 1 - (n - 1 - i) % p])
        }
        PeriodMode::Complete => {
            word.len().is_multiple_of(p) && is_periodic(word, period, PeriodMode::WeakLeft)
        }
    }
}

/// Length of the longest proper border of every prefix (the KMP failure function).
pub fn border_array(word: &[LetterId]) -> Vec<usize> {
    let mut border = vec![0usize; word.len()];
    let mut k = 0;
    for i in 1..word.len() {
        while k > 0 && word[i] != word[k] {
            k = border[k - 1];
        }
        if word[i] == word[k] {
            k += 1;
        }
        border[i] = k;
    }
    border
}

/// Smallest `p` such that `word` is weakly `p`-periodic (`|word|` for aperiodic words).
pub fn smallest_period(word: &[LetterId]) -> usize {
    match word.len() {
        0 => 0,
        n => n - border_array(word)[n - 1],
    }
}

/// The minimal period `λ` with `2|λ| ≤ |word|`, or `None` if no such period exists.
///
/// For `WeakRight` the returned word is the right period (the last `|λ|` letters).
pub fn minimal_period(word: &[LetterId], mode: PeriodMode) -> Option<Word> {
    let n = word.len();
    if n < 2 {
        return None;
    }
    let p = smallest_period(word);
    if 2 * p > n {
        return None;
    }
    match mode {
        PeriodMode::WeakLeft => Some(word[..p].to_vec()),
        PeriodMode::WeakRight => Some(word[n - p..].to_vec()),
        // Any complete period is a multiple of the smallest weak one here.
        PeriodMode::Complete => n.is_multiple_of(p).then(|| word[..p].to_vec()),
    }
}

/// Checks that a `p`-period of `word` is the minimal period repeated `p/|λ|` times.
pub fn divisor_property_check(
    word: &[LetterId],
    p: usize,
    mode: PeriodMode,
) -> Result<bool, PeriodicityError> {
    let lambda = minimal_period(word, mode).ok_or(PeriodicityError::NoMinimalPeriod)?;
    if p == 0 || p > word.len() || !p.is_multiple_of(lambda.len()) {
        return Ok(false);
    }
    let period = match mode {
        PeriodMode::WeakRight => &word[word.len() - p..],
        _ => &word[..p],
    };
    Ok(is_periodic(word, period, mode) && is_periodic(period, &lambda, PeriodMode::Complete))
}

/// A weakly periodic occurrence inside some text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicSpan {
    pub occurrence: Occurrence,
    pub period_len: usize,
    pub left_period: Word,
    pub right_period: Word,
}

impl PeriodicSpan {
    /// Reads the left period from `text`; `None` if the occurrence is not `p`-periodic.
    pub fn from_text(text: &[LetterId], occurrence: Occurrence, p: usize) -> Option<Self> {
        if p == 0 || p > occurrence.len {
            return None;
        }
        let word = &text[occurrence.range()];
        let left_period = word[..p].to_vec();
        if !is_periodic(word, &left_period, PeriodMode::WeakLeft) {
            return None;
        }
        let right_period = cyclic_shift(&left_period, occurrence.len as i64).ok()?;
        Some(Self {
            occurrence,
            period_len: p,
            left_period,
            right_period,
        })
    }
}

/// Merges two overlapping periodic occurrences into one weakly
/// `gcd(p, p')`-periodic occurrence. Requires an overlap of at least
/// `2 max(p, p')` letters; returns `None` otherwise.
pub fn merge_overlapping(
    text: &[LetterId],
    first: &PeriodicSpan,
    second: &PeriodicSpan,
) -> Option<PeriodicSpan> {
    let lo = first.occurrence.start.max(second.occurrence.start);
    let hi = first
        .occurrence
        .end_excl()
        .min(second.occurrence.end_excl());
    let overlap = hi.saturating_sub(lo);
    if overlap < 2 * first.period_len.max(second.period_len) {
        return None;
    }
    let start = first.occurrence.start.min(second.occurrence.start);
    let end = first
        .occurrence
        .end_excl()
        .max(second.occurrence.end_excl());
    let g = first.period_len.gcd(&second.period_len);
    PeriodicSpan::from_text(text, Occurrence::span(start, end), g)
}
