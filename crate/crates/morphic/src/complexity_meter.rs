//! Distinct-factor counts of finite prefixes, power-law fits and
//! comparison against a predicted complexity class.

use serde::Serialize;
use thiserror::Error;

use crate::evolution_classifier::ComplexityClass;
use crate::word_model::LetterId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeterError {
    #[error("factor length {n} exceeds 1/{ratio} of the prefix length {len}")]
    Range { n: usize, len: usize, ratio: usize },
    #[error("need at least 3 entries with p_n >= 2 in [{lo}, {hi}], found {found}")]
    InsufficientData { lo: usize, hi: usize, found: usize },
    #[error("letter id {letter} outside an alphabet of size {size}")]
    Letter { letter: LetterId, size: usize },
}

/// Prefix length must be at least this many times the largest factor length.
pub const GUARD_RATIO: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityTable {
    pub prefix_len: usize,
    pub entries: Vec<(usize, u64)>,
}

impl ComplexityTable {
    pub fn get(&self, n: usize) -> Option<u64> {
        self.entries
            .binary_search_by_key(&n, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p_n\n");
        for (n, p) in &self.entries {
            out.push_str(&format!("{n},{p}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub range: (usize, usize),
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

const NONE: u32 = u32::MAX;

/// Suffix automaton over letter ids with a flat transition table.
#[derive(Debug, Clone)]
pub struct SuffixAutomaton {
    sigma: usize,
    next: Vec<u32>,
    link: Vec<u32>,
    len: Vec<u32>,
}

impl SuffixAutomaton {
    pub fn build(word: &[LetterId], sigma: usize) -> Result<Self, MeterError> {
        if let Some(&letter) = word.iter().find(|&&c| c >= sigma) {
            return Err(MeterError::Letter { letter, size: sigma });
        }
        let cap = 2 * word.len().max(1);
        let mut sa = SuffixAutomaton {
            sigma,
            next: Vec::with_capacity(cap * sigma),
            link: Vec::with_capacity(cap),
            len: Vec::with_capacity(cap),
        };
        sa.push_state(0, NONE);
        let mut last = 0u32;
        for &c in word {
            let cur = sa.push_state(sa.len[last as usize] + 1, NONE);
            let mut p = last;
            while p != NONE && sa.edge(p, c) == NONE {
                sa.set_edge(p, c, cur);
                p = sa.link[p as usize];
            }
            if p == NONE {
                sa.link[cur as usize] = 0;
            } else {
                let q = sa.edge(p, c);
                if sa.len[p as usize] + 1 == sa.len[q as usize] {
                    sa.link[cur as usize] = q;
                } else {
                    let clone = sa.push_state(sa.len[p as usize] + 1, sa.link[q as usize]);
                    let (from, to) = (q as usize * sigma, clone as usize * sigma);
                    sa.next.copy_within(from..from + sigma, to);
                    while p != NONE && sa.edge(p, c) == q {
                        sa.set_edge(p, c, clone);
                        p = sa.link[p as usize];
                    }
                    sa.link[q as usize] = clone;
                    sa.link[cur as usize] = clone;
                }
            }
            last = cur;
        }
        Ok(sa)
    }

    fn push_state(&mut self, len: u32, link: u32) -> u32 {
        let id = self.len.len() as u32;
        self.len.push(len);
        self.link.push(link);
        self.next.resize(self.next.len() + self.sigma, NONE);
        id
    }

    fn edge(&self, state: u32, c: LetterId) -> u32 {
        self.next[state as usize * self.sigma + c]
    }

    fn set_edge(&mut self, state: u32, c: LetterId, to: u32) {
        self.next[state as usize * self.sigma + c] = to;
    }

    pub fn states(&self) -> usize {
        self.len.len()
    }

    /// Distinct factor counts for every length in `0..=max_n`.
    pub fn counts_up_to(&self, max_n: usize) -> Vec<u64> {
        let mut diff = vec![0i64; max_n + 2];
        for v in 1..self.states() {
            let lo = self.len[self.link[v] as usize] as usize + 1;
            let hi = (self.len[v] as usize).min(max_n);
            if lo <= hi {
                diff[lo] += 1;
                diff[hi + 1] -= 1;
            }
        }
        let mut out = Vec::with_capacity(max_n + 1);
        let mut running = 0i64;
        out.push(1);
        for d in &diff[1..=max_n] {
            running += d;
            out.push(running as u64);
        }
        out
    }
}

/// Exact `p_n` of `word` for each `n` in `ns`; `override_guard` lifts the prefix-length margin.
pub fn factor_counts(
    word: &[LetterId],
    sigma: usize,
    ns: &[usize],
    override_guard: bool,
) -> Result<ComplexityTable, MeterError> {
    let max_n = ns.iter().copied().max().unwrap_or(0);
    if !override_guard && max_n * GUARD_RATIO > word.len() {
        return Err(MeterError::Range {
            n: max_n,
            len: word.len(),
            ratio: GUARD_RATIO,
        });
    }
    let counts = SuffixAutomaton::build(word, sigma)?.counts_up_to(max_n);
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    Ok(ComplexityTable {
        prefix_len: word.len(),
        entries: ns.into_iter().map(|n| (n, counts[n])).collect(),
    })
}

/// Least-squares fit of `log p_n` against `log n` over entries with `n` in `range`.
pub fn fit_exponent(table: &ComplexityTable, range: (usize, usize)) -> Result<ExponentFit, MeterError> {
    let (lo, hi) = range;
    let points: Vec<(f64, f64)> = table
        .entries
        .iter()
        .filter(|(n, _)| (lo..=hi).contains(n))
        .map(|&(n, p)| (n as f64, p as f64))
        .collect();
    let error = MeterError::InsufficientData {
        lo,
        hi,
        found: points.len(),
    };
    if points.len() < 3 || points.iter().any(|&(n, p)| n < 1.0 || p < 2.0) {
        return Err(error);
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, p)| (n.ln(), p.ln())).collect();
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(error);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ExponentFit {
        range: (points[0].0 as usize, points[points.len() - 1].0 as usize),
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub slope: f64,
    pub log: f64,
    /// First length at which a constant verdict demands equal counts; defaults to the upper half of the table.
    pub n_flat: Option<usize>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope: 0.2,
            log: 0.2,
            n_flat: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub criterion: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub class: ComplexityClass,
    pub fit: Option<ExponentFit>,
    pub lines: Vec<CheckLine>,
}

impl CrossCheckReport {
    pub fn passed(&self) -> bool {
        !self.lines.is_empty() && self.lines.iter().all(|l| l.passed)
    }
}

/// Compares a predicted class with measured counts.
pub fn cross_check(class: ComplexityClass, table: &ComplexityTable, tol: &Tolerances) -> CrossCheckReport {
    let full_range = (
        table.entries.first().map_or(0, |e| e.0),
        table.entries.last().map_or(0, |e| e.0),
    );
    let fit = fit_exponent(table, full_range);
    let mut lines = Vec::new();
    let mut line = |criterion: &str, passed: bool, detail: String| {
        lines.push(CheckLine {
            criterion: criterion.to_string(),
            passed,
            detail,
        })
    };
    match class {
        ComplexityClass::Constant => {
            let n_flat = tol
                .n_flat
                .unwrap_or_else(|| table.entries.get(table.entries.len() / 2).map_or(0, |e| e.0));
            let tail: Vec<u64> = table
                .entries
                .iter()
                .filter(|e| e.0 >= n_flat)
                .map(|e| e.1)
                .collect();
            let flat = !tail.is_empty() && tail.iter().all(|&p| p == tail[0]);
            line("constant", flat, format!("p_n for n >= {n_flat}: {tail:?}"));
        }
        ComplexityClass::PolyExponent { .. } => {
            let e = class.exponent().expect("polynomial class");
            match &fit {
                Ok(f) => line(
                    "slope",
                    (f.slope - e).abs() <= tol.slope,
                    format!("slope {:.4} vs {:.4} (tolerance {})", f.slope, e, tol.slope),
                ),
                Err(err) => line("slope", false, err.to_string()),
            }
        }
        ComplexityClass::NLogN => {
            match &fit {
                Ok(f) => line(
                    "slope",
                    f.slope <= 1.0 + tol.log,
                    format!("slope {:.4} <= {:.4}", f.slope, 1.0 + tol.log),
                ),
                Err(err) => line("slope", false, err.to_string()),
            }
            let ratios: Vec<f64> = table
                .entries
                .iter()
                .map(|&(n, p)| p as f64 / n.max(1) as f64)
                .collect();
            let monotone = ratios.windows(2).all(|w| w[1] >= w[0]);
            line("superlinear", monotone, format!("p_n/n: {ratios:.3?}"));
        }
    }
    CrossCheckReport {
        class,
        fit: fit.ok(),
        lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::*;
    use std::collections::HashSet;

    fn naive(word: &[LetterId], n: usize) -> u64 {
        word.windows(n).collect::<HashSet<_>>().len() as u64
    }

    #[test]
    fn unary_and_period_two() {
        let unary = vec![0; 10_000];
        let t = factor_counts(&unary, 1, &[1, 5, 50], false).unwrap();
        assert_eq!(t.entries, vec![(1, 1), (5, 1), (50, 1)]);
        let ab: Vec<usize> = (0..10_000).map(|i| i % 2).collect();
        assert_eq!(factor_counts(&ab, 2, &[4], false).unwrap().get(4), Some(2));
    }

    #[test]
    fn guard_and_override() {
        let w = vec![0; 100];
        assert_eq!(
            factor_counts(&w, 1, &[1000], false),
            Err(MeterError::Range { n: 1000, len: 100, ratio: GUARD_RATIO })
        );
        assert_eq!(factor_counts(&w, 1, &[3, 1000], true).unwrap().entries, vec![(3, 1), (1000, 0)]);
        assert!(matches!(factor_counts(&[0, 2], 2, &[1], true), Err(MeterError::Letter { .. })));
    }

    #[test]
    fn automaton_matches_naive_on_fixture_prefixes() {
        for text in [FIX_A, FIX_B, FIX_C, FIX_D, FIX_E, ORDER_TWO] {
            let s = load(text);
            let p = s.generate_prefix(3_000).unwrap();
            let w = s.apply_coding(&p.text[..3_000]);
            let counts = SuffixAutomaton::build(&w, s.alphabet_size()).unwrap().counts_up_to(40);
            for n in 1..=40 {
                assert_eq!(counts[n], naive(&w, n), "n = {n}");
            }
        }
    }

    #[test]
    fn fits() {
        let square = ComplexityTable {
            prefix_len: 0,
            entries: [100u64, 200, 400].iter().map(|&n| (n as usize, n * n)).collect(),
        };
        let f = fit_exponent(&square, (100, 400)).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-9);
        assert!(f.residual < 1e-9);
        let flat = ComplexityTable {
            prefix_len: 0,
            entries: vec![(10, 5), (20, 5), (40, 5)],
        };
        assert!(fit_exponent(&flat, (10, 40)).unwrap().slope.abs() < 1e-12);
        assert!(matches!(
            fit_exponent(&flat, (10, 20)),
            Err(MeterError::InsufficientData { found: 2, .. })
        ));
        let ones = ComplexityTable {
            prefix_len: 0,
            entries: vec![(10, 1), (20, 1), (40, 1)],
        };
        assert!(fit_exponent(&ones, (10, 40)).is_err());
    }

    #[test]
    fn cross_checks() {
        let flat = ComplexityTable {
            prefix_len: 0,
            entries: vec![(50, 2), (100, 2), (200, 2)],
        };
        let tol = Tolerances::default();
        assert!(cross_check(ComplexityClass::Constant, &flat, &tol).passed());
        assert!(!cross_check(ComplexityClass::poly(2), &flat, &tol).passed());
        let stepped = ComplexityTable {
            prefix_len: 0,
            entries: vec![(50, 2), (100, 3), (200, 3)],
        };
        assert!(!cross_check(ComplexityClass::Constant, &stepped, &Tolerances { n_flat: Some(50), ..tol }).passed());
        let nlogn = ComplexityTable {
            prefix_len: 0,
            entries: [64usize, 128, 256, 512]
                .iter()
                .map(|&n| (n, (n as f64 * (n as f64).ln()) as u64))
                .collect(),
        };
        assert!(cross_check(ComplexityClass::NLogN, &nlogn, &tol).passed());
    }
}
