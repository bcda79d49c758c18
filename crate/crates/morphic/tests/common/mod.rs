#![allow(dead_code)]

use std::path::PathBuf;

use morphic::block_engine::{
    anatomy_of, atoms_of, collect_evolutions, local_context, origin_closure, BlockIndex, Case,
    ItemKind,
};
use morphic::normalization::normalize;
use morphic::order_analysis::{LetterProfiles, Order};
use morphic::periodicity::{
    is_periodic, merge_overlapping, minimal_period, PeriodMode, PeriodicSpan,
};
use morphic::{MorphicSystem, Occurrence, Word};

pub const FIXTURES: [&str; 6] = ["fix_a", "fix_b", "fix_c", "fix_d", "fix_e", "order_two"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.morph"))
}

pub fn fixture(name: &str) -> MorphicSystem {
    std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("{name}: {e}"))
        .parse()
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Coded prefix of the fixed point of exactly `len` letters.
pub fn coded_prefix(system: &MorphicSystem, len: usize) -> Word {
    let p = system.generate_prefix(len).unwrap();
    system.apply_coding(&p.text[..len])
}

#[derive(Debug, Default)]
pub struct Tally {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    pub fn passed(&self) -> bool {
        self.checks > 0 && self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        let shown: Vec<&String> = self.failures.iter().filter(|f| !f.is_empty()).take(3).collect();
        format!("{} checks, {} failures {:?}", self.checks, self.failures.len(), shown)
    }
}

pub fn binary_words(max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for n in 0..=max_len {
        for bits in 0..(1u32 << n) {
            out.push((0..n).map(|i| ((bits >> i) & 1) as usize).collect());
        }
    }
    out
}

pub fn brute_is_periodic(word: &[usize], period: &[usize], mode: PeriodMode) -> bool {
    let p = period.len();
    let n = word.len();
    let tiled: Vec<usize> = (0..n + p).map(|i| period[i % p]).collect();
    match mode {
        PeriodMode::WeakLeft => tiled[..n] == *word,
        // word is a suffix of some power of the period
        PeriodMode::WeakRight => {
            let reps = n / p + 1;
            let power: Vec<usize> = (0..reps * p).map(|i| period[i % p]).collect();
            power.ends_with(word)
        }
        PeriodMode::Complete => n.is_multiple_of(p) && tiled[..n] == *word,
    }
}

pub fn brute_minimal_period(word: &[usize], mode: PeriodMode) -> Option<Word> {
    let n = word.len();
    let p = (1..=n / 2).find(|&p| (0..n - p).all(|i| word[i] == word[i + p]))?;
    match mode {
        PeriodMode::WeakLeft => Some(word[..p].to_vec()),
        PeriodMode::WeakRight => Some(word[n - p..].to_vec()),
        PeriodMode::Complete => {
            // the least complete period, if it is at most half the word
            let q = (1..=n / 2).find(|&q| n.is_multiple_of(q) && (0..n - q).all(|i| word[i] == word[i + q]))?;
            (q == p).then(|| word[..q].to_vec())
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Exhaustive comparison over all binary words of length at most `max_len`.
pub fn periodicity_oracle(max_len: usize) -> Tally {
    let mut t = Tally::default();
    let modes = [PeriodMode::WeakLeft, PeriodMode::WeakRight, PeriodMode::Complete];
    let periods: Vec<Word> = binary_words(3).into_iter().filter(|p| !p.is_empty()).collect();
    let words = binary_words(max_len);
    for w in &words {
        for mode in modes {
            for p in &periods {
                t.check(is_periodic(w, p, mode) == brute_is_periodic(w, p, mode), || {
                    format!("is_periodic({w:?}, {p:?}, {mode:?})")
                });
            }
            t.check(minimal_period(w, mode) == brute_minimal_period(w, mode), || {
                format!("minimal_period({w:?}, {mode:?})")
            });
        }
    }
    // merges of two periodic spans inside each word of maximal length
    for w in words.iter().filter(|w| w.len() == max_len) {
        let n = w.len();
        for (a0, a1, b0, b1) in [(0, 8, 2, n), (0, 7, 3, n), (0, n, 4, 10), (1, 9, 3, 11)] {
            for p in 1..=4 {
                for q in 1..=4 {
                    let first = PeriodicSpan::from_text(w, Occurrence::span(a0, a1), p);
                    let second = PeriodicSpan::from_text(w, Occurrence::span(b0, b1), q);
                    let (Some(first), Some(second)) = (first, second) else {
                        continue;
                    };
                    let overlap = a1.min(b1).saturating_sub(a0.max(b0));
                    let union = Occurrence::span(a0.min(b0), a1.max(b1));
                    let g = gcd(p, q);
                    let expected = (overlap >= 2 * p.max(q)).then(|| {
                        let word = &w[union.range()];
                        assert!(brute_is_periodic(word, &word[..g], PeriodMode::WeakLeft));
                        (union, g, word[..g].to_vec())
                    });
                    let got = merge_overlapping(w, &first, &second)
                        .map(|s| (s.occurrence, s.period_len, s.left_period));
                    t.check(got == expected, || format!("merge {w:?} [{a0},{a1}) p={p} [{b0},{b1}) q={q}"));
                }
            }
        }
    }
    t
}

fn words_of(s: &MorphicSystem, index: &BlockIndex, occs: &[Occurrence]) -> Vec<String> {
    occs.iter().map(|&o| s.render(index.prefix().slice(o))).collect()
}

/// Structural invariants of the k-block machinery on a prefix of the normalized system.
pub fn structure_suite(name: &str, prefix_len: usize, levels: &[usize]) -> Tally {
    let mut t = Tally::default();
    let normalized = normalize(&fixture(name)).unwrap();
    let s = &normalized.system;
    let profiles = &normalized.profiles;
    let max_level = *levels.iter().max().unwrap();
    let prefix = s.generate_prefix(prefix_len).unwrap();
    let index = BlockIndex::new(prefix, profiles.clone(), max_level).unwrap();
    let text = index.text();
    for &k in levels {
        let level = index.level(k);
        // tiling
        let mut cursor = 0;
        for (i, it) in level.items.iter().enumerate() {
            let contiguous = it.occurrence.start == cursor;
            let alternating = (it.kind == ItemKind::Block) == (i % 2 == 1);
            let letters = &text[it.occurrence.range()];
            let typed = match it.kind {
                ItemKind::High => letters.len() == 1 && profiles.order(letters[0]).exceeds(k),
                ItemKind::Block => letters.iter().all(|&c| !profiles.order(c).exceeds(k)),
            };
            t.check(contiguous && alternating && typed, || format!("{name} k={k} item {i} tiling"));
            cursor = it.occurrence.end_excl();
        }
        t.check(cursor == level.covered, || format!("{name} k={k} covered"));

        // descendant/ancestor inversion
        for b in level.blocks() {
            if let Ok(d) = index.descendant_block(k, b) {
                t.check(index.ancestor(k, d) == Some(b), || format!("{name} k={k} inversion at {b}"));
            }
        }

        let evolutions = collect_evolutions(&index, k).unwrap();
        t.check(!evolutions.is_empty(), || format!("{name} k={k} has evolutions"));
        for evo in &evolutions {
            let chain = evo.chain();
            let tag = format!("{name} k={k} origin {}", evo.origin().occurrence);
            // border stability
            for m in evo.members.iter().skip(2) {
                let first = &evo.members[1];
                t.check(
                    (m.left_border, m.right_border) == (first.left_border, first.right_border),
                    || format!("{tag} borders at {}", m.seq_no),
                );
            }
            // atom stability: LA_m(E_l) and LA_{m+1}(E_{l+1}) agree for m >= 2
            let last = chain.len() - 1;
            let mut atoms = Vec::new();
            for l in 2..=last {
                let a = atoms_of(&index, k, &chain, l);
                t.check(a.is_ok(), || format!("{tag} atoms at {l}"));
                atoms.extend(a.ok());
            }
            for pair in atoms.windows(2) {
                let (now, next) = (&pair[0], &pair[1]);
                for m in 2..=now.left.len() {
                    let same_left = s.render(index.prefix().slice(now.left[m - 1].fg))
                        == s.render(index.prefix().slice(next.left[m].fg));
                    let same_right = s.render(index.prefix().slice(now.right[m - 1].fg))
                        == s.render(index.prefix().slice(next.right[m].fg));
                    t.check(same_left && same_right, || format!("{tag} atom {m}"));
                }
            }
            // stable members
            let mut anatomies = Vec::new();
            for l in 3 * k..=last {
                let a = anatomy_of(&index, k, &chain, l);
                t.check(a.is_ok(), || format!("{tag} anatomy at {l}: {:?}", a.as_ref().err()));
                anatomies.extend(a.ok());
            }
            for pair in anatomies.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let w = |o: Occurrence| s.render(index.prefix().slice(o));
                t.check(w(a.left_preperiod.fg) == w(b.left_preperiod.fg), || format!("{tag} LpreP"));
                t.check(w(a.right_preperiod.fg) == w(b.right_preperiod.fg), || format!("{tag} RpreP"));
                t.check(
                    words_of(s, &index, &a.prime_kernels) == words_of(s, &index, &b.prime_kernels),
                    || format!("{tag} kernels at {}", a.seq),
                );
                if a.case_left == Case::CaseI {
                    t.check(b.left_regular.fg.len > a.left_regular.fg.len, || format!("{tag} LR growth"));
                }
                if a.case_right == Case::CaseI {
                    t.check(b.right_regular.fg.len > a.right_regular.fg.len, || format!("{tag} RR growth"));
                }
            }
            for a in &anatomies {
                let inside = a.prime_kernels.iter().all(|o| {
                    o.start >= a.block.start && o.end_excl() <= a.block.end_excl()
                });
                let disjoint = a
                    .prime_kernels
                    .windows(2)
                    .all(|p| p[0].end_excl() <= p[1].start);
                t.check(inside && disjoint, || format!("{tag} kernel overlap at {}", a.seq));
            }
        }
    }
    t
}

/// Anatomy strings of the 2-block evolution with origin D in the raw FIX-E system.
pub fn fix_e_goldens() -> Tally {
    let mut t = Tally::default();
    let s = fixture("fix_e");
    let profiles = LetterProfiles::of(&s);
    let d_order = profiles.order(s.letter("D").unwrap());
    t.check(d_order == Order::Finite(2), || format!("order of D is {d_order}"));
    let origin = origin_closure(&s, &profiles, 2)
        .into_iter()
        .find(|o| s.render(&o.word) == "D")
        .expect("D origin");
    let ctx = local_context(&s, &profiles, &origin, 12).unwrap();
    let prefix = s.generate_prefix(10_000).unwrap();
    let index = BlockIndex::new(prefix, profiles.clone(), 2).unwrap();
    let observed = collect_evolutions(&index, 2)
        .unwrap()
        .into_iter()
        .find(|e| index.word(e.origin().occurrence) == origin.word)
        .expect("D origin in the prefix");
    let observed_chain = observed.chain();
    for l in 6..=12 {
        for (label, idx, chain) in [("window", &ctx.index, &ctx.chain), ("prefix", &index, &observed_chain)] {
            if l >= chain.len() {
                continue;
            }
            let a = anatomy_of(idx, 2, chain, l).unwrap();
            let w = |o: Occurrence| s.render(idx.prefix().slice(o));
            t.check(w(a.right_preperiod.fg) == "cEEeeeeeeEEcEEeeEEcEEC", || {
                format!("{label} l={l} right preperiod {}", w(a.right_preperiod.fg))
            });
            let central: Vec<String> = a.central_kernels.iter().map(|&o| w(o)).collect();
            t.check(central == ["EE", "eeff", "FFdFF", "ff", "EEcEE", "ee", "EE"], || {
                format!("{label} l={l} central kernels {central:?}")
            });
        }
    }
    t
}
