//! Alphabet augmentation, the weak/strong 1-periodicity and long-image
//! predicates, power search, and final periods.

use serde::Serialize;
use thiserror::Error;

use crate::order_analysis::{boundary_letter, LetterProfiles, Order, Periodicity, Side};
use crate::periodicity::{cyclic_shift, minimal_period, PeriodMode};
use crate::word_model::{LetterId, MorphicSystem, SystemError, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizationError {
    #[error("no power up to {max_power} satisfies all predicates (image budget {image_budget})")]
    SearchBudgetExceeded { max_power: usize, image_budget: usize },
    #[error("fringe word has no minimal complete period")]
    MissingMinimalPeriod,
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AddedRole {
    Order1,
    Order2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LevelFlags {
    pub weakly_1_periodic: bool,
    pub strongly_1_periodic: bool,
    pub long_images: bool,
}

impl LevelFlags {
    pub fn all(&self) -> bool {
        self.weakly_1_periodic && self.strongly_1_periodic && self.long_images
    }
}

/// Final periods, closed under cyclic shifts and sorted by length then letters.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FinalPeriodSet {
    pub periods: Vec<Word>,
    pub max_len: usize,
}

impl FinalPeriodSet {
    fn from_words(words: impl IntoIterator<Item = Word>) -> Self {
        let mut periods: Vec<Word> = Vec::new();
        for w in words {
            for shift in 0..w.len() {
                periods.push(cyclic_shift(&w, shift as i64).expect("nonempty period"));
            }
        }
        periods.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        periods.dedup();
        let max_len = periods.iter().map(Vec::len).max().unwrap_or(0);
        Self { periods, max_len }
    }

    pub fn contains(&self, word: &[LetterId]) -> bool {
        self.periods.iter().any(|p| p == word)
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizationReport {
    pub power: usize,
    pub added_letters: Vec<(LetterId, AddedRole)>,
    pub flags: LevelFlags,
}

/// A normalized system with everything downstream analysis needs.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub system: MorphicSystem,
    pub profiles: LetterProfiles,
    pub final_periods: FinalPeriodSet,
    pub report: NormalizationReport,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub max_power: usize,
    /// Largest single image allowed while trying powers.
    pub image_budget: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_power: 64,
            image_budget: 1 << 21,
        }
    }
}

fn fresh_name(system: &MorphicSystem, base: &str) -> String {
    let mut name = base.to_string();
    while system.letter(&name).is_some() {
        name.push('\'');
    }
    name
}

/// Adds a periodic order-1 letter and a periodic order-2 letter when missing.
pub fn augment_alphabet(
    system: &MorphicSystem,
    profiles: &LetterProfiles,
) -> Result<(MorphicSystem, Vec<(LetterId, AddedRole)>), SystemError> {
    let has = |p: &LetterProfiles, k: usize| {
        p.profiles
            .iter()
            .any(|l| l.order == Order::Finite(k) && l.periodicity == Periodicity::Periodic)
    };
    let mut out = system.clone();
    let mut added = Vec::new();
    let order1 = if has(profiles, 1) {
        profiles
            .profiles
            .iter()
            .find(|l| l.order == Order::Finite(1) && l.periodicity == Periodicity::Periodic)
            .map(|l| l.letter)
            .expect("checked above")
    } else {
        let id = out.alphabet_size();
        out = out.with_letter(fresh_name(&out, "u"), vec![id], None)?;
        added.push((id, AddedRole::Order1));
        id
    };
    let current = LetterProfiles::of(&out);
    if !has(&current, 2) {
        let id = out.alphabet_size();
        out = out.with_letter(fresh_name(&out, "v"), vec![order1, id], None)?;
        added.push((id, AddedRole::Order2));
    }
    Ok((out, added))
}

fn weakly_1_periodic(system: &MorphicSystem, profiles: &LetterProfiles) -> bool {
    (0..system.alphabet_size()).all(|b| {
        let Order::Finite(k) = profiles.order(b) else {
            return true;
        };
        let mut same_order = system
            .image(b)
            .iter()
            .copied()
            .filter(|&c| profiles.order(c) == Order::Finite(k));
        match profiles.periodicity(b) {
            Periodicity::Preperiodic => same_order.all(|c| profiles.is_periodic(c)),
            _ => same_order.all(|c| c == b),
        }
    })
}

/// Whether `LL_k(φ^n(b))` / `RL_k(φ^n(b))` stay constant for `1 ≤ n ≤ horizon`.
fn borders_stabilize(system: &MorphicSystem, profiles: &LetterProfiles, horizon: usize) -> bool {
    let top = profiles.max_finite_order().max(1);
    for k in 1..=top {
        for b in 0..system.alphabet_size() {
            if !profiles.is_high(b, k) {
                continue;
            }
            for side in [Side::Left, Side::Right] {
                let step = |c: LetterId| {
                    let img = system.image(c);
                    img[boundary_letter(img, profiles, k, side).expect("high letter has a high image letter")]
                };
                let first = step(b);
                let mut current = first;
                for _ in 1..horizon {
                    current = step(current);
                    if current != first {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// The order-1 fringes `γ` beside a letter reproducing itself as its own
/// border, as `(letter, side, γ)`.
pub fn fringes(system: &MorphicSystem, profiles: &LetterProfiles) -> Vec<(LetterId, Side, Word)> {
    let mut out = Vec::new();
    for b in 0..system.alphabet_size() {
        let img = system.image(b);
        if let Some(ll) = boundary_letter(img, profiles, 1, Side::Left) {
            if img[ll] == b && ll > 0 {
                out.push((b, Side::Left, img[..ll].to_vec()));
            }
        }
        if let Some(rl) = boundary_letter(img, profiles, 1, Side::Right) {
            if img[rl] == b && rl + 1 < img.len() {
                out.push((b, Side::Right, img[rl + 1..].to_vec()));
            }
        }
    }
    out
}

pub fn compute_final_periods(
    system: &MorphicSystem,
    profiles: &LetterProfiles,
) -> Result<FinalPeriodSet, NormalizationError> {
    let mut words = Vec::new();
    for (_, _, gamma) in fringes(system, profiles) {
        let mut doubled = system.apply_coding(&system.apply_morphism(&gamma));
        doubled.extend_from_within(..);
        let lambda = minimal_period(&doubled, PeriodMode::Complete)
            .ok_or(NormalizationError::MissingMinimalPeriod)?;
        words.push(lambda);
    }
    Ok(FinalPeriodSet::from_words(words))
}

/// Evaluates the three normalization predicates on `system` as given.
pub fn check_level(
    system: &MorphicSystem,
    profiles: &LetterProfiles,
) -> Result<LevelFlags, NormalizationError> {
    let weak = weakly_1_periodic(system, profiles);
    let strong = weak && borders_stabilize(system, profiles, 2 * system.alphabet_size());
    let periods = compute_final_periods(system, profiles)?;
    let long = fringes(system, profiles)
        .iter()
        .all(|(_, _, gamma)| gamma.len() >= 2 * periods.max_len);
    Ok(LevelFlags {
        weakly_1_periodic: weak,
        strongly_1_periodic: strong,
        long_images: long,
    })
}

/// Augments, then takes the least power of the morphism satisfying all three predicates.
pub fn normalize(system: &MorphicSystem) -> Result<Normalized, NormalizationError> {
    normalize_with(system, SearchLimits::default())
}

pub fn normalize_with(
    system: &MorphicSystem,
    limits: SearchLimits,
) -> Result<Normalized, NormalizationError> {
    let (augmented, added_letters) = augment_alphabet(system, &LetterProfiles::of(system))?;
    let profiles = LetterProfiles::of(&augmented);
    let mut current = augmented.clone();
    for power in 1..=limits.max_power {
        if power > 1 {
            current = current_power(&augmented, &current);
            if current.max_image_len() > limits.image_budget {
                break;
            }
        }
        let flags = check_level(&current, &profiles)?;
        if flags.all() {
            let final_periods = compute_final_periods(&current, &profiles)?;
            return Ok(Normalized {
                system: current,
                profiles,
                final_periods,
                report: NormalizationReport {
                    power,
                    added_letters,
                    flags,
                },
            });
        }
    }
    Err(NormalizationError::SearchBudgetExceeded {
        max_power: limits.max_power,
        image_budget: limits.image_budget,
    })
}

/// `φ^{n+1}` from `φ^n` by substituting `φ` into each image.
fn current_power(base: &MorphicSystem, current: &MorphicSystem) -> MorphicSystem {
    let names = current.names().to_vec();
    let phi = (0..current.alphabet_size())
        .map(|b| base.apply_morphism(current.image(b)))
        .collect();
    let psi = (0..current.alphabet_size()).map(|b| current.code(b)).collect();
    MorphicSystem::new(names, phi, psi, current.axiom()).expect("powers keep the invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::*;

    fn flags(s: &MorphicSystem) -> LevelFlags {
        check_level(s, &LetterProfiles::of(s)).unwrap()
    }

    fn rendered(s: &MorphicSystem, set: &FinalPeriodSet) -> Vec<String> {
        set.periods.iter().map(|p| s.render(p)).collect()
    }

    #[test]
    fn augmentation() {
        for text in [FIX_A, FIX_B] {
            let s = load(text);
            let (out, added) = augment_alphabet(&s, &LetterProfiles::of(&s)).unwrap();
            assert_eq!(out, s);
            assert!(added.is_empty());
        }
        let s: MorphicSystem = "alphabet: a\naxiom: a\nmorphism:\n a -> a a\ncoding:\n a -> a\n"
            .parse()
            .unwrap();
        let (out, added) = augment_alphabet(&s, &LetterProfiles::of(&s)).unwrap();
        assert_eq!(added, vec![(1, AddedRole::Order1), (2, AddedRole::Order2)]);
        let p = LetterProfiles::of(&out);
        assert_eq!((p.order(1), p.order(2)), (Order::Finite(1), Order::Finite(2)));
        assert_eq!(out.image(2), &[1, 2]);
        assert_eq!(s.generate_prefix(50).unwrap().text, out.generate_prefix(50).unwrap().text);
    }

    #[test]
    fn fix_a_levels() {
        let a = load(FIX_A);
        let f = flags(&a);
        assert!(f.weakly_1_periodic && !f.strongly_1_periodic);
        let f4 = flags(&a.morphism_power(4));
        assert!(f4.all());
        let p4 = a.morphism_power(4);
        let set = compute_final_periods(&p4, &LetterProfiles::of(&p4)).unwrap();
        assert_eq!(rendered(&a, &set), vec!["1"]);
        assert_eq!(set.max_len, 1);
    }

    #[test]
    fn fix_a_minimal_power() {
        let a = load(FIX_A);
        let n = normalize(&a).unwrap();
        let minimal = (1..=4).find(|&p| flags(&a.morphism_power(p)).all()).unwrap();
        assert_eq!(n.report.power, minimal);
        assert!(n.report.power <= 4);
    }

    #[test]
    fn fix_c_power_one() {
        let c = load(FIX_C);
        assert!(flags(&c).all());
        let n = normalize(&c).unwrap();
        assert_eq!(n.report.power, 1);
        assert_eq!(rendered(&c, &n.final_periods), vec!["c"]);
        assert_eq!(n.final_periods.max_len, 1);
    }

    #[test]
    fn normalized_is_idempotent() {
        for text in [FIX_A, FIX_B, FIX_C, FIX_D, FIX_E, ORDER_TWO] {
            let n = normalize(&load(text)).unwrap();
            let again = normalize(&n.system).unwrap();
            assert_eq!(again.report.power, 1);
            assert!(again.report.added_letters.is_empty());
        }
    }

    #[test]
    fn cyclic_closure() {
        let s: MorphicSystem = "alphabet: a b x\naxiom: x\nmorphism:\n x -> x x a b\n a -> a\n b -> b\ncoding:\n x -> x\n a -> a\n b -> b\n"
            .parse()
            .unwrap();
        let set = compute_final_periods(&s, &LetterProfiles::of(&s)).unwrap();
        assert_eq!(rendered(&s, &set), vec!["ab", "ba"]);
    }

    #[test]
    fn fix_b_needs_even_power() {
        let n = normalize(&load(FIX_B)).unwrap();
        assert_eq!(n.report.power, 4);
        assert_eq!(
            rendered(&n.system, &n.final_periods),
            vec!["ddee", "deed", "edde", "eedd"]
        );
    }
}
