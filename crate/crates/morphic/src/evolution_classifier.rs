//! Bounding sequences, continuous periodicity of evolutions, and the
//! classification of subword complexity.
//!
//! Condition 2 of continuous periodicity concerns an infinite word; it is
//! checked only up to a horizon `H`, which every verdict records.

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::block_engine::{
    anatomy_of, local_context, origin_closure, side_case, Anatomy, BlockError, BlockIndex, Case,
    LocalContext,
};
use crate::normalization::{normalize, FinalPeriodSet, NormalizationError, Normalized};
use crate::order_analysis::{boundary_letter, growth_count, reachable_letters, Order, Side};
use crate::periodicity::{is_periodic, PeriodMode};
use crate::word_model::{LetterId, MorphicSystem, Occurrence, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("Case I holds on the {0:?} side; there is no bounding sequence")]
    CaseI(Side),
    #[error("window of {0} members is too small (need at least 3)")]
    WindowTooSmall(usize),
    #[error("border letter id {0} does not reproduce itself; the morphism is not normalized")]
    NotNormalized(LetterId),
    #[error("prefix of length {needed} exceeds the budget {budget}")]
    PrefixTooShort { needed: String, budget: usize },
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Normalization(#[from] NormalizationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassifierParams {
    /// Consecutive stable members checked for condition 1, starting at `l = 3k`.
    pub window: usize,
    /// Letters of each bounding sequence checked for condition 2.
    pub horizon: usize,
    /// Prefix length for observed-evolution reporting.
    pub prefix_len: usize,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            window: 5,
            horizon: 512,
            prefix_len: 200_000,
        }
    }
}

/// Largest fixed-point prefix the terminal test will materialize.
pub const TERMINAL_PREFIX_BUDGET: usize = 50_000_000;

/// The prefix (right side) or suffix (left side) of length `length` of the
/// bounding sequence of an evolution; shorter if the sequence is finite.
pub fn bounding_prefix(
    system: &MorphicSystem,
    ctx: &LocalContext,
    side: Side,
    length: usize,
) -> Result<Word, ClassifierError> {
    let k = ctx.origin.k;
    let (case_left, case_right) = side_case(&ctx.index, k, &ctx.chain)?;
    let case = match side {
        Side::Left => case_left,
        Side::Right => case_right,
    };
    if case == Case::CaseI {
        return Err(ClassifierError::CaseI(side));
    }
    let (left, right) = borders(ctx, 1);
    let profiles = ctx.index.profiles();
    match side {
        Side::Right => {
            let img = system.image(right);
            let ll = boundary_letter(img, profiles, k, Side::Left)
                .filter(|&p| img[p] == right)
                .ok_or(ClassifierError::NotNormalized(right))?;
            let mut out = vec![right];
            let mut delta = img[ll + 1..].to_vec();
            while out.len() < length && !delta.is_empty() {
                out.extend_from_slice(&delta);
                delta = system.apply_morphism(&delta);
            }
            out.truncate(length);
            Ok(out)
        }
        Side::Left => {
            let img = system.image(left);
            let rl = boundary_letter(img, profiles, k, Side::Right)
                .filter(|&p| img[p] == left)
                .ok_or(ClassifierError::NotNormalized(left))?;
            let mut reversed = vec![left];
            let mut gamma = img[..rl].to_vec();
            while reversed.len() < length && !gamma.is_empty() {
                reversed.extend(gamma.iter().rev());
                gamma = system.apply_morphism(&gamma);
            }
            reversed.truncate(length);
            reversed.reverse();
            Ok(reversed)
        }
    }
}

/// `(LB_l, RB_l)` of the evolution held by `ctx`.
pub fn borders(ctx: &LocalContext, l: usize) -> (LetterId, LetterId) {
    let level = ctx.index.level(ctx.origin.k);
    let text = ctx.index.text();
    let item = ctx.chain[l];
    (
        text[level.items[item - 1].occurrence.start],
        text[level.items[item + 1].occurrence.start],
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodWitness {
    pub index: usize,
    pub left_period: Word,
    pub right_period: Word,
    pub residues: (usize, usize),
    pub window: usize,
    pub horizon: usize,
}

/// Anatomies of the members `3k .. 3k + W - 1`.
pub fn stable_window(ctx: &LocalContext, window: usize) -> Result<Vec<Anatomy>, ClassifierError> {
    if window < 3 {
        return Err(ClassifierError::WindowTooSmall(window));
    }
    let k = ctx.origin.k;
    (3 * k..3 * k + window)
        .map(|l| anatomy_of(&ctx.index, k, &ctx.chain, l).map_err(ClassifierError::from))
        .collect()
}

/// Grows the evolution far enough for a window of stable members.
pub fn context_for(
    normalized: &Normalized,
    origin: &crate::block_engine::AbstractOrigin,
    window: usize,
) -> Result<LocalContext, ClassifierError> {
    let generations = 3 * origin.k + window.max(3) - 1;
    Ok(local_context(
        &normalized.system,
        &normalized.profiles,
        origin,
        generations,
    )?)
}

fn coded(system: &MorphicSystem, index: &BlockIndex, occ: Occurrence) -> Word {
    system.apply_coding(index.prefix().slice(occ))
}

/// First final period making every word periodic in `mode` with a constant
/// length residue, and also satisfying `extra`.
fn find_period(
    finals: &FinalPeriodSet,
    words: &[Word],
    mode: PeriodMode,
    extra: impl Fn(&[LetterId]) -> bool,
) -> Option<(Word, usize)> {
    if finals.is_empty() {
        return words
            .iter()
            .all(Vec::is_empty)
            .then(|| (Vec::new(), 0));
    }
    finals.periods.iter().find_map(|lambda| {
        let residue = words.first().map_or(0, |w| w.len() % lambda.len());
        let ok = words
            .iter()
            .all(|w| w.len() % lambda.len() == residue && is_periodic(w, lambda, mode))
            && extra(lambda);
        ok.then(|| (lambda.clone(), residue))
    })
}

/// True iff the inner pseudoregular part between composite kernels `m` and
/// `m_next` (0 and `nker + 1` meaning the block ends) is weakly `λ`-periodic
/// on `side` with a constant length residue across the window.
pub fn weak_evolutional_period(
    system: &MorphicSystem,
    ctx: &LocalContext,
    window: &[Anatomy],
    pair: (usize, usize),
    lambda: &[LetterId],
    side: Side,
) -> Result<bool, ClassifierError> {
    if window.len() < 3 {
        return Err(ClassifierError::WindowTooSmall(window.len()));
    }
    let (m, m_next) = pair;
    let mode = match side {
        Side::Left => PeriodMode::WeakLeft,
        Side::Right => PeriodMode::WeakRight,
    };
    let mut residue = None;
    for a in window {
        let kernels = &a.composite_kernels;
        if m >= m_next || m_next > kernels.len() + 1 {
            return Ok(false);
        }
        let start = if m == 0 { a.block.start } else { kernels[m - 1].end_excl() };
        let end = if m_next == kernels.len() + 1 {
            a.block.end_excl()
        } else {
            kernels[m_next - 1].start
        };
        let word = coded(system, &ctx.index, Occurrence::span(start, end));
        let r = word.len() % lambda.len();
        if !is_periodic(&word, lambda, mode) || *residue.get_or_insert(r) != r {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Condition 1 on both sides, plus condition 2 where it applies.
pub fn continuous_period_check(
    system: &MorphicSystem,
    ctx: &LocalContext,
    window: &[Anatomy],
    m: usize,
    finals: &FinalPeriodSet,
    horizon: usize,
) -> Result<Option<PeriodWitness>, ClassifierError> {
    if window.len() < 3 {
        return Err(ClassifierError::WindowTooSmall(window.len()));
    }
    let first = &window[0];
    let ncker = first.ncker();
    if m == 0 || window.iter().any(|a| m > a.ncker()) {
        return Ok(None);
    }
    let left_words: Vec<Word> = window
        .iter()
        .map(|a| coded(system, &ctx.index, a.left_pseudoregular(m)))
        .collect();
    let right_words: Vec<Word> = window
        .iter()
        .map(|a| coded(system, &ctx.index, a.right_pseudoregular(m)))
        .collect();

    let left_bound = if first.case_left == Case::CaseII && m > 1 {
        Some(system.apply_coding(&bounding_prefix(system, ctx, Side::Left, horizon)?))
    } else {
        None
    };
    let right_bound = if first.case_right == Case::CaseII && m < ncker {
        Some(system.apply_coding(&bounding_prefix(system, ctx, Side::Right, horizon)?))
    } else {
        None
    };

    let left = find_period(finals, &left_words, PeriodMode::WeakLeft, |lambda| {
        left_bound
            .as_ref()
            .is_none_or(|w| is_periodic(w, lambda, PeriodMode::WeakRight))
    });
    let right = find_period(finals, &right_words, PeriodMode::WeakRight, |mu| {
        right_bound
            .as_ref()
            .is_none_or(|w| is_periodic(w, mu, PeriodMode::WeakLeft))
    });
    Ok(match (left, right) {
        (Some((lambda, r)), Some((mu, r2))) => Some(PeriodWitness {
            index: m,
            left_period: lambda,
            right_period: mu,
            residues: (r, r2),
            window: window.len(),
            horizon,
        }),
        _ => None,
    })
}

/// Whether some central kernel index witnesses continuous periodicity; the least one is reported.
pub fn is_continuously_periodic(
    system: &MorphicSystem,
    ctx: &LocalContext,
    finals: &FinalPeriodSet,
    params: &ClassifierParams,
) -> Result<(bool, Option<PeriodWitness>, usize), ClassifierError> {
    let window = stable_window(ctx, params.window)?;
    let ncker = window[0].ncker();
    for m in 1..=ncker {
        if let Some(w) = continuous_period_check(system, ctx, &window, m, finals, params.horizon)? {
            return Ok((true, Some(w), ncker));
        }
    }
    Ok((false, None, ncker))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComplexityClass {
    Constant,
    PolyExponent { num: usize, den: usize },
    NLogN,
}

impl ComplexityClass {
    pub fn poly(k: usize) -> Self {
        ComplexityClass::PolyExponent { num: k + 1, den: k }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ComplexityClass::Constant => "Constant",
            ComplexityClass::PolyExponent { .. } => "PolyExponent",
            ComplexityClass::NLogN => "NLogN",
        }
    }

    /// `"p/q"` for polynomial classes.
    pub fn exponent_text(&self) -> Option<String> {
        match self {
            ComplexityClass::PolyExponent { num, den } => Some(format!("{num}/{den}")),
            _ => None,
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            ComplexityClass::PolyExponent { num, den } => Some(*num as f64 / *den as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FiredRule {
    Prop1_2,
    Prop1_3,
    Prop1_4,
    Prop1_5,
    Prop1_6,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub k: usize,
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvolutionSummary {
    pub k: usize,
    pub origin: String,
    pub case_left: Case,
    pub case_right: Case,
    pub ncker: usize,
    pub continuously_periodic: bool,
    pub witness_index: Option<usize>,
    pub left_period: Option<String>,
    pub right_period: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSummary {
    pub k: usize,
    pub closure_evolutions: usize,
    /// Distinct origins seen in the generated prefix; absent when the prefix cannot be decomposed at this level.
    pub observed_evolutions: Option<usize>,
    pub all_continuously_periodic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityVerdict {
    pub class: ComplexityClass,
    pub fired_rule: FiredRule,
    pub k_star: Option<usize>,
    pub params: ClassifierParams,
    pub normalization_power: usize,
    pub counterexample: Option<Counterexample>,
    /// Order-∞ axiom with no finite-order letter in the fixed point.
    pub boundary_case: bool,
    pub levels: Vec<LevelSummary>,
    pub evolutions: Vec<EvolutionSummary>,
}

fn origin_label(system: &MorphicSystem, o: &crate::block_engine::AbstractOrigin) -> String {
    format!(
        "{}[{}]{}",
        system.name(o.left_border),
        system.render(&o.word),
        system.name(o.right_border)
    )
}

/// Checks every k-evolution of the origin closure.
pub fn check_level_evolutions(
    normalized: &Normalized,
    k: usize,
    params: &ClassifierParams,
) -> Result<Vec<EvolutionSummary>, ClassifierError> {
    let system = &normalized.system;
    let mut out = Vec::new();
    for origin in origin_closure(system, &normalized.profiles, k) {
        let ctx = context_for(normalized, &origin, params.window)?;
        let (ok, witness, ncker) =
            is_continuously_periodic(system, &ctx, &normalized.final_periods, params)?;
        let (case_left, case_right) = side_case(&ctx.index, k, &ctx.chain)?;
        out.push(EvolutionSummary {
            k,
            origin: origin_label(system, &origin),
            case_left,
            case_right,
            ncker,
            continuously_periodic: ok,
            witness_index: witness.as_ref().map(|w| w.index),
            left_period: witness.as_ref().map(|w| system.render(&w.left_period)),
            right_period: witness.as_ref().map(|w| system.render(&w.right_period)),
        });
    }
    Ok(out)
}

fn observed_count(normalized: &Normalized, k: usize, prefix_len: usize) -> Option<usize> {
    let prefix = normalized.system.generate_prefix(prefix_len).ok()?;
    let index = BlockIndex::new(prefix, normalized.profiles.clone(), k).ok()?;
    let evolutions = crate::block_engine::collect_evolutions(&index, k).ok()?;
    let keys: std::collections::BTreeSet<_> = evolutions.iter().map(|e| e.abstract_key()).collect();
    Some(keys.len())
}

/// Completes the finite-order case when all k-evolutions are continuously periodic and the axiom has order `k + 2`.
pub fn finite_order_terminal_test(
    normalized: &Normalized,
    k: usize,
) -> Result<ComplexityClass, ClassifierError> {
    let system = &normalized.system;
    let a = system.axiom();
    let len_of = |n: usize| -> Result<usize, ClassifierError> {
        let count = growth_count(system, a, n);
        count
            .to_usize()
            .filter(|&c| c <= TERMINAL_PREFIX_BUDGET)
            .ok_or_else(|| ClassifierError::PrefixTooShort {
                needed: count.to_string(),
                budget: TERMINAL_PREFIX_BUDGET,
            })
    };
    let short = len_of(3 * k + 1)?;
    let long = len_of(3 * k + 2)?;
    let prefix = system.generate_prefix(long).map_err(|e| {
        ClassifierError::Normalization(NormalizationError::System(e))
    })?;
    let target = Order::Finite(k + 1);
    let rightmost = |end: usize| {
        (0..end)
            .rev()
            .find(|&p| normalized.profiles.order(prefix.text[p]) == target)
    };
    let (Some(i), Some(j)) = (rightmost(short), rightmost(long)) else {
        return Ok(ComplexityClass::poly(k));
    };
    let stretch = system.apply_coding(&prefix.text[i + 1..=j.max(i)]);
    let tiled = normalized
        .final_periods
        .periods
        .iter()
        .any(|lambda| is_periodic(&stretch, lambda, PeriodMode::Complete));
    Ok(if tiled {
        ComplexityClass::Constant
    } else {
        ComplexityClass::poly(k)
    })
}

/// The decision tree over the axiom order and the continuously periodic levels.
pub fn classify(system: &MorphicSystem, params: &ClassifierParams) -> Result<ComplexityVerdict, ClassifierError> {
    let normalized = normalize(system)?;
    classify_normalized(&normalized, params)
}

pub fn classify_normalized(
    normalized: &Normalized,
    params: &ClassifierParams,
) -> Result<ComplexityVerdict, ClassifierError> {
    if params.window < 3 {
        return Err(ClassifierError::WindowTooSmall(params.window));
    }
    let system = &normalized.system;
    let profiles = &normalized.profiles;
    let axiom_order = profiles.order(system.axiom());
    let mut verdict = ComplexityVerdict {
        class: ComplexityClass::Constant,
        fired_rule: FiredRule::Prop1_5,
        k_star: None,
        params: *params,
        normalization_power: normalized.report.power,
        counterexample: None,
        boundary_case: false,
        levels: Vec::new(),
        evolutions: Vec::new(),
    };
    let top = match axiom_order {
        Order::Finite(k) if k <= 2 => return Ok(verdict),
        Order::Finite(k) => k - 2,
        Order::Infinite => {
            let finite = reachable_letters(system)
                .into_iter()
                .filter_map(|b| profiles.order(b).finite())
                .max()
                .unwrap_or(0);
            verdict.boundary_case = finite == 0;
            finite + 1
        }
    };
    let mut k_star = 0;
    let mut failures = std::collections::BTreeMap::new();
    for k in 1..=top {
        let summaries = check_level_evolutions(normalized, k, params)?;
        let all = summaries.iter().all(|s| s.continuously_periodic);
        if all {
            k_star = k;
        } else if let Some(bad) = summaries.iter().find(|s| !s.continuously_periodic) {
            failures.insert(
                k,
                Counterexample {
                    k,
                    origin: bad.origin.clone(),
                },
            );
        }
        verdict.levels.push(LevelSummary {
            k,
            closure_evolutions: summaries.len(),
            observed_evolutions: observed_count(normalized, k, params.prefix_len),
            all_continuously_periodic: all,
        });
        verdict.evolutions.extend(summaries);
    }
    // 1-evolutions are always continuously periodic; a failure there is reported but k* stays at least 1.
    let k_star = k_star.max(1);
    verdict.k_star = Some(k_star);
    if k_star < top {
        verdict.class = ComplexityClass::poly(k_star);
        verdict.fired_rule = FiredRule::Prop1_2;
        verdict.counterexample = failures
            .get(&(k_star + 1))
            .or_else(|| failures.values().next())
            .cloned();
        return Ok(verdict);
    }
    match axiom_order {
        Order::Infinite => {
            verdict.class = ComplexityClass::NLogN;
            verdict.fired_rule = FiredRule::Prop1_6;
        }
        Order::Finite(_) => {
            verdict.class = finite_order_terminal_test(normalized, k_star)?;
            verdict.fired_rule = FiredRule::Prop1_4;
            if verdict.class == ComplexityClass::Constant {
                verdict.k_star = None;
            }
        }
    }
    Ok(verdict)
}
