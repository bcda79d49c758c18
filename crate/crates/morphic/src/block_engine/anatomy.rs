//! Atoms, preperiods, regular parts, cores and kernels of stable members.

use serde::Serialize;

use super::{BlockError, BlockIndex, ItemKind, Multiblock};
use crate::order_analysis::Order;
use crate::word_model::Occurrence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Case {
    CaseI,
    CaseII,
}

/// Atoms of `E_l` at level `k-1`; `left[m-1]` is the m-th left atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Atoms {
    pub left: Vec<Multiblock>,
    pub zeroth: Multiblock,
    pub right: Vec<Multiblock>,
}

impl Atoms {
    /// All atoms from `LA_l` to `RA_l`, left to right.
    pub fn in_order(&self) -> Vec<Multiblock> {
        self.left
            .iter()
            .rev()
            .chain(std::iter::once(&self.zeroth))
            .chain(self.right.iter())
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Anatomy {
    pub k: usize,
    pub seq: usize,
    pub block: Occurrence,
    pub atoms: Atoms,
    pub left_preperiod: Multiblock,
    pub left_regular: Multiblock,
    pub core: Multiblock,
    pub right_regular: Multiblock,
    pub right_preperiod: Multiblock,
    pub case_left: Case,
    pub case_right: Case,
    pub prime_kernels: Vec<Occurrence>,
    pub composite_kernels: Vec<Occurrence>,
    pub pseudoregular_parts: Vec<Occurrence>,
    pub central_prime_kernels: Vec<Occurrence>,
    pub central_kernels: Vec<Occurrence>,
}

impl Anatomy {
    /// Number of composite central kernels.
    pub fn ncker(&self) -> usize {
        self.central_kernels.len()
    }

    /// Left pseudoregular part for central kernel `m` (1-based).
    pub fn left_pseudoregular(&self, m: usize) -> Occurrence {
        Occurrence::span(
            self.left_preperiod.fg.end_excl(),
            self.central_kernels[m - 1].start,
        )
    }

    /// Right pseudoregular part for central kernel `m` (1-based).
    pub fn right_pseudoregular(&self, m: usize) -> Occurrence {
        Occurrence::span(
            self.central_kernels[m - 1].end_excl(),
            self.right_preperiod.fg.start,
        )
    }
}

/// Atoms of `E_l` for the chain `E_0, E_1, ...` of k-block items.
pub fn atoms_of(index: &BlockIndex, k: usize, chain: &[usize], l: usize) -> Result<Atoms, BlockError> {
    if k == 0 || l >= chain.len() {
        return Err(BlockError::PrefixTooShort(index.level(k).covered));
    }
    let j = k - 1;
    let mut full = index.full_multiblock(k, chain[0])?;
    let mut zeroth = full;
    let mut left: Vec<Multiblock> = Vec::with_capacity(l);
    let mut right: Vec<Multiblock> = Vec::with_capacity(l);
    for m in 1..=l {
        zeroth = index.descendant_multiblock(&zeroth)?;
        for atom in left.iter_mut().chain(right.iter_mut()) {
            *atom = index.descendant_multiblock(atom)?;
        }
        let (g1, g2) = index.descendant_gaps(j, full.lo, full.hi)?;
        full = index.full_multiblock(k, chain[m])?;
        if g1 < full.lo || g2 > full.hi || g1 > g2 {
            return Err(BlockError::Inconsistent(format!(
                "descendant of member {} escapes member {m}",
                m - 1
            )));
        }
        left.push(index.multiblock(j, full.lo, g1));
        right.push(index.multiblock(j, g2, full.hi));
    }
    Ok(Atoms {
        left,
        zeroth,
        right,
    })
}

/// Case I on a side iff the second atom of `E_2` on that side holds a letter of order `k`.
pub fn side_case(index: &BlockIndex, k: usize, chain: &[usize]) -> Result<(Case, Case), BlockError> {
    let atoms = atoms_of(index, k, chain, 2)?;
    let has_order_k = |mb: &Multiblock| {
        index
            .prefix()
            .slice(mb.fg)
            .iter()
            .any(|&c| index.profiles().order(c) == Order::Finite(k))
    };
    let case = |mb: &Multiblock| if has_order_k(mb) { Case::CaseI } else { Case::CaseII };
    Ok((case(&atoms.left[1]), case(&atoms.right[1])))
}

struct Skeleton {
    atoms: Atoms,
    left_preperiod: Multiblock,
    left_regular: Multiblock,
    core: Multiblock,
    right_regular: Multiblock,
    right_preperiod: Multiblock,
    case_left: Case,
    case_right: Case,
}

fn skeleton(index: &BlockIndex, k: usize, chain: &[usize], l: usize) -> Result<Skeleton, BlockError> {
    if l < 3 * k {
        return Err(BlockError::NotStable { l, required: 3 * k });
    }
    let atoms = atoms_of(index, k, chain, l)?;
    let (case_left, case_right) = side_case(index, k, chain)?;
    let j = k - 1;
    let span = |a: &Multiblock, b: &Multiblock| index.multiblock(j, a.lo, b.hi);
    // left[m-1] is LA_m; preperiods take the outer 3k-2 atoms, regular parts atoms 2..
    let left_preperiod = span(&atoms.left[l - 1], &atoms.left[l + 2 - 3 * k]);
    let left_regular = span(&atoms.left[l + 1 - 3 * k], &atoms.left[1]);
    let core = span(&atoms.left[0], &atoms.right[0]);
    let right_regular = span(&atoms.right[1], &atoms.right[l + 1 - 3 * k]);
    let right_preperiod = span(&atoms.right[l + 2 - 3 * k], &atoms.right[l - 1]);
    Ok(Skeleton {
        atoms,
        left_preperiod,
        left_regular,
        core,
        right_regular,
        right_preperiod,
        case_left,
        case_right,
    })
}

fn block_prime_kernels(index: &BlockIndex, k: usize, item: usize) -> Result<Vec<Occurrence>, BlockError> {
    let chain = index.chain_of(k, item);
    let l = chain.len() - 1;
    let sk = skeleton(index, k, &chain, l).map_err(|e| match e {
        BlockError::NotStable { l, required } => BlockError::NotStableMultiblock(format!(
            "{k}-block at {} has sequence number {l} < {required}",
            index.level(k).items[item].occurrence
        )),
        other => other,
    })?;
    let mut out = Vec::new();
    if sk.case_left == Case::CaseI {
        out.push(sk.left_preperiod.fg);
    }
    out.extend(kernels_of(index, &sk.core)?);
    if sk.case_right == Case::CaseI {
        out.push(sk.right_preperiod.fg);
    }
    Ok(out)
}

/// Prime kernels of a stable multiblock, left to right.
pub fn kernels_of(index: &BlockIndex, mb: &Multiblock) -> Result<Vec<Occurrence>, BlockError> {
    let j = mb.level;
    let profiles = index.profiles();
    let text = index.text();
    if j == 0 {
        if let Some(&c) = text[mb.fg.range()]
            .iter()
            .find(|&&c| !(profiles.order(c) == Order::Finite(1) && profiles.is_periodic(c)))
        {
            return Err(BlockError::NotStableMultiblock(format!(
                "letter id {c} in a 0-multiblock is not periodic of order 1"
            )));
        }
        return Ok(vec![mb.fg]);
    }
    let level = index.level(j);
    let mut out = Vec::new();
    for item in mb.lo..mb.hi {
        let it = level.items[item];
        match it.kind {
            ItemKind::High => {
                let c = text[it.occurrence.start];
                if !(profiles.order(c) == Order::Finite(j + 1) && profiles.is_periodic(c)) {
                    return Err(BlockError::NotStableMultiblock(format!(
                        "letter at {} is not periodic of order {}",
                        it.occurrence.start,
                        j + 1
                    )));
                }
                out.push(it.occurrence);
            }
            ItemKind::Block => out.extend(block_prime_kernels(index, j, item)?),
        }
    }
    Ok(out)
}

/// Maximal runs of adjacent prime kernels.
pub fn composite_kernels(prime: &[Occurrence]) -> Vec<Occurrence> {
    let mut out: Vec<Occurrence> = Vec::new();
    for &kernel in prime {
        match out.last_mut() {
            Some(last) if last.end_excl() == kernel.start => {
                *last = Occurrence::span(last.start, kernel.end_excl());
            }
            _ => out.push(kernel),
        }
    }
    out
}

/// The parts of `whole` before, between and after the composite kernels.
pub fn pseudoregular_parts(whole: Occurrence, composite: &[Occurrence]) -> Vec<Occurrence> {
    let mut out = Vec::with_capacity(composite.len() + 1);
    let mut cursor = whole.start;
    for kernel in composite {
        out.push(Occurrence::span(cursor, kernel.start));
        cursor = kernel.end_excl();
    }
    out.push(Occurrence::span(cursor, whole.end_excl()));
    out
}

/// Full anatomy of the stable member `E_l` of the chain.
pub fn anatomy_of(index: &BlockIndex, k: usize, chain: &[usize], l: usize) -> Result<Anatomy, BlockError> {
    let sk = skeleton(index, k, chain, l)?;
    let central_prime_kernels = kernels_of(index, &sk.core)?;
    let central_kernels = composite_kernels(&central_prime_kernels);
    let mut prime_kernels = Vec::new();
    if sk.case_left == Case::CaseI {
        prime_kernels.push(sk.left_preperiod.fg);
    }
    prime_kernels.extend(central_prime_kernels.iter().copied());
    if sk.case_right == Case::CaseI {
        prime_kernels.push(sk.right_preperiod.fg);
    }
    let composite = composite_kernels(&prime_kernels);
    let block = index.level(k).items[chain[l]].occurrence;
    let pseudoregular = pseudoregular_parts(block, &composite);
    Ok(Anatomy {
        k,
        seq: l,
        block,
        atoms: sk.atoms,
        left_preperiod: sk.left_preperiod,
        left_regular: sk.left_regular,
        core: sk.core,
        right_regular: sk.right_regular,
        right_preperiod: sk.right_preperiod,
        case_left: sk.case_left,
        case_right: sk.case_right,
        prime_kernels,
        composite_kernels: composite,
        pseudoregular_parts: pseudoregular,
        central_prime_kernels,
        central_kernels,
    })
}
