//! k-blocks of a fixed point: decomposition, descendants and ancestors,
//! evolutions, and the multiblock calculus used by the anatomy code.
//!
//! Multiblocks are stored as pairs of gaps. At level `k ≥ 1` the items of a
//! decomposition alternate `High, Block, High, ...` starting with the high
//! letter at position 0; gap `g` is the boundary in front of item `g`, so the
//! multiblock `(lo, hi)` has members `lo..hi`. At level 0 every letter is an
//! item and gaps coincide with positions.

mod anatomy;
mod context;

pub use anatomy::{
    anatomy_of, atoms_of, composite_kernels, kernels_of, pseudoregular_parts, side_case,
    Anatomy, Atoms, Case,
};
pub use context::{local_context, origin_closure, AbstractOrigin, LocalContext};

use serde::Serialize;
use thiserror::Error;

use crate::order_analysis::{boundary_letter, LetterProfiles, Side};
use crate::word_model::{LetterId, Occurrence, ProvenancePrefix, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error("the first letter must have order greater than {k}")]
    AxiomOrderTooLow { k: usize },
    #[error("letters of order at most {k} form an unbounded tail ({tail} of {len} letters)")]
    UnboundedTail { k: usize, tail: usize, len: usize },
    #[error("prefix too short: position {0} lies outside the analysed region")]
    PrefixTooShort(usize),
    #[error("member {l} is not stable; stability starts at {required}")]
    NotStable { l: usize, required: usize },
    #[error("multiblock is not stable: {0}")]
    NotStableMultiblock(String),
    #[error("item {0} is not a block")]
    NotABlock(usize),
    #[error("inconsistent block structure: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ItemKind {
    High,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Item {
    pub kind: ItemKind,
    pub occurrence: Occurrence,
}

const NO_ITEM: u32 = u32::MAX;

/// Decomposition of the covered region into k-blocks and letters of order `> k`,
/// with ancestor links for the blocks.
#[derive(Debug, Clone)]
pub struct Level {
    pub k: usize,
    pub items: Vec<Item>,
    /// Positions `0..covered` are tiled by `items`; the remaining tail may be an unfinished block.
    pub covered: usize,
    item_of: Vec<u32>,
    ancestor: Vec<Option<usize>>,
    seq: Vec<usize>,
    origin: Vec<usize>,
}

impl Level {
    pub fn item_at(&self, pos: usize) -> Option<usize> {
        match self.item_of.get(pos) {
            Some(&i) if i != NO_ITEM => Some(i as usize),
            _ => None,
        }
    }

    pub fn ancestor(&self, item: usize) -> Option<usize> {
        self.ancestor[item]
    }

    /// Evolutional sequence number (0 for origins and for high letters).
    pub fn seq(&self, item: usize) -> usize {
        self.seq[item]
    }

    pub fn origin(&self, item: usize) -> usize {
        self.origin[item]
    }

    pub fn is_block(&self, item: usize) -> bool {
        self.items[item].kind == ItemKind::Block
    }

    pub fn blocks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.items.len()).filter(|&i| self.is_block(i))
    }

    /// Text position of gap `g`.
    pub fn gap_pos(&self, g: usize) -> usize {
        if g < self.items.len() {
            self.items[g].occurrence.start
        } else {
            self.covered
        }
    }

    /// Forgetful occurrence of the multiblock `(lo, hi)`.
    pub fn forgetful(&self, lo: usize, hi: usize) -> Occurrence {
        if lo < hi {
            Occurrence::span(
                self.items[lo].occurrence.start,
                self.items[hi - 1].occurrence.end_excl(),
            )
        } else {
            Occurrence::empty_at(self.gap_pos(lo))
        }
    }
}

/// A k-multiblock given by its gaps, with its forgetful occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Multiblock {
    pub level: usize,
    pub lo: usize,
    pub hi: usize,
    pub fg: Occurrence,
}

impl Multiblock {
    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }
}

/// One k-block occurrence with its lineage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRecord {
    pub occurrence: Occurrence,
    pub k: usize,
    pub item: usize,
    pub evolution_id: usize,
    pub seq_no: usize,
    pub left_border: LetterId,
    pub right_border: LetterId,
}

/// Decompositions of one provenance prefix at levels `0..=max_level`.
#[derive(Debug, Clone)]
pub struct BlockIndex {
    prefix: ProvenancePrefix,
    profiles: LetterProfiles,
    levels: Vec<Level>,
}

impl BlockIndex {
    pub fn new(
        prefix: ProvenancePrefix,
        profiles: LetterProfiles,
        max_level: usize,
    ) -> Result<Self, BlockError> {
        let mut levels = Vec::with_capacity(max_level + 1);
        for k in 0..=max_level {
            levels.push(build_level(&prefix, &profiles, k)?);
        }
        Ok(Self {
            prefix,
            profiles,
            levels,
        })
    }

    pub fn prefix(&self) -> &ProvenancePrefix {
        &self.prefix
    }

    pub fn text(&self) -> &[LetterId] {
        &self.prefix.text
    }

    pub fn profiles(&self) -> &LetterProfiles {
        &self.profiles
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k]
    }

    pub fn multiblock(&self, level: usize, lo: usize, hi: usize) -> Multiblock {
        Multiblock {
            level,
            lo,
            hi,
            fg: self.levels[level].forgetful(lo, hi),
        }
    }

    pub fn record(&self, k: usize, item: usize) -> Result<BlockRecord, BlockError> {
        let level = &self.levels[k];
        if !level.is_block(item) {
            return Err(BlockError::NotABlock(item));
        }
        let text = self.text();
        Ok(BlockRecord {
            occurrence: level.items[item].occurrence,
            k,
            item,
            evolution_id: level.origin(item),
            seq_no: level.seq(item),
            left_border: text[level.items[item - 1].occurrence.start],
            right_border: text[level.items[item + 1].occurrence.start],
        })
    }

    fn image(&self, pos: usize) -> Result<Occurrence, BlockError> {
        self.prefix
            .image_span(pos)
            .ok_or(BlockError::PrefixTooShort(pos))
    }

    fn item_at(&self, k: usize, pos: usize) -> Result<usize, BlockError> {
        self.levels[k]
            .item_at(pos)
            .ok_or(BlockError::PrefixTooShort(pos))
    }

    /// Position of `LL_k` or `RL_k` inside the stored image of `pos`.
    fn border_in_image(&self, k: usize, pos: usize, side: Side) -> Result<usize, BlockError> {
        let img = self.image(pos)?;
        let offset = boundary_letter(self.prefix.slice(img), &self.profiles, k, side)
            .ok_or_else(|| {
                BlockError::Inconsistent(format!("image of position {pos} has no letter of order > {k}"))
            })?;
        Ok(img.start + offset)
    }

    /// `Dc_k` of the k-block at `item`: the block following `RL_k(φ(LB))`.
    pub fn descendant_block(&self, k: usize, item: usize) -> Result<usize, BlockError> {
        let level = &self.levels[k];
        if k == 0 || !level.is_block(item) {
            return Err(BlockError::NotABlock(item));
        }
        let left = level.items[item - 1].occurrence.start;
        let rl = self.border_in_image(k, left, Side::Right)?;
        let next = self.item_at(k, rl)? + 1;
        if next + 1 >= level.items.len() {
            return Err(BlockError::PrefixTooShort(level.covered));
        }
        Ok(next)
    }

    pub fn ancestor(&self, k: usize, item: usize) -> Option<usize> {
        self.levels[k].ancestor(item)
    }

    /// Gaps of the descendant of one member item.
    fn descendant_item(&self, k: usize, item: usize) -> Result<(usize, usize), BlockError> {
        let level = &self.levels[k];
        match level.items[item].kind {
            ItemKind::Block => {
                let d = self.descendant_block(k, item)?;
                Ok((d, d + 1))
            }
            ItemKind::High => {
                let pos = level.items[item].occurrence.start;
                let ll = self.border_in_image(k, pos, Side::Left)?;
                let rl = self.border_in_image(k, pos, Side::Right)?;
                Ok((self.item_at(k, ll)?, self.item_at(k, rl)? + 1))
            }
        }
    }

    /// `Dc_k` of the multiblock `(lo, hi)` at level `k`, including the empty cases.
    pub fn descendant_gaps(&self, k: usize, lo: usize, hi: usize) -> Result<(usize, usize), BlockError> {
        if k == 0 {
            let start = |g: usize| -> Result<usize, BlockError> { Ok(self.image(g)?.start) };
            return if lo < hi {
                Ok((start(lo)?, self.image(hi - 1)?.end_excl()))
            } else {
                let g = start(lo)?;
                Ok((g, g))
            };
        }
        let level = &self.levels[k];
        if lo < hi {
            let first = self.descendant_item(k, lo)?.0;
            let last = self.descendant_item(k, hi - 1)?.1;
            return Ok((first, last));
        }
        let g = if lo == 0 {
            0
        } else if level.is_block(lo - 1) {
            self.descendant_block(k, lo - 1)? + 1
        } else if lo < level.items.len() {
            self.descendant_block(k, lo)?
        } else {
            return Err(BlockError::PrefixTooShort(level.covered));
        };
        Ok((g, g))
    }

    pub fn descendant_multiblock(&self, mb: &Multiblock) -> Result<Multiblock, BlockError> {
        let (lo, hi) = self.descendant_gaps(mb.level, mb.lo, mb.hi)?;
        Ok(self.multiblock(mb.level, lo, hi))
    }

    /// The maximal `(k-1)`-multiblock with the same forgetful occurrence as the k-block `item`.
    pub fn full_multiblock(&self, k: usize, item: usize) -> Result<Multiblock, BlockError> {
        let occ = self.levels[k].items[item].occurrence;
        let j = k - 1;
        if j == 0 {
            return Ok(self.multiblock(0, occ.start, occ.end_excl()));
        }
        let text = self.text();
        let high = |pos: usize| self.profiles.is_high(text[pos], j);
        let (lo, hi) = if occ.is_empty() {
            let it = self.item_at(j, occ.start)?;
            (it - 1, it)
        } else {
            let first = occ.start;
            let last = occ.end_excl() - 1;
            let lo = if high(first) {
                self.item_at(j, first)? - 1
            } else {
                self.item_at(j, first)?
            };
            let hi = if high(last) {
                self.item_at(j, last)? + 2
            } else {
                self.item_at(j, last)? + 1
            };
            (lo, hi)
        };
        Ok(self.multiblock(j, lo, hi))
    }

    /// Items of the evolution of `item` from its origin up to `item`.
    pub fn chain_of(&self, k: usize, item: usize) -> Vec<usize> {
        let mut chain = vec![item];
        let mut current = item;
        while let Some(a) = self.levels[k].ancestor(current) {
            chain.push(a);
            current = a;
        }
        chain.reverse();
        chain
    }

    pub fn word(&self, occ: Occurrence) -> Word {
        self.prefix.slice(occ).to_vec()
    }
}

fn build_level(
    prefix: &ProvenancePrefix,
    profiles: &LetterProfiles,
    k: usize,
) -> Result<Level, BlockError> {
    let text = &prefix.text;
    let len = text.len();
    if k == 0 {
        return Ok(Level {
            k,
            items: (0..len)
                .map(|p| Item {
                    kind: ItemKind::High,
                    occurrence: Occurrence::new(p, 1),
                })
                .collect(),
            covered: len,
            item_of: (0..len as u32).collect(),
            ancestor: vec![None; len],
            seq: vec![0; len],
            origin: (0..len).collect(),
        });
    }
    if len == 0 || !profiles.is_high(text[0], k) {
        return Err(BlockError::AxiomOrderTooLow { k });
    }
    let mut items = vec![Item {
        kind: ItemKind::High,
        occurrence: Occurrence::new(0, 1),
    }];
    let mut item_of = vec![NO_ITEM; len];
    item_of[0] = 0;
    let mut run = 1;
    for p in 1..len {
        if profiles.is_high(text[p], k) {
            let block = items.len() as u32;
            item_of[run..p].fill(block);
            items.push(Item {
                kind: ItemKind::Block,
                occurrence: Occurrence::span(run, p),
            });
            item_of[p] = block + 1;
            items.push(Item {
                kind: ItemKind::High,
                occurrence: Occurrence::new(p, 1),
            });
            run = p + 1;
        }
    }
    let tail = len - run;
    if len > 8 && tail > len / 2 {
        return Err(BlockError::UnboundedTail { k, tail, len });
    }

    let n = items.len();
    let mut ancestor = vec![None; n];
    let mut seq = vec![0usize; n];
    let mut origin: Vec<usize> = (0..n).collect();
    for idx in (1..n).step_by(2) {
        let left = items[idx - 1].occurrence.start;
        let right = items[idx + 1].occurrence.start;
        let p = prefix.parent(left);
        let q = prefix.parent(right);
        if p == q {
            continue;
        }
        let a = item_of[p] as usize + 1;
        if a >= idx || items[a].kind != ItemKind::Block || items[a + 1].occurrence.start != q {
            return Err(BlockError::Inconsistent(format!(
                "block at {} has no well-formed ancestor",
                items[idx].occurrence
            )));
        }
        ancestor[idx] = Some(a);
        seq[idx] = seq[a] + 1;
        origin[idx] = origin[a];
    }
    Ok(Level {
        k,
        items,
        covered: run,
        item_of,
        ancestor,
        seq,
        origin,
    })
}

/// Decomposition of the covered region of `prefix` at level `k ≥ 1`.
pub fn decompose(
    prefix: &ProvenancePrefix,
    profiles: &LetterProfiles,
    k: usize,
) -> Result<Vec<Item>, BlockError> {
    Ok(build_level(prefix, profiles, k)?.items)
}

/// An evolution as observed in a prefix: its members indexed by sequence number.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionRecord {
    pub id: usize,
    pub k: usize,
    pub members: Vec<BlockRecord>,
    pub abstract_members: Vec<Word>,
    pub cases: Option<(Case, Case)>,
}

impl EvolutionRecord {
    pub fn origin(&self) -> &BlockRecord {
        &self.members[0]
    }

    pub fn chain(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.item).collect()
    }

    /// Borders and origin word; equal keys give equal abstract evolutions.
    pub fn abstract_key(&self) -> (LetterId, Word, LetterId) {
        let o = self.origin();
        (o.left_border, self.abstract_members[0].clone(), o.right_border)
    }
}

/// Groups the observed k-blocks into evolutions, ordered by origin position.
pub fn collect_evolutions(index: &BlockIndex, k: usize) -> Result<Vec<EvolutionRecord>, BlockError> {
    let level = index.level(k);
    let mut by_origin: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for b in level.blocks() {
        by_origin.entry(level.origin(b)).or_default().push(b);
    }
    let mut out = Vec::with_capacity(by_origin.len());
    for (id, mut items) in by_origin {
        items.sort_by_key(|&i| level.seq(i));
        let members = items
            .iter()
            .map(|&i| index.record(k, i))
            .collect::<Result<Vec<_>, _>>()?;
        let abstract_members = members.iter().map(|m| index.word(m.occurrence)).collect();
        let cases = if items.len() >= 3 {
            side_case(index, k, &items).ok()
        } else {
            None
        };
        out.push(EvolutionRecord {
            id,
            k,
            members,
            abstract_members,
            cases,
        });
    }
    Ok(out)
}
