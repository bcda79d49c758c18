//! Abstract origins and the local windows in which their evolutions are grown.
//!
//! An origin is a segment strictly between two consecutive letters of order
//! `> k` inside `φ(b)` for a letter `b` of the fixed point. Its evolution is
//! determined by the segment and its two borders, so it can be grown in a
//! private window `b W_0 W_1 ... W_G` where `W_l = LB_l E_l RB_l` and
//!
//! ```text
//! E_{l+1} = (φ(LB_l) after RL_k) φ(E_l) (φ(RB_l) before LL_k)
//! ```
//!
//! Border letters store only the retained part of their image. Blocks at the
//! junctions `RB_l | LB_{l+1}` are artefacts of the window and are never
//! reached from the evolution.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{BlockError, BlockIndex};
use crate::order_analysis::{boundary_letter, reachable_letters, LetterProfiles, Side};
use crate::word_model::{LetterId, MorphicSystem, Occurrence, ProvenancePrefix, Word};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AbstractOrigin {
    pub k: usize,
    pub left_border: LetterId,
    pub word: Word,
    pub right_border: LetterId,
    /// A letter whose image contains the origin.
    pub parent_letter: LetterId,
}

/// All abstract origins of k-block evolutions in the fixed point.
pub fn origin_closure(
    system: &MorphicSystem,
    profiles: &LetterProfiles,
    k: usize,
) -> Vec<AbstractOrigin> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for b in reachable_letters(system) {
        let img = system.image(b);
        let highs: Vec<usize> = (0..img.len())
            .filter(|&i| profiles.is_high(img[i], k))
            .collect();
        for pair in highs.windows(2) {
            let key = (img[pair[0]], img[pair[0] + 1..pair[1]].to_vec(), img[pair[1]]);
            if seen.insert(key.clone()) {
                out.push(AbstractOrigin {
                    k,
                    left_border: key.0,
                    word: key.1,
                    right_border: key.2,
                    parent_letter: b,
                });
            }
        }
    }
    out.sort();
    out
}

/// A window holding `E_0 ... E_G` of one evolution with exact lineage.
#[derive(Debug, Clone)]
pub struct LocalContext {
    pub origin: AbstractOrigin,
    pub index: BlockIndex,
    /// Item of `E_l` at level `k`.
    pub chain: Vec<usize>,
}

impl LocalContext {
    pub fn member(&self, l: usize) -> Occurrence {
        self.index.level(self.origin.k).items[self.chain[l]].occurrence
    }

    pub fn generations(&self) -> usize {
        self.chain.len() - 1
    }
}

pub fn local_context(
    system: &MorphicSystem,
    profiles: &LetterProfiles,
    origin: &AbstractOrigin,
    generations: usize,
) -> Result<LocalContext, BlockError> {
    let k = origin.k;
    let mut text: Word = vec![origin.parent_letter];
    let mut parent = vec![0usize];
    let mut image: Vec<Option<Occurrence>> = vec![None];

    let w0_len = origin.word.len() + 2;
    text.push(origin.left_border);
    text.extend_from_slice(&origin.word);
    text.push(origin.right_border);
    parent.resize(text.len(), 0);
    image.resize(text.len(), None);
    image[0] = Some(Occurrence::new(1, w0_len));

    let mut lb = 1usize;
    let mut rb = text.len() - 1;
    let mut border_positions = vec![lb];
    for _ in 0..generations {
        let start = text.len();
        let lb_img = system.image(text[lb]);
        let rl = boundary_letter(lb_img, profiles, k, Side::Right).ok_or_else(|| {
            BlockError::Inconsistent(format!("left border id {} has no letter of order > {k}", text[lb]))
        })?;
        push_image(&mut text, &mut parent, &mut image, lb, &lb_img[rl..]);
        for q in lb + 1..rb {
            let img = system.image(text[q]);
            push_image(&mut text, &mut parent, &mut image, q, img);
        }
        let rb_img = system.image(text[rb]);
        let ll = boundary_letter(rb_img, profiles, k, Side::Left).ok_or_else(|| {
            BlockError::Inconsistent(format!("right border id {} has no letter of order > {k}", text[rb]))
        })?;
        push_image(&mut text, &mut parent, &mut image, rb, &rb_img[..=ll]);
        lb = start;
        rb = text.len() - 1;
        border_positions.push(lb);
    }
    let prefix = ProvenancePrefix {
        text,
        parent,
        image,
    };
    let index = BlockIndex::new(prefix, profiles.clone(), k)?;
    let level = index.level(k);
    let mut chain = Vec::with_capacity(border_positions.len());
    for (l, &pos) in border_positions.iter().enumerate() {
        let item = level.item_at(pos).ok_or(BlockError::PrefixTooShort(pos))? + 1;
        if level.seq(item) != l {
            return Err(BlockError::Inconsistent(format!(
                "member {l} received sequence number {}",
                level.seq(item)
            )));
        }
        chain.push(item);
    }
    Ok(LocalContext {
        origin: origin.clone(),
        index,
        chain,
    })
}

fn push_image(
    text: &mut Word,
    parent: &mut Vec<usize>,
    image: &mut Vec<Option<Occurrence>>,
    from: usize,
    letters: &[LetterId],
) {
    let start = text.len();
    text.extend_from_slice(letters);
    parent.resize(text.len(), from);
    image.resize(text.len(), None);
    image[from] = Some(Occurrence::new(start, letters.len()));
}
