//! Letter graph, letter orders and periodicity classes, growth counts.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::word_model::{LetterId, MorphicSystem};

/// Order of a letter: `|φ^n(b)| = Θ(n^{k-1})` for `Finite(k)`, exponential for `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Order {
    Finite(usize),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<usize> {
        match self {
            Order::Finite(k) => Some(k),
            Order::Infinite => None,
        }
    }

    /// Strictly greater than the finite order `k`.
    pub fn exceeds(self, k: usize) -> bool {
        self > Order::Finite(k)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Periodicity {
    Periodic,
    Preperiodic,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LetterProfile {
    pub letter: LetterId,
    pub order: Order,
    pub periodicity: Periodicity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// The graph with one edge `b → c` per occurrence of `c` in `φ(b)`, and its condensation.
#[derive(Debug, Clone)]
pub struct LetterGraph {
    /// `multiplicity[b][c]` = number of occurrences of `c` in `φ(b)`.
    pub multiplicity: Vec<Vec<usize>>,
    pub scc_of: Vec<usize>,
    /// Components listed so that every successor precedes its predecessors.
    pub components: Vec<Vec<LetterId>>,
    pub condensation: Vec<BTreeSet<usize>>,
}

impl LetterGraph {
    pub fn vertex_count(&self) -> usize {
        self.multiplicity.len()
    }

    pub fn edge_count(&self) -> usize {
        self.multiplicity.iter().flatten().sum()
    }

    fn internal_out_degree(&self, b: LetterId) -> usize {
        let comp = self.scc_of[b];
        self.components[comp]
            .iter()
            .map(|&c| self.multiplicity[b][c])
            .sum()
    }
}

pub fn build_letter_graph(system: &MorphicSystem) -> LetterGraph {
    let n = system.alphabet_size();
    let mut multiplicity = vec![vec![0usize; n]; n];
    let mut graph = DiGraph::<LetterId, ()>::with_capacity(n, n);
    let nodes: Vec<NodeIndex> = (0..n).map(|b| graph.add_node(b)).collect();
    for b in 0..n {
        for &c in system.image(b) {
            multiplicity[b][c] += 1;
            graph.add_edge(nodes[b], nodes[c], ());
        }
    }
    // tarjan_scc yields components in reverse topological order.
    let components: Vec<Vec<LetterId>> = tarjan_scc(&graph)
        .into_iter()
        .map(|comp| {
            let mut letters: Vec<LetterId> = comp.into_iter().map(|v| graph[v]).collect();
            letters.sort_unstable();
            letters
        })
        .collect();
    let mut scc_of = vec![0usize; n];
    for (id, comp) in components.iter().enumerate() {
        for &b in comp {
            scc_of[b] = id;
        }
    }
    let mut condensation = vec![BTreeSet::new(); components.len()];
    for b in 0..n {
        for c in 0..n {
            if multiplicity[b][c] > 0 && scc_of[b] != scc_of[c] {
                condensation[scc_of[b]].insert(scc_of[c]);
            }
        }
    }
    LetterGraph {
        multiplicity,
        scc_of,
        components,
        condensation,
    }
}

/// Orders from the condensation: a component reaching a branching component
/// (some vertex with two edges back into its own component) is infinite; a
/// cycle adds one to the largest order below it; a transient vertex takes
/// the largest order below it.
pub fn assign_orders(graph: &LetterGraph) -> Vec<Order> {
    let mut comp_order = vec![Order::Finite(0); graph.components.len()];
    for (id, comp) in graph.components.iter().enumerate() {
        let below = graph.condensation[id]
            .iter()
            .map(|&s| comp_order[s])
            .max();
        let branching = comp.iter().any(|&b| graph.internal_out_degree(b) >= 2);
        let cyclic = comp.iter().any(|&b| graph.internal_out_degree(b) >= 1);
        comp_order[id] = if branching || below == Some(Order::Infinite) {
            Order::Infinite
        } else {
            let below = below.and_then(Order::finite).unwrap_or(0);
            if cyclic {
                Order::Finite(below + 1)
            } else {
                Order::Finite(below)
            }
        };
    }
    (0..graph.vertex_count())
        .map(|b| comp_order[graph.scc_of[b]])
        .collect()
}

/// Per-letter profiles: preperiodic letters form singleton components without a self edge.
pub fn classify_periodicity(graph: &LetterGraph, orders: &[Order]) -> LetterProfiles {
    let profiles = orders
        .iter()
        .enumerate()
        .map(|(b, &order)| {
            let periodicity = match order {
                Order::Infinite => Periodicity::NotApplicable,
                Order::Finite(_) => {
                    let comp = &graph.components[graph.scc_of[b]];
                    if comp.len() == 1 && graph.multiplicity[b][b] == 0 {
                        Periodicity::Preperiodic
                    } else {
                        Periodicity::Periodic
                    }
                }
            };
            LetterProfile {
                letter: b,
                order,
                periodicity,
            }
        })
        .collect();
    LetterProfiles { profiles }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetterProfiles {
    pub profiles: Vec<LetterProfile>,
}

impl LetterProfiles {
    pub fn of(system: &MorphicSystem) -> Self {
        let graph = build_letter_graph(system);
        let orders = assign_orders(&graph);
        classify_periodicity(&graph, &orders)
    }

    pub fn order(&self, b: LetterId) -> Order {
        self.profiles[b].order
    }

    pub fn periodicity(&self, b: LetterId) -> Periodicity {
        self.profiles[b].periodicity
    }

    pub fn is_periodic(&self, b: LetterId) -> bool {
        self.profiles[b].periodicity == Periodicity::Periodic
    }

    /// Order strictly greater than `k`.
    pub fn is_high(&self, b: LetterId, k: usize) -> bool {
        self.profiles[b].order.exceeds(k)
    }

    pub fn max_finite_order(&self) -> usize {
        self.profiles
            .iter()
            .filter_map(|p| p.order.finite())
            .max()
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// `|φ^n(b)|` through letter-count vectors.
pub fn growth_count(system: &MorphicSystem, letter: LetterId, n: usize) -> BigUint {
    let size = system.alphabet_size();
    let mut counts = vec![BigUint::zero(); size];
    counts[letter] = BigUint::one();
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); size];
        for (b, count) in counts.iter().enumerate() {
            if count.is_zero() {
                continue;
            }
            for &c in system.image(b) {
                next[c] += count;
            }
        }
        counts = next;
    }
    counts.into_iter().sum()
}

/// Position of `LL_k` (leftmost letter of order `> k`) or `RL_k` (rightmost) in `word`.
pub fn boundary_letter(
    word: &[LetterId],
    profiles: &LetterProfiles,
    k: usize,
    side: Side,
) -> Option<usize> {
    match side {
        Side::Left => word.iter().position(|&c| profiles.is_high(c, k)),
        Side::Right => word.iter().rposition(|&c| profiles.is_high(c, k)),
    }
}

/// Letters occurring in the fixed point, i.e. reachable from the axiom.
pub fn reachable_letters(system: &MorphicSystem) -> Vec<LetterId> {
    let mut seen = vec![false; system.alphabet_size()];
    let mut stack = vec![system.axiom()];
    seen[system.axiom()] = true;
    while let Some(b) = stack.pop() {
        for &c in system.image(b) {
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    (0..seen.len()).filter(|&b| seen[b]).collect()
}
