//! Alphabets, words, morphisms and codings, the text format for systems,
//! and prefix generation for fixed points with provenance tracking.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Dense letter index into a system's alphabet.
pub type LetterId = usize;

/// Finite word as a sequence of letter ids.
pub type Word = Vec<LetterId>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid system: {0}")]
    Validation(String),
    #[error("fixed point stopped growing at length {0}")]
    Divergence(usize),
}

/// An occurrence `start..=end` inside some word. Empty occurrences keep a
/// start position so that `end() == start - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Occurrence {
    pub start: usize,
    pub len: usize,
}

impl Occurrence {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    /// Occurrence covering `start..end_excl`.
    pub fn span(start: usize, end_excl: usize) -> Self {
        debug_assert!(end_excl >= start);
        Self {
            start,
            len: end_excl - start,
        }
    }

    pub fn empty_at(start: usize) -> Self {
        Self { start, len: 0 }
    }

    /// Inclusive end; `start - 1` for the empty occurrence.
    pub fn end(&self) -> isize {
        self.start as isize + self.len as isize - 1
    }

    pub fn end_excl(&self) -> usize {
        self.start + self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end_excl()
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.range().contains(&pos)
    }
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.start, self.end())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphicSystem {
    names: Vec<String>,
    phi: Vec<Word>,
    psi: Vec<LetterId>,
    axiom: LetterId,
}

impl MorphicSystem {
    /// Builds a system from raw tables, checking every structural invariant.
    pub fn new(
        names: Vec<String>,
        phi: Vec<Word>,
        psi: Vec<LetterId>,
        axiom: LetterId,
    ) -> Result<Self, SystemError> {
        let size = names.len();
        if size == 0 {
            return Err(SystemError::Validation("alphabet is empty".into()));
        }
        let mut seen = HashMap::new();
        for (id, name) in names.iter().enumerate() {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(SystemError::Validation(format!(
                    "letter name {name:?} is not a single token"
                )));
            }
            if seen.insert(name.as_str(), id).is_some() {
                return Err(SystemError::Validation(format!(
                    "duplicate letter name {name}"
                )));
            }
        }
        if phi.len() != size || psi.len() != size {
            return Err(SystemError::Validation(
                "morphism and coding tables must cover the alphabet".into(),
            ));
        }
        for (id, image) in phi.iter().enumerate() {
            if image.is_empty() {
                return Err(SystemError::Validation(format!(
                    "nonerasing: image of {} is empty",
                    names[id]
                )));
            }
            if image.iter().any(|&c| c >= size) {
                return Err(SystemError::Validation(format!(
                    "image of {} uses an unknown letter",
                    names[id]
                )));
            }
        }
        if psi.iter().any(|&c| c >= size) {
            return Err(SystemError::Validation(
                "coding uses an unknown letter".into(),
            ));
        }
        if axiom >= size {
            return Err(SystemError::Validation("unknown axiom".into()));
        }
        let axiom_image = &phi[axiom];
        if axiom_image[0] != axiom || axiom_image.len() < 2 {
            return Err(SystemError::Validation(format!(
                "image of the axiom {} must start with it and have length at least 2",
                names[axiom]
            )));
        }
        Ok(Self {
            names,
            phi,
            psi,
            axiom,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, letter: LetterId) -> &str {
        &self.names[letter]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn letter(&self, name: &str) -> Option<LetterId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn image(&self, letter: LetterId) -> &[LetterId] {
        &self.phi[letter]
    }

    pub fn code(&self, letter: LetterId) -> LetterId {
        self.psi[letter]
    }

    pub fn axiom(&self) -> LetterId {
        self.axiom
    }

    /// `|φ| = max_b |φ(b)|`.
    pub fn max_image_len(&self) -> usize {
        self.phi.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn apply_morphism(&self, word: &[LetterId]) -> Word {
        word.iter()
            .flat_map(|&c| self.phi[c].iter().copied())
            .collect()
    }

    pub fn apply_coding(&self, word: &[LetterId]) -> Word {
        word.iter().map(|&c| self.psi[c]).collect()
    }

    /// Applies the morphism `n` times to `word`.
    pub fn iterate(&self, word: &[LetterId], n: usize) -> Word {
        let mut current = word.to_vec();
        for _ in 0..n {
            current = self.apply_morphism(&current);
        }
        current
    }

    /// The system with `φ` replaced by `φ^n`.
    pub fn morphism_power(&self, n: usize) -> Self {
        assert!(n >= 1, "morphism power must be at least 1");
        let phi = (0..self.alphabet_size())
            .map(|b| self.iterate(&[b], n))
            .collect();
        Self {
            names: self.names.clone(),
            phi,
            psi: self.psi.clone(),
            axiom: self.axiom,
        }
    }

    /// Returns a copy extended by one letter with the given image and coding.
    pub fn with_letter(
        &self,
        name: String,
        image: Word,
        code: Option<LetterId>,
    ) -> Result<Self, SystemError> {
        let mut names = self.names.clone();
        let id = names.len();
        names.push(name);
        let mut phi = self.phi.clone();
        phi.push(image);
        let mut psi = self.psi.clone();
        psi.push(code.unwrap_or(id));
        Self::new(names, phi, psi, self.axiom)
    }

    /// Letters concatenated when every name is one character, space separated otherwise.
    pub fn render(&self, word: &[LetterId]) -> String {
        let compact = self.names.iter().all(|n| n.chars().count() == 1);
        let parts: Vec<&str> = word.iter().map(|&c| self.names[c].as_str()).collect();
        if compact {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    /// Parses a word written with single-character names (or space separated names).
    pub fn parse_word(&self, text: &str) -> Option<Word> {
        if text.contains(char::is_whitespace) {
            text.split_whitespace().map(|t| self.letter(t)).collect()
        } else {
            let mut out = Vec::new();
            let mut buf = [0u8; 4];
            for ch in text.chars() {
                out.push(self.letter(ch.encode_utf8(&mut buf))?);
            }
            Some(out)
        }
    }

    /// Serializes the system back into the text format accepted by `FromStr`.
    pub fn to_spec_text(&self) -> String {
        let mut out = String::new();
        out.push_str("alphabet: ");
        out.push_str(&self.names.join(" "));
        out.push('\n');
        out.push_str(&format!("axiom: {}\n", self.names[self.axiom]));
        out.push_str("morphism:\n");
        for (b, image) in self.phi.iter().enumerate() {
            let rhs: Vec<&str> = image.iter().map(|&c| self.names[c].as_str()).collect();
            out.push_str(&format!("  {} -> {}\n", self.names[b], rhs.join(" ")));
        }
        out.push_str("coding:\n");
        for (b, &c) in self.psi.iter().enumerate() {
            out.push_str(&format!("  {} -> {}\n", self.names[b], self.names[c]));
        }
        out
    }

    /// Generates a prefix of the fixed point `φ^∞(a)` of length at least `min_len`.
    ///
    /// The prefix is rewritten in place: the image of position `q` is appended once
    /// every earlier image is present, so `parent` and `image_span` fall out directly.
    pub fn generate_prefix(&self, min_len: usize) -> Result<ProvenancePrefix, SystemError> {
        let first = self.image(self.axiom);
        let mut text: Word = first.to_vec();
        let mut parent = vec![0usize; first.len()];
        let mut bounds = vec![0usize, first.len()];
        let mut next = 1;
        while text.len() < min_len.max(1) {
            if next >= text.len() {
                return Err(SystemError::Divergence(text.len()));
            }
            let letter = text[next];
            text.extend_from_slice(&self.phi[letter]);
            parent.resize(text.len(), next);
            bounds.push(text.len());
            next += 1;
        }
        let image = bounds
            .windows(2)
            .map(|w| Some(Occurrence::span(w[0], w[1])))
            .chain(std::iter::repeat(None))
            .take(text.len())
            .collect();
        Ok(ProvenancePrefix {
            text,
            parent,
            image,
        })
    }
}

impl FromStr for MorphicSystem {
    type Err = SystemError;

    fn from_str(source: &str) -> Result<Self, Self::Err> {
        parse_system(source)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Morphism,
    Coding,
}

/// Parses the line-oriented system format (`alphabet:`, `axiom:`, `morphism:`, `coding:`).
pub fn parse_system(source: &str) -> Result<MorphicSystem, SystemError> {
    let err = |line: usize, column: usize, message: &str| SystemError::Parse {
        line,
        column,
        message: message.to_string(),
    };
    let mut names: Option<Vec<String>> = None;
    let mut axiom: Option<(String, usize)> = None;
    let mut rules: Vec<(String, Vec<String>, usize)> = Vec::new();
    let mut codes: Vec<(String, String, usize)> = Vec::new();
    let mut section = Section::Header;

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let column = indent + 1;
        let body = line.trim();
        if let Some(rest) = body.strip_prefix("alphabet:") {
            if names.is_some() {
                return Err(err(line_no, column, "duplicate alphabet line"));
            }
            names = Some(rest.split_whitespace().map(str::to_string).collect());
            section = Section::Header;
        } else if let Some(rest) = body.strip_prefix("axiom:") {
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens.len() != 1 {
                return Err(err(line_no, column, "axiom must be a single letter"));
            }
            axiom = Some((tokens[0].to_string(), line_no));
            section = Section::Header;
        } else if body == "morphism:" {
            section = Section::Morphism;
        } else if body == "coding:" {
            section = Section::Coding;
        } else {
            let Some((lhs, rhs)) = body.split_once("->") else {
                return Err(err(line_no, column, "expected `<letter> -> ...`"));
            };
            let lhs = lhs.trim();
            if lhs.is_empty() || lhs.contains(char::is_whitespace) {
                return Err(err(line_no, column, "left-hand side must be one letter"));
            }
            let rhs: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
            match section {
                Section::Morphism => rules.push((lhs.to_string(), rhs, line_no)),
                Section::Coding => {
                    if rhs.len() != 1 {
                        let col = column + body.find("->").unwrap_or(0) + 2;
                        return Err(err(line_no, col, "coding image must be one letter"));
                    }
                    codes.push((lhs.to_string(), rhs[0].clone(), line_no));
                }
                Section::Header => {
                    return Err(err(line_no, column, "rule outside a morphism or coding section"));
                }
            }
        }
    }

    let names = names.ok_or_else(|| err(1, 1, "missing alphabet line"))?;
    let index: HashMap<&str, LetterId> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    if index.len() != names.len() {
        return Err(SystemError::Validation("duplicate letter in alphabet".into()));
    }
    let lookup = |name: &str, line: usize| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| SystemError::Validation(format!("line {line}: unknown letter {name}")))
    };

    let (axiom_name, axiom_line) = axiom.ok_or_else(|| err(1, 1, "missing axiom line"))?;
    let axiom = lookup(&axiom_name, axiom_line)?;

    let mut phi: Vec<Option<Word>> = vec![None; names.len()];
    for (lhs, rhs, line) in rules {
        let b = lookup(&lhs, line)?;
        if phi[b].is_some() {
            return Err(SystemError::Validation(format!(
                "line {line}: second morphism rule for {lhs}"
            )));
        }
        if rhs.is_empty() {
            return Err(SystemError::Validation(format!(
                "nonerasing: line {line}: image of {lhs} is empty"
            )));
        }
        let image = rhs
            .iter()
            .map(|t| lookup(t, line))
            .collect::<Result<Word, _>>()?;
        phi[b] = Some(image);
    }
    let mut psi: Vec<Option<LetterId>> = vec![None; names.len()];
    for (lhs, rhs, line) in codes {
        let b = lookup(&lhs, line)?;
        if psi[b].is_some() {
            return Err(SystemError::Validation(format!(
                "line {line}: second coding rule for {lhs}"
            )));
        }
        psi[b] = Some(lookup(&rhs, line)?);
    }
    let phi = phi
        .into_iter()
        .enumerate()
        .map(|(b, img)| {
            img.ok_or_else(|| {
                SystemError::Validation(format!("missing morphism rule for {}", names[b]))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let psi = psi
        .into_iter()
        .enumerate()
        .map(|(b, c)| {
            c.ok_or_else(|| SystemError::Validation(format!("missing coding entry for {}", names[b])))
        })
        .collect::<Result<Vec<_>, _>>()?;
    MorphicSystem::new(names, phi, psi, axiom)
}

/// A prefix of a fixed point (or a local window modelled on one) together
/// with the factorization `text = φ(text_0) φ(text_1) ...`.
///
/// `parent[p]` is the position whose image contains `p`. `image[q]` is the
/// occurrence of `φ(text_q)` when it lies inside the text; local windows may
/// store a clipped part of an image, see `block_engine`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenancePrefix {
    pub text: Word,
    pub parent: Vec<usize>,
    pub image: Vec<Option<Occurrence>>,
}

impl ProvenancePrefix {
    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn parent(&self, pos: usize) -> usize {
        self.parent[pos]
    }

    pub fn image_span(&self, pos: usize) -> Option<Occurrence> {
        self.image.get(pos).copied().flatten()
    }

    /// Number of leading positions whose images are stored.
    pub fn processed(&self) -> usize {
        self.image.iter().take_while(|s| s.is_some()).count()
    }

    pub fn slice(&self, occ: Occurrence) -> &[LetterId] {
        &self.text[occ.range()]
    }
}
