//! Residue sequences in run-length notation, e.g. `(BL)2B5N3`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bead type of the three-letter BLN alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResidueKind {
    /// Hydrophobic.
    B,
    /// Hydrophilic.
    L,
    /// Neutral.
    N,
}

impl ResidueKind {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'B' => Some(ResidueKind::B),
            'L' => Some(ResidueKind::L),
            'N' => Some(ResidueKind::N),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            ResidueKind::B => 'B',
            ResidueKind::L => 'L',
            ResidueKind::N => 'N',
        }
    }
}

/// The 46-residue sequence that folds into a beta barrel.
pub const BETA_BARREL_46: &str = "(BL)2B5N3(LB)4N3B9N3(LB)5L";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence(Vec<ResidueKind>);

impl Sequence {
    pub fn new(residues: Vec<ResidueKind>) -> Self {
        Self(residues)
    }

    pub fn beta_barrel() -> Self {
        parse_sequence(BETA_BARREL_46).expect("built-in sequence parses")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn residues(&self) -> &[ResidueKind] {
        &self.0
    }

    pub fn count(&self, kind: ResidueKind) -> usize {
        self.0.iter().filter(|&&k| k == kind).count()
    }

    /// Canonical run-length rendering: each maximal run of one kind as the
    /// letter followed by its length when longer than one.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut i = 0;
        while i < self.0.len() {
            let kind = self.0[i];
            let run = self.0[i..].iter().take_while(|&&k| k == kind).count();
            out.push(kind.as_char());
            if run > 1 {
                out.push_str(&run.to_string());
            }
            i += run;
        }
        out
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for Sequence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_sequence(s)
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn error(&self, position: usize, message: impl Into<String>) -> Error {
        Error::SequenceParse { position, message: message.into() }
    }

    fn peek(&self) -> Option<(usize, char)> {
        self.chars.get(self.pos).copied()
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.text.len(), |(o, _)| o)
    }

    /// Optional repeat count; defaults to 1, zero is an error.
    fn count(&mut self) -> Result<usize> {
        let start = self.offset();
        let mut digits = String::new();
        while let Some((_, c)) = self.peek().filter(|(_, c)| c.is_ascii_digit()) {
            digits.push(c);
            self.pos += 1;
        }
        if digits.is_empty() {
            return Ok(1);
        }
        let n: usize = digits.parse().map_err(|_| self.error(start, "repeat count too large"))?;
        if n == 0 {
            return Err(self.error(start, "repeat count must be positive"));
        }
        Ok(n)
    }

    fn group(&mut self, depth: usize) -> Result<Vec<ResidueKind>> {
        let mut out = Vec::new();
        while let Some((offset, c)) = self.peek() {
            match c {
                '(' => {
                    self.pos += 1;
                    let inner = self.group(depth + 1)?;
                    match self.peek() {
                        Some((_, ')')) => self.pos += 1,
                        _ => return Err(self.error(offset, "unbalanced '('")),
                    }
                    if inner.is_empty() {
                        return Err(self.error(offset, "empty group"));
                    }
                    let n = self.count()?;
                    for _ in 0..n {
                        out.extend_from_slice(&inner);
                    }
                }
                ')' => {
                    if depth == 0 {
                        return Err(self.error(offset, "unbalanced ')'"));
                    }
                    return Ok(out);
                }
                c if c.is_whitespace() => self.pos += 1,
                c => {
                    let kind = ResidueKind::from_char(c)
                        .ok_or_else(|| self.error(offset, format!("unexpected character {c:?}")))?;
                    self.pos += 1;
                    let n = self.count()?;
                    out.extend(std::iter::repeat_n(kind, n));
                }
            }
        }
        Ok(out)
    }
}

/// Expands run-length notation: atoms `B|L|N`, groups `( ... )`, each
/// optionally followed by a positive repeat count. Whitespace is ignored.
pub fn parse_sequence(text: &str) -> Result<Sequence> {
    let mut parser = Parser { chars: text.char_indices().collect(), pos: 0, text };
    let residues = parser.group(0)?;
    if residues.is_empty() {
        return Err(Error::SequenceParse { position: 0, message: "empty sequence".into() });
    }
    Ok(Sequence(residues))
}

/// Stiffness class of one backbone dihedral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TorsionClass {
    Rigid,
    Flexible,
}

/// How many neutral beads make a dihedral flexible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlexibleRule {
    /// Two or more of the four beads are neutral.
    #[default]
    TwoOrMore,
    /// Three or more of the four beads are neutral.
    MoreThanTwo,
}

/// Class of every dihedral; entry `t` covers beads `t..=t+3` (0-based), so a
/// chain of `n` beads has `n - 3` entries.
pub fn torsion_classes(seq: &Sequence, rule: FlexibleRule) -> Vec<TorsionClass> {
    let threshold = match rule {
        FlexibleRule::TwoOrMore => 2,
        FlexibleRule::MoreThanTwo => 3,
    };
    seq.residues()
        .windows(4)
        .map(|w| {
            let neutrals = w.iter().filter(|&&k| k == ResidueKind::N).count();
            if neutrals >= threshold {
                TorsionClass::Flexible
            } else {
                TorsionClass::Rigid
            }
        })
        .collect()
}
