//! Words, codes and their Hamming metrics.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{self, VecSpace};
use crate::error::{Error, Result};
use crate::rate::Rate;
use crate::rational::Rational;

pub type Symbol = u32;

/// A finite alphabet with at least two letters. Letters are `0..size`; for a
/// vector alphabet letter `i` is vector number `i` of the canonical
/// enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AlphabetRepr", into = "AlphabetRepr")]
pub enum Alphabet {
    Plain(u32),
    Vector(VecSpace),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum AlphabetRepr {
    Plain { size: u32 },
    Vector { p: u32, dim: usize },
}

impl TryFrom<AlphabetRepr> for Alphabet {
    type Error = Error;
    fn try_from(r: AlphabetRepr) -> Result<Self> {
        match r {
            AlphabetRepr::Plain { size } => Alphabet::plain(size),
            AlphabetRepr::Vector { p, dim } => Alphabet::vector(VecSpace::new(p, dim)?),
        }
    }
}

impl From<Alphabet> for AlphabetRepr {
    fn from(a: Alphabet) -> Self {
        match a {
            Alphabet::Plain(size) => AlphabetRepr::Plain { size },
            Alphabet::Vector(s) => AlphabetRepr::Vector { p: s.p(), dim: s.dim },
        }
    }
}

impl Alphabet {
    pub fn plain(size: u32) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidParameter(format!("alphabet needs at least two letters, got {size}")));
        }
        Ok(Alphabet::Plain(size))
    }

    pub fn vector(space: VecSpace) -> Result<Self> {
        match space.size() {
            Some(s) if s >= 2 && s <= u32::MAX as u64 => Ok(Alphabet::Vector(space)),
            _ => Err(Error::InvalidParameter(format!("GF({})^{} is not a usable alphabet", space.p(), space.dim))),
        }
    }

    pub fn size(&self) -> u32 {
        match self {
            Alphabet::Plain(s) => *s,
            Alphabet::Vector(v) => v.size().unwrap() as u32,
        }
    }

    pub fn space(&self) -> Option<VecSpace> {
        match self {
            Alphabet::Vector(v) => Some(*v),
            Alphabet::Plain(_) => None,
        }
    }

    pub fn require_space(&self) -> Result<VecSpace> {
        self.space().ok_or(Error::NotVectorAlphabet)
    }

    pub fn to_vector(&self, symbol: Symbol) -> Result<Vec<u32>> {
        Ok(self.require_space()?.coords(symbol as u64))
    }

    pub fn from_vector(&self, v: &[u32]) -> Result<Symbol> {
        Ok(self.require_space()?.index(v) as Symbol)
    }
}

/// A word over some alphabet; the alphabet is carried by the enclosing code
/// or tester.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

/// A code: a nonempty set of distinct words of a common length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodeRepr", into = "CodeRepr")]
pub struct Code {
    pub alphabet: Alphabet,
    pub n: usize,
    codewords: Vec<Word>,
    /// Generator rows, present when the alphabet is a vector space and the
    /// codeword set was verified to be a subspace.
    linear: Option<Vec<Word>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeRepr {
    alphabet: Alphabet,
    n: usize,
    codewords: Vec<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear: Option<GeneratorRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRepr {
    gen: Vec<Word>,
}

impl TryFrom<CodeRepr> for Code {
    type Error = Error;
    fn try_from(r: CodeRepr) -> Result<Self> {
        let mut code = Code::new(r.alphabet, r.n, r.codewords)?;
        if let Some(g) = r.linear {
            let basis = is_linear_code(&code)?
                .ok_or_else(|| Error::Schema("code tagged linear is not a subspace".into()))?;
            if g.gen.len() != basis.len() || !g.gen.iter().all(|w| code.contains(w)) {
                return Err(Error::Schema("generator rows do not span the code".into()));
            }
            let space = code.alphabet.require_space()?;
            let vectors: Vec<Vec<u32>> = g.gen.iter().map(|w| word_vector(space, w)).collect();
            if algebra::rank(space.field, &vectors) != basis.len() {
                return Err(Error::Schema("generator rows are dependent".into()));
            }
            code.linear = Some(g.gen);
        }
        Ok(code)
    }
}

impl From<Code> for CodeRepr {
    fn from(c: Code) -> Self {
        CodeRepr {
            alphabet: c.alphabet,
            n: c.n,
            codewords: c.codewords,
            linear: c.linear.map(|gen| GeneratorRepr { gen }),
        }
    }
}

impl Code {
    pub fn new(alphabet: Alphabet, n: usize, codewords: Vec<Word>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::InvalidParameter("a code needs at least one codeword".into()));
        }
        let size = alphabet.size();
        let mut seen = HashSet::with_capacity(codewords.len());
        for w in &codewords {
            if w.len() != n {
                return Err(Error::Mismatch(format!("codeword {w:?} has length {}, expected {n}", w.len())));
            }
            if let Some(s) = w.0.iter().find(|&&s| s >= size) {
                return Err(Error::Mismatch(format!("letter {s} outside alphabet of size {size}")));
            }
            if !seen.insert(w) {
                return Err(Error::InvalidParameter(format!("duplicate codeword {w:?}")));
            }
        }
        Ok(Code { alphabet, n, codewords, linear: None })
    }

    /// Builds a code and attaches a generator basis after verifying the
    /// codeword set is a subspace.
    pub fn new_linear(alphabet: Alphabet, n: usize, codewords: Vec<Word>) -> Result<Self> {
        let mut code = Code::new(alphabet, n, codewords)?;
        match is_linear_code(&code)? {
            Some(basis) => {
                code.linear = Some(basis);
                Ok(code)
            }
            None => Err(Error::InvalidParameter("codeword set is not a subspace".into())),
        }
    }

    /// Builds a code from possibly repeated words, keeping first occurrences.
    pub fn from_words_dedup(alphabet: Alphabet, n: usize, words: impl IntoIterator<Item = Word>) -> Result<Self> {
        let mut seen = HashSet::new();
        let unique: Vec<Word> = words.into_iter().filter(|w| seen.insert(w.clone())).collect();
        Code::new(alphabet, n, unique)
    }

    pub fn codewords(&self) -> &[Word] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn generator(&self) -> Option<&[Word]> {
        self.linear.as_deref()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.codewords.contains(w)
    }

    pub fn word_set(&self) -> HashSet<&Word> {
        self.codewords.iter().collect()
    }

    /// True when the code is all of `Σ^n`.
    pub fn is_full(&self) -> bool {
        crate::error::checked_pow(self.alphabet.size() as u64, self.n as u64) == Some(self.len() as u128)
    }

    pub(crate) fn check_word(&self, w: &Word) -> Result<()> {
        check_word(self.alphabet, self.n, w)
    }
}

pub(crate) fn check_word(alphabet: Alphabet, n: usize, w: &Word) -> Result<()> {
    if w.len() != n {
        return Err(Error::Mismatch(format!("word length {} vs block length {n}", w.len())));
    }
    let size = alphabet.size();
    if let Some(s) = w.0.iter().find(|&&s| s >= size) {
        return Err(Error::Mismatch(format!("letter {s} outside alphabet of size {size}")));
    }
    Ok(())
}

pub(crate) fn differing_positions(u: &[Symbol], v: &[Symbol]) -> usize {
    u.iter().zip(v).filter(|(a, b)| a != b).count()
}

/// Normalized Hamming distance.
pub fn hamming_dist(u: &Word, v: &Word) -> Result<Rational> {
    if u.len() != v.len() {
        return Err(Error::Mismatch(format!("lengths {} and {}", u.len(), v.len())));
    }
    if u.is_empty() {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(differing_positions(&u.0, &v.0) as i64, u.len() as i64))
}

/// Minimum number of differing positions between `w` and a codeword.
pub(crate) fn min_differences(w: &[Symbol], code: &Code) -> usize {
    code.codewords.iter().map(|c| differing_positions(w, &c.0)).min().unwrap()
}

pub fn dist_to_code(w: &Word, code: &Code) -> Result<Rational> {
    code.check_word(w)?;
    Ok(Rational::new(min_differences(&w.0, code) as i64, code.n.max(1) as i64))
}

/// Relative distance; a single-codeword code has distance 1 by convention.
pub fn distance(code: &Code) -> Rational {
    let words = &code.codewords;
    let mut best: Option<usize> = None;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = differing_positions(&words[i].0, &words[j].0);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    match best {
        Some(d) => Rational::new(d as i64, code.n as i64),
        None => Rational::one(),
    }
}

pub fn rate(code: &Code) -> Rate {
    Rate::of_code(code.len() as u64, code.n, code.alphabet.size() as u64)
}

/// Flattens a word over `GF(p)^d` into a vector of `GF(p)^{n d}`
/// (position-major).
pub(crate) fn word_vector(space: VecSpace, w: &Word) -> Vec<u32> {
    w.0.iter().flat_map(|&s| space.coords(s as u64)).collect()
}

pub(crate) fn vector_word(space: VecSpace, v: &[u32]) -> Word {
    Word(v.chunks(space.dim.max(1)).map(|c| space.index(c) as Symbol).collect())
}

/// Returns a generator basis when the codeword set is a subspace of `Σ^n`.
pub fn is_linear_code(code: &Code) -> Result<Option<Vec<Word>>> {
    let space = code.alphabet.require_space()?;
    let vectors: Vec<Vec<u32>> = code.codewords.iter().map(|w| word_vector(space, w)).collect();
    let basis = algebra::subspace_basis_of_vectors(space.field, space.dim * code.n, &vectors);
    Ok(basis.map(|b| b.iter().map(|v| vector_word(space, v)).collect()))
}
