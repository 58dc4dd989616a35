//! Non-adaptive testers as weighted lists of query checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{self, VecSpace};
use crate::code::{check_word, Alphabet, Code, Symbol, Word};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest tuple space an accept set may index (`|Σ|^q <= 2^24`).
pub const MAX_TUPLE_SPACE: u64 = 1 << 24;

/// Accepted tuples of a check, as a bitset over `Σ^q`. Tuple
/// `(x_0, ..., x_{q-1})` has index `Σ x_l |Σ|^l`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AcceptSet {
    bits: Vec<u64>,
    len: u32,
}

impl AcceptSet {
    pub fn empty(len: u32) -> Self {
        AcceptSet { bits: vec![0; (len as usize).div_ceil(64)], len }
    }

    pub fn full(len: u32) -> Self {
        let mut s = AcceptSet::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn from_fn(len: u32, mut pred: impl FnMut(u32) -> bool) -> Self {
        let mut s = AcceptSet::empty(len);
        for i in 0..len {
            if pred(i) {
                s.insert(i);
            }
        }
        s
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    #[inline]
    pub fn contains(&self, idx: u32) -> bool {
        (self.bits[(idx >> 6) as usize] >> (idx & 63)) & 1 == 1
    }

    pub fn insert(&mut self, idx: u32) {
        self.bits[(idx >> 6) as usize] |= 1 << (idx & 63);
    }

    pub fn count(&self) -> u32 {
        self.bits.iter().map(|b| b.count_ones()).sum()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }
}

impl std::fmt::Debug for AcceptSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub fn tuple_index(alphabet_size: u32, tuple: &[Symbol]) -> u32 {
    tuple.iter().rev().fold(0u32, |acc, &x| acc * alphabet_size + x)
}

pub fn tuple_from_index(alphabet_size: u32, arity: usize, mut idx: u32) -> Vec<Symbol> {
    (0..arity)
        .map(|_| {
            let x = idx % alphabet_size;
            idx /= alphabet_size;
            x
        })
        .collect()
}

pub(crate) fn tuple_space(alphabet_size: u32, arity: usize) -> Result<u32> {
    match (alphabet_size as u64).checked_pow(arity as u32) {
        Some(s) if s <= MAX_TUPLE_SPACE => Ok(s as u32),
        _ => Err(Error::Capacity {
            required: (alphabet_size as u128).saturating_pow(arity as u32),
            budget: MAX_TUPLE_SPACE,
        }),
    }
}

/// Accepted tuples listed explicitly, in index order.
pub fn accept_tuples(set: &AcceptSet, alphabet_size: u32, arity: usize) -> Vec<Vec<Symbol>> {
    set.iter().map(|i| tuple_from_index(alphabet_size, arity, i)).collect()
}

pub fn accept_from_tuples(alphabet_size: u32, arity: usize, tuples: &[Vec<Symbol>]) -> Result<AcceptSet> {
    let mut set = AcceptSet::empty(tuple_space(alphabet_size, arity)?);
    for t in tuples {
        if t.len() != arity || t.iter().any(|&x| x >= alphabet_size) {
            return Err(Error::Mismatch(format!("accepted tuple {t:?} does not fit arity {arity}")));
        }
        set.insert(tuple_index(alphabet_size, t));
    }
    Ok(set)
}

/// Classes of the contextual equivalence at coordinate `l`: `a` and `b` are
/// equivalent when swapping them at `l` never changes acceptance. Returns a
/// class id per symbol, ids numbered by first occurrence.
pub fn contextual_classes(set: &AcceptSet, alphabet_size: u32, arity: usize, l: usize) -> Vec<usize> {
    assert!(l < arity, "coordinate {l} outside arity {arity}");
    let s = alphabet_size;
    let low = s.pow(l as u32);
    let contexts = set.len() / s;
    let mut ids: HashMap<Vec<bool>, usize> = HashMap::new();
    (0..s)
        .map(|a| {
            let signature: Vec<bool> = (0..contexts)
                .map(|r| set.contains(r % low + a * low + (r / low) * low * s))
                .collect();
            let next = ids.len();
            *ids.entry(signature).or_insert(next)
        })
        .collect()
}

/// One check: read `queries`, accept iff the read tuple is in `accept`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub queries: Vec<usize>,
    pub accept: AcceptSet,
    pub weight: Rational,
}

impl Check {
    pub fn arity(&self) -> usize {
        self.queries.len()
    }

    #[inline]
    pub fn accepts_word(&self, alphabet_size: u32, letters: &[Symbol]) -> bool {
        let mut idx = 0u32;
        for &pos in self.queries.iter().rev() {
            idx = idx * alphabet_size + letters[pos];
        }
        self.accept.contains(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TesterRepr", into = "TesterRepr")]
pub struct Tester {
    pub alphabet: Alphabet,
    pub n: usize,
    pub q: usize,
    pub checks: Vec<Check>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TesterRepr {
    alphabet: Alphabet,
    n: usize,
    q: usize,
    checks: Vec<CheckRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckRepr {
    queries: Vec<usize>,
    accept: Vec<Vec<Symbol>>,
    weight: Rational,
}

impl TryFrom<TesterRepr> for Tester {
    type Error = Error;
    fn try_from(r: TesterRepr) -> Result<Self> {
        let s = r.alphabet.size();
        let checks = r
            .checks
            .into_iter()
            .map(|c| {
                Ok(Check { accept: accept_from_tuples(s, c.queries.len(), &c.accept)?, queries: c.queries, weight: c.weight })
            })
            .collect::<Result<_>>()?;
        Tester::new(r.alphabet, r.n, r.q, checks)
    }
}

impl From<Tester> for TesterRepr {
    fn from(t: Tester) -> Self {
        let s = t.alphabet.size();
        TesterRepr {
            alphabet: t.alphabet,
            n: t.n,
            q: t.q,
            checks: t
                .checks
                .into_iter()
                .map(|c| CheckRepr { accept: accept_tuples(&c.accept, s, c.arity()), queries: c.queries, weight: c.weight })
                .collect(),
        }
    }
}

impl Tester {
    /// Validates shapes; weights are checked to be positive but their sum is
    /// reported by [`validate`] rather than rejected here.
    pub fn new(alphabet: Alphabet, n: usize, q: usize, checks: Vec<Check>) -> Result<Self> {
        let s = alphabet.size();
        if checks.is_empty() {
            return Err(Error::InvalidParameter("tester has no checks".into()));
        }
        for (i, c) in checks.iter().enumerate() {
            if c.arity() == 0 || c.arity() > q {
                return Err(Error::Mismatch(format!("check {i} has arity {}, max {q}", c.arity())));
            }
            if let Some(&pos) = c.queries.iter().find(|&&p| p >= n) {
                return Err(Error::Mismatch(format!("check {i} queries position {pos} >= {n}")));
            }
            if c.accept.len() != tuple_space(s, c.arity())? {
                return Err(Error::Mismatch(format!("check {i} accept set has wrong size")));
            }
            if !c.weight.is_positive() {
                return Err(Error::InvalidParameter(format!("check {i} has non-positive weight")));
            }
        }
        Ok(Tester { alphabet, n, q, checks })
    }

    pub fn weight_sum(&self) -> Rational {
        self.checks.iter().map(|c| c.weight.clone()).sum()
    }

    /// Words accepted by every check with probability one.
    pub fn accepts_always(&self, w: &Word) -> bool {
        let s = self.alphabet.size();
        self.checks.iter().all(|c| c.accepts_word(s, &w.0))
    }
}

/// Uniform tester checking `w_i = w_{i+1}` for consecutive positions; the
/// natural tester of a repetition code.
pub fn equality_tester(alphabet: Alphabet, n: usize) -> Result<Tester> {
    if n < 2 {
        return Err(Error::InvalidParameter("equality tester needs n >= 2".into()));
    }
    let s = alphabet.size();
    let accept = AcceptSet::from_fn(tuple_space(s, 2)?, |i| i % s == i / s);
    let weight = Rational::new(1, (n - 1) as i64);
    let checks = (0..n - 1)
        .map(|i| Check { queries: vec![i, i + 1], accept: accept.clone(), weight: weight.clone() })
        .collect();
    Tester::new(alphabet, n, 2, checks)
}

/// Exact probability that `tester` rejects `w`.
pub fn reject_probability(tester: &Tester, w: &Word) -> Result<Rational> {
    check_word(tester.alphabet, tester.n, w)?;
    let s = tester.alphabet.size();
    Ok(tester.checks.iter().filter(|c| !c.accepts_word(s, &w.0)).map(|c| c.weight.clone()).sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: usize,
    pub codeword: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub weight_sum: Rational,
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.weight_sum == Rational::one() && self.violations.is_empty()
    }
}

/// Confirms the weights form a distribution and every codeword is accepted.
pub fn validate(tester: &Tester, code: &Code) -> Result<Validation> {
    if tester.alphabet != code.alphabet || tester.n != code.n {
        return Err(Error::Mismatch("tester and code shapes differ".into()));
    }
    let s = tester.alphabet.size();
    let mut violations = Vec::new();
    for (i, c) in tester.checks.iter().enumerate() {
        for cw in code.codewords() {
            if !c.accepts_word(s, &cw.0) {
                violations.push(Violation { check: i, codeword: cw.clone() });
            }
        }
    }
    Ok(Validation { weight_sum: tester.weight_sum(), violations })
}

/// Linearity class of a tester over a vector alphabet. Bases span the accept
/// subspace of each check inside `Σ^q`, flattened position-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum Linearity {
    Nonlinear { check: usize },
    Linear { bases: Vec<Vec<Vec<u32>>> },
    /// Every accept subspace is the kernel of the listed functional.
    Elementary { bases: Vec<Vec<Vec<u32>>>, functionals: Vec<Vec<u32>> },
}

impl Linearity {
    pub fn is_linear(&self) -> bool {
        !matches!(self, Linearity::Nonlinear { .. })
    }

    pub fn is_elementary(&self) -> bool {
        matches!(self, Linearity::Elementary { .. })
    }

    pub fn bases(&self) -> Option<&[Vec<Vec<u32>>]> {
        match self {
            Linearity::Nonlinear { .. } => None,
            Linearity::Linear { bases } | Linearity::Elementary { bases, .. } => Some(bases),
        }
    }
}

/// The tuple space `Σ^arity` as a vector space over the base field.
pub fn tuple_vec_space(space: VecSpace, arity: usize) -> VecSpace {
    VecSpace { field: space.field, dim: space.dim * arity }
}

pub fn accept_subspace(space: VecSpace, check: &Check) -> Option<Vec<Vec<u32>>> {
    let tuples = tuple_vec_space(space, check.arity());
    let members: Vec<u64> = check.accept.iter().map(u64::from).collect();
    algebra::subspace_basis(tuples, &members)
}

pub fn classify_linear(tester: &Tester) -> Result<Linearity> {
    let space = tester.alphabet.require_space()?;
    let mut bases = Vec::with_capacity(tester.checks.len());
    for (i, c) in tester.checks.iter().enumerate() {
        match accept_subspace(space, c) {
            Some(b) => bases.push(b),
            None => return Ok(Linearity::Nonlinear { check: i }),
        }
    }
    let elementary = tester
        .checks
        .iter()
        .zip(&bases)
        .all(|(c, b)| b.len() + 1 == space.dim * c.arity());
    if !elementary {
        return Ok(Linearity::Linear { bases });
    }
    let functionals = tester
        .checks
        .iter()
        .zip(&bases)
        .map(|(c, b)| {
            let ann = algebra::nullspace(space.field, b, space.dim * c.arity());
            debug_assert_eq!(ann.len(), 1);
            ann.into_iter().next().unwrap()
        })
        .collect();
    Ok(Linearity::Elementary { bases, functionals })
}
