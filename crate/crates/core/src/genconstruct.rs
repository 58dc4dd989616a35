//! Codes from function families, dependence testers, and the Hadamard and
//! long-code constructions built from them.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{enumerate_linear_maps, VecSpace};
use crate::code::{Alphabet, Code, Symbol, Word};
use crate::error::{Budget, Error, Result};
use crate::rate::Rate;
use crate::rational::Rational;
use crate::tester::{tuple_index, tuple_space, AcceptSet, Check, Tester};

/// `k` functions `S -> Δ` as value tables indexed by `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFamily {
    pub domain_size: u32,
    pub target: Alphabet,
    pub tables: Vec<Vec<Symbol>>,
}

impl FunctionFamily {
    pub fn new(domain_size: u32, target: Alphabet, tables: Vec<Vec<Symbol>>) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::InvalidParameter("empty function domain".into()));
        }
        for (j, t) in tables.iter().enumerate() {
            if t.len() != domain_size as usize {
                return Err(Error::Mismatch(format!("table {j} has {} entries, expected {domain_size}", t.len())));
            }
            if let Some(v) = t.iter().find(|&&v| v >= target.size()) {
                return Err(Error::Mismatch(format!("table {j} value {v} outside target")));
            }
        }
        Ok(FunctionFamily { domain_size, target, tables })
    }

    pub fn k(&self) -> usize {
        self.tables.len()
    }

    /// `f(s) = (f_1(s), ..., f_k(s))`.
    pub fn encode(&self, s: Symbol) -> Word {
        Word(self.tables.iter().map(|t| t[s as usize]).collect())
    }

    /// First pair `s < s'` with `f(s) = f(s')`, if any.
    pub fn collision(&self) -> Option<(Symbol, Symbol)> {
        let images: Vec<Word> = (0..self.domain_size).map(|s| self.encode(s)).collect();
        for a in 0..images.len() {
            for b in a + 1..images.len() {
                if images[a] == images[b] {
                    return Some((a as Symbol, b as Symbol));
                }
            }
        }
        None
    }

    pub fn is_injective(&self) -> bool {
        self.collision().is_none()
    }

    /// `D({f_i})`: one codeword per distinct image, in `S` order.
    pub fn code(&self) -> Result<Code> {
        Code::from_words_dedup(self.target, self.k(), (0..self.domain_size).map(|s| self.encode(s)))
    }
}

/// The code `D({f_i})` together with whether `s -> f(s)` is injective.
pub fn code_from_family(family: &FunctionFamily) -> Result<(Code, bool)> {
    Ok((family.code()?, family.is_injective()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependentTuple {
    pub tuple: Vec<usize>,
    pub image: AcceptSet,
}

/// Ordered tuples in `[k]^q` (in lexicographic order) whose joint image is a
/// proper subset of `Δ^q`. With `distinct_sorted` only strictly increasing
/// tuples are listed.
pub fn dependent_tuples(
    family: &FunctionFamily,
    q: usize,
    distinct_sorted: bool,
    budget: Budget,
) -> Result<Vec<DependentTuple>> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be at least 1".into()));
    }
    let k = family.k();
    let total = budget.check_power(k as u64, q as u64)?;
    let delta = family.target.size();
    let len = tuple_space(delta, q)?;
    let found: Vec<Option<DependentTuple>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut tuple = vec![0usize; q];
            let mut rest = idx;
            for slot in tuple.iter_mut().rev() {
                *slot = (rest % k as u64) as usize;
                rest /= k as u64;
            }
            if distinct_sorted && tuple.windows(2).any(|w| w[0] >= w[1]) {
                return None;
            }
            let mut image = AcceptSet::empty(len);
            let mut letters = vec![0; q];
            for s in 0..family.domain_size as usize {
                for (l, &i) in tuple.iter().enumerate() {
                    letters[l] = family.tables[i][s];
                }
                image.insert(tuple_index(delta, &letters));
            }
            (!image.is_full()).then_some(DependentTuple { tuple, image })
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceTester {
    pub tester: Tester,
    /// No dependent tuple exists; `tester` accepts every word.
    pub degenerate: bool,
}

/// Uniform test over all dependent `q`-tuples that the read letters lie in the
/// joint image.
pub fn dependence_tester(family: &FunctionFamily, q: usize, budget: Budget) -> Result<DependenceTester> {
    let tuples = dependent_tuples(family, q, false, budget)?;
    let k = family.k();
    let alphabet = family.target;
    if tuples.is_empty() {
        let accept = AcceptSet::full(alphabet.size());
        let check = Check { queries: vec![0], accept, weight: Rational::one() };
        return Ok(DependenceTester { tester: Tester::new(alphabet, k, q, vec![check])?, degenerate: true });
    }
    let weight = Rational::new(1, tuples.len() as i64);
    let checks = tuples
        .into_iter()
        .map(|t| Check { queries: t.tuple, accept: t.image, weight: weight.clone() })
        .collect();
    Ok(DependenceTester { tester: Tester::new(alphabet, k, q, checks)?, degenerate: false })
}

/// `H(V, Δ)`: evaluations of every linear map `V -> Δ`, in canonical map order.
pub fn generalized_hadamard(v: VecSpace, delta: VecSpace, budget: Budget) -> Result<(FunctionFamily, Code)> {
    budget.check_power(v.p() as u64, v.dim as u64)?;
    let maps = enumerate_linear_maps(v, delta, budget)?;
    let target = Alphabet::vector(delta)?;
    let tables = maps.iter().map(|m| m.value_table()).collect();
    let family = FunctionFamily::new(v.size().unwrap() as u32, target, tables)?;
    let words = (0..family.domain_size).map(|s| family.encode(s)).collect();
    let code = Code::new_linear(target, family.k(), words)?;
    Ok((family, code))
}

/// The rate figure `dim V / |Δ|^{dim V}` quoted for generalized Hadamard
/// codes; the true rate carries an extra factor `1 / dim Δ`.
pub fn hadamard_quoted_rate(v: VecSpace, delta: VecSpace) -> Rational {
    let n = (delta.size().unwrap() as i64).pow(v.dim as u32);
    Rational::new(v.dim as i64, n)
}

pub fn hadamard_exact_rate(v: VecSpace, delta: VecSpace) -> Rate {
    let n = (delta.size().unwrap() as usize).pow(v.dim as u32);
    Rate::of_code(v.size().unwrap(), n, delta.size().unwrap())
}

/// `L(S, Δ)`: every function `S -> Δ`. Function `j` sends `s` to digit `s`
/// of `j` in base `|Δ|`.
pub fn generalized_long_code(s_size: u32, delta: Alphabet, budget: Budget) -> Result<(FunctionFamily, Code)> {
    let d = delta.size();
    let k = budget.check_power(d as u64, s_size as u64)?;
    let tables = (0..k)
        .map(|mut j| {
            (0..s_size)
                .map(|_| {
                    let v = (j % d as u64) as Symbol;
                    j /= d as u64;
                    v
                })
                .collect()
        })
        .collect();
    let family = FunctionFamily::new(s_size, delta, tables)?;
    let code = family.code()?;
    Ok((family, code))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingTester {
    pub family: FunctionFamily,
    pub code: Code,
    pub tester: Tester,
    /// Position `i` carries long-code function `permutation[i]`.
    pub permutation: Vec<usize>,
}

/// Ring constraints for `L(S, {0,1})`: `w_i + w_j = w_k` whenever
/// `f_i + f_j = f_k`, `w_i w_j = w_k` whenever `f_i f_j = f_k`, and
/// `w_0 = 1`, after moving the all-ones function to position 0.
pub fn long_code_ring_constraints(s_size: u32, budget: Budget) -> Result<RingTester> {
    let bin = Alphabet::plain(2)?;
    let (canonical, _) = generalized_long_code(s_size, bin, budget)?;
    let k = canonical.k();
    let mut permutation = vec![k - 1];
    permutation.extend(0..k - 1);
    let mut position = vec![0; k];
    for (i, &j) in permutation.iter().enumerate() {
        position[j] = i;
    }
    let tables = permutation.iter().map(|&j| canonical.tables[j].clone()).collect();
    let family = FunctionFamily::new(s_size, bin, tables)?;
    let code = family.code()?;
    // Canonical function j has table = binary digits of j, so sums and
    // products of functions are XOR and AND of indices.
    let xor = AcceptSet::from_fn(8, |t| (t & 1) ^ ((t >> 1) & 1) == (t >> 2) & 1);
    let and = AcceptSet::from_fn(8, |t| (t & 1) & ((t >> 1) & 1) == (t >> 2) & 1);
    let total = 2 * k * k + 1;
    let weight = Rational::new(1, total as i64);
    let mut checks = Vec::with_capacity(total);
    for (accept, op) in [(&xor, (|a, b| a ^ b) as fn(usize, usize) -> usize), (&and, |a, b| a & b)] {
        for i in 0..k {
            for j in 0..k {
                let queries = vec![position[i], position[j], position[op(i, j)]];
                checks.push(Check { queries, accept: accept.clone(), weight: weight.clone() });
            }
        }
    }
    checks.push(Check { queries: vec![0], accept: AcceptSet::from_fn(2, |t| t == 1), weight });
    let tester = Tester::new(bin, k, 3, checks)?;
    Ok(RingTester { family, code, tester, permutation })
}

/// The family `{g_i, g_{i,j}, g'_{i,j}}` over `{0,1,2}` derived from distinct
/// binary functions `g_i`, without duplicates and with the `g_i` first.
pub fn critical_family(g: &FunctionFamily) -> Result<FunctionFamily> {
    if g.target.size() != 2 || g.tables.iter().flatten().any(|&v| v > 1) {
        return Err(Error::NonBinary);
    }
    let mut seen = HashSet::new();
    let mut tables = Vec::new();
    let mut push = |t: Vec<Symbol>| {
        if seen.insert(t.clone()) {
            tables.push(t);
        }
    };
    for t in &g.tables {
        push(t.clone());
    }
    for gi in &g.tables {
        for gj in &g.tables {
            let gij = gi.iter().zip(gj).map(|(&a, &b)| if a == 0 { 0 } else { 1 + b }).collect();
            let gpij = gi.iter().zip(gj).map(|(&a, &b)| if a == 1 { 1 } else if b == 1 { 0 } else { 2 }).collect();
            push(gij);
            push(gpij);
        }
    }
    FunctionFamily::new(g.domain_size, Alphabet::plain(3)?, tables)
}

/// `w_j = maj(f_j(0), f_j(1), f_j(2))` over the long code `L(S, {0,1})`.
pub fn majority_counterexample(s_size: u32, budget: Budget) -> Result<Word> {
    if s_size < 3 {
        return Err(Error::InvalidParameter("majority word needs |S| >= 3".into()));
    }
    let (family, _) = generalized_long_code(s_size, Alphabet::plain(2)?, budget)?;
    Ok(Word(family.tables.iter().map(|t| u32::from(t[0] + t[1] + t[2] >= 2)).collect()))
}
