//! Exact and sampled soundness, plus zero-rejection scans.
//!
//! Exhaustive scans enumerate `Σ^n` in lexicographic order (position 0 is the
//! most significant digit) split into contiguous index ranges. Each range
//! reduces to `(min ratio, smallest index)`, so the merged result does not
//! depend on how the ranges were scheduled.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::ops::AddAssign;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{min_differences, Code, Symbol, Word};
use crate::error::{Budget, Error, Result};
use crate::rational::{Extended, Rational};
use crate::tester::Tester;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Consistent,
    Violated,
    Conditional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub mode: Mode,
    pub value: Extended,
    pub witness: Option<Word>,
    pub bound: Option<Rational>,
    pub verdict: Option<Verdict>,
}

impl SoundnessReport {
    /// Attaches a lower bound. Exact reports get pass/fail, sampled reports
    /// consistent/violated.
    pub fn with_bound(mut self, bound: Rational) -> Self {
        let holds = self.value.ge(&bound);
        self.verdict = Some(match (&self.mode, holds) {
            (Mode::Exact, true) => Verdict::Pass,
            (Mode::Exact, false) => Verdict::Fail,
            (Mode::Sampled { .. }, true) => Verdict::Consistent,
            (Mode::Sampled { .. }, false) => Verdict::Violated,
        });
        self.bound = Some(bound);
        self
    }

    pub fn exact_value(&self) -> Option<&Rational> {
        match self.mode {
            Mode::Exact => self.value.finite(),
            Mode::Sampled { .. } => None,
        }
    }
}

trait Acc: Clone + Ord + Send + Sync + Zero + for<'a> AddAssign<&'a Self> {
    fn mul_small(&self, k: u64) -> Self;
    fn to_bigint(&self) -> BigInt;
}

impl Acc for u128 {
    fn mul_small(&self, k: u64) -> Self {
        self * k as u128
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Acc for BigUint {
    fn mul_small(&self, k: u64) -> Self {
        self * k
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(self.clone())
    }
}

/// Tester compiled to integer weights `c_i / L`.
struct Compiled<'a, A> {
    tester: &'a Tester,
    s: u32,
    weights: Vec<A>,
}

impl<A: Acc> Compiled<'_, A> {
    #[inline]
    fn reject(&self, letters: &[Symbol]) -> A {
        let mut r = A::zero();
        for (c, w) in self.tester.checks.iter().zip(&self.weights) {
            if !c.accepts_word(self.s, letters) {
                r += w;
            }
        }
        r
    }
}

fn common_denominator(tester: &Tester) -> (BigInt, Vec<BigInt>) {
    let l = tester.checks.iter().fold(BigInt::from(1), |acc, c| acc.lcm(c.weight.denom()));
    let nums = tester.checks.iter().map(|c| c.weight.numer() * (&l / c.weight.denom())).collect();
    (l, nums)
}

/// Candidate minimizer: reject numerator, differing positions, tie key.
#[derive(Clone)]
struct Best<A> {
    r: A,
    d: u64,
    key: u64,
}

fn better<A: Acc>(a: &Best<A>, b: &Best<A>) -> bool {
    match a.r.mul_small(b.d).cmp(&b.r.mul_small(a.d)) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.key < b.key,
    }
}

fn merge<A: Acc>(a: Option<Best<A>>, b: Option<Best<A>>) -> Option<Best<A>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

pub(crate) fn decode_word(s: u32, n: usize, mut idx: u64) -> Vec<Symbol> {
    let mut letters = vec![0; n];
    for slot in letters.iter_mut().rev() {
        *slot = (idx % s as u64) as Symbol;
        idx /= s as u64;
    }
    letters
}

#[inline]
fn step(s: u32, letters: &mut [Symbol]) {
    for slot in letters.iter_mut().rev() {
        *slot += 1;
        if *slot < s {
            return;
        }
        *slot = 0;
    }
}

pub(crate) fn chunks(total: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let size = (total / 64).max(1 << 12);
    let count = total.div_ceil(size);
    (0..count).into_par_iter().map(move |c| (c * size, ((c + 1) * size).min(total)))
}

fn shape_check(tester: &Tester, code: &Code) -> Result<()> {
    if tester.alphabet != code.alphabet || tester.n != code.n {
        return Err(Error::Mismatch("tester and code shapes differ".into()));
    }
    Ok(())
}

fn ratio_value(r: BigInt, d: u64, n: usize, denom: &BigInt) -> Rational {
    Rational::from_big(r * BigInt::from(n), denom * BigInt::from(d))
}

/// Exact soundness `min_{w ∉ C} Pr[reject w] / dist(w, C)` over all of `Σ^n`.
pub fn soundness_exact(tester: &Tester, code: &Code, budget: Budget) -> Result<SoundnessReport> {
    shape_check(tester, code)?;
    let total = budget.check_power(code.alphabet.size() as u64, code.n as u64)?;
    let (denom, nums) = common_denominator(tester);
    let sum: BigInt = nums.iter().sum();
    let fits = (&sum * BigInt::from(code.n as u64 + 1)).to_u128().is_some();
    let found = if fits {
        let weights = nums.iter().map(|x| x.to_u128().unwrap()).collect();
        exact_scan::<u128>(tester, code, total, weights)
    } else {
        let weights = nums.iter().map(|x| x.to_biguint().unwrap()).collect();
        exact_scan::<BigUint>(tester, code, total, weights)
    };
    Ok(match found {
        None => SoundnessReport {
            mode: Mode::Exact,
            value: Extended::Infinite,
            witness: None,
            bound: None,
            verdict: None,
        },
        Some((r, d, key)) => SoundnessReport {
            mode: Mode::Exact,
            value: Extended::Finite(ratio_value(r, d, code.n, &denom)),
            witness: Some(Word(decode_word(code.alphabet.size(), code.n, key))),
            bound: None,
            verdict: None,
        },
    })
}

fn exact_scan<A: Acc>(
    tester: &Tester,
    code: &Code,
    total: u64,
    weights: Vec<A>,
) -> Option<(BigInt, u64, u64)> {
    let s = code.alphabet.size();
    let compiled = Compiled { tester, s, weights };
    let best = chunks(total)
        .map(|(lo, hi)| {
            let mut letters = decode_word(s, code.n, lo);
            let mut best: Option<Best<A>> = None;
            for idx in lo..hi {
                let d = min_differences(&letters, code) as u64;
                if d > 0 {
                    let cand = Best { r: compiled.reject(&letters), d, key: idx };
                    if best.as_ref().is_none_or(|b| better(&cand, b)) {
                        best = Some(cand);
                    }
                }
                step(s, &mut letters);
            }
            best
        })
        .reduce(|| None, merge);
    best.map(|b| (b.r.to_bigint(), b.d, b.key))
}

/// Sampled soundness: the minimum ratio over `trials` uniformly drawn
/// non-codewords. Trial `t` draws from ChaCha8 seeded with `seed` on stream
/// `t`, so adding trials never changes earlier draws.
pub fn soundness_sampled(tester: &Tester, code: &Code, trials: u64, seed: u64) -> Result<SoundnessReport> {
    shape_check(tester, code)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let mode = Mode::Sampled { trials, seed };
    if code.is_full() {
        return Ok(SoundnessReport { mode, value: Extended::Infinite, witness: None, bound: None, verdict: None });
    }
    let (denom, nums) = common_denominator(tester);
    let sum: BigInt = nums.iter().sum();
    let fits = (&sum * BigInt::from(code.n as u64 + 1)).to_u128().is_some();
    let (r, d, word) = if fits {
        let weights = nums.iter().map(|x| x.to_u128().unwrap()).collect();
        sampled_scan::<u128>(tester, code, trials, seed, weights)
    } else {
        let weights = nums.iter().map(|x| x.to_biguint().unwrap()).collect();
        sampled_scan::<BigUint>(tester, code, trials, seed, weights)
    };
    Ok(SoundnessReport {
        mode,
        value: Extended::Finite(ratio_value(r, d, code.n, &denom)),
        witness: Some(Word(word)),
        bound: None,
        verdict: None,
    })
}

fn sampled_scan<A: Acc>(
    tester: &Tester,
    code: &Code,
    trials: u64,
    seed: u64,
    weights: Vec<A>,
) -> (BigInt, u64, Vec<Symbol>) {
    let s = code.alphabet.size();
    let n = code.n;
    let members: HashSet<&[Symbol]> = code.codewords().iter().map(|w| w.0.as_slice()).collect();
    let compiled = Compiled { tester, s, weights };
    let draw = |t: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t);
        let letters = loop {
            let w: Vec<Symbol> = (0..n).map(|_| rng.random_range(0..s)).collect();
            if !members.contains(w.as_slice()) {
                break w;
            }
        };
        let d = min_differences(&letters, code) as u64;
        (compiled.reject(&letters), d, letters)
    };
    let smaller = |a: &(A, u64, Vec<Symbol>), b: &(A, u64, Vec<Symbol>)| match a.0.mul_small(b.1).cmp(&b.0.mul_small(a.1)) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.2 < b.2,
    };
    let best = (0..trials)
        .into_par_iter()
        .map(draw)
        .reduce_with(|a, b| if smaller(&b, &a) { b } else { a })
        .unwrap();
    (best.0.to_bigint(), best.1, best.2)
}

/// Outcome of scanning `Σ^n` for words the tester never rejects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroRejectScan {
    pub words: u64,
    pub accepted: u64,
    pub accepted_outside: u64,
    pub first_outside: Option<Word>,
    pub rejected_codewords: u64,
}

impl ZeroRejectScan {
    /// The zero-rejection set is exactly the code.
    pub fn matches_code(&self) -> bool {
        self.accepted_outside == 0 && self.rejected_codewords == 0
    }
}

pub fn zero_reject_scan(tester: &Tester, code: &Code, budget: Budget) -> Result<ZeroRejectScan> {
    shape_check(tester, code)?;
    let total = budget.check_power(code.alphabet.size() as u64, code.n as u64)?;
    let s = code.alphabet.size();
    let members: HashSet<&[Symbol]> = code.codewords().iter().map(|w| w.0.as_slice()).collect();
    let (accepted, outside, first) = chunks(total)
        .map(|(lo, hi)| {
            let mut letters = decode_word(s, code.n, lo);
            let (mut acc, mut out, mut first) = (0u64, 0u64, None);
            for idx in lo..hi {
                if tester.checks.iter().all(|c| c.accepts_word(s, &letters)) {
                    acc += 1;
                    if !members.contains(letters.as_slice()) {
                        out += 1;
                        first = first.or(Some(idx));
                    }
                }
                step(s, &mut letters);
            }
            (acc, out, first)
        })
        .reduce(
            || (0, 0, None),
            |a, b| (a.0 + b.0, a.1 + b.1, match (a.2, b.2) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            }),
        );
    let rejected_codewords =
        code.codewords().iter().filter(|w| !tester.accepts_always(w)).count() as u64;
    Ok(ZeroRejectScan {
        words: total,
        accepted,
        accepted_outside: outside,
        first_outside: first.map(|i| Word(decode_word(s, code.n, i))),
        rejected_codewords,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::Alphabet;
    use crate::tester::equality_tester;

    fn w(s: &str) -> Word {
        Word(s.chars().map(|c| c.to_digit(10).unwrap()).collect())
    }

    fn bin() -> Alphabet {
        Alphabet::plain(2).unwrap()
    }

    #[test]
    fn equality_soundness_is_two() {
        let rep = Code::new(bin(), 2, vec![w("00"), w("11")]).unwrap();
        let t = equality_tester(bin(), 2).unwrap();
        let r = soundness_exact(&t, &rep, Budget::DEFAULT).unwrap();
        assert_eq!(r.value, Extended::Finite(Rational::integer(2)));
        assert_eq!(r.witness, Some(w("01")));
        let r = r.with_bound(Rational::integer(2));
        assert_eq!(r.verdict, Some(Verdict::Pass));
    }

    #[test]
    fn full_code_is_infinite() {
        let full = Code::new(bin(), 1, vec![w("0"), w("1")]).unwrap();
        let t = equality_tester(bin(), 2).unwrap();
        let t1 = Tester { n: 1, checks: vec![crate::tester::Check { queries: vec![0, 0], ..t.checks[0].clone() }], ..t };
        let r = soundness_exact(&t1, &full, Budget::DEFAULT).unwrap();
        assert_eq!(r.value, Extended::Infinite);
        let s = soundness_sampled(&t1, &full, 10, 1).unwrap();
        assert_eq!(s.value, Extended::Infinite);
    }

    #[test]
    fn sampled_dominates_exact_and_is_deterministic() {
        let rep = Code::new(bin(), 3, vec![w("000"), w("111")]).unwrap();
        let t = equality_tester(bin(), 3).unwrap();
        let exact = soundness_exact(&t, &rep, Budget::DEFAULT).unwrap();
        for seed in 0..5 {
            let a = soundness_sampled(&t, &rep, 50, seed).unwrap();
            let b = soundness_sampled(&t, &rep, 50, seed).unwrap();
            assert_eq!(a, b);
            assert!(a.value.ge(exact.value.finite().unwrap()));
        }
    }

    #[test]
    fn budget_error_names_size() {
        let rep = Code::new(bin(), 3, vec![w("000"), w("111")]).unwrap();
        let t = equality_tester(bin(), 3).unwrap();
        assert_eq!(
            soundness_exact(&t, &rep, Budget(4)).unwrap_err(),
            Error::Capacity { required: 8, budget: 4 }
        );
    }

    #[test]
    fn zero_reject_of_repetition() {
        let rep = Code::new(bin(), 3, vec![w("000"), w("111")]).unwrap();
        let t = equality_tester(bin(), 3).unwrap();
        let scan = zero_reject_scan(&t, &rep, Budget::DEFAULT).unwrap();
        assert!(scan.matches_code());
        assert_eq!(scan.accepted, 2);
    }
}
