//! Code concatenation and the testers it admits.

use serde::{Deserialize, Serialize};

use crate::code::{Alphabet, Code, Symbol, Word};
use crate::error::{Error, Result};
use crate::genconstruct::FunctionFamily;
use crate::rational::Rational;
use crate::tester::{
    accept_from_tuples, accept_tuples, contextual_classes, tuple_from_index, tuple_index, tuple_space, AcceptSet,
    Check, Tester,
};

/// An encoder `f: Σ -> Δ^k` given by its coordinate functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EncoderRepr", into = "EncoderRepr")]
pub struct Encoder {
    pub family: FunctionFamily,
    pub injective: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EncoderRepr {
    domain_size: u32,
    target: Alphabet,
    tables: Vec<Vec<Symbol>>,
    injective: bool,
}

impl TryFrom<EncoderRepr> for Encoder {
    type Error = Error;
    fn try_from(r: EncoderRepr) -> Result<Self> {
        let e = Encoder::new(FunctionFamily::new(r.domain_size, r.target, r.tables)?);
        if e.injective != r.injective {
            return Err(Error::Schema("recorded injectivity flag is wrong".into()));
        }
        Ok(e)
    }
}

impl From<Encoder> for EncoderRepr {
    fn from(e: Encoder) -> Self {
        EncoderRepr {
            domain_size: e.family.domain_size,
            target: e.family.target,
            tables: e.family.tables,
            injective: e.injective,
        }
    }
}

impl Encoder {
    pub fn new(family: FunctionFamily) -> Self {
        let injective = family.is_injective();
        Encoder { family, injective }
    }

    pub fn k(&self) -> usize {
        self.family.k()
    }

    pub fn target(&self) -> Alphabet {
        self.family.target
    }

    /// The inner code `D = im(f)`.
    pub fn image(&self) -> Result<Code> {
        self.family.code()
    }

    fn require_injective(&self) -> Result<()> {
        match self.family.collision() {
            Some((a, b)) => Err(Error::NonInjective(a, b)),
            None => Ok(()),
        }
    }
}

/// `C ∘ D`: each letter of each codeword replaced by its encoding, block-major.
pub fn concatenate(code: &Code, e: &Encoder) -> Result<Code> {
    if e.family.domain_size != code.alphabet.size() {
        return Err(Error::Mismatch(format!(
            "encoder domain has {} symbols, code alphabet {}",
            e.family.domain_size,
            code.alphabet.size()
        )));
    }
    e.require_injective()?;
    let words = code
        .codewords()
        .iter()
        .map(|w| Word(w.0.iter().flat_map(|&x| e.family.encode(x).0).collect()))
        .collect();
    Code::new(e.target(), code.n * e.k(), words)
}

/// For one check: coordinates `b_l` of the encoder and a predicate `g` on
/// `Δ^arity` with `T(w) = g(f_{b_1}(w_1), ..., f_{b_q}(w_q))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessEntry {
    pub b: Vec<usize>,
    pub g: AcceptSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WitnessRepr", into = "WitnessRepr")]
pub struct CompatibilityWitness {
    pub delta: Alphabet,
    pub entries: Vec<WitnessEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessRepr {
    delta: Alphabet,
    checks: Vec<WitnessEntryRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessEntryRepr {
    b: Vec<usize>,
    g: Vec<Vec<Symbol>>,
}

impl TryFrom<WitnessRepr> for CompatibilityWitness {
    type Error = Error;
    fn try_from(r: WitnessRepr) -> Result<Self> {
        let s = r.delta.size();
        let entries = r
            .checks
            .into_iter()
            .map(|c| Ok(WitnessEntry { g: accept_from_tuples(s, c.b.len(), &c.g)?, b: c.b }))
            .collect::<Result<_>>()?;
        Ok(CompatibilityWitness { delta: r.delta, entries })
    }
}

impl From<CompatibilityWitness> for WitnessRepr {
    fn from(w: CompatibilityWitness) -> Self {
        let s = w.delta.size();
        WitnessRepr {
            delta: w.delta,
            checks: w
                .entries
                .into_iter()
                .map(|e| WitnessEntryRepr { g: accept_tuples(&e.g, s, e.b.len()), b: e.b })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compatibility {
    Witness(CompatibilityWitness),
    Incompatible { check: usize, coordinate: usize },
}

impl Compatibility {
    pub fn witness(self) -> Option<CompatibilityWitness> {
        match self {
            Compatibility::Witness(w) => Some(w),
            Compatibility::Incompatible { .. } => None,
        }
    }
}

/// `g` as the pushforward of the accept set through `f_{b_1} x ... x f_{b_q}`;
/// tuples outside the image are rejected.
fn pushforward(check: &Check, s: u32, e: &Encoder, b: &[usize]) -> Result<AcceptSet> {
    let arity = check.arity();
    let delta = e.target().size();
    let mut g = AcceptSet::empty(tuple_space(delta, arity)?);
    let mut image = vec![0; arity];
    for x in check.accept.iter() {
        let t = tuple_from_index(s, arity, x);
        for l in 0..arity {
            image[l] = e.family.tables[b[l]][t[l] as usize];
        }
        g.insert(tuple_index(delta, &image));
    }
    Ok(g)
}

/// Searches for a compatibility witness. Since `T` factors through
/// `f_{b_1} x ... x f_{b_q}` iff each `f_{b_l}` has fibers inside the
/// contextual classes at coordinate `l`, the search runs per coordinate and
/// takes the first fitting `b_l`.
pub fn check_f_compatible(tester: &Tester, e: &Encoder) -> Result<Compatibility> {
    let s = tester.alphabet.size();
    if e.family.domain_size != s {
        return Err(Error::Mismatch("encoder domain differs from tester alphabet".into()));
    }
    e.require_injective()?;
    let mut entries = Vec::with_capacity(tester.checks.len());
    for (i, check) in tester.checks.iter().enumerate() {
        let mut b = Vec::with_capacity(check.arity());
        for l in 0..check.arity() {
            let classes = contextual_classes(&check.accept, s, check.arity(), l);
            let fits = |t: &Vec<Symbol>| {
                (0..s as usize).all(|x| (0..x).all(|y| t[x] != t[y] || classes[x] == classes[y]))
            };
            match e.family.tables.iter().position(fits) {
                Some(j) => b.push(j),
                None => return Ok(Compatibility::Incompatible { check: i, coordinate: l }),
            }
        }
        let g = pushforward(check, s, e, &b)?;
        entries.push(WitnessEntry { b, g });
    }
    Ok(Compatibility::Witness(CompatibilityWitness { delta: e.target(), entries }))
}

/// Exhaustively confirms `T^{(i)}(w) = g_i(f_{b_1}(w_1), ...)` for every check.
pub fn verify_witness(tester: &Tester, e: &Encoder, wit: &CompatibilityWitness) -> Result<()> {
    let s = tester.alphabet.size();
    if wit.entries.len() != tester.checks.len() || wit.delta != e.target() || e.family.domain_size != s {
        return Err(Error::Mismatch("witness does not match tester and encoder".into()));
    }
    let delta = e.target().size();
    for (i, (check, entry)) in tester.checks.iter().zip(&wit.entries).enumerate() {
        let arity = check.arity();
        if entry.b.len() != arity || entry.b.iter().any(|&b| b >= e.k()) || entry.g.len() != tuple_space(delta, arity)? {
            return Err(Error::Mismatch(format!("witness entry {i} has the wrong shape")));
        }
        let mut image = vec![0; arity];
        for x in 0..check.accept.len() {
            let t = tuple_from_index(s, arity, x);
            for l in 0..arity {
                image[l] = e.family.tables[entry.b[l]][t[l] as usize];
            }
            if check.accept.contains(x) != entry.g.contains(tuple_index(delta, &image)) {
                return Err(Error::Mismatch(format!("witness entry {i} disagrees with check {i} on {t:?}")));
            }
        }
    }
    Ok(())
}

/// Repeats `queries[0]` up to `arity` with a predicate ignoring the extra
/// coordinates.
pub fn pad_check(check: &Check, s: u32, arity: usize) -> Result<Check> {
    let a = check.arity();
    if a == arity {
        return Ok(check.clone());
    }
    let base = tuple_space(s, a)?;
    let mut queries = check.queries.clone();
    queries.resize(arity, check.queries[0]);
    let accept = AcceptSet::from_fn(tuple_space(s, arity)?, |t| check.accept.contains(t % base));
    Ok(Check { queries, accept, weight: check.weight.clone() })
}

fn uniform_tester(alphabet: Alphabet, n: usize, checks: Vec<Check>) -> Result<Tester> {
    let q = checks.iter().map(Check::arity).max().unwrap_or(1);
    let s = alphabet.size();
    let padded = checks.iter().map(|c| pad_check(c, s, q)).collect::<Result<_>>()?;
    Tester::new(alphabet, n, q, padded)
}

/// Mixing weights of the three routines and the bounds they certify.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcatWeights {
    pub rho: [Rational; 3],
    /// `μ_C μ_D / ((q k + 1) μ_C + μ_D)`.
    pub bound: Rational,
    /// `min{ρ_1 μ_D, ρ_2 μ_C, ρ_3 μ_D / (q k)}`, the minimum the weights balance.
    pub proof_min: Rational,
}

pub fn concat_weights(mu_c: &Rational, mu_d: &Rational, q: usize, k: usize) -> Result<ConcatWeights> {
    if !mu_c.is_positive() || !mu_d.is_positive() {
        return Err(Error::InvalidParameter("soundness inputs must be positive".into()));
    }
    let qk = Rational::integer((q * k) as i64);
    let t1 = &(mu_c * mu_d) / &qk;
    let t2 = &(mu_d * mu_d) / &qk;
    let t3 = mu_c * mu_d;
    let sum = &(&t1 + &t2) + &t3;
    let rho = [&t1 / &sum, &t2 / &sum, &t3 / &sum];
    let proof_min = [&rho[0] * mu_d, &rho[1] * mu_c, &(&rho[2] * mu_d) / &qk].into_iter().min().unwrap();
    let bound = &(mu_c * mu_d) / &(&(&(&qk + &Rational::one()) * mu_c) + mu_d);
    Ok(ConcatWeights { rho, bound, proof_min })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatTester {
    pub tester: Tester,
    pub weights: ConcatWeights,
}

/// The tester for `C ∘ D` mixing: `T_D` on a uniform block; the witness
/// predicates `g^{(i)}`; `T_D` on a uniform queried block of a check of `T_C`.
pub fn concat_tester(
    t_c: &Tester,
    mu_c: &Rational,
    t_d: &Tester,
    mu_d: &Rational,
    e: &Encoder,
    wit: &CompatibilityWitness,
) -> Result<ConcatTester> {
    verify_witness(t_c, e, wit)?;
    let k = e.k();
    if t_d.n != k || t_d.alphabet != e.target() {
        return Err(Error::Mismatch("inner tester does not match the encoder".into()));
    }
    let n = t_c.n;
    let q = t_c.q;
    let weights = concat_weights(mu_c, mu_d, q, k)?;
    let [r1, r2, r3] = &weights.rho;
    let mut checks = Vec::new();
    let blocks = Rational::integer(n as i64);
    for l in 0..n {
        for c in &t_d.checks {
            checks.push(Check {
                queries: c.queries.iter().map(|&p| l * k + p).collect(),
                accept: c.accept.clone(),
                weight: &(r1 / &blocks) * &c.weight,
            });
        }
    }
    for (c, entry) in t_c.checks.iter().zip(&wit.entries) {
        checks.push(Check {
            queries: c.queries.iter().zip(&entry.b).map(|(&a, &b)| a * k + b).collect(),
            accept: entry.g.clone(),
            weight: r2 * &c.weight,
        });
    }
    let slots = Rational::integer(q as i64);
    for c in &t_c.checks {
        let mut blocks_read = c.queries.clone();
        blocks_read.resize(q, c.queries[0]);
        for &a in &blocks_read {
            for d in &t_d.checks {
                checks.push(Check {
                    queries: d.queries.iter().map(|&p| a * k + p).collect(),
                    accept: d.accept.clone(),
                    weight: &(&(r3 * &c.weight) / &slots) * &d.weight,
                });
            }
        }
    }
    let tester = uniform_tester(e.target(), n * k, checks)?;
    Ok(ConcatTester { tester, weights })
}

/// Identity embedding of `Σ` into a larger alphabet `Δ`. For vector
/// alphabets `Σ = GF(p)^c` sits in `Δ = GF(p)^d` as the first `c`
/// coordinates, which preserves symbol indices.
pub fn prefix_injection(sigma: Alphabet, delta: Alphabet) -> Result<Vec<Symbol>> {
    match (sigma, delta) {
        (Alphabet::Vector(a), Alphabet::Vector(b)) if a.field != b.field || a.dim > b.dim => {
            Err(Error::Mismatch("subspace embedding needs a larger space over the same field".into()))
        }
        _ if sigma.size() > delta.size() => Err(Error::Mismatch("target alphabet is smaller".into())),
        _ => Ok((0..sigma.size()).collect()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncreasedTester {
    pub tester: Tester,
    pub code: Code,
    pub rho: [Rational; 2],
    pub bound: Rational,
}

/// Tester for `C` viewed inside `Δ^n`: with weight `μ/(μ+1)` check a uniform
/// letter lies in the image of `Σ`, otherwise run `T` rejecting letters
/// outside it.
pub fn alphabet_increase_tester(
    tester: &Tester,
    code: &Code,
    mu: &Rational,
    delta: Alphabet,
    injection: &[Symbol],
) -> Result<IncreasedTester> {
    if !mu.is_positive() {
        return Err(Error::InvalidParameter("soundness input must be positive".into()));
    }
    let s = tester.alphabet.size();
    let d = delta.size();
    if injection.len() != s as usize || injection.iter().any(|&x| x >= d) {
        return Err(Error::Mismatch("injection does not map the tester alphabet into the target".into()));
    }
    for a in 0..injection.len() {
        if let Some(b) = (0..a).find(|&b| injection[b] == injection[a]) {
            return Err(Error::NonInjective(b as Symbol, a as Symbol));
        }
    }
    if code.alphabet != tester.alphabet || code.n != tester.n {
        return Err(Error::Mismatch("tester and code shapes differ".into()));
    }
    let n = tester.n;
    let one = Rational::one();
    let r1 = mu / &(mu + &one);
    let r2 = &one / &(mu + &one);
    let member = AcceptSet::from_fn(d, |x| injection.contains(&x));
    let mut checks: Vec<Check> = (0..n)
        .map(|l| Check { queries: vec![l], accept: member.clone(), weight: &r1 / &Rational::integer(n as i64) })
        .collect();
    for c in &tester.checks {
        let arity = c.arity();
        let mut accept = AcceptSet::empty(tuple_space(d, arity)?);
        for x in c.accept.iter() {
            let t: Vec<Symbol> = tuple_from_index(s, arity, x).iter().map(|&a| injection[a as usize]).collect();
            accept.insert(tuple_index(d, &t));
        }
        checks.push(Check { queries: c.queries.clone(), accept, weight: &r2 * &c.weight });
    }
    let words = code.codewords().iter().map(|w| Word(w.0.iter().map(|&a| injection[a as usize]).collect())).collect();
    let code = Code::new(delta, n, words)?;
    let q = tester.q.max(1);
    let mut out = uniform_tester(delta, n, checks)?;
    if out.q < q {
        out = Tester::new(
            delta,
            n,
            q,
            out.checks.iter().map(|c| pad_check(c, d, q)).collect::<Result<_>>()?,
        )?;
    }
    Ok(IncreasedTester { tester: out, code, rho: [r1, r2], bound: mu / &(mu + &one) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{distance, rate};
    use crate::error::Budget;
    use crate::genconstruct::{dependence_tester, generalized_long_code};
    use crate::soundness::soundness_exact;
    use crate::tester::{equality_tester, reject_probability, validate};

    fn w(s: &str) -> Word {
        Word(s.chars().map(|c| c.to_digit(10).unwrap()).collect())
    }

    fn rep2() -> Code {
        Code::new(Alphabet::plain(2).unwrap(), 2, vec![w("00"), w("11")]).unwrap()
    }

    #[test]
    fn identity_encoder_is_neutral() {
        let bin = Alphabet::plain(2).unwrap();
        let id = Encoder::new(FunctionFamily::new(2, bin, vec![vec![0, 1]]).unwrap());
        assert_eq!(concatenate(&rep2(), &id).unwrap(), rep2());
    }

    #[test]
    fn concatenated_long_code() {
        let (f, d) = generalized_long_code(2, Alphabet::plain(3).unwrap(), Budget::DEFAULT).unwrap();
        let e = Encoder::new(f);
        let cd = concatenate(&rep2(), &e).unwrap();
        assert_eq!((cd.n, cd.len()), (18, 2));
        assert_eq!(distance(&cd), Rational::new(2, 3));
        assert_eq!(distance(&cd), &distance(&rep2()) * &distance(&d));
        assert_eq!(rate(&cd), rate(&rep2()).mul(&rate(&d)));
    }

    #[test]
    fn weights_sum_and_bound_agree() {
        for (mc, md, q, k) in [(2, 1, 2, 4), (1, 3, 3, 9), (5, 7, 2, 1)] {
            let cw = concat_weights(&Rational::integer(mc), &Rational::new(1, md), q, k).unwrap();
            let total: Rational = cw.rho.iter().cloned().sum();
            assert_eq!(total, Rational::one());
            assert_eq!(cw.proof_min, cw.bound);
        }
    }

    #[test]
    fn binary_concat_tester_bound() {
        let bin = Alphabet::plain(2).unwrap();
        let (f, d) = generalized_long_code(2, bin, Budget::DEFAULT).unwrap();
        let e = Encoder::new(f);
        let t_c = equality_tester(bin, 2).unwrap();
        let t_d = dependence_tester(&e.family, 2, Budget::DEFAULT).unwrap().tester;
        let mu_c = soundness_exact(&t_c, &rep2(), Budget::DEFAULT).unwrap().value.finite().unwrap().clone();
        let mu_d = soundness_exact(&t_d, &d, Budget::DEFAULT).unwrap().value.finite().unwrap().clone();
        let wit = check_f_compatible(&t_c, &e).unwrap().witness().unwrap();
        let ct = concat_tester(&t_c, &mu_c, &t_d, &mu_d, &e, &wit).unwrap();
        let cd = concatenate(&rep2(), &e).unwrap();
        assert!(validate(&ct.tester, &cd).unwrap().is_ok());
        let s = soundness_exact(&ct.tester, &cd, Budget::DEFAULT).unwrap();
        assert!(s.value.ge(&ct.weights.bound));
        assert_eq!(ct.tester.q, 2);
    }

    #[test]
    fn collapsing_encoder_is_rejected() {
        let ter = Alphabet::plain(3).unwrap();
        let t = equality_tester(ter, 2).unwrap();
        let e = Encoder::new(FunctionFamily::new(3, Alphabet::plain(2).unwrap(), vec![vec![0, 0, 1]]).unwrap());
        assert_eq!(check_f_compatible(&t, &e), Err(Error::NonInjective(0, 1)));
    }

    #[test]
    fn alphabet_increase_examples() {
        let bin = Alphabet::plain(2).unwrap();
        let ter = Alphabet::plain(3).unwrap();
        let t = equality_tester(bin, 2).unwrap();
        let mu = Rational::integer(2);
        let inc = alphabet_increase_tester(&t, &rep2(), &mu, ter, &prefix_injection(bin, ter).unwrap()).unwrap();
        assert_eq!(inc.bound, Rational::new(2, 3));
        assert!(validate(&inc.tester, &inc.code).unwrap().is_ok());
        let s = soundness_exact(&inc.tester, &inc.code, Budget::DEFAULT).unwrap();
        assert!(s.value.ge(&inc.bound));
        let stray = reject_probability(&inc.tester, &w("20")).unwrap();
        assert!(stray >= &inc.rho[0] / &Rational::integer(2));
    }
}
