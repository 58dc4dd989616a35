//! Property checks over fixed and seeded-random desk instances. Every result
//! is deterministic, so reports can be compared byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::VecSpace;
use crate::code::{distance, rate, Alphabet, Code, Word};
use crate::concat::{
    alphabet_increase_tester, check_f_compatible, concat_tester, concatenate, prefix_injection, Compatibility,
    Encoder,
};
use crate::error::{Budget, Result};
use crate::genconstruct::{
    critical_family, dependence_tester, generalized_hadamard, generalized_long_code, long_code_ring_constraints,
    majority_counterexample, FunctionFamily,
};
use crate::pipeline::{general_demo, linear_demo, semilinear_demo, PipelineOptions};
use crate::rational::Rational;
use crate::separability::{
    check_linearly_separable, check_separable, compatibility_encoder, linear_separable_replacement,
    separable_replacement, verify_certificate,
};
use crate::soundness::{decode_word, soundness_exact, zero_reject_scan, Verdict};
use crate::tester::{classify_linear, equality_tester, reject_probability, tuple_space, AcceptSet, Check, Tester};

pub const CRITERIA: usize = 13;
/// Seed of the random instance generators.
pub const INSTANCE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

pub fn criterion_name(id: usize) -> &'static str {
    match id {
        1 => "hadamard distance",
        2 => "hadamard 2-testability",
        3 => "long-code 2-testability",
        4 => "ring constraints",
        5 => "majority counterexample",
        6 => "critical family",
        7 => "concatenation arithmetic",
        8 => "concatenated tester bound",
        9 => "alphabet increase",
        10 => "separable replacement",
        11 => "linear separable replacement",
        12 => "separability iff compatibility",
        13 => "pipelines",
        _ => "unknown",
    }
}

pub fn run_criterion(id: usize, opts: &PipelineOptions) -> CriterionResult {
    let outcome = match id {
        1 => hadamard_distance(),
        2 => hadamard_testability(opts.budget),
        3 => long_code_testability(opts.budget).map(|(ok, nu)| (ok, format!("nu9 = {nu}"))),
        4 => ring_constraints(opts.budget),
        5 => majority(opts.budget),
        6 => critical(opts.budget),
        7 => concat_arithmetic(),
        8 => concat_bound(opts.budget),
        9 => alphabet_increase(opts.budget),
        10 => separable_pointwise(),
        11 => linear_separable_pointwise(),
        12 => separability_iff_compatibility(),
        13 => pipelines(opts),
        _ => Ok((false, "no such criterion".into())),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult { id, name: criterion_name(id).into(), passed, detail }
}

pub fn run_all(opts: &PipelineOptions) -> VerifyReport {
    let criteria: Vec<_> = (1..=CRITERIA).map(|id| run_criterion(id, opts)).collect();
    let passed = criteria.iter().all(|c| c.passed);
    VerifyReport { criteria, passed }
}

type Outcome = Result<(bool, String)>;

fn hadamard_distance() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (p, dv, dd) in [(2, 1, 2), (2, 2, 1), (3, 1, 2), (2, 1, 3)] {
        let delta = VecSpace::new(p, dd)?;
        let (_, code) = generalized_hadamard(VecSpace::new(p, dv)?, delta, Budget::DEFAULT)?;
        let d = distance(&code);
        ok &= d == Rational::one() - Rational::new(1, delta.size().unwrap() as i64);
        details.push(format!("({p},{dv},{dd}): {d}"));
    }
    Ok((ok, details.join(", ")))
}

fn hadamard_testability(budget: Budget) -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for dd in [2, 3] {
        let (f, code) = generalized_hadamard(VecSpace::new(2, 1)?, VecSpace::new(2, dd)?, budget)?;
        let t = dependence_tester(&f, 2, budget)?.tester;
        let scan = zero_reject_scan(&t, &code, budget)?;
        ok &= scan.matches_code();
        details.push(format!("(2,1,{dd}): {} of {} words accepted", scan.accepted, scan.words));
    }
    let (f, code) = generalized_hadamard(VecSpace::new(2, 2)?, VecSpace::new(2, 1)?, budget)?;
    let t = dependence_tester(&f, 2, budget)?.tester;
    let s = soundness_exact(&t, &code, budget)?;
    let witness_ok = s.witness.as_ref().is_some_and(|w| {
        !code.contains(w) && reject_probability(&t, w).map(|r| r.is_zero()).unwrap_or(false)
    });
    ok &= s.value.finite().is_some_and(Rational::is_zero) && witness_ok;
    details.push(format!("H(GF(2)^2, GF(2)) soundness {} witness {:?}", s.value, s.witness));
    Ok((ok, details.join("; ")))
}

/// Accepted set of the 2-dependence tester of `L({0,1}, {0,1,2})` and its
/// exact soundness.
pub fn long_code_testability(budget: Budget) -> Result<(bool, Rational)> {
    let (f, code) = generalized_long_code(2, Alphabet::plain(3)?, budget)?;
    let t = dependence_tester(&f, 2, budget)?.tester;
    let scan = zero_reject_scan(&t, &code, budget)?;
    let s = soundness_exact(&t, &code, budget)?;
    let nu = s.value.finite().cloned().unwrap_or_else(Rational::zero);
    Ok((scan.matches_code() && scan.words == 19683 && nu.is_positive(), nu))
}

fn ring_constraints(budget: Budget) -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for s in [2, 3] {
        let ring = long_code_ring_constraints(s, budget)?;
        let scan = zero_reject_scan(&ring.tester, &ring.code, budget)?;
        ok &= scan.matches_code();
        details.push(format!("|S|={s}: {} of {} words accepted", scan.accepted, scan.words));
    }
    Ok((ok, details.join(", ")))
}

fn majority(budget: Budget) -> Outcome {
    let bin = Alphabet::plain(2)?;
    let mut ok = true;
    let mut details = Vec::new();
    for s in [3, 4] {
        let w = majority_counterexample(s, budget)?;
        let (f, code) = generalized_long_code(s, bin, budget)?;
        let t = dependence_tester(&f, 2, budget)?.tester;
        let rej = reject_probability(&t, &w)?;
        let dist = crate::code::dist_to_code(&w, &code)?;
        ok &= rej.is_zero() && dist.is_positive();
        details.push(format!("|S|={s}: reject {rej}, distance {dist}"));
    }
    let (f, code) = generalized_long_code(2, bin, budget)?;
    let t = dependence_tester(&f, 2, budget)?.tester;
    let scan = zero_reject_scan(&t, &code, budget)?;
    let expected = [Word(vec![0, 1, 0, 1]), Word(vec![0, 0, 1, 1])];
    ok &= scan.matches_code() && code.codewords() == expected;
    details.push(format!("|S|=2: accepted {}", scan.accepted));
    Ok((ok, details.join(", ")))
}

fn critical(budget: Budget) -> Outcome {
    let (g, _) = generalized_long_code(2, Alphabet::plain(2)?, budget)?;
    let family = critical_family(&g)?;
    let code = family.code()?;
    let t = dependence_tester(&family, 2, budget)?.tester;
    let scan = zero_reject_scan(&t, &code, budget)?;
    Ok((scan.matches_code(), format!("k = {}, {} of {} words accepted", family.k(), scan.accepted, scan.words)))
}

fn random_code(rng: &mut ChaCha8Rng, alphabet: Alphabet, n: usize) -> Result<Code> {
    let total = (alphabet.size() as u64).pow(n as u32);
    let count = rng.random_range(2..=4.min(total));
    let mut picked: Vec<u64> = Vec::new();
    while picked.len() < count as usize {
        let x = rng.random_range(0..total);
        if !picked.contains(&x) {
            picked.push(x);
        }
    }
    Code::new(alphabet, n, picked.into_iter().map(|x| Word(decode_word(alphabet.size(), n, x))).collect())
}

fn random_encoder(rng: &mut ChaCha8Rng, sigma: u32, delta: Alphabet) -> Result<Encoder> {
    loop {
        let k = rng.random_range(1..=3);
        let tables =
            (0..k).map(|_| (0..sigma).map(|_| rng.random_range(0..delta.size())).collect()).collect::<Vec<Vec<_>>>();
        let e = Encoder::new(FunctionFamily::new(sigma, delta, tables)?);
        if e.injective {
            return Ok(e);
        }
    }
}

fn concat_arithmetic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(INSTANCE_SEED);
    let mut ok = true;
    let mut details = Vec::new();
    for _ in 0..5 {
        let sigma = Alphabet::plain(rng.random_range(2..=3))?;
        let delta = Alphabet::plain(rng.random_range(2..=3))?;
        let n = rng.random_range(2..=3);
        let c = random_code(&mut rng, sigma, n)?;
        let e = random_encoder(&mut rng, sigma.size(), delta)?;
        let d = e.image()?;
        let cd = concatenate(&c, &e)?;
        let dist_ok = distance(&cd) >= &distance(&c) * &distance(&d);
        let rate_ok = rate(&cd) == rate(&c).mul(&rate(&d));
        ok &= dist_ok && rate_ok;
        details.push(format!("n={} k={} |C|={}: {} >= {}", c.n, e.k(), c.len(), distance(&cd), &distance(&c) * &distance(&d)));
    }
    Ok((ok, details.join("; ")))
}

fn exact_mu(t: &Tester, c: &Code, budget: Budget) -> Result<Rational> {
    Ok(soundness_exact(t, c, budget)?.value.finite().cloned().unwrap_or_else(Rational::zero))
}

fn rep2(alphabet: Alphabet) -> Result<Code> {
    Code::new(alphabet, 2, vec![Word(vec![0, 0]), Word(vec![1, 1])])
}

fn concat_bound(budget: Budget) -> Outcome {
    let bin = Alphabet::plain(2)?;
    let c = rep2(bin)?;
    let t_c = equality_tester(bin, 2)?;
    let (f, d) = generalized_long_code(2, bin, budget)?;
    let e = Encoder::new(f);
    let t_d = dependence_tester(&e.family, 2, budget)?.tester;
    let mu_c = exact_mu(&t_c, &c, budget)?;
    let mu_d = exact_mu(&t_d, &d, budget)?;
    let Compatibility::Witness(wit) = check_f_compatible(&t_c, &e)? else {
        return Ok((false, "outer tester is not compatible".into()));
    };
    let ct = concat_tester(&t_c, &mu_c, &t_d, &mu_d, &e, &wit)?;
    let cd = concatenate(&c, &e)?;
    let s = soundness_exact(&ct.tester, &cd, budget)?.with_bound(ct.weights.bound.clone());
    Ok((
        s.verdict == Some(Verdict::Pass),
        format!("mu_C = {mu_c}, mu_D = {mu_d}, soundness {} >= {}", s.value, ct.weights.bound),
    ))
}

fn alphabet_increase(budget: Budget) -> Outcome {
    let bin = Alphabet::plain(2)?;
    let ter = Alphabet::plain(3)?;
    let c = rep2(bin)?;
    let t = equality_tester(bin, 2)?;
    let mu = exact_mu(&t, &c, budget)?;
    let inc = alphabet_increase_tester(&t, &c, &mu, ter, &prefix_injection(bin, ter)?)?;
    let s = soundness_exact(&inc.tester, &inc.code, budget)?.with_bound(inc.bound.clone());
    Ok((s.verdict == Some(Verdict::Pass), format!("soundness {} >= {}", s.value, inc.bound)))
}

/// A random tester with arity-`q` checks and random positive weights.
pub fn random_tester(rng: &mut ChaCha8Rng, alphabet: Alphabet, n: usize, q: usize) -> Result<Tester> {
    let count = rng.random_range(1..=3);
    let len = tuple_space(alphabet.size(), q)?;
    let raw: Vec<i64> = (0..count).map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = raw.iter().sum();
    let checks = raw
        .iter()
        .map(|&w| {
            let queries = (0..q).map(|_| rng.random_range(0..n)).collect();
            let accept = AcceptSet::from_fn(len, |_| rng.random_bool(0.6));
            Check { queries, accept, weight: Rational::new(w, total) }
        })
        .collect();
    Tester::new(alphabet, n, q, checks)
}

/// A random linear tester over `GF(2)^dim`: each accept set is the span of a
/// few random vectors of `GF(2)^{q dim}`.
pub fn random_linear_tester(rng: &mut ChaCha8Rng, dim: usize, n: usize, q: usize) -> Result<Tester> {
    let space = VecSpace::new(2, dim)?;
    let alphabet = Alphabet::vector(space)?;
    let tuples = VecSpace::new(2, dim * q)?;
    let count = rng.random_range(1..=3);
    let checks = (0..count)
        .map(|_| {
            let gens: Vec<Vec<u32>> =
                (0..rng.random_range(0..=dim * q)).map(|_| tuples.coords(rng.random_range(0..tuples.size().unwrap()))).collect();
            let members = crate::algebra::span_indices(tuples, &crate::algebra::span_basis(tuples.field, &gens));
            let accept = AcceptSet::from_fn(tuples.size().unwrap() as u32, |x| members.contains(&(x as u64)));
            let queries = (0..q).map(|_| rng.random_range(0..n)).collect();
            Check { queries, accept, weight: Rational::new(1, count as i64) }
        })
        .collect();
    Tester::new(alphabet, n, q, checks)
}

fn all_words(alphabet: Alphabet, n: usize) -> impl Iterator<Item = Word> {
    let s = alphabet.size();
    (0..(s as u64).pow(n as u32)).map(move |x| Word(decode_word(s, n, x)))
}

fn pointwise(t: &Tester, t2: &Tester, factor: &Rational) -> Result<bool> {
    for w in all_words(t.alphabet, t.n) {
        if reject_probability(t2, &w)? < &reject_probability(t, &w)? * factor {
            return Ok(false);
        }
    }
    Ok(true)
}

fn separable_pointwise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(INSTANCE_SEED + 10);
    let mut ok = true;
    let mut details = Vec::new();
    for _ in 0..5 {
        let alphabet = Alphabet::plain(rng.random_range(2..=3))?;
        let n = rng.random_range(2..=4);
        let t = random_tester(&mut rng, alphabet, n, 2)?;
        let rep = separable_replacement(&t, &Rational::one(), 2)?;
        let factor = Rational::new(1, (alphabet.size() as i64).pow(2));
        let point = pointwise(&t, &rep.tester, &factor)?;
        let sep = check_separable(&rep.tester, 2)?.certificate().is_some_and(|c| verify_certificate(&rep.tester, &c).is_ok());
        ok &= point && sep;
        details.push(format!("|S|={} n={n} checks {}->{}", alphabet.size(), t.checks.len(), rep.tester.checks.len()));
    }
    Ok((ok, details.join("; ")))
}

fn linear_separable_pointwise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(INSTANCE_SEED + 11);
    let mut ok = true;
    let mut details = Vec::new();
    for _ in 0..6 {
        let dim = rng.random_range(1..=2);
        let n = rng.random_range(2..=3);
        let t = random_linear_tester(&mut rng, dim, n, 2)?;
        let delta = VecSpace::new(2, rng.random_range(1..=2))?;
        let rep = linear_separable_replacement(&t, &Rational::one(), delta)?;
        let point = pointwise(&t, &rep.tester, &Rational::new(1, rep.m as i64))?;
        let linear = classify_linear(&rep.tester)?.is_linear();
        let sep = check_linearly_separable(&rep.tester, delta)?.is_separable();
        ok &= point && linear && sep && rep.m == (2 * dim).div_ceil(delta.dim);
        details.push(format!("dim {dim} -> {} m={}", delta.dim, rep.m));
    }
    Ok((ok, details.join("; ")))
}

fn separability_iff_compatibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(INSTANCE_SEED + 12);
    let mut agree = true;
    let mut counts = [0usize; 4];
    for _ in 0..40 {
        let alphabet = Alphabet::plain(rng.random_range(2..=3))?;
        let delta = rng.random_range(2..=3);
        let t = random_tester(&mut rng, alphabet, 3, 2)?;
        let sep = check_separable(&t, delta)?.is_separable();
        let e = compatibility_encoder(alphabet, Alphabet::plain(delta)?, false, Budget::DEFAULT)?;
        let compat = check_f_compatible(&t, &e)?.witness().is_some();
        agree &= sep == compat;
        counts[usize::from(sep)] += 1;
    }
    for _ in 0..20 {
        let dim = rng.random_range(1..=2);
        let t = random_linear_tester(&mut rng, dim, 3, 2)?;
        let delta = VecSpace::new(2, 1)?;
        let sep = check_linearly_separable(&t, delta)?.is_separable();
        let e = compatibility_encoder(t.alphabet, Alphabet::vector(delta)?, true, Budget::DEFAULT)?;
        let compat = check_f_compatible(&t, &e)?.witness().is_some();
        agree &= sep == compat;
        counts[2 + usize::from(sep)] += 1;
    }
    let both = counts.iter().all(|&c| c > 0);
    Ok((
        agree && both,
        format!(
            "set: {} separable, {} not; linear: {} separable, {} not",
            counts[1], counts[0], counts[3], counts[2]
        ),
    ))
}

fn pipelines(opts: &PipelineOptions) -> Outcome {
    let lin = linear_demo(opts)?;
    let gen = general_demo(opts)?;
    let semi = semilinear_demo(opts)?;
    let settled = |v: Verdict| matches!(v, Verdict::Pass | Verdict::Conditional);
    let ok = lin.certification.verdict == Verdict::Pass
        && settled(gen.certification.verdict)
        && settled(semi.certification.verdict);
    let show = |v: Verdict| serde_json::to_string(&v).unwrap().trim_matches('"').to_string();
    Ok((
        ok,
        format!(
            "linear {} (soundness {}), general {} (sampled min {} vs {}), semilinear {} (sampled min {} vs {})",
            show(lin.certification.verdict),
            lin.achieved.soundness.value,
            show(gen.certification.verdict),
            gen.achieved.soundness.value,
            gen.promised.soundness,
            show(semi.certification.verdict),
            semi.achieved.soundness.value,
            semi.promised.soundness,
        ),
    ))
}
