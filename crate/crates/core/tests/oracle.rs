//! Brute-force oracles written against raw words and `BigRational`, compared
//! with the library's exhaustive engine. Values confirmed here are frozen as
//! regression constants.

use num_bigint::BigInt;
use num_rational::BigRational;

use ltc_forge::algebra::VecSpace;
use ltc_forge::code::distance;
use ltc_forge::concat::{
    alphabet_increase_tester, check_f_compatible, concat_tester, concatenate, prefix_injection, Encoder,
};
use ltc_forge::genconstruct::{
    critical_family, dependence_tester, generalized_hadamard, generalized_long_code, long_code_ring_constraints,
    majority_counterexample,
};
use ltc_forge::pipeline::{general_demo, linear_demo, semilinear_demo, PipelineOptions};
use ltc_forge::soundness::soundness_exact;
use ltc_forge::tester::equality_tester;
use ltc_forge::{Alphabet, Budget, Code, Extended, Rational, Tester, Word};

fn big(r: &Rational) -> BigRational {
    BigRational::new(r.numer().clone(), r.denom().clone())
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn words(s: u32, n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|w| (0..s).map(move |a| [w.clone(), vec![a]].concat())).collect();
    }
    out
}

fn rejection(t: &Tester, w: &[u32]) -> BigRational {
    let s = t.alphabet.size();
    let mut total = frac(0, 1);
    for c in &t.checks {
        let idx: u32 = c.queries.iter().rev().fold(0, |acc, &p| acc * s + w[p]);
        if !c.accept.contains(idx) {
            total += big(&c.weight);
        }
    }
    total
}

fn rel_dist(w: &[u32], code: &Code) -> BigRational {
    let best = code.codewords().iter().map(|c| c.0.iter().zip(w).filter(|(a, b)| a != b).count()).min().unwrap();
    frac(best as i64, w.len() as i64)
}

/// Minimum of rejection / distance over non-codewords; `None` if every word is a codeword.
fn oracle_soundness(t: &Tester, code: &Code) -> Option<BigRational> {
    words(code.alphabet.size(), code.n)
        .iter()
        .filter_map(|w| {
            let d = rel_dist(w, code);
            (d != frac(0, 1)).then(|| rejection(t, w) / d)
        })
        .min()
}

fn oracle_accepted(t: &Tester) -> Vec<Vec<u32>> {
    words(t.alphabet.size(), t.n).into_iter().filter(|w| rejection(t, w) == frac(0, 1)).collect()
}

fn codeword_set(code: &Code) -> Vec<Vec<u32>> {
    let mut v: Vec<_> = code.codewords().iter().map(|w| w.0.clone()).collect();
    v.sort();
    v
}

fn engine(t: &Tester, code: &Code) -> BigRational {
    match soundness_exact(t, code, Budget::DEFAULT).unwrap().value {
        Extended::Finite(r) => big(&r),
        Extended::Infinite => panic!("unexpected infinite soundness"),
    }
}

fn rep2(alphabet: Alphabet) -> Code {
    Code::new(alphabet, 2, vec![Word(vec![0, 0]), Word(vec![1, 1])]).unwrap()
}

#[test]
fn long_code_words_by_hand() {
    let (_, c) = generalized_long_code(2, Alphabet::plain(2).unwrap(), Budget::DEFAULT).unwrap();
    assert_eq!(codeword_set(&c), vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]]);

    let (_, c3) = generalized_long_code(2, Alphabet::plain(3).unwrap(), Budget::DEFAULT).unwrap();
    let by_hand: Vec<Vec<u32>> = (0..2).map(|s| (0..9u32).map(|j| (j / 3u32.pow(s)) % 3).collect()).collect();
    let mut by_hand = by_hand;
    by_hand.sort();
    assert_eq!(codeword_set(&c3), by_hand);
    assert_eq!(distance(&c3), Rational::new(2, 3));
}

#[test]
fn hadamard_codewords_are_additive() {
    for (p, dv, dd) in [(2, 1, 2), (2, 2, 1), (3, 1, 2), (2, 2, 2)] {
        let v = VecSpace::new(p, dv).unwrap();
        let d = VecSpace::new(p, dd).unwrap();
        let (_, c) = generalized_hadamard(v, d, Budget::DEFAULT).unwrap();
        let q = p.pow(dd as u32);
        assert_eq!(c.n as u32, q.pow(dv as u32), "one position per linear map");
        assert_eq!(c.len() as u32, p.pow(dv as u32));
        let add = |a: u32, b: u32| d.index(&d.add(&d.coords(a as u64), &d.coords(b as u64))) as u32;
        let set = codeword_set(&c);
        for a in &set {
            for b in &set {
                let sum: Vec<u32> = a.iter().zip(b).map(|(&x, &y)| add(x, y)).collect();
                assert!(set.contains(&sum));
            }
        }
        assert_eq!(distance(&c), Rational::new(q as i64 - 1, q as i64));
    }
}

#[test]
fn hadamard_two_dependence_accepts_exactly_the_code() {
    let v = VecSpace::new(2, 1).unwrap();
    let d = VecSpace::new(2, 2).unwrap();
    let (f, c) = generalized_hadamard(v, d, Budget::DEFAULT).unwrap();
    let t = dependence_tester(&f, 2, Budget::DEFAULT).unwrap().tester;
    assert_eq!(oracle_accepted(&t), codeword_set(&c));
}

#[test]
fn hadamard_rank_two_has_zero_soundness() {
    let v = VecSpace::new(2, 2).unwrap();
    let d = VecSpace::new(2, 1).unwrap();
    let (f, c) = generalized_hadamard(v, d, Budget::DEFAULT).unwrap();
    let t = dependence_tester(&f, 2, Budget::DEFAULT).unwrap().tester;
    assert_eq!(oracle_soundness(&t, &c), Some(frac(0, 1)));
    let report = soundness_exact(&t, &c, Budget::DEFAULT).unwrap();
    let w = report.witness.unwrap();
    assert_eq!(rejection(&t, &w.0), frac(0, 1));
    assert!(!c.contains(&w));
}

#[test]
fn long_code_nu9_matches_oracle() {
    let (f, c) = generalized_long_code(2, Alphabet::plain(3).unwrap(), Budget::DEFAULT).unwrap();
    let t = dependence_tester(&f, 2, Budget::DEFAULT).unwrap().tester;
    let nu = oracle_soundness(&t, &c).unwrap();
    assert_eq!(nu, frac(2, 3));
    assert_eq!(engine(&t, &c), nu);
    assert_eq!(oracle_accepted(&t), codeword_set(&c));
}

#[test]
fn binary_long_code_two_dependence_accepted_set() {
    let (f, c) = generalized_long_code(2, Alphabet::plain(2).unwrap(), Budget::DEFAULT).unwrap();
    let t = dependence_tester(&f, 2, Budget::DEFAULT).unwrap().tester;
    assert_eq!(oracle_accepted(&t), vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]]);
    assert_eq!(oracle_accepted(&t), codeword_set(&c));
}

#[test]
fn ring_tester_accepted_sets() {
    for s in [2, 3] {
        let ring = long_code_ring_constraints(s, Budget::DEFAULT).unwrap();
        assert_eq!(oracle_accepted(&ring.tester), codeword_set(&ring.code));
        assert!(engine(&ring.tester, &ring.code) > frac(0, 1));
    }
}

#[test]
fn majority_word_fools_pair_checks() {
    for s in [3, 4] {
        let (f, c) = generalized_long_code(s, Alphabet::plain(2).unwrap(), Budget::DEFAULT).unwrap();
        let t = dependence_tester(&f, 2, Budget::DEFAULT).unwrap().tester;
        let w = majority_counterexample(s, Budget::DEFAULT).unwrap();
        assert_eq!(rejection(&t, &w.0), frac(0, 1));
        assert_eq!(rel_dist(&w.0, &c), frac(1, 4));
    }
}

#[test]
fn critical_family_pairs_characterize_the_code() {
    let (g, _) = generalized_long_code(2, Alphabet::plain(2).unwrap(), Budget::DEFAULT).unwrap();
    let f = critical_family(&g).unwrap();
    assert_eq!(f.k(), 9);
    let c = f.code().unwrap();
    let t = dependence_tester(&f, 2, Budget::DEFAULT).unwrap().tester;
    assert_eq!(oracle_accepted(&t), codeword_set(&c));
}

#[test]
fn concatenated_tester_soundness_is_4_over_37() {
    let bin = Alphabet::plain(2).unwrap();
    let c = rep2(bin);
    let t_c = equality_tester(bin, 2).unwrap();
    let (f, d) = generalized_long_code(2, bin, Budget::DEFAULT).unwrap();
    let e = Encoder::new(f);
    let t_d = dependence_tester(&e.family, 2, Budget::DEFAULT).unwrap().tester;
    let mu_c = oracle_soundness(&t_c, &c).unwrap();
    let mu_d = oracle_soundness(&t_d, &d).unwrap();
    assert_eq!((mu_c.clone(), mu_d.clone()), (frac(2, 1), frac(1, 2)));

    let wit = check_f_compatible(&t_c, &e).unwrap().witness().unwrap();
    let ct = concat_tester(&t_c, &Rational::new(2, 1), &t_d, &Rational::new(1, 2), &e, &wit).unwrap();
    let cd = concatenate(&c, &e).unwrap();
    assert_eq!(cd.n, 8);
    let bound = &mu_c * &mu_d / (frac(2 * 4 + 1, 1) * &mu_c + &mu_d);
    assert_eq!(bound, frac(2, 37));
    assert_eq!(big(&ct.weights.bound), bound);
    let value = oracle_soundness(&ct.tester, &cd).unwrap();
    assert_eq!(value, frac(4, 37));
    assert_eq!(engine(&ct.tester, &cd), value);
}

#[test]
fn alphabet_increase_soundness_matches_oracle() {
    let bin = Alphabet::plain(2).unwrap();
    let c = rep2(bin);
    let t = equality_tester(bin, 2).unwrap();
    let delta = Alphabet::plain(3).unwrap();
    let inj = prefix_injection(bin, delta).unwrap();
    let inc = alphabet_increase_tester(&t, &c, &Rational::new(2, 1), delta, &inj).unwrap();
    assert_eq!(inc.code.alphabet.size(), 3);
    let value = oracle_soundness(&inc.tester, &inc.code).unwrap();
    assert_eq!(value, frac(2, 3));
    assert_eq!(engine(&inc.tester, &inc.code), value);
    assert_eq!(big(&inc.bound), frac(2, 3));
}

#[test]
fn linear_pipeline_final_soundness_is_8_over_33() {
    let report = linear_demo(&PipelineOptions::default()).unwrap();
    let s = &report.stages;
    let value = oracle_soundness(&s.final_tester, &s.final_code).unwrap();
    assert_eq!(value, frac(8, 33));
    assert_eq!(report.achieved.soundness.value, Extended::Finite(Rational::new(8, 33)));
    assert_eq!(oracle_accepted(&s.final_tester), codeword_set(&s.final_code));
}

#[test]
fn pipeline_inner_testers_match_oracle() {
    let opts = PipelineOptions::default();
    for report in [linear_demo(&opts).unwrap(), general_demo(&opts).unwrap(), semilinear_demo(&opts).unwrap()] {
        let s = &report.stages;
        let nu = report.achieved.nu.as_ref().unwrap();
        match &nu.value {
            Extended::Finite(v) => assert_eq!(Some(big(v)), oracle_soundness(&s.inner_tester, &s.inner_code)),
            Extended::Infinite => assert!(s.inner_code.is_full()),
        }
    }
}

#[test]
fn equality_tester_soundness() {
    for (size, n) in [(2, 2), (2, 4), (3, 3)] {
        let a = Alphabet::plain(size).unwrap();
        let words: Vec<Word> = (0..size).map(|x| Word(vec![x; n])).collect();
        let c = Code::new(a, n, words).unwrap();
        let t = equality_tester(a, n).unwrap();
        assert_eq!(engine(&t, &c), oracle_soundness(&t, &c).unwrap());
    }
}
