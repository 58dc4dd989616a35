use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ltc_forge::algebra::{
    enumerate_linear_maps, kernel_complement_surjection, nullspace, quotient_map, rank, span_basis, span_indices,
    LinearMap, VecSpace,
};
use ltc_forge::code::{distance, hamming_dist, rate};
use ltc_forge::concat::{check_f_compatible, concatenate, Encoder};
use ltc_forge::genconstruct::{dependence_tester, FunctionFamily};
use ltc_forge::io::{self, Artifact};
use ltc_forge::separability::{
    check_linearly_separable, check_separable, compatibility_encoder, linear_separable_replacement,
    separable_replacement,
};
use ltc_forge::soundness::{soundness_exact, soundness_sampled};
use ltc_forge::tester::{classify_linear, reject_probability, validate};
use ltc_forge::verify::{random_linear_tester, random_tester};
use ltc_forge::{Alphabet, Budget, Code, Extended, Rational, Tester, Word};

fn all_words(s: u32, n: usize) -> Vec<Word> {
    (0..(s as u64).pow(n as u32))
        .map(|mut x| {
            Word(
                (0..n)
                    .map(|_| {
                        let d = (x % s as u64) as u32;
                        x /= s as u64;
                        d
                    })
                    .collect(),
            )
        })
        .collect()
}

fn code_strategy() -> impl Strategy<Value = Code> {
    (2u32..=3, 1usize..=3).prop_flat_map(|(s, n)| {
        let total = s.pow(n as u32);
        proptest::collection::btree_set(0..total, 1..=total.min(5) as usize).prop_map(move |idx| {
            let words = all_words(s, n);
            Code::new(Alphabet::plain(s).unwrap(), n, idx.into_iter().map(|i| words[i as usize].clone()).collect())
                .unwrap()
        })
    })
}

fn tester_for(seed: u64, code: &Code) -> Tester {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tester(&mut rng, code.alphabet, code.n, 2).unwrap()
}

fn linear_map_strategy() -> impl Strategy<Value = LinearMap> {
    (prop_oneof![Just(2u32), Just(3u32)], 1usize..=3, 1usize..=3).prop_flat_map(|(p, dd, dc)| {
        proptest::collection::vec(proptest::collection::vec(0..p, dd), dc).prop_map(move |matrix| LinearMap {
            domain: VecSpace::new(p, dd).unwrap(),
            codomain: VecSpace::new(p, dc).unwrap(),
            matrix,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linear_maps_are_additive_and_homogeneous(m in linear_map_strategy(), a in any::<u64>(), b in any::<u64>(), alpha in 0u32..3) {
        let dom = m.domain;
        let size = dom.size().unwrap();
        let (u, v) = (dom.coords(a % size), dom.coords(b % size));
        let alpha = alpha % dom.p();
        let cod = m.codomain;
        prop_assert_eq!(m.apply(&dom.add(&u, &v)), cod.add(&m.apply(&u), &m.apply(&v)));
        prop_assert_eq!(m.apply(&dom.scale(alpha, &u)), cod.scale(alpha, &m.apply(&u)));
        prop_assert_eq!(m.apply(&dom.zero()), cod.zero());
    }

    #[test]
    fn rank_plus_nullity(m in linear_map_strategy()) {
        let field = m.domain.field;
        let r = rank(field, &m.matrix);
        let kernel = nullspace(field, &m.matrix, m.domain.dim);
        prop_assert_eq!(r + kernel.len(), m.domain.dim);
        for k in &kernel {
            prop_assert_eq!(m.apply(k), m.codomain.zero());
        }
    }

    #[test]
    fn quotient_map_kernel_is_the_span(p in prop_oneof![Just(2u32), Just(3u32)], dim in 1usize..=3, gens in proptest::collection::vec(any::<u64>(), 0..3), extra in 0usize..2) {
        let space = VecSpace::new(p, dim).unwrap();
        let size = space.size().unwrap();
        let vecs: Vec<Vec<u32>> = gens.iter().map(|g| space.coords(g % size)).collect();
        let basis = span_basis(space.field, &vecs);
        let target = dim - basis.len() + extra;
        let q = quotient_map(space, &basis, target).unwrap();
        let span = span_indices(space, &basis);
        let mut image = std::collections::BTreeSet::new();
        for x in 0..size {
            let y = q.apply(&space.coords(x));
            prop_assert_eq!(y.iter().all(|&c| c == 0), span.contains(&x));
            image.insert(y);
        }
        prop_assert_eq!(image.len() as u64, size / span.len() as u64);

        let s = kernel_complement_surjection(space, &basis, dim + extra).unwrap();
        for x in 0..size {
            prop_assert_eq!(s.apply(&space.coords(x)).iter().all(|&c| c == 0), span.contains(&x));
        }
        prop_assert!(kernel_complement_surjection(space, &basis, dim - 1).is_err());
    }

    #[test]
    fn distance_is_minimum_pairwise(code in code_strategy()) {
        let words = code.codewords();
        let pairwise = (0..words.len())
            .flat_map(|i| (i + 1..words.len()).map(move |j| (i, j)))
            .map(|(i, j)| hamming_dist(&words[i], &words[j]).unwrap())
            .min();
        prop_assert_eq!(distance(&code), pairwise.unwrap_or_else(Rational::one));
    }

    #[test]
    fn exact_soundness_is_attained_and_minimal(code in code_strategy(), seed in any::<u64>()) {
        let t = tester_for(seed, &code);
        let report = soundness_exact(&t, &code, Budget::DEFAULT).unwrap();
        if let Extended::Finite(mu) = &report.value {
            let w = report.witness.clone().unwrap();
            let ratio = |w: &Word| &reject_probability(&t, w).unwrap() / &ltc_forge::code::dist_to_code(w, &code).unwrap();
            prop_assert_eq!(&ratio(&w), mu);
            for w in all_words(code.alphabet.size(), code.n) {
                if !code.contains(&w) {
                    prop_assert!(&ratio(&w) >= mu);
                }
            }
            let sampled = soundness_sampled(&t, &code, 200, seed).unwrap();
            prop_assert!(sampled.value.finite().unwrap() >= mu);
        } else {
            prop_assert!(code.is_full());
        }
    }

    #[test]
    fn sampled_soundness_is_deterministic(code in code_strategy(), seed in any::<u64>()) {
        let t = tester_for(seed, &code);
        let a = soundness_sampled(&t, &code, 100, seed).unwrap();
        let b = soundness_sampled(&t, &code, 100, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dependence_tester_accepts_its_code(tables in proptest::collection::vec(proptest::collection::vec(0u32..3, 3), 1..=3)) {
        let f = FunctionFamily::new(3, Alphabet::plain(3).unwrap(), tables).unwrap();
        let t = dependence_tester(&f, 2, Budget::DEFAULT).unwrap().tester;
        let (code, _) = ltc_forge::genconstruct::code_from_family(&f).unwrap();
        prop_assert!(validate(&t, &code).unwrap().is_ok());
    }

    #[test]
    fn concatenation_rate_and_distance(code in code_strategy(), tables in proptest::collection::vec(proptest::collection::vec(0u32..2, 3), 2..=3)) {
        let f = FunctionFamily::new(code.alphabet.size(), Alphabet::plain(2).unwrap(), tables.iter().map(|t| t[..code.alphabet.size() as usize].to_vec()).collect()).unwrap();
        let e = Encoder::new(f);
        prop_assume!(e.injective);
        let cd = concatenate(&code, &e).unwrap();
        let image = e.image().unwrap();
        prop_assert_eq!(cd.len(), code.len());
        prop_assert!(distance(&cd) >= &distance(&code) * &distance(&image));
        prop_assert_eq!(rate(&cd), rate(&code).mul(&rate(&image)));
    }

    #[test]
    fn separable_replacement_pointwise(seed in any::<u64>(), s in 2u32..=3, n in 2usize..=4, delta in 2u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tester(&mut rng, Alphabet::plain(s).unwrap(), n, 2).unwrap();
        let r = separable_replacement(&t, &Rational::one(), delta).unwrap();
        prop_assert!(check_separable(&r.tester, delta).unwrap().is_separable());
        let factor = Rational::new(1, (s * s) as i64);
        for w in all_words(s, n) {
            let before = reject_probability(&t, &w).unwrap();
            let after = reject_probability(&r.tester, &w).unwrap();
            prop_assert!(after >= &before * &factor);
            prop_assert_eq!(after.is_zero(), before.is_zero());
        }
    }

    #[test]
    fn linear_replacement_pointwise(seed in any::<u64>(), dim in 1usize..=2, target in 1usize..=2, n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_linear_tester(&mut rng, dim, n, 2).unwrap();
        let delta = VecSpace::new(2, target).unwrap();
        let r = linear_separable_replacement(&t, &Rational::one(), delta).unwrap();
        let m = (2 * dim).div_ceil(target);
        prop_assert_eq!(r.m, m);
        prop_assert!(classify_linear(&r.tester).unwrap().is_linear());
        prop_assert!(check_linearly_separable(&r.tester, delta).unwrap().is_separable());
        let factor = Rational::new(1, m as i64);
        for w in all_words(t.alphabet.size(), n) {
            let before = reject_probability(&t, &w).unwrap();
            prop_assert!(reject_probability(&r.tester, &w).unwrap() >= &before * &factor);
        }
    }

    #[test]
    fn separable_iff_compatible(seed in any::<u64>(), s in 2u32..=3, delta in 2u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alphabet = Alphabet::plain(s).unwrap();
        let t = random_tester(&mut rng, alphabet, 3, 2).unwrap();
        let e = compatibility_encoder(alphabet, Alphabet::plain(delta).unwrap(), false, Budget::DEFAULT).unwrap();
        prop_assert_eq!(
            check_separable(&t, delta).unwrap().is_separable(),
            check_f_compatible(&t, &e).unwrap().witness().is_some()
        );
    }

    #[test]
    fn linearly_separable_iff_compatible(seed in any::<u64>(), dim in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_linear_tester(&mut rng, dim, 3, 2).unwrap();
        let delta = VecSpace::new(2, 1).unwrap();
        let e = compatibility_encoder(t.alphabet, Alphabet::vector(delta).unwrap(), true, Budget::DEFAULT).unwrap();
        prop_assert_eq!(
            check_linearly_separable(&t, delta).unwrap().is_separable(),
            check_f_compatible(&t, &e).unwrap().witness().is_some()
        );
    }

    #[test]
    fn artifacts_round_trip(code in code_strategy(), seed in any::<u64>()) {
        let t = tester_for(seed, &code);
        for a in [Artifact::Code(code.clone()), Artifact::Tester(t.clone())] {
            let text = io::to_json(&a);
            prop_assert_eq!(io::to_json(&io::from_json(&text).unwrap()), text);
        }
        prop_assert_eq!(io::read_code(&io::to_json(&Artifact::Code(code.clone()))).unwrap(), code);
        prop_assert_eq!(io::read_tester(&io::to_json(&Artifact::Tester(t.clone()))).unwrap(), t.clone());
        if let Ok(cert) = check_separable(&t, 3) {
            if let Some(cert) = cert.certificate() {
                let text = io::to_json(&Artifact::Certificate(cert));
                prop_assert_eq!(io::to_json(&io::from_json(&text).unwrap()), text);
            }
        }
    }
}

#[test]
fn linear_map_enumeration_counts() {
    for (p, a, b) in [(2u32, 1usize, 2usize), (2, 2, 2), (3, 1, 2), (3, 2, 1)] {
        let maps = enumerate_linear_maps(VecSpace::new(p, a).unwrap(), VecSpace::new(p, b).unwrap(), Budget::DEFAULT).unwrap();
        assert_eq!(maps.len() as u32, p.pow((a * b) as u32));
        let distinct: std::collections::HashSet<_> = maps.iter().collect();
        assert_eq!(distinct.len(), maps.len());
    }
}

#[test]
fn report_round_trip() {
    let r = ltc_forge::pipeline::semilinear_demo(&Default::default()).unwrap();
    let text = io::to_json(&Artifact::Report(Box::new(r)));
    assert_eq!(io::to_json(&io::from_json(&text).unwrap()), text);
}
