//! Separable testers: checks that factor through per-coordinate maps into a
//! smaller alphabet `Δ`.
//!
//! The decision procedure uses the coarsest possible factorization. A check
//! factors through `g_1 x ... x g_q` iff each `g_l` is constant only on
//! classes of the contextual equivalence at `l`, so it is separable over `Δ`
//! iff every coordinate has at most `|Δ|` classes. For a linear check with
//! accept subspace `V`, the class of `0` at coordinate `l` is
//! `U_l = {a : a e_l ∈ V}` and the other classes are its cosets, so a linear
//! factorization exists iff `codim U_l <= dim Δ`.

use serde::{Deserialize, Serialize};

use crate::algebra::{kernel_complement_surjection, quotient_map, subspace_basis, VecSpace};
use crate::code::{Alphabet, Symbol};
use crate::concat::{CompatibilityWitness, Encoder, WitnessEntry};
use crate::error::{Budget, Error, Result};
use crate::genconstruct::{generalized_hadamard, generalized_long_code};
use crate::rational::Rational;
use crate::tester::{
    accept_from_tuples, accept_subspace, accept_tuples, classify_linear, contextual_classes, tuple_from_index,
    tuple_index, tuple_space, tuple_vec_space, AcceptSet, Check, Linearity, Tester,
};

/// Factorization of one check: `T = g ∘ (g_1 x ... x g_q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckCertificate {
    /// Value tables of `g_l: Σ -> Δ`.
    pub maps: Vec<Vec<Symbol>>,
    pub g: AcceptSet,
    /// Bases of the kernels `U_l` in the linear case.
    pub kernels: Option<Vec<Vec<Vec<u32>>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CertificateRepr", into = "CertificateRepr")]
pub struct SeparabilityCertificate {
    pub delta: Alphabet,
    pub checks: Vec<CheckCertificate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateRepr {
    delta: Alphabet,
    checks: Vec<CheckCertificateRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckCertificateRepr {
    maps: Vec<Vec<Symbol>>,
    g: Vec<Vec<Symbol>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernels: Option<Vec<Vec<Vec<u32>>>>,
}

impl TryFrom<CertificateRepr> for SeparabilityCertificate {
    type Error = Error;
    fn try_from(r: CertificateRepr) -> Result<Self> {
        let s = r.delta.size();
        let checks = r
            .checks
            .into_iter()
            .map(|c| {
                Ok(CheckCertificate { g: accept_from_tuples(s, c.maps.len(), &c.g)?, maps: c.maps, kernels: c.kernels })
            })
            .collect::<Result<_>>()?;
        Ok(SeparabilityCertificate { delta: r.delta, checks })
    }
}

impl From<SeparabilityCertificate> for CertificateRepr {
    fn from(c: SeparabilityCertificate) -> Self {
        let s = c.delta.size();
        CertificateRepr {
            delta: c.delta,
            checks: c
                .checks
                .into_iter()
                .map(|e| CheckCertificateRepr { g: accept_tuples(&e.g, s, e.maps.len()), maps: e.maps, kernels: e.kernels })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separability {
    Separable(SeparabilityCertificate),
    NotSeparable { check: usize, coordinate: usize },
}

impl Separability {
    pub fn certificate(self) -> Option<SeparabilityCertificate> {
        match self {
            Separability::Separable(c) => Some(c),
            Separability::NotSeparable { .. } => None,
        }
    }

    pub fn is_separable(&self) -> bool {
        matches!(self, Separability::Separable(_))
    }
}

fn pushforward(check: &Check, s: u32, delta: u32, maps: &[Vec<Symbol>]) -> Result<AcceptSet> {
    let arity = check.arity();
    let mut g = AcceptSet::empty(tuple_space(delta, arity)?);
    let mut image = vec![0; arity];
    for x in check.accept.iter() {
        let t = tuple_from_index(s, arity, x);
        for l in 0..arity {
            image[l] = maps[l][t[l] as usize];
        }
        g.insert(tuple_index(delta, &image));
    }
    Ok(g)
}

pub fn check_separable(tester: &Tester, delta_size: u32) -> Result<Separability> {
    let delta = Alphabet::plain(delta_size)?;
    let s = tester.alphabet.size();
    let mut checks = Vec::with_capacity(tester.checks.len());
    for (i, check) in tester.checks.iter().enumerate() {
        let mut maps = Vec::with_capacity(check.arity());
        for l in 0..check.arity() {
            let classes = contextual_classes(&check.accept, s, check.arity(), l);
            if classes.iter().any(|&c| c as u32 >= delta_size) {
                return Ok(Separability::NotSeparable { check: i, coordinate: l });
            }
            maps.push(classes.into_iter().map(|c| c as Symbol).collect::<Vec<_>>());
        }
        let g = pushforward(check, s, delta_size, &maps)?;
        checks.push(CheckCertificate { maps, g, kernels: None });
    }
    Ok(Separability::Separable(SeparabilityCertificate { delta, checks }))
}

pub fn check_linearly_separable(tester: &Tester, delta: VecSpace) -> Result<Separability> {
    let sigma = tester.alphabet.require_space()?;
    if sigma.field != delta.field {
        return Err(Error::FieldMismatch(sigma.p(), delta.p()));
    }
    let delta_alpha = Alphabet::vector(delta)?;
    let s = tester.alphabet.size();
    let mut checks = Vec::with_capacity(tester.checks.len());
    for (i, check) in tester.checks.iter().enumerate() {
        if accept_subspace(sigma, check).is_none() {
            return Err(Error::Nonlinear(i));
        }
        let mut maps = Vec::with_capacity(check.arity());
        let mut kernels = Vec::with_capacity(check.arity());
        for l in 0..check.arity() {
            let stride = s.pow(l as u32);
            let members: Vec<u64> = (0..s).filter(|&a| check.accept.contains(a * stride)).map(u64::from).collect();
            let basis = subspace_basis(sigma, &members).expect("slice of a subspace is a subspace");
            if sigma.dim - basis.len() > delta.dim {
                return Ok(Separability::NotSeparable { check: i, coordinate: l });
            }
            maps.push(quotient_map(sigma, &basis, delta.dim)?.value_table());
            kernels.push(basis);
        }
        let g = pushforward(check, s, delta_alpha.size(), &maps)?;
        checks.push(CheckCertificate { maps, g, kernels: Some(kernels) });
    }
    Ok(Separability::Separable(SeparabilityCertificate { delta: delta_alpha, checks }))
}

/// Exhaustively confirms every factorization in the certificate.
pub fn verify_certificate(tester: &Tester, cert: &SeparabilityCertificate) -> Result<()> {
    if cert.checks.len() != tester.checks.len() {
        return Err(Error::Mismatch("certificate and tester have different check counts".into()));
    }
    let s = tester.alphabet.size();
    let d = cert.delta.size();
    for (i, (check, c)) in tester.checks.iter().zip(&cert.checks).enumerate() {
        let arity = check.arity();
        if c.maps.len() != arity || c.maps.iter().any(|m| m.len() != s as usize || m.iter().any(|&x| x >= d)) {
            return Err(Error::Mismatch(format!("certificate entry {i} has the wrong shape")));
        }
        let mut image = vec![0; arity];
        for x in 0..check.accept.len() {
            let t = tuple_from_index(s, arity, x);
            for l in 0..arity {
                image[l] = c.maps[l][t[l] as usize];
            }
            if check.accept.contains(x) != c.g.contains(tuple_index(d, &image)) {
                return Err(Error::Mismatch(format!("certificate entry {i} disagrees on {t:?}")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub tester: Tester,
    /// Lower bound on the new soundness given the input bound.
    pub bound: Rational,
    /// Number of new checks per original check in the linear case.
    pub m: usize,
    pub certificate: SeparabilityCertificate,
}

/// Splits each check `i` into one check per tuple `u`, rejecting only when the
/// read tuple is `u` and `T^{(i)}` rejects it; weights `p_i / |Σ|^{arity}`.
pub fn separable_replacement(tester: &Tester, mu: &Rational, delta_size: u32) -> Result<Replacement> {
    if !mu.is_positive() {
        return Err(Error::InvalidParameter("soundness input must be positive".into()));
    }
    let s = tester.alphabet.size();
    let mut checks = Vec::new();
    for c in &tester.checks {
        let len = tuple_space(s, c.arity())?;
        let weight = &c.weight / &Rational::integer(len as i64);
        for u in 0..len {
            let accept = AcceptSet::from_fn(len, |x| x != u || c.accept.contains(u));
            checks.push(Check { queries: c.queries.clone(), accept, weight: weight.clone() });
        }
    }
    let out = Tester::new(tester.alphabet, tester.n, tester.q, checks)?;
    let certificate = check_separable(&out, delta_size)?
        .certificate()
        .ok_or_else(|| Error::InvalidParameter("replacement needs at least two target symbols".into()))?;
    let bound = mu / &Rational::integer((s as i64).pow(tester.q as u32));
    Ok(Replacement { tester: out, bound, m: 1, certificate })
}

/// `m = ⌈q dim Σ / dim Δ⌉` kernels per check: each accept subspace `V_i` is
/// the kernel of a surjection `h_i: Σ^q -> Δ^m` and check `(i, j)` accepts
/// iff component `h_{ij}` vanishes.
pub fn linear_separable_replacement(tester: &Tester, mu: &Rational, delta: VecSpace) -> Result<Replacement> {
    if !mu.is_positive() {
        return Err(Error::InvalidParameter("soundness input must be positive".into()));
    }
    let sigma = tester.alphabet.require_space()?;
    if sigma.field != delta.field {
        return Err(Error::FieldMismatch(sigma.p(), delta.p()));
    }
    if delta.dim == 0 {
        return Err(Error::InvalidParameter("target space must be nonzero".into()));
    }
    let bases = match classify_linear(tester)? {
        Linearity::Nonlinear { check } => return Err(Error::Nonlinear(check)),
        l => l.bases().unwrap().to_vec(),
    };
    let m = (tester.q * sigma.dim).div_ceil(delta.dim);
    let weight_div = Rational::integer(m as i64);
    let mut checks = Vec::new();
    for (c, basis) in tester.checks.iter().zip(&bases) {
        let space = tuple_vec_space(sigma, c.arity());
        let h = kernel_complement_surjection(space, basis, m * delta.dim)?;
        let len = c.accept.len();
        for j in 0..m {
            let hj = h.component(j * delta.dim, delta.dim);
            let accept = AcceptSet::from_fn(len, |x| hj.apply_index(x as u64) == 0);
            checks.push(Check { queries: c.queries.clone(), accept, weight: &c.weight / &weight_div });
        }
    }
    let out = Tester::new(tester.alphabet, tester.n, tester.q, checks)?;
    let certificate = check_linearly_separable(&out, delta)?
        .certificate()
        .expect("kernels of maps into Δ have codimension at most dim Δ");
    Ok(Replacement { tester: out, bound: mu / &weight_div, m, certificate })
}

/// All functions `Σ -> Δ` (or all linear ones) as an encoder; its image is
/// the generalized long code (or Hadamard code).
pub fn compatibility_encoder(sigma: Alphabet, delta: Alphabet, linear: bool, budget: Budget) -> Result<Encoder> {
    let family = if linear {
        let (Some(a), Some(b)) = (sigma.space(), delta.space()) else {
            return Err(Error::NotVectorAlphabet);
        };
        generalized_hadamard(a, b, budget)?.0
    } else {
        generalized_long_code(sigma.size(), delta, budget)?.0
    };
    Ok(Encoder::new(family))
}

/// Re-indexes a witness for `e` into `e2`, whose target contains the target
/// of `e` as its first symbols. `g` accepts any tuple using a new symbol.
pub fn extend_compatibility(wit: &CompatibilityWitness, e: &Encoder, e2: &Encoder) -> Result<CompatibilityWitness> {
    let d = e.target().size();
    let d2 = e2.target().size();
    if d2 < d || e.family.domain_size != e2.family.domain_size {
        return Err(Error::Mismatch("extended encoder must share the domain and enlarge the target".into()));
    }
    let position: Vec<usize> = e
        .family
        .tables
        .iter()
        .enumerate()
        .map(|(j, t)| {
            e2.family
                .tables
                .iter()
                .position(|t2| t2 == t)
                .ok_or_else(|| Error::Mismatch(format!("coordinate {j} has no counterpart in the extended encoder")))
        })
        .collect::<Result<_>>()?;
    let entries = wit
        .entries
        .iter()
        .map(|entry| {
            let arity = entry.b.len();
            let g = AcceptSet::from_fn(tuple_space(d2, arity)?, |y| {
                let t = tuple_from_index(d2, arity, y);
                t.iter().any(|&x| x >= d) || entry.g.contains(tuple_index(d, &t))
            });
            Ok(WitnessEntry { b: entry.b.iter().map(|&b| position[b]).collect(), g })
        })
        .collect::<Result<_>>()?;
    Ok(CompatibilityWitness { delta: e2.target(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{Code, Word};
    use crate::concat::{check_f_compatible, verify_witness};
    use crate::genconstruct::{critical_family, FunctionFamily};
    use crate::soundness::soundness_exact;
    use crate::tester::{equality_tester, reject_probability};

    fn gf(dim: usize) -> VecSpace {
        VecSpace::new(2, dim).unwrap()
    }

    fn single(alphabet: Alphabet, accepted: &[u32]) -> Tester {
        let len = tuple_space(alphabet.size(), 2).unwrap();
        let accept = AcceptSet::from_fn(len, |i| accepted.contains(&i));
        Tester::new(alphabet, 2, 2, vec![Check { queries: vec![0, 1], accept, weight: Rational::one() }]).unwrap()
    }

    #[test]
    fn equality_separability() {
        let ter = Alphabet::plain(3).unwrap();
        let t = equality_tester(ter, 2).unwrap();
        assert!(check_separable(&t, 3).unwrap().is_separable());
        assert_eq!(check_separable(&t, 2).unwrap(), Separability::NotSeparable { check: 0, coordinate: 0 });
        let all = single(ter, &(0..9).collect::<Vec<_>>());
        let cert = check_separable(&all, 2).unwrap().certificate().unwrap();
        assert_eq!(cert.checks[0].maps, vec![vec![0, 0, 0], vec![0, 0, 0]]);
        verify_certificate(&all, &cert).unwrap();
    }

    #[test]
    fn linear_separability_examples() {
        let a1 = Alphabet::vector(gf(1)).unwrap();
        let zero = single(a1, &[0]);
        let cert = check_linearly_separable(&zero, gf(1)).unwrap().certificate().unwrap();
        verify_certificate(&zero, &cert).unwrap();
        let a2 = Alphabet::vector(gf(2)).unwrap();
        let eq = equality_tester(a2, 2).unwrap();
        assert!(!check_linearly_separable(&eq, gf(1)).unwrap().is_separable());
        let elem = equality_tester(a1, 2).unwrap();
        assert!(check_linearly_separable(&elem, gf(1)).unwrap().is_separable());
    }

    #[test]
    fn replacement_on_repetition() {
        let bin = Alphabet::plain(2).unwrap();
        let rep = Code::new(bin, 2, vec![Word(vec![0, 0]), Word(vec![1, 1])]).unwrap();
        let t = equality_tester(bin, 2).unwrap();
        let r = separable_replacement(&t, &Rational::integer(2), 2).unwrap();
        assert_eq!(r.tester.checks.len(), 4);
        assert_eq!(r.bound, Rational::new(1, 2));
        let s = soundness_exact(&r.tester, &rep, Budget::DEFAULT).unwrap();
        assert!(s.value.ge(&r.bound));
    }

    #[test]
    fn linear_replacement_on_repetition() {
        let a1 = Alphabet::vector(gf(1)).unwrap();
        let rep = Code::new(a1, 2, vec![Word(vec![0, 0]), Word(vec![1, 1])]).unwrap();
        let t = equality_tester(a1, 2).unwrap();
        let r = linear_separable_replacement(&t, &Rational::integer(2), gf(1)).unwrap();
        assert_eq!(r.m, 2);
        assert!(classify_linear(&r.tester).unwrap().is_linear());
        for x in 0..4 {
            let w = Word(vec![x % 2, x / 2]);
            let before = reject_probability(&t, &w).unwrap();
            let after = reject_probability(&r.tester, &w).unwrap();
            assert!(after >= &before / &Rational::integer(2));
        }
        let s = soundness_exact(&r.tester, &rep, Budget::DEFAULT).unwrap();
        assert!(s.value.ge(&r.bound));
        let wide = linear_separable_replacement(&t, &Rational::integer(2), gf(2)).unwrap();
        assert_eq!(wide.m, 1);
    }

    #[test]
    fn encoders() {
        let e = compatibility_encoder(Alphabet::plain(2).unwrap(), Alphabet::plain(3).unwrap(), false, Budget::DEFAULT)
            .unwrap();
        assert_eq!(e.k(), 9);
        assert!(e.injective);
        let lin =
            compatibility_encoder(Alphabet::vector(gf(1)).unwrap(), Alphabet::vector(gf(2)).unwrap(), true, Budget::DEFAULT)
                .unwrap();
        assert_eq!(lin.k(), 4);
    }

    #[test]
    fn extension_into_critical_family() {
        let a1 = Alphabet::vector(gf(1)).unwrap();
        let t = equality_tester(a1, 2).unwrap();
        let r = linear_separable_replacement(&t, &Rational::integer(2), gf(1)).unwrap();
        let e = compatibility_encoder(a1, a1, true, Budget::DEFAULT).unwrap();
        let wit = check_f_compatible(&r.tester, &e).unwrap().witness().unwrap();
        let binary = FunctionFamily::new(2, Alphabet::plain(2).unwrap(), e.family.tables.clone()).unwrap();
        let e2 = Encoder::new(critical_family(&binary).unwrap());
        let wit2 = extend_compatibility(&wit, &e, &e2).unwrap();
        verify_witness(&r.tester, &e2, &wit2).unwrap();
        assert_eq!(extend_compatibility(&wit, &e, &e).unwrap(), wit);
    }
}
