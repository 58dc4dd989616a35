//! End-to-end alphabet reductions: separable replacement, compatible
//! encoding, concatenation with an inner dependence tester, and an optional
//! alphabet increase, with every promised parameter checked.

use serde::{Deserialize, Serialize};

use crate::algebra::VecSpace;
use crate::code::{distance, is_linear_code, rate, Alphabet, Code, Word};
use crate::concat::{
    alphabet_increase_tester, check_f_compatible, concat_tester, concatenate, prefix_injection,
    CompatibilityWitness, Encoder,
};
use crate::error::{checked_pow, Budget, Error, Result};
use crate::genconstruct::{critical_family, dependence_tester, FunctionFamily};
use crate::rate::Rate;
use crate::rational::Rational;
use crate::separability::{
    compatibility_encoder, extend_compatibility, linear_separable_replacement, separable_replacement,
};
use crate::soundness::{soundness_exact, soundness_sampled, SoundnessReport, Verdict};
use crate::tester::{classify_linear, equality_tester, validate, Tester};

pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    pub budget: Budget,
    pub trials: u64,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { budget: Budget::DEFAULT, trials: DEFAULT_TRIALS, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineKind {
    Linear,
    General,
    Semilinear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineInput {
    pub code: Code,
    pub tester: Tester,
    pub mu: Rational,
    pub distance: Rational,
    pub rate: Rate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub q: usize,
    pub c: usize,
    pub target: Alphabet,
    pub k: usize,
    /// Query count of the inner dependence tester.
    pub inner_q: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stages {
    pub separable_tester: Tester,
    /// Soundness value carried forward from the separable replacement.
    pub separable_mu: Rational,
    pub encoder: Encoder,
    pub witness: CompatibilityWitness,
    pub inner_code: Code,
    pub inner_tester: Tester,
    pub concat_code: Code,
    pub concat_tester: Tester,
    /// Soundness certified for the concatenated tester.
    pub concat_mu: Rational,
    pub final_code: Code,
    pub final_tester: Tester,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Promised {
    pub distance: Rational,
    /// Rate implied by the constructed stages.
    pub rate: Rate,
    /// Rate as quoted by the reduction statement, recorded for comparison.
    pub rate_stated: Rate,
    pub soundness: Rational,
    pub nu_bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Achieved {
    pub distance: Rational,
    pub inner_distance: Rational,
    pub rate: Rate,
    pub rate_matches_stated: bool,
    pub nu: Option<SoundnessReport>,
    pub separable_soundness: Option<SoundnessReport>,
    pub soundness: SoundnessReport,
    pub final_validates: bool,
    /// Linear pipelines only: final code and tester are linear.
    pub linear: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertItem {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certification {
    pub items: Vec<CertItem>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub pipeline: PipelineKind,
    pub input: PipelineInput,
    pub parameters: Parameters,
    pub stages: Stages,
    pub promised: Promised,
    pub achieved: Achieved,
    pub certification: Certification,
}

fn exact_cmp(name: &str, holds: bool, detail: String) -> CertItem {
    CertItem { name: name.into(), verdict: if holds { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn soundness_item(name: &str, report: &SoundnessReport) -> CertItem {
    let verdict = report.verdict.unwrap_or(Verdict::Fail);
    let bound = report.bound.as_ref().map_or("none".to_string(), |b| b.to_string());
    CertItem { name: name.into(), verdict, detail: format!("{} >= {bound}", report.value) }
}

/// Per-inequality verdicts. Exact comparisons pass or fail; sampled ones are
/// consistent or violated. The overall verdict is `conditional` when every
/// exact item passes but some item was only sampled.
pub fn certify(report: &PipelineReport) -> Result<Certification> {
    let p = &report.promised;
    let a = &report.achieved;
    let nu = a.nu.as_ref().ok_or(Error::IncompleteReport("nu"))?;
    let nu_value = nu.exact_value().ok_or(Error::IncompleteReport("exact nu"))?;
    let mut items = vec![
        exact_cmp("distance", a.distance >= p.distance, format!("{} >= {}", a.distance, p.distance)),
        exact_cmp("rate", a.rate == p.rate, format!("{} = {}", a.rate, p.rate)),
        exact_cmp("nu_bound", *nu_value >= p.nu_bound, format!("{nu_value} >= {}", p.nu_bound)),
        exact_cmp("final_validates", a.final_validates, "final tester accepts every codeword".into()),
    ];
    if let Some(s) = &a.separable_soundness {
        items.push(soundness_item("separable_soundness", s));
    }
    items.push(soundness_item("soundness", &a.soundness));
    if let Some(lin) = a.linear {
        items.push(exact_cmp("linearity", lin, "final code and tester are linear".into()));
    }
    let verdict = if items.iter().any(|i| i.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if items.iter().any(|i| i.verdict == Verdict::Violated) {
        Verdict::Violated
    } else if items.iter().any(|i| i.verdict == Verdict::Consistent) {
        Verdict::Conditional
    } else {
        Verdict::Pass
    };
    Ok(Certification { items, verdict })
}

fn word_space(alphabet: Alphabet, n: usize) -> u128 {
    checked_pow(alphabet.size() as u64, n as u64).unwrap_or(u128::MAX)
}

/// Exact soundness when `Σ^n` fits the budget, sampled otherwise.
fn soundness_auto(tester: &Tester, code: &Code, bound: Rational, opts: &PipelineOptions) -> Result<SoundnessReport> {
    let report = if word_space(code.alphabet, code.n) <= opts.budget.0 as u128 {
        soundness_exact(tester, code, opts.budget)?
    } else {
        soundness_sampled(tester, code, opts.trials, opts.seed)?
    };
    Ok(report.with_bound(bound))
}

fn inner_soundness(
    tester: &Tester,
    code: &Code,
    bound: &Rational,
    opts: &PipelineOptions,
    hint: impl FnOnce() -> String,
) -> Result<(SoundnessReport, Rational)> {
    let required = word_space(code.alphabet, code.n);
    if required > opts.budget.0 as u128 {
        return Err(Error::StageCapacity { stage: "inner", required, budget: opts.budget.0, hint: hint() });
    }
    let report = soundness_exact(tester, code, opts.budget)?.with_bound(bound.clone());
    let nu = report
        .value
        .finite()
        .filter(|v| v.is_positive())
        .cloned()
        .ok_or_else(|| Error::InvalidParameter(format!("inner tester soundness is {}", report.value)))?;
    Ok((report, nu))
}

fn require_positive(mu: &Rational) -> Result<()> {
    if mu.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("soundness input must be positive".into()))
    }
}

fn input_summary(code: &Code, tester: &Tester, mu: &Rational) -> Result<PipelineInput> {
    if tester.alphabet != code.alphabet || tester.n != code.n {
        return Err(Error::Mismatch("tester and code shapes differ".into()));
    }
    Ok(PipelineInput {
        code: code.clone(),
        tester: tester.clone(),
        mu: mu.clone(),
        distance: distance(code),
        rate: rate(code),
    })
}

fn separable_soundness(tester: &Tester, code: &Code, bound: &Rational, opts: &PipelineOptions) -> Result<Option<SoundnessReport>> {
    if word_space(code.alphabet, code.n) > opts.budget.0 as u128 {
        return Ok(None);
    }
    Ok(Some(soundness_exact(tester, code, opts.budget)?.with_bound(bound.clone())))
}

fn r(num: usize, den: usize) -> Rational {
    Rational::new(num as i64, den as i64)
}

/// Reduction of a linear code over `Σ = GF(p)^s` to `Δ = GF(p)^d` through
/// the Hadamard code `H(Σ, GF(p)^c)`.
pub fn linear_reduction(
    code: &Code,
    tester: &Tester,
    mu: &Rational,
    delta: VecSpace,
    c: usize,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    require_positive(mu)?;
    let sigma = code.alphabet.require_space()?;
    let q = tester.q;
    let d = delta.dim;
    if sigma.field != delta.field {
        return Err(Error::FieldMismatch(sigma.p(), delta.p()));
    }
    if c == 0 || c > d {
        return Err(Error::InvalidParameter(format!("c must lie in 1..={d}")));
    }
    if q < 2 || (c == 1 && q < 3) {
        return Err(Error::InvalidParameter(format!("q = {q} is too small for c = {c}")));
    }
    if is_linear_code(code)?.is_none() {
        return Err(Error::InvalidParameter("input code is not linear".into()));
    }
    if !classify_linear(tester)?.is_linear() {
        return Err(Error::InvalidParameter("input tester is not linear".into()));
    }
    let input = input_summary(code, tester, mu)?;
    let sub = VecSpace { field: delta.field, dim: c };
    let sub_alpha = Alphabet::vector(sub)?;
    let target = Alphabet::vector(delta)?;
    let sigma_size = code.alphabet.size() as usize;

    let replaced = linear_separable_replacement(tester, mu, sub)?;
    let mu1 = &(&Rational::integer(c as i64) * mu) / &Rational::integer((q * sigma.dim + c) as i64);
    let separable = separable_soundness(&replaced.tester, code, &mu1, opts)?;

    let encoder = compatibility_encoder(code.alphabet, sub_alpha, true, opts.budget)?;
    let k = encoder.k();
    let witness = check_f_compatible(&replaced.tester, &encoder)?
        .witness()
        .ok_or_else(|| Error::InvalidParameter("separable tester is not compatible with the Hadamard encoder".into()))?;
    let inner_q = if c > 1 { 2 } else { 3 };
    let inner_code = encoder.image()?;
    let inner_tester = dependence_tester(&encoder.family, inner_q, opts.budget)?.tester;
    let nu_bound = Rational::one() / Rational::integer(k as i64).pow(inner_q as i32);
    let (nu_report, nu) = inner_soundness(&inner_tester, &inner_code, &nu_bound, opts, || {
        downscale_hint(c, |c2| word_space(Alphabet::vector(VecSpace { field: delta.field, dim: c2 }).unwrap(), sigma_size.pow(c2 as u32)), opts.budget)
    })?;

    let concat_code = concatenate(code, &encoder)?;
    let ct = concat_tester(&replaced.tester, &mu1, &inner_tester, &nu, &encoder, &witness)?;
    let mu2 = ct.weights.bound.clone();
    let injection = prefix_injection(sub_alpha, target)?;
    let inc = alphabet_increase_tester(&ct.tester, &concat_code, &mu2, target, &injection)?;
    let final_code = inc.code.clone();
    let final_tester = inc.tester.clone();

    let f = delta.field.p() as i64;
    let promised_distance = &(Rational::one() - Rational::one() / Rational::integer(f).pow(c as i32)) * &input.distance;
    let sigma_c = sigma_size.pow(c as u32);
    let promised = Promised {
        distance: promised_distance,
        rate: input.rate.scale(&r(sigma.dim, d * sigma_c)),
        rate_stated: input.rate.scale(&r(c * sigma.dim, d * sigma_c)),
        soundness: inc.bound.clone(),
        nu_bound,
    };
    let soundness = soundness_auto(&final_tester, &final_code, promised.soundness.clone(), opts)?;
    let linear = is_linear_code(&final_code)?.is_some() && classify_linear(&final_tester)?.is_linear();
    let achieved_rate = rate(&final_code);
    let achieved = Achieved {
        distance: distance(&final_code),
        inner_distance: distance(&inner_code),
        rate_matches_stated: achieved_rate == promised.rate_stated,
        rate: achieved_rate,
        nu: Some(nu_report),
        separable_soundness: separable,
        final_validates: validate(&final_tester, &final_code)?.is_ok(),
        soundness,
        linear: Some(linear),
    };
    finish(PipelineKind::Linear, input, Parameters { q, c, target, k, inner_q }, Stages {
        separable_tester: replaced.tester,
        separable_mu: mu1,
        encoder,
        witness,
        inner_code,
        inner_tester,
        concat_code,
        concat_tester: ct.tester,
        concat_mu: mu2,
        final_code,
        final_tester,
    }, promised, achieved)
}

fn finish(
    pipeline: PipelineKind,
    input: PipelineInput,
    parameters: Parameters,
    stages: Stages,
    promised: Promised,
    achieved: Achieved,
) -> Result<PipelineReport> {
    let mut report = PipelineReport {
        pipeline,
        input,
        parameters,
        stages,
        promised,
        achieved,
        certification: Certification { items: Vec::new(), verdict: Verdict::Fail },
    };
    report.certification = certify(&report)?;
    Ok(report)
}

/// Largest smaller `c` whose inner word space fits the budget.
fn downscale_hint(c: usize, space: impl Fn(usize) -> u128, budget: Budget) -> String {
    (1..c)
        .rev()
        .find(|&c2| space(c2) <= budget.0 as u128)
        .map_or("no smaller c fits".to_string(), |c2| format!("largest feasible downscaling is c = {c2}"))
}

/// Reduction of an arbitrary code to a `d`-letter alphabet through the long
/// code `L(Σ, {0..c-1})`.
pub fn general_reduction(
    code: &Code,
    tester: &Tester,
    mu: &Rational,
    d: u32,
    c: u32,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    require_positive(mu)?;
    let q = tester.q;
    if c < 2 || c > d {
        return Err(Error::InvalidParameter(format!("c must lie in 2..={d}")));
    }
    if q < 2 || (c == 2 && q < 3) {
        return Err(Error::InvalidParameter(format!("q = {q} is too small for c = {c}")));
    }
    let input = input_summary(code, tester, mu)?;
    let sub = Alphabet::plain(c)?;
    let target = Alphabet::plain(d)?;
    let sigma_size = code.alphabet.size() as usize;

    let replaced = separable_replacement(tester, mu, c)?;
    let mu1 = replaced.bound.clone();
    let separable = separable_soundness(&replaced.tester, code, &mu1, opts)?;

    let encoder = compatibility_encoder(code.alphabet, sub, false, opts.budget)?;
    let k = encoder.k();
    let witness = check_f_compatible(&replaced.tester, &encoder)?
        .witness()
        .ok_or_else(|| Error::InvalidParameter("separable tester is not compatible with the long-code encoder".into()))?;
    let inner_q = if c > 2 { 2 } else { 3 };
    let inner_code = encoder.image()?;
    let inner_tester = dependence_tester(&encoder.family, inner_q, opts.budget)?.tester;
    let nu_bound = Rational::one() / Rational::integer(k as i64).pow(inner_q as i32);
    let (nu_report, nu) = inner_soundness(&inner_tester, &inner_code, &nu_bound, opts, || {
        downscale_hint(c as usize, |c2| word_space(Alphabet::Plain(c2 as u32), c2.pow(sigma_size as u32)), opts.budget)
    })?;

    let concat_code = concatenate(code, &encoder)?;
    let ct = concat_tester(&replaced.tester, &mu1, &inner_tester, &nu, &encoder, &witness)?;
    let mu2 = ct.weights.bound.clone();
    let inc = alphabet_increase_tester(&ct.tester, &concat_code, &mu2, target, &prefix_injection(sub, target)?)?;
    let final_code = inc.code.clone();
    let final_tester = inc.tester.clone();

    let stated = input.rate.mul(&Rate::log_ratio(sigma_size as u64, d as u64)).scale(&r(1, k));
    let promised = Promised {
        distance: &(Rational::one() - Rational::new(1, c as i64)) * &input.distance,
        rate: stated.clone(),
        rate_stated: stated,
        soundness: inc.bound.clone(),
        nu_bound,
    };
    let soundness = soundness_auto(&final_tester, &final_code, promised.soundness.clone(), opts)?;
    let achieved_rate = rate(&final_code);
    let achieved = Achieved {
        distance: distance(&final_code),
        inner_distance: distance(&inner_code),
        rate_matches_stated: achieved_rate == promised.rate_stated,
        rate: achieved_rate,
        nu: Some(nu_report),
        separable_soundness: separable,
        final_validates: validate(&final_tester, &final_code)?.is_ok(),
        soundness,
        linear: None,
    };
    finish(PipelineKind::General, input, Parameters { q, c: c as usize, target, k, inner_q }, Stages {
        separable_tester: replaced.tester,
        separable_mu: mu1,
        encoder,
        witness,
        inner_code,
        inner_tester,
        concat_code,
        concat_tester: ct.tester,
        concat_mu: mu2,
        final_code,
        final_tester,
    }, promised, achieved)
}

/// Reduction of a binary-linear code to `{0,1,2}` through the critical family
/// derived from all linear functionals `Σ -> GF(2)`.
pub fn semilinear_reduction(code: &Code, tester: &Tester, mu: &Rational, opts: &PipelineOptions) -> Result<PipelineReport> {
    require_positive(mu)?;
    let sigma = code.alphabet.require_space()?;
    if sigma.p() != 2 {
        return Err(Error::FieldMismatch(sigma.p(), 2));
    }
    if is_linear_code(code)?.is_none() {
        return Err(Error::InvalidParameter("input code is not linear".into()));
    }
    if !classify_linear(tester)?.is_linear() {
        return Err(Error::InvalidParameter("input tester is not linear".into()));
    }
    let q = tester.q;
    let input = input_summary(code, tester, mu)?;
    let gf2 = VecSpace::new(2, 1)?;
    let target = Alphabet::plain(3)?;
    let t = code.alphabet.size() as usize;
    let k = t + 2 * t * t;

    let replaced = linear_separable_replacement(tester, mu, gf2)?;
    let mu1 = mu / &Rational::integer((q * sigma.dim) as i64);
    let separable = separable_soundness(&replaced.tester, code, &mu1, opts)?;

    let functionals = compatibility_encoder(code.alphabet, Alphabet::vector(gf2)?, true, opts.budget)?;
    let lin_witness = check_f_compatible(&replaced.tester, &functionals)?
        .witness()
        .ok_or_else(|| Error::InvalidParameter("separable tester is not compatible with the functionals".into()))?;
    let binary = FunctionFamily::new(t as u32, Alphabet::plain(2)?, functionals.family.tables.clone())?;
    let mut family = critical_family(&binary)?;
    family.tables.resize(k, vec![0; t]);
    let encoder = Encoder::new(family);
    let witness = extend_compatibility(&lin_witness, &functionals, &encoder)?;
    let inner_code = encoder.image()?;
    let inner_tester = dependence_tester(&encoder.family, 2, opts.budget)?.tester;
    let nu_bound = Rational::one() / Rational::integer(k as i64).pow(2);
    let (nu_report, nu) =
        inner_soundness(&inner_tester, &inner_code, &nu_bound, opts, || "the inner code has no size parameter".into())?;

    let concat_code = concatenate(code, &encoder)?;
    let ct = concat_tester(&replaced.tester, &mu1, &inner_tester, &nu, &encoder, &witness)?;
    let mu2 = ct.weights.bound.clone();
    let final_code = concat_code.clone();
    let final_tester = ct.tester.clone();

    let stated = input.rate.mul(&Rate::log_ratio(t as u64, 3)).scale(&r(1, k));
    let soundness_formula = {
        let (qq, tt) = (q as i64, t as i64);
        let a = Rational::integer(2 * qq * tt * tt + qq * tt + 1);
        let b = Rational::integer(qq * sigma.dim as i64);
        &(mu * &nu) / &(&(&a * mu) + &(&b * &nu))
    };
    debug_assert_eq!(soundness_formula, mu2);
    let promised = Promised {
        distance: &input.distance / &Rational::integer(k as i64),
        rate: stated.clone(),
        rate_stated: stated,
        soundness: soundness_formula,
        nu_bound,
    };
    let soundness = soundness_auto(&final_tester, &final_code, promised.soundness.clone(), opts)?;
    let achieved_rate = rate(&final_code);
    let achieved = Achieved {
        distance: distance(&final_code),
        inner_distance: distance(&inner_code),
        rate_matches_stated: achieved_rate == promised.rate_stated,
        rate: achieved_rate,
        nu: Some(nu_report),
        separable_soundness: separable,
        final_validates: validate(&final_tester, &final_code)?.is_ok(),
        soundness,
        linear: None,
    };
    finish(PipelineKind::Semilinear, input, Parameters { q, c: 3, target, k, inner_q: 2 }, Stages {
        separable_tester: replaced.tester,
        separable_mu: mu1,
        encoder,
        witness,
        inner_code,
        inner_tester,
        concat_code,
        concat_tester: ct.tester,
        concat_mu: mu2,
        final_code,
        final_tester,
    }, promised, achieved)
}

/// Repetition code `{00, 11}` with its equality tester and exact soundness.
pub fn demo_input(alphabet: Alphabet) -> Result<(Code, Tester, Rational)> {
    let code = Code::new(alphabet, 2, vec![Word(vec![0, 0]), Word(vec![1, 1])])?;
    let tester = equality_tester(alphabet, 2)?;
    let mu = soundness_exact(&tester, &code, Budget::DEFAULT)?
        .value
        .finite()
        .cloned()
        .ok_or(Error::IncompleteReport("input soundness"))?;
    Ok((code, tester, mu))
}

pub fn linear_demo(opts: &PipelineOptions) -> Result<PipelineReport> {
    let (code, tester, mu) = demo_input(Alphabet::vector(VecSpace::new(2, 1)?)?)?;
    linear_reduction(&code, &tester, &mu, VecSpace::new(2, 2)?, 2, opts)
}

pub fn general_demo(opts: &PipelineOptions) -> Result<PipelineReport> {
    let (code, tester, mu) = demo_input(Alphabet::plain(2)?)?;
    general_reduction(&code, &tester, &mu, 3, 3, opts)
}

pub fn semilinear_demo(opts: &PipelineOptions) -> Result<PipelineReport> {
    let (code, tester, mu) = demo_input(Alphabet::vector(VecSpace::new(2, 1)?)?)?;
    semilinear_reduction(&code, &tester, &mu, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_demo_passes_exactly() {
        let rep = linear_demo(&PipelineOptions::default()).unwrap();
        assert_eq!(rep.parameters.k, 4);
        assert_eq!(rep.stages.final_code.n, 8);
        assert_eq!(rep.promised.distance, Rational::new(3, 4));
        assert_eq!(rep.achieved.rate.as_rational(), Some(Rational::new(1, 16)));
        assert_eq!(rep.promised.rate_stated.as_rational(), Some(Rational::new(1, 8)));
        assert!(!rep.achieved.rate_matches_stated);
        assert_eq!(rep.certification.verdict, Verdict::Pass, "{:?}", rep.certification);
    }

    #[test]
    fn parameter_guards() {
        let (code, tester, mu) = demo_input(Alphabet::vector(VecSpace::new(2, 1).unwrap()).unwrap()).unwrap();
        let opts = PipelineOptions::default();
        assert!(linear_reduction(&code, &tester, &mu, VecSpace::new(2, 2).unwrap(), 1, &opts).is_err());
        let (code, tester, mu) = demo_input(Alphabet::plain(2).unwrap()).unwrap();
        assert!(general_reduction(&code, &tester, &mu, 2, 2, &opts).is_err());
        let missing = {
            let mut rep = linear_demo(&opts).unwrap();
            rep.achieved.nu = None;
            certify(&rep)
        };
        assert_eq!(missing, Err(Error::IncompleteReport("nu")));
    }
}
