//! Exact code rates.
//!
//! The rate `log_{|Σ|^n} |C|` is rarely rational, so it is stored
//! symbolically as `coeff * Π ln(b)^e` over integers `b` that are not perfect
//! powers. Products of rates (as in concatenation) cancel exactly, and
//! comparisons against rationals reduce to integer power comparisons.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RateRepr", from = "RateRepr")]
pub struct Rate {
    coeff: Rational,
    /// Base -> exponent of `ln(base)`. Bases are >= 2 and not perfect powers.
    logs: BTreeMap<u64, i32>,
}

/// Serialized form: `logs` is a list of `[base, exponent]` pairs.
#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateRepr {
    coeff: Rational,
    logs: Vec<(u64, i32)>,
}

impl From<Rate> for RateRepr {
    fn from(r: Rate) -> Self {
        RateRepr { coeff: r.coeff, logs: r.logs.into_iter().collect() }
    }
}

impl From<RateRepr> for Rate {
    fn from(r: RateRepr) -> Self {
        let mut rate = Rate { coeff: r.coeff, logs: BTreeMap::new() };
        for (b, e) in r.logs {
            if b >= 1 {
                rate.push_log(b, e);
            }
        }
        rate.normalized()
    }
}

/// Writes `b = root^e` with `e` maximal.
fn perfect_power(b: u64) -> (u64, u32) {
    debug_assert!(b >= 2);
    for e in (2..=63u32).rev() {
        let approx = (b as f64).powf(1.0 / e as f64).round() as u64;
        for r in approx.saturating_sub(1)..=approx + 1 {
            if r >= 2 && r.checked_pow(e) == Some(b) {
                return (r, e);
            }
        }
    }
    (b, 1)
}

impl Rate {
    pub fn zero() -> Self {
        Rate { coeff: Rational::zero(), logs: BTreeMap::new() }
    }

    pub fn rational(r: Rational) -> Self {
        Rate { coeff: r, logs: BTreeMap::new() }.normalized()
    }

    /// `ln(num) / ln(den)`, i.e. `log_den(num)`.
    pub fn log_ratio(num: u64, den: u64) -> Self {
        assert!(num >= 1 && den >= 2, "log_ratio({num}, {den})");
        let mut r = Rate { coeff: Rational::one(), logs: BTreeMap::new() };
        r.push_log(num, 1);
        r.push_log(den, -1);
        r.normalized()
    }

    /// Rate of a code with `size` codewords in `alphabet^n`.
    pub fn of_code(size: u64, n: usize, alphabet: u64) -> Self {
        let mut r = Rate::log_ratio(size, alphabet);
        r.coeff = &r.coeff / &Rational::integer(n as i64);
        r.normalized()
    }

    fn push_log(&mut self, base: u64, exp: i32) {
        if base == 1 {
            // ln 1 = 0
            if exp > 0 {
                self.coeff = Rational::zero();
            }
            return;
        }
        let (root, e) = perfect_power(base);
        self.coeff = &self.coeff * &Rational::integer(e as i64).pow(exp);
        *self.logs.entry(root).or_insert(0) += exp;
    }

    fn normalized(mut self) -> Self {
        if self.coeff.is_zero() {
            self.logs.clear();
        }
        self.logs.retain(|_, e| *e != 0);
        self
    }

    pub fn scale(&self, r: &Rational) -> Rate {
        Rate { coeff: &self.coeff * r, logs: self.logs.clone() }.normalized()
    }

    pub fn mul(&self, other: &Rate) -> Rate {
        let mut logs = self.logs.clone();
        for (b, e) in &other.logs {
            *logs.entry(*b).or_insert(0) += e;
        }
        Rate { coeff: &self.coeff * &other.coeff, logs }.normalized()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.logs.is_empty().then(|| self.coeff.clone())
    }

    /// Exact comparison with a rational when the rate is rational or a single
    /// `c * ln a / ln b` ratio; `None` otherwise.
    pub fn cmp_rational(&self, r: &Rational) -> Option<Ordering> {
        if let Some(x) = self.as_rational() {
            return Some(x.cmp(r));
        }
        let (a, b) = match self.logs.iter().collect::<Vec<_>>().as_slice() {
            [(&b1, &1), (&b2, &-1)] => (b1, b2),
            [(&b2, &-1), (&b1, &1)] => (b1, b2),
            _ => return None,
        };
        // coeff * ln a / ln b  vs  r   (ln a, ln b > 0)
        if !self.coeff.is_positive() || !r.is_positive() {
            let lhs_sign = if self.coeff.is_positive() { 1 } else { -1 };
            let rhs_sign = if r.is_positive() { 1 } else if r.is_zero() { 0 } else { -1 };
            return Some(lhs_sign.cmp(&rhs_sign));
        }
        // ln a / ln b  vs  x/y  where x/y = r / coeff  ==>  a^y vs b^x
        let target = r / &self.coeff;
        let x = target.numer().abs().to_u32()?;
        let y = target.denom().to_u32()?;
        if (x as u64 + y as u64) > 4096 {
            return None;
        }
        let lhs = BigUint::from(a).pow(y);
        let rhs = BigUint::from(b).pow(x);
        Some(lhs.cmp(&rhs))
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        for (b, e) in &self.logs {
            if *e == 1 {
                write!(f, "*ln{b}")?;
            } else {
                write!(f, "*ln{b}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
