//! Exact arithmetic in Q(i, √m).
//!
//! An [`ExactScalar`] stores `a + b·i + c·√m + d·i·√m` with four reduced
//! big rationals and the radicand `m` carried as a per-value tag. Values with
//! different radicands never mix: the `checked_*` methods return
//! [`Error::RadicandMismatch`] and the operator impls panic.
//!
//! `m = 1` is allowed and collapses to the Gaussian rationals (the radical
//! parts are folded into `a` and `b` on construction). Any other perfect
//! square is rejected, so that component-wise equality is value equality.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    Rational::from_str(text.trim()).map_err(|e| Error::Parse(format!("bad rational '{text}': {e}")))
}

/// Canonical textual form: `"p/q"`, or `"p"` when `q = 1`.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

fn rational_to_f64(value: &Rational) -> f64 {
    if let Some(v) = value.to_f64() {
        return v;
    }
    value.numer().to_f64().unwrap_or(f64::NAN) / value.denom().to_f64().unwrap_or(f64::NAN)
}

/// Checks that `m` can be used as a radicand.
pub fn validate_radicand(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidRadicand(m));
    }
    let root = m.sqrt();
    if m > 1 && root * root == m {
        return Err(Error::InvalidRadicand(m));
    }
    Ok(())
}

#[inline]
fn term(x: &Rational, y: &Rational) -> Option<Rational> {
    if x.is_zero() || y.is_zero() {
        None
    } else {
        Some(x * y)
    }
}

fn sum_terms<const N: usize>(terms: [Option<Rational>; N]) -> Rational {
    let mut acc: Option<Rational> = None;
    for t in terms.into_iter().flatten() {
        acc = Some(match acc {
            None => t,
            Some(a) => a + t,
        });
    }
    acc.unwrap_or_else(Rational::zero)
}

/// An element `a + b·i + c·√m + d·i·√m` of Q(i, √m).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    a: Rational,
    b: Rational,
    c: Rational,
    d: Rational,
    radicand: u64,
}

impl ExactScalar {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational, radicand: u64) -> Result<Self> {
        validate_radicand(radicand)?;
        Ok(Self::assemble(a, b, c, d, radicand))
    }

    // radicand must already be validated
    fn assemble(a: Rational, b: Rational, c: Rational, d: Rational, radicand: u64) -> Self {
        if radicand == 1 {
            let a = if c.is_zero() { a } else { a + c };
            let b = if d.is_zero() { b } else { b + d };
            Self { a, b, c: Rational::zero(), d: Rational::zero(), radicand }
        } else {
            Self { a, b, c, d, radicand }
        }
    }

    pub fn zero(radicand: u64) -> Self {
        Self::from_rational(Rational::zero(), radicand)
    }

    pub fn one(radicand: u64) -> Self {
        Self::from_rational(Rational::one(), radicand)
    }

    /// The imaginary unit.
    pub fn i(radicand: u64) -> Self {
        Self::gaussian(Rational::zero(), Rational::one(), radicand)
    }

    /// `√m` itself (equal to 1 when `m = 1`).
    pub fn sqrt_radicand(radicand: u64) -> Self {
        Self::surd(Rational::zero(), Rational::one(), radicand)
    }

    pub fn from_rational(value: Rational, radicand: u64) -> Self {
        Self::gaussian(value, Rational::zero(), radicand)
    }

    pub fn from_int(value: i64, radicand: u64) -> Self {
        Self::from_rational(Rational::from_integer(value.into()), radicand)
    }

    pub fn gaussian(re: Rational, im: Rational, radicand: u64) -> Self {
        validate_radicand(radicand).expect("invalid radicand");
        Self::assemble(re, im, Rational::zero(), Rational::zero(), radicand)
    }

    /// `rational + coeff·√m`.
    pub fn surd(rational: Rational, coeff: Rational, radicand: u64) -> Self {
        validate_radicand(radicand).expect("invalid radicand");
        Self::assemble(rational, Rational::zero(), coeff, Rational::zero(), radicand)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }
    pub fn b(&self) -> &Rational {
        &self.b
    }
    pub fn c(&self) -> &Rational {
        &self.c
    }
    pub fn d(&self) -> &Rational {
        &self.d
    }
    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.b.is_zero() && self.d.is_zero()
    }

    /// True when the value lies in Q(i), i.e. has no radical part.
    pub fn is_gaussian(&self) -> bool {
        self.c.is_zero() && self.d.is_zero()
    }

    /// Re-tags a Gaussian-rational value into Q(i, √m). Values with a
    /// radical part can only be re-tagged to their own radicand.
    pub fn embed(&self, radicand: u64) -> Result<Self> {
        validate_radicand(radicand)?;
        if radicand == self.radicand {
            return Ok(self.clone());
        }
        if !self.is_gaussian() {
            return Err(Error::RadicandMismatch(self.radicand, radicand));
        }
        Ok(Self::assemble(self.a.clone(), self.b.clone(), Rational::zero(), Rational::zero(), radicand))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.radicand != other.radicand {
            Err(Error::RadicandMismatch(self.radicand, other.radicand))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(&other.neg_ref()))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(&other.inv()?))
    }

    fn add_unchecked(&self, y: &Self) -> Self {
        Self { a: &self.a + &y.a, b: &self.b + &y.b, c: &self.c + &y.c, d: &self.d + &y.d, radicand: self.radicand }
    }

    fn mul_unchecked(&self, y: &Self) -> Self {
        let x = self;
        if x.is_gaussian() && y.is_gaussian() {
            return Self {
                a: sum_terms([term(&x.a, &y.a), term(&x.b, &y.b).map(|t| -t)]),
                b: sum_terms([term(&x.a, &y.b), term(&x.b, &y.a)]),
                c: Rational::zero(),
                d: Rational::zero(),
                radicand: x.radicand,
            };
        }
        let m = Rational::from_integer(BigInt::from(x.radicand));
        let radical_real = sum_terms([term(&x.c, &y.c), term(&x.d, &y.d).map(|t| -t)]);
        let radical_imag = sum_terms([term(&x.c, &y.d), term(&x.d, &y.c)]);
        Self {
            a: sum_terms([term(&x.a, &y.a), term(&x.b, &y.b).map(|t| -t), term(&m, &radical_real)]),
            b: sum_terms([term(&x.a, &y.b), term(&x.b, &y.a), term(&m, &radical_imag)]),
            c: sum_terms([
                term(&x.a, &y.c),
                term(&x.c, &y.a),
                term(&x.b, &y.d).map(|t| -t),
                term(&x.d, &y.b).map(|t| -t),
            ]),
            d: sum_terms([term(&x.a, &y.d), term(&x.d, &y.a), term(&x.b, &y.c), term(&x.c, &y.b)]),
            radicand: x.radicand,
        }
    }

    fn neg_ref(&self) -> Self {
        Self { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d, radicand: self.radicand }
    }

    /// Complex conjugate (`i → -i`, `√m` fixed).
    pub fn conj(&self) -> Self {
        Self { a: self.a.clone(), b: -&self.b, c: self.c.clone(), d: -&self.d, radicand: self.radicand }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        Self { a: -&self.b, b: self.a.clone(), c: -&self.d, d: self.c.clone(), radicand: self.radicand }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self {
            a: &self.a * factor,
            b: &self.b * factor,
            c: &self.c * factor,
            d: &self.d * factor,
            radicand: self.radicand,
        }
    }

    /// Multiplicative inverse.
    ///
    /// Writing `x = P + Q√m` with `P, Q` Gaussian rationals, multiplying by the
    /// radical conjugate gives `P² − mQ²`, and multiplying that by its complex
    /// conjugate leaves a positive rational.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let m = self.radicand;
        let radical_conj = Self { a: self.a.clone(), b: self.b.clone(), c: -&self.c, d: -&self.d, radicand: m };
        let gauss = self.mul_unchecked(&radical_conj);
        debug_assert!(gauss.is_gaussian());
        let norm = &gauss.a * &gauss.a + &gauss.b * &gauss.b;
        if norm.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let numerator = radical_conj.mul_unchecked(&gauss.conj());
        Ok(numerator.scale(&norm.recip()))
    }

    /// Squared modulus `|x|²`, an element of Q(√m) returned as a real scalar.
    pub fn norm_sqr(&self) -> Self {
        self.conj().mul_unchecked(self)
    }

    pub fn to_complex(&self) -> Complex64 {
        let root = (self.radicand as f64).sqrt();
        Complex64::new(
            rational_to_f64(&self.a) + rational_to_f64(&self.c) * root,
            rational_to_f64(&self.b) + rational_to_f64(&self.d) * root,
        )
    }

    /// Sign of a real scalar: `-1`, `0` or `1`. `None` for non-real values.
    pub fn real_sign(&self) -> Option<i32> {
        if !self.is_real() {
            return None;
        }
        // a + c√m: compare a² with c²m when the signs disagree
        let sa = sign_of(&self.a);
        let sc = sign_of(&self.c);
        if sc == 0 || sa == sc {
            return Some(if sa == 0 { sc } else { sa });
        }
        if sa == 0 {
            return Some(sc);
        }
        let lhs = &self.a * &self.a;
        let rhs = &self.c * &self.c * Rational::from_integer(BigInt::from(self.radicand));
        Some(match lhs.cmp(&rhs) {
            std::cmp::Ordering::Greater => sa,
            std::cmp::Ordering::Less => sc,
            std::cmp::Ordering::Equal => 0,
        })
    }

    /// Parses the display form, e.g. `"3/2"`, `"-i"`, `"1 + 1/28*sqrt(28)"`.
    pub fn parse(text: &str, radicand: u64) -> Result<Self> {
        validate_radicand(radicand)?;
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        let mut parts = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
        let mut start = 0;
        let bytes = compact.as_bytes();
        let mut depth = 0;
        for idx in 0..=bytes.len() {
            let split = idx == bytes.len()
                || (idx > start && depth == 0 && (bytes[idx] == b'+' || bytes[idx] == b'-') && bytes[idx - 1] != b'*');
            if idx < bytes.len() {
                match bytes[idx] {
                    b'(' => depth += 1,
                    b')' => depth -= 1,
                    _ => {}
                }
            }
            if split {
                let (slot, value) = parse_term(&compact[start..idx], radicand)?;
                parts[slot] += value;
                start = idx;
            }
        }
        let [a, b, c, d] = parts;
        Ok(Self::assemble(a, b, c, d, radicand))
    }
}

fn sign_of(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

// Returns the component slot (0=a, 1=b, 2=c, 3=d) and its coefficient.
fn parse_term(term: &str, radicand: u64) -> Result<(usize, Rational)> {
    let (negative, body) = match term.as_bytes().first() {
        Some(b'-') => (true, &term[1..]),
        Some(b'+') => (false, &term[1..]),
        _ => (false, term),
    };
    if body.is_empty() {
        return Err(Error::Parse(format!("empty term in '{term}'")));
    }
    let mut coeff = Rational::one();
    let mut imaginary = false;
    let mut radical = false;
    for factor in body.split('*') {
        if factor == "i" {
            if imaginary {
                return Err(Error::Parse(format!("repeated i in '{term}'")));
            }
            imaginary = true;
        } else if let Some(inner) = factor.strip_prefix("sqrt(").and_then(|f| f.strip_suffix(')')) {
            let m: u64 = inner.parse().map_err(|_| Error::Parse(format!("bad radical '{factor}'")))?;
            if m != radicand {
                return Err(Error::RadicandMismatch(m, radicand));
            }
            if radical {
                return Err(Error::Parse(format!("repeated radical in '{term}'")));
            }
            radical = true;
        } else {
            coeff *= parse_rational(factor)?;
        }
    }
    if negative {
        coeff = -coeff;
    }
    let slot = match (imaginary, radical) {
        (false, false) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (true, true) => 3,
    };
    Ok((slot, coeff))
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let radical = format!("sqrt({})", self.radicand);
        let units = ["".to_string(), "i".to_string(), radical.clone(), format!("i*{radical}")];
        let mut first = true;
        for (value, unit) in [&self.a, &self.b, &self.c, &self.d].into_iter().zip(units.iter()) {
            if value.is_zero() {
                continue;
            }
            let magnitude = value.abs();
            let body = if unit.is_empty() {
                format_rational(&magnitude)
            } else if magnitude.is_one() {
                unit.clone()
            } else {
                format!("{}*{}", format_rational(&magnitude), unit)
            };
            match (first, value.is_negative()) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        self.neg_ref()
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        self.neg_ref()
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            /// Panics on a radicand mismatch; use the `checked_*` form to get an error.
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &ExactScalar) -> ExactScalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

/// Serialized form: four rational strings plus the radicand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarRepr {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub radicand: u64,
}

impl From<&ExactScalar> for ScalarRepr {
    fn from(x: &ExactScalar) -> Self {
        Self {
            a: format_rational(&x.a),
            b: format_rational(&x.b),
            c: format_rational(&x.c),
            d: format_rational(&x.d),
            radicand: x.radicand,
        }
    }
}

impl TryFrom<ScalarRepr> for ExactScalar {
    type Error = Error;
    fn try_from(repr: ScalarRepr) -> Result<Self> {
        ExactScalar::new(
            parse_rational(&repr.a)?,
            parse_rational(&repr.b)?,
            parse_rational(&repr.c)?,
            parse_rational(&repr.d)?,
            repr.radicand,
        )
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ScalarRepr::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ScalarRepr::deserialize(deserializer)?;
        ExactScalar::try_from(repr).map_err(serde::de::Error::custom)
    }
}
