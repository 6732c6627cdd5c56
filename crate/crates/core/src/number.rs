//! Scalar types.
//!
//! Two coefficient fields are supported: exact Gaussian rationals
//! ([`Exact`]) and double precision complex numbers ([`Float`]). Input
//! quantities (critical value, frequencies, Taylor coefficients) are kept
//! as [`Real`], which remembers whether the value was given exactly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Gaussian rational `p + i q` with `p, q ∈ ℚ`.
pub type Exact = Complex<BigRational>;
/// Double precision complex number.
pub type Float = Complex64;

/// Relative threshold below which float coefficients are pruned.
pub const FLOAT_PRUNE_REL: f64 = 1e-14;

/// Coefficient field of a polynomial computation.
///
/// The mode is fixed per computation; mixing exact and float values is a
/// type error.
pub trait Coeff:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    const MODE: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn from_real(r: &Real) -> Self;
    fn is_zero(&self) -> bool;
    fn inv(&self) -> Option<Self>;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> Float;
    fn from_c64(v: Float) -> Option<Self>;
    /// `e^{iπk/4}`; exact mode only represents even `k`.
    fn eighth_root_of_unity(k: i64) -> Option<Self>;
    /// `u^{k/2}` for a positive real `u`; exact mode needs `k` even or `u` a square.
    fn half_power(u: &Real, k: i64) -> Option<Self>;
    /// True when the value should be dropped from a polynomial whose
    /// largest coefficient has modulus `scale`.
    fn negligible(&self, scale: f64) -> bool;
    fn to_strings(&self) -> (String, String);
    /// Real part as a [`Real`] of the same exactness.
    fn real_part(&self) -> Real;
    fn parse_parts(re: &str, im: &str) -> Result<Self>;

    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|inv| self.clone() * inv)
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// `i^k` for any integer `k`.
    fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::one(),
            1 => Self::i(),
            2 => -Self::one(),
            _ => -Self::i(),
        }
    }
}

impl Coeff for Exact {
    const EXACT: bool = true;
    const MODE: &'static str = "exact";

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }
    fn i() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from_integer(v.into()), BigRational::zero())
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }
    fn from_real(r: &Real) -> Self {
        Self::from_rational(&r.to_rational())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn inv(&self) -> Option<Self> {
        let den = &self.re * &self.re + &self.im * &self.im;
        if den.is_zero() {
            return None;
        }
        Some(Complex::new(&self.re / &den, -&self.im / &den))
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn to_c64(&self) -> Float {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn from_c64(v: Float) -> Option<Self> {
        Some(Complex::new(
            BigRational::from_float(v.re)?,
            BigRational::from_float(v.im)?,
        ))
    }
    fn eighth_root_of_unity(k: i64) -> Option<Self> {
        if k % 2 != 0 {
            return None;
        }
        Some(Self::i_pow(k / 2))
    }
    fn half_power(u: &Real, k: i64) -> Option<Self> {
        let mut base = u.to_rational();
        let mut k = k;
        if k % 2 != 0 {
            base = rational_sqrt(&base)?;
        } else {
            k /= 2;
        }
        if base.is_zero() {
            return None;
        }
        let e = i32::try_from(k).ok()?;
        Some(Self::from_rational(&num_traits::pow::Pow::pow(&base, e)))
    }
    fn negligible(&self, _scale: f64) -> bool {
        Coeff::is_zero(self)
    }
    fn to_strings(&self) -> (String, String) {
        (rational_to_string(&self.re), rational_to_string(&self.im))
    }
    fn real_part(&self) -> Real {
        Real::Exact(self.re.clone())
    }
    fn parse_parts(re: &str, im: &str) -> Result<Self> {
        Ok(Complex::new(parse_rational(re)?, parse_rational(im)?))
    }
}

impl Coeff for Float {
    const EXACT: bool = false;
    const MODE: &'static str = "float";

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_real(r: &Real) -> Self {
        Complex64::new(r.to_f64(), 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn inv(&self) -> Option<Self> {
        if Coeff::is_zero(self) {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> Float {
        *self
    }
    fn from_c64(v: Float) -> Option<Self> {
        Some(v)
    }
    fn eighth_root_of_unity(k: i64) -> Option<Self> {
        // Exact values for multiples of π/2 keep quadratic blocks diagonal.
        if k % 2 == 0 {
            return Some(Self::i_pow(k / 2));
        }
        Some(Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * k as f64))
    }
    fn half_power(u: &Real, k: i64) -> Option<Self> {
        let u = u.to_f64();
        if u <= 0.0 {
            return None;
        }
        if k % 2 == 0 {
            Some(Complex64::new(u.powi((k / 2) as i32), 0.0))
        } else {
            Some(Complex64::new(u.powf(k as f64 / 2.0), 0.0))
        }
    }
    fn negligible(&self, scale: f64) -> bool {
        Coeff::is_zero(self) || self.norm() <= FLOAT_PRUNE_REL * scale
    }
    fn to_strings(&self) -> (String, String) {
        (format!("{:?}", self.re), format!("{:?}", self.im))
    }
    fn real_part(&self) -> Real {
        Real::Float(self.re)
    }
    fn parse_parts(re: &str, im: &str) -> Result<Self> {
        Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?))
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Formats a rational as `"p"` or `"p/q"`.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let digits = digits / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

fn parse_f64(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.contains('/') {
        return parse_rational(t)?
            .to_f64()
            .ok_or_else(|| Error::Parse(format!("rational out of range: {t:?}")));
    }
    t.parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: {t:?}")))
}

/// A real input quantity, exact when it was given exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Exact(BigRational),
    Float(f64),
}

impl Real {
    pub fn zero() -> Self {
        Real::Exact(BigRational::zero())
    }

    pub fn int(v: i64) -> Self {
        Real::Exact(BigRational::from_integer(v.into()))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Real::Exact(BigRational::new(p.into(), q.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Real::Float(x) => *x,
        }
    }

    /// The rational value; floats convert to their exact binary value.
    pub fn to_rational(&self) -> BigRational {
        match self {
            Real::Exact(r) => r.clone(),
            Real::Float(x) => BigRational::from_float(*x).unwrap_or_else(BigRational::zero),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_zero(),
            Real::Float(x) => *x == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_positive(),
            Real::Float(x) => *x > 0.0,
        }
    }

    /// `|self − other|`, exact when both sides are.
    pub fn abs_diff(&self, other: &Real) -> Real {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact((a - b).abs()),
            _ => Real::Float((self.to_f64() - other.to_f64()).abs()),
        }
    }

    /// Parses exactly when the text is an integer, `p/q` or a decimal.
    pub fn parse(s: &str) -> Result<Self> {
        parse_rational(s).map(Real::Exact)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::String(s) => Real::parse(s),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Real::int(i))
                } else {
                    n.as_f64()
                        .map(Real::Float)
                        .ok_or_else(|| Error::Parse(format!("bad number {n}")))
                }
            }
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) => f.write_str(&rational_to_string(r)),
            Real::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::Float(x)
    }
}

impl From<i64> for Real {
    fn from(v: i64) -> Self {
        Real::int(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_strings_parse_exactly() {
        assert_eq!(parse_rational("0.2").unwrap(), BigRational::new(1.into(), 5.into()));
        assert_eq!(parse_rational("-1.5e-2").unwrap(), BigRational::new((-3).into(), 200.into()));
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("12").unwrap(), BigRational::from_integer(12.into()));
        assert_eq!(parse_rational(".5").unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn exact_powers_of_i() {
        assert_eq!(Exact::i_pow(2), -<Exact as Coeff>::one());
        assert_eq!(Exact::i_pow(-1), -Exact::i());
        assert_eq!(Exact::eighth_root_of_unity(4), Some(-<Exact as Coeff>::one()));
        assert_eq!(Exact::eighth_root_of_unity(1), None);
        let w = Float::eighth_root_of_unity(1).unwrap();
        assert!((w * w - Float::i()).norm() < 1e-15);
    }

    #[test]
    fn half_powers() {
        assert_eq!(Exact::half_power(&Real::int(4), 1), Some(Exact::from_i64(2)));
        assert_eq!(Exact::half_power(&Real::int(2), 1), None);
        let q = Exact::half_power(&Real::int(2), -2).unwrap();
        assert_eq!(q, Exact::from_rational(&BigRational::new(1.into(), 2.into())));
        let f = Float::half_power(&Real::int(2), 1).unwrap();
        assert!((f.re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_inverse() {
        let z = Exact::parse_parts("1", "1").unwrap();
        let w = Coeff::inv(&z).unwrap();
        assert_eq!(z * w, <Exact as Coeff>::one());
        assert!(Coeff::inv(&<Exact as Coeff>::zero()).is_none());
    }

    #[test]
    fn real_json_forms() {
        let v: serde_json::Value = serde_json::json!(["1/3", 2, 0.5]);
        let parsed: Vec<Real> = v.as_array().unwrap().iter().map(|x| Real::from_json(x).unwrap()).collect();
        assert_eq!(parsed[0], Real::ratio(1, 3));
        assert_eq!(parsed[1], Real::int(2));
        assert_eq!(parsed[2], Real::Float(0.5));
        assert_eq!(Real::ratio(1, 3).to_string(), "1/3");
    }
}
