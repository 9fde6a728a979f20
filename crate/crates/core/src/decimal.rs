//! Exact decimal arithmetic for rule values.
//!
//! Boundary generation at large financial magnitudes must be exact: `99999`
//! and `100000 - 1` have to be the same value, and `0.01` steps must not pick
//! up binary noise. Values are stored as an arbitrary-precision integer
//! mantissa plus a decimal scale and normalized so that equal numbers have
//! one representation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// An exact decimal number: `mant * 10^(-scale)`.
#[derive(Clone, Debug)]
pub struct Decimal {
    mant: BigInt,
    scale: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecimalParseError {
    #[error("empty number literal")]
    Empty,
    #[error("invalid digit {0:?} in number literal")]
    InvalidDigit(char),
    #[error("malformed number literal {0:?}")]
    Malformed(String),
}

impl Decimal {
    pub fn zero() -> Self {
        Decimal { mant: BigInt::zero(), scale: 0 }
    }

    pub fn one() -> Self {
        Decimal::from(1)
    }

    pub fn new(mant: BigInt, scale: u32) -> Self {
        let mut d = Decimal { mant, scale };
        d.normalize();
        d
    }

    /// Drop trailing decimal zeros so equal values share one representation.
    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.scale = 0;
            return;
        }
        let ten = BigInt::from(10);
        while self.scale > 0 {
            let (q, r) = self.mant.div_rem(&ten);
            if r.is_zero() {
                self.mant = q;
                self.scale -= 1;
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// True when the value has no fractional part.
    pub fn is_integer(&self) -> bool {
        self.scale == 0
    }

    /// Number of digits after the decimal point in canonical form.
    pub fn fraction_digits(&self) -> u32 {
        self.scale
    }

    /// Both mantissas brought to a common scale.
    fn align(&self, other: &Decimal) -> (BigInt, BigInt, u32) {
        let scale = self.scale.max(other.scale);
        let a = &self.mant * pow10(scale - self.scale);
        let b = &other.mant * pow10(scale - other.scale);
        (a, b, scale)
    }

    /// Largest multiple of `step` (non-zero) at or below `self`, offset by `residue`.
    ///
    /// Returns `r + floor((self - r) / step) * step`, the greatest value `<= self`
    /// congruent to `residue` modulo `step`.
    pub fn floor_to_step(&self, step: &Decimal, residue: &Decimal) -> Decimal {
        assert!(!step.is_zero(), "step must be non-zero");
        let shifted = self.clone() - residue.clone();
        let (a, b, _) = shifted.align(step);
        let q = a.div_floor(&b);
        residue.clone() + Decimal::new(q, 0) * step.clone()
    }

    /// Smallest value `>= self` congruent to `residue` modulo `step`.
    pub fn ceil_to_step(&self, step: &Decimal, residue: &Decimal) -> Decimal {
        assert!(!step.is_zero(), "step must be non-zero");
        let shifted = self.clone() - residue.clone();
        let (a, b, _) = shifted.align(step);
        let q = a.div_ceil(&b);
        residue.clone() + Decimal::new(q, 0) * step.clone()
    }

    /// Remainder of `self` modulo `modulus`, in `[0, modulus)` for positive moduli.
    pub fn rem_floor(&self, modulus: &Decimal) -> Decimal {
        assert!(!modulus.is_zero(), "modulus must be non-zero");
        let (a, b, scale) = self.align(modulus);
        let r = a.mod_floor(&b);
        Decimal::new(r, scale)
    }

    pub fn abs(&self) -> Decimal {
        Decimal { mant: self.mant.abs(), scale: self.scale }
    }

    /// Approximate conversion for reporting; exact code paths never use this.
    pub fn to_f64_lossy(&self) -> f64 {
        self.mant.to_f64().unwrap_or(f64::NAN) / 10f64.powi(self.scale as i32)
    }
}

fn pow10(exp: u32) -> BigInt {
    BigInt::from(10).pow(exp)
}

impl From<i64> for Decimal {
    fn from(v: i64) -> Self {
        Decimal { mant: BigInt::from(v), scale: 0 }
    }
}

impl FromStr for Decimal {
    type Err = DecimalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(DecimalParseError::Empty);
        }
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        if body.is_empty() {
            return Err(DecimalParseError::Malformed(s.to_string()));
        }
        let mut digits = String::with_capacity(body.len());
        let mut scale: u32 = 0;
        let mut seen_point = false;
        for c in body.chars() {
            match c {
                '0'..='9' => {
                    digits.push(c);
                    if seen_point {
                        scale += 1;
                    }
                }
                '.' if !seen_point => {
                    seen_point = true;
                }
                // Thousands separators appear in regulatory prose ("1,000").
                ',' if !seen_point => {}
                other => return Err(DecimalParseError::InvalidDigit(other)),
            }
        }
        if digits.is_empty() || (seen_point && scale == 0 && !body.ends_with('.')) {
            return Err(DecimalParseError::Malformed(s.to_string()));
        }
        if seen_point && body.ends_with('.') {
            return Err(DecimalParseError::Malformed(s.to_string()));
        }
        let mut mant: BigInt = digits.parse().map_err(|_| DecimalParseError::Malformed(s.to_string()))?;
        if negative {
            mant = -mant;
        }
        Ok(Decimal::new(mant, scale))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mant);
        }
        let negative = self.mant.is_negative();
        let digits = self.mant.abs().to_string();
        let scale = self.scale as usize;
        let (int_part, frac_part) = if digits.len() > scale {
            let split = digits.len() - scale;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            ("0".to_string(), format!("{:0>width$}", digits, width = scale))
        };
        if negative {
            write!(f, "-{int_part}.{frac_part}")
        } else {
            write!(f, "{int_part}.{frac_part}")
        }
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        // Normalized representation is unique, so field equality suffices.
        self.scale == other.scale && self.mant == other.mant
    }
}

impl Eq for Decimal {}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.align(other);
        a.cmp(&b)
    }
}

impl std::hash::Hash for Decimal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.mant.hash(state);
        self.scale.hash(state);
    }
}

// Persisted as canonical text: exactness survives JSON and TOML.
impl serde::Serialize for Decimal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Decimal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for Decimal {
    type Output = Decimal;
    fn add(self, rhs: Decimal) -> Decimal {
        let (a, b, scale) = self.align(&rhs);
        Decimal::new(a + b, scale)
    }
}

impl Sub for Decimal {
    type Output = Decimal;
    fn sub(self, rhs: Decimal) -> Decimal {
        let (a, b, scale) = self.align(&rhs);
        Decimal::new(a - b, scale)
    }
}

impl Mul for Decimal {
    type Output = Decimal;
    fn mul(self, rhs: Decimal) -> Decimal {
        Decimal::new(self.mant * rhs.mant, self.scale + rhs.scale)
    }
}

impl Neg for Decimal {
    type Output = Decimal;
    fn neg(self) -> Decimal {
        Decimal { mant: -self.mant, scale: self.scale }
    }
}
