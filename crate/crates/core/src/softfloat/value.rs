use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{rne_round, Dyadic, DyadicInt, ExactReal, FormatParams, SoftFloatError};

/// A normalized-or-zero binary floating-point value.
///
/// Nonzero values represent `(-1)^sign * (2^(p-1) + fraction) * 2^(exponent - (p-1))`.
/// Zeros keep their sign and carry the exponent `emin - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FloatVal {
    negative: bool,
    exponent: i64,
    fraction: u128,
    zero: bool,
}

impl FloatVal {
    pub fn new(
        negative: bool,
        exponent: i64,
        fraction: u128,
        fmt: &FormatParams,
    ) -> Result<Self, SoftFloatError> {
        if fmt.fraction_bits() < 128 && fraction >> fmt.fraction_bits() != 0 {
            return Err(SoftFloatError::InvalidValue(format!(
                "fraction {fraction:#b} wider than {} bits",
                fmt.fraction_bits()
            )));
        }
        if exponent < fmt.emin {
            return Err(SoftFloatError::InvalidValue(format!(
                "exponent {exponent} below emin {} (subnormals are not modelled)",
                fmt.emin
            )));
        }
        if let Some(emax) = fmt.emax {
            if exponent > emax {
                return Err(SoftFloatError::Overflow);
            }
        }
        Ok(Self {
            negative,
            exponent,
            fraction,
            zero: false,
        })
    }

    pub fn zero(negative: bool, fmt: &FormatParams) -> Self {
        Self {
            negative,
            exponent: fmt.zero_exponent(),
            fraction: 0,
            zero: true,
        }
    }

    pub fn pos_zero(fmt: &FormatParams) -> Self {
        Self::zero(false, fmt)
    }

    pub fn neg_zero(fmt: &FormatParams) -> Self {
        Self::zero(true, fmt)
    }

    /// `±2^exponent`.
    pub fn pow2(negative: bool, exponent: i64, fmt: &FormatParams) -> Result<Self, SoftFloatError> {
        Self::new(negative, exponent, 0, fmt)
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// 0 for `+`, 1 for `-`.
    pub fn sign_bit(&self) -> u8 {
        u8::from(self.negative)
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn fraction(&self) -> u128 {
        self.fraction
    }

    /// Integer significand including the implicit bit; zero for zero.
    pub fn significand(&self, fmt: &FormatParams) -> u128 {
        if self.zero {
            0
        } else {
            (1u128 << fmt.fraction_bits()) | self.fraction
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            negative: !self.negative,
            ..*self
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            negative: false,
            ..*self
        }
    }

    /// Multiply by `2^k`. Zeros are unchanged.
    pub fn scaled(&self, k: i64, fmt: &FormatParams) -> Result<Self, SoftFloatError> {
        if self.zero {
            return Ok(*self);
        }
        Self::new(self.negative, self.exponent + k, self.fraction, fmt)
    }

    /// Exact value as a dyadic rational over the chosen integer type.
    pub fn to_dyadic<I: DyadicInt>(&self, fmt: &FormatParams) -> Dyadic<I> {
        if self.zero {
            return Dyadic::zero();
        }
        let m = I::from_u128(self.significand(fmt));
        let m = if self.negative { -m } else { m };
        Dyadic::new(m, self.exponent - fmt.fraction_bits() as i64)
    }

    pub fn to_exact(&self, fmt: &FormatParams) -> ExactReal {
        self.to_dyadic::<BigInt>(fmt)
    }

    pub fn to_f64(&self, fmt: &FormatParams) -> f64 {
        let v = self.to_exact(fmt).to_f64();
        if self.zero && self.negative {
            -0.0
        } else {
            v
        }
    }

    /// Convert a native float, rounding to `fmt` if it has fewer bits.
    ///
    /// Subnormal, infinite and NaN inputs are rejected.
    pub fn from_native<F: num_traits::Float>(v: F, fmt: &FormatParams) -> Result<Self, SoftFloatError> {
        if v.is_nan() || v.is_infinite() {
            return Err(SoftFloatError::InvalidValue("non-finite native value".into()));
        }
        if v.is_zero() {
            return Ok(Self::zero(v.is_sign_negative(), fmt));
        }
        if !v.is_normal() {
            return Err(SoftFloatError::InvalidValue("subnormal native value".into()));
        }
        let (mantissa, exp, sign) = v.integer_decode();
        let m = BigInt::from(mantissa) * BigInt::from(sign);
        rne_round(&Dyadic::new(m, i64::from(exp)), fmt)
    }

    /// Render as `[-+]1.bbb_2 * 2^E`, `+0.0` or `-0.0`.
    pub fn to_literal(&self, fmt: &FormatParams) -> String {
        if self.zero {
            return if self.negative { "-0.0".into() } else { "+0.0".into() };
        }
        let mut out = String::new();
        out.push(if self.negative { '-' } else { '+' });
        out.push_str("1.");
        let w = fmt.fraction_bits();
        if w == 0 {
            out.push('0');
        }
        for i in (0..w).rev() {
            out.push(if (self.fraction >> i) & 1 == 1 { '1' } else { '0' });
        }
        let _ = write!(out, "_2 * 2^{}", self.exponent);
        out
    }

    /// Parse a literal. Accepted forms: `[-+]1.bbb_2 * 2^E`, `±0.0`,
    /// hexadecimal `0x1.8p-3`, and exact decimals such as `1`, `-0.375` or `3/8`.
    /// The value must be exactly representable in `fmt`.
    pub fn parse_literal(text: &str, fmt: &FormatParams) -> Result<Self, SoftFloatError> {
        let t = text.trim();
        let err = || SoftFloatError::InvalidLiteral(text.to_string());
        match t {
            "+0.0" | "0.0" | "+0" | "0" => return Ok(Self::pos_zero(fmt)),
            "-0.0" | "-0" => return Ok(Self::neg_zero(fmt)),
            _ => {}
        }
        let exact = if t.contains("_2") {
            parse_binary(t).ok_or_else(err)?
        } else if t.trim_start_matches(['+', '-']).starts_with("0x") {
            parse_hex(t).ok_or_else(err)?
        } else {
            ExactReal::parse_decimal(t).ok_or_else(err)?
        };
        let v = rne_round(&exact, fmt)?;
        if v.to_exact(fmt) != exact {
            return Err(SoftFloatError::Inexact(text.to_string()));
        }
        Ok(v)
    }
}

fn split_sign(t: &str) -> (bool, &str) {
    match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, t.strip_prefix('+').unwrap_or(t).trim_start()),
    }
}

/// `[-+]b.bbb_2 [* 2^E]`
fn parse_binary(t: &str) -> Option<ExactReal> {
    let (neg, rest) = split_sign(t);
    let (digits, exp) = match rest.split_once('*') {
        Some((d, e)) => {
            let e = e.trim().strip_prefix("2^")?.trim();
            let e = e.trim_start_matches('(').trim_end_matches(')');
            (d.trim(), e.parse::<i64>().ok()?)
        }
        None => (rest.trim(), 0),
    };
    let digits = digits.strip_suffix("_2")?;
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let mut m = BigInt::from(0);
    for c in int_part.chars().chain(frac_part.chars()) {
        m = m * 2
            + match c {
                '0' => 0,
                '1' => 1,
                _ => return None,
            };
    }
    let m = if neg { -m } else { m };
    Some(ExactReal::new(m, exp - frac_part.len() as i64))
}

/// `[-+]0xH.HHHp[+-]E`
fn parse_hex(t: &str) -> Option<ExactReal> {
    let (neg, rest) = split_sign(t);
    let rest = rest.strip_prefix("0x")?;
    let (digits, exp) = match rest.split_once(['p', 'P']) {
        Some((d, e)) => (d, e.parse::<i64>().ok()?),
        None => (rest, 0),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let mut m = BigInt::from(0);
    for c in int_part.chars().chain(frac_part.chars()) {
        m = m * 16 + c.to_digit(16)?;
    }
    let m = if neg { -m } else { m };
    Some(ExactReal::new(m, exp - 4 * frac_part.len() as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> FormatParams {
        FormatParams::new(4, -20, None).unwrap()
    }

    #[test]
    fn literal_round_trip() {
        let fmt = p4();
        let x = FloatVal::parse_literal("-1.011_2 * 2^3", &fmt).unwrap();
        assert!(x.is_negative());
        assert_eq!((x.exponent(), x.fraction()), (3, 0b011));
        assert_eq!(x.to_literal(&fmt), "-1.011_2 * 2^3");
        assert_eq!(FloatVal::parse_literal(&x.to_literal(&fmt), &fmt).unwrap(), x);
    }

    #[test]
    fn signed_zero_literals() {
        let fmt = p4();
        let z = FloatVal::parse_literal("-0.0", &fmt).unwrap();
        assert!(z.is_zero() && z.is_negative());
        assert_eq!(z.exponent(), fmt.emin - 1);
        assert_eq!(z.to_literal(&fmt), "-0.0");
    }

    #[test]
    fn decimal_and_hex_literals() {
        let fmt = p4();
        let a = FloatVal::parse_literal("1.25", &fmt).unwrap();
        let b = FloatVal::parse_literal("0x1.4p0", &fmt).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            FloatVal::parse_literal("1.0625", &fmt),
            Err(SoftFloatError::Inexact(_))
        ));
        assert!(FloatVal::parse_literal("1.2.3", &fmt).is_err());
    }

    #[test]
    fn rejects_invalid_fields() {
        let fmt = p4();
        assert!(FloatVal::new(false, 0, 0b1000, &fmt).is_err());
        assert!(FloatVal::new(false, fmt.emin - 1, 0, &fmt).is_err());
        let bounded = FormatParams::new(4, -6, Some(6)).unwrap();
        assert!(matches!(
            FloatVal::new(false, 7, 0, &bounded),
            Err(SoftFloatError::Overflow)
        ));
    }

    #[test]
    fn native_conversion() {
        let fmt = FormatParams::binary64();
        let x = FloatVal::from_native(-0.375f64, &fmt).unwrap();
        assert_eq!(x.to_f64(&fmt), -0.375);
        let y = FloatVal::from_native(1.5f32, &FormatParams::binary32()).unwrap();
        assert_eq!((y.exponent(), y.fraction()), (0, 1 << 22));
        assert!(FloatVal::from_native(f64::NAN, &fmt).is_err());
        assert!(FloatVal::from_native(f64::MIN_POSITIVE / 4.0, &fmt).is_err());
    }
}
