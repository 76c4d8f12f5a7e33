//! Exact dyadic rationals `m * 2^k`.
//!
//! The integer mantissa is generic so that exhaustive searches at tiny
//! precision can run on `i128` while everything else uses `BigInt`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Integer types usable as the mantissa of a [`Dyadic`].
pub trait DyadicInt:
    Clone
    + Ord
    + fmt::Debug
    + Zero
    + One
    + Signed
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Number of significant bits of `|self|`; zero for zero.
    fn bit_len(&self) -> u64;

    /// Trailing zero bits, `None` for zero.
    fn trailing_zeros(&self) -> Option<u64>;

    /// `self * 2^n`. Fixed-width implementations panic on overflow.
    fn shl_bits(&self, n: u64) -> Self;

    /// `floor(|self| / 2^n)` with the sign of `self` reapplied.
    fn shr_bits(&self, n: u64) -> Self;

    /// `|self| mod 2^n`.
    fn low_bits(&self, n: u64) -> Self;

    fn from_u128(v: u128) -> Self;

    /// `|self|` as `u128` if it fits.
    fn magnitude_u128(&self) -> Option<u128>;

    fn to_bigint(&self) -> BigInt;

    fn to_f64_lossy(&self) -> f64;

    fn is_odd(&self) -> bool {
        self.trailing_zeros() == Some(0)
    }
}

impl DyadicInt for i128 {
    fn bit_len(&self) -> u64 {
        128 - u64::from(self.unsigned_abs().leading_zeros())
    }

    fn trailing_zeros(&self) -> Option<u64> {
        (*self != 0).then(|| u64::from(i128::trailing_zeros(*self)))
    }

    fn shl_bits(&self, n: u64) -> Self {
        if *self == 0 {
            return 0;
        }
        assert!(
            self.bit_len() + n <= 126,
            "i128 dyadic overflow (shift by {n}); use the BigInt instantiation"
        );
        self << n
    }

    fn shr_bits(&self, n: u64) -> Self {
        if n >= 127 {
            return 0;
        }
        let mag = (self.unsigned_abs() >> n) as i128;
        if *self < 0 {
            -mag
        } else {
            mag
        }
    }

    fn low_bits(&self, n: u64) -> Self {
        if n >= 127 {
            return self.abs();
        }
        (self.unsigned_abs() & ((1u128 << n) - 1)) as i128
    }

    fn from_u128(v: u128) -> Self {
        i128::try_from(v).expect("u128 value exceeds i128 range")
    }

    fn magnitude_u128(&self) -> Option<u128> {
        Some(self.unsigned_abs())
    }

    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl DyadicInt for BigInt {
    fn bit_len(&self) -> u64 {
        self.bits()
    }

    fn trailing_zeros(&self) -> Option<u64> {
        BigInt::trailing_zeros(self)
    }

    fn shl_bits(&self, n: u64) -> Self {
        self << n
    }

    fn shr_bits(&self, n: u64) -> Self {
        let mag = self.magnitude() >> n;
        BigInt::from_biguint(self.sign(), mag)
    }

    fn low_bits(&self, n: u64) -> Self {
        if self.bits() <= n {
            return self.abs();
        }
        let mask = (BigInt::one() << n) - BigInt::one();
        BigInt::from_biguint(Sign::Plus, self.magnitude().clone()) & mask
    }

    fn from_u128(v: u128) -> Self {
        BigInt::from(v)
    }

    fn magnitude_u128(&self) -> Option<u128> {
        self.magnitude().to_u128()
    }

    fn to_bigint(&self) -> BigInt {
        self.clone()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// The exact value `mantissa * 2^scale`.
///
/// Kept normalized: the mantissa is odd, or the value is zero with scale 0.
/// Structural equality is therefore value equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dyadic<I> {
    mantissa: I,
    scale: i64,
}

impl<I: DyadicInt> Dyadic<I> {
    pub fn new(mantissa: I, scale: i64) -> Self {
        match mantissa.trailing_zeros() {
            None => Self::zero(),
            Some(0) => Self { mantissa, scale },
            Some(tz) => Self {
                mantissa: mantissa.shr_bits(tz),
                scale: scale + tz as i64,
            },
        }
    }

    pub fn zero() -> Self {
        Self {
            mantissa: I::zero(),
            scale: 0,
        }
    }

    pub fn from_int(v: I) -> Self {
        Self::new(v, 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Self {
            mantissa: I::one(),
            scale: k,
        }
    }

    pub fn mantissa(&self) -> &I {
        &self.mantissa
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn signum(&self) -> i32 {
        if self.mantissa.is_zero() {
            0
        } else if self.mantissa.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            scale: self.scale,
        }
    }

    /// Multiply by `2^k`.
    pub fn shifted(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            mantissa: self.mantissa.clone(),
            scale: self.scale + k,
        }
    }

    /// Exponent of the leading bit: `2^e <= |self| < 2^(e+1)`. `None` for zero.
    pub fn leading_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.scale + self.mantissa.bit_len() as i64 - 1)
        }
    }

    /// Exponent of the lowest set bit. `None` for zero.
    pub fn trailing_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.scale)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Keep at most 64 significant bits before converting so that huge
        // mantissas do not overflow the intermediate f64.
        let bits = self.mantissa.bit_len() as i64;
        let drop = (bits - 64).max(0);
        let m = self.mantissa.shr_bits(drop as u64).to_f64_lossy();
        m * 2f64.powi((self.scale + drop).clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    pub fn to_big(&self) -> Dyadic<BigInt> {
        Dyadic {
            mantissa: self.mantissa.to_bigint(),
            scale: self.scale,
        }
    }

    fn aligned(a: &Self, b: &Self) -> (I, I, i64) {
        let scale = a.scale.min(b.scale);
        let am = a.mantissa.shl_bits((a.scale - scale) as u64);
        let bm = b.mantissa.shl_bits((b.scale - scale) as u64);
        (am, bm, scale)
    }
}

impl Dyadic<BigInt> {
    /// Parse an exact decimal literal such as `-12.375` or `3/8`.
    /// Values that are not dyadic are rejected.
    pub fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num: BigInt = num.trim().parse().ok()?;
            let den: BigInt = den.trim().parse().ok()?;
            if den.is_zero() || den.is_negative() {
                return None;
            }
            let tz = den.trailing_zeros()?;
            if den.bits() != tz + 1 {
                return None;
            }
            return Some(Self::new(num, -(tz as i64)));
        }
        let (neg, digits) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let all: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
        let all = all / BigInt::from(10);
        // value = all / 10^d = all / (2^d 5^d); dyadic iff 5^d divides all.
        let d = frac_part.len() as u32;
        let five_d = num_traits::pow(BigInt::from(5), d as usize);
        if !(&all % &five_d).is_zero() {
            return None;
        }
        let m = all / five_d;
        let m = if neg { -m } else { m };
        Some(Self::new(m, -(d as i64)))
    }
}

impl<I: DyadicInt> Add for &Dyadic<I> {
    type Output = Dyadic<I>;
    fn add(self, rhs: Self) -> Dyadic<I> {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, scale) = Dyadic::aligned(self, rhs);
        Dyadic::new(a + b, scale)
    }
}

impl<I: DyadicInt> Sub for &Dyadic<I> {
    type Output = Dyadic<I>;
    fn sub(self, rhs: Self) -> Dyadic<I> {
        self + &(-rhs)
    }
}

impl<I: DyadicInt> Neg for &Dyadic<I> {
    type Output = Dyadic<I>;
    fn neg(self) -> Dyadic<I> {
        Dyadic {
            mantissa: -self.mantissa.clone(),
            scale: self.scale,
        }
    }
}

impl<I: DyadicInt> Mul for &Dyadic<I> {
    type Output = Dyadic<I>;
    fn mul(self, rhs: Self) -> Dyadic<I> {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: self.mantissa.clone() * rhs.mantissa.clone(),
            scale: self.scale + rhs.scale,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl<I: DyadicInt> $tr for Dyadic<I> {
            type Output = Dyadic<I>;
            fn $method(self, rhs: Self) -> Dyadic<I> {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<I: DyadicInt> Neg for Dyadic<I> {
    type Output = Dyadic<I>;
    fn neg(self) -> Dyadic<I> {
        -&self
    }
}

impl<I: DyadicInt> PartialOrd for Dyadic<I> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<I: DyadicInt> Ord for Dyadic<I> {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ss, os) = (self.signum(), other.signum());
        if ss != os {
            return ss.cmp(&os);
        }
        if ss == 0 {
            return Ordering::Equal;
        }
        // Same nonzero sign: compare leading exponents before aligning so
        // that wildly different magnitudes never force a huge shift.
        let (le, lo) = (
            self.leading_exponent().unwrap(),
            other.leading_exponent().unwrap(),
        );
        if le != lo {
            let mag = le.cmp(&lo);
            return if ss > 0 { mag } else { mag.reverse() };
        }
        let (a, b, _) = Dyadic::aligned(self, other);
        a.cmp(&b)
    }
}

impl<I: DyadicInt> fmt::Display for Dyadic<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else if self.scale == 0 {
            write!(f, "{:?}", self.mantissa)
        } else {
            write!(f, "{:?}*2^{}", self.mantissa, self.scale)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Big = Dyadic<BigInt>;

    #[test]
    fn normalizes_trailing_zeros() {
        let d = Big::new(BigInt::from(12), 0);
        assert_eq!(d.mantissa(), &BigInt::from(3));
        assert_eq!(d.scale(), 2);
        assert_eq!(Big::new(BigInt::zero(), 17), Big::zero());
    }

    #[test]
    fn add_sub_cancel_exactly() {
        let a = Big::pow2(100);
        let b = Big::pow2(-100);
        let s = &a + &b;
        assert_eq!(&s - &a, b);
        assert_eq!(&s - &s, Big::zero());
    }

    #[test]
    fn ordering_across_scales() {
        let small = Big::new(BigInt::from(3), -5);
        let big = Big::new(BigInt::from(1), 0);
        assert!(small < big);
        assert!(-&big < -&small);
        assert!(Big::zero() < small);
    }

    #[test]
    fn parses_dyadic_decimals_only() {
        assert_eq!(
            Big::parse_decimal("-12.375"),
            Some(Big::new(BigInt::from(-99), -3))
        );
        assert_eq!(Big::parse_decimal("3/8"), Some(Big::new(BigInt::from(3), -3)));
        assert_eq!(Big::parse_decimal("0.1"), None);
        assert_eq!(Big::parse_decimal("1/3"), None);
        assert_eq!(Big::parse_decimal("0"), Some(Big::zero()));
    }

    #[test]
    fn i128_and_bigint_agree() {
        let a = Dyadic::<i128>::new(45, -7);
        let b = Dyadic::<i128>::new(-3, 2);
        let sum = &a + &b;
        assert_eq!(sum.to_big(), &a.to_big() + &b.to_big());
        assert_eq!((&a * &b).to_big(), &a.to_big() * &b.to_big());
    }

    #[test]
    fn leading_and_trailing_exponents() {
        let d = Big::new(BigInt::from(0b1011), -3); // 1.011b
        assert_eq!(d.leading_exponent(), Some(0));
        assert_eq!(d.trailing_exponent(), Some(-3));
        assert_eq!(d.to_f64(), 1.375);
    }
}
