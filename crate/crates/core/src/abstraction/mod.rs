//! Sign/exponent/bit-run abstractions of floats.
//!
//! `SE` keeps the sign and exponent, `SETZ` adds the trailing-zero count and
//! `SELTZO` adds the leading and trailing runs of zeros and ones of the
//! `p - 1` explicit fraction bits. Zero is encoded by the exponent `emin - 1`.

mod concretize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::softfloat::{two_sum, ExactReal, FloatVal, FormatParams};

pub use concretize::Concretizations;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbstractError {
    #[error("relation {rel} needs trailing-zero information, unavailable in the {domain} domain")]
    UnsupportedRelation { rel: Relation, domain: Domain },
    #[error("the fixed-point predicate needs trailing-zero information, unavailable in the SE domain")]
    NoTrailingZeros,
    #[error("mixed abstract domains: {0} and {1}")]
    MixedDomains(Domain, Domain),
    #[error("cannot parse abstract value `{0}`")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Se,
    Setz,
    Seltzo,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Se, Domain::Setz, Domain::Seltzo];

    /// Number of integer variables per segment.
    pub fn arity(self) -> usize {
        match self {
            Domain::Se => 2,
            Domain::Setz => 3,
            Domain::Seltzo => 6,
        }
    }

    pub fn has_ntz(self) -> bool {
        self != Domain::Se
    }

    /// Field names in declaration order.
    pub fn fields(self) -> &'static [&'static str] {
        match self {
            Domain::Se => &["s", "e"],
            Domain::Setz => &["s", "e", "ntz"],
            Domain::Seltzo => &["s", "e", "nlz", "nlo", "ntz", "nto"],
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Se => "SE",
            Domain::Setz => "SETZ",
            Domain::Seltzo => "SELTZO",
        })
    }
}

impl FromStr for Domain {
    type Err = AbstractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "se" => Ok(Domain::Se),
            "setz" => Ok(Domain::Setz),
            "seltzo" => Ok(Domain::Seltzo),
            _ => Err(AbstractError::Parse(s.to_string())),
        }
    }
}

/// Nonoverlap relations between a leading term `x` and a trailing term `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    /// `e_x - e_y >= p - ntz_x`
    S,
    /// `e_x - e_y >= p`
    P,
    /// `|y| <= ulp(x)`
    Ulp,
    /// `|y| <= ulp(x) / 2`
    Qd,
}

impl Relation {
    pub const ALL: [Relation; 4] = [Relation::S, Relation::P, Relation::Ulp, Relation::Qd];
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::S => "S",
            Relation::P => "P",
            Relation::Ulp => "ulp",
            Relation::Qd => "QD",
        })
    }
}

impl FromStr for Relation {
    type Err = AbstractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(Relation::S),
            "p" => Ok(Relation::P),
            "ulp" => Ok(Relation::Ulp),
            "qd" => Ok(Relation::Qd),
            _ => Err(AbstractError::Parse(s.to_string())),
        }
    }
}

/// An abstract value. Only the fields of the chosen domain are meaningful;
/// the others are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbstractVal {
    pub domain: Domain,
    pub s: i64,
    pub e: i64,
    pub nlz: Option<i64>,
    pub nlo: Option<i64>,
    pub ntz: Option<i64>,
    pub nto: Option<i64>,
}

impl AbstractVal {
    pub fn se(s: i64, e: i64) -> Self {
        Self {
            domain: Domain::Se,
            s,
            e,
            nlz: None,
            nlo: None,
            ntz: None,
            nto: None,
        }
    }

    pub fn setz(s: i64, e: i64, ntz: i64) -> Self {
        Self {
            domain: Domain::Setz,
            ntz: Some(ntz),
            ..Self::se(s, e)
        }
    }

    pub fn seltzo(s: i64, e: i64, nlz: i64, nlo: i64, ntz: i64, nto: i64) -> Self {
        Self {
            domain: Domain::Seltzo,
            s,
            e,
            nlz: Some(nlz),
            nlo: Some(nlo),
            ntz: Some(ntz),
            nto: Some(nto),
        }
    }

    /// Build from field values listed in [`Domain::fields`] order.
    pub fn from_fields(domain: Domain, v: &[i64]) -> Option<Self> {
        if v.len() != domain.arity() {
            return None;
        }
        Some(match domain {
            Domain::Se => Self::se(v[0], v[1]),
            Domain::Setz => Self::setz(v[0], v[1], v[2]),
            Domain::Seltzo => Self::seltzo(v[0], v[1], v[2], v[3], v[4], v[5]),
        })
    }

    /// Field values in [`Domain::fields`] order.
    pub fn fields(&self) -> Vec<i64> {
        let mut out = vec![self.s, self.e];
        match self.domain {
            Domain::Se => {}
            Domain::Setz => out.push(self.ntz.unwrap_or(0)),
            Domain::Seltzo => out.extend([self.nlz, self.nlo, self.ntz, self.nto].map(|x| x.unwrap_or(0))),
        }
        out
    }

    pub fn field(&self, name: &str) -> Option<i64> {
        match name {
            "s" => Some(self.s),
            "e" => Some(self.e),
            "nlz" => self.nlz,
            "nlo" => self.nlo,
            "ntz" => self.ntz,
            "nto" => self.nto,
            _ => None,
        }
    }

    pub fn is_zero(&self, fmt: &FormatParams) -> bool {
        self.e == fmt.zero_exponent()
    }

    /// Trailing exponent `e - (p - ntz - 1)`, the place of the last set bit.
    pub fn f(&self, fmt: &FormatParams) -> Option<i64> {
        self.ntz.map(|t| self.e - (i64::from(fmt.precision) - t - 1))
    }

    /// Restrict to a coarser domain.
    pub fn project(&self, domain: Domain) -> Self {
        match domain {
            Domain::Se => Self::se(self.s, self.e),
            Domain::Setz => Self::setz(self.s, self.e, self.ntz.expect("projection needs ntz")),
            Domain::Seltzo => {
                assert_eq!(self.domain, Domain::Seltzo, "cannot refine to SELTZO");
                *self
            }
        }
    }

    /// Shift the exponent of a nonzero value.
    pub fn shifted(&self, k: i64, fmt: &FormatParams) -> Self {
        if self.is_zero(fmt) {
            *self
        } else {
            Self { e: self.e + k, ..*self }
        }
    }
}

impl fmt::Display for AbstractVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.domain)?;
        for (i, (name, v)) in self.domain.fields().iter().zip(self.fields()).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}={v}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for AbstractVal {
    type Err = AbstractError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || AbstractError::Parse(text.to_string());
        let t = text.trim();
        let (dom, rest) = t.split_once('(').ok_or_else(err)?;
        let domain: Domain = dom.trim().parse().map_err(|_| err())?;
        let body = rest.trim_end().strip_suffix(')').ok_or_else(err)?;
        let mut vals = vec![None; domain.arity()];
        for item in body.split(',') {
            let (k, v) = item.split_once('=').ok_or_else(err)?;
            let pos = domain.fields().iter().position(|f| *f == k.trim()).ok_or_else(err)?;
            vals[pos] = Some(v.trim().parse::<i64>().map_err(|_| err())?);
        }
        let vals: Option<Vec<i64>> = vals.into_iter().collect();
        Self::from_fields(domain, &vals.ok_or_else(err)?).ok_or_else(err)
    }
}

/// Counts of leading zeros, leading ones, trailing zeros and trailing ones
/// of a `width`-bit field.
pub fn bit_runs(fraction: u128, width: u32) -> (i64, i64, i64, i64) {
    if width == 0 {
        return (0, 0, 0, 0);
    }
    let w = i64::from(width);
    let mask = if width == 128 { u128::MAX } else { (1u128 << width) - 1 };
    let v = fraction & mask;
    let lead_zeros = |x: u128| -> i64 {
        if x == 0 {
            w
        } else {
            i64::from(x.leading_zeros()) - (128 - w)
        }
    };
    let trail_zeros = |x: u128| -> i64 {
        if x == 0 {
            w
        } else {
            i64::from(x.trailing_zeros()).min(w)
        }
    };
    let inv = !v & mask;
    (lead_zeros(v), lead_zeros(inv), trail_zeros(v), trail_zeros(inv))
}

/// Abstraction of a concrete value.
pub fn abstract_value(x: &FloatVal, domain: Domain, fmt: &FormatParams) -> AbstractVal {
    let s = i64::from(x.sign_bit());
    let e = x.exponent();
    let w = fmt.fraction_bits();
    let (nlz, nlo, ntz, nto) = bit_runs(x.fraction(), w);
    match domain {
        Domain::Se => AbstractVal::se(s, e),
        Domain::Setz => AbstractVal::setz(s, e, ntz),
        Domain::Seltzo => AbstractVal::seltzo(s, e, nlz, nlo, ntz, nto),
    }
}

/// The validity conditions of the domain: every abstraction of a concrete
/// value satisfies them and every value satisfying them has a concretization.
pub fn is_consistent(v: &AbstractVal, fmt: &FormatParams) -> bool {
    let w = i64::from(fmt.fraction_bits());
    let zero = v.is_zero(fmt);
    if !(v.s == 0 || v.s == 1) || v.e < fmt.zero_exponent() {
        return false;
    }
    let in_range = |x: Option<i64>| matches!(x, Some(t) if (0..=w).contains(&t));
    match v.domain {
        Domain::Se => true,
        Domain::Setz => in_range(v.ntz) && (!zero || v.ntz == Some(w)),
        Domain::Seltzo => {
            if ![v.nlz, v.nlo, v.ntz, v.nto].into_iter().all(in_range) {
                return false;
            }
            let (nlz, nlo, ntz, nto) = (v.nlz.unwrap(), v.nlo.unwrap(), v.ntz.unwrap(), v.nto.unwrap());
            (!zero || (nlz == w && ntz == w && nlo == 0 && nto == 0))
                && ((nlz > 0) != (nlo > 0))
                && ((ntz > 0) != (nto > 0))
                && ((nlz == w && ntz == w) || nlz + ntz < w)
                && ((nlo == w && nto == w) || nlo + nto < w)
                && (nlz + nto == w || nlz + nto < w - 1)
                && (ntz + nlo == w || ntz + nlo < w - 1)
        }
    }
}

/// Whether `x` dominates `y` under `rel`, decided from abstractions alone.
pub fn dominates(
    x: &AbstractVal,
    y: &AbstractVal,
    rel: Relation,
    fmt: &FormatParams,
) -> Result<bool, AbstractError> {
    let p = i64::from(fmt.precision);
    let d = x.e - y.e;
    if y.is_zero(fmt) {
        return Ok(true);
    }
    let need = |v: Option<i64>| {
        v.ok_or(AbstractError::UnsupportedRelation {
            rel,
            domain: x.domain.min(y.domain),
        })
    };
    Ok(match rel {
        Relation::P => d >= p,
        Relation::S => d >= p - need(x.ntz)?,
        Relation::Ulp => d > p - 1 || (d == p - 1 && need(y.ntz)? == p - 1),
        Relation::Qd => d > p || (d == p && need(y.ntz)? == p - 1),
    })
}

/// The dominance relations evaluated on concrete values with exact arithmetic.
pub fn dominates_concrete(x: &FloatVal, y: &FloatVal, rel: Relation, fmt: &FormatParams) -> bool {
    if y.is_zero() {
        return true;
    }
    if x.is_zero() {
        return false;
    }
    let p = i64::from(fmt.precision);
    let ulp_exp = x.exponent() - (p - 1);
    let ay = y.to_exact(fmt).abs();
    match rel {
        Relation::S => {
            let (_, _, ntz, _) = bit_runs(x.fraction(), fmt.fraction_bits());
            x.exponent() - y.exponent() >= p - ntz
        }
        Relation::P => x.exponent() - y.exponent() >= p,
        Relation::Ulp => ay <= ExactReal::pow2(ulp_exp),
        Relation::Qd => ay <= ExactReal::pow2(ulp_exp - 1),
    }
}

/// Whether `TwoSum(s, e) = (s, e)` for every concretization of the pair.
///
/// For the SETZ and SELTZO domains this is an exact characterization: the
/// pair is a fixed point iff one of the listed conditions holds.
pub fn is_fixed_point(s: &AbstractVal, e: &AbstractVal, fmt: &FormatParams) -> Result<bool, AbstractError> {
    if e.is_zero(fmt) {
        return Ok(true);
    }
    let (Some(ntz_s), Some(ntz_e)) = (s.ntz, e.ntz) else {
        return Err(AbstractError::NoTrailingZeros);
    };
    let p = i64::from(fmt.precision);
    let d = s.e - e.e;
    let same = s.s == e.s;
    Ok(d > p + 1
        || (d == p + 1 && (same || ntz_s < p - 1 || ntz_e == p - 1))
        || (d == p && ntz_e == p - 1 && ntz_s >= 1 && (same || ntz_s < p - 1)))
}

/// Necessary condition for a fixed point that needs only signs and exponents.
pub fn fixed_point_se(s: &AbstractVal, e: &AbstractVal, fmt: &FormatParams) -> bool {
    e.is_zero(fmt) || s.e - e.e >= i64::from(fmt.precision)
}

/// Concrete fixed-point test.
pub fn is_fixed_point_concrete(s: &FloatVal, e: &FloatVal, fmt: &FormatParams) -> bool {
    matches!(two_sum(s, e, fmt), Ok(out) if out == (*s, *e))
}

/// All concrete values with abstraction `v`, lazily.
pub fn enumerate_concretizations(v: &AbstractVal, fmt: &FormatParams) -> Concretizations {
    Concretizations::new(v, fmt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str, fmt: &FormatParams) -> FloatVal {
        FloatVal::parse_literal(s, fmt).unwrap()
    }

    #[test]
    fn seltzo_examples() {
        let fmt = FormatParams::binary16();
        let a = abstract_value(&lit("-1.0010011111_2 * 2^7", &fmt), Domain::Seltzo, &fmt);
        assert_eq!(a, AbstractVal::seltzo(1, 7, 2, 0, 0, 5));
        let b = abstract_value(&lit("+1.1111111111_2 * 2^-2", &fmt), Domain::Seltzo, &fmt);
        assert_eq!(b, AbstractVal::seltzo(0, -2, 0, 10, 0, 10));
        let z = abstract_value(&FloatVal::pos_zero(&fmt), Domain::Seltzo, &fmt);
        assert_eq!(z, AbstractVal::seltzo(0, fmt.emin - 1, 10, 0, 10, 0));
        assert!(is_consistent(&a, &fmt) && is_consistent(&b, &fmt) && is_consistent(&z, &fmt));
    }

    #[test]
    fn inconsistent_examples() {
        let fmt = FormatParams::new(8, -20, None).unwrap();
        assert!(!is_consistent(&AbstractVal::seltzo(0, 0, 2, 1, 1, 0), &fmt));
        // nlz + nto = p - 2
        assert!(!is_consistent(&AbstractVal::seltzo(0, 0, 3, 0, 0, 3), &fmt));
        assert!(is_consistent(&AbstractVal::seltzo(0, 0, 3, 0, 0, 4), &fmt));
        assert!(!is_consistent(&AbstractVal::seltzo(2, 0, 7, 0, 7, 0), &fmt));
        assert!(!is_consistent(&AbstractVal::setz(0, fmt.emin - 1, 3), &fmt));
        assert!(!is_consistent(&AbstractVal::se(0, fmt.emin - 2), &fmt));
    }

    /// Consistency is exactly non-emptiness of the concretization, checked
    /// against brute-force abstraction of every fraction pattern.
    #[test]
    fn consistency_is_exact() {
        for p in 2..=8u32 {
            let fmt = FormatParams::new(p, -10, None).unwrap();
            let w = i64::from(p - 1);
            let mut seen = std::collections::HashSet::new();
            for frac in 0..(1u128 << (p - 1)) {
                let x = FloatVal::new(false, 0, frac, &fmt).unwrap();
                seen.insert(abstract_value(&x, Domain::Seltzo, &fmt));
            }
            for nlz in 0..=w {
                for nlo in 0..=w {
                    for ntz in 0..=w {
                        for nto in 0..=w {
                            let v = AbstractVal::seltzo(0, 0, nlz, nlo, ntz, nto);
                            assert_eq!(is_consistent(&v, &fmt), seen.contains(&v), "p={p} {v}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dominance_boundaries() {
        let fmt = FormatParams::new(4, -20, None).unwrap();
        let x = AbstractVal::setz(0, 4, 3);
        assert!(dominates(&x, &AbstractVal::setz(0, 0, 3), Relation::Qd, &fmt).unwrap());
        assert!(!dominates(&x, &AbstractVal::setz(0, 0, 2), Relation::Qd, &fmt).unwrap());
        let concrete_y = lit("1.100_2 * 2^0", &fmt);
        assert!(!dominates_concrete(&lit("1", &fmt).scaled(4, &fmt).unwrap(), &concrete_y, Relation::Qd, &fmt));
        let z = AbstractVal::se(0, fmt.emin - 1);
        for rel in Relation::ALL {
            assert!(dominates(&AbstractVal::se(1, 3), &z, rel, &fmt).unwrap());
        }
        assert!(dominates(&AbstractVal::se(0, 4), &AbstractVal::se(0, 0), Relation::P, &fmt).unwrap());
        assert!(dominates(&AbstractVal::se(0, 4), &AbstractVal::se(0, 0), Relation::Qd, &fmt).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let fmt = FormatParams::new(4, -20, None).unwrap();
        let one = lit("1", &fmt);
        let small = lit("1.000_2 * 2^-4", &fmt);
        let abs = |v: &FloatVal| abstract_value(v, Domain::Setz, &fmt);
        assert!(is_fixed_point(&abs(&one), &abs(&small), &fmt).unwrap());
        assert!(is_fixed_point_concrete(&one, &small, &fmt));
        assert!(!is_fixed_point(&abs(&one), &abs(&small.negated()), &fmt).unwrap());
        assert!(!is_fixed_point_concrete(&one, &small.negated(), &fmt));
        assert!(is_fixed_point(&abs(&one), &abs(&FloatVal::neg_zero(&fmt)), &fmt).unwrap());
        assert!(is_fixed_point(&AbstractVal::se(0, 0), &AbstractVal::se(0, -3), &fmt).is_err());
    }

    #[test]
    fn print_and_parse() {
        let v = AbstractVal::seltzo(1, -7, 2, 0, 0, 5);
        assert_eq!(v.to_string(), "SELTZO(s=1, e=-7, nlz=2, nlo=0, ntz=0, nto=5)");
        assert_eq!(v.to_string().parse::<AbstractVal>().unwrap(), v);
        let t = AbstractVal::setz(0, 3, 1);
        assert_eq!(t.to_string().parse::<AbstractVal>().unwrap(), t);
        assert!("SETZ(s=0, e=1)".parse::<AbstractVal>().is_err());
    }
}
