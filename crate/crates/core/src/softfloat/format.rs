use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SoftFloatError;

/// Largest supported precision; fractions are stored in a `u128`.
pub const MAX_PRECISION: u32 = 127;

/// Precision and exponent range of a binary floating-point format.
///
/// `emax = None` means the exponent range is unbounded above, so rounding
/// never overflows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormatParams {
    pub precision: u32,
    pub emin: i64,
    pub emax: Option<i64>,
    pub name: Option<String>,
}

const NAMED: [(&str, u32, i64, i64); 5] = [
    ("binary16", 11, -14, 15),
    ("bfloat16", 8, -126, 127),
    ("binary32", 24, -126, 127),
    ("binary64", 53, -1022, 1023),
    ("binary128", 113, -16382, 16383),
];

impl FormatParams {
    pub fn new(precision: u32, emin: i64, emax: Option<i64>) -> Result<Self, SoftFloatError> {
        if !(2..=MAX_PRECISION).contains(&precision) {
            return Err(SoftFloatError::InvalidFormat(format!(
                "precision must be in 2..={MAX_PRECISION}, got {precision}"
            )));
        }
        if let Some(emax) = emax {
            if emax < emin {
                return Err(SoftFloatError::InvalidFormat(format!(
                    "emin {emin} exceeds emax {emax}"
                )));
            }
        }
        Ok(Self {
            precision,
            emin,
            emax,
            name: None,
        })
    }

    /// A format with the given precision, a very low `emin` and no `emax`;
    /// the setting used for shift-invariant exhaustive searches.
    pub fn unbounded(precision: u32) -> Self {
        let mut f = Self::new(precision, -100_000, None).expect("valid precision");
        f.name = Some(format!("custom:p={precision},emin=-100000,emax=unbounded"));
        f
    }

    pub fn named(name: &str) -> Option<Self> {
        NAMED
            .iter()
            .find(|(n, ..)| *n == name)
            .map(|&(n, p, emin, emax)| Self {
                precision: p,
                emin,
                emax: Some(emax),
                name: Some(n.to_string()),
            })
    }

    pub fn binary16() -> Self {
        Self::named("binary16").unwrap()
    }
    pub fn bfloat16() -> Self {
        Self::named("bfloat16").unwrap()
    }
    pub fn binary32() -> Self {
        Self::named("binary32").unwrap()
    }
    pub fn binary64() -> Self {
        Self::named("binary64").unwrap()
    }
    pub fn binary128() -> Self {
        Self::named("binary128").unwrap()
    }

    /// The five IEEE-style formats, in table order.
    pub fn all_named() -> Vec<Self> {
        NAMED.iter().map(|(n, ..)| Self::named(n).unwrap()).collect()
    }

    /// True for the five named formats (the only ones with an IEEE
    /// interchange encoding).
    pub fn is_named_ieee(&self) -> bool {
        NAMED
            .iter()
            .any(|&(_, p, emin, emax)| p == self.precision && emin == self.emin && Some(emax) == self.emax)
    }

    /// Width of the explicit fraction field, `p - 1`.
    pub fn fraction_bits(&self) -> u32 {
        self.precision - 1
    }

    /// Exponent assigned to zero, `emin - 1`.
    pub fn zero_exponent(&self) -> i64 {
        self.emin - 1
    }

    /// Unit roundoff `u = 2^-p`, as a power of two exponent.
    pub fn unit_roundoff_log2(&self) -> i64 {
        -(self.precision as i64)
    }

    /// Same precision and range, emin moved; used to build shifted windows.
    pub fn with_emin(&self, emin: i64) -> Self {
        Self {
            emin,
            name: None,
            ..self.clone()
        }
    }
}

impl fmt::Display for FormatParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = NAMED
            .iter()
            .find(|&&(_, p, emin, emax)| {
                p == self.precision && emin == self.emin && Some(emax) == self.emax
            })
            .map(|(n, ..)| n)
        {
            return write!(f, "{name}");
        }
        write!(f, "custom:p={},emin={}", self.precision, self.emin)?;
        match self.emax {
            Some(e) => write!(f, ",emax={e}"),
            None => write!(f, ",emax=unbounded"),
        }
    }
}

impl FromStr for FormatParams {
    type Err = SoftFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(f) = Self::named(s) {
            return Ok(f);
        }
        let body = s.strip_prefix("custom:").ok_or_else(|| {
            SoftFloatError::InvalidFormat(format!(
                "unknown format `{s}` (expected binary16|bfloat16|binary32|binary64|binary128 or custom:p=..,emin=..)"
            ))
        })?;
        let (mut p, mut emin, mut emax) = (None, None, None);
        for item in body.split(',') {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                SoftFloatError::InvalidFormat(format!("malformed format field `{item}`"))
            })?;
            let bad = |_| SoftFloatError::InvalidFormat(format!("bad value in `{item}`"));
            match key.trim() {
                "p" => p = Some(value.trim().parse::<u32>().map_err(bad)?),
                "emin" => emin = Some(value.trim().parse::<i64>().map_err(bad)?),
                "emax" if value.trim() == "unbounded" => emax = Some(None),
                "emax" => emax = Some(Some(value.trim().parse::<i64>().map_err(bad)?)),
                other => {
                    return Err(SoftFloatError::InvalidFormat(format!(
                        "unknown format field `{other}`"
                    )))
                }
            }
        }
        let p = p.ok_or_else(|| SoftFloatError::InvalidFormat("missing p=".into()))?;
        let emin = emin.ok_or_else(|| SoftFloatError::InvalidFormat("missing emin=".into()))?;
        let mut f = Self::new(p, emin, emax.unwrap_or(None))?;
        f.name = Some(s.to_string());
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_formats_match_ieee_table() {
        let expect = [
            ("binary16", 11, -14, 15),
            ("bfloat16", 8, -126, 127),
            ("binary32", 24, -126, 127),
            ("binary64", 53, -1022, 1023),
            ("binary128", 113, -16382, 16383),
        ];
        for (name, p, emin, emax) in expect {
            let f: FormatParams = name.parse().unwrap();
            assert_eq!((f.precision, f.emin, f.emax), (p, emin, Some(emax)), "{name}");
            assert_eq!(f.to_string(), name);
        }
    }

    #[test]
    fn parses_custom_formats() {
        let f: FormatParams = "custom:p=5,emin=-40".parse().unwrap();
        assert_eq!((f.precision, f.emin, f.emax), (5, -40, None));
        let g: FormatParams = "custom:p=4,emin=-6,emax=6".parse().unwrap();
        assert_eq!(g.emax, Some(6));
        let h: FormatParams = "custom:p=4,emin=-6,emax=unbounded".parse().unwrap();
        assert_eq!(h.emax, None);
        assert_eq!(h.to_string(), "custom:p=4,emin=-6,emax=unbounded");
    }

    #[test]
    fn rejects_bad_formats() {
        assert!("binary8".parse::<FormatParams>().is_err());
        assert!("custom:p=1,emin=0".parse::<FormatParams>().is_err());
        assert!("custom:p=4,emin=5,emax=2".parse::<FormatParams>().is_err());
        assert!("custom:emin=5".parse::<FormatParams>().is_err());
    }
}
