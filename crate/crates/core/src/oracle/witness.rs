use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::softfloat::{rne_round, ExactReal, FloatVal, FormatParams};

/// Known hard inputs for the double-double adders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    /// About `3u^2` relative error through `ddadd`.
    Ddadd3u2,
    /// About `1.5u^2` relative error through `madd`.
    Madd15u2,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Witness::Ddadd3u2 => "ddadd3u2",
            Witness::Madd15u2 => "madd15u2",
        })
    }
}

impl FromStr for Witness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ddadd3u2" => Ok(Witness::Ddadd3u2),
            "madd15u2" => Ok(Witness::Madd15u2),
            _ => Err(format!("unknown witness `{s}` (expected ddadd3u2 or madd15u2)")),
        }
    }
}

/// `sign * (2^a + c) * 2^scale`.
fn term(neg: bool, a: u32, c: i64, scale: i64) -> ExactReal {
    let m = (BigInt::from(1) << a) + BigInt::from(c);
    ExactReal::new(if neg { -m } else { m }, scale)
}

/// The inputs `(x0, x1, y0, y1)` of a witness, in network input order.
pub fn paper_witness(w: Witness, fmt: &FormatParams) -> Result<Vec<FloatVal>, OracleError> {
    let p = fmt.precision;
    if p < 4 {
        return Err(OracleError::Mismatch(format!("witness {w} needs p >= 4, got {p}")));
    }
    let q = i64::from(p);
    let exact = match w {
        // 1, u - u^2, -1/2 + u/2, -u^2/2 + u^3
        Witness::Ddadd3u2 => [
            term(false, 0, 0, 0),
            term(false, p, -1, -2 * q),
            term(true, p, -1, -q - 1),
            term(true, p - 1, -1, -3 * q),
        ],
        // 1 + 2u, -u/2 - 2u^2, -u, -u^2/2 - u^3
        Witness::Madd15u2 => [
            term(false, p - 1, 1, 1 - q),
            term(true, p - 2, 1, 1 - 2 * q),
            term(true, 0, 0, -q),
            term(true, p - 1, 1, -3 * q),
        ],
    };
    exact
        .iter()
        .map(|v| {
            let r = rne_round(v, fmt)?;
            if r.to_exact(fmt) != *v {
                return Err(OracleError::Mismatch(format!("{v} is not representable at p = {p}")));
            }
            Ok(r)
        })
        .collect()
}
