use super::{Dyadic, DyadicInt, ExactReal, FloatVal, FormatParams, SoftFloatError};

/// Round an exact value to the nearest precision-`p` float, ties to even.
///
/// Exact zero rounds to `+0.0`; callers that need a signed zero handle it.
pub fn rne_round<I: DyadicInt>(v: &Dyadic<I>, fmt: &FormatParams) -> Result<FloatVal, SoftFloatError> {
    let Some(lead) = v.leading_exponent() else {
        return Ok(FloatVal::pos_zero(fmt));
    };
    let p = i64::from(fmt.precision);
    let ulp_exp = lead - (p - 1);
    let mag = v.mantissa().abs();
    let (mut q, mut exponent) = if v.scale() >= ulp_exp {
        (mag.shl_bits((v.scale() - ulp_exp) as u64), lead)
    } else {
        let d = (ulp_exp - v.scale()) as u64;
        let mut q = mag.shr_bits(d);
        let rem = mag.low_bits(d);
        // rem compared against 2^(d-1) by bit length, without forming it.
        let round_up = if rem.is_zero() || rem.bit_len() < d {
            false
        } else if rem.trailing_zeros() == Some(d - 1) {
            q.is_odd()
        } else {
            true
        };
        if round_up {
            q = q + I::one();
        }
        (q, lead)
    };
    if q.bit_len() > fmt.precision as u64 {
        q = q.shr_bits(1);
        exponent += 1;
    }
    if exponent < fmt.emin {
        return Err(SoftFloatError::Underflow);
    }
    let sig = q.magnitude_u128().expect("significand fits in p bits");
    let fraction = sig & ((1u128 << fmt.fraction_bits()) - 1);
    FloatVal::new(v.is_negative(), exponent, fraction, fmt)
}

/// `x ⊕ y` computed through dyadics over `I`.
///
/// An exact zero sum is `-0.0` only when both operands are `-0.0`.
pub fn add_with<I: DyadicInt>(
    x: &FloatVal,
    y: &FloatVal,
    fmt: &FormatParams,
) -> Result<FloatVal, SoftFloatError> {
    if y.is_zero() {
        if x.is_zero() {
            return Ok(FloatVal::zero(x.is_negative() && y.is_negative(), fmt));
        }
        return Ok(*x);
    }
    if x.is_zero() {
        return Ok(*y);
    }
    let sum = &x.to_dyadic::<I>(fmt) + &y.to_dyadic::<I>(fmt);
    rne_round(&sum, fmt)
}

pub fn add(x: &FloatVal, y: &FloatVal, fmt: &FormatParams) -> Result<FloatVal, SoftFloatError> {
    add_with::<num_bigint::BigInt>(x, y, fmt)
}

pub fn sub(x: &FloatVal, y: &FloatVal, fmt: &FormatParams) -> Result<FloatVal, SoftFloatError> {
    add(x, &y.negated(), fmt)
}

/// TwoSum computed from its definition: `s = x ⊕ y`, `e = (x + y) - s`.
/// A zero residual is `+0.0`.
pub fn two_sum_with<I: DyadicInt>(
    x: &FloatVal,
    y: &FloatVal,
    fmt: &FormatParams,
) -> Result<(FloatVal, FloatVal), SoftFloatError> {
    if x.is_zero() || y.is_zero() {
        return Ok((add_with::<I>(x, y, fmt)?, FloatVal::pos_zero(fmt)));
    }
    let exact = &x.to_dyadic::<I>(fmt) + &y.to_dyadic::<I>(fmt);
    let s = rne_round(&exact, fmt)?;
    let residual = &exact - &s.to_dyadic::<I>(fmt);
    let e = rne_round(&residual, fmt)?;
    debug_assert!(e.to_dyadic::<I>(fmt) == residual, "TwoSum residual must be exact");
    Ok((s, e))
}

pub fn two_sum(
    x: &FloatVal,
    y: &FloatVal,
    fmt: &FormatParams,
) -> Result<(FloatVal, FloatVal), SoftFloatError> {
    two_sum_with::<num_bigint::BigInt>(x, y, fmt)
}

/// The classic six-operation TwoSum sequence, each step rounded.
pub fn two_sum_six_op(
    x: &FloatVal,
    y: &FloatVal,
    fmt: &FormatParams,
) -> Result<(FloatVal, FloatVal), SoftFloatError> {
    let s = add(x, y, fmt)?;
    let x_eff = sub(&s, y, fmt)?;
    let y_eff = sub(&s, &x_eff, fmt)?;
    let dx = sub(x, &x_eff, fmt)?;
    let dy = sub(y, &y_eff, fmt)?;
    let e = add(&dx, &dy, fmt)?;
    Ok((s, e))
}

/// `2^(e_x - (p-1))`.
pub fn ulp(x: &FloatVal, fmt: &FormatParams) -> Result<ExactReal, SoftFloatError> {
    if x.is_zero() {
        return Err(SoftFloatError::ZeroUlp);
    }
    Ok(ExactReal::pow2(x.exponent() - i64::from(fmt.fraction_bits())))
}

/// Greedy `n`-term expansion of `c`: each term rounds the remaining residual.
pub fn expand_constant(
    c: &ExactReal,
    n: usize,
    fmt: &FormatParams,
) -> Result<Vec<FloatVal>, SoftFloatError> {
    let mut residual = c.clone();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let term = rne_round(&residual, fmt)?;
        residual = &residual - &term.to_exact(fmt);
        out.push(term);
    }
    Ok(out)
}
