//! Exhaustive concrete search at small precision.
//!
//! Inputs range over every normalized value with exponent in a window, plus
//! signed zeros. Relative error and TwoSum are shift invariant, so only tuples
//! whose largest input exponent is the top of the window are visited. Values
//! are held as exact multiples of `2^(lo - p + 1)` in `i128`, which every sum
//! and rounding error inside a TwoSum network preserves.

mod realize;
mod witness;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fpan::{simulate, Fpan, FpanError, Step, Trace};
use crate::softfloat::{ExactReal, FloatVal, FormatParams, SoftFloatError};

pub use realize::{gap_report, gate_realizable, realize_abstract_cex, GapReport, GateGap, Realization};
pub use witness::{paper_witness, Witness};

/// Default limit on evaluated input tuples.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("search needs {size} evaluations, budget is {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("window {lo}..{hi} at p = {p} is too wide for exact 128-bit search")]
    TooWide { p: u32, lo: i64, hi: i64 },
    #[error("empty window {lo}..{hi}")]
    EmptyWindow { lo: i64, hi: i64 },
    #[error("unknown output `{0}`")]
    UnknownOutput(String),
    #[error("property does not fit this network: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Fpan(#[from] FpanError),
    #[error(transparent)]
    Float(#[from] SoftFloatError),
}

/// The input space of an exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchWindow {
    pub precision: u32,
    /// Exponent range of nonzero inputs.
    pub lo: i64,
    pub hi: i64,
    pub include_zero: bool,
    /// Consecutive inputs `(a, b)` must satisfy `a = RNE(a + b)`.
    pub fixed_point_pairs: bool,
    /// Visit only tuples whose largest exponent is `hi`.
    pub canonical: bool,
    pub budget: u128,
}

impl SearchWindow {
    /// Exponents `[-(2p+4), 0]`, zeros included, canonical, fixed-point pairs.
    pub fn default_for(p: u32) -> Self {
        Self {
            precision: p,
            lo: -(2 * i64::from(p) + 4),
            hi: 0,
            include_zero: true,
            fixed_point_pairs: true,
            canonical: true,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_exponents(mut self, lo: i64, hi: i64) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    pub fn with_fixed_point_pairs(mut self, on: bool) -> Self {
        self.fixed_point_pairs = on;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// Spans every exponent offset used by the lemma catalog.
    pub fn is_wide_enough(&self) -> bool {
        self.hi - self.lo >= 2 * i64::from(self.precision) + 4
    }

    /// A format whose range contains every value the search can produce.
    pub fn format(&self) -> FormatParams {
        let p = i64::from(self.precision);
        FormatParams::new(self.precision, self.lo - 2 * p - 8, None).expect("valid precision")
    }

    /// Window values: sign-major, then exponent, then fraction; zeros last.
    pub fn values(&self) -> Vec<FloatVal> {
        let fmt = self.format();
        let n = 1u128 << fmt.fraction_bits();
        let mut out = Vec::new();
        for neg in [false, true] {
            for e in self.lo..=self.hi {
                for f in 0..n {
                    out.push(FloatVal::new(neg, e, f, &fmt).expect("in range"));
                }
            }
        }
        if self.include_zero {
            out.push(FloatVal::pos_zero(&fmt));
            out.push(FloatVal::neg_zero(&fmt));
        }
        out
    }

    /// Number of tuples a search over `f` evaluates.
    pub fn size(&self, f: &Fpan) -> Result<u128, OracleError> {
        Ok(Space::build(self, f.wire_count())?.size())
    }
}

impl fmt::Display for SearchWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} exponents {}..{}", self.precision, self.lo, self.hi)?;
        if self.include_zero {
            f.write_str(" +zeros")?;
        }
        if self.fixed_point_pairs {
            f.write_str(" fixed-point pairs")?;
        }
        Ok(())
    }
}

/// The enumerated tuple space: inputs grouped into units (pairs or singles).
struct Space {
    values: Vec<FloatVal>,
    /// Value in quanta of `2^quantum_exp`.
    ints: Vec<i128>,
    units: Vec<Vec<Vec<usize>>>,
    /// `top[u][i]`: unit `u`'s option `i` holds an input of exponent `hi`.
    top: Vec<Vec<bool>>,
    canonical: bool,
    value_bits: u32,
}

fn bits_for(n: usize) -> u32 {
    usize::BITS - n.saturating_sub(1).leading_zeros()
}

fn rne(m: i128, p: u32) -> i128 {
    let a = m.unsigned_abs();
    let len = 128 - a.leading_zeros();
    if len <= p {
        return m;
    }
    let sh = len - p;
    let mut r = a >> sh;
    let rem = a & ((1u128 << sh) - 1);
    let half = 1u128 << (sh - 1);
    if rem > half || (rem == half && r & 1 == 1) {
        r += 1;
    }
    let v = (r << sh) as i128;
    if m < 0 {
        -v
    } else {
        v
    }
}

impl Space {
    fn build(w: &SearchWindow, n_inputs: usize) -> Result<Self, OracleError> {
        if w.lo > w.hi {
            return Err(OracleError::EmptyWindow { lo: w.lo, hi: w.hi });
        }
        let p = w.precision;
        let quantum_exp = w.lo - i64::from(p) + 1;
        let value_bits = (w.hi - quantum_exp + 1) as u64 + u64::from(bits_for(n_inputs)) + 1;
        if value_bits > 60 {
            return Err(OracleError::TooWide { p, lo: w.lo, hi: w.hi });
        }
        let fmt = w.format();
        let values = w.values();
        let ints: Vec<i128> = values
            .iter()
            .map(|v| {
                if v.is_zero() {
                    0
                } else {
                    let m = v.significand(&fmt) as i128;
                    let shifted = m << (v.exponent() - i64::from(p) + 1 - quantum_exp);
                    if v.is_negative() {
                        -shifted
                    } else {
                        shifted
                    }
                }
            })
            .collect();
        let is_top = |i: usize| !values[i].is_zero() && values[i].exponent() == w.hi;
        let singles: Vec<Vec<usize>> = (0..values.len()).map(|i| vec![i]).collect();
        let mut units = Vec::new();
        if w.fixed_point_pairs {
            let pairs: Vec<Vec<usize>> = (0..values.len())
                .flat_map(|a| (0..values.len()).map(move |b| (a, b)))
                .filter(|&(a, b)| rne(ints[a] + ints[b], p) == ints[a])
                .map(|(a, b)| vec![a, b])
                .collect();
            for _ in 0..n_inputs / 2 {
                units.push(pairs.clone());
            }
            if n_inputs % 2 == 1 {
                units.push(singles);
            }
        } else {
            for _ in 0..n_inputs {
                units.push(singles.clone());
            }
        }
        let top = units
            .iter()
            .map(|u| u.iter().map(|opt| opt.iter().any(|&i| is_top(i))).collect())
            .collect();
        Ok(Self {
            values,
            ints,
            units,
            top,
            canonical: w.canonical,
            value_bits: value_bits as u32,
        })
    }

    /// Canonical blocks: units before `j` avoid the top, unit `j` hits it.
    fn blocks(&self) -> Vec<Vec<Vec<usize>>> {
        let all = |u: usize| (0..self.units[u].len()).collect::<Vec<_>>();
        if !self.canonical {
            return vec![(0..self.units.len()).map(all).collect()];
        }
        (0..self.units.len())
            .map(|j| {
                (0..self.units.len())
                    .map(|u| match u.cmp(&j) {
                        Ordering::Less => (0..self.units[u].len()).filter(|&i| !self.top[u][i]).collect(),
                        Ordering::Equal => (0..self.units[u].len()).filter(|&i| self.top[u][i]).collect(),
                        Ordering::Greater => all(u),
                    })
                    .collect()
            })
            .collect()
    }

    fn size(&self) -> u128 {
        self.blocks()
            .iter()
            .map(|b| b.iter().map(|o| o.len() as u128).product::<u128>())
            .sum()
    }

    fn inputs_of(&self, key: &[usize]) -> Vec<usize> {
        key.iter().enumerate().flat_map(|(u, &i)| self.units[u][i].iter().copied()).collect()
    }

    /// Visit every tuple; `visit` gets the unit-option key and input integers.
    fn for_each<T: Send>(
        &self,
        init: impl Fn() -> T + Sync,
        visit: impl Fn(&mut T, &[usize], &[i128]) + Sync,
        merge: impl Fn(T, T) -> T + Sync + Send,
    ) -> T {
        let mut tasks: Vec<(usize, usize)> = Vec::new();
        let blocks = self.blocks();
        for (b, block) in blocks.iter().enumerate() {
            if block.iter().all(|o| !o.is_empty()) {
                tasks.extend(block[0].iter().map(|&i| (b, i)));
            }
        }
        tasks
            .par_iter()
            .fold(&init, |mut acc, &(b, first)| {
                let block = &blocks[b];
                let nu = block.len();
                let mut pos = vec![0usize; nu];
                let mut key = vec![0usize; nu];
                key[0] = first;
                let mut ins: Vec<i128> = Vec::new();
                loop {
                    for u in 1..nu {
                        key[u] = block[u][pos[u]];
                    }
                    ins.clear();
                    for (u, &k) in key.iter().enumerate() {
                        ins.extend(self.units[u][k].iter().map(|&i| self.ints[i]));
                    }
                    visit(&mut acc, &key, &ins);
                    let mut u = nu;
                    loop {
                        if u <= 1 {
                            return acc;
                        }
                        u -= 1;
                        pos[u] += 1;
                        if pos[u] < block[u].len() {
                            break;
                        }
                        pos[u] = 0;
                    }
                }
            })
            .reduce(&init, merge)
    }
}

/// Gates of `f` as segment ids, for the integer engine.
struct Kernel {
    gates: Vec<[usize; 4]>,
    segments: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    p: u32,
}

impl Kernel {
    fn new(f: &Fpan, p: u32) -> Self {
        let gates = f
            .steps()
            .into_iter()
            .filter_map(|s| match s {
                Step::Gate(g) => Some([g.in_sum, g.in_err, g.out_sum, g.out_err]),
                Step::Discard { .. } => None,
            })
            .collect();
        Self {
            gates,
            segments: f.segment_count(),
            inputs: f.inputs().to_vec(),
            outputs: f.output_segments(),
            p,
        }
    }

    fn run(&self, ins: &[i128], seg: &mut Vec<i128>) {
        seg.clear();
        seg.resize(self.segments, 0);
        for (&w, &v) in self.inputs.iter().zip(ins) {
            seg[w] = v;
        }
        for &[a, b, s, e] in &self.gates {
            let t = seg[a] + seg[b];
            let r = rne(t, self.p);
            seg[s] = r;
            seg[e] = t - r;
        }
    }

    /// `(|sum(out) - sum(in)|, |sum(in)|)`, with `(0, 1)` for exact results.
    fn error(&self, ins: &[i128], seg: &[i128]) -> (i128, i128) {
        let sin: i128 = ins.iter().sum();
        let sout: i128 = self.outputs.iter().map(|&s| seg[s]).sum();
        let d = (sout - sin).abs();
        if d == 0 {
            (0, 1)
        } else {
            (d, sin.abs())
        }
    }
}

/// `a/b > c/d` for nonnegative fractions; a zero denominator is infinity.
fn ratio_gt(a: (i128, i128), c: (i128, i128)) -> bool {
    a.0 * c.1 > c.0 * a.1
}

/// Exact relative error `|sum(outputs) - sum(inputs)| / |sum(inputs)|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelError {
    #[serde(with = "exact_str")]
    pub num: ExactReal,
    /// Zero when the inputs sum to zero and the outputs do not.
    #[serde(with = "exact_str")]
    pub den: ExactReal,
}

mod exact_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &ExactReal, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactReal, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad exact value `{s}`")))
    }

    /// Inverse of the `Display` form `m*2^s`; plain decimals are accepted too.
    pub fn parse(s: &str) -> Option<ExactReal> {
        match s.split_once("*2^") {
            Some((m, e)) => Some(ExactReal::new(m.trim().parse().ok()?, e.trim().parse().ok()?)),
            None => ExactReal::parse_decimal(s),
        }
    }
}

impl RelError {
    pub fn of(inputs: &[FloatVal], outputs: &[FloatVal], fmt: &FormatParams) -> Self {
        let sum = |vs: &[FloatVal]| vs.iter().fold(ExactReal::zero(), |acc, v| &acc + &v.to_exact(fmt));
        let (si, so) = (sum(inputs), sum(outputs));
        let num = (&so - &si).abs();
        if num.is_zero() {
            return Self {
                num,
                den: ExactReal::from_int(BigInt::from(1)),
            };
        }
        Self { num, den: si.abs() }
    }

    pub fn is_infinite(&self) -> bool {
        self.den.is_zero()
    }

    /// `num <= bound * den`.
    pub fn at_most(&self, bound: &ExactReal) -> bool {
        !self.is_infinite() && self.num <= &self.den * bound
    }

    pub fn to_f64(&self) -> f64 {
        self.scaled_f64(0)
    }

    /// The error in units of `u^2 = 2^-2p`.
    pub fn in_u2(&self, p: u32) -> f64 {
        self.scaled_f64(2 * i64::from(p))
    }

    /// `2^k num / den`, normalized before converting.
    fn scaled_f64(&self, k: i64) -> f64 {
        if self.is_infinite() {
            return f64::INFINITY;
        }
        let shift = self.den.leading_exponent().unwrap_or(0);
        self.num.shifted(k - shift).to_f64() / self.den.shifted(-shift).to_f64()
    }
}

impl fmt::Display for RelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{} / {}", self.num, self.den)
        }
    }
}

/// Relative error of one simulation, with exact arithmetic.
pub fn relative_error(f: &Fpan, inputs: &[FloatVal], fmt: &FormatParams) -> Result<(RelError, Trace), OracleError> {
    let trace = simulate(f, inputs, fmt)?;
    Ok((RelError::of(inputs, &trace.output_values(), fmt), trace))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub network: String,
    pub window: SearchWindow,
    pub evaluated: u128,
    /// Worst inputs, in input order.
    pub inputs: Vec<FloatVal>,
    pub error: RelError,
    pub error_f64: f64,
    pub error_u2: f64,
    pub trace: Trace,
}

impl ErrorReport {
    /// Recompute the error from the trace with exact arithmetic.
    pub fn recheck(&self) -> bool {
        let fmt = self.window.format();
        RelError::of(&self.inputs, &self.trace.output_values(), &fmt) == self.error
    }
}

fn ensure_budget(space: &Space, w: &SearchWindow) -> Result<u128, OracleError> {
    let size = space.size();
    if size > w.budget {
        return Err(OracleError::BudgetExceeded { size, budget: w.budget });
    }
    Ok(size)
}

/// Largest relative error over the window; ties go to the smallest tuple in
/// enumeration order.
pub fn worst_case_error(f: &Fpan, w: &SearchWindow) -> Result<ErrorReport, OracleError> {
    let space = Space::build(w, f.wire_count())?;
    let evaluated = ensure_budget(&space, w)?;
    let kernel = Kernel::new(f, w.precision);
    type Best = Option<((i128, i128), Vec<usize>)>;
    let better = |a: &((i128, i128), Vec<usize>), b: &((i128, i128), Vec<usize>)| {
        ratio_gt(a.0, b.0) || (!ratio_gt(b.0, a.0) && a.1 < b.1)
    };
    let best: Best = space.for_each(
        || (None::<((i128, i128), Vec<usize>)>, Vec::new()),
        |(best, seg): &mut (Best, Vec<i128>), key, ins| {
            kernel.run(ins, seg);
            let err = kernel.error(ins, seg);
            let replace = match best {
                None => true,
                Some(b) => ratio_gt(err, b.0) || (!ratio_gt(b.0, err) && key < b.1.as_slice()),
            };
            if replace {
                *best = Some((err, key.to_vec()));
            }
        },
        |a, b| match (a.0, b.0) {
            (Some(x), Some(y)) => (Some(if better(&x, &y) { x } else { y }), Vec::new()),
            (x, y) => (x.or(y), Vec::new()),
        },
    )
    .0;
    let (_, key) = best.ok_or_else(|| OracleError::Mismatch("window holds no input tuple".into()))?;
    let fmt = w.format();
    let inputs: Vec<FloatVal> = space.inputs_of(&key).into_iter().map(|i| space.values[i]).collect();
    let (error, trace) = relative_error(f, &inputs, &fmt)?;
    Ok(ErrorReport {
        network: f.name().to_string(),
        window: w.clone(),
        evaluated,
        error_f64: error.to_f64(),
        error_u2: error.in_u2(w.precision),
        inputs,
        error,
        trace,
    })
}

/// A property checked on every simulated tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConcreteProperty {
    /// `|sum(out) - sum(in)| <= bound * |sum(in)|`.
    RelErrorAtMost(#[serde(with = "exact_str")] ExactReal),
    /// Every output equals the input of the same position.
    OutputsEqualInputs,
    /// `|num| < 2^-k |den|` for two outputs or segments.
    ErrorBound { k: i64, num: String, den: String },
}

impl ConcreteProperty {
    /// `(1 + 2u) 2^-k`, the bounds of the double-double theorems.
    pub fn theorem_bound(p: u32, k: i64) -> Self {
        let p = i64::from(p);
        let m = (BigInt::from(1) << (p as usize)) + BigInt::from(2);
        ConcreteProperty::RelErrorAtMost(ExactReal::new(m, -p - k))
    }
}

impl fmt::Display for ConcreteProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcreteProperty::RelErrorAtMost(b) => write!(f, "relative error <= {b}"),
            ConcreteProperty::OutputsEqualInputs => f.write_str("outputs = inputs"),
            ConcreteProperty::ErrorBound { k, num, den } => write!(f, "|{num}| < 2^-{k} |{den}|"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub property: String,
    pub window: SearchWindow,
    pub evaluated: u128,
    pub violations: u128,
    /// Smallest violating tuple in enumeration order.
    pub first: Option<Counterexample>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub inputs: Vec<FloatVal>,
    pub error: RelError,
    pub trace: Trace,
}

type Check = Box<dyn Fn(&[i128], &[i128]) -> bool + Sync>;

fn compile(prop: &ConcreteProperty, f: &Fpan, space: &Space, kernel: &Kernel) -> Result<Check, OracleError> {
    Ok(match prop {
        ConcreteProperty::RelErrorAtMost(bound) => {
            // num <= m 2^t den, scaled so both sides are integers.
            let m = i128::try_from(bound.mantissa().clone())
                .map_err(|_| OracleError::Mismatch(format!("bound {bound} too precise")))?;
            let t = bound.scale();
            let mbits = 128 - m.unsigned_abs().leading_zeros();
            let vb = i64::from(space.value_bits);
            let need = if t >= 0 { i64::from(mbits) + t + vb } else { (vb - t).max(i64::from(mbits) + vb) };
            if need > 126 {
                return Err(OracleError::Mismatch(format!("bound {bound} out of range for exact search")));
            }
            let outs = kernel.outputs.clone();
            Box::new(move |ins, seg| {
                let sin: i128 = ins.iter().sum();
                let d = (outs.iter().map(|&s| seg[s]).sum::<i128>() - sin).abs();
                if d == 0 {
                    return true;
                }
                let rhs = m * sin.abs();
                if t >= 0 {
                    d <= rhs << t
                } else {
                    d << (-t) <= rhs
                }
            })
        }
        ConcreteProperty::OutputsEqualInputs => {
            if kernel.outputs.len() != kernel.inputs.len() {
                return Err(OracleError::Mismatch("output and input counts differ".into()));
            }
            let outs = kernel.outputs.clone();
            Box::new(move |ins, seg| outs.iter().zip(ins).all(|(&s, &v)| seg[s] == v))
        }
        ConcreteProperty::ErrorBound { k, num, den } => {
            let resolve = |n: &str| f.resolve_segment(n).ok_or_else(|| OracleError::UnknownOutput(n.to_string()));
            let (a, b, k) = (resolve(num)?, resolve(den)?, *k);
            if k < 0 || k > 126 - space.value_bits as i64 {
                return Err(OracleError::Mismatch(format!("k = {k} out of range for exact search")));
            }
            Box::new(move |_, seg| seg[a] == 0 || seg[a].abs() << k < seg[b].abs())
        }
    })
}

/// Evaluate `prop` on every tuple of the window.
pub fn exhaustive_verify(f: &Fpan, prop: &ConcreteProperty, w: &SearchWindow) -> Result<Verification, OracleError> {
    let space = Space::build(w, f.wire_count())?;
    let evaluated = ensure_budget(&space, w)?;
    let kernel = Kernel::new(f, w.precision);
    let check = compile(prop, f, &space, &kernel)?;
    type Acc = (u128, Option<Vec<usize>>, Vec<i128>);
    let min_key = |a: Option<Vec<usize>>, b: Option<Vec<usize>>| match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let (violations, first, _) = space.for_each(
        || (0u128, None, Vec::new()),
        |acc: &mut Acc, key, ins| {
            kernel.run(ins, &mut acc.2);
            if !check(ins, &acc.2) {
                acc.0 += 1;
                if acc.1.as_deref().is_none_or(|k| key < k) {
                    acc.1 = Some(key.to_vec());
                }
            }
        },
        |a, b| (a.0 + b.0, min_key(a.1, b.1), Vec::new()),
    );
    let fmt = w.format();
    let first = match first {
        Some(key) => {
            let inputs: Vec<FloatVal> = space.inputs_of(&key).into_iter().map(|i| space.values[i]).collect();
            let (error, trace) = relative_error(f, &inputs, &fmt)?;
            Some(Counterexample { inputs, error, trace })
        }
        None => None,
    };
    Ok(Verification {
        property: prop.to_string(),
        window: w.clone(),
        evaluated,
        violations,
        first,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpan::{builtin, parse};
    use crate::softfloat::{add, two_sum};

    #[test]
    fn integer_rounding_matches_softfloat() {
        let w = SearchWindow::default_for(4).with_exponents(-6, 0);
        let fmt = w.format();
        let space = Space::build(&w, 2).unwrap();
        for (i, a) in space.values.iter().enumerate() {
            for (j, b) in space.values.iter().enumerate() {
                let s = add(a, b, &fmt).unwrap();
                let got = ExactReal::new(BigInt::from(rne(space.ints[i] + space.ints[j], 4)), w.lo - 3);
                assert_eq!(got, s.to_exact(&fmt), "{a:?} {b:?}");
            }
        }
        assert_eq!(rne(0b10011, 4), 0b10100);
        assert_eq!(rne(0b10001, 4), 0b10000);
        assert_eq!(rne(-0b11111, 4), -0b100000);
    }

    #[test]
    fn pairs_are_fixed_points() {
        let w = SearchWindow::default_for(3).with_exponents(-5, 0);
        let fmt = w.format();
        let space = Space::build(&w, 4).unwrap();
        for opt in &space.units[0] {
            let (a, b) = (space.values[opt[0]], space.values[opt[1]]);
            let (s, _) = two_sum(&a, &b, &fmt).unwrap();
            assert_eq!(s.to_exact(&fmt), a.to_exact(&fmt));
        }
    }

    #[test]
    fn canonical_reduction_agrees_with_full_search() {
        let f = builtin("ddadd").unwrap();
        let full = SearchWindow {
            canonical: false,
            ..SearchWindow::default_for(3).with_exponents(-6, 0)
        };
        let canon = SearchWindow::default_for(3).with_exponents(-6, 0);
        assert!(canon.size(&f).unwrap() < full.size(&f).unwrap());
        let a = worst_case_error(&f, &full).unwrap();
        let b = worst_case_error(&f, &canon).unwrap();
        assert_eq!(a.error, b.error);
        let prop = ConcreteProperty::theorem_bound(3, 2 * 3 - 2);
        assert!(exhaustive_verify(&f, &prop, &full).unwrap().passed());
        assert!(exhaustive_verify(&f, &prop, &canon).unwrap().passed());
    }

    #[test]
    fn identity_and_single_gate() {
        let id = parse("wires a b").unwrap();
        let w = SearchWindow::default_for(3).with_exponents(-4, 0).with_fixed_point_pairs(false);
        let v = exhaustive_verify(&id, &ConcreteProperty::OutputsEqualInputs, &w).unwrap();
        assert!(v.passed());
        assert_eq!(v.evaluated, w.size(&id).unwrap());
        let g = parse("wires a b\ntwosum a b").unwrap();
        let r = worst_case_error(&g, &w).unwrap();
        assert!(r.error.num.is_zero());
        assert!(r.recheck());
    }

    #[test]
    fn reports_recheck_and_budget() {
        let f = builtin("madd").unwrap();
        let w = SearchWindow::default_for(3);
        let r = worst_case_error(&f, &w).unwrap();
        assert!(r.recheck());
        let ConcreteProperty::RelErrorAtMost(b) = ConcreteProperty::theorem_bound(3, 5) else { unreachable!() };
        assert!(r.error.at_most(&b));
        assert!(!r.error.at_most(&ExactReal::new(BigInt::from(1), -6)));
        let small = w.clone().with_budget(10);
        assert!(matches!(worst_case_error(&f, &small), Err(OracleError::BudgetExceeded { .. })));
        let wide = SearchWindow::default_for(40);
        assert!(matches!(wide.size(&f), Err(OracleError::TooWide { .. })));
    }

    #[test]
    fn add2_has_large_errors() {
        let f = builtin("add2").unwrap();
        let w = SearchWindow::default_for(4).with_exponents(-6, 0);
        let bound = ExactReal::new(BigInt::from(1), -1);
        let v = exhaustive_verify(&f, &ConcreteProperty::RelErrorAtMost(bound.clone()), &w).unwrap();
        assert!(!v.passed());
        let cex = v.first.unwrap();
        assert!(!cex.error.at_most(&bound));
    }

    #[test]
    fn rel_error_units() {
        let fmt = FormatParams::new(4, -20, None).unwrap();
        let one = FloatVal::parse_literal("1", &fmt).unwrap();
        let out = FloatVal::parse_literal("1.001_2", &fmt).unwrap();
        let e = RelError::of(&[one], &[out], &fmt);
        assert_eq!(e.to_f64(), 0.125);
        assert_eq!(e.in_u2(4), 32.0);
        let z = FloatVal::pos_zero(&fmt);
        assert!(RelError::of(&[one, one.negated()], &[one], &fmt).is_infinite());
        assert_eq!(RelError::of(&[z], &[z], &fmt).to_f64(), 0.0);
    }
}
