//! Exhaustive soundness, coverage and tightness checks at small precision.
//!
//! Every check enumerates input pairs whose larger nonzero exponent is the
//! top of the window (the lemmas only compare exponents with each other, so
//! this loses nothing), in both orders, plus all pairs of zeros.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{eval_ctx, role_lookup, Constraint, Lemma, Role};
use crate::abstraction::{abstract_value, AbstractVal, Domain};
use crate::softfloat::{two_sum_with, FloatVal, FormatParams, SoftFloatError};

/// Limit on the number of ordered input pairs one check may enumerate.
pub const PAIR_BUDGET: usize = 50_000_000;

const MAX_REPORTED: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LemmaCheckError {
    #[error("window [{lo}, {hi}] is empty")]
    EmptyWindow { lo: i64, hi: i64 },
    #[error("window needs {pairs} input pairs, budget is {budget}")]
    TooLarge { pairs: usize, budget: usize },
    #[error("window bottom {lo} leaves no room for TwoSum errors above emin {emin}")]
    BelowEmin { lo: i64, emin: i64 },
    #[error(transparent)]
    Float(#[from] SoftFloatError),
}

/// Inclusive range of exponents for nonzero inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpWindow {
    pub lo: i64,
    pub hi: i64,
}

impl ExpWindow {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    /// `[-(2p + 4), 0]`.
    pub fn default_for(p: u32) -> Self {
        Self {
            lo: -(2 * i64::from(p) + 4),
            hi: 0,
        }
    }
}

impl fmt::Display for ExpWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for ExpWindow {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got `{s}`"))?;
        let lo = a.trim().parse().map_err(|_| format!("bad bound `{a}`"))?;
        let hi = b.trim().parse().map_err(|_| format!("bad bound `{b}`"))?;
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub x: String,
    pub y: String,
    pub s: String,
    pub e: String,
    pub abstraction: [String; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub lemma: String,
    pub format: String,
    pub window: ExpWindow,
    pub pairs_checked: u64,
    pub hypothesis_matches: u64,
    pub violation_count: u64,
    /// At most a handful of examples, in enumeration order.
    pub violations: Vec<Violation>,
    /// Number of matching pairs for which each case holds.
    pub case_witnesses: Vec<u64>,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.violation_count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseWitness {
    pub case: usize,
    pub count: u64,
    /// First realizing `(x, y)`, as literals.
    pub example: Option<(String, String)>,
    /// No input in the window realizes the case.
    pub vacuous: bool,
}

/// An input pair that no lemma hypothesis matches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Uncovered {
    pub x: AbstractVal,
    pub y: AbstractVal,
}

/// Concrete pairs with their TwoSum outputs and SELTZO abstractions.
pub(crate) struct PairTable {
    pub fmt: FormatParams,
    pub concrete: Vec<[FloatVal; 4]>,
    pub abstracts: Vec<[AbstractVal; 4]>,
}

/// Values with exponent in `[lo, hi]`, sign-major then exponent then fraction.
pub(crate) fn window_values(fmt: &FormatParams, lo: i64, hi: i64) -> Vec<FloatVal> {
    let n = 1u128 << fmt.fraction_bits();
    let mut out = Vec::new();
    for neg in [false, true] {
        for e in lo..=hi {
            for f in 0..n {
                out.push(FloatVal::new(neg, e, f, fmt).expect("in range"));
            }
        }
    }
    out
}

impl PairTable {
    pub fn build(fmt: &FormatParams, w: ExpWindow) -> Result<Self, LemmaCheckError> {
        if w.lo > w.hi {
            return Err(LemmaCheckError::EmptyWindow { lo: w.lo, hi: w.hi });
        }
        let p = i64::from(fmt.precision);
        if w.lo - p < fmt.emin {
            return Err(LemmaCheckError::BelowEmin { lo: w.lo, emin: fmt.emin });
        }
        let per_exp = 2usize << fmt.fraction_bits().min(40);
        let span = (w.hi - w.lo + 1) as usize;
        let pairs = per_exp.saturating_mul(per_exp.saturating_mul(span + 1)).saturating_mul(2);
        if pairs > PAIR_BUDGET {
            return Err(LemmaCheckError::TooLarge {
                pairs,
                budget: PAIR_BUDGET,
            });
        }
        let zeros = [FloatVal::pos_zero(fmt), FloatVal::neg_zero(fmt)];
        let tops = window_values(fmt, w.hi, w.hi);
        let mut all = window_values(fmt, w.lo, w.hi);
        all.extend(zeros);
        let mut inputs: Vec<(FloatVal, FloatVal)> = Vec::new();
        for x in &tops {
            for y in &all {
                inputs.push((*x, *y));
                if y.is_zero() || y.exponent() < w.hi {
                    inputs.push((*y, *x));
                }
            }
        }
        for a in zeros {
            for b in zeros {
                inputs.push((a, b));
            }
        }
        let rows: Result<Vec<_>, SoftFloatError> = inputs
            .par_iter()
            .map(|(x, y)| {
                let (s, e) = two_sum_with::<i128>(x, y, fmt)?;
                let c = [*x, *y, s, e];
                Ok((c, c.map(|v| abstract_value(&v, Domain::Seltzo, fmt))))
            })
            .collect();
        let (concrete, abstracts) = rows?.into_iter().unzip();
        Ok(Self {
            fmt: fmt.clone(),
            concrete,
            abstracts,
        })
    }

    fn literal(&self, v: &FloatVal) -> String {
        v.to_literal(&self.fmt)
    }
}

#[derive(Default)]
struct Tally {
    matches: u64,
    violations: u64,
    first_bad: Vec<usize>,
    cases: Vec<u64>,
    first_case: Vec<Option<usize>>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.matches += other.matches;
        self.violations += other.violations;
        self.first_bad.extend(other.first_bad);
        self.first_bad.sort_unstable();
        self.first_bad.truncate(MAX_REPORTED);
        for (i, c) in other.cases.into_iter().enumerate() {
            self.cases[i] += c;
        }
        for (i, f) in other.first_case.into_iter().enumerate() {
            self.first_case[i] = match (self.first_case[i], f) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        self
    }
}

fn tally(lemma: &Lemma, domain: Domain, table: &PairTable) -> Tally {
    let ctx = eval_ctx(&table.fmt, domain);
    let n = lemma.cases.len();
    let empty = || Tally {
        cases: vec![0; n],
        first_case: vec![None; n],
        ..Tally::default()
    };
    table
        .abstracts
        .par_iter()
        .enumerate()
        .fold(empty, |mut t, (i, vals)| {
            let look = role_lookup(vals);
            if !lemma.hypothesis.eval(&ctx, &look).unwrap_or(false) {
                return t;
            }
            t.matches += 1;
            let mut any = false;
            for (k, c) in lemma.cases.iter().enumerate() {
                if c.eval(&ctx, &look).unwrap_or(false) {
                    any = true;
                    t.cases[k] += 1;
                    if t.first_case[k].is_none() {
                        t.first_case[k] = Some(i);
                    }
                }
            }
            if !any {
                t.violations += 1;
                if t.first_bad.len() < MAX_REPORTED {
                    t.first_bad.push(i);
                }
            }
            t
        })
        .reduce(empty, Tally::merge)
}

/// The narrowest domain with every field `lemma` mentions.
fn lemma_domain(lemma: &Lemma) -> Domain {
    Domain::ALL
        .into_iter()
        .find(|d| lemma.check_well_formed(*d).is_ok())
        .unwrap_or(Domain::Seltzo)
}

fn soundness_from_table(lemma: &Lemma, domain: Domain, table: &PairTable, w: ExpWindow) -> SoundnessReport {
    let t = tally(lemma, domain, table);
    let violations = t
        .first_bad
        .iter()
        .map(|&i| {
            let c = &table.concrete[i];
            let a = &table.abstracts[i];
            Violation {
                x: table.literal(&c[0]),
                y: table.literal(&c[1]),
                s: table.literal(&c[2]),
                e: table.literal(&c[3]),
                abstraction: a.map(|v| v.project(domain).to_string()),
            }
        })
        .collect();
    SoundnessReport {
        lemma: lemma.name.clone(),
        format: table.fmt.to_string(),
        window: w,
        pairs_checked: table.concrete.len() as u64,
        hypothesis_matches: t.matches,
        violation_count: t.violations,
        violations,
        case_witnesses: t.cases,
    }
}

/// Check `lemma` on every canonical input pair in the window, in both
/// orientations.
pub fn check_soundness(lemma: &Lemma, fmt: &FormatParams, w: ExpWindow) -> Result<SoundnessReport, LemmaCheckError> {
    let table = PairTable::build(fmt, w)?;
    Ok(soundness_from_table(lemma, lemma_domain(lemma), &table, w))
}

/// [`check_soundness`] for many lemmas over one shared enumeration.
pub fn check_soundness_all(
    lemmas: &[Lemma],
    domain: Domain,
    fmt: &FormatParams,
    w: ExpWindow,
) -> Result<Vec<SoundnessReport>, LemmaCheckError> {
    let table = PairTable::build(fmt, w)?;
    Ok(lemmas.iter().map(|l| soundness_from_table(l, domain, &table, w)).collect())
}

/// Per-case witnesses; a case with none is flagged vacuous.
pub fn check_tightness(lemma: &Lemma, fmt: &FormatParams, w: ExpWindow) -> Result<Vec<CaseWitness>, LemmaCheckError> {
    let table = PairTable::build(fmt, w)?;
    let t = tally(lemma, lemma_domain(lemma), &table);
    Ok(t.cases
        .iter()
        .zip(&t.first_case)
        .enumerate()
        .map(|(case, (&count, first))| CaseWitness {
            case,
            count,
            example: first.map(|i| {
                let c = &table.concrete[i];
                (table.literal(&c[0]), table.literal(&c[1]))
            }),
            vacuous: count == 0,
        })
        .collect())
}

/// Input pairs matched by no hypothesis of `lemmas`, as abstractions in
/// `domain`.
pub fn check_coverage(
    lemmas: &[Lemma],
    domain: Domain,
    fmt: &FormatParams,
    w: ExpWindow,
) -> Result<Vec<Uncovered>, LemmaCheckError> {
    let table = PairTable::build(fmt, w)?;
    let ctx = eval_ctx(fmt, domain);
    let oriented: Vec<Constraint<Role>> = lemmas
        .iter()
        .flat_map(|l| l.orientations())
        .map(|l| l.hypothesis)
        .collect();
    let set: BTreeSet<Uncovered> = table
        .abstracts
        .par_iter()
        .filter(|vals| {
            let look = role_lookup(vals);
            !oriented.iter().any(|h| h.eval(&ctx, &look).unwrap_or(false))
        })
        .map(|vals| Uncovered {
            x: vals[0].project(domain),
            y: vals[1].project(domain),
        })
        .collect();
    Ok(set.into_iter().collect())
}

/// Every abstract output pair `(s, e)` produced by inputs in `class`.
pub fn mine_transfer(
    class: &Constraint<Role>,
    domain: Domain,
    fmt: &FormatParams,
    w: ExpWindow,
) -> Result<BTreeSet<(AbstractVal, AbstractVal)>, LemmaCheckError> {
    let table = PairTable::build(fmt, w)?;
    let ctx = eval_ctx(fmt, domain);
    Ok(table
        .abstracts
        .par_iter()
        .filter(|vals| class.eval(&ctx, &role_lookup(vals)).unwrap_or(false))
        .map(|vals| (vals[2].project(domain), vals[3].project(domain)))
        .collect())
}
