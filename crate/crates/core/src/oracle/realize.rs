use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::abstraction::{abstract_value, dominates_concrete, enumerate_concretizations, AbstractVal, Domain};
use crate::fpan::{simulate, Fpan, Trace};
use crate::lemmas::{self, mine_transfer, Cmp, Constraint, ExpWindow, Field, LinExpr, Role};
use crate::smt::{self, Goal, Precondition, PropertySpec, SolverConfig, Verdict};
use crate::softfloat::{add, two_sum, FloatVal, FormatParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Realization {
    /// Concrete inputs violating the property.
    Realized { inputs: Vec<FloatVal>, trace: Trace },
    /// Every concretization was tried and none violates the property.
    Spurious { tried: u128 },
    /// Too many concretizations to try.
    Inconclusive { size: u128 },
}

fn product_size(sets: &[Vec<FloatVal>]) -> u128 {
    sets.iter().map(|s| s.len() as u128).product()
}

fn concretize(v: &AbstractVal, fmt: &FormatParams, budget: u128) -> Option<Vec<FloatVal>> {
    let it = enumerate_concretizations(v, fmt);
    (it.total() <= budget).then(|| it.collect())
}

/// Shift nonzero values so the largest exponent among `vals` is 0, in a
/// format with enough room below for every rounding error.
fn rebase(vals: &[AbstractVal], fmt: &FormatParams) -> (Vec<AbstractVal>, FormatParams) {
    let nonzero = || vals.iter().filter(|v| !v.is_zero(fmt)).map(|v| v.e);
    let top = nonzero().max().unwrap_or(0);
    let low = nonzero().min().unwrap_or(0) - top;
    let p = i64::from(fmt.precision);
    let work = FormatParams::new(fmt.precision, (low - 2 * p - 8).min(-2 * p - 8), None).expect("valid precision");
    let out = vals
        .iter()
        .map(|v| {
            if v.is_zero(fmt) {
                AbstractVal { e: work.zero_exponent(), ..*v }
            } else {
                AbstractVal { e: v.e - top, ..*v }
            }
        })
        .collect();
    (out, work)
}

fn goal_violated(f: &Fpan, g: &Goal, t: &Trace, fmt: &FormatParams) -> Result<bool, OracleError> {
    let seg = |n: &str| smt::resolve(f, n).map_err(|_| OracleError::UnknownOutput(n.to_string()));
    Ok(match g {
        Goal::ErrorBound { k, num, den } => {
            let (a, b) = (t.values[seg(num)?], t.values[seg(den)?]);
            // |a| >= 2^-k |b|
            !a.is_zero() && a.to_exact(fmt).abs() >= b.to_exact(fmt).abs().shifted(-k)
        }
        Goal::Dominates { rel, a, b } => !dominates_concrete(&t.values[seg(a)?], &t.values[seg(b)?], *rel, fmt),
        Goal::All(gs) => {
            for g in gs {
                if goal_violated(f, g, t, fmt)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

fn pre_holds(f: &Fpan, pre: &[Precondition], ins: &[FloatVal], fmt: &FormatParams) -> Result<bool, OracleError> {
    let value = |n: &str| -> Result<FloatVal, OracleError> {
        let s = smt::resolve(f, n).map_err(|_| OracleError::UnknownOutput(n.to_string()))?;
        let pos = f
            .inputs()
            .iter()
            .position(|&w| w == s)
            .ok_or_else(|| OracleError::Mismatch(format!("precondition on non-input `{n}`")))?;
        Ok(ins[pos])
    };
    for p in pre {
        let ok = match p {
            Precondition::FixedPoint(a, b) => {
                let (a, b) = (value(a)?, value(b)?);
                add(&a, &b, fmt)?.to_exact(fmt) == a.to_exact(fmt)
            }
            Precondition::Dominates { rel, a, b } => dominates_concrete(&value(a)?, &value(b)?, *rel, fmt),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Search the concretizations of the input segments of `assignment` for
/// inputs that violate `prop`. Every property here is invariant under
/// scaling by powers of two, so the inputs are first shifted to put the
/// largest exponent at 0; realized inputs are reported at that scale.
pub fn realize_abstract_cex(
    assignment: &BTreeMap<String, AbstractVal>,
    f: &Fpan,
    prop: &PropertySpec,
    fmt: &FormatParams,
    budget: u128,
) -> Result<Realization, OracleError> {
    let labels = f.segments();
    let mut ins = Vec::new();
    for &w in f.inputs() {
        let label = labels[w].to_string();
        let v = assignment
            .get(&label)
            .ok_or_else(|| OracleError::Mismatch(format!("assignment lacks input segment {label}")))?;
        ins.push(*v);
    }
    let (ins, fmt) = rebase(&ins, fmt);
    let fmt = &fmt;
    let mut sets = Vec::new();
    for v in &ins {
        match concretize(v, fmt, budget) {
            Some(s) => sets.push(s),
            None => return Ok(Realization::Inconclusive { size: u128::MAX }),
        }
    }
    let size = product_size(&sets);
    if size > budget {
        return Ok(Realization::Inconclusive { size });
    }
    let mut idx = vec![0usize; sets.len()];
    let mut tried = 0u128;
    if size == 0 {
        return Ok(Realization::Spurious { tried });
    }
    loop {
        let ins: Vec<FloatVal> = idx.iter().zip(&sets).map(|(&i, s)| s[i]).collect();
        tried += 1;
        if pre_holds(f, &prop.pre, &ins, fmt)? {
            let trace = simulate(f, &ins, fmt)?;
            if goal_violated(f, &prop.goal, &trace, fmt)? {
                return Ok(Realization::Realized { inputs: ins, trace });
            }
        }
        let mut u = sets.len();
        loop {
            if u == 0 {
                return Ok(Realization::Spurious { tried });
            }
            u -= 1;
            idx[u] += 1;
            if idx[u] < sets[u].len() {
                break;
            }
            idx[u] = 0;
        }
    }
}

/// Whether some concrete TwoSum maps inputs abstracted as `x`, `y` to
/// outputs abstracted as `s`, `e`; `None` if there are too many inputs.
pub fn gate_realizable(
    vals: &[AbstractVal; 4],
    fmt: &FormatParams,
    budget: u128,
) -> Result<Option<bool>, OracleError> {
    let (vals, work) = rebase(vals, fmt);
    let fmt = &work;
    let (Some(xs), Some(ys)) = (concretize(&vals[0], fmt, budget), concretize(&vals[1], fmt, budget)) else {
        return Ok(None);
    };
    if (xs.len() as u128) * (ys.len() as u128) > budget {
        return Ok(None);
    }
    let domain = vals[0].domain;
    for x in &xs {
        for y in &ys {
            let (s, e) = two_sum(x, y, fmt)?;
            if abstract_value(&s, domain, fmt) == vals[2] && abstract_value(&e, domain, fmt) == vals[3] {
                return Ok(Some(true));
            }
        }
    }
    Ok(Some(false))
}

/// One gate of an abstract counterexample that no concrete TwoSum realizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateGap {
    pub gate: usize,
    /// `x, y, s, e` as assigned by the solver.
    pub assigned: [AbstractVal; 4],
    /// Outputs actually reachable from `x, y`, shifted so the larger input
    /// exponent is 0.
    pub reachable: Vec<(AbstractVal, AbstractVal)>,
}

/// Why a domain falls short of a target error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub network: String,
    pub domain: Domain,
    pub precision: u32,
    pub target_k: i64,
    pub verdict: Verdict,
    pub catalog_fingerprint: String,
    /// Realization of the whole counterexample, when it was attempted.
    pub realization: Option<Realization>,
    pub gaps: Vec<GateGap>,
    /// Gates whose realizability could not be decided within budget.
    pub undecided: Vec<usize>,
}

impl GapReport {
    /// The counterexample relies on at least one impossible gate transfer.
    pub fn has_gaps(&self) -> bool {
        !self.gaps.is_empty()
    }
}

fn fix_fields(role: Role, v: &AbstractVal) -> Vec<Constraint<Role>> {
    Field::of_domain(v.domain)
        .into_iter()
        .map(|f| {
            let val = match f {
                Field::S => v.s,
                Field::E => v.e,
                Field::Nlz => v.nlz.unwrap_or(0),
                Field::Nlo => v.nlo.unwrap_or(0),
                Field::Ntz => v.ntz.unwrap_or(0),
                Field::Nto => v.nto.unwrap_or(0),
            };
            Constraint::cmp(LinExpr::var(role, f), Cmp::Eq, LinExpr::constant(val))
        })
        .collect()
}

/// Ask the solver for a counterexample to `|w0| < 2^-k |z0|` and locate the
/// gates whose assigned transfer is impossible, mining the true transfer for
/// each. Intended for small precisions where concretizations are enumerable.
pub fn gap_report(
    f: &Fpan,
    domain: Domain,
    k: i64,
    fmt: &FormatParams,
    cfg: &SolverConfig,
    budget: u128,
) -> Result<GapReport, Box<dyn std::error::Error + Send + Sync>> {
    let prop = PropertySpec::relative_error(f, k);
    let prob = smt::encode(f, domain, &prop, fmt)?;
    let r = smt::solve(&prob, cfg)?;
    let mut report = GapReport {
        network: f.name().to_string(),
        domain,
        precision: fmt.precision,
        target_k: k,
        verdict: r.verdict,
        catalog_fingerprint: lemmas::fingerprint(domain),
        realization: None,
        gaps: Vec::new(),
        undecided: Vec::new(),
    };
    let Some(model) = r.model else {
        return Ok(report);
    };
    report.realization = Some(realize_abstract_cex(&model, f, &prop, fmt, budget)?);
    let labels: Vec<String> = f.segments().iter().map(|l| l.to_string()).collect();
    for (gi, g) in f.gate_segments().iter().enumerate() {
        let assigned = [g.in_sum, g.in_err, g.out_sum, g.out_err].map(|s| model[&labels[s]]);
        match gate_realizable(&assigned, fmt, budget)? {
            Some(true) => continue,
            None => {
                report.undecided.push(gi);
                continue;
            }
            Some(false) => {}
        }
        let zero = fmt.zero_exponent();
        let top = assigned[..2].iter().filter(|v| v.e != zero).map(|v| v.e).max().unwrap_or(0);
        let shifted = assigned.map(|v| v.shifted(-top, fmt));
        let low = shifted[..2].iter().filter(|v| v.e != zero).map(|v| v.e).min().unwrap_or(0);
        let window = ExpWindow::new(low.min(0), 0);
        let class = Constraint::And([fix_fields(Role::X, &shifted[0]), fix_fields(Role::Y, &shifted[1])].concat());
        let reachable = mine_transfer(&class, domain, fmt, window)?.into_iter().collect();
        report.gaps.push(GateGap {
            gate: gi,
            assigned,
            reachable,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpan::builtin;
    use crate::oracle::{paper_witness, Witness};

    #[test]
    fn witness_abstraction_realizes() {
        let fmt = FormatParams::new(5, -200, None).unwrap();
        let f = builtin("ddadd_aug").unwrap();
        let ins = paper_witness(Witness::Ddadd3u2, &fmt).unwrap();
        let t = simulate(&f, &ins, &fmt).unwrap();
        let labels = f.segments();
        let model: BTreeMap<String, AbstractVal> = labels
            .iter()
            .zip(&t.values)
            .map(|(l, v)| (l.to_string(), abstract_value(v, Domain::Seltzo, &fmt)))
            .collect();
        let prop = PropertySpec::relative_error(&f, 2 * 5 - 1);
        match realize_abstract_cex(&model, &f, &prop, &fmt, 1 << 20).unwrap() {
            Realization::Realized { inputs, .. } => assert_eq!(inputs.len(), 4),
            other => panic!("{other:?}"),
        }
        // A generous bound is never violated, so the search is exhaustive.
        let loose = PropertySpec::relative_error(&f, 1);
        assert!(matches!(
            realize_abstract_cex(&model, &f, &loose, &fmt, 1 << 20).unwrap(),
            Realization::Spurious { .. }
        ));
        let coarse: BTreeMap<String, AbstractVal> = model.iter().map(|(k, v)| (k.clone(), v.project(Domain::Se))).collect();
        assert!(matches!(
            realize_abstract_cex(&coarse, &f, &prop, &fmt, 2).unwrap(),
            Realization::Inconclusive { .. }
        ));
    }

    #[test]
    fn gate_transfer() {
        let fmt = FormatParams::new(4, -50, None).unwrap();
        let one = FloatVal::parse_literal("1", &fmt).unwrap();
        let tiny = FloatVal::parse_literal("1.001_2 * 2^-6", &fmt).unwrap();
        let (s, e) = two_sum(&one, &tiny, &fmt).unwrap();
        let a = [one, tiny, s, e].map(|v| abstract_value(&v, Domain::Seltzo, &fmt));
        assert_eq!(gate_realizable(&a, &fmt, 1000).unwrap(), Some(true));
        let wrong = [a[0], a[1], a[0], a[0]];
        assert_eq!(gate_realizable(&wrong, &fmt, 1000).unwrap(), Some(false));
    }
}
