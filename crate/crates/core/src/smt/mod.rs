//! Reduction of FPAN properties to linear integer arithmetic.
//!
//! Every wire segment gets one integer variable per field of the abstract
//! domain. The problem asserts that each segment is a consistent abstract
//! value, that every gate obeys every catalog lemma in both orientations and
//! produces a TwoSum fixed point, and that the property fails. An
//! unsatisfiable problem proves the property.

mod qffp;
mod solver;

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{Domain, Relation};
use crate::fpan::Fpan;
use crate::lemmas::{self, Cmp, Constraint, Field, LinExpr, Role};
use crate::softfloat::FormatParams;

pub use qffp::emit_lemma_qffp;
pub use solver::{
    default_solver, max_provable_k, parse_model, solve, KProbe, KSearch, SolverConfig, SolverError, SolverResult,
    Verdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("unknown segment or output `{0}`")]
    UnknownSegment(String),
    #[error("relation {rel} is not expressible in {domain}")]
    Unsupported { rel: Relation, domain: Domain },
    #[error("negative error exponent k = {0}")]
    NegativeK(i64),
}

/// A segment variable: segment id and field.
pub type Var = usize;

/// Condition assumed to hold on the inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precondition {
    /// The pair is a TwoSum fixed point, i.e. `a = RNE(a + b)`.
    FixedPoint(String, String),
    Dominates { rel: Relation, a: String, b: String },
}

/// What the network must guarantee.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Goal {
    Dominates { rel: Relation, a: String, b: String },
    /// `|num| < 2^-k |den|`.
    ErrorBound { k: i64, num: String, den: String },
    All(Vec<Goal>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySpec {
    pub pre: Vec<Precondition>,
    pub goal: Goal,
}

impl PropertySpec {
    /// Inputs taken pairwise are fixed points and `|w0| < 2^-k |z0|`.
    pub fn relative_error(f: &Fpan, k: i64) -> Self {
        let names: Vec<String> = f.inputs().iter().map(|&w| f.wires()[w].clone()).collect();
        let pre = names
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| Precondition::FixedPoint(c[0].clone(), c[1].clone()))
            .collect();
        Self {
            pre,
            goal: Goal::ErrorBound {
                k,
                num: "w0".into(),
                den: "z0".into(),
            },
        }
    }

    /// The same property with every error exponent replaced by `k`.
    pub fn with_k(&self, k: i64) -> Self {
        fn go(g: &Goal, k: i64) -> Goal {
            match g {
                Goal::ErrorBound { num, den, .. } => Goal::ErrorBound {
                    k,
                    num: num.clone(),
                    den: den.clone(),
                },
                Goal::All(gs) => Goal::All(gs.iter().map(|g| go(g, k)).collect()),
                other => other.clone(),
            }
        }
        Self {
            pre: self.pre.clone(),
            goal: go(&self.goal, k),
        }
    }

    pub fn k(&self) -> Option<i64> {
        fn go(g: &Goal) -> Option<i64> {
            match g {
                Goal::ErrorBound { k, .. } => Some(*k),
                Goal::All(gs) => gs.iter().find_map(go),
                Goal::Dominates { .. } => None,
            }
        }
        go(&self.goal)
    }
}

impl fmt::Display for PropertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn goal(g: &Goal) -> String {
            match g {
                Goal::Dominates { rel, a, b } => format!("{a} >_{rel} {b}"),
                Goal::ErrorBound { k, num, den } => format!("|{num}| < 2^-{k} |{den}|"),
                Goal::All(gs) => gs.iter().map(goal).collect::<Vec<_>>().join(" and "),
            }
        }
        let pre: Vec<String> = self
            .pre
            .iter()
            .map(|p| match p {
                Precondition::FixedPoint(a, b) => format!("{a} = RNE({a} + {b})"),
                Precondition::Dominates { rel, a, b } => format!("{a} >_{rel} {b}"),
            })
            .collect();
        if pre.is_empty() {
            f.write_str(&goal(&self.goal))
        } else {
            write!(f, "{} -> {}", pre.join(", "), goal(&self.goal))
        }
    }
}

/// One named assertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub comment: String,
    pub formula: Constraint<Var>,
}

/// A satisfiability problem over segment variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtProblem {
    pub domain: Domain,
    pub precision: u32,
    pub emin: i64,
    pub network: String,
    pub property: String,
    pub k: Option<i64>,
    /// Segment labels, indexed by segment id.
    pub segments: Vec<String>,
    pub assertions: Vec<Assertion>,
}

impl SmtProblem {
    pub fn fields(&self) -> Vec<Field> {
        Field::of_domain(self.domain)
    }

    pub fn var_name(&self, seg: Var, field: Field) -> String {
        format!("{}_{}", field.name(), self.segments[seg])
    }

    /// Every declared variable name, segment-major.
    pub fn variables(&self) -> Vec<String> {
        let fields = self.fields();
        (0..self.segments.len())
            .flat_map(|s| fields.iter().map(move |f| (s, *f)))
            .map(|(s, f)| self.var_name(s, f))
            .collect()
    }

    pub fn variable_count(&self) -> usize {
        self.segments.len() * self.domain.arity()
    }

    pub fn ctx(&self) -> lemmas::EvalCtx {
        lemmas::EvalCtx {
            p: i64::from(self.precision),
            emin: self.emin,
            domain: self.domain,
        }
    }
}

/// Dominance `a >_rel b` as a constraint over roles `s` (for `a`) and `e`.
pub fn dominance_constraint(rel: Relation, domain: Domain) -> Result<Constraint<Role>, SmtError> {
    let text = match rel {
        Relation::P => "zero(e) or e_s - e_e >= p",
        Relation::S => "zero(e) or e_s - e_e >= p - ntz_s",
        Relation::Ulp => "zero(e) or e_s - e_e > p - 1 or {e_s - e_e = p - 1, ntz_e = p - 1}",
        Relation::Qd => "zero(e) or e_s - e_e > p or {e_s - e_e = p, ntz_e = p - 1}",
    };
    let c = lemmas::parse_roles(text).expect("dominance constraint parses");
    if !domain.has_ntz() && rel != Relation::P {
        return Err(SmtError::Unsupported { rel, domain });
    }
    Ok(c)
}

/// Sufficient condition for `|num| < 2^-k |den|`.
pub fn encode_error_goal(k: i64, num: Var, den: Var) -> Result<Constraint<Var>, SmtError> {
    if k < 0 {
        return Err(SmtError::NegativeK(k));
    }
    Ok(Constraint::Or(vec![
        Constraint::Zero(num),
        Constraint::cmp(
            LinExpr::var(den, Field::E).minus(&LinExpr::var(num, Field::E)),
            Cmp::Gt,
            LinExpr::constant(k),
        ),
    ]))
}

/// Validity of one abstract value in `domain`.
pub fn consistency<V: Ord + Clone>(v: V, domain: Domain, fmt: &FormatParams) -> Constraint<V> {
    let w = i64::from(fmt.fraction_bits());
    let var = |f: Field| LinExpr::var(v.clone(), f);
    let k = LinExpr::constant;
    let cmp = |a: LinExpr<V>, op: Cmp, b: LinExpr<V>| Constraint::cmp(a, op, b);
    let mut items = vec![
        cmp(k(0), Cmp::Le, var(Field::S)),
        cmp(var(Field::S), Cmp::Le, k(1)),
        cmp(var(Field::E), Cmp::Ge, k(fmt.zero_exponent())),
    ];
    let zero = Constraint::Zero(v.clone());
    let implies = |a: Constraint<V>, b: Constraint<V>| Constraint::Or(vec![a.negate(), b]);
    if domain == Domain::Se {
        return Constraint::And(items);
    }
    let runs: &[Field] = if domain == Domain::Setz {
        &[Field::Ntz]
    } else {
        &[Field::Nlz, Field::Nlo, Field::Ntz, Field::Nto]
    };
    for f in runs {
        items.push(cmp(k(0), Cmp::Le, var(*f)));
        items.push(cmp(var(*f), Cmp::Le, k(w)));
    }
    if domain == Domain::Setz {
        items.push(implies(zero, cmp(var(Field::Ntz), Cmp::Eq, k(w))));
        return Constraint::And(items);
    }
    let eq = |f: Field, c: i64| cmp(var(f), Cmp::Eq, k(c));
    let pos = |f: Field| cmp(var(f), Cmp::Gt, k(0));
    let sum = |a: Field, b: Field| var(a).plus(&var(b));
    items.push(implies(
        zero,
        Constraint::And(vec![eq(Field::Nlz, w), eq(Field::Ntz, w), eq(Field::Nlo, 0), eq(Field::Nto, 0)]),
    ));
    for (a, b) in [(Field::Nlz, Field::Nlo), (Field::Ntz, Field::Nto)] {
        items.push(Constraint::Or(vec![
            Constraint::And(vec![pos(a), eq(b, 0)]),
            Constraint::And(vec![eq(a, 0), pos(b)]),
        ]));
    }
    for (a, b) in [(Field::Nlz, Field::Ntz), (Field::Nlo, Field::Nto)] {
        items.push(Constraint::Or(vec![
            Constraint::And(vec![eq(a, w), eq(b, w)]),
            cmp(sum(a, b), Cmp::Lt, k(w)),
        ]));
    }
    for (a, b) in [(Field::Nlz, Field::Nto), (Field::Ntz, Field::Nlo)] {
        items.push(Constraint::Or(vec![
            cmp(sum(a, b), Cmp::Eq, k(w)),
            cmp(sum(a, b), Cmp::Lt, k(w - 1)),
        ]));
    }
    Constraint::And(items)
}

/// Segment id for an output name, a segment label or an input wire name.
pub fn resolve(f: &Fpan, name: &str) -> Result<Var, SmtError> {
    f.resolve_segment(name)
        .or_else(|| f.wire_index(name))
        .ok_or_else(|| SmtError::UnknownSegment(name.to_string()))
}

fn bind(c: &Constraint<Role>, s: Var, e: Var) -> Constraint<Var> {
    c.map_vars(&|r: &Role| match r {
        Role::X | Role::S => s,
        Role::Y | Role::E => e,
    })
}

fn goal_constraint(f: &Fpan, g: &Goal, domain: Domain) -> Result<Constraint<Var>, SmtError> {
    Ok(match g {
        Goal::Dominates { rel, a, b } => bind(&dominance_constraint(*rel, domain)?, resolve(f, a)?, resolve(f, b)?),
        Goal::ErrorBound { k, num, den } => encode_error_goal(*k, resolve(f, num)?, resolve(f, den)?)?,
        Goal::All(gs) => Constraint::And(gs.iter().map(|g| goal_constraint(f, g, domain)).collect::<Result<_, _>>()?),
    })
}

/// Build the problem whose unsatisfiability proves `prop` for `f`.
pub fn encode(f: &Fpan, domain: Domain, prop: &PropertySpec, fmt: &FormatParams) -> Result<SmtProblem, SmtError> {
    encode_with(f, domain, prop, fmt, &lemmas::catalog(domain))
}

/// [`encode`] with an explicit lemma set.
pub fn encode_with(
    f: &Fpan,
    domain: Domain,
    prop: &PropertySpec,
    fmt: &FormatParams,
    catalog: &[lemmas::Lemma],
) -> Result<SmtProblem, SmtError> {
    let segments: Vec<String> = f.segments().iter().map(|l| l.to_string()).collect();
    let mut assertions = Vec::new();
    for (id, label) in segments.iter().enumerate() {
        assertions.push(Assertion {
            comment: format!("consistency {label}"),
            formula: consistency(id, domain, fmt),
        });
    }
    let fixed = lemmas::output_constraint(domain);
    let usable: Vec<&lemmas::Lemma> = catalog.iter().filter(|l| l.applies_at(fmt.precision)).collect();
    for (gi, g) in f.gate_segments().iter().enumerate() {
        let map = |r: &Role| match r {
            Role::X => g.in_sum,
            Role::Y => g.in_err,
            Role::S => g.out_sum,
            Role::E => g.out_err,
        };
        for l in &usable {
            for o in l.orientations() {
                let implication = Constraint::Or(vec![
                    o.hypothesis.map_vars(&map).negate(),
                    Constraint::Or(o.cases.iter().map(|c| c.map_vars(&map)).collect()),
                ]);
                assertions.push(Assertion {
                    comment: format!("gate {gi} lemma {}", o.name),
                    formula: implication,
                });
            }
        }
        assertions.push(Assertion {
            comment: format!("gate {gi} output fixed point"),
            formula: fixed.map_vars(&map),
        });
    }
    for p in &prop.pre {
        let formula = match p {
            Precondition::FixedPoint(a, b) => bind(&fixed, resolve(f, a)?, resolve(f, b)?),
            Precondition::Dominates { rel, a, b } => {
                bind(&dominance_constraint(*rel, domain)?, resolve(f, a)?, resolve(f, b)?)
            }
        };
        assertions.push(Assertion {
            comment: "precondition".into(),
            formula,
        });
    }
    assertions.push(Assertion {
        comment: format!("negated goal: {prop}"),
        formula: goal_constraint(f, &prop.goal, domain)?.negate(),
    });
    Ok(SmtProblem {
        domain,
        precision: fmt.precision,
        emin: fmt.emin,
        network: f.name().to_string(),
        property: prop.to_string(),
        k: prop.k(),
        segments,
        assertions,
    })
}

fn int(v: i64) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

fn lin(prob: &SmtProblem, e: &LinExpr<Var>) -> String {
    let e = e.with_p(i64::from(prob.precision));
    let mut terms: Vec<String> = e
        .terms
        .iter()
        .map(|((v, f), c)| {
            let name = prob.var_name(*v, *f);
            if *c == 1 {
                name
            } else {
                format!("(* {} {name})", int(*c))
            }
        })
        .collect();
    if e.constant != 0 || terms.is_empty() {
        terms.push(int(e.constant));
    }
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        format!("(+ {})", terms.join(" "))
    }
}

fn sexpr(prob: &SmtProblem, c: &Constraint<Var>, out: &mut String) {
    match c {
        Constraint::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Constraint::Cmp(a, op, b) => {
            let (a, b) = (lin(prob, a), lin(prob, b));
            let _ = match op {
                Cmp::Ne => write!(out, "(not (= {a} {b}))"),
                _ => write!(out, "({} {a} {b})", op.symbol()),
            };
        }
        Constraint::Zero(v) => {
            let _ = write!(out, "(= {} {})", prob.var_name(*v, Field::E), int(prob.emin - 1));
        }
        Constraint::Same(a, b) => {
            out.push_str("(and");
            for f in prob.fields() {
                let _ = write!(out, " (= {} {})", prob.var_name(*a, f), prob.var_name(*b, f));
            }
            out.push(')');
        }
        Constraint::And(xs) | Constraint::Or(xs) => {
            let (op, unit) = if matches!(c, Constraint::And(_)) { ("and", "true") } else { ("or", "false") };
            if xs.is_empty() {
                out.push_str(unit);
                return;
            }
            let _ = write!(out, "({op}");
            for x in xs {
                out.push(' ');
                sexpr(prob, x, out);
            }
            out.push(')');
        }
        Constraint::Not(x) => {
            out.push_str("(not ");
            sexpr(prob, x, out);
            out.push(')');
        }
    }
}

/// SMT-LIB 2 text; a pure function of the problem.
pub fn emit_smtlib(prob: &SmtProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "; network {} domain {} p={} emin={}", prob.network, prob.domain, prob.precision, prob.emin);
    let _ = writeln!(out, "; property {}", prob.property);
    out.push_str("(set-logic QF_LIA)\n");
    for v in prob.variables() {
        let _ = writeln!(out, "(declare-fun {v} () Int)");
    }
    for a in &prob.assertions {
        let _ = writeln!(out, "; {}", a.comment);
        out.push_str("(assert ");
        sexpr(prob, &a.formula, &mut out);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{abstract_value, is_consistent, AbstractVal};
    use crate::fpan::{builtin, parse};
    use crate::softfloat::FloatVal;

    #[test]
    fn variable_counts() {
        let fmt = FormatParams::binary64();
        let f = builtin("ddadd_aug").unwrap();
        let prob = encode(&f, Domain::Seltzo, &PropertySpec::relative_error(&f, 104), &fmt).unwrap();
        assert_eq!(prob.segments.len(), 18);
        assert_eq!(prob.variable_count(), 108);
        assert_eq!(prob.variables().len(), 108);
        let m = builtin("madd_aug").unwrap();
        let prob = encode(&m, Domain::Setz, &PropertySpec::relative_error(&m, 100), &fmt).unwrap();
        assert_eq!(prob.variable_count(), 54);
        assert!(prob.variables().contains(&"ntz_x0_0".to_string()));
    }

    #[test]
    fn identity_network_has_no_gate_assertions() {
        let fmt = FormatParams::binary64();
        let f = parse("wires a b").unwrap();
        let prop = PropertySpec {
            pre: vec![],
            goal: Goal::Dominates {
                rel: Relation::P,
                a: "a".into(),
                b: "b".into(),
            },
        };
        let prob = encode(&f, Domain::Setz, &prop, &fmt).unwrap();
        assert_eq!(prob.assertions.len(), 3);
        assert!(prob.assertions.iter().all(|a| !a.comment.starts_with("gate")));
    }

    #[test]
    fn emission_is_deterministic() {
        let fmt = FormatParams::binary16();
        let f = builtin("madd_aug").unwrap();
        let prop = PropertySpec::relative_error(&f, 19);
        let a = emit_smtlib(&encode(&f, Domain::Seltzo, &prop, &fmt).unwrap());
        let b = emit_smtlib(&encode(&f, Domain::Seltzo, &prop, &fmt).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("; network madd_aug"));
        assert!(a.contains("(declare-fun nlo_y1_2 () Int)"));
        assert!(a.ends_with("(check-sat)\n(get-model)\n"));
        let opens = a.matches('(').count();
        assert_eq!(opens, a.matches(')').count());
    }

    #[test]
    fn error_goal_boundaries() {
        let fmt = FormatParams::binary64();
        let ctx = lemmas::EvalCtx { p: 53, emin: fmt.emin, domain: Domain::Se };
        let g = encode_error_goal(10, 0, 1).unwrap();
        let vals = |en: i64, ed: i64| move |v: &Var, _f: Field| Some(if *v == 0 { en } else { ed });
        assert_eq!(g.eval(&ctx, &vals(fmt.emin - 1, 0)), Some(true));
        assert_eq!(g.eval(&ctx, &vals(-11, 0)), Some(true));
        assert_eq!(g.eval(&ctx, &vals(-10, 0)), Some(false));
        assert!(encode_error_goal(-1, 0, 1).is_err());
    }

    /// The linear consistency conditions agree with the direct check on every
    /// small field assignment, and hold for every concrete abstraction.
    #[test]
    fn consistency_matches_direct_check() {
        let fmt = FormatParams::new(5, -6, None).unwrap();
        let w = 4i64;
        for domain in Domain::ALL {
            let c = consistency(0usize, domain, &fmt);
            let ctx = lemmas::EvalCtx { p: 5, emin: fmt.emin, domain };
            let range: Vec<i64> = (-1..=w + 1).collect();
            let mut checked = 0;
            for s in [0, 1, 2] {
                for e in [fmt.emin - 2, fmt.emin - 1, 0] {
                    for a in &range {
                        for b in &range {
                            for t in &range {
                                for o in &range {
                                    let v = AbstractVal::seltzo(s, e, *a, *b, *t, *o);
                                    let v = if domain == Domain::Seltzo { v } else { v.project(domain) };
                                    let look = |_: &Var, f: Field| match f {
                                        Field::S => Some(v.s),
                                        Field::E => Some(v.e),
                                        Field::Nlz => v.nlz,
                                        Field::Nlo => v.nlo,
                                        Field::Ntz => v.ntz,
                                        Field::Nto => v.nto,
                                    };
                                    assert_eq!(c.eval(&ctx, &look), Some(is_consistent(&v, &fmt)), "{v}");
                                    checked += 1;
                                }
                            }
                        }
                    }
                }
            }
            assert!(checked > 0);
        }
        for frac in 0..16u128 {
            let x = FloatVal::new(true, 0, frac, &fmt).unwrap();
            assert!(is_consistent(&abstract_value(&x, Domain::Seltzo, &fmt), &fmt));
        }
    }

    #[test]
    fn unsupported_relation() {
        assert!(dominance_constraint(Relation::Qd, Domain::Se).is_err());
        assert!(dominance_constraint(Relation::P, Domain::Se).is_ok());
    }
}
