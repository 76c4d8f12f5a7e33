use std::fmt::Write as _;

use crate::abstraction::Domain;
use crate::lemmas::{Cmp, Constraint, Field, Lemma, LinExpr, Role};
use crate::softfloat::FormatParams;

const ROLES: [Role; 4] = [Role::X, Role::Y, Role::S, Role::E];

struct Bv {
    width: u32,
}

impl Bv {
    fn lit(&self, v: i64) -> String {
        let m = if self.width >= 64 { u64::MAX } else { (1u64 << self.width) - 1 };
        format!("(_ bv{} {})", (v as u64) & m, self.width)
    }

    fn lin(&self, e: &LinExpr<Role>, p: i64) -> String {
        let e = e.with_p(p);
        let mut terms: Vec<String> = e
            .terms
            .iter()
            .map(|((r, f), c)| {
                let name = format!("{}_{r}", f.name());
                if *c == 1 {
                    name
                } else {
                    format!("(bvmul {} {name})", self.lit(*c))
                }
            })
            .collect();
        if e.constant != 0 || terms.is_empty() {
            terms.push(self.lit(e.constant));
        }
        terms
            .into_iter()
            .reduce(|a, b| format!("(bvadd {a} {b})"))
            .unwrap()
    }

    fn formula(&self, c: &Constraint<Role>, p: i64, domain: Domain) -> String {
        match c {
            Constraint::Bool(b) => b.to_string(),
            Constraint::Cmp(a, op, b) => {
                let (a, b) = (self.lin(a, p), self.lin(b, p));
                match op {
                    Cmp::Lt => format!("(bvslt {a} {b})"),
                    Cmp::Le => format!("(bvsle {a} {b})"),
                    Cmp::Eq => format!("(= {a} {b})"),
                    Cmp::Ne => format!("(not (= {a} {b}))"),
                    Cmp::Gt => format!("(bvsgt {a} {b})"),
                    Cmp::Ge => format!("(bvsge {a} {b})"),
                }
            }
            Constraint::Zero(r) => format!("(fp.isZero {})", fp_name(*r)),
            Constraint::Same(a, b) => {
                let eqs: Vec<String> = Field::of_domain(domain)
                    .into_iter()
                    .map(|f| format!("(= {}_{a} {}_{b})", f.name(), f.name()))
                    .collect();
                format!("(and {})", eqs.join(" "))
            }
            Constraint::And(xs) | Constraint::Or(xs) => {
                let op = if matches!(c, Constraint::And(_)) { "and" } else { "or" };
                if xs.is_empty() {
                    return (op == "and").to_string();
                }
                let parts: Vec<String> = xs.iter().map(|x| self.formula(x, p, domain)).collect();
                format!("({op} {})", parts.join(" "))
            }
            Constraint::Not(x) => format!("(not {})", self.formula(x, p, domain)),
        }
    }
}

fn fp_name(r: Role) -> &'static str {
    match r {
        Role::X => "x",
        Role::Y => "y",
        Role::S => "s",
        Role::E => "e",
    }
}

fn exponent_bits(fmt: &FormatParams) -> u32 {
    let emax = fmt.emax.unwrap_or(-fmt.emin + 1);
    64 - ((emax + 1) as u64).leading_zeros()
}

/// A floating-point-theory problem that is satisfiable iff the six-operation
/// TwoSum violates `lemma` on some pair of finite normal-or-zero inputs whose
/// outputs are normal or zero.
pub fn emit_lemma_qffp(lemma: &Lemma, fmt: &FormatParams) -> String {
    let eb = exponent_bits(fmt);
    let sb = fmt.precision;
    let w = sb - 1;
    let bias = (1i64 << (eb - 1)) - 1;
    let width = eb + 10;
    let bv = Bv { width };
    let p = i64::from(fmt.precision);
    let domain = Domain::ALL
        .into_iter()
        .find(|d| lemma.check_well_formed(*d).is_ok())
        .unwrap_or(Domain::Seltzo);
    let sort = format!("(_ FloatingPoint {eb} {sb})");
    let field_sort = format!("(_ BitVec {width})");
    let mut out = String::new();
    let _ = writeln!(out, "; lemma {} at {}", lemma.name, fmt);
    for line in lemma.source.lines() {
        let _ = writeln!(out, ";   {line}");
    }
    out.push_str("(set-logic QF_BVFP)\n");
    let _ = writeln!(out, "(declare-fun x () {sort})");
    let _ = writeln!(out, "(declare-fun y () {sort})");
    let ops = [
        ("s", "(fp.add RNE x y)"),
        ("xp", "(fp.sub RNE s y)"),
        ("yp", "(fp.sub RNE s xp)"),
        ("dx", "(fp.sub RNE x xp)"),
        ("dy", "(fp.sub RNE y yp)"),
        ("e", "(fp.add RNE dx dy)"),
    ];
    for (name, body) in ops {
        let _ = writeln!(out, "(define-fun {name} () {sort} {body})");
    }
    for v in ["x", "y", "s", "e"] {
        let _ = writeln!(out, "(assert (or (fp.isNormal {v}) (fp.isZero {v})))");
    }
    let ext = |bits: &str, from: u32| format!("((_ zero_extend {}) {bits})", width - from);
    for r in ROLES {
        let v = fp_name(r);
        let _ = writeln!(out, "(declare-fun sb_{v} () (_ BitVec 1))");
        let _ = writeln!(out, "(declare-fun eb_{v} () (_ BitVec {eb}))");
        let _ = writeln!(out, "(declare-fun mb_{v} () (_ BitVec {w}))");
        let _ = writeln!(out, "(assert (= {v} (fp sb_{v} eb_{v} mb_{v})))");
        let _ = writeln!(out, "(define-fun s_{r} () {field_sort} {})", ext(&format!("sb_{v}"), 1));
        let _ = writeln!(
            out,
            "(define-fun e_{r} () {field_sort} (bvsub {} {}))",
            ext(&format!("eb_{v}"), eb),
            bv.lit(bias)
        );
        // Run lengths from nested masks: the first mask with a set bit decides.
        let runs = |leading: bool, ones: bool| {
            let bits = if ones { format!("(bvnot mb_{v})") } else { format!("mb_{v}") };
            let mut expr = bv.lit(i64::from(w));
            for t in (0..w).rev() {
                let (hi, lo) = if leading { (w - 1, w - 1 - t) } else { (t, 0) };
                let test = format!("(not (= ((_ extract {hi} {lo}) {bits}) (_ bv0 {})))", hi - lo + 1);
                expr = format!("(ite {test} {} {expr})", bv.lit(i64::from(t)));
            }
            expr
        };
        for (name, leading, ones) in [("nlz", true, false), ("nlo", true, true), ("ntz", false, false), ("nto", false, true)] {
            let _ = writeln!(out, "(define-fun {name}_{r} () {field_sort} {})", runs(leading, ones));
        }
    }
    let _ = writeln!(out, "; hypothesis");
    let _ = writeln!(out, "(assert {})", bv.formula(&lemma.hypothesis, p, domain));
    let _ = writeln!(out, "; no case holds");
    let cases = Constraint::Or(lemma.cases.clone());
    let _ = writeln!(out, "(assert (not {}))", bv.formula(&cases, p, domain));
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemmas::find;

    #[test]
    fn structure() {
        let fmt = FormatParams::binary16();
        assert_eq!(exponent_bits(&fmt), 5);
        assert_eq!(exponent_bits(&FormatParams::binary64()), 11);
        assert_eq!(exponent_bits(&FormatParams::binary128()), 15);
        let text = emit_lemma_qffp(&find("Z2").unwrap(), &fmt);
        assert_eq!(text.matches("(declare-fun x ").count() + text.matches("(declare-fun y ").count(), 2);
        assert_eq!(text.matches("(define-fun ").count() - 4 * 6, 6);
        assert!(text.contains("(_ FloatingPoint 5 11)"));
        assert_eq!(text.matches('(').count(), text.matches(')').count());
        assert_eq!(text, emit_lemma_qffp(&find("Z2").unwrap(), &fmt));
    }
}
