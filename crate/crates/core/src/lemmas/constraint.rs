//! Linear integer constraints over abstract-value fields.
//!
//! Text syntax, used by the lemma catalog and the property language:
//!
//! ```text
//! formula  := conj ("or" conj)*
//! conj     := unary (("," | "and") unary)*
//! unary    := "not" unary | "{" formula "}" | "true" | "false"
//!           | pred "(" var ["," var] ")" | expr (cmp expr)+
//! pred     := zero | nonzero | pzero | nzero | same
//! expr     := term (("+" | "-") term)*
//! term     := INT ["*" atom] | atom | "(" expr ")" | "-" term
//! atom     := FIELD "_" var | "f_" var | "p"
//! cmp      := "<" | "<=" | "=" | "!=" | ">" | ">="
//! ```
//!
//! Comparison chains such as `a <= b < c` mean `a <= b and b < c`.
//! `f_v` abbreviates the trailing exponent `e_v - p + ntz_v + 1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::abstraction::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    S,
    E,
    Nlz,
    Nlo,
    Ntz,
    Nto,
}

impl Field {
    pub const ALL: [Field; 6] = [Field::S, Field::E, Field::Nlz, Field::Nlo, Field::Ntz, Field::Nto];

    pub fn name(self) -> &'static str {
        match self {
            Field::S => "s",
            Field::E => "e",
            Field::Nlz => "nlz",
            Field::Nlo => "nlo",
            Field::Ntz => "ntz",
            Field::Nto => "nto",
        }
    }

    pub fn from_name(s: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn in_domain(self, d: Domain) -> bool {
        match self {
            Field::S | Field::E => true,
            Field::Ntz => d.has_ntz(),
            Field::Nlz | Field::Nlo | Field::Nto => d == Domain::Seltzo,
        }
    }

    pub fn of_domain(d: Domain) -> Vec<Field> {
        Field::ALL.into_iter().filter(|f| f.in_domain(d)).collect()
    }
}

/// The four values related by one TwoSum: inputs `x`, `y`, outputs `s`, `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    X,
    Y,
    S,
    E,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::X, Role::Y, Role::S, Role::E];

    /// Exchange the input roles.
    pub fn swapped(self) -> Role {
        match self {
            Role::X => Role::Y,
            Role::Y => Role::X,
            r => r,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::X => "x",
            Role::Y => "y",
            Role::S => "s",
            Role::E => "e",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "x" => Ok(Role::X),
            "y" => Ok(Role::Y),
            "s" => Ok(Role::S),
            "e" => Ok(Role::E),
            _ => Err(()),
        }
    }
}

/// `sum(coef * field(var)) + p_coef * p + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinExpr<V: Ord> {
    pub terms: BTreeMap<(V, Field), i64>,
    pub p_coef: i64,
    pub constant: i64,
}

impl<V: Ord + Clone> LinExpr<V> {
    pub fn constant(c: i64) -> Self {
        Self {
            terms: BTreeMap::new(),
            p_coef: 0,
            constant: c,
        }
    }

    pub fn p() -> Self {
        Self {
            p_coef: 1,
            ..Self::constant(0)
        }
    }

    pub fn var(v: V, f: Field) -> Self {
        let mut e = Self::constant(0);
        e.terms.insert((v, f), 1);
        e
    }

    /// Trailing exponent `e - p + ntz + 1`.
    pub fn trailing(v: V) -> Self {
        Self::var(v.clone(), Field::E)
            .plus(&Self::var(v, Field::Ntz))
            .minus(&Self::p())
            .plus(&Self::constant(1))
    }

    pub fn scaled(&self, k: i64) -> Self {
        let mut out = Self::constant(self.constant * k);
        out.p_coef = self.p_coef * k;
        for (key, c) in &self.terms {
            if c * k != 0 {
                out.terms.insert(key.clone(), c * k);
            }
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant += other.constant;
        out.p_coef += other.p_coef;
        for (key, c) in &other.terms {
            let slot = out.terms.entry(key.clone()).or_insert(0);
            *slot += c;
            if *slot == 0 {
                out.terms.remove(key);
            }
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-1))
    }

    /// Fold `p` into the constant.
    pub fn with_p(&self, p: i64) -> Self {
        Self {
            terms: self.terms.clone(),
            p_coef: 0,
            constant: self.constant + self.p_coef * p,
        }
    }

    pub fn map_vars<W: Ord + Clone>(&self, f: &impl Fn(&V) -> W) -> LinExpr<W> {
        let mut out = LinExpr::constant(self.constant);
        out.p_coef = self.p_coef;
        for ((v, fld), c) in &self.terms {
            let slot = out.terms.entry((f(v), *fld)).or_insert(0);
            *slot += c;
        }
        out.terms.retain(|_, c| *c != 0);
        out
    }

    pub fn eval(&self, p: i64, lookup: &impl Fn(&V, Field) -> Option<i64>) -> Option<i64> {
        let mut acc = self.constant + self.p_coef * p;
        for ((v, f), c) in &self.terms {
            acc += c * lookup(v, *f)?;
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl Cmp {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

/// Boolean combination of linear comparisons and zero tests.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraint<V: Ord> {
    Bool(bool),
    Cmp(LinExpr<V>, Cmp, LinExpr<V>),
    /// The value is zero, i.e. its exponent is `emin - 1`.
    Zero(V),
    /// All fields of the domain agree.
    Same(V, V),
    And(Vec<Constraint<V>>),
    Or(Vec<Constraint<V>>),
    Not(Box<Constraint<V>>),
}

/// Constants needed to evaluate a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalCtx {
    pub p: i64,
    pub emin: i64,
    pub domain: Domain,
}

impl<V: Ord + Clone> Constraint<V> {
    pub fn and(items: Vec<Self>) -> Self {
        if items.len() == 1 {
            items.into_iter().next().unwrap()
        } else {
            Constraint::And(items)
        }
    }

    pub fn or(items: Vec<Self>) -> Self {
        if items.len() == 1 {
            items.into_iter().next().unwrap()
        } else {
            Constraint::Or(items)
        }
    }

    pub fn negate(self) -> Self {
        Constraint::Not(Box::new(self))
    }

    pub fn cmp(a: LinExpr<V>, op: Cmp, b: LinExpr<V>) -> Self {
        Constraint::Cmp(a, op, b)
    }

    pub fn sign_is(v: V, bit: i64) -> Self {
        Constraint::Cmp(LinExpr::var(v, Field::S), Cmp::Eq, LinExpr::constant(bit))
    }

    pub fn pos_zero(v: V) -> Self {
        Constraint::And(vec![Constraint::Zero(v.clone()), Self::sign_is(v, 0)])
    }

    pub fn map_vars<W: Ord + Clone>(&self, f: &impl Fn(&V) -> W) -> Constraint<W> {
        match self {
            Constraint::Bool(b) => Constraint::Bool(*b),
            Constraint::Cmp(a, op, b) => Constraint::Cmp(a.map_vars(f), *op, b.map_vars(f)),
            Constraint::Zero(v) => Constraint::Zero(f(v)),
            Constraint::Same(a, b) => Constraint::Same(f(a), f(b)),
            Constraint::And(xs) => Constraint::And(xs.iter().map(|c| c.map_vars(f)).collect()),
            Constraint::Or(xs) => Constraint::Or(xs.iter().map(|c| c.map_vars(f)).collect()),
            Constraint::Not(c) => Constraint::Not(Box::new(c.map_vars(f))),
        }
    }

    /// Every `(var, field)` pair referenced, with `Same` expanded for `domain`.
    pub fn fields_used(&self, domain: Domain) -> BTreeSet<(V, Field)> {
        let mut out = BTreeSet::new();
        self.collect_fields(domain, &mut out);
        out
    }

    fn collect_fields(&self, domain: Domain, out: &mut BTreeSet<(V, Field)>) {
        match self {
            Constraint::Bool(_) => {}
            Constraint::Cmp(a, _, b) => {
                out.extend(a.terms.keys().cloned());
                out.extend(b.terms.keys().cloned());
            }
            Constraint::Zero(v) => {
                out.insert((v.clone(), Field::E));
            }
            Constraint::Same(a, b) => {
                for f in Field::of_domain(domain) {
                    out.insert((a.clone(), f));
                    out.insert((b.clone(), f));
                }
            }
            Constraint::And(xs) | Constraint::Or(xs) => xs.iter().for_each(|c| c.collect_fields(domain, out)),
            Constraint::Not(c) => c.collect_fields(domain, out),
        }
    }

    /// Evaluate; `None` if a referenced field is unavailable.
    pub fn eval(&self, ctx: &EvalCtx, lookup: &impl Fn(&V, Field) -> Option<i64>) -> Option<bool> {
        Some(match self {
            Constraint::Bool(b) => *b,
            Constraint::Cmp(a, op, b) => op.holds(a.eval(ctx.p, lookup)?, b.eval(ctx.p, lookup)?),
            Constraint::Zero(v) => lookup(v, Field::E)? == ctx.emin - 1,
            Constraint::Same(a, b) => {
                for f in Field::of_domain(ctx.domain) {
                    if lookup(a, f)? != lookup(b, f)? {
                        return Some(false);
                    }
                }
                true
            }
            Constraint::And(xs) => {
                for c in xs {
                    if !c.eval(ctx, lookup)? {
                        return Some(false);
                    }
                }
                true
            }
            Constraint::Or(xs) => {
                for c in xs {
                    if c.eval(ctx, lookup)? {
                        return Some(true);
                    }
                }
                false
            }
            Constraint::Not(c) => !c.eval(ctx, lookup)?,
        })
    }
}

impl<V: Ord + Clone + fmt::Display> fmt::Display for LinExpr<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(i64, String)> = self
            .terms
            .iter()
            .map(|((v, fld), c)| (*c, format!("{}_{v}", fld.name())))
            .collect();
        if self.p_coef != 0 {
            parts.push((self.p_coef, "p".into()));
        }
        if self.constant != 0 || parts.is_empty() {
            parts.push((self.constant, String::new()));
        }
        for (i, (c, name)) in parts.iter().enumerate() {
            let mag = c.abs();
            let body = match (name.is_empty(), mag) {
                (true, _) => mag.to_string(),
                (false, 1) => name.clone(),
                (false, _) => format!("{mag}*{name}"),
            };
            match (i, *c < 0) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

impl<V: Ord + Clone + fmt::Display> fmt::Display for Constraint<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Bool(b) => write!(f, "{b}"),
            Constraint::Cmp(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            Constraint::Zero(v) => write!(f, "zero({v})"),
            Constraint::Same(a, b) => write!(f, "same({a}, {b})"),
            Constraint::And(xs) => {
                f.write_str("{")?;
                for (i, c) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("}")
            }
            Constraint::Or(xs) => {
                f.write_str("{")?;
                for (i, c) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" or ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("}")
            }
            Constraint::Not(c) => write!(f, "not {c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    const SYMS: [&str; 14] = ["<=", ">=", "!=", "<", ">", "=", "+", "-", "*", "(", ")", "{", "}", ","];
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let v = text[start..i].parse().map_err(|_| ParseError {
                column: start + 1,
                message: "integer too large".into(),
            })?;
            out.push((start + 1, Tok::Int(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start + 1, Tok::Ident(text[start..i].to_string())));
        } else if let Some(s) = SYMS.iter().find(|s| text[i..].starts_with(**s)) {
            out.push((i + 1, Tok::Sym(s)));
            i += s.len();
        } else {
            return Err(ParseError {
                column: i + 1,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

/// Resolves variable names such as `x` or `z0` to the variable type.
pub trait VarResolver<V> {
    fn resolve(&self, name: &str) -> Option<V>;
}

impl<V, F: Fn(&str) -> Option<V>> VarResolver<V> for F {
    fn resolve(&self, name: &str) -> Option<V> {
        self(name)
    }
}

struct Parser<'a, V, R> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
    resolver: &'a R,
    _v: std::marker::PhantomData<V>,
}

impl<V: Ord + Clone, R: VarResolver<V>> Parser<'_, V, R> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(c, _)| *c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column: self.col(),
            message: message.into(),
        })
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(x)) if x == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn formula(&mut self) -> Result<Constraint<V>, ParseError> {
        let mut items = vec![self.conj()?];
        while self.eat_word("or") {
            items.push(self.conj()?);
        }
        Ok(Constraint::or(items))
    }

    fn conj(&mut self) -> Result<Constraint<V>, ParseError> {
        let mut items = vec![self.unary()?];
        while self.eat_sym(",") || self.eat_word("and") {
            items.push(self.unary()?);
        }
        Ok(Constraint::and(items))
    }

    fn var(&mut self) -> Result<V, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => match self.resolver.resolve(&name) {
                Some(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                None => self.err(format!("unknown variable `{name}`")),
            },
            _ => self.err("expected a variable"),
        }
    }

    fn unary(&mut self) -> Result<Constraint<V>, ParseError> {
        if self.eat_word("not") {
            return Ok(self.unary()?.negate());
        }
        if self.eat_word("true") {
            return Ok(Constraint::Bool(true));
        }
        if self.eat_word("false") {
            return Ok(Constraint::Bool(false));
        }
        if self.eat_sym("{") {
            let inner = self.formula()?;
            self.expect_sym("}")?;
            return Ok(inner);
        }
        if let Some(Tok::Ident(w)) = self.peek().cloned() {
            if matches!(w.as_str(), "zero" | "nonzero" | "pzero" | "nzero" | "same")
                && matches!(self.toks.get(self.pos + 1), Some((_, Tok::Sym("("))))
            {
                self.pos += 2;
                let a = self.var()?;
                let out = match w.as_str() {
                    "zero" => Constraint::Zero(a),
                    "nonzero" => Constraint::Zero(a).negate(),
                    "pzero" => Constraint::pos_zero(a),
                    "nzero" => Constraint::And(vec![Constraint::Zero(a.clone()), Constraint::sign_is(a, 1)]),
                    _ => {
                        self.expect_sym(",")?;
                        let b = self.var()?;
                        Constraint::Same(a, b)
                    }
                };
                self.expect_sym(")")?;
                return Ok(out);
            }
        }
        let first = self.expr()?;
        let mut items = Vec::new();
        let mut lhs = first;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym("<")) => Cmp::Lt,
                Some(Tok::Sym("<=")) => Cmp::Le,
                Some(Tok::Sym("=")) => Cmp::Eq,
                Some(Tok::Sym("!=")) => Cmp::Ne,
                Some(Tok::Sym(">")) => Cmp::Gt,
                Some(Tok::Sym(">=")) => Cmp::Ge,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.expr()?;
            items.push(Constraint::Cmp(lhs, op, rhs.clone()));
            lhs = rhs;
        }
        if items.is_empty() {
            return self.err("expected a comparison");
        }
        Ok(Constraint::and(items))
    }

    fn expr(&mut self) -> Result<LinExpr<V>, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym("+") {
                acc = acc.plus(&self.term()?);
            } else if self.eat_sym("-") {
                acc = acc.minus(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LinExpr<V>, ParseError> {
        if self.eat_sym("-") {
            return Ok(self.term()?.scaled(-1));
        }
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                if self.eat_sym("*") {
                    Ok(self.atom()?.scaled(k))
                } else {
                    Ok(LinExpr::constant(k))
                }
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => self.err("expected a term"),
        }
    }

    fn atom(&mut self) -> Result<LinExpr<V>, ParseError> {
        let Some(Tok::Ident(name)) = self.peek().cloned() else {
            return self.err("expected an atom");
        };
        if name == "p" {
            self.pos += 1;
            return Ok(LinExpr::p());
        }
        let Some((field, var)) = name.split_once('_') else {
            return self.err(format!("unknown atom `{name}`"));
        };
        let Some(v) = self.resolver.resolve(var) else {
            return self.err(format!("unknown variable `{var}` in `{name}`"));
        };
        self.pos += 1;
        if field == "f" {
            return Ok(LinExpr::trailing(v));
        }
        match Field::from_name(field) {
            Some(f) => Ok(LinExpr::var(v, f)),
            None => {
                self.pos -= 1;
                self.err(format!("unknown field `{field}`"))
            }
        }
    }
}

/// Parse a formula with a custom variable resolver.
pub fn parse_with<V: Ord + Clone>(text: &str, resolver: &impl VarResolver<V>) -> Result<Constraint<V>, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col: text.len() + 1,
        resolver,
        _v: std::marker::PhantomData,
    };
    let out = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(out)
}

/// Parse a formula over the roles `x`, `y`, `s`, `e`.
pub fn parse_roles(text: &str) -> Result<Constraint<Role>, ParseError> {
    parse_with(text, &|n: &str| n.parse::<Role>().ok())
}
