//! TwoSum transfer lemmas as data.
//!
//! Each lemma relates the abstractions of the inputs `x`, `y` of one TwoSum
//! to those of its outputs `s`, `e`: whenever the hypothesis holds, at least
//! one case holds. Statements live in plain-text catalogs and drive both the
//! exhaustive checkers in [`check`] and the SMT encoder.

mod check;
pub mod constraint;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::abstraction::{AbstractVal, Domain};
use crate::softfloat::FormatParams;
pub use check::{
    check_coverage, check_soundness, check_soundness_all, check_tightness, mine_transfer, CaseWitness, ExpWindow, LemmaCheckError,
    SoundnessReport, Uncovered, Violation,
};
pub use constraint::{parse_roles, Cmp, Constraint, EvalCtx, Field, LinExpr, ParseError, Role};

const SE_TEXT: &str = include_str!("catalog_se.txt");
const SETZ_TEXT: &str = include_str!("catalog_setz.txt");
const SELTZO_TEXT: &str = include_str!("catalog_seltzo.txt");

/// Outputs of TwoSum are fixed points of TwoSum.
const FIXED_SE: &str = "zero(e) or e_s - e_e >= p";
const FIXED_TZ: &str = "zero(e) or e_s - e_e > p + 1 \
    or {e_s - e_e = p + 1, {s_s = s_e or ntz_s < p - 1 or ntz_e = p - 1}} \
    or {e_s - e_e = p, ntz_e = p - 1, ntz_s >= 1, {s_s = s_e or ntz_s < p - 1}}";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("catalog line {line}: {message}")]
pub struct CatalogError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma {
    pub name: String,
    pub family: String,
    /// Domains whose published results rely on this lemma.
    pub supports: Vec<Domain>,
    /// Smallest precision at which the statement holds; `None` if unrestricted.
    pub min_p: Option<u32>,
    /// Includes the family-wide assumptions.
    pub hypothesis: Constraint<Role>,
    pub cases: Vec<Constraint<Role>>,
    /// Statement text as written in the catalog.
    pub source: String,
}

impl Lemma {
    /// The same statement with `x` and `y` exchanged.
    pub fn swapped(&self) -> Lemma {
        let f = |r: &Role| r.swapped();
        Lemma {
            name: format!("{}'", self.name),
            hypothesis: self.hypothesis.map_vars(&f),
            cases: self.cases.iter().map(|c| c.map_vars(&f)).collect(),
            ..self.clone()
        }
    }

    /// Both orientations, original first.
    pub fn orientations(&self) -> [Lemma; 2] {
        [self.clone(), self.swapped()]
    }

    pub fn applies_at(&self, p: u32) -> bool {
        self.min_p.is_none_or(|m| p >= m)
    }

    /// Every referenced field exists in `domain`.
    pub fn check_well_formed(&self, domain: Domain) -> Result<(), String> {
        let mut used = self.hypothesis.fields_used(domain);
        for c in &self.cases {
            used.extend(c.fields_used(domain));
        }
        match used.iter().find(|(_, f)| !f.in_domain(domain)) {
            Some((r, f)) => Err(format!("{}: field {}_{r} not in {domain}", self.name, f.name())),
            None => Ok(()),
        }
    }

    /// Index of the first case satisfied by `(x, y, s, e)`, if the
    /// hypothesis holds; `Ok(None)` when the hypothesis does not apply.
    pub fn evaluate(&self, vals: &[AbstractVal; 4], ctx: &EvalCtx) -> Option<Result<usize, ()>> {
        let look = role_lookup(vals);
        if !self.hypothesis.eval(ctx, &look).unwrap_or(false) {
            return None;
        }
        Some(
            self.cases
                .iter()
                .position(|c| c.eval(ctx, &look).unwrap_or(false))
                .ok_or(()),
        )
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Field lookup over `[x, y, s, e]`.
pub fn role_lookup(vals: &[AbstractVal; 4]) -> impl Fn(&Role, Field) -> Option<i64> + '_ {
    move |r, f| {
        let v = &vals[*r as usize];
        match f {
            Field::S => Some(v.s),
            Field::E => Some(v.e),
            Field::Nlz => v.nlz,
            Field::Nlo => v.nlo,
            Field::Ntz => v.ntz,
            Field::Nto => v.nto,
        }
    }
}

fn parse_domains(list: &str) -> Result<Vec<Domain>, String> {
    list.split_whitespace()
        .map(|d| d.parse::<Domain>().map_err(|_| format!("unknown domain `{d}`")))
        .collect()
}

/// Parse catalog text.
///
/// ```text
/// family NAME
/// supports SE SETZ ...
/// pre <formula>            # conjoined to every hypothesis of the family
/// lemma NAME
/// minp N                   # optional
/// hyp <formula>
/// case <formula>           # one or more
/// ```
pub fn parse_catalog(text: &str) -> Result<Vec<Lemma>, CatalogError> {
    let mut out: Vec<Lemma> = Vec::new();
    let mut family = String::new();
    let mut supports = Vec::new();
    let mut pre: Option<Constraint<Role>> = None;
    let mut pre_text = String::new();
    let mut current: Option<(Lemma, Option<Constraint<Role>>)> = None;
    let finish = |cur: Option<(Lemma, Option<Constraint<Role>>)>, out: &mut Vec<Lemma>, line: usize| {
        if let Some((mut l, hyp)) = cur {
            let hyp = hyp.ok_or_else(|| CatalogError {
                line,
                message: format!("{} has no hypothesis", l.name),
            })?;
            if l.cases.is_empty() {
                return Err(CatalogError {
                    line,
                    message: format!("{} has no cases", l.name),
                });
            }
            l.hypothesis = match l.hypothesis {
                Constraint::Bool(true) => hyp,
                pre => Constraint::And(vec![pre, hyp]),
            };
            out.push(l);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        let err = |message: String| CatalogError { line, message };
        let formula = |s: &str| parse_roles(s).map_err(|e| err(e.to_string()));
        match kw {
            "family" => {
                finish(current.take(), &mut out, line)?;
                family = rest.to_string();
                supports.clear();
                pre = None;
                pre_text.clear();
            }
            "supports" => supports = parse_domains(rest).map_err(err)?,
            "pre" => {
                pre = Some(formula(rest)?);
                pre_text = format!("{content}\n");
            }
            "lemma" => {
                finish(current.take(), &mut out, line)?;
                if family.is_empty() {
                    return Err(err("lemma outside a family".into()));
                }
                current = Some((
                    Lemma {
                        name: rest.to_string(),
                        family: family.clone(),
                        supports: supports.clone(),
                        min_p: None,
                        hypothesis: pre.clone().unwrap_or(Constraint::Bool(true)),
                        cases: Vec::new(),
                        source: format!("lemma {rest}\n{pre_text}"),
                    },
                    None,
                ));
            }
            "minp" | "hyp" | "case" => {
                let Some((l, hyp)) = current.as_mut() else {
                    return Err(err(format!("`{kw}` outside a lemma")));
                };
                l.source.push_str(content);
                l.source.push('\n');
                match kw {
                    "minp" => l.min_p = Some(rest.parse().map_err(|_| err(format!("bad precision `{rest}`")))?),
                    "hyp" if hyp.is_some() => return Err(err("duplicate hypothesis".into())),
                    "hyp" => *hyp = Some(formula(rest)?),
                    _ => l.cases.push(formula(rest)?),
                }
            }
            _ => return Err(err(format!("unknown directive `{kw}`"))),
        }
    }
    finish(current, &mut out, text.lines().count())?;
    Ok(out)
}

struct Catalogs {
    se: Vec<Lemma>,
    setz: Vec<Lemma>,
    seltzo_ext: Vec<Lemma>,
}

fn catalogs() -> &'static Catalogs {
    static CELL: OnceLock<Catalogs> = OnceLock::new();
    CELL.get_or_init(|| Catalogs {
        se: parse_catalog(SE_TEXT).expect("SE catalog parses"),
        setz: parse_catalog(SETZ_TEXT).expect("SETZ catalog parses"),
        seltzo_ext: parse_catalog(SELTZO_TEXT).expect("SELTZO catalog parses"),
    })
}

/// The lemma set used for `domain`.
///
/// SELTZO uses the whole SETZ catalog (its statements constrain only fields
/// SELTZO also has) followed by the SELTZO-specific extension lemmas.
pub fn catalog(domain: Domain) -> Vec<Lemma> {
    let c = catalogs();
    let zero: Vec<Lemma> = c.se.iter().filter(|l| l.family == "Z").cloned().collect();
    match domain {
        Domain::Se => c.se.clone(),
        Domain::Setz => zero.into_iter().chain(c.setz.iter().cloned()).collect(),
        Domain::Seltzo => zero
            .into_iter()
            .chain(c.setz.iter().cloned())
            .chain(c.seltzo_ext.iter().cloned())
            .collect(),
    }
}

/// Lemmas whose families are marked as supporting SELTZO results.
pub fn seltzo_marked() -> Vec<Lemma> {
    catalog(Domain::Seltzo)
        .into_iter()
        .filter(|l| l.supports.contains(&Domain::Seltzo))
        .collect()
}

/// Extension lemmas added on top of the SETZ catalog for SELTZO.
pub fn seltzo_extension() -> Vec<Lemma> {
    catalogs().seltzo_ext.clone()
}

pub fn find(name: &str) -> Option<Lemma> {
    Domain::ALL
        .iter()
        .flat_map(|d| catalog(*d))
        .find(|l| l.name.eq_ignore_ascii_case(name))
}

pub fn families(domain: Domain) -> BTreeSet<String> {
    catalog(domain).into_iter().map(|l| l.family).collect()
}

/// Fixed-point condition on TwoSum outputs `(s, e)` in `domain`.
pub fn output_constraint(domain: Domain) -> Constraint<Role> {
    let text = if domain == Domain::Se { FIXED_SE } else { FIXED_TZ };
    parse_roles(text).expect("fixed-point constraint parses")
}

/// Hash of every statement used for `domain`; changes iff the lemma text does.
pub fn fingerprint(domain: Domain) -> String {
    fingerprint_of(&catalog(domain), &output_constraint(domain))
}

pub fn fingerprint_of(lemmas: &[Lemma], output: &Constraint<Role>) -> String {
    let mut h = Sha256::new();
    for l in lemmas {
        h.update(l.family.as_bytes());
        h.update(b"\n");
        h.update(l.source.as_bytes());
    }
    h.update(output.to_string().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Evaluation context for `fmt` and `domain`.
pub fn eval_ctx(fmt: &FormatParams, domain: Domain) -> EvalCtx {
    EvalCtx {
        p: i64::from(fmt.precision),
        emin: fmt.emin,
        domain,
    }
}
