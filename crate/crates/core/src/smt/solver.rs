use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::ops::RangeInclusive;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{encode, emit_smtlib, PropertySpec, SmtError, SmtProblem};
use crate::abstraction::{is_consistent, AbstractVal, Domain};
use crate::fpan::Fpan;
use crate::lemmas::Field;
use crate::softfloat::FormatParams;

/// How to run the external solver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Command line; `{file}` is replaced by the problem path, otherwise the
    /// problem is written to standard input.
    pub command: String,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            command: default_solver(),
            timeout: Duration::from_secs(60),
        }
    }
}

/// `$FPAN_SOLVER`, or `z3 {file}`.
pub fn default_solver() -> String {
    std::env::var("FPAN_SOLVER")
        .ok()
        .filter(|s| !s.trim().is_empty())
        .unwrap_or_else(|| "z3 {file}".to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Unsat,
    Sat,
    Unknown,
    Timeout,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Unsat => "unsat",
            Verdict::Sat => "sat",
            Verdict::Unknown => "unknown",
            Verdict::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverResult {
    pub verdict: Verdict,
    /// Segment label to abstract value; present iff the verdict is sat.
    pub model: Option<BTreeMap<String, AbstractVal>>,
    pub elapsed: Duration,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("empty solver command")]
    EmptyCommand,
    #[error("could not run solver `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("solver I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exited with {status} without a verdict: {stderr}")]
    Crash { status: String, stderr: String },
    #[error("unparsable solver output: {0}")]
    Unparsable(String),
    #[error("model is not a counterexample: {0}")]
    InvalidModel(String),
    #[error("inconclusive verdict {verdict} at k = {k}")]
    Inconclusive { k: i64, verdict: Verdict },
    #[error(transparent)]
    Encode(#[from] SmtError),
}

fn run(cfg: &SolverConfig, text: &str) -> Result<(Verdict, String, Duration), SolverError> {
    let mut words: Vec<String> = cfg.command.split_whitespace().map(str::to_string).collect();
    if words.is_empty() {
        return Err(SolverError::EmptyCommand);
    }
    let uses_file = words.iter().any(|w| w.contains("{file}"));
    let tmp = if uses_file {
        let mut f = tempfile::Builder::new().prefix("fpan-").suffix(".smt2").tempfile()?;
        f.write_all(text.as_bytes())?;
        f.flush()?;
        let path = f.path().to_string_lossy().into_owned();
        for w in &mut words {
            *w = w.replace("{file}", &path);
        }
        Some(f)
    } else {
        None
    };
    let start = Instant::now();
    let mut child = Command::new(&words[0])
        .args(&words[1..])
        .stdin(if uses_file { Stdio::null() } else { Stdio::piped() })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverError::Spawn {
            command: cfg.command.clone(),
            source,
        })?;
    let feeder = child.stdin.take().map(|mut stdin| {
        let text = text.to_string();
        std::thread::spawn(move || {
            let _ = stdin.write_all(text.as_bytes());
        })
    });
    let reader = |mut r: Box<dyn Read + Send>| {
        std::thread::spawn(move || {
            let mut s = String::new();
            let _ = r.read_to_string(&mut s);
            s
        })
    };
    let out = reader(Box::new(child.stdout.take().expect("piped stdout")));
    let err = reader(Box::new(child.stderr.take().expect("piped stderr")));
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if start.elapsed() >= cfg.timeout {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let elapsed = start.elapsed();
    if let Some(f) = feeder {
        let _ = f.join();
    }
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    drop(tmp);
    let Some(status) = status else {
        return Ok((Verdict::Timeout, stdout, elapsed));
    };
    let first = stdout.lines().map(str::trim).find(|l| !l.is_empty());
    let verdict = match first {
        Some("unsat") => Verdict::Unsat,
        Some("sat") => Verdict::Sat,
        Some("unknown") => Verdict::Unknown,
        Some("timeout") => Verdict::Timeout,
        Some(other) if status.success() => return Err(SolverError::Unparsable(other.to_string())),
        _ => {
            return Err(SolverError::Crash {
                status: status.to_string(),
                stderr: format!("{}{}", stderr.trim(), first.unwrap_or("")),
            })
        }
    };
    Ok((verdict, stdout, elapsed))
}

/// Integer assignments from a `(model ...)` or bare `define-fun` listing.
pub fn parse_model(text: &str) -> Result<BTreeMap<String, i64>, SolverError> {
    let mut out = BTreeMap::new();
    let mut rest = text;
    while let Some(pos) = rest.find("(define-fun") {
        rest = &rest[pos + "(define-fun".len()..];
        let mut it = rest.split_whitespace();
        let name = it.next().ok_or_else(|| SolverError::Unparsable(rest.to_string()))?;
        let after_name = &rest[rest.find(name).unwrap() + name.len()..];
        let body = after_name
            .trim_start()
            .strip_prefix("()")
            .map(str::trim_start)
            .and_then(|s| s.strip_prefix("Int"))
            .ok_or_else(|| SolverError::Unparsable(format!("non-integer definition of {name}")))?
            .trim_start();
        let (value, len) = if let Some(neg) = body.strip_prefix("(-") {
            let end = neg.find(')').ok_or_else(|| SolverError::Unparsable(body.to_string()))?;
            let v: i64 = neg[..end].trim().parse().map_err(|_| SolverError::Unparsable(body.to_string()))?;
            (-v, 2 + end + 1)
        } else {
            let end = body.find(|c: char| !c.is_ascii_digit()).unwrap_or(body.len());
            let v: i64 = body[..end].parse().map_err(|_| SolverError::Unparsable(body.to_string()))?;
            (v, end)
        };
        out.insert(name.to_string(), value);
        rest = &body[len..];
    }
    Ok(out)
}

fn decode(prob: &SmtProblem, values: &BTreeMap<String, i64>) -> Result<Vec<AbstractVal>, SolverError> {
    let fields = prob.fields();
    (0..prob.segments.len())
        .map(|seg| {
            let v: Vec<i64> = fields
                .iter()
                .map(|f| {
                    let name = prob.var_name(seg, *f);
                    values
                        .get(&name)
                        .copied()
                        .ok_or_else(|| SolverError::InvalidModel(format!("missing {name}")))
                })
                .collect::<Result<_, _>>()?;
            AbstractVal::from_fields(prob.domain, &v)
                .ok_or_else(|| SolverError::InvalidModel(format!("bad fields for {}", prob.segments[seg])))
        })
        .collect()
}

/// Re-check a decoded model against every assertion and the domain's
/// consistency conditions.
pub(crate) fn validate(prob: &SmtProblem, vals: &[AbstractVal]) -> Result<(), SolverError> {
    let fmt = FormatParams::new(prob.precision, prob.emin, None)
        .map_err(|e| SolverError::InvalidModel(e.to_string()))?;
    for (v, label) in vals.iter().zip(&prob.segments) {
        if !is_consistent(v, &fmt) {
            return Err(SolverError::InvalidModel(format!("{label} = {v} is inconsistent")));
        }
    }
    let ctx = prob.ctx();
    let look = |seg: &usize, f: Field| {
        let v = &vals[*seg];
        match f {
            Field::S => Some(v.s),
            Field::E => Some(v.e),
            Field::Nlz => v.nlz,
            Field::Nlo => v.nlo,
            Field::Ntz => v.ntz,
            Field::Nto => v.nto,
        }
    };
    for a in &prob.assertions {
        if a.formula.eval(&ctx, &look) != Some(true) {
            return Err(SolverError::InvalidModel(format!("violates `{}`", a.comment)));
        }
    }
    Ok(())
}

/// Run the solver; on sat the model is decoded and validated.
pub fn solve(prob: &SmtProblem, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    let (verdict, stdout, elapsed) = run(cfg, &emit_smtlib(prob))?;
    let model = if verdict == Verdict::Sat {
        let vals = decode(prob, &parse_model(&stdout)?)?;
        validate(prob, &vals)?;
        Some(prob.segments.iter().cloned().zip(vals).collect())
    } else {
        None
    };
    Ok(SolverResult { verdict, model, elapsed })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KProbe {
    pub k: i64,
    pub verdict: Verdict,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSearch {
    /// Largest proved `k`, or `None` when nothing in range is provable.
    pub k: Option<i64>,
    pub probes: Vec<KProbe>,
}

/// Largest `k` in `range` whose relative-error property is proved. Relies on
/// monotonicity in `k`; an unknown or timeout aborts the search.
pub fn max_provable_k(
    f: &Fpan,
    domain: Domain,
    template: &PropertySpec,
    fmt: &FormatParams,
    range: RangeInclusive<i64>,
    cfg: &SolverConfig,
) -> Result<KSearch, SolverError> {
    let mut probes = Vec::new();
    let mut probe = |k: i64| -> Result<bool, SolverError> {
        let prob = encode(f, domain, &template.with_k(k), fmt)?;
        let r = solve(&prob, cfg)?;
        probes.push(KProbe {
            k,
            verdict: r.verdict,
            elapsed: r.elapsed,
        });
        match r.verdict {
            Verdict::Unsat => Ok(true),
            Verdict::Sat => Ok(false),
            v => Err(SolverError::Inconclusive { k, verdict: v }),
        }
    };
    let (mut lo, mut hi) = (*range.start(), *range.end());
    if lo > hi || !probe(lo)? {
        return Ok(KSearch { k: None, probes });
    }
    if probe(hi)? {
        return Ok(KSearch { k: Some(hi), probes });
    }
    // unsat at lo, sat at hi
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(KSearch { k: Some(lo), probes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_models() {
        let text = "sat\n(\n  (define-fun e_x0_0 () Int\n    (- 1075))\n  (define-fun s_x0_0 () Int\n    1)\n)\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m["e_x0_0"], -1075);
        assert_eq!(m["s_x0_0"], 1);
        assert!(parse_model("(define-fun b () Bool true)").is_err());
        assert!(parse_model("sat").unwrap().is_empty());
    }

    #[test]
    fn distinguishes_failures() {
        let cfg = |c: &str| SolverConfig {
            command: c.into(),
            timeout: Duration::from_secs(5),
        };
        let f = crate::fpan::parse("wires a b").unwrap();
        let prop = PropertySpec {
            pre: vec![],
            goal: super::super::Goal::ErrorBound {
                k: 1,
                num: "b".into(),
                den: "a".into(),
            },
        };
        let prob = encode(&f, Domain::Se, &prop, &FormatParams::binary16()).unwrap();
        assert!(matches!(solve(&prob, &cfg("")), Err(SolverError::EmptyCommand)));
        assert!(matches!(
            solve(&prob, &cfg("/nonexistent/solver {file}")),
            Err(SolverError::Spawn { .. })
        ));
        assert!(matches!(solve(&prob, &cfg("false")), Err(SolverError::Crash { .. })));
        assert!(matches!(solve(&prob, &cfg("echo hello")), Err(SolverError::Unparsable(_))));
        let slow = SolverConfig {
            command: "sleep 5".into(),
            timeout: Duration::from_millis(200),
        };
        assert_eq!(solve(&prob, &slow).unwrap().verdict, Verdict::Timeout);
        assert_eq!(solve(&prob, &cfg("echo unsat")).unwrap().verdict, Verdict::Unsat);
    }
}
