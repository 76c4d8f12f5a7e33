//! Acceptance suite: one line per criterion, nonzero exit if any required
//! criterion fails.

use std::time::{Duration, Instant};

use fpan_core::abstraction::{abstract_value, is_fixed_point};
use fpan_core::lemmas::{self, check_coverage, check_soundness_all, ExpWindow};
use fpan_core::oracle::{
    gap_report, paper_witness, relative_error, worst_case_error, ConcreteProperty, SearchWindow, Witness,
};
use fpan_core::smt::{self, emit_smtlib, max_provable_k, PropertySpec, SolverConfig};
use fpan_core::softfloat::two_sum;
use fpan_core::{builtin, Domain, ExactReal, FloatVal, FormatParams};
use num_bigint::BigInt;

type Outcome = Result<String, String>;

fn fmt_p(p: u32) -> FormatParams {
    FormatParams::new(p, -200, None).unwrap()
}

fn named(p: u32) -> FormatParams {
    match p {
        8 => FormatParams::named("bfloat16"),
        11 => FormatParams::named("binary16"),
        24 => FormatParams::named("binary32"),
        53 => FormatParams::named("binary64"),
        113 => FormatParams::named("binary128"),
        _ => None,
    }
    .unwrap_or_else(|| fmt_p(p))
}

/// Every value with exponent in `[lo, hi]`, both signs, and both zeros.
fn window_values(fmt: &FormatParams, lo: i64, hi: i64) -> Vec<FloatVal> {
    let mut out = vec![FloatVal::pos_zero(fmt), FloatVal::neg_zero(fmt)];
    for neg in [false, true] {
        for e in lo..=hi {
            for f in 0..(1u128 << fmt.fraction_bits()) {
                out.push(FloatVal::new(neg, e, f, fmt).unwrap());
            }
        }
    }
    out
}

fn solver() -> SolverConfig {
    SolverConfig {
        timeout: Duration::from_secs(60),
        ..SolverConfig::default()
    }
}

fn applicable(domain: Domain, p: u32) -> Vec<lemmas::Lemma> {
    lemmas::catalog(domain).into_iter().filter(|l| l.applies_at(p)).collect()
}

/// Smallest precision at which every applicable SE and SETZ lemma is sound,
/// found alongside criterion 1.
fn all_sound_at(p: u32) -> Result<bool, String> {
    let w = ExpWindow::default_for(p);
    for d in [Domain::Se, Domain::Setz] {
        let reports = check_soundness_all(&applicable(d, p), d, &fmt_p(p), w).map_err(|e| e.to_string())?;
        if reports.iter().any(|r| !r.is_sound()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn c1_soundness() -> Outcome {
    let t = Instant::now();
    let fmt = fmt_p(5);
    let w = ExpWindow::new(-14, 0);
    let mut total = 0;
    for d in [Domain::Se, Domain::Setz] {
        let ls = lemmas::catalog(d);
        let skipped = ls.iter().filter(|l| !l.applies_at(5)).count();
        if skipped > 0 {
            return Err(format!("{skipped} {d} lemmas do not apply at p = 5"));
        }
        let reports = check_soundness_all(&ls, d, &fmt, w).map_err(|e| e.to_string())?;
        let bad: Vec<_> = reports.iter().filter(|r| !r.is_sound()).map(|r| r.lemma.clone()).collect();
        if !bad.is_empty() {
            return Err(format!("unsound in {d}: {}", bad.join(", ")));
        }
        if let Some(r) = reports.iter().find(|r| r.hypothesis_matches == 0) {
            return Err(format!("{} never matches in the window", r.lemma));
        }
        total += reports.len();
    }
    let elapsed = t.elapsed();
    if elapsed > Duration::from_secs(600) {
        return Err(format!("took {elapsed:?}"));
    }
    let smallest = (3..=5).find(|&p| all_sound_at(p).unwrap_or(false));
    Ok(format!(
        "{total} lemma checks sound at p = 5 in {:.1}s; smallest p with all lemmas sound: {}",
        elapsed.as_secs_f64(),
        smallest.map_or("none".into(), |p| p.to_string())
    ))
}

fn c2_coverage() -> Outcome {
    let mut parts = Vec::new();
    for p in [4, 5] {
        for d in [Domain::Se, Domain::Setz] {
            let w = ExpWindow::default_for(p);
            let unc = check_coverage(&applicable(d, p), d, &fmt_p(p), w).map_err(|e| e.to_string())?;
            if !unc.is_empty() {
                return Err(format!("{d} at p = {p}: {} uncovered, first {:?}", unc.len(), unc[0]));
            }
            parts.push(format!("{d}@{p}"));
        }
    }
    Ok(format!("no uncovered pairs ({})", parts.join(", ")))
}

fn c3_fixed_point() -> Outcome {
    let mut checked = 0u64;
    for p in [4, 5] {
        let fmt = fmt_p(p);
        let w = ExpWindow::default_for(p);
        let vals = window_values(&fmt, w.lo, w.hi);
        for s in &vals {
            for e in &vals {
                // Fixed point as real numbers; TwoSum never returns -0 as its error.
                let (s2, e2) = two_sum(s, e, &fmt).map_err(|x| x.to_string())?;
                let concrete = s2.to_exact(&fmt) == s.to_exact(&fmt) && e2.to_exact(&fmt) == e.to_exact(&fmt);
                for d in [Domain::Setz, Domain::Seltzo] {
                    let a = abstract_value(s, d, &fmt);
                    let b = abstract_value(e, d, &fmt);
                    let abs = is_fixed_point(&a, &b, &fmt).map_err(|x| x.to_string())?;
                    if abs != concrete {
                        return Err(format!("p = {p} {d}: {s:?}, {e:?}: abstract {abs}, concrete {concrete}"));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} pairs agree in SETZ and SELTZO"))
}

/// `max_provable_k` with a per-query time check.
fn max_k(name: &str, domain: Domain, p: u32) -> Result<(i64, Duration), String> {
    let f = builtin(name).unwrap();
    let fmt = named(p);
    let hi = 2 * i64::from(p) + 2;
    let s = max_provable_k(&f, domain, &PropertySpec::relative_error(&f, 0), &fmt, 0..=hi, &solver())
        .map_err(|e| format!("{name} {domain} p = {p}: {e}"))?;
    let slowest = s.probes.iter().map(|q| q.elapsed).max().unwrap_or_default();
    let k = s.k.ok_or_else(|| format!("{name} {domain} p = {p}: nothing provable"))?;
    Ok((k, slowest))
}

fn check_ks(domain: Domain, ps: &[u32], dd: i64, ma: i64) -> Outcome {
    let mut slowest = Duration::ZERO;
    let mut parts = Vec::new();
    for &p in ps {
        let p2 = 2 * i64::from(p);
        for (name, want) in [("ddadd_aug", p2 + dd), ("madd_aug", p2 + ma)] {
            let (k, q) = max_k(name, domain, p)?;
            slowest = slowest.max(q);
            if k != want {
                return Err(format!("{name} at p = {p}: k = {k}, want {want}"));
            }
            if q > Duration::from_secs(60) {
                return Err(format!("{name} at p = {p}: a query took {q:?}"));
            }
        }
        parts.push(format!("p={p}"));
    }
    Ok(format!(
        "ddadd_aug k = 2p{dd:+}, madd_aug k = 2p{ma:+} at {}; slowest query {:.2}s",
        parts.join(" "),
        slowest.as_secs_f64()
    ))
}

fn c4_setz() -> Outcome {
    check_ks(Domain::Setz, &[11, 8, 24, 53, 113], -4, -3)
}

fn c5_se() -> Outcome {
    check_ks(Domain::Se, &[53], -7, -6)
}

/// Stretch outcome; `Ok` carries whether the stretch values were reached.
fn c6_seltzo() -> Result<(bool, String), String> {
    let p = 53;
    let p2 = 2 * i64::from(p);
    let (dd, _) = max_k("ddadd_aug", Domain::Seltzo, p)?;
    let (ma, _) = max_k("madd_aug", Domain::Seltzo, p)?;
    if dd == p2 - 2 && ma == p2 - 1 {
        return Ok((true, format!("SELTZO proves k = {dd} and {ma} at p = 53")));
    }
    if dd < p2 - 4 || ma < p2 - 3 {
        return Err(format!("SELTZO proves only k = {dd}, {ma}, below the SETZ values"));
    }
    // Gap report at a precision where abstract counterexamples can be concretized.
    let small = 8;
    let f = builtin("ddadd_aug").unwrap();
    let target = 2 * i64::from(small) - 3;
    let g = gap_report(&f, Domain::Seltzo, target, &fmt_p(small), &solver(), 1 << 22).map_err(|e| e.to_string())?;
    if !g.has_gaps() && g.undecided.is_empty() {
        return Err(format!("no gap explains the sat verdict at p = {small}, k = {target}: {:?}", g.realization));
    }
    let gates: Vec<String> = g.gaps.iter().map(|x| x.gate.to_string()).collect();
    Ok((
        false,
        format!(
            "stretch not met: SELTZO proves k = {dd} (want {}) and {ma} (want {}); SETZ values held; \
             gap report at p = {small}, k = {target}: impossible transfers at gates {}",
            p2 - 2,
            p2 - 1,
            gates.join(",")
        ),
    ))
}

fn c7_witnesses() -> Outcome {
    let p = 53;
    let fmt = named(p);
    let mut parts = Vec::new();
    for (w, name, lo, hi) in [(Witness::Ddadd3u2, "ddadd", 29, 31), (Witness::Madd15u2, "madd", 14, 16)] {
        let inputs = paper_witness(w, &fmt).map_err(|e| e.to_string())?;
        let (err, _) = relative_error(&builtin(name).unwrap(), &inputs, &fmt).map_err(|e| e.to_string())?;
        // lo/10 u^2 <= num/den <= hi/10 u^2, exactly
        let scaled = err.num.shifted(2 * i64::from(p));
        let ten = ExactReal::from_int(BigInt::from(10));
        let lhs = &scaled * &ten;
        let lo_ok = ExactReal::from_int(BigInt::from(lo)) * err.den.clone() <= lhs;
        let hi_ok = lhs <= ExactReal::from_int(BigInt::from(hi)) * err.den.clone();
        if !(lo_ok && hi_ok) {
            return Err(format!("{name}: error {:.5}u^2", err.in_u2(p)));
        }
        parts.push(format!("{name} {:.5}u^2", err.in_u2(p)));
    }
    Ok(parts.join(", "))
}

fn c8_exhaustive(p: u32) -> Outcome {
    let t = Instant::now();
    let w = SearchWindow::default_for(p);
    let mut parts = Vec::new();
    let p2 = 2 * i64::from(p);
    for (name, k) in [("ddadd", p2 - 2), ("madd", p2 - 1)] {
        let r = worst_case_error(&builtin(name).unwrap(), &w).map_err(|e| e.to_string())?;
        if !r.recheck() {
            return Err(format!("{name}: reported error does not recompute"));
        }
        let ConcreteProperty::RelErrorAtMost(bound) = ConcreteProperty::theorem_bound(p, k) else {
            unreachable!()
        };
        if !r.error.at_most(&bound) {
            return Err(format!("{name} at p = {p}: {:.4}u^2 exceeds (1+2u)2^-{k}", r.error.in_u2(p)));
        }
        parts.push(format!("{name} {:.4}u^2 <= (1+2u)2^-{k}", r.error.in_u2(p)));
    }
    Ok(format!("p = {p}: {} in {:.1}s", parts.join(", "), t.elapsed().as_secs_f64()))
}

fn c9_add2() -> Outcome {
    let w = SearchWindow::default_for(6).with_exponents(-8, 0);
    let r = worst_case_error(&builtin("add2").unwrap(), &w).map_err(|e| e.to_string())?;
    let half = ExactReal::new(BigInt::from(1), -1);
    if r.error.at_most(&half) && r.error.num != &r.error.den * &half {
        return Err(format!("worst error only {}", r.error.to_f64()));
    }
    let fmt = w.format();
    let lits: Vec<String> = r.inputs.iter().map(|v| v.to_literal(&fmt)).collect();
    Ok(format!("relative error {} at {}", r.error.to_f64(), lits.join(", ")))
}

fn c10_structural() -> Outcome {
    let dd = builtin("ddadd").unwrap();
    let ma = builtin("madd").unwrap();
    if dd.depth() != 5 || ma.depth() != 4 {
        return Err(format!("depths {} and {}", dd.depth(), ma.depth()));
    }
    let aug = builtin("ddadd_aug").unwrap();
    let fmt = named(53);
    let prop = PropertySpec::relative_error(&aug, 100);
    let prob = smt::encode(&aug, Domain::Seltzo, &prop, &fmt).map_err(|e| e.to_string())?;
    if prob.variable_count() != 108 {
        return Err(format!("{} variables", prob.variable_count()));
    }
    let again = smt::encode(&aug, Domain::Seltzo, &prop, &fmt).map_err(|e| e.to_string())?;
    if emit_smtlib(&prob) != emit_smtlib(&again) {
        return Err("emission differs between runs".into());
    }
    let f4 = fmt_p(4);
    let w = ExpWindow::default_for(4);
    let vals = window_values(&f4, w.lo, w.hi);
    let (mut pairs, mut zero_sign) = (0, 0);
    for x in &vals {
        for y in &vals {
            let (s, e) = two_sum(x, y, &f4).map_err(|x| x.to_string())?;
            let again = two_sum(&s, &e, &f4).map_err(|x| x.to_string())?;
            if again != (s, e) {
                // -0 + +0 rounds to +0, so only the sign of a zero sum may change.
                let same_value = again.0.to_exact(&f4) == s.to_exact(&f4) && again.1.to_exact(&f4) == e.to_exact(&f4);
                if !(same_value && s.is_zero()) {
                    return Err(format!("TwoSum not idempotent at {x:?}, {y:?}"));
                }
                zero_sign += 1;
            }
            pairs += 1;
        }
    }
    Ok(format!(
        "108 variables, depths 5/4, TwoSum idempotent on {pairs} pairs at p = 4 \
         ({zero_sign} differ only in the sign of a zero sum), emission deterministic"
    ))
}

fn main() {
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut line = |n: u32, title: &str, r: &Outcome| {
        let (status, detail) = match r {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        println!("criterion {n:>2} {title:<28} {status}  {detail}");
        if r.is_err() {
            failed.push(n);
        }
    };

    // Solver-bound criteria run alongside the oracle-bound ones.
    let (c4, c5, c6, rest) = std::thread::scope(|s| {
        let h4 = s.spawn(c4_setz);
        let h5 = s.spawn(c5_se);
        let h6 = s.spawn(c6_seltzo);
        let rest = [
            c1_soundness(),
            c2_coverage(),
            c3_fixed_point(),
            c7_witnesses(),
            c8_exhaustive(3).and_then(|a| c8_exhaustive(4).map(|b| format!("{a}; {b}"))),
            c9_add2(),
            c10_structural(),
        ];
        (h4.join().unwrap(), h5.join().unwrap(), h6.join().unwrap(), rest)
    });
    let [c1, c2, c3, c7, c8, c9, c10] = rest;
    line(1, "lemma soundness", &c1);
    line(2, "coverage", &c2);
    line(3, "fixed-point iff", &c3);
    line(4, "SETZ theorem reproduction", &c4);
    line(5, "SE ablation", &c5);
    match &c6 {
        Ok((true, d)) => line(6, "SELTZO stretch", &Ok(d.clone())),
        Ok((false, d)) => {
            // The stretch is conditional; its fallback requirements held.
            println!("criterion  6 {:<28} FAIL  {d}", "SELTZO stretch");
            println!("             {:<28} PASS  fallback: SETZ values under SELTZO and a gap report", "");
        }
        Err(d) => line(6, "SELTZO stretch", &Err(d.clone())),
    }
    line(7, "witness reproduction", &c7);
    line(8, "exhaustive bound check", &c8);
    line(9, "add2 weakness", &c9);
    line(10, "structural", &c10);
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
