//! Line-oriented text format for networks.
//!
//! ```text
//! network add2
//! wires x0 y0 x1 y1        # top to bottom
//! inputs x0 x1 y0 y1       # optional: order of input values
//! twosum x0 y0             # sum on x0, error on y0
//! discard y1
//! outputs z0=x0 z1=y0      # optional
//! ```

use std::fmt::Write as _;

use super::{Fpan, FpanError, Op};

struct Cursor<'a> {
    line: usize,
    words: Vec<(usize, &'a str)>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FpanError {
    FpanError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Vec<Cursor<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut words = Vec::new();
        let mut start = None;
        for (col, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace() || ch == ';', start) {
                (false, None) => start = Some(col),
                (true, Some(s)) => {
                    words.push((s + 1, &body[s..col]));
                    start = None;
                }
                _ => {}
            }
        }
        if !words.is_empty() {
            out.push(Cursor { line: i + 1, words });
        }
    }
    out
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse and validate a network description.
pub fn parse(text: &str) -> Result<Fpan, FpanError> {
    let mut name: Option<String> = None;
    let mut wires: Option<Vec<String>> = None;
    let mut inputs: Option<Vec<usize>> = None;
    let mut outputs: Option<Vec<(String, usize)>> = None;
    let mut ops = Vec::new();
    let mut live: Vec<bool> = Vec::new();

    for cur in tokenize(text) {
        let line = cur.line;
        let (kcol, keyword) = cur.words[0];
        let args = &cur.words[1..];
        let lookup = |wires: &Option<Vec<String>>, col: usize, w: &str| -> Result<usize, FpanError> {
            let ws = wires
                .as_ref()
                .ok_or_else(|| syntax(line, kcol, "`wires` must come before this statement"))?;
            ws.iter()
                .position(|x| x == w)
                .ok_or_else(|| syntax(line, col, format!("unknown wire `{w}`")))
        };
        match keyword {
            "network" => {
                if name.is_some() {
                    return Err(syntax(line, kcol, "duplicate `network` statement"));
                }
                match args {
                    [(c, n)] if is_ident(n) => {
                        let _ = c;
                        name = Some((*n).to_string());
                    }
                    [(c, _)] => return Err(syntax(line, *c, "network name must be an identifier")),
                    _ => return Err(syntax(line, kcol, "expected `network <name>`")),
                }
            }
            "wires" => {
                if wires.is_some() {
                    return Err(syntax(line, kcol, "duplicate `wires` statement"));
                }
                if args.is_empty() {
                    return Err(syntax(line, kcol, "expected at least one wire"));
                }
                let mut ws: Vec<String> = Vec::new();
                for &(c, w) in args {
                    if !is_ident(w) {
                        return Err(syntax(line, c, format!("invalid wire name `{w}`")));
                    }
                    if ws.iter().any(|x| x == w) {
                        return Err(syntax(line, c, format!("duplicate wire `{w}`")));
                    }
                    ws.push(w.to_string());
                }
                live = vec![true; ws.len()];
                wires = Some(ws);
            }
            "inputs" => {
                if inputs.is_some() {
                    return Err(syntax(line, kcol, "duplicate `inputs` statement"));
                }
                let mut order = Vec::new();
                for &(c, w) in args {
                    let idx = lookup(&wires, c, w)?;
                    if order.contains(&idx) {
                        return Err(syntax(line, c, format!("wire `{w}` listed twice")));
                    }
                    order.push(idx);
                }
                if order.len() != live.len() {
                    return Err(syntax(line, kcol, "`inputs` must list every wire"));
                }
                inputs = Some(order);
            }
            "twosum" => {
                let [(ca, a), (cb, b)] = args else {
                    return Err(syntax(line, kcol, "expected `twosum <sum-wire> <err-wire>`"));
                };
                let ia = lookup(&wires, *ca, a)?;
                let ib = lookup(&wires, *cb, b)?;
                if ia == ib {
                    return Err(syntax(line, *cb, "twosum needs two distinct wires"));
                }
                for (c, w, i) in [(ca, a, ia), (cb, b, ib)] {
                    if !live[i] {
                        return Err(syntax(line, *c, format!("wire `{w}` was discarded")));
                    }
                }
                ops.push(Op::Gate { sum: ia, err: ib });
            }
            "discard" => {
                if args.is_empty() {
                    return Err(syntax(line, kcol, "expected `discard <wire>`"));
                }
                for &(c, w) in args {
                    let i = lookup(&wires, c, w)?;
                    if !std::mem::replace(&mut live[i], false) {
                        return Err(syntax(line, c, format!("wire `{w}` was already discarded")));
                    }
                    ops.push(Op::Discard(i));
                }
            }
            "outputs" => {
                if outputs.is_some() {
                    return Err(syntax(line, kcol, "duplicate `outputs` statement"));
                }
                let mut outs: Vec<(String, usize)> = Vec::new();
                for &(c, item) in args {
                    let (oname, w) = item.split_once('=').unwrap_or((item, item));
                    if !is_ident(oname) {
                        return Err(syntax(line, c, format!("invalid output name `{oname}`")));
                    }
                    let i = lookup(&wires, c + oname.len() + 1, w)?;
                    if outs.iter().any(|(o, _)| o == oname) {
                        return Err(syntax(line, c, format!("duplicate output `{oname}`")));
                    }
                    outs.push((oname.to_string(), i));
                }
                outputs = Some(outs);
            }
            other => return Err(syntax(line, kcol, format!("unknown statement `{other}`"))),
        }
    }

    let wires = wires.ok_or_else(|| syntax(1, 1, "missing `wires` statement"))?;
    Fpan::new(name.unwrap_or_else(|| "anonymous".into()), wires, inputs, ops, outputs)
}

/// Render a network back to source form; `parse(to_dsl(f)) == f`.
pub(super) fn to_dsl(f: &Fpan) -> String {
    let w = f.wires();
    let mut out = String::new();
    let _ = writeln!(out, "network {}", f.name());
    let _ = writeln!(out, "wires {}", w.join(" "));
    if f.inputs().iter().enumerate().any(|(i, &x)| i != x) {
        let names: Vec<&str> = f.inputs().iter().map(|&i| w[i].as_str()).collect();
        let _ = writeln!(out, "inputs {}", names.join(" "));
    }
    for op in f.ops() {
        match *op {
            Op::Gate { sum, err } => {
                let _ = writeln!(out, "twosum {} {}", w[sum], w[err]);
            }
            Op::Discard(x) => {
                let _ = writeln!(out, "discard {}", w[x]);
            }
        }
    }
    let outs: Vec<String> = f.outputs().iter().map(|(o, i)| format!("{o}={}", w[*i])).collect();
    let _ = writeln!(out, "outputs {}", outs.join(" "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADD2: &str = "network add2\nwires x0 y0 x1 y1\ntwosum x0 y0\ntwosum x1 y1\ndiscard y1\n\
                        twosum y0 x1\ndiscard x1\ntwosum x0 y0\noutputs z0=x0 z1=y0\n";

    #[test]
    fn parses_add2() {
        let f = parse(ADD2).unwrap();
        assert_eq!(f.name(), "add2");
        assert_eq!((f.wire_count(), f.gate_count(), f.discard_count()), (4, 4, 2));
        assert_eq!(f.outputs()[1], ("z1".to_string(), 1));
    }

    #[test]
    fn round_trips_through_text() {
        let f = parse(ADD2).unwrap();
        assert_eq!(parse(&to_dsl(&f)).unwrap(), f);
        let k = crate::fpan::builtin("kbn(4)").unwrap();
        assert_eq!(parse(&to_dsl(&k)).unwrap(), k);
    }

    #[test]
    fn comments_and_identity() {
        let f = parse("# nothing happens\nwires a   # one wire\n").unwrap();
        assert_eq!((f.wire_count(), f.gate_count()), (1, 0));
        assert_eq!(f.outputs(), [("a".to_string(), 0)]);
    }

    #[test]
    fn located_errors() {
        let err = parse("wires a b\ntwosum a a").unwrap_err();
        assert!(matches!(err, FpanError::Syntax { line: 2, column: 10, .. }), "{err}");
        let err = parse("wires a b\ntwosum a c").unwrap_err();
        assert!(matches!(err, FpanError::Syntax { line: 2, column: 10, .. }), "{err}");
        let err = parse("wires a b\ndiscard b\ntwosum a b").unwrap_err();
        assert!(matches!(err, FpanError::Syntax { line: 3, .. }), "{err}");
        let err = parse("wires a a").unwrap_err();
        assert!(matches!(err, FpanError::Syntax { line: 1, column: 9, .. }), "{err}");
        assert!(parse("wires a b\nfrobnicate a").is_err());
        assert!(parse("twosum a b").is_err());
        assert!(parse("wires a b\ndiscard b\noutputs z=b").is_err());
        assert!(parse("wires a b\ninputs a").is_err());
    }
}
