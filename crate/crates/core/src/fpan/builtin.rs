use super::{parse, Fpan, FpanError, Op};

const ADD2: &str = "\
network add2
wires x0 y0 x1 y1
inputs x0 x1 y0 y1
twosum x0 y0
twosum x1 y1
discard y1
twosum y0 x1
discard x1
twosum x0 y0
outputs z0=x0 z1=y0
";

const DDADD: &str = "\
network ddadd
wires x0 y0 x1 y1
inputs x0 x1 y0 y1
twosum x0 y0
twosum x1 y1
twosum y0 x1
discard x1
twosum x0 y0
twosum y0 y1
discard y1
twosum x0 y0
outputs z0=x0 z1=y0
";

const MADD: &str = "\
network madd
wires x0 y0 x1 y1
inputs x0 x1 y0 y1
twosum x0 y0
twosum x1 y1
twosum x0 x1
twosum y0 y1
discard y1
twosum y0 x1
discard x1
twosum x0 y0
outputs z0=x0 z1=y0
";

/// Names accepted by [`builtin`]; `kbn(n)` stands for any `n >= 2`.
pub fn builtin_names() -> Vec<&'static str> {
    vec!["add2", "ddadd", "madd", "ddadd_aug", "madd_aug", "kbn(n)"]
}

pub fn builtin(name: &str) -> Result<Fpan, FpanError> {
    let name = name.trim();
    match name {
        "add2" => parse(ADD2),
        "ddadd" => parse(DDADD),
        "madd" => parse(MADD),
        "ddadd_aug" => Ok(parse(DDADD)?.augment()),
        "madd_aug" => Ok(parse(MADD)?.augment()),
        _ => {
            let n = name
                .strip_prefix("kbn(")
                .and_then(|r| r.strip_suffix(')'))
                .or_else(|| name.strip_prefix("kbn"))
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&n| n >= 2)
                .ok_or_else(|| FpanError::UnknownBuiltin(name.to_string()))?;
            Ok(kbn(n))
        }
    }
}

/// Compensated summation of `n` terms as a double staircase.
///
/// Wires are `x_n .. x_1` top to bottom and the i-th input goes to `x_i`.
/// The first staircase accumulates upward with gates `(x_{i+1}, x_i)`; the
/// second repeats the same pairs two steps behind, folding each error term
/// upward before it is discarded. Only `x_n` survives.
fn kbn(n: usize) -> Fpan {
    let wire = |i: usize| n - i;
    let pair = |i: usize| Op::Gate {
        sum: wire(i + 1),
        err: wire(i),
    };
    let mut ops = Vec::new();
    for i in 1..=2.min(n - 1) {
        ops.push(pair(i));
    }
    for i in 3..n {
        ops.push(pair(i));
        ops.push(pair(i - 2));
        ops.push(Op::Discard(wire(i - 2)));
    }
    for j in n.saturating_sub(2).max(1)..n {
        ops.push(pair(j));
        ops.push(Op::Discard(wire(j)));
    }
    let wires = (1..=n).rev().map(|i| format!("x{i}")).collect();
    let inputs = (1..=n).map(wire).collect();
    Fpan::new(
        format!("kbn{n}"),
        wires,
        Some(inputs),
        ops,
        Some(vec![("s".into(), wire(n))]),
    )
    .expect("kbn construction is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kbn_counts() {
        for n in 2..10 {
            let f = builtin(&format!("kbn({n})")).unwrap();
            assert_eq!(f.gate_count(), 2 * (n - 1), "n={n}");
            assert_eq!(f.discard_count(), n - 1, "n={n}");
            assert_eq!(f.outputs().len(), 1);
        }
    }

    #[test]
    fn unknown_names() {
        assert!(builtin("kbn(1)").is_err());
        assert!(builtin("qdadd").is_err());
        assert!(builtin("kbn7").is_ok());
    }
}
