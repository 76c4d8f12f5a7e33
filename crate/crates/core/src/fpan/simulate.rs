use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{Fpan, FpanError, SegmentLabel, Step};
use crate::softfloat::{two_sum_with, DyadicInt, FloatVal, FormatParams};

/// Every segment value of one execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub labels: Vec<SegmentLabel>,
    /// Indexed by segment id.
    pub values: Vec<FloatVal>,
    /// `(segment id, value)` for each discard, in execution order.
    pub discarded: Vec<(usize, FloatVal)>,
    /// Output names and values in output order.
    pub outputs: Vec<(String, FloatVal)>,
}

impl Trace {
    pub fn value(&self, label: &str) -> Option<FloatVal> {
        self.labels
            .iter()
            .position(|l| l.to_string() == label)
            .map(|i| self.values[i])
            .or_else(|| self.outputs.iter().find(|(o, _)| o == label).map(|(_, v)| *v))
    }

    pub fn output_values(&self) -> Vec<FloatVal> {
        self.outputs.iter().map(|(_, v)| *v).collect()
    }

    /// Segment label to float literal.
    pub fn to_json(&self, fmt: &FormatParams) -> serde_json::Value {
        let segments: BTreeMap<String, String> = self
            .labels
            .iter()
            .zip(&self.values)
            .map(|(l, v)| (l.to_string(), v.to_literal(fmt)))
            .collect();
        let outputs: Vec<serde_json::Value> = self
            .outputs
            .iter()
            .map(|(o, v)| serde_json::json!({ "name": o, "value": v.to_literal(fmt) }))
            .collect();
        let discarded: Vec<serde_json::Value> = self
            .discarded
            .iter()
            .map(|(s, v)| {
                serde_json::json!({ "segment": self.labels[*s].to_string(), "value": v.to_literal(fmt) })
            })
            .collect();
        serde_json::json!({ "segments": segments, "outputs": outputs, "discarded": discarded })
    }
}

/// Run a network on concrete inputs, given in input order.
pub fn simulate(f: &Fpan, inputs: &[FloatVal], fmt: &FormatParams) -> Result<Trace, FpanError> {
    simulate_with::<BigInt>(f, inputs, fmt)
}

/// [`simulate`] with exact intermediate arithmetic over `I`.
pub fn simulate_with<I: DyadicInt>(
    f: &Fpan,
    inputs: &[FloatVal],
    fmt: &FormatParams,
) -> Result<Trace, FpanError> {
    if inputs.len() != f.wire_count() {
        return Err(FpanError::InputCount {
            expected: f.wire_count(),
            got: inputs.len(),
        });
    }
    let mut values = vec![FloatVal::pos_zero(fmt); f.segment_count()];
    for (&wire, v) in f.inputs().iter().zip(inputs) {
        values[wire] = *v;
    }
    let mut discarded = Vec::new();
    for step in f.steps() {
        match step {
            Step::Gate(g) => {
                let (s, e) = two_sum_with::<I>(&values[g.in_sum], &values[g.in_err], fmt)?;
                values[g.out_sum] = s;
                values[g.out_err] = e;
            }
            Step::Discard { segment, .. } => discarded.push((segment, values[segment])),
        }
    }
    let outputs = f
        .outputs()
        .iter()
        .zip(f.output_segments())
        .map(|((name, _), seg)| (name.clone(), values[seg]))
        .collect();
    Ok(Trace {
        labels: f.segments(),
        values,
        discarded,
        outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpan::builtin;
    use crate::softfloat::ExactReal;

    fn exact_sum(vals: &[FloatVal], fmt: &FormatParams) -> ExactReal {
        vals.iter().fold(ExactReal::zero(), |acc, v| &acc + &v.to_exact(fmt))
    }

    fn lit(s: &str, fmt: &FormatParams) -> FloatVal {
        FloatVal::parse_literal(s, fmt).unwrap()
    }

    #[test]
    fn add2_passes_zeros_through() {
        let fmt = FormatParams::binary64();
        let one = lit("1", &fmt);
        let z = FloatVal::pos_zero(&fmt);
        let t = simulate(&builtin("add2").unwrap(), &[one, z, z, z], &fmt).unwrap();
        assert_eq!(t.output_values(), vec![one, z]);
    }

    #[test]
    fn kbn3_beats_naive_summation() {
        let fmt = FormatParams::new(4, -30, None).unwrap();
        let a = lit("1.000_2 * 2^0", &fmt);
        let b = lit("1.000_2 * 2^-4", &fmt);
        let t = simulate(&builtin("kbn(3)").unwrap(), &[a, b, b], &fmt).unwrap();
        assert_eq!(t.output_values(), vec![lit("1.001_2 * 2^0", &fmt)]);
        let naive = crate::softfloat::add(&crate::softfloat::add(&a, &b, &fmt).unwrap(), &b, &fmt);
        assert_eq!(naive.unwrap(), a);
    }

    #[test]
    fn trace_conserves_sum() {
        let fmt = FormatParams::new(5, -30, None).unwrap();
        let ins: Vec<FloatVal> = ["1.0111_2 * 2^0", "-1.1001_2 * 2^-5", "-1.0011_2 * 2^-1", "1.1111_2 * 2^-7"]
            .iter()
            .map(|s| lit(s, &fmt))
            .collect();
        let f = builtin("ddadd").unwrap();
        let t = simulate(&f, &ins, &fmt).unwrap();
        let mut outs = t.output_values();
        outs.extend(t.discarded.iter().map(|(_, v)| *v));
        assert_eq!(exact_sum(&outs, &fmt), exact_sum(&ins, &fmt));
        assert_eq!(simulate_with::<i128>(&f, &ins, &fmt).unwrap(), t);
    }

    #[test]
    fn json_export_uses_labels() {
        let fmt = FormatParams::new(4, -30, None).unwrap();
        let one = lit("1", &fmt);
        let t = simulate(&crate::fpan::parse("wires a b\ntwosum a b").unwrap(), &[one, one], &fmt).unwrap();
        let j = t.to_json(&fmt);
        assert_eq!(j["segments"]["a_1"], "+1.000_2 * 2^1");
        assert_eq!(j["segments"]["b_1"], "+0.0");
        assert!(t.value("b_0").is_some());
        assert!(simulate(&builtin("add2").unwrap(), &[one], &fmt).is_err());
    }
}
