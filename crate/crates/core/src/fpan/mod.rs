//! Floating-point accumulation networks: wires, TwoSum gates and discards.

mod builtin;
mod dsl;
mod simulate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::softfloat::SoftFloatError;

pub use builtin::{builtin, builtin_names};
pub use dsl::parse;
pub use simulate::{simulate, simulate_with, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FpanError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("unknown network `{0}`")]
    UnknownBuiltin(String),
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error(transparent)]
    Float(#[from] SoftFloatError),
}

/// One step of a network, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    /// TwoSum with the sum written to `sum` and the error to `err`.
    Gate { sum: usize, err: usize },
    Discard(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentRole {
    Input,
    GateSum,
    GateErr,
}

/// A maximal piece of a wire between two gates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmentLabel {
    pub wire: usize,
    pub wire_name: String,
    /// 0 for the input segment, then one more per gate touching the wire.
    pub index: usize,
    pub role: SegmentRole,
}

impl fmt::Display for SegmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.wire_name, self.index)
    }
}

/// Segment ids touched by one gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateSegments {
    pub sum_wire: usize,
    pub err_wire: usize,
    pub in_sum: usize,
    pub in_err: usize,
    pub out_sum: usize,
    pub out_err: usize,
}

/// A step with segments resolved, for interpreters and encoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Gate(GateSegments),
    Discard { wire: usize, segment: usize },
}

/// A validated network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fpan {
    name: String,
    wires: Vec<String>,
    /// `inputs[i]` is the wire receiving the i-th input value.
    inputs: Vec<usize>,
    ops: Vec<Op>,
    /// Output names and the wires they read, in declared order.
    outputs: Vec<(String, usize)>,
}

impl Fpan {
    /// Build and validate a network. `inputs` defaults to wire order and
    /// `outputs` to the surviving wires under their own names.
    pub fn new(
        name: impl Into<String>,
        wires: Vec<String>,
        inputs: Option<Vec<usize>>,
        ops: Vec<Op>,
        outputs: Option<Vec<(String, usize)>>,
    ) -> Result<Self, FpanError> {
        let n = wires.len();
        if n == 0 {
            return Err(FpanError::Invalid("network has no wires".into()));
        }
        for (i, w) in wires.iter().enumerate() {
            if wires[..i].contains(w) {
                return Err(FpanError::Invalid(format!("duplicate wire `{w}`")));
            }
        }
        let inputs = inputs.unwrap_or_else(|| (0..n).collect());
        let mut seen = vec![false; n];
        for &w in &inputs {
            if w >= n || std::mem::replace(&mut seen[w], true) {
                return Err(FpanError::Invalid("inputs must list every wire exactly once".into()));
            }
        }
        if inputs.len() != n {
            return Err(FpanError::Invalid("inputs must list every wire exactly once".into()));
        }
        let mut live = vec![true; n];
        for op in &ops {
            match *op {
                Op::Gate { sum, err } => {
                    if sum >= n || err >= n {
                        return Err(FpanError::Invalid("gate references unknown wire".into()));
                    }
                    if sum == err {
                        return Err(FpanError::Invalid(format!(
                            "gate uses wire `{}` twice",
                            wires[sum]
                        )));
                    }
                    for w in [sum, err] {
                        if !live[w] {
                            return Err(FpanError::Invalid(format!(
                                "wire `{}` used after discard",
                                wires[w]
                            )));
                        }
                    }
                }
                Op::Discard(w) => {
                    if w >= n {
                        return Err(FpanError::Invalid("discard of unknown wire".into()));
                    }
                    if !std::mem::replace(&mut live[w], false) {
                        return Err(FpanError::Invalid(format!(
                            "wire `{}` discarded twice",
                            wires[w]
                        )));
                    }
                }
            }
        }
        let outputs = match outputs {
            Some(o) => o,
            None => (0..n).filter(|&w| live[w]).map(|w| (wires[w].clone(), w)).collect(),
        };
        for (i, (oname, w)) in outputs.iter().enumerate() {
            if *w >= n || !live[*w] {
                return Err(FpanError::Invalid(format!("output `{oname}` reads a discarded wire")));
            }
            if outputs[..i].iter().any(|(o, v)| o == oname || v == w) {
                return Err(FpanError::Invalid(format!("duplicate output `{oname}`")));
            }
        }
        Ok(Self {
            name: name.into(),
            wires,
            inputs,
            ops,
            outputs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn wires(&self) -> &[String] {
        &self.wires
    }

    pub fn wire_index(&self, name: &str) -> Option<usize> {
        self.wires.iter().position(|w| w == name)
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn outputs(&self) -> &[(String, usize)] {
        &self.outputs
    }

    pub fn wire_count(&self) -> usize {
        self.wires.len()
    }

    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Gate { .. })).count()
    }

    pub fn discard_count(&self) -> usize {
        self.ops.len() - self.gate_count()
    }

    /// `n + 2g`.
    pub fn segment_count(&self) -> usize {
        self.wire_count() + 2 * self.gate_count()
    }

    /// All segment labels. Ids are positions in this list: input segments in
    /// wire order, then for each gate its sum and error outputs.
    pub fn segments(&self) -> Vec<SegmentLabel> {
        let mut next = vec![0usize; self.wires.len()];
        let mut out: Vec<SegmentLabel> = self
            .wires
            .iter()
            .enumerate()
            .map(|(w, name)| SegmentLabel {
                wire: w,
                wire_name: name.clone(),
                index: 0,
                role: SegmentRole::Input,
            })
            .collect();
        for op in &self.ops {
            if let Op::Gate { sum, err } = *op {
                for (w, role) in [(sum, SegmentRole::GateSum), (err, SegmentRole::GateErr)] {
                    next[w] += 1;
                    out.push(SegmentLabel {
                        wire: w,
                        wire_name: self.wires[w].clone(),
                        index: next[w],
                        role,
                    });
                }
            }
        }
        out
    }

    /// Resolved steps in execution order.
    pub fn steps(&self) -> Vec<Step> {
        let mut current: Vec<usize> = (0..self.wires.len()).collect();
        let mut next_id = self.wires.len();
        let mut out = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            match *op {
                Op::Gate { sum, err } => {
                    let g = GateSegments {
                        sum_wire: sum,
                        err_wire: err,
                        in_sum: current[sum],
                        in_err: current[err],
                        out_sum: next_id,
                        out_err: next_id + 1,
                    };
                    current[sum] = next_id;
                    current[err] = next_id + 1;
                    next_id += 2;
                    out.push(Step::Gate(g));
                }
                Op::Discard(w) => out.push(Step::Discard {
                    wire: w,
                    segment: current[w],
                }),
            }
        }
        out
    }

    pub fn gate_segments(&self) -> Vec<GateSegments> {
        self.steps()
            .into_iter()
            .filter_map(|s| match s {
                Step::Gate(g) => Some(g),
                Step::Discard { .. } => None,
            })
            .collect()
    }

    /// Segment id holding each wire's final value.
    pub fn final_segments(&self) -> Vec<usize> {
        let mut current: Vec<usize> = (0..self.wires.len()).collect();
        for g in self.gate_segments() {
            current[g.sum_wire] = g.out_sum;
            current[g.err_wire] = g.out_err;
        }
        current
    }

    /// Segment ids of the named outputs, in output order.
    pub fn output_segments(&self) -> Vec<usize> {
        let fin = self.final_segments();
        self.outputs.iter().map(|&(_, w)| fin[w]).collect()
    }

    /// Segment id of the i-th input value.
    pub fn input_segments(&self) -> Vec<usize> {
        self.inputs.clone()
    }

    /// Segment id for a label like `x0_2` or an output name like `z0`.
    pub fn resolve_segment(&self, name: &str) -> Option<usize> {
        if let Some(pos) = self.outputs.iter().position(|(o, _)| o == name) {
            return Some(self.output_segments()[pos]);
        }
        self.segments().iter().position(|s| s.to_string() == name)
    }

    /// Longest chain of gates in which consecutive gates share a wire.
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.wires.len()];
        let mut best = 0;
        for op in &self.ops {
            if let Op::Gate { sum, err } = *op {
                let v = d[sum].max(d[err]) + 1;
                d[sum] = v;
                d[err] = v;
                best = best.max(v);
            }
        }
        best
    }

    /// The network with all discards removed and the discarded wires summed
    /// into explicit error outputs: the topmost discarded wire receives a
    /// TwoSum with each other discarded wire, top to bottom. Outputs are the
    /// original outputs followed by `w0, w1, ...` for the discarded wires.
    pub fn augment(&self) -> Fpan {
        let mut discarded: Vec<usize> = self
            .ops
            .iter()
            .filter_map(|o| match o {
                Op::Discard(w) => Some(*w),
                Op::Gate { .. } => None,
            })
            .collect();
        discarded.sort_unstable();
        let mut ops: Vec<Op> = self
            .ops
            .iter()
            .copied()
            .filter(|o| matches!(o, Op::Gate { .. }))
            .collect();
        if let Some((&top, rest)) = discarded.split_first() {
            for &w in rest {
                ops.push(Op::Gate { sum: top, err: w });
            }
        }
        let mut outputs = self.outputs.clone();
        for (i, &w) in discarded.iter().enumerate() {
            outputs.push((format!("w{i}"), w));
        }
        Fpan::new(
            format!("{}_aug", self.name),
            self.wires.clone(),
            Some(self.inputs.clone()),
            ops,
            Some(outputs),
        )
        .expect("augmenting a valid network yields a valid network")
    }
}

impl fmt::Display for Fpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&dsl::to_dsl(self))
    }
}
