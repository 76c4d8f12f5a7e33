use super::{is_consistent, AbstractVal, Domain};
use crate::softfloat::{FloatVal, FormatParams};

/// Fraction fields of the form `hi | free bits | lo`.
#[derive(Debug, Clone, Copy)]
struct Pattern {
    hi: u128,
    free: u32,
    lo: u128,
    lo_len: u32,
}

impl Pattern {
    fn fraction(&self, k: u128) -> u128 {
        (((self.hi << self.free) | k) << self.lo_len) | self.lo
    }
}

fn ones(n: u32) -> u128 {
    if n == 0 {
        0
    } else {
        u128::MAX >> (128 - n)
    }
}

/// Fraction pattern with a fixed leading run and a fixed trailing run.
fn runs_pattern(w: u32, lead_one: bool, lead: u32, trail_one: bool, trail: u32) -> Option<Pattern> {
    let run = |one: bool, n: u32| if one { ones(n) } else { 0 };
    if lead == w {
        return (trail == w && lead_one == trail_one).then(|| Pattern {
            hi: run(lead_one, w),
            free: 0,
            lo: 0,
            lo_len: 0,
        });
    }
    if lead + trail == w {
        return (lead_one != trail_one).then(|| Pattern {
            hi: run(lead_one, lead),
            free: 0,
            lo: run(trail_one, trail),
            lo_len: trail,
        });
    }
    if lead + trail + 1 == w {
        // One middle bit terminates both runs.
        return (lead_one == trail_one).then(|| Pattern {
            hi: run(lead_one, lead),
            free: 0,
            lo: (u128::from(!trail_one) << trail) | run(trail_one, trail),
            lo_len: trail + 1,
        });
    }
    if lead + trail + 2 > w {
        return None;
    }
    Some(Pattern {
        hi: (run(lead_one, lead) << 1) | u128::from(!lead_one),
        free: w - lead - trail - 2,
        lo: (u128::from(!trail_one) << trail) | run(trail_one, trail),
        lo_len: trail + 1,
    })
}

/// Lazy iterator over the concrete values of an abstract value.
#[derive(Debug, Clone)]
pub struct Concretizations {
    fmt: FormatParams,
    negative: bool,
    exponent: i64,
    zero: bool,
    pattern: Option<Pattern>,
    next: u128,
    end: u128,
}

impl Concretizations {
    pub(super) fn new(v: &AbstractVal, fmt: &FormatParams) -> Self {
        let w = fmt.fraction_bits();
        let negative = v.s == 1;
        let zero = v.is_zero(fmt);
        let pattern = if !is_consistent(v, fmt) {
            None
        } else if zero {
            Some(Pattern { hi: 0, free: 0, lo: 0, lo_len: 0 })
        } else {
            match v.domain {
                Domain::Se => Some(Pattern { hi: 0, free: w, lo: 0, lo_len: 0 }),
                Domain::Setz => {
                    let t = v.ntz.unwrap() as u32;
                    Some(if t == w {
                        Pattern { hi: 0, free: 0, lo: 0, lo_len: w }
                    } else {
                        Pattern { hi: 0, free: w - t - 1, lo: 1 << t, lo_len: t + 1 }
                    })
                }
                Domain::Seltzo => {
                    let (nlz, nlo, ntz, nto) = (v.nlz.unwrap(), v.nlo.unwrap(), v.ntz.unwrap(), v.nto.unwrap());
                    let (lead_one, lead) = if nlz > 0 { (false, nlz) } else { (true, nlo) };
                    let (trail_one, trail) = if ntz > 0 { (false, ntz) } else { (true, nto) };
                    runs_pattern(w, lead_one, lead as u32, trail_one, trail as u32)
                }
            }
        };
        let end = match pattern {
            None => 0,
            Some(p) if p.free >= 128 => u128::MAX,
            Some(p) => 1u128 << p.free,
        };
        Self {
            fmt: fmt.clone(),
            negative,
            exponent: v.e,
            zero,
            pattern,
            next: 0,
            end,
        }
    }

    /// Total number of concretizations, independent of iteration progress.
    pub fn total(&self) -> u128 {
        self.end
    }
}

impl Iterator for Concretizations {
    type Item = FloatVal;

    fn next(&mut self) -> Option<FloatVal> {
        if self.next >= self.end {
            return None;
        }
        let k = self.next;
        self.next += 1;
        let pat = self.pattern.as_ref()?;
        if self.zero {
            return Some(FloatVal::zero(self.negative, &self.fmt));
        }
        FloatVal::new(self.negative, self.exponent, pat.fraction(k), &self.fmt).ok()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = usize::try_from(self.end - self.next).unwrap_or(usize::MAX);
        (rem, Some(rem))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{abstract_value, enumerate_concretizations};
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn zero_and_simple_cases() {
        let fmt = FormatParams::new(4, -10, None).unwrap();
        let z: Vec<_> = enumerate_concretizations(&AbstractVal::seltzo(1, -11, 3, 0, 3, 0), &fmt).collect();
        assert_eq!(z, vec![FloatVal::neg_zero(&fmt)]);
        let one: Vec<_> = enumerate_concretizations(&AbstractVal::seltzo(0, 0, 3, 0, 3, 0), &fmt).collect();
        assert_eq!(one, vec![FloatVal::parse_literal("1", &fmt).unwrap()]);
        assert_eq!(enumerate_concretizations(&AbstractVal::seltzo(0, 0, 2, 0, 2, 0), &fmt).count(), 0);
    }

    #[test]
    fn setz_pattern_count() {
        let fmt = FormatParams::new(6, -10, None).unwrap();
        let v = AbstractVal::setz(0, 0, 1);
        let all: Vec<_> = enumerate_concretizations(&v, &fmt).collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|x| x.fraction() & 0b11 == 0b10));
    }

    /// Every concrete value is produced by exactly its own abstraction.
    #[test]
    fn partition_matches_brute_force() {
        for p in 2..=9u32 {
            let fmt = FormatParams::new(p, -10, None).unwrap();
            for domain in Domain::ALL {
                let mut groups: HashMap<AbstractVal, Vec<FloatVal>> = HashMap::new();
                for frac in 0..(1u128 << (p - 1)) {
                    for neg in [false, true] {
                        let x = FloatVal::new(neg, 2, frac, &fmt).unwrap();
                        groups.entry(abstract_value(&x, domain, &fmt)).or_default().push(x);
                    }
                }
                for (a, mut xs) in groups {
                    let it = enumerate_concretizations(&a, &fmt);
                    assert_eq!(it.total() as usize, xs.len(), "p={p} {a}");
                    let mut got: Vec<FloatVal> = it.collect();
                    got.sort();
                    xs.sort();
                    assert_eq!(got, xs, "p={p} {a}");
                }
            }
        }
    }
}
