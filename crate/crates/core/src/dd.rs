//! Dynamical-decoupling schedule for a nine-qubit chain with always-on ZZ
//! coupling between neighbours.
//!
//! Times are integer ticks of 0.1 ns so that every phase sum is exact. Each
//! cycle has four delay slots, each followed by an X slot. Odd chain
//! positions flip after slots 1 and 3, even positions after slots 2 and 4.
//! A qubit that does not flip in an X slot idles for the slot's length.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::surface9::N;

pub const TICK_NS: f64 = 0.1;
pub const DELAY_TICKS: u64 = 5013;
pub const X_TICKS: u64 = 356;
pub const SLOTS_PER_CYCLE: u64 = 4;
pub const CYCLE_TICKS: u64 = SLOTS_PER_CYCLE * (DELAY_TICKS + X_TICKS);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DdOp {
    Delay,
    X,
}

impl FromStr for DdOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DELAY" => Ok(DdOp::Delay),
            "X" => Ok(DdOp::X),
            _ => invalid(format!("unknown schedule op {s:?}")),
        }
    }
}

/// One operation on one qubit; `qubit` is the 1-based chain position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedOp {
    pub start: u64,
    pub duration: u64,
    pub op: DdOp,
    pub qubit: usize,
}

impl TimedOp {
    pub fn start_ns(&self) -> f64 {
        self.start as f64 * TICK_NS
    }

    pub fn duration_ns(&self) -> f64 {
        self.duration as f64 * TICK_NS
    }

    pub fn end(&self) -> u64 {
        self.start + self.duration
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedSchedule {
    pub num_qubits: usize,
    pub cycle_count: u64,
    /// Sorted by start time, then qubit.
    pub ops: Vec<TimedOp>,
}

/// Whether position `q` (1-based) flips after slot `slot` (0-based).
fn flips_after(q: usize, slot: u64) -> bool {
    if q % 2 == 1 {
        slot.is_multiple_of(2)
    } else {
        slot % 2 == 1
    }
}

/// `cycles` back-to-back decoupling cycles on the nine-qubit chain.
pub fn dd_schedule(cycles: u64) -> Result<TimedSchedule> {
    if cycles == 0 {
        return invalid("a schedule needs at least one cycle");
    }
    let mut ops = Vec::new();
    for c in 0..cycles {
        for slot in 0..SLOTS_PER_CYCLE {
            let t = c * CYCLE_TICKS + slot * (DELAY_TICKS + X_TICKS);
            for q in 1..=N {
                ops.push(TimedOp { start: t, duration: DELAY_TICKS, op: DdOp::Delay, qubit: q });
            }
            for q in 1..=N {
                let op = if flips_after(q, slot) { DdOp::X } else { DdOp::Delay };
                ops.push(TimedOp { start: t + DELAY_TICKS, duration: X_TICKS, op, qubit: q });
            }
        }
    }
    Ok(TimedSchedule { num_qubits: N, cycle_count: cycles, ops })
}

impl TimedSchedule {
    pub fn total_ticks(&self) -> u64 {
        self.ops.iter().map(TimedOp::end).max().unwrap_or(0)
    }

    pub fn total_ns(&self) -> f64 {
        self.total_ticks() as f64 * TICK_NS
    }

    fn qubit_ops(&self, q: usize) -> Vec<TimedOp> {
        let mut v: Vec<TimedOp> = self.ops.iter().filter(|o| o.qubit == q).copied().collect();
        v.sort_by_key(|o| o.start);
        v
    }

    /// Checks that no qubit has two operations overlapping in time.
    pub fn validate(&self) -> Result<()> {
        for q in 1..=self.num_qubits {
            let ops = self.qubit_ops(q);
            if let Some(w) = ops.windows(2).find(|w| w[0].end() > w[1].start) {
                return invalid(format!("qubit {q}: operations at {} and {} overlap", w[0].start, w[1].start));
            }
        }
        Ok(())
    }

    /// Toggling-frame sign of qubit `q` as (start, end, sign) pieces. The
    /// sign starts at +1 and flips at the end of every X.
    pub fn sign_intervals(&self, q: usize) -> Vec<(u64, u64, i8)> {
        let mut sign = 1i8;
        let mut out = Vec::new();
        for o in self.qubit_ops(q) {
            out.push((o.start, o.end(), sign));
            if o.op == DdOp::X {
                sign = -sign;
            }
        }
        out
    }

    /// Sum of sign times duration for qubit `q`, in ticks.
    pub fn single_phase_sum(&self, q: usize) -> i64 {
        self.sign_intervals(q).iter().map(|&(a, b, s)| s as i64 * (b - a) as i64).sum()
    }

    /// Sum of the product of both signs times duration over the time both
    /// qubits are scheduled, in ticks.
    pub fn pair_phase_sum(&self, a: usize, b: usize) -> i64 {
        let (ia, ib) = (self.sign_intervals(a), self.sign_intervals(b));
        let (mut i, mut j, mut sum) = (0, 0, 0i64);
        while i < ia.len() && j < ib.len() {
            let lo = ia[i].0.max(ib[j].0);
            let hi = ia[i].1.min(ib[j].1);
            if hi > lo {
                sum += (ia[i].2 * ib[j].2) as i64 * (hi - lo) as i64;
            }
            if ia[i].1 <= ib[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        sum
    }

    /// X gates applied to qubit `q` in cycle `c`.
    pub fn x_count(&self, q: usize, c: u64) -> usize {
        let span = c * CYCLE_TICKS..(c + 1) * CYCLE_TICKS;
        self.ops.iter().filter(|o| o.qubit == q && o.op == DdOp::X && span.contains(&o.start)).count()
    }

    /// CSV with header `start_ns,duration_ns,op,qubit`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["start_ns", "duration_ns", "op", "qubit"])?;
        for o in &self.ops {
            let op = match o.op {
                DdOp::Delay => "DELAY",
                DdOp::X => "X",
            };
            w.write_record([format!("{:.1}", o.start_ns()), format!("{:.1}", o.duration_ns()), op.into(), o.qubit.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_cancel_exactly() {
        for cycles in [1, 2, 5] {
            let s = dd_schedule(cycles).unwrap();
            s.validate().unwrap();
            for q in 1..=N {
                assert_eq!(s.single_phase_sum(q), 0, "qubit {q}");
                assert_eq!(s.x_count(q, 0), 2);
            }
            for q in 1..N {
                assert_eq!(s.pair_phase_sum(q, q + 1), 0, "pair {q}");
            }
        }
    }

    #[test]
    fn cycle_length_matches_constants() {
        assert_eq!(CYCLE_TICKS, 21_476);
        let s = dd_schedule(3).unwrap();
        assert_eq!(s.total_ticks(), 3 * 21_476);
        assert!((s.total_ns() - 3.0 * 2147.6).abs() < 1e-9);
        assert!(dd_schedule(0).is_err());
    }

    #[test]
    fn sign_patterns() {
        let s = dd_schedule(1).unwrap();
        let signs = |q| s.sign_intervals(q).iter().step_by(2).map(|x| x.2).collect::<Vec<_>>();
        assert_eq!(signs(1), vec![1, -1, -1, 1]);
        assert_eq!(signs(2), vec![1, 1, -1, -1]);
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        dd_schedule(1).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("start_ns,duration_ns,op,qubit"));
        assert_eq!(lines.next(), Some("0.0,501.3,DELAY,1"));
        assert_eq!(text.lines().count(), 1 + 8 * N);
        assert!(text.contains("501.3,35.6,X,1\n"));
    }
}
