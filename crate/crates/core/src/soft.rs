//! Soft-decision decoding of logical Z by conditional-probability propagation.
//!
//! For each candidate logical value `z`, `R(z)` sums the product of per-qubit
//! probabilities over every assignment z_1..z_9 that satisfies the four Z
//! parities and has z_1 z_2 z_3 = z. Only 16 assignments per value survive the
//! constraints, so the kernel sums those directly, in the log domain.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::surface9::{syndrome_index, LOGICAL_Z_MASK, N};

/// Probabilities that a logical (or physical) Z value is +1 or -1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub p_plus: f64,
    pub p_minus: f64,
}

impl Posterior {
    pub const CERTAIN_PLUS: Posterior = Posterior { p_plus: 1.0, p_minus: 0.0 };
    pub const CERTAIN_MINUS: Posterior = Posterior { p_plus: 0.0, p_minus: 1.0 };

    pub fn new(p_plus: f64, p_minus: f64) -> Result<Self> {
        let ok = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        if !ok(p_plus) || !ok(p_minus) || (p_plus + p_minus - 1.0).abs() > 1e-9 {
            return invalid(format!("({p_plus}, {p_minus}) is not a normalized distribution"));
        }
        Ok(Self { p_plus, p_minus })
    }

    /// Builds the posterior from unnormalized log weights of +1 and -1.
    pub fn from_log_weights(log_plus: f64, log_minus: f64) -> Result<Self> {
        if log_plus == f64::NEG_INFINITY && log_minus == f64::NEG_INFINITY {
            return Err(Error::Internal("both logical values have zero weight".into()));
        }
        if log_plus.is_nan() || log_minus.is_nan() {
            return Err(Error::Internal("log weight is NaN".into()));
        }
        // Logistic form keeps the small side accurate.
        let d = log_minus - log_plus;
        Ok(Self { p_plus: 1.0 / (1.0 + d.exp()), p_minus: 1.0 / (1.0 + (-d).exp()) })
    }

    /// +1 iff `p_plus > p_minus`; ties give -1.
    pub fn verdict(&self) -> i8 {
        if self.p_plus > self.p_minus {
            1
        } else {
            -1
        }
    }

    fn logs(&self) -> (f64, f64) {
        (self.p_plus.ln(), self.p_minus.ln())
    }
}

/// Per-qubit prior from a measured value: the reading is right with
/// probability `1 - p_e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPrior {
    pub p_e: f64,
}

impl PhysicalPrior {
    pub const DEFAULT_P_E: f64 = 0.01;

    pub fn new(p_e: f64) -> Result<Self> {
        if !(p_e > 0.0 && p_e < 0.5) {
            return invalid(format!("p_e = {p_e} must lie in (0, 0.5)"));
        }
        Ok(Self { p_e })
    }

    pub fn for_outcome(&self, m: i8) -> Posterior {
        if m < 0 {
            Posterior { p_plus: self.p_e, p_minus: 1.0 - self.p_e }
        } else {
            Posterior { p_plus: 1.0 - self.p_e, p_minus: self.p_e }
        }
    }
}

impl Default for PhysicalPrior {
    fn default() -> Self {
        Self { p_e: Self::DEFAULT_P_E }
    }
}

/// Assignments (bit j set when z_{j+1} = -1) satisfying all four Z parities,
/// split by logical value: index 0 for +1, index 1 for -1.
fn valid_assignments() -> &'static [[u16; 16]; 2] {
    static VALID: std::sync::OnceLock<[[u16; 16]; 2]> = std::sync::OnceLock::new();
    VALID.get_or_init(|| {
        let mut out = [[0u16; 16]; 2];
        let mut fill = [0usize; 2];
        for mask in 0u16..1 << N {
            if syndrome_index(mask) == 0 {
                let z = ((mask & LOGICAL_Z_MASK).count_ones() & 1) as usize;
                out[z][fill[z]] = mask;
                fill[z] += 1;
            }
        }
        debug_assert_eq!(fill, [16, 16]);
        out
    })
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn block_log_weights(logs: &[(f64, f64); N]) -> (f64, f64) {
    let weight = |mask: u16| -> f64 {
        (0..N).map(|j| if mask >> j & 1 == 1 { logs[j].1 } else { logs[j].0 }).sum()
    };
    let valid = valid_assignments();
    (
        log_sum_exp(valid[0].iter().map(|&m| weight(m))),
        log_sum_exp(valid[1].iter().map(|&m| weight(m))),
    )
}

/// Posterior of the block's logical Z given independent per-position inputs.
pub fn block_posterior(inputs: &[Posterior; N]) -> Result<Posterior> {
    for p in inputs {
        Posterior::new(p.p_plus, p.p_minus)?;
    }
    let logs = inputs.map(|p| p.logs());
    let (lp, lm) = block_log_weights(&logs);
    Posterior::from_log_weights(lp, lm)
}

/// Level-1 posterior of nine physical Z outcomes (entries ±1).
pub fn level1_posteriors(m: &[i8; N], p_e: f64) -> Result<Posterior> {
    let prior = PhysicalPrior::new(p_e)?;
    block_posterior(&m.map(|v| prior.for_outcome(v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level2Decision {
    pub posterior: Posterior,
    pub verdict: i8,
}

/// Level-2 posterior from the nine block posteriors, plus the hard verdict.
pub fn level2_decode(blocks: &[Posterior; N]) -> Result<Level2Decision> {
    let posterior = block_posterior(blocks)?;
    Ok(Level2Decision { posterior, verdict: posterior.verdict() })
}

/// Level-1 posteriors of all 512 outcome patterns for a fixed `p_e`, indexed
/// by outcome mask (bit j set when m_{j+1} = -1).
#[derive(Clone, Debug)]
pub struct Level1Table {
    p_e: f64,
    table: Vec<Posterior>,
    logs: Vec<(f64, f64)>,
}

impl Level1Table {
    pub fn new(p_e: f64) -> Result<Self> {
        let prior = PhysicalPrior::new(p_e)?;
        let table = (0u16..1 << N)
            .map(|mask| {
                let m: [i8; N] = std::array::from_fn(|j| if mask >> j & 1 == 1 { -1 } else { 1 });
                block_posterior(&m.map(|v| prior.for_outcome(v)))
            })
            .collect::<Result<Vec<_>>>()?;
        let logs = table.iter().map(|p| p.logs()).collect();
        Ok(Self { p_e, table, logs })
    }

    pub fn p_e(&self) -> f64 {
        self.p_e
    }

    pub fn get(&self, mask: u16) -> Posterior {
        self.table[(mask & 0x1ff) as usize]
    }

    /// Two-level soft decode of nine block outcome masks. Bit-identical to
    /// `level2_decode` over `get(mask)` for each block.
    pub fn decode_level2(&self, masks: &[u16; N]) -> Result<Level2Decision> {
        let logs = masks.map(|m| self.logs[(m & 0x1ff) as usize]);
        let (lp, lm) = block_log_weights(&logs);
        let posterior = Posterior::from_log_weights(lp, lm)?;
        Ok(Level2Decision { posterior, verdict: posterior.verdict() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface9::{codeword_outcomes, hard_decode};
    use proptest::prelude::*;

    /// Literal 512-term sum in the linear domain.
    fn reference(inputs: &[Posterior; N]) -> Posterior {
        let mut r = [0.0f64; 2];
        for mask in 0u16..1 << N {
            if syndrome_index(mask) != 0 {
                continue;
            }
            let z = ((mask & LOGICAL_Z_MASK).count_ones() & 1) as usize;
            r[z] += (0..N)
                .map(|j| if mask >> j & 1 == 1 { inputs[j].p_minus } else { inputs[j].p_plus })
                .product::<f64>();
        }
        Posterior { p_plus: r[0] / (r[0] + r[1]), p_minus: r[1] / (r[0] + r[1]) }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) || (a - b).abs() < 1e-300
    }

    #[test]
    fn certain_inputs() {
        let p = block_posterior(&[Posterior::CERTAIN_PLUS; N]).unwrap();
        assert_eq!((p.p_plus, p.p_minus), (1.0, 0.0));
    }

    #[test]
    fn uniform_inputs_tie() {
        let half = Posterior::new(0.5, 0.5).unwrap();
        let d = level2_decode(&[half; N]).unwrap();
        assert!((d.posterior.p_plus - 0.5).abs() < 1e-15);
        assert_eq!(d.verdict, -1);
        assert_eq!(level2_decode(&[Posterior::CERTAIN_PLUS; N]).unwrap().verdict, 1);
    }

    #[test]
    fn impossible_inputs_are_internal_errors() {
        let mut inputs = [Posterior::CERTAIN_PLUS; N];
        inputs[6] = Posterior::CERTAIN_MINUS;
        assert!(matches!(block_posterior(&inputs), Err(Error::Internal(_))));
        assert!(block_posterior(&[Posterior { p_plus: 0.7, p_minus: 0.7 }; N]).is_err());
    }

    #[test]
    fn single_flip_on_seven() {
        let mut m = [1i8; N];
        m[6] = -1;
        // Two logical-flipped codewords sit at distance 2 (for example via
        // X_1 X_6 X_7), so p_minus is close to 2 p_e.
        let p = level1_posteriors(&m, 0.01).unwrap();
        assert!((p.p_plus - 0.980_197_031_422_874_3).abs() < 1e-12, "{p:?}");
        let mut m = [1i8; N];
        m[1] = -1;
        m[2] = -1;
        assert_eq!(level1_posteriors(&m, 0.01).unwrap().verdict(), 1);
    }

    #[test]
    fn codewords_and_single_errors() {
        for cw in codeword_outcomes() {
            assert!(level1_posteriors(&cw, 0.01).unwrap().p_plus > 0.99);
            for j in 0..N {
                let mut m = cw;
                m[j] = -m[j];
                let hard = hard_decode(&m).logical_value;
                for p_e in [0.001, 0.01, 0.1] {
                    assert_eq!(level1_posteriors(&m, p_e).unwrap().verdict(), hard);
                }
            }
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let t = Level1Table::new(0.01).unwrap();
        for mask in [0u16, 1, 0x40, 0x1ff, 0x123] {
            let m: [i8; N] = std::array::from_fn(|j| if mask >> j & 1 == 1 { -1 } else { 1 });
            assert_eq!(t.get(mask), level1_posteriors(&m, 0.01).unwrap());
        }
        assert!(Level1Table::new(0.5).is_err());
        let masks = [0u16, 0x40, 0x6, 0x1ff, 0, 3, 0x100, 0x88, 0x11];
        let direct = level2_decode(&masks.map(|m| t.get(m))).unwrap();
        assert_eq!(t.decode_level2(&masks).unwrap(), direct);
    }

    fn arb_inputs() -> impl Strategy<Value = [Posterior; N]> {
        proptest::array::uniform9(0.0f64..=1.0).prop_map(|ps| ps.map(|p| Posterior { p_plus: p, p_minus: 1.0 - p }))
    }

    proptest! {
        #[test]
        fn matches_literal_sum(inputs in arb_inputs()) {
            let fast = block_posterior(&inputs);
            let slow = reference(&inputs);
            if let Ok(fast) = fast {
                prop_assert!(close(fast.p_plus, slow.p_plus), "{} vs {}", fast.p_plus, slow.p_plus);
                prop_assert!(close(fast.p_minus, slow.p_minus), "{} vs {}", fast.p_minus, slow.p_minus);
            } else {
                prop_assert!(slow.p_plus.is_nan());
            }
        }

        #[test]
        fn rotation_covariance(inputs in arb_inputs()) {
            // The 180 degree rotation 1<->9, 2<->8, 3<->7, 4<->6 maps the
            // check space to itself and Z_L to a stabilizer-equivalent Z_7 Z_8 Z_9.
            let rotated: [Posterior; N] = std::array::from_fn(|j| inputs[N - 1 - j]);
            let a = block_posterior(&inputs).unwrap();
            let b = block_posterior(&rotated).unwrap();
            prop_assert!((a.p_plus - b.p_plus).abs() < 1e-12);
        }
    }
}
