//! Experiment harness: shots, logical error rates with Wilson intervals,
//! power-law fits and restart overhead.
//!
//! Every shot owns two ChaCha8 streams derived from the master seed: stream
//! `2 * shot` drives fault sampling and stream `2 * shot + 1` drives
//! measurement randomness. Results therefore depend only on (config, shot
//! index), never on thread count or scheduling.

use std::io::{Read, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::concat::{Backend, EdtMode, Level2Engine, Level2Program};
use crate::error::{invalid, Error, Result};
use crate::noise::NoiseModel;
use crate::soft::{Level1Table, PhysicalPrior};
use crate::surface9::{decode_mask, syndrome_index, ZSyndrome, N};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    Hard,
    Soft,
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hard" => Ok(Decoder::Hard),
            "soft" => Ok(Decoder::Soft),
            _ => invalid(format!("unknown decoder {s:?} (expected hard or soft)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p_cnot: Vec<f64>,
    pub shots: u64,
    pub edt_mode: EdtMode,
    pub decoder: Decoder,
    pub p_e: f64,
    pub seed: u64,
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
    pub backend: Backend,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p_cnot: vec![1e-2],
            shots: 10_000,
            edt_mode: EdtMode::Edt258,
            decoder: Decoder::Soft,
            p_e: PhysicalPrior::DEFAULT_P_E,
            seed: 0,
            threads: 0,
            backend: Backend::Frame,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return invalid("shots must be at least 1");
        }
        for &p in &self.p_cnot {
            NoiseModel::new(p)?;
        }
        PhysicalPrior::new(self.p_e)?;
        Ok(())
    }
}

/// Outcome of one shot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub shot: u64,
    pub p_cnot: f64,
    /// Decoded level-2 logical Z.
    pub verdict: i8,
    pub failed: bool,
    pub attempts: u64,
    pub level1_preps: u64,
    /// Faults injected in the accepted attempt.
    pub faults: usize,
    /// Final Z outcomes of the 81 live wires, block by block, `1` meaning -1.
    pub measurements: String,
    /// Z syndromes (s1..s4) of the nine final blocks.
    pub syndromes: Vec<[i8; 4]>,
    /// Hard-decoded logical value of each final block.
    pub block_values: Vec<i8>,
    /// Level-2 posterior probability of +1 (soft decoder only).
    pub p_plus: Option<f64>,
}

/// Level-2 decode of an accepted record.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub verdict: i8,
    pub block_values: [i8; N],
    pub p_plus: Option<f64>,
}

fn sign(flipped: bool) -> i8 {
    if flipped {
        -1
    } else {
        1
    }
}

/// Decodes the final measurement of an accepted record.
///
/// Hard: the lookup table on each block, then on the nine block values.
/// Soft: level-1 posteriors from `table`, then the level-2 posterior.
pub fn decode_record(program: &Level2Program, record: &BitVec, decoder: Decoder, table: &Level1Table) -> Result<Decoded> {
    decode_masks(&std::array::from_fn(|b| program.final_block_mask(record, b)), decoder, table)
}

/// Decodes nine final block outcome masks.
pub fn decode_masks(masks: &[u16; N], decoder: Decoder, table: &Level1Table) -> Result<Decoded> {
    let block_bits = masks.map(decode_mask);
    let block_values = block_bits.map(sign);
    match decoder {
        Decoder::Hard => {
            let l2 = block_bits.iter().enumerate().fold(0u16, |m, (b, &f)| m | (f as u16) << b);
            Ok(Decoded { verdict: sign(decode_mask(l2)), block_values, p_plus: None })
        }
        Decoder::Soft => {
            let d = table.decode_level2(masks)?;
            Ok(Decoded { verdict: d.verdict, block_values, p_plus: Some(d.posterior.p_plus) })
        }
    }
}

/// The two per-shot random streams.
pub fn shot_rngs(seed: u64, shot: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut faults = ChaCha8Rng::seed_from_u64(seed);
    faults.set_stream(2 * shot);
    let mut meas = ChaCha8Rng::seed_from_u64(seed);
    meas.set_stream(2 * shot + 1);
    (faults, meas)
}

/// A configured engine plus decoder tables, reusable across shots and points.
#[derive(Clone, Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    engine: Level2Engine,
    table: Level1Table,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let engine = Level2Engine::new(config.edt_mode, config.backend)?;
        let table = Level1Table::new(config.p_e)?;
        Ok(Self { config, engine, table })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn engine(&self) -> &Level2Engine {
        &self.engine
    }

    /// One shot at `p_cnot`.
    pub fn run_trial(&self, p_cnot: f64, shot: u64) -> Result<TrialRecord> {
        let model = NoiseModel::new(p_cnot)?;
        let (mut fr, mut mr) = shot_rngs(self.config.seed, shot);
        let out = self.engine.prepare(&model, &mut fr, &mut mr)?;
        let program = self.engine.program();
        let d = decode_record(program, &out.record, self.config.decoder, &self.table)?;
        let masks: Vec<u16> = (0..N).map(|b| program.final_block_mask(&out.record, b)).collect();
        let measurements = masks
            .iter()
            .flat_map(|&m| (0..N).map(move |p| if m >> p & 1 == 1 { '1' } else { '0' }))
            .collect();
        Ok(TrialRecord {
            shot,
            p_cnot,
            verdict: d.verdict,
            failed: d.verdict < 0,
            attempts: out.attempts,
            level1_preps: out.level1_preps,
            faults: out.faults.len(),
            measurements,
            syndromes: masks.iter().map(|&m| ZSyndrome::from_index(syndrome_index(m)).values()).collect(),
            block_values: d.block_values.to_vec(),
            p_plus: d.p_plus,
        })
    }

    /// Failure counts for shots `range` at `p_cnot`, without building records.
    fn tally(&self, p_cnot: f64, range: std::ops::Range<u64>) -> Result<Tally> {
        let model = NoiseModel::new(p_cnot)?;
        let program = self.engine.program();
        let run = |shot: u64| -> Result<Tally> {
            let (mut fr, mut mr) = shot_rngs(self.config.seed, shot);
            let out = self.engine.prepare(&model, &mut fr, &mut mr)?;
            let d = decode_record(program, &out.record, self.config.decoder, &self.table)?;
            Ok(Tally { trials: 1, failures: (d.verdict < 0) as u64, attempts: out.attempts, level1_preps: out.level1_preps })
        };
        let work = || {
            range
                .into_par_iter()
                .map(run)
                .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
        };
        if self.config.threads == 0 {
            work()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.config.threads)
                .build()
                .map_err(|e| Error::Internal(e.to_string()))?
                .install(work)
        }
    }

    /// Logical error rate over `config.shots` accepted shots at `p_cnot`.
    pub fn estimate_rate(&self, p_cnot: f64) -> Result<RatePoint> {
        self.estimate_rate_shots(p_cnot, self.config.shots)
    }

    pub fn estimate_rate_shots(&self, p_cnot: f64, shots: u64) -> Result<RatePoint> {
        if shots == 0 {
            return invalid("shots must be at least 1");
        }
        Ok(self.tally(p_cnot, 0..shots)?.point(p_cnot))
    }

    /// Rate points for every configured `p_cnot`.
    pub fn sweep(&self) -> Result<Vec<RatePoint>> {
        self.config.p_cnot.iter().map(|&p| self.estimate_rate(p)).collect()
    }
}

/// Commutative accumulator over shots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub failures: u64,
    pub attempts: u64,
    pub level1_preps: u64,
}

impl Tally {
    pub fn merge(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            failures: self.failures + o.failures,
            attempts: self.attempts + o.attempts,
            level1_preps: self.level1_preps + o.level1_preps,
        }
    }

    pub fn point(&self, p_cnot: f64) -> RatePoint {
        let (ci_lo, ci_hi) = wilson_interval(self.failures, self.trials);
        let n = self.trials.max(1) as f64;
        RatePoint {
            p_cnot,
            trials: self.trials,
            failures: self.failures,
            p_l: self.failures as f64 / n,
            ci_lo,
            ci_hi,
            mean_attempts: self.attempts as f64 / n,
            mean_l1preps: self.level1_preps as f64 / n,
        }
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub p_cnot: f64,
    pub trials: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_attempts: f64,
    pub mean_l1preps: f64,
}

impl RatePoint {
    /// Binomial standard error of `p_l`.
    pub fn sigma(&self) -> f64 {
        (self.p_l * (1.0 - self.p_l) / self.trials.max(1) as f64).sqrt()
    }
}

/// Writes points with header `p_cnot,trials,failures,p_l,ci_lo,ci_hi,mean_attempts,mean_l1preps`.
pub fn write_rate_csv<W: Write>(points: &[RatePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    if points.is_empty() {
        w.write_record(["p_cnot", "trials", "failures", "p_l", "ci_lo", "ci_hi", "mean_attempts", "mean_l1preps"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rate_csv<R: Read>(input: R) -> Result<Vec<RatePoint>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<RatePoint>, _>>()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
    pub points_used: usize,
    /// `p_cnot` values skipped because they had no failures.
    pub excluded: Vec<f64>,
}

/// Least-squares line through (ln p_cnot, ln p_L). Zero-failure points are
/// excluded and listed.
pub fn fit_exponent(points: &[RatePoint]) -> Result<FitResult> {
    let (used, skipped): (Vec<&RatePoint>, Vec<&RatePoint>) =
        points.iter().partition(|p| p.p_l > 0.0 && p.p_cnot > 0.0);
    if used.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 points with failures, got {}",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| p.p_cnot.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.p_l.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all usable points share one p_cnot".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(FitResult {
        exponent: slope,
        prefactor: intercept.exp(),
        residual,
        points_used: used.len(),
        excluded: skipped.iter().map(|p| p.p_cnot).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadPoint {
    pub p_cnot: f64,
    pub mean_attempts: f64,
    pub mean_l1preps: f64,
}

/// Mean restart cost per configured `p_cnot`.
pub fn overhead_curve(config: &ExperimentConfig) -> Result<Vec<OverheadPoint>> {
    let exp = Experiment::new(config.clone())?;
    Ok(exp
        .sweep()?
        .into_iter()
        .map(|r| OverheadPoint { p_cnot: r.p_cnot, mean_attempts: r.mean_attempts, mean_l1preps: r.mean_l1preps })
        .collect())
}

/// Reproducibility record written next to experiment outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
