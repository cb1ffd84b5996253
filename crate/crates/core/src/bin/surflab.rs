use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use surflab::analysis::{analyze_shots, export_circuit, level1_measured, Basis, ShotDataset};
use surflab::concat::{Backend, EdtMode, Level2Program};
use surflab::dd::dd_schedule;
use surflab::faultscan::{level1_single_faults, Level2Scanner};
use surflab::montecarlo::{fit_exponent, read_rate_csv, write_rate_csv, Decoder, Experiment, ExperimentConfig, Manifest};
use surflab::soft::PhysicalPrior;
use surflab::surface9::{encode_check, table_correction, write_table_csv, ZSyndrome};

#[derive(Parser)]
#[command(name = "surflab", version, about = "Nine-qubit surface-code encoding, concatenation and decoding")]
struct Cli {
    /// Print a short human-readable summary instead of CSV/JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the encoder's stabilizer evolution after each step.
    EncodeCheck,
    /// Print the syndrome lookup table (JSON, or CSV with --csv).
    DecodeTable {
        #[arg(long)]
        csv: bool,
    },
    /// Monte-Carlo logical error rates of the level-2 preparation (CSV).
    Simulate {
        /// Comma-separated CNOT error probabilities.
        #[arg(long = "p", value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value = "258")]
        edt: EdtMode,
        #[arg(long, value_enum, default_value_t = DecoderArg::Soft)]
        decoder: DecoderArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value = "frame")]
        backend: Backend,
        #[arg(long = "p-e", default_value_t = PhysicalPrior::DEFAULT_P_E)]
        p_e: f64,
        /// Also write the JSON experiment manifest here.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Also write one JSON trial record per line for the first p value.
        #[arg(long)]
        trials: Option<PathBuf>,
    },
    /// Fault-set scan of the level-2 program (JSON).
    Faults {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "258")]
        edt: EdtMode,
        #[arg(long, value_enum, default_value_t = DecoderArg::Soft)]
        decoder: DecoderArg,
        /// Sample this many random fault sets instead of enumerating all.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scan the single faults of the level-1 encoder instead.
        #[arg(long)]
        level1: bool,
    },
    /// Fit a power law to a rate CSV produced by `simulate` (JSON).
    Fit { csv: PathBuf },
    /// Logical error rate and fidelity bound from Z- and X-basis shot files (JSON).
    Analyze {
        #[arg(long)]
        z: PathBuf,
        #[arg(long)]
        x: PathBuf,
    },
    /// Write a circuit or schedule file.
    Export {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long)]
        out: PathBuf,
        /// Readout basis of the level-1 circuit.
        #[arg(long, default_value = "z")]
        basis: Basis,
        /// EDT mode of the level-2 circuit.
        #[arg(long, default_value = "258")]
        edt: EdtMode,
        /// Decoupling cycles of the schedule.
        #[arg(long, default_value_t = 1)]
        cycles: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Hard,
    Soft,
}

impl From<DecoderArg> for Decoder {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Hard => Decoder::Hard,
            DecoderArg::Soft => Decoder::Soft,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    L1,
    L2,
    Dd,
}

fn json<T: serde::Serialize>(v: &T) -> surflab::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> surflab::Result<bool> {
    let human = cli.human;
    match cli.command {
        Command::EncodeCheck => {
            let c = encode_check()?;
            if human {
                println!("step 1: {} CNOTs, group matches: {}", c.step1_cnots, c.step1_matches);
                for g in &c.step1 {
                    println!("  {g}");
                }
                println!("step 2: {} CNOTs, group matches: {}", c.step2_cnots, c.step2_matches);
                for g in &c.step2 {
                    println!("  {g}");
                }
                println!("{}", if c.passed() { "PASS" } else { "FAIL" });
            } else {
                json(&c)?;
            }
            Ok(c.passed())
        }
        Command::DecodeTable { csv } => {
            if csv {
                write_table_csv(io::stdout().lock())?;
            } else {
                let rows: Vec<_> = ZSyndrome::all()
                    .map(|s| {
                        let c = table_correction(s);
                        serde_json::json!({ "syndrome": s.values(), "correction": c.to_sparse_string(), "weight": c.weight() })
                    })
                    .collect();
                if human {
                    for r in &rows {
                        println!("{} -> {}", r["syndrome"], r["correction"].as_str().unwrap_or_default());
                    }
                } else {
                    json(&rows)?;
                }
            }
            Ok(true)
        }
        Command::Simulate { p, shots, edt, decoder, seed, threads, backend, p_e, manifest, trials } => {
            let config = ExperimentConfig {
                p_cnot: p,
                shots,
                edt_mode: edt,
                decoder: decoder.into(),
                p_e,
                seed,
                threads,
                backend,
            };
            let exp = Experiment::new(config.clone())?;
            if let Some(path) = manifest {
                std::fs::write(path, Manifest::new(&config).to_json()?)?;
            }
            if let Some(path) = trials {
                let mut w = BufWriter::new(File::create(path)?);
                for shot in 0..shots {
                    writeln!(w, "{}", serde_json::to_string(&exp.run_trial(config.p_cnot[0], shot)?)?)?;
                }
                w.flush()?;
            }
            let points = exp.sweep()?;
            if human {
                for r in &points {
                    println!(
                        "p_cnot {:.3e}: p_L {:.3e} [{:.2e}, {:.2e}] from {} failures in {} shots, {:.3} attempts, {:.2} level-1 preps",
                        r.p_cnot, r.p_l, r.ci_lo, r.ci_hi, r.failures, r.trials, r.mean_attempts, r.mean_l1preps
                    );
                }
            } else {
                write_rate_csv(&points, io::stdout().lock())?;
            }
            Ok(true)
        }
        Command::Faults { k, edt, decoder, samples, seed, level1 } => {
            if level1 {
                let r = level1_single_faults()?;
                if human {
                    println!(
                        "{} single faults x {} outcomes each: {} failing",
                        r.faults_checked,
                        r.outcomes_per_fault,
                        r.failures.len()
                    );
                } else {
                    json(&serde_json::json!({
                        "faults_checked": r.faults_checked,
                        "outcomes_per_fault": r.outcomes_per_fault,
                        "failures": r.failures.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    }))?;
                }
                return Ok(r.failures.is_empty());
            }
            let scanner = Level2Scanner::new(edt, decoder.into(), PhysicalPrior::DEFAULT_P_E)?;
            let scan = match samples {
                Some(n) => scanner.sampled(k, n, seed)?,
                None => scanner.exhaustive(k)?,
            };
            if human {
                println!(
                    "edt {edt}, k={k}: {} sets, {} detected, {} accepted, {} logical errors",
                    scan.combinations, scan.detected, scan.accepted, scan.logical_errors
                );
            } else {
                json(&serde_json::json!({
                    "edt": edt,
                    "scan": scan,
                    "first_failure": scan.first_failure.as_ref().map(|f| f.iter().map(|e| e.to_string()).collect::<Vec<_>>()),
                }))?;
            }
            Ok(true)
        }
        Command::Fit { csv } => {
            let fit = fit_exponent(&read_rate_csv(File::open(csv)?)?)?;
            if human {
                println!(
                    "p_L = {:.3e} * p^{:.3} over {} points (rms log residual {:.3})",
                    fit.prefactor, fit.exponent, fit.points_used, fit.residual
                );
            } else {
                json(&fit)?;
            }
            Ok(true)
        }
        Command::Analyze { z, x } => {
            let a = analyze_shots(&ShotDataset::read_file(z)?, &ShotDataset::read_file(x)?)?;
            if human {
                println!(
                    "p_L {:.4}, p_Z {:.4}, p_X {:.4}, fidelity >= {:.4}",
                    a.p_l, a.p_z, a.p_x, a.fidelity_bound
                );
            } else {
                json(&a)?;
            }
            Ok(true)
        }
        Command::Export { what, out, basis, edt, cycles } => {
            match what {
                What::L1 => export_circuit(&level1_measured(basis), &out)?,
                What::L2 => export_circuit(Level2Program::new(edt).circuit(), &out)?,
                What::Dd => dd_schedule(cycles)?.write_csv(BufWriter::new(File::create(&out)?))?,
            }
            if human {
                println!("wrote {}", out.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
