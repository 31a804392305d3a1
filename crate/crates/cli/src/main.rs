//! Umbrella CLI: spectra, memory and OTOC curves, entanglement reports,
//! dataset generation, network training, prediction, and evaluation.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.
//! `CHIRALCHAIN_THREADS` caps the rayon worker count.

use chiralchain::chain::{
    build_sector_hamiltonian, group_velocity, magnon_spectrum, Branch, ChainParams,
};
use chiralchain::dynamics::TimeGrid;
use chiralchain::entangle::{ckw_report, total_chirality, FourQubitState};
use chiralchain::error::Error;
use chiralchain::memory::{memory_curve_single_excitation, memory_curve_two_excitation_l4};
use chiralchain::nn::{load_model, save_model, TrainConfig};
use chiralchain::otoc::{otoc_single_excitation, otoc_two_excitation, TwoExcitationMethod};
use chiralchain::pipeline::{
    curve_grid, dm_stratified_probe, evaluate, generate_dataset, read_dataset_csv,
    run_training_pipeline, split, write_dataset_csv, Curve, SweepSpec, TargetKind,
};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chiralchain", version, about = "Chiral spin-chain quantum memory and OTOC lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ChainArgs {
    /// Chain length.
    #[arg(long = "L", default_value_t = 10)]
    length: usize,
    /// Nearest-neighbor exchange.
    #[arg(long = "J1", default_value_t = -1.0, allow_hyphen_values = true)]
    j1: f64,
    /// Next-nearest-neighbor exchange.
    #[arg(long = "J2", default_value_t = 1.0, allow_hyphen_values = true)]
    j2: f64,
    /// Dzyaloshinskii-Moriya constant.
    #[arg(long = "D", default_value_t = 0.5, allow_hyphen_values = true)]
    dm: f64,
    /// Chirality branch: plus | minus.
    #[arg(long, default_value = "plus")]
    branch: String,
}

impl ChainArgs {
    fn params(&self) -> Result<ChainParams, Error> {
        let branch: Branch = self.branch.parse()?;
        ChainParams::new(self.length, self.j1, self.j2, self.dm, branch)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Magnon spectrum: (n, k, omega, v_g) rows.
    Spectrum {
        #[command(flatten)]
        chain: ChainArgs,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// EUR memory curve: (t, lhs, rhs, gap) rows.
    Memory {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        /// Excitation sector: 1 (arbitrary L) or 2 (L = 4 closed form).
        #[arg(long, default_value_t = 2)]
        excitations: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// OTOC curve: (t, C) rows.
    Otoc {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value_t = 1)]
        excitations: usize,
        /// Initial eigenstate index (single-excitation sector).
        #[arg(long, default_value_t = 1)]
        n1: usize,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        /// ed | bethe | spectral.
        #[arg(long, default_value = "spectral")]
        method: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Tangles, monogamy slack, and chirality for a named four-qubit state.
    Entangle {
        /// phi | psi2.
        #[arg(long)]
        state: String,
        #[arg(long = "J1", default_value_t = -1.0, allow_hyphen_values = true)]
        j1: f64,
        #[arg(long = "J2", default_value_t = 1.0, allow_hyphen_values = true)]
        j2: f64,
        #[arg(long = "D", default_value_t = 0.5, allow_hyphen_values = true)]
        dm: f64,
        #[arg(long, default_value = "plus")]
        branch: String,
    },
    /// Dataset generation and splitting.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Train the curve predictor on a dataset CSV.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// otoc | memory-lhs | memory-rhs (records of other targets are ignored).
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 1e-3)]
        learning_rate: f64,
        /// Train/test split ratio.
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        /// Model output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict a curve from chain parameters with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "J1", allow_hyphen_values = true)]
        j1: f64,
        #[arg(long = "J2", allow_hyphen_values = true)]
        j2: f64,
        #[arg(long = "D", allow_hyphen_values = true)]
        dm: f64,
        #[arg(long = "L", default_value_t = 10)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        n1: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate a trained model against a dataset CSV.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Render a curve CSV as an SVG line chart.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, default_value = "curve")]
        title: String,
    },
    /// DM-stratified memory-model sensitivity probe.
    Probe {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 4)]
        bins: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 150)]
        epochs: usize,
    },
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Sweep the parameter box and write the labelled curves.
    Generate {
        /// otoc | memory-lhs | memory-rhs.
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "plus")]
        branch: String,
        #[arg(long)]
        out: PathBuf,
        /// Samples per axis (default 11 for the 1331-record sweep).
        #[arg(long, default_value_t = 11)]
        per_axis: usize,
    },
    /// Split a dataset CSV into train/test files.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
}

fn write_or_stdout(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Spectrum { chain, csv } => {
            let params = chain.params()?;
            let mut text = String::from("n,k,omega,v_g\n");
            for mode in magnon_spectrum(&params) {
                let vg = group_velocity(&params, mode.momentum);
                text += &format!("{},{},{},{}\n", mode.index, mode.momentum, mode.omega, vg);
            }
            write_or_stdout(&csv, &text)
        }
        Command::Memory { chain, tmax, dt, excitations, csv } => {
            let params = chain.params()?;
            let count = (tmax / dt).round() as usize + 1;
            let grid = TimeGrid::new(0.0, dt, count.max(1))?;
            let curve = match excitations {
                1 => memory_curve_single_excitation(&params, &grid)?,
                2 => memory_curve_two_excitation_l4(&params, &grid)?,
                other => return Err(Error::UnsupportedSector(other)),
            };
            let mut text = String::from("t,lhs,rhs,gap\n");
            for (i, t) in grid.times().iter().enumerate() {
                let (l, r) = (curve.lhs[i], curve.rhs[i]);
                text += &format!("{t},{l},{r},{}\n", l - r);
            }
            write_or_stdout(&csv, &text)
        }
        Command::Otoc { chain, excitations, n1, tmax, dt, method, csv } => {
            let params = chain.params()?;
            let count = (tmax / dt).round() as usize + 1;
            let grid = TimeGrid::new(0.0, dt, count.max(1))?;
            let curve = match (excitations, method.as_str()) {
                (1, "spectral") | (1, "ed") => otoc_single_excitation(&params, n1, &grid)?,
                (2, "ed") | (2, "spectral") => {
                    otoc_two_excitation(&params, &grid, TwoExcitationMethod::Ed)?
                }
                (2, "bethe") => otoc_two_excitation(&params, &grid, TwoExcitationMethod::Bethe)?,
                (1, "bethe") => {
                    return Err(Error::InvalidParams(
                        "bethe method applies to the two-excitation sector".into(),
                    ))
                }
                (e, m) => {
                    return Err(Error::InvalidParams(format!(
                        "unsupported excitations/method combination ({e}, {m})"
                    )))
                }
            };
            let mut text = String::from("t,C\n");
            for (t, c) in grid.times().iter().zip(&curve.values) {
                text += &format!("{t},{c}\n");
            }
            write_or_stdout(&csv, &text)
        }
        Command::Entangle { state, j1, j2, dm, branch } => {
            let branch: Branch = branch.parse()?;
            let four = match state.as_str() {
                "phi" => FourQubitState::phi_state(),
                "psi2" => {
                    let params = ChainParams::new(4, j1, j2, dm, branch)?;
                    FourQubitState::psi2_state(&params)?
                }
                other => {
                    return Err(Error::InvalidParams(format!(
                        "unknown state `{other}` (expected phi or psi2)"
                    )))
                }
            };
            println!("site,one_tangle,sum_two_tangles,slack");
            for site in 1..=4 {
                let rep = ckw_report(&four, site)?;
                let sum: f64 = rep.two_tangles.iter().map(|(_, t)| t).sum();
                println!("{site},{},{sum},{}", rep.one_tangle, rep.slack);
            }
            println!("total_chirality,{}", total_chirality(&four));
            Ok(())
        }
        Command::Dataset(DatasetCommand::Generate { target, branch, out, per_axis }) => {
            let target: TargetKind = target.parse()?;
            let branch: Branch = branch.parse()?;
            let mut spec = SweepSpec::paper_default(target, branch);
            if per_axis != 11 {
                spec.j1.count = per_axis;
                spec.j2.count = per_axis;
                spec.dm.count = per_axis;
            }
            let records = generate_dataset(&spec)?;
            let mut buf = Vec::new();
            write_dataset_csv(&records, &mut buf)?;
            fs::write(&out, buf)?;
            eprintln!("wrote {} records to {}", records.len(), out.display());
            Ok(())
        }
        Command::Dataset(DatasetCommand::Split { input, ratio, seed, train_out, test_out }) => {
            let records = read_dataset_csv(&fs::read_to_string(&input)?)?;
            let (tr, te) = split(&records, ratio, seed)?;
            let mut buf = Vec::new();
            write_dataset_csv(&tr, &mut buf)?;
            fs::write(&train_out, buf)?;
            let mut buf = Vec::new();
            write_dataset_csv(&te, &mut buf)?;
            fs::write(&test_out, buf)?;
            eprintln!("split {} records into {} train / {} test", records.len(), tr.len(), te.len());
            Ok(())
        }
        Command::Train { dataset, target, seed, epochs, batch_size, learning_rate, ratio, out } => {
            let target: TargetKind = target.parse()?;
            let records: Vec<_> = read_dataset_csv(&fs::read_to_string(&dataset)?)?
                .into_iter()
                .filter(|r| r.target == target)
                .collect();
            if records.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let config = TrainConfig {
                seed,
                epochs,
                batch_size,
                learning_rate,
                ..TrainConfig::default()
            };
            let run = run_training_pipeline(&records, ratio, &config)?;
            save_model(&run.model, &out)?;
            eprintln!(
                "trained on {} records: initial test MSE {:.6e}, final {:.6e}, peak sync {:.3}",
                records.len(),
                run.initial_test_mse,
                run.report.test_mse,
                run.report.peak_sync_fraction
            );
            Ok(())
        }
        Command::Predict { model, j1, j2, dm, length, n1, csv } => {
            let model = load_model(&model)?;
            model.expect_dims(5, 25)?;
            let features = vec![length as f64, j1, j2, dm, n1 as f64];
            let values = model.infer(&features)?;
            let mut curve = Curve::new(curve_grid().times());
            curve.push("predicted", values)?;
            let mut buf = Vec::new();
            chiralchain::pipeline::emit_curve_csv(&curve, &mut buf)?;
            write_or_stdout(&csv, &String::from_utf8(buf).expect("utf8"))
        }
        Command::Eval { model, dataset } => {
            let model = load_model(&model)?;
            let records = read_dataset_csv(&fs::read_to_string(&dataset)?)?;
            let report = evaluate(&model, &records)?;
            println!("test_mse,{}", report.test_mse);
            println!("peak_sync_fraction,{}", report.peak_sync_fraction);
            println!("offset,count");
            for (offset, count) in report.offset_histogram() {
                println!("{offset},{count}");
            }
            Ok(())
        }
        Command::Plot { input, output, title } => {
            let curve = chiralchain::pipeline::parse_curve_csv(&fs::read_to_string(&input)?)?;
            let mut buf = Vec::new();
            chiralchain::pipeline::emit_curve_svg(&curve, &title, &mut buf)?;
            fs::write(&output, buf)?;
            Ok(())
        }
        Command::Probe { dataset, bins, seed, epochs } => {
            let records: Vec<_> = read_dataset_csv(&fs::read_to_string(&dataset)?)?
                .into_iter()
                .filter(|r| r.target == TargetKind::MemoryLhs)
                .collect();
            if records.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let config = TrainConfig { seed, epochs, ..TrainConfig::default() };
            let rows = dm_stratified_probe(&records, bins, &config)?;
            println!("dm_low,dm_high,dm_mean,records,test_mse");
            for r in rows {
                println!("{},{},{},{},{}", r.dm_low, r.dm_high, r.dm_mean, r.records, r.test_mse);
            }
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParams(_)
        | Error::SiteOutOfRange { .. }
        | Error::UnsupportedSector(_)
        | Error::UnknownTag(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CHIRALCHAIN_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
