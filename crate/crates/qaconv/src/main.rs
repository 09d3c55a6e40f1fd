//! Command-line harness for the quantum convolution simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use qaconv::convolution::builtin_kernel_names;
use qaconv::harness::commands::{
    cmd_conv_map, cmd_grad_check, cmd_qpe_layer, cmd_train_toy, cmd_verify_qaco, parse_methods,
    parse_shots, ExperimentConfig, ImageSource, KernelSource,
};
use qaconv::harness::images::builtin_image_names;
use qaconv::harness::io::parse_csv;
use qaconv::{Error, Grid, Result};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "qaconv",
    version,
    about = "Quantum-simulated convolution maps, cross-checked against the classical reference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in reference pair through the interference circuit,
    /// exactly and at several shot counts.
    VerifyQaco {
        /// `exact` or comma-separated shot counts.
        #[arg(long, default_value = "10,100,1000,10000")]
        shots: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix for the report CSV.
        #[arg(long, default_value = "verify_qaco")]
        out: PathBuf,
    },
    /// Slide a kernel over an image and write one feature map per method.
    ConvMap {
        /// Image file (CSV or PGM), or `builtin:NAME`.
        #[arg(long)]
        image: String,
        /// Built-in kernel name or a CSV/PGM file.
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = 0)]
        padding: usize,
        /// Comma-separated: classical|hadamard|swap|adjoint|qpe|all.
        #[arg(long, default_value = "hadamard")]
        method: String,
        /// `exact` or a single shot count.
        #[arg(long, default_value = "exact")]
        shots: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Phase register width for the qpe method.
        #[arg(long = "qpe-bits", default_value_t = 8)]
        qpe_bits: usize,
        #[arg(long, default_value = "conv_map")]
        out: PathBuf,
    },
    /// Run the phase-estimation layer and report its deviation from the
    /// exact readout.
    QpeLayer {
        /// Image file (CSV or PGM), or `builtin:NAME`.
        #[arg(long)]
        image: String,
        /// Built-in kernel name or a CSV/PGM file.
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = 0)]
        padding: usize,
        /// `exact` or a single shot count.
        #[arg(long, default_value = "exact")]
        shots: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "qpe-bits", default_value_t = 8)]
        qpe_bits: usize,
        #[arg(long, default_value = "qpe_layer")]
        out: PathBuf,
    },
    /// Compare the closed-form kernel gradient against finite differences.
    GradCheck {
        /// Built-in kernel name or a CSV/PGM file.
        #[arg(long)]
        kernel: String,
        /// Optional window grid (CSV/PGM) of the kernel's shape; a seeded
        /// random window is used when omitted.
        #[arg(long)]
        window: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "grad_check")]
        out: PathBuf,
    },
    /// Train the one-kernel toy classifier and log loss and accuracy.
    TrainToy {
        #[arg(long, default_value_t = 0.5)]
        lr: f64,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "train_toy")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::VerifyQaco { shots, seed, out } => {
            cmd_verify_qaco(&parse_shots(&shots)?, seed, &out)?;
        }
        Command::ConvMap {
            image,
            kernel,
            stride,
            padding,
            method,
            shots,
            seed,
            qpe_bits,
            out,
        } => {
            let config = ExperimentConfig {
                command: "conv-map".into(),
                image: ImageSource::parse(&image),
                kernel: KernelSource::parse(&kernel),
                stride,
                padding,
                methods: parse_methods(&method)?,
                shots: parse_shots(&shots)?,
                seed,
                qpe_bits,
                out,
            };
            cmd_conv_map(&config)?;
        }
        Command::QpeLayer {
            image,
            kernel,
            stride,
            padding,
            shots,
            seed,
            qpe_bits,
            out,
        } => {
            let config = ExperimentConfig {
                command: "qpe-layer".into(),
                image: ImageSource::parse(&image),
                kernel: KernelSource::parse(&kernel),
                stride,
                padding,
                methods: Vec::new(),
                shots: parse_shots(&shots)?,
                seed,
                qpe_bits,
                out,
            };
            cmd_qpe_layer(&config)?;
        }
        Command::GradCheck {
            kernel,
            window,
            epsilon,
            seed,
            out,
        } => {
            let kernel = KernelSource::parse(&kernel).resolve()?;
            let window_grid = match window {
                Some(path) => {
                    let text =
                        std::fs::read_to_string(&path).map_err(|e| Error::Io {
                            path: path.display().to_string(),
                            source: e,
                        })?;
                    parse_csv(&text)?
                }
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let data: Vec<f64> = (0..kernel.rows() * kernel.cols())
                        .map(|_| rng.random::<f64>() * 2.0 - 1.0)
                        .collect();
                    Grid::new(kernel.rows(), kernel.cols(), data)?
                }
            };
            cmd_grad_check(&window_grid, &kernel, epsilon, &out)?;
        }
        Command::TrainToy {
            lr,
            iters,
            seed,
            out,
        } => {
            cmd_train_toy(lr, iters, seed, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            // Help the user with the two name-driven arguments.
            if matches!(err, Error::UnknownKernel(_)) {
                eprintln!("builtin kernels: {}", builtin_kernel_names().join(", "));
                eprintln!("builtin images: {}", builtin_image_names().join(", "));
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
