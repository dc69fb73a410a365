use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use difftomo::io::{read_field, AnyField};
use difftomo::RealField;
use difftomo_cli::compare::compare_forward;
use difftomo_cli::pipeline::{cmd_forward, cmd_reconstruct};
use difftomo_cli::render::{render_pgm, RenderOptions};
use difftomo_cli::verify::{self, VerifyOptions};
use difftomo_cli::{CliError, CliResult, ExperimentRecipe};

#[derive(Parser)]
#[command(name = "difftomo", version, about = "Diffraction tomography experiments")]
struct Cli {
    /// Worker threads; all cores by default.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the datasets of a recipe.
    Forward {
        recipe: PathBuf,
        /// Output directory; the recipe's `output_dir` by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct from previously simulated data.
    Reconstruct {
        recipe: PathBuf,
        /// Directory written by `forward`; the recipe's `output_dir` by default.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output directory; the data directory by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a field file as an 8-bit PGM image.
    Render {
        field: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Side of the centred square to render.
        #[arg(long)]
        window: Option<f64>,
        /// Values mapped to black and white.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        range: Option<Vec<f64>>,
        /// Component of a complex field.
        #[arg(long, value_enum, default_value_t = Part::Re)]
        part: Part,
    },
    /// Compare forward models on the receiver line and write a CSV.
    CompareForward {
        recipe: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Criterion numbers to run (1-11); all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Write the results as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Part {
    Re,
    Im,
    Abs,
}

fn load(path: &Path) -> CliResult<ExperimentRecipe> {
    ExperimentRecipe::load(path)
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn run(command: Command) -> CliResult<ExitCode> {
    match command {
        Command::Forward { recipe, out } => {
            let (dir, manifest) = cmd_forward(&load(&recipe)?, out.as_deref())?;
            println!("wrote {} traces to {}", manifest.trace_count, dir.display());
        }
        Command::Reconstruct { recipe, data, out } => {
            let (dir, report) = cmd_reconstruct(&load(&recipe)?, data.as_deref(), out.as_deref())?;
            match report.psnr {
                Some(p) => println!("{}: PSNR {p:.2} dB, written to {}", report.method, dir.display()),
                None => println!("{}: written to {}", report.method, dir.display()),
            }
        }
        Command::Render { field, out, window, range, part } => {
            let f: RealField = match read_field(&field)? {
                AnyField::Real(f) => f,
                AnyField::Complex(c) => c.map(|z| match part {
                    Part::Re => z.re,
                    Part::Im => z.im,
                    Part::Abs => z.norm(),
                }),
            };
            let range = range.map(|r| (r[0], r[1]));
            write(&out, &render_pgm(&f, RenderOptions { window, range })?)?;
        }
        Command::CompareForward { recipe, out } => {
            let c = compare_forward(&load(&recipe)?)?;
            write(&out, c.to_csv().as_bytes())?;
            for (label, d) in c.differences() {
                println!("{label}: relative difference {d:.4}");
            }
        }
        Command::Verify { only, out } => {
            let options = VerifyOptions { only: (!only.is_empty()).then_some(only), workdir: None };
            let results = verify::run(&options, |r, secs| println!("{} ({secs:.1} s)", r.line()));
            if let Some(out) = out {
                write(&out, &serde_json::to_vec_pretty(&results)?)?;
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
