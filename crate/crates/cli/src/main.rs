//! `ergotwist`: analyze, scan and verify locally constant potentials.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ergotwist::genericity::sample_generic_suite;
use ergotwist::pipeline::{analyze, verify, VerifyOptions};
use ergotwist::potential::{load_document, LocallyConstantPotential};
use ergotwist::symbolic::EventuallyPeriodicPoint;
use ergotwist::thermo::beta_scan;
use ergotwist::Error;

const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser)]
#[command(name = "ergotwist", version, about = "Exact ergodic optimization and transport on full shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Max-plus analysis, duality, twist and transport for one potential.
    Analyze(Common),
    /// Pressure, subaction and Gibbs convergence over a range of beta.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly increasing inverse temperatures.
        #[arg(long, value_delimiter = ',', conflicts_with = "beta")]
        betas: Option<Vec<f64>>,
        /// A single inverse temperature.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Run every exact identity check; exit 0 iff all pass.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Perturb one kernel entry before checking.
        #[arg(long)]
        corrupt_w: bool,
    },
    /// Genericity statistics on random perturbed potentials.
    Sample {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Potential document (JSON).
    file: PathBuf,
    /// Projection depth for family documents.
    #[arg(long)]
    depth: Option<usize>,
    /// Base point of the involution kernel, as "pre(period)".
    #[arg(long, default_value = "(0)")]
    base_point: String,
    /// Directory for report artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Lib(Error),
    Io(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_input_error() => EXIT_PARSE,
            Failure::Lib(e) if e.is_precondition() => EXIT_PRECONDITION,
            Failure::Io(_) => EXIT_PARSE,
            _ => EXIT_INVARIANT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(s) | Failure::Invariant(s) => s.clone(),
        }
    }
}

fn load(common: &Common) -> Result<(LocallyConstantPotential, EventuallyPeriodicPoint), Failure> {
    let text = fs::read_to_string(&common.file)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", common.file.display())))?;
    let doc = load_document(&text, common.depth)?;
    let base = EventuallyPeriodicPoint::parse(&common.base_point, doc.potential.alphabet())?;
    Ok((doc.potential, base))
}

fn write_artifacts(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze(common) => {
            let (a, base) = load(&common)?;
            let report = analyze(&a, &base)?;
            let summary = report.to_string();
            print!("{summary}");
            if let Some(dir) = &common.out {
                let mut files = vec![("summary.txt", summary), ("report.json", pretty(&report.to_json()))];
                files.extend(report.csv_artifacts());
                write_artifacts(dir, &files)?;
            }
            Ok(())
        }
        Command::Scan { common, betas, beta } => {
            let (a, _) = load(&common)?;
            let betas = match (betas, beta) {
                (Some(b), _) => b,
                (None, Some(b)) => vec![b],
                (None, None) => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            };
            let report = beta_scan(&a, &betas)?;
            let csv = report.to_csv();
            print!("{csv}");
            if let Some(dir) = &common.out {
                write_artifacts(dir, &[("scan.csv", csv)])?;
            }
            Ok(())
        }
        Command::Verify { common, corrupt_w } => {
            let (a, base) = load(&common)?;
            let report = verify(&a, &VerifyOptions { x_bar: base, corrupt_kernel: corrupt_w })?;
            let text = report.to_string();
            print!("{text}");
            if let Some(dir) = &common.out {
                write_artifacts(dir, &[("verify.txt", text), ("verify.json", pretty(&report.to_json()))])?;
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Invariant("verification failed".into()))
            }
        }
        Command::Sample { seed, samples, depth, out } => {
            if depth == 0 {
                return Err(Failure::Lib(Error::InvalidInput("depth must be at least 1".into())));
            }
            let report = sample_generic_suite(seed, samples, depth)?;
            let csv = report.to_csv();
            print!("{}", csv.lines().last().map(|l| format!("{l}\n")).unwrap_or_default());
            if let Some(dir) = &out {
                write_artifacts(dir, &[("generic.csv", csv)])?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    panic::set_hook(Box::new(|info| eprintln!("internal invariant violated: {info}")));
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
        Err(_) => ExitCode::from(EXIT_INVARIANT),
    }
}
