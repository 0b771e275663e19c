//! Command-line front end: validate mechanism files, measure and verify
//! privacy levels, build extensions, audit every guarantee, and run the
//! graph rate experiment.
//!
//! Exit codes are a stable contract for CI: 0 pass, 1 verification fail,
//! 2 precondition fail, 3 I/O or parse error. Machine output (JSON, CSV)
//! goes to stdout or --out; human summaries go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use privext::edge_density::{run_rate_experiment, ExperimentError, GraphExperimentConfig};
use privext::extension::{extend, ExtendError};
use privext::io::{self, IoError, LoadedMechanism};
use privext::mechanism::{Measured, PrivacyReport, DEFAULT_REL_TOL};
use privext::verifier::{audit_extension, audit_set_level, PairCheck, MAX_SET_LEVEL_OUTPUTS};

const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "privext",
    version,
    about = "Extend private mechanisms from a hypothesis set to a whole finite metric space, \
             and verify the guarantees exhaustively"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms and the probability table of a mechanism file
    Validate { file: PathBuf },
    /// Measure the exact privacy level, optionally against a claimed epsilon
    Measure {
        file: PathBuf,
        #[arg(long)]
        claimed_eps: Option<f64>,
    },
    /// Extend a mechanism defined on a hypothesis set to the whole space
    Extend {
        file: PathBuf,
        /// Privacy level of the input on its hypothesis set; defaults to
        /// the measured level
        #[arg(long)]
        eps: Option<f64>,
        /// Write the extension JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full extension audit plus the set-level check
    Audit {
        file: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        /// Emit the report as JSON instead of a text table
        #[arg(long)]
        json: bool,
    },
    /// Monte-Carlo comparison of edge-density estimators on G(n,p)
    GraphExperiment {
        /// Config JSON file; overrides the individual flags
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        degree_bound: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        /// Edge probabilities, comma separated
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Json(_) => EXIT_IO,
            _ => EXIT_VERIFY_FAIL,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ExtendError> for Failure {
    fn from(e: ExtendError) -> Self {
        let code = match e {
            ExtendError::NotPrivateOnH { .. }
            | ExtendError::BadParameters(_)
            | ExtendError::UnknownDataset { .. }
            | ExtendError::Overflow { .. } => EXIT_PRECONDITION,
            ExtendError::Mechanism(_) => EXIT_VERIFY_FAIL,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure::new(EXIT_PRECONDITION, e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn describe_measured(m: &LoadedMechanism, report: &PrivacyReport) -> String {
    let space = match m {
        LoadedMechanism::Full(mech) => mech.space(),
        LoadedMechanism::Partial(mech) => mech.space(),
    };
    let outputs = match m {
        LoadedMechanism::Full(mech) => mech.outputs(),
        LoadedMechanism::Partial(mech) => mech.outputs(),
    };
    let value = match report.measured {
        Measured::Finite(v) => format!("measured epsilon = {v}"),
        Measured::NonPrivate => "measured epsilon = unbounded (not private)".to_string(),
    };
    match &report.witness {
        Some(w) => format!(
            "{value}\nwitness: D1={} D2={} output={}",
            space.label(w.dataset_1),
            space.label(w.dataset_2),
            outputs[w.output]
        ),
        None => value,
    }
}

fn cmd_validate(file: &Path) -> Result<(), Failure> {
    let text = read_file(file)?;
    let loaded = io::load_mechanism(&text)?;
    match &loaded {
        LoadedMechanism::Full(m) => println!(
            "valid: {} datasets, {} outputs",
            m.space().len(),
            m.outputs().len()
        ),
        LoadedMechanism::Partial(m) => println!(
            "valid: {} datasets ({} in hypothesis set), {} outputs",
            m.space().len(),
            m.hypothesis().len(),
            m.outputs().len()
        ),
    }
    Ok(())
}

fn cmd_measure(file: &Path, claimed: Option<f64>) -> Result<(), Failure> {
    let text = read_file(file)?;
    let loaded = io::load_mechanism(&text)?;
    let report = match &loaded {
        LoadedMechanism::Full(m) => m.measured_epsilon(),
        LoadedMechanism::Partial(m) => m.measured_epsilon(),
    };
    println!("{}", describe_measured(&loaded, &report));
    if let Some(claimed) = claimed {
        if claimed < 0.0 {
            return Err(Failure::new(
                EXIT_PRECONDITION,
                "claimed epsilon must be nonnegative",
            ));
        }
        let verdict = report.against(claimed, DEFAULT_REL_TOL);
        if verdict.passed == Some(true) {
            println!("claimed epsilon {claimed}: pass");
        } else {
            println!("claimed epsilon {claimed}: FAIL");
            return Err(Failure::new(
                EXIT_VERIFY_FAIL,
                "measured epsilon exceeds the claim",
            ));
        }
    }
    Ok(())
}

fn require_partial(
    loaded: LoadedMechanism,
) -> Result<privext::mechanism::PartialMechanism, Failure> {
    match loaded {
        LoadedMechanism::Partial(m) => Ok(m),
        LoadedMechanism::Full(_) => Err(Failure::new(
            EXIT_PRECONDITION,
            "this command needs a \"hypothesis\" field in the mechanism file",
        )),
    }
}

fn choose_eps(m: &privext::mechanism::PartialMechanism, eps: Option<f64>) -> Result<f64, Failure> {
    match eps {
        Some(e) => Ok(e),
        None => match m.measured_epsilon().measured {
            Measured::Finite(v) => {
                eprintln!(
                    "no --eps given; using the measured epsilon on the hypothesis set: {v}"
                );
                Ok(v)
            }
            Measured::NonPrivate => Err(Failure::new(
                EXIT_PRECONDITION,
                "input is not private on its hypothesis set for any epsilon",
            )),
        },
    }
}

fn cmd_extend(file: &Path, eps: Option<f64>, out: Option<&Path>) -> Result<(), Failure> {
    let text = read_file(file)?;
    let m = require_partial(io::load_mechanism(&text)?)?;
    let eps = choose_eps(&m, eps)?;
    let r = extend(&m, eps)?;
    let json = io::extension_to_json(&r, m.hypothesis());
    write_output(out, &json)?;

    let z = r.normalizers();
    let z_min = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let z_max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let measured = r.mechanism().measured_epsilon().measured;
    eprintln!(
        "extended {} datasets from a hypothesis set of {} (eps = {eps})",
        m.space().len(),
        m.hypothesis().len()
    );
    eprintln!(
        "normalizers: min = {z_min}, max = {z_max}; density scalings performed: {}",
        r.scaling_ops()
    );
    match measured {
        Measured::Finite(v) => eprintln!("measured epsilon of the extension: {v} (bound 2*eps = {})", 2.0 * eps),
        Measured::NonPrivate => eprintln!("measured epsilon of the extension: unbounded"),
    }
    Ok(())
}

fn cmd_audit(file: &Path, eps: Option<f64>, json: bool) -> Result<(), Failure> {
    let text = read_file(file)?;
    let m = require_partial(io::load_mechanism(&text)?)?;
    let eps = choose_eps(&m, eps)?;
    let mut report = audit_extension(&m, eps, PairCheck::Exhaustive)?;
    if m.outputs().len() <= MAX_SET_LEVEL_OUTPUTS {
        let r = extend(&m, eps)?;
        let set_report = audit_set_level(r.mechanism(), 2.0 * eps)
            .map_err(|e| Failure::new(EXIT_PRECONDITION, e.to_string()))?;
        report = report.merge(set_report);
    } else {
        eprintln!(
            "skipping set-level audit: {} outputs exceed the cap of {MAX_SET_LEVEL_OUTPUTS}",
            m.outputs().len()
        );
    }
    if json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_table());
    }
    if report.overall {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY_FAIL, "audit failed"))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_graph_experiment(
    config: Option<&Path>,
    n: Option<usize>,
    degree_bound: Option<usize>,
    eps: Option<f64>,
    p: Option<Vec<f64>>,
    trials: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = match config {
        Some(path) => {
            let text = read_file(path)?;
            io::load_config(&text)?
        }
        None => {
            let missing = |flag: &str| {
                Failure::new(
                    EXIT_PRECONDITION,
                    format!("--{flag} is required without --config"),
                )
            };
            GraphExperimentConfig {
                n: n.ok_or_else(|| missing("n"))?,
                degree_bound: degree_bound.ok_or_else(|| missing("degree-bound"))?,
                eps: eps.ok_or_else(|| missing("eps"))?,
                p_values: p.unwrap_or_else(|| vec![0.5]),
                trials,
                seed,
            }
        }
    };
    let report = run_rate_experiment(&cfg)?;
    write_output(out, &report.to_csv())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Measure { file, claimed_eps } => cmd_measure(&file, claimed_eps),
        Command::Extend { file, eps, out } => cmd_extend(&file, eps, out.as_deref()),
        Command::Audit { file, eps, json } => cmd_audit(&file, eps, json),
        Command::GraphExperiment {
            config,
            n,
            degree_bound,
            eps,
            p,
            trials,
            seed,
            out,
        } => cmd_graph_experiment(
            config.as_deref(),
            n,
            degree_bound,
            eps,
            p,
            trials,
            seed,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
