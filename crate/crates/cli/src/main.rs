mod commands;
mod input;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use qgraph::Tolerance;

/// Verification toolkit for quantum graph homomorphism games.
///
/// Exit status: 0 when every check passes, 1 when a verification fails,
/// 2 on malformed input.
#[derive(Parser)]
#[command(name = "qgraph", version)]
struct Cli {
    /// Absolute tolerance for all residual checks.
    #[arg(long, global = true, env = "QGRAPH_TOL")]
    tol: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads used across independent input files.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct GameArgs {
    /// Source quantum graph.
    #[arg(long)]
    source: PathBuf,
    /// Target classical graph.
    #[arg(long, required_unless_present = "complete", conflicts_with = "complete")]
    target: Option<PathBuf>,
    /// Use the complete graph K_C as the target.
    #[arg(long, value_name = "C")]
    complete: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Teleport,
    ShiftMultiply,
    AbelianLoc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Structural,
    Operational,
    AlgebraRep,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Trace,
    Tensor,
}

#[derive(Subcommand)]
enum Command {
    /// Check the quantum graph axioms.
    Validate { inputs: Vec<PathBuf> },
    /// Quantum edge basis of a quantum graph.
    EdgeBasis {
        /// Basis of S + M' (the game's inputs) instead of S.
        #[arg(long)]
        game: bool,
        inputs: Vec<PathBuf>,
    },
    /// Dilate a matrix-valued POVM to a block strategy.
    Dilate { inputs: Vec<PathBuf> },
    /// Round an almost-PVM to the nearest PVM.
    RoundPvm { inputs: Vec<PathBuf> },
    /// Build a coloring of a quantum complete graph.
    Color {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, required_if_eq("method", "teleport"))]
        d: Option<usize>,
        #[arg(long, required_if_eq("method", "teleport"))]
        k: Option<usize>,
        /// Algebra for shift-multiply and abelian-loc.
        #[arg(long)]
        algebra: Option<PathBuf>,
        /// Emit verification and rigidity data instead of the bare strategy.
        #[arg(long)]
        rigidity: bool,
    },
    /// Check that strategies win the homomorphism game.
    VerifyHom {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value = "structural")]
        mode: Mode,
        inputs: Vec<PathBuf>,
    },
    /// Quantum-input correlation of a strategy.
    Correlation {
        #[arg(long, value_enum, default_value = "trace")]
        from: Route,
        inputs: Vec<PathBuf>,
    },
    /// Synchronicity of a correlation.
    CheckSync { inputs: Vec<PathBuf> },
    /// The four identities of synchronous correlations.
    Identities { inputs: Vec<PathBuf> },
    /// Classical correlation on the diagonal inputs.
    Compress { inputs: Vec<PathBuf> },
    /// Embed a classical-input strategy as a block strategy.
    Embed { inputs: Vec<PathBuf> },
    /// Bisynchronicity of a classical correlation.
    Bisync { inputs: Vec<PathBuf> },
    /// Kraus and Choi data of a winning strategy's measurement channel.
    ExtractChannel {
        #[command(flatten)]
        game: GameArgs,
        inputs: Vec<PathBuf>,
    },
    /// Compose a K_c coloring with a representation of K_c → K_r.
    Compose {
        #[arg(long)]
        source: PathBuf,
        /// Representation file.
        #[arg(long, required_unless_present = "map", conflicts_with = "map")]
        rep: Option<PathBuf>,
        /// Injective map of colors, e.g. `2,0,1`.
        #[arg(long, value_delimiter = ',', requires = "colors")]
        map: Option<Vec<usize>>,
        /// Number of target colors for `--map`.
        #[arg(long)]
        colors: Option<usize>,
        inputs: Vec<PathBuf>,
    },
    /// Certified chromatic upper bounds of a quantum graph.
    Bounds { inputs: Vec<PathBuf> },
    /// Exact chromatic number of a classical graph by exhaustive search.
    ClassicalChromatic {
        /// Test for a homomorphism into this graph instead.
        #[arg(long)]
        hom_to: Option<PathBuf>,
        #[arg(long, default_value_t = qgraph::graph::ORACLE_CAP)]
        cap: usize,
        inputs: Vec<PathBuf>,
    },
}

/// Why a subcommand did not produce a passing result.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn malformed(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<qgraph::Error> for Failure {
    fn from(e: qgraph::Error) -> Self {
        use qgraph::Error::*;
        match e {
            Verification(_) | NotPovm(_) | NotPvm(_) => Failure::failed(e.to_string()),
            _ => Failure::malformed(e.to_string()),
        }
    }
}

/// A JSON result and whether it certifies success.
pub struct Outcome {
    pub value: Value,
    pub pass: bool,
}

impl Outcome {
    pub fn pass(value: Value) -> Self {
        Outcome { value, pass: true }
    }
}

type Handled = Result<Outcome, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let tol = Tolerance::new(cli.tol.unwrap_or(Tolerance::DEFAULT))?;
    if cli.jobs == 0 {
        return Err(Failure::malformed("--jobs must be at least 1"));
    }
    let results = commands::dispatch(&cli.cmd, tol, cli.jobs)?;
    emit(cli.out.as_deref(), results)
}

/// Applies `f` to every input, on `jobs` threads when more than one.
pub fn for_each_input<F>(inputs: &[PathBuf], jobs: usize, f: F) -> Result<Vec<(Option<PathBuf>, Handled)>, Failure>
where
    F: Fn(&Path) -> Handled + Sync,
{
    if inputs.is_empty() {
        return Err(Failure::malformed("no input files given"));
    }
    let one = |p: &PathBuf| (Some(p.clone()), f(p));
    if jobs == 1 || inputs.len() == 1 {
        return Ok(inputs.iter().map(one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::malformed(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| inputs.par_iter().map(one).collect()))
}

fn emit(out: Option<&Path>, results: Vec<(Option<PathBuf>, Handled)>) -> Result<u8, Failure> {
    let mut code = 0u8;
    let mut entries = Vec::with_capacity(results.len());
    let single = results.len() == 1;
    for (path, res) in results {
        let label = path.as_ref().map(|p| p.display().to_string());
        match res {
            Ok(o) => {
                if !o.pass {
                    code = code.max(1);
                }
                entries.push(if single { o.value } else { json!({"input": label, "pass": o.pass, "result": o.value}) });
            }
            Err(f) => {
                code = code.max(f.code);
                match &label {
                    Some(l) if !f.message.starts_with(l.as_str()) => eprintln!("error: {l}: {}", f.message),
                    _ => eprintln!("error: {}", f.message),
                }
                if !single {
                    entries.push(json!({"input": label, "pass": false, "error": f.message}));
                } else {
                    return Ok(code);
                }
            }
        }
    }
    let value = if single { entries.pop().unwrap_or(Value::Null) } else { Value::Array(entries) };
    let text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    match out {
        Some(p) => fs::write(p, text + "\n")
            .map_err(|e| Failure::malformed(format!("cannot write {}: {e}", p.display())))?,
        None => {
            // a closed pipe (`| head`) is not an error worth a panic
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    Ok(code)
}
