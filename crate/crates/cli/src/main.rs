use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use banditlab::classes::ClassSpec;
use banditlab::harness::{self, ExperimentConfig, RunMode};
use banditlab::metrics::gamma;
use banditlab::rational::{self, Rational};
use banditlab::satbandit::{
    assignment_string, decode_formula, encode_formula, min_sat_assignment, parse_dimacs, random_formula,
    run_sat_learner, sat_reduction, SatFunction, TwoQueryIdentify,
};
use banditlab::solver::{exact_qc_with_cap, gap_of_class_with, gap_of_policy, PolicyTree, DEFAULT_CAP, DEFAULT_GAP_NODE_BUDGET};
use banditlab::{ExplicitClass, Reward};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "banditlab", version, about = "Structured best-arm identification laboratory")]
struct Cli {
    /// Master seed; overrides the seed in experiment configs.
    #[arg(long, global = true, env = "BANDITLAB_SEED")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file for the main result.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record format for simulate/regret.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact noise-free query complexity of a class.
    Qc {
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "0")]
        epsilon: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Write the optimal policy tree as JSON.
        #[arg(long)]
        policy_out: Option<PathBuf>,
    },
    /// Generalized maximin volume and its witness distribution.
    Gamma {
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "0")]
        epsilon: String,
    },
    /// Gap of a class, or of a given policy tree with --policy.
    Gap {
        #[arg(long)]
        class: String,
        #[arg(long, default_value = "0")]
        epsilon: String,
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value_t = DEFAULT_GAP_NODE_BUDGET)]
        node_budget: usize,
    },
    /// Run an identification experiment.
    Simulate(RunArgs),
    /// Run an experiment in regret mode (budget is the horizon).
    Regret(RunArgs),
    /// SAT-encoding utilities.
    Sat {
        #[command(subcommand)]
        mode: SatMode,
    },
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Write the summary JSON here (default: stdout when --out is set, stderr otherwise).
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum SatMode {
    /// Brute-force the lexicographically smallest satisfying assignment.
    Solve {
        #[arg(long)]
        dimacs: PathBuf,
    },
    /// Decide satisfiability through the bandit reduction with the two-query learner.
    Reduce {
        #[arg(long)]
        dimacs: PathBuf,
        #[arg(long, default_value_t = 2)]
        budget: u64,
    },
    /// Print the reward code of a formula.
    Encode {
        #[arg(long)]
        dimacs: PathBuf,
    },
    /// Decode a reward code back to DIMACS.
    Decode {
        #[arg(long)]
        value: String,
        #[arg(long)]
        n: usize,
    },
    /// Run the two-query learner against `f_{phi,c}`.
    Identify {
        #[arg(long)]
        dimacs: PathBuf,
        #[arg(long)]
        index: u64,
    },
    /// Print a random formula in DIMACS form.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        clauses: usize,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<banditlab::Error> for Failure {
    fn from(e: banditlab::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn run_err(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

/// Reads a file that must exist; a missing path is a usage error.
fn read_input(path: &Path, what: &str) -> CliResult<String> {
    if !path.exists() {
        return Err(Failure::Usage(format!("{what} file {} does not exist", path.display())));
    }
    fs::read_to_string(path).map_err(|e| Failure::Run(format!("cannot read {}: {e}", path.display())))
}

/// `--class` takes a path to a JSON class spec, or the JSON itself.
fn load_class(arg: &str) -> CliResult<ExplicitClass> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read_input(Path::new(arg), "class")?
    };
    let spec: ClassSpec = serde_json::from_str(&text).map_err(|e| Failure::Run(format!("class spec: {e}")))?;
    Ok(spec.build()?)
}

fn parse_epsilon(s: &str) -> CliResult<Rational> {
    let e = rational::parse(s).map_err(|e| Failure::Run(format!("epsilon: {e}")))?;
    if e < rational::zero() {
        return Err(Failure::Run("epsilon must be >= 0".into()));
    }
    Ok(e)
}

fn write_out(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))
}

fn json_bytes(value: &impl serde::Serialize) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    harness::write_json(value, &mut buf)?;
    Ok(buf)
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => write_out(p, bytes),
        None => io::stdout().write_all(bytes).map_err(run_err),
    }
}

fn run_experiment(cli: &Cli, args: &RunArgs, mode: RunMode) -> CliResult<()> {
    let text = read_input(&args.config, "config")?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Failure::Run(format!("config {}: {e}", args.config.display())))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    config.mode = mode;
    let exp = harness::run_trials(&config)?;

    let records = match cli.format {
        Format::Csv => {
            let mut buf = Vec::new();
            harness::write_csv(&exp.records, &mut buf)?;
            buf
        }
        Format::Json => json_bytes(&exp.records)?,
    };
    let summary = json_bytes(&exp.summary)?;
    emit(&cli.out, &records)?;
    match (&args.summary_out, &cli.out) {
        (Some(p), _) => write_out(p, &summary),
        (None, Some(_)) => io::stdout().write_all(&summary).map_err(run_err),
        (None, None) => io::stderr().write_all(&summary).map_err(run_err),
    }
}

fn sat(cli: &Cli, mode: &SatMode) -> CliResult<()> {
    let formula = |path: &Path| -> CliResult<_> { Ok(parse_dimacs(&read_input(path, "DIMACS")?, None)?) };
    let value = match mode {
        SatMode::Solve { dimacs } => {
            let phi = formula(dimacs)?;
            let a = min_sat_assignment(&phi)?;
            json!({
                "n": phi.n(),
                "satisfiable": a.is_some(),
                "assignment": a.map(|a| assignment_string(a, phi.n())),
            })
        }
        SatMode::Reduce { dimacs, budget } => {
            let phi = formula(dimacs)?;
            let outcome = sat_reduction(&phi, &mut TwoQueryIdentify::new(phi.n()), *budget)?;
            serde_json::to_value(outcome).map_err(run_err)?
        }
        SatMode::Encode { dimacs } => {
            let phi = formula(dimacs)?;
            json!({"n": phi.n(), "code": rational::format(&encode_formula(&phi))})
        }
        SatMode::Decode { value, n } => {
            let r = rational::parse(value).map_err(|e| Failure::Run(format!("value: {e}")))?;
            let phi = decode_formula(&Reward::Exact(r), *n)?;
            return emit(&cli.out, phi.to_dimacs().as_bytes());
        }
        SatMode::Identify { dimacs, index } => {
            let phi = formula(dimacs)?;
            let n = phi.n();
            let f = SatFunction::indexed(phi, *index)?;
            let (out, queries) = run_sat_learner(&mut TwoQueryIdentify::new(n), &f, 2)?;
            json!({"output": out.display(n), "queries": queries})
        }
        SatMode::Random { n, clauses } => {
            let mut rng = banditlab::rng::seeded(cli.seed.unwrap_or(0));
            let phi = random_formula(*n, *clauses, &mut rng)?;
            return emit(&cli.out, phi.to_dimacs().as_bytes());
        }
    };
    emit(&cli.out, &json_bytes(&value)?)
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Qc { class, epsilon, cap, policy_out } => {
            let class = load_class(class)?;
            let result = exact_qc_with_cap(&class, &parse_epsilon(epsilon)?, *cap)?;
            if let Some(p) = policy_out {
                write_out(p, &json_bytes(&result.tree)?)?;
            }
            emit(&cli.out, format!("{}\n", result.qc).as_bytes())
        }
        Command::Gamma { class, epsilon } => {
            let class = load_class(class)?;
            let g = gamma(&class, &parse_epsilon(epsilon)?)?;
            let detail = json_bytes(&json!({"value": g.value, "witness": g.witness, "achieved": g.achieved}))?;
            match &cli.out {
                Some(p) => {
                    write_out(p, &detail)?;
                    println!("{}", g.value);
                }
                None => {
                    println!("{}", g.value);
                    io::stdout().write_all(&detail).map_err(run_err)?;
                }
            }
            Ok(())
        }
        Command::Gap { class, epsilon, policy, cap, node_budget } => {
            let class = load_class(class)?;
            let line = match policy {
                Some(p) => {
                    let tree: PolicyTree = serde_json::from_str(&read_input(p, "policy")?)
                        .map_err(|e| Failure::Run(format!("policy: {e}")))?;
                    format!("{}\n", gap_of_policy(&tree, &class)?)
                }
                None => {
                    let g = gap_of_class_with(&class, &parse_epsilon(epsilon)?, *cap, *node_budget)?;
                    if g.partial {
                        eprintln!("note: search budget exhausted; value is the gap of one optimal policy");
                    }
                    format!("{}\n", g.value)
                }
            };
            emit(&cli.out, line.as_bytes())
        }
        Command::Simulate(args) => run_experiment(cli, args, RunMode::Identify),
        Command::Regret(args) => run_experiment(cli, args, RunMode::Regret),
        Command::Sat { mode } => sat(cli, mode),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let _ = Cli::command().write_long_help(&mut io::stderr());
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
