//! Command line front end for the decision engine.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use prodmod::decision::{
    decide_with_trace, parse_problem, DecideConfig, Decision, Logic, OmegaOutcome, Problem,
};
use prodmod::pisolver::export_smtlib;
use prodmod::reduction::{build_crisp, build_valued};
use prodmod::report::Report;
use prodmod::semantics::{classical_falsify, parse_model, random_falsify};
use prodmod::syntax::parse;

#[derive(Parser)]
#[command(
    name = "prodmod",
    version,
    about = "Local consequence in modal product logic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a problem file; exits 0 entailed, 1 not entailed, 2 unknown.
    Decide(DecideArgs),
    /// Evaluate a formula at a world of a model file, exactly.
    Eval(EvalArgs),
    /// Write one SMT-LIB script per candidate set, plus a manifest.
    ExportSmt(ExportArgs),
    /// Sample finite models looking for a concrete falsifier.
    Falsify(FalsifyArgs),
}

#[derive(Args)]
struct DecideArgs {
    /// Problem file with `logic:`, `premise:` and `conclusion:` lines.
    problem: PathBuf,
    /// Emit a JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Print every translated instance before deciding.
    #[arg(long)]
    dump_reduction: bool,
    /// Worker threads scanning candidate sets.
    #[arg(long)]
    jobs: Option<usize>,
    /// Case split budget per instance.
    #[arg(long)]
    branch_limit: Option<u64>,
    /// Candidate set budget.
    #[arg(long)]
    omega_limit: Option<usize>,
    /// Index bound used when checking the truth lemma.
    #[arg(long)]
    truncation_k: Option<usize>,
    /// Overall wall clock budget in milliseconds.
    #[arg(long)]
    time_limit_ms: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
    /// World name.
    #[arg(long)]
    world: String,
    /// Formula to evaluate.
    #[arg(long)]
    formula: String,
}

#[derive(Args)]
struct ExportArgs {
    /// Problem file.
    problem: PathBuf,
    /// Directory receiving the scripts.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FalsifyArgs {
    /// Problem file.
    problem: PathBuf,
    /// Random models to try.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Seed for the random search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search all zero/one models exhaustively instead of sampling.
    #[arg(long)]
    classical: bool,
    /// World bound for the exhaustive search.
    #[arg(long, default_value_t = 3)]
    max_worlds: usize,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Decide(args) => run_decide(args),
        Command::Eval(args) => run_eval(args),
        Command::ExportSmt(args) => run_export(args),
        Command::Falsify(args) => run_falsify(args),
    }
}

fn read_problem(path: &PathBuf) -> Result<Problem, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_problem(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn env_override<T: FromStr>(name: &str, slot: &mut T) {
    if let Ok(raw) = std::env::var(name) {
        match raw.parse() {
            Ok(value) => *slot = value,
            Err(_) => eprintln!("warning: ignoring unreadable {name}={raw}"),
        }
    }
}

fn build_config(args: &DecideArgs) -> DecideConfig {
    let mut cfg = DecideConfig::default();
    env_override("PRODMOD_BRANCH_LIMIT", &mut cfg.branch_limit);
    env_override("PRODMOD_OMEGA_LIMIT", &mut cfg.omega_limit);
    env_override("PRODMOD_TRUNCATION_K", &mut cfg.truncation_k);
    if let Some(v) = args.branch_limit {
        cfg.branch_limit = v;
    }
    if let Some(v) = args.omega_limit {
        cfg.omega_limit = v;
    }
    if let Some(v) = args.truncation_k {
        cfg.truncation_k = v;
    }
    if let Some(v) = args.jobs {
        cfg.jobs = v.max(1);
    }
    cfg.time_limit = args.time_limit_ms.map(Duration::from_millis);
    cfg
}

fn run_decide(args: DecideArgs) -> Result<ExitCode, String> {
    let problem = read_problem(&args.problem)?;
    let cfg = build_config(&args);
    let started = Instant::now();
    let (decision, traces) = decide_with_trace(&problem, &cfg).map_err(|e| e.to_string())?;
    let elapsed_ms = started.elapsed().as_millis() as u64;

    if args.dump_reduction {
        for trace in &traces {
            let instance = match problem.logic {
                Logic::Crisp => build_crisp(&problem.gamma, &problem.phi, &trace.omega),
                Logic::Valued => build_valued(&problem.gamma, &problem.phi, &trace.omega),
            }
            .map_err(|e| e.to_string())?;
            println!("{}", instance.dump());
            println!();
        }
    }

    if args.json {
        let report = Report::new(&problem, &decision, &traces, elapsed_ms);
        println!("{}", report.to_json());
    } else {
        print_decision(&problem, &decision, &traces, &cfg)?;
    }

    Ok(ExitCode::from(match decision {
        Decision::Entailed => 0,
        Decision::NotEntailed { .. } => 1,
        Decision::Unknown { .. } => 2,
    }))
}

fn print_decision(
    problem: &Problem,
    decision: &Decision,
    traces: &[prodmod::decision::OmegaTrace],
    cfg: &DecideConfig,
) -> Result<(), String> {
    for gamma in &problem.gamma {
        println!("premise: {gamma}");
    }
    println!("conclusion: {}", problem.phi);
    println!("logic: {}", problem.logic);
    match decision {
        Decision::Entailed => {
            println!("verdict: entailed ({} sets checked)", traces.len());
        }
        Decision::NotEntailed {
            omega_index,
            certificate,
            countermodel,
        } => {
            println!("verdict: not entailed");
            println!(
                "falsified at set {}: {}",
                omega_index, traces[*omega_index].omega
            );
            println!("certificate:");
            for (var, value) in certificate.iter() {
                println!("  {var} = {value}");
            }
            let truncated = countermodel
                .truncate(cfg.truncation_k.max(1))
                .map_err(|e| e.to_string())?;
            println!(
                "countermodel truncated at index {}:",
                cfg.truncation_k.max(1)
            );
            print!("{truncated}");
        }
        Decision::Unknown { reason } => {
            println!("verdict: unknown ({reason})");
            for trace in traces {
                if let OmegaOutcome::ResourceLimit(message) = &trace.outcome {
                    println!("  stuck at {}: {message}", trace.omega);
                }
            }
        }
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<ExitCode, String> {
    let text =
        fs::read_to_string(&args.model).map_err(|e| format!("{}: {e}", args.model.display()))?;
    let model = parse_model(&text).map_err(|e| e.to_string())?;
    let formula = parse(&args.formula).map_err(|e| e.to_string())?;
    let value = model
        .eval(&args.world, &formula)
        .map_err(|e| e.to_string())?;
    println!("{value}");
    Ok(ExitCode::SUCCESS)
}

fn run_export(args: ExportArgs) -> Result<ExitCode, String> {
    let problem = read_problem(&args.problem)?;
    let mut upsilon: std::collections::BTreeSet<_> = problem.gamma.iter().cloned().collect();
    upsilon.insert(problem.phi.clone());
    let levels = prodmod::syntax::levels(&upsilon);
    let omegas = match problem.logic {
        Logic::Crisp => prodmod::sequences::enumerate_coherent(&levels, 1_000_000),
        Logic::Valued => prodmod::sequences::enumerate_simple(&levels, 1_000_000),
    }
    .map_err(|e| e.to_string())?;

    fs::create_dir_all(&args.out_dir).map_err(|e| e.to_string())?;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "# conclusion: {}", problem.phi);
    for gamma in &problem.gamma {
        let _ = writeln!(manifest, "# premise: {gamma}");
    }
    let _ = writeln!(manifest, "# logic: {}", problem.logic);
    for (i, omega) in omegas.iter().enumerate() {
        let instance = match problem.logic {
            Logic::Crisp => build_crisp(&problem.gamma, &problem.phi, omega),
            Logic::Valued => build_valued(&problem.gamma, &problem.phi, omega),
        }
        .map_err(|e| e.to_string())?;
        let script = export_smtlib(&instance.premise_formulas(), &instance.goal);
        let name = format!("instance_{i:03}.smt2");
        fs::write(args.out_dir.join(&name), script).map_err(|e| e.to_string())?;
        let _ = writeln!(manifest, "{name}: {omega}");
    }
    fs::write(args.out_dir.join("manifest.txt"), manifest).map_err(|e| e.to_string())?;
    println!(
        "wrote {} scripts to {}",
        omegas.len(),
        args.out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_falsify(args: FalsifyArgs) -> Result<ExitCode, String> {
    let problem = read_problem(&args.problem)?;
    let found = if args.classical {
        classical_falsify(&problem.gamma, &problem.phi, args.max_worlds)
    } else {
        random_falsify(
            &problem.gamma,
            &problem.phi,
            args.budget,
            problem.logic == Logic::Crisp,
            args.seed,
        )
    };
    match found {
        Some((model, world)) => {
            println!("falsified at world {world}");
            print!("{model}");
            Ok(ExitCode::from(0))
        }
        None => {
            println!("no counterexample found");
            Ok(ExitCode::from(1))
        }
    }
}
