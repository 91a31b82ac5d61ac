use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Rational64;

use prk::error::{Error, Result};
use prk::harness::{
    run_experiment, solve, w_rows_csv, w_study, Decomposition, Problem, RunConfig, EXPERIMENTS,
};
use prk::tableau::{builtin_tableau, parse_tableau, write_tableau, PrkTableau};

#[derive(Parser)]
#[command(name = "prk", version, about = "Partitioned and multirate Runge-Kutta experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment (or `all`) and check its assertions.
    Run(RunArgs),
    /// Print `||W||`, `cond(r^T e)` and the stability norms as CSV.
    Analyze(AnalyzeArgs),
    /// Integrate one problem and print the final state as CSV.
    Solve(SolveArgs),
    /// Print the coefficients and properties of a tableau.
    Tableau {
        /// Built-in name or path to a tableau file.
        scheme: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// One of table1, table2, fig1, fig2, fig3, adv2d-cell, adv2d-flux, all.
    experiment: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Halve all resolutions.
    #[arg(long)]
    quick: bool,
    /// File of `key = value` overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, default_value = "adv1d")]
    problem: String,
    /// Comma-separated resolutions.
    #[arg(long, value_delimiter = ',', default_value = "20,40,80,160,320,640")]
    m: Vec<usize>,
    /// Comma-separated Courant numbers.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,0.9,0.95,1")]
    nu: Vec<f64>,
    /// Comma-separated built-in names or tableau files.
    #[arg(long, value_delimiter = ',', default_value = "TW2,CS2")]
    schemes: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    nu: Option<f64>,
    /// Built-in scheme name.
    #[arg(long, default_value = "TW2", conflicts_with = "tableau")]
    scheme: String,
    /// Tableau file used instead of a built-in scheme.
    #[arg(long)]
    tableau: Option<PathBuf>,
    #[arg(long, default_value = "cell")]
    decomposition: String,
    /// Partition spec, e.g. `I2:abs(x-0.5)<=0.25` or `ranges:10-19`.
    #[arg(long)]
    partition: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_tableau(name: &str) -> Result<PrkTableau<Rational64>> {
    match builtin_tableau(name) {
        Ok(t) => Ok(t),
        Err(Error::UnknownScheme(_)) if Path::new(name).exists() => parse_tableau(&std::fs::read_to_string(name)?),
        Err(e) => Err(e),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    for kv in &args.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if args.quick {
        cfg.quick = true;
    }
    if let Some(s) = args.schemes {
        cfg.schemes = Some(s);
    }
    if let Some(o) = args.out {
        cfg.out = Some(o);
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let names: Vec<&str> = if args.experiment == "all" { EXPERIMENTS.to_vec() } else { vec![args.experiment.as_str()] };
    let mut passed = true;
    for name in names {
        let outcome = run_experiment(name, &cfg)?;
        outcome.write_to(&out)?;
        for (file, _) in &outcome.files {
            println!("{name}: wrote {}", out.join(file).display());
        }
        for check in &outcome.checks {
            println!("{name}: {check}");
        }
        passed &= outcome.passed();
    }
    Ok(passed)
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    if args.problem.parse::<Problem>()? != Problem::Adv1d {
        return Err(Error::Config("analysis needs the linear 1D problem (`adv1d`, upwind fluxes)".into()));
    }
    let tabs = args
        .schemes
        .iter()
        .map(|s| Ok((s.to_ascii_uppercase(), load_tableau(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let rows = w_study(&tabs, &args.m, &args.nu)?;
    let meta = [
        ("problem", "upwind, middle half refined by 2, zero inflow".to_string()),
        ("decomposition", "cell".to_string()),
        ("dt", "nu * h".to_string()),
    ];
    emit(&w_rows_csv(&rows, &meta), args.out.as_deref())
}

fn solve_cmd(args: SolveArgs) -> Result<()> {
    let problem: Problem = args.problem.parse()?;
    let decomposition: Decomposition = args.decomposition.parse()?;
    let (name, tableau) = match &args.tableau {
        Some(path) => (path.display().to_string(), parse_tableau(&std::fs::read_to_string(path)?)?),
        None => (args.scheme.to_ascii_uppercase(), builtin_tableau(&args.scheme)?),
    };
    let sol = solve(problem, args.m, args.nu, &tableau, decomposition, args.partition.as_deref(), args.t_end)?;
    let meta = [
        ("problem", args.problem.clone()),
        ("m", args.m.to_string()),
        ("scheme", name),
        ("decomposition", decomposition.to_string()),
    ];
    emit(&sol.to_csv(&meta), args.out.as_deref())
}

fn show_tableau(name: &str) -> Result<()> {
    let t = load_tableau(name)?;
    let p = t.properties();
    print!("{}", write_tableau(&t));
    println!("# classical order: {}", p.classical_order);
    println!("# stage order: {}", p.stage_order);
    println!("# internally consistent: {}", p.internally_consistent);
    println!("# conservative: {}", p.conservative);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Analyze(args) => analyze(args).map(|_| true),
        Command::Solve(args) => solve_cmd(args).map(|_| true),
        Command::Tableau { scheme } => show_tableau(&scheme).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("prk: some checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("prk: {e}");
            ExitCode::from(2)
        }
    }
}
