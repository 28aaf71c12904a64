use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use agv_sched::cli::{self, BenchSpec, CliError, Params, SolveOptions, Solver};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Build,
    Solve,
    Convert,
    Check,
    Bench,
    Diagram,
}

/// Zone scheduling for automated guided vehicles.
#[derive(Debug, Parser)]
#[command(name = "agv", version)]
struct Args {
    command: Command,
    /// Instance file, `appendix`, or `gen:JxSxD:seed`.
    #[arg(long)]
    instance: Option<String>,
    /// bnb, oracle, sa or sbm.
    #[arg(long, default_value = "bnb")]
    solver: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Schedule or solve report to check or draw.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Comma-separated k=v pairs.
    #[arg(long, default_value = "")]
    params: String,
}

fn run(args: Args) -> Result<i32, CliError> {
    cli::configure_threads()?;
    let params = Params::parse(&args.params)?;
    let time_limit = match args.time_limit {
        Some(t) if t > 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
        Some(t) => return Err(CliError::Input(format!("--time-limit {t} must be positive"))),
        None => None,
    };
    let name = format!("{:?}", args.command).to_lowercase();
    let out = args.out.clone().unwrap_or_else(|| cli::default_out(&name));
    let instance = || {
        let arg = args.instance.as_deref().ok_or_else(|| CliError::Input("--instance is required".into()))?;
        cli::load_instance_arg(arg)
    };
    let schedule = || args.schedule.clone().ok_or_else(|| CliError::Input("--schedule is required".into()));
    match args.command {
        Command::Build => {
            let rep = cli::cmd_build(&instance()?, &out, &params)?;
            println!(
                "{} int, {} bin, {} eq, {} ineq (bounds {} vars, {} eq, {} ineq) -> {}",
                rep.n_int,
                rep.n_bin,
                rep.n_eq,
                rep.n_ineq,
                rep.bound_vars,
                rep.bound_eq,
                rep.bound_ineq,
                out.display()
            );
            Ok(cli::EXIT_FEASIBLE)
        }
        Command::Convert => {
            let s = cli::cmd_convert(&instance()?, &out, &params)?;
            println!(
                "{} vertices, {} couplings, density {:.4}, {} fields -> {}",
                s.vertices,
                s.edges,
                s.edge_density,
                s.linear_fields,
                out.display()
            );
            Ok(cli::EXIT_FEASIBLE)
        }
        Command::Solve => {
            let solver: Solver = args.solver.parse()?;
            let opts = SolveOptions { solver, seed: args.seed, time_limit, params };
            let rep = cli::cmd_solve(&instance()?, &opts, &out)?;
            let obj = rep.objective.map(|o| o.to_string()).unwrap_or_else(|| "-".into());
            println!(
                "{}: {:?}, objective {obj}, feasible {}, certified {} -> {}",
                rep.solver,
                rep.status,
                rep.feasible,
                rep.certified,
                out.display()
            );
            Ok(cli::exit_code(&rep))
        }
        Command::Check => {
            let v = cli::cmd_check(&instance()?, &schedule()?)?;
            for v in &v {
                println!("{} {} {} {}", v.code.as_str(), v.agvs.join(","), v.zones.join(","), v.message);
            }
            println!("{} violations", v.len());
            Ok(if v.is_empty() { cli::EXIT_FEASIBLE } else { cli::EXIT_INFEASIBLE })
        }
        Command::Bench => {
            let spec = BenchSpec::from_params(&params, args.seed, time_limit)?;
            let rows = cli::cmd_bench(&spec, &out)?;
            println!("{} rows -> {}", rows.len(), out.display());
            Ok(cli::EXIT_FEASIBLE)
        }
        Command::Diagram => {
            cli::cmd_diagram(&instance()?, &schedule()?, &out)?;
            println!("-> {}", out.display());
            Ok(cli::EXIT_FEASIBLE)
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(cli::EXIT_INPUT as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
