//! `vpt`: tables, figure series, single points, sweeps and oracle checks
//! for the anharmonic-oscillator free energy.
//!
//! Exit status: 0 success, 1 invalid input, 2 numerical non-convergence or
//! oracle mismatch in any emitted row (the output is still written).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vpt_core::report::{
    physical_grid, render, rescaled_grid, run, Command, OutputFormat, PointSpec, ResultRow, RunRequest, Status,
};
use vpt_core::{Error, Execution, Order};

#[derive(Debug, Parser)]
#[command(name = "vpt", version, about = "Free energy of the quartic anharmonic oscillator by variational perturbation theory")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// z = 10 at T = 1, 2, 3, 4, 5, 10, 20, 30 with printed reference columns
    Table1,
    /// Five (λ, β) points at m = ω = 1 with printed reference columns
    Table2,
    /// Low-temperature series at m = ω = λ = 1, T in (0, 1]
    Fig1,
    /// F0 and F4 for T in [1, 50] at z = 0.2, 1, 10, 30, 50
    Fig2,
    /// Pure quartic oscillator (ω = 0) over β in [0.5, 50]
    Fig3,
    /// One parameter point
    Point,
    /// Cartesian product of comma-separated parameter lists
    Sweep,
    /// Closed-form corrections against diagram quadrature at one point
    OracleCheck,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, clap::Args)]
struct Opts {
    /// Quartic coupling λ (list for sweep)
    #[arg(long, global = true, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// Harmonic frequency ω (list for sweep)
    #[arg(long, global = true, value_delimiter = ',')]
    omega: Vec<f64>,
    /// Mass m (list for sweep)
    #[arg(long, global = true, value_delimiter = ',')]
    mass: Vec<f64>,
    /// Inverse temperature β (list for sweep)
    #[arg(long, global = true, value_delimiter = ',', conflicts_with = "temp")]
    beta: Vec<f64>,
    /// Temperature T = 1/β (list for sweep)
    #[arg(long, global = true, value_delimiter = ',')]
    temp: Vec<f64>,
    /// Rescaled frequency z = ω²/(2λ^(2/3)); requires m = 1
    #[arg(long, global = true, value_delimiter = ',')]
    z: Vec<f64>,
    /// Rescaled temperature T/λ^(1/3); requires m = 1
    #[arg(long, global = true, value_delimiter = ',')]
    t_reduced: Vec<f64>,
    /// Highest order of the expansion: 0, 2, 3 or 4
    #[arg(long, global = true, default_value_t = 4)]
    order: u8,
    /// Add the exact free energy from the diagonalized Hamiltonian
    #[arg(long, global = true)]
    exact: bool,
    /// Add diagram quadrature of each correction
    #[arg(long, global = true)]
    quad: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance of closed-form vs quadrature comparisons, and
    /// absolute convergence tolerance of the exact free energy
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Points per figure curve
    #[arg(long, global = true, default_value_t = 20)]
    resolution: usize,
    /// Disable data parallelism
    #[arg(long, global = true)]
    sequential: bool,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidRequest(msg.into())
}

fn single(name: &str, values: &[f64]) -> Result<Option<f64>, Error> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(invalid(format!("--{name} takes a single value here"))),
    }
}

fn betas(opts: &Opts) -> Vec<f64> {
    if opts.temp.is_empty() {
        opts.beta.clone()
    } else {
        opts.temp.iter().map(|t| 1.0 / t).collect()
    }
}

/// Parameter grid from the flags; `default` is used when no parameter flag
/// is given at all.
fn grid(opts: &Opts, default: Option<PointSpec>) -> Result<Vec<PointSpec>, Error> {
    for t in &opts.temp {
        if !(t.is_finite() && *t > 0.0) {
            return Err(invalid(format!("--temp must be positive, got {t}")));
        }
    }
    let rescaled = !opts.z.is_empty() || !opts.t_reduced.is_empty();
    let physical = !opts.omega.is_empty() || !opts.beta.is_empty() || !opts.temp.is_empty();
    let any = rescaled || physical || !opts.lambda.is_empty() || !opts.mass.is_empty();
    if !any {
        return default.map(|d| vec![d]).ok_or_else(|| invalid("no parameters given"));
    }
    let lambda = if opts.lambda.is_empty() { vec![1.0] } else { opts.lambda.clone() };
    if rescaled {
        if physical {
            return Err(invalid("use either --z/--t-reduced or --omega/--beta/--temp, not both"));
        }
        if opts.z.is_empty() || opts.t_reduced.is_empty() {
            return Err(invalid("--z and --t-reduced must be given together"));
        }
        if opts.mass.iter().any(|&m| m != 1.0) {
            return Err(invalid("the rescaled parametrization requires --mass 1"));
        }
        return Ok(rescaled_grid(&lambda, &opts.z, &opts.t_reduced));
    }
    let beta = betas(opts);
    if beta.is_empty() {
        return Err(invalid("one of --beta or --temp is required"));
    }
    let mass = if opts.mass.is_empty() { vec![1.0] } else { opts.mass.clone() };
    let omega = if opts.omega.is_empty() { vec![1.0] } else { opts.omega.clone() };
    Ok(physical_grid(&mass, &omega, &lambda, &beta))
}

fn request(cli: &Cli) -> Result<RunRequest, Error> {
    let o = &cli.opts;
    let command = match cli.command {
        Cmd::Table1 => Command::Table1,
        Cmd::Table2 => Command::Table2,
        Cmd::Fig1 => Command::Fig1,
        Cmd::Fig2 => Command::Fig2,
        Cmd::Fig3 => Command::Fig3,
        Cmd::Point => Command::Point,
        Cmd::Sweep => Command::Sweep,
        Cmd::OracleCheck => Command::OracleCheck,
    };
    let mut req = RunRequest::new(command);
    req.max_order = Order::try_from(o.order)?;
    req.format = match o.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
        Format::Table => OutputFormat::Table,
    };
    req.exact = o.exact;
    req.quad = o.quad || command == Command::OracleCheck;
    if let Some(t) = o.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid(format!("--tol must be positive, got {t}")));
        }
        req.tolerances.exact = t;
        req.tolerances.check = Some(t);
    }
    req.grid_resolution = o.resolution;
    req.execution = if o.sequential { Execution::Sequential } else { Execution::Parallel };
    match command {
        Command::Point => {
            for (name, v) in [("lambda", &o.lambda), ("omega", &o.omega), ("mass", &o.mass), ("z", &o.z), ("t-reduced", &o.t_reduced)] {
                single(name, v)?;
            }
            single("beta", &betas(o))?;
            req.grid = grid(o, None)?;
        }
        Command::Sweep => req.grid = grid(o, None)?,
        Command::OracleCheck => {
            let default = PointSpec::Physical(vpt_core::ModelParams { m: 1.0, omega: 1.0, lambda: 1.0, beta: 2.0 });
            req.grid = grid(o, Some(default))?;
            if req.grid.len() != 1 {
                return Err(invalid("oracle-check takes a single point"));
            }
        }
        _ => {}
    }
    Ok(req)
}

fn exit_code(rows: &[ResultRow]) -> u8 {
    if rows.iter().any(|r| r.status != Status::Converged) {
        2
    } else {
        0
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = request(&cli).and_then(|req| {
        let rows = run(&req)?;
        let text = render(&rows, req.format)?;
        Ok((rows, text))
    });
    match result {
        Ok((rows, text)) => {
            if let Err(e) = emit(&text, &cli.opts.out) {
                eprintln!("vpt: cannot write output: {e}");
                return ExitCode::from(1);
            }
            for r in rows.iter().filter(|r| r.status != Status::Converged) {
                eprintln!("vpt: {} row at β = {}: {}", r.status.as_str(), r.beta, r.flags.join("; "));
            }
            ExitCode::from(exit_code(&rows))
        }
        Err(e) => {
            eprintln!("vpt: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunRequest, Error> {
        let cli = Cli::try_parse_from(std::iter::once("vpt").chain(args.iter().copied())).unwrap();
        request(&cli)
    }

    #[test]
    fn temperature_becomes_beta() {
        let req = parse(&["point", "--lambda", "1", "--temp", "0.2"]).unwrap();
        match req.grid[0] {
            PointSpec::Physical(p) => assert!((p.beta - 5.0).abs() < 1e-15),
            _ => panic!("expected physical point"),
        }
    }

    #[test]
    fn sweep_builds_cartesian_product() {
        let req = parse(&["sweep", "--lambda", "1,2", "--beta", "1,2,3"]).unwrap();
        assert_eq!(req.grid.len(), 6);
        let req = parse(&["sweep", "--z", "1,10", "--t-reduced", "1,2"]).unwrap();
        assert_eq!(req.grid.len(), 4);
    }

    #[test]
    fn mixed_parametrizations_are_rejected() {
        assert!(parse(&["point", "--z", "1", "--t-reduced", "1", "--beta", "2"]).is_err());
        assert!(parse(&["point", "--z", "1"]).is_err());
        assert!(parse(&["point", "--z", "1", "--t-reduced", "1", "--mass", "2"]).is_err());
        assert!(parse(&["point", "--lambda", "1,2", "--beta", "1"]).is_err());
        assert!(parse(&["point", "--lambda", "1"]).is_err());
    }

    #[test]
    fn order_and_tolerance_are_validated() {
        assert!(parse(&["point", "--beta", "1", "--order", "1"]).is_err());
        assert!(parse(&["point", "--beta", "1", "--tol=-1"]).is_err());
        let req = parse(&["oracle-check"]).unwrap();
        assert!(req.quad);
        assert_eq!(req.grid.len(), 1);
    }
}
