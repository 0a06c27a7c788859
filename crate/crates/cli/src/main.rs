//! `cubicdyn`: command-line front end to `cubic-core`.

mod commands;
mod input;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use cubic_core::counting::{SolverConfig, Space};
use cubic_core::lines::DEFAULT_LINE_TOL;
use cubic_core::params::{kappa_to_eigen, rh_params, EigenParams, KappaPoint, ThetaPoint, DEFAULT_WALL_TOL};
use cubic_core::surface::{GroupWord, DEFAULT_ESCAPE_RADIUS, DEFAULT_SURFACE_TOL};
use cubic_core::Complex64;

use commands::Start;

/// A malformed invocation; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Parser, Debug)]
#[command(name = "cubicdyn", version, about = "Dynamics and periodic-point counts on the cubic surface S(θ)")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// File of `key = value` lines supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    rng: u64,
    /// Raise log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// κ → traces a, eigenvalue parameters b, θ, and the wall test.
    Params(ParamsArgs),
    /// Discriminant of the surface for κ or b.
    Disc(DiscArgs),
    /// Pull-back matrices, characteristic polynomial and eigenvector checks.
    Lattice(LatticeArgs),
    /// The 27 lines on the compactified surface, with verification.
    Lines(LinesArgs),
    /// Iterate a word in the involutions and braid maps from a point.
    Orbit(OrbitArgs),
    /// Closed-form number of points of period N on the surface.
    Count(CountArgs),
    /// Closed-form number of points of period N in the Painlevé phase space.
    CountKappa(CountKappaArgs),
    /// Coefficients of the dynamical zeta function.
    Zeta(ZetaArgs),
    /// Find the points of period N numerically.
    Solve(SolveArgs),
    /// Check the exact count identities for N = 1..=nmax.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ParamsArgs {
    /// κ1..κ4 (or κ0..κ4) as rationals, decimals or complex numbers.
    #[arg(long, value_parser = input::parse_kappa)]
    kappa: KappaPoint,
    /// Residual below which a float κ counts as on a wall.
    #[arg(long, default_value_t = DEFAULT_WALL_TOL)]
    wall_tol: f64,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct DiscArgs {
    #[arg(long, value_parser = input::parse_kappa)]
    kappa: Option<KappaPoint>,
    /// b1..b4 directly.
    #[arg(long, value_parser = input::parse_theta)]
    b: Option<[Complex64; 4]>,
}

#[derive(Args, Debug)]
struct LatticeArgs {
    /// Print only the characteristic polynomial of c*.
    #[arg(long)]
    charpoly: bool,
    /// Restrict the dump to one of sigma1, sigma2, sigma3, coxeter.
    #[arg(long)]
    matrix: Option<String>,
}

#[derive(Args, Debug)]
struct LinesArgs {
    #[arg(long, value_parser = input::parse_kappa)]
    kappa: KappaPoint,
    /// Scaled residual below which a line counts as on the surface.
    #[arg(long, default_value_t = DEFAULT_LINE_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[arg(long, value_parser = input::parse_kappa, conflicts_with = "theta", required_unless_present = "theta")]
    kappa: Option<KappaPoint>,
    #[arg(long, value_parser = input::parse_theta)]
    theta: Option<[Complex64; 4]>,
    /// Starting point (x1, x2, x3).
    #[arg(long, value_parser = input::parse_point, conflicts_with = "lift", required_unless_present = "lift")]
    x: Option<[Complex64; 3]>,
    /// Start on the surface above (x2, x3).
    #[arg(long, value_parser = input::parse_pair)]
    lift: Option<[Complex64; 2]>,
    /// Take the other root when lifting.
    #[arg(long, requires = "lift")]
    other_root: bool,
    /// Word applied each step; rightmost letter acts first.
    #[arg(long, default_value = "c")]
    word: String,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_ESCAPE_RADIUS)]
    escape_radius: f64,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long = "N")]
    n: u32,
    #[arg(long, default_value = "affine")]
    space: Space,
}

#[derive(Args, Debug)]
struct CountKappaArgs {
    #[arg(long = "N")]
    n: u32,
}

#[derive(Args, Debug)]
struct ZetaArgs {
    #[arg(long, default_value_t = 12)]
    order: usize,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// κ; refused when it lies on a wall.
    #[arg(long, value_parser = input::parse_kappa, conflicts_with = "theta", required_unless_present = "theta")]
    kappa: Option<KappaPoint>,
    /// θ1..θ4 directly.
    #[arg(long, value_parser = input::parse_theta)]
    theta: Option<[Complex64; 4]>,
    #[arg(long = "N")]
    n: u32,
    /// Number of starts (default 20000 for N ≤ 2, 200000 beyond).
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, default_value_t = 100)]
    newton_max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    newton_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    dedup_radius: f64,
    #[arg(long, default_value_t = DEFAULT_SURFACE_TOL)]
    surface_tol: f64,
    #[arg(long, default_value_t = 5)]
    saturation_batches: usize,
    #[arg(long, default_value_t = 10)]
    batches: usize,
    #[arg(long, default_value_t = DEFAULT_ESCAPE_RADIUS)]
    escape_radius: f64,
    #[arg(long, default_value_t = 3.0)]
    seed_radius: f64,
    #[arg(long, default_value_t = DEFAULT_WALL_TOL)]
    wall_tol: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20)]
    nmax: u32,
}

/// Parses argv, then re-parses with config entries appended for every flag
/// the command line left at its default.
fn parse_cli(args: Vec<OsString>) -> Result<Cli> {
    let cmd = Cli::command();
    let has_config = args
        .iter()
        .any(|a| a.to_str().is_some_and(|s| s == "--config" || s.starts_with("--config=")));
    if !has_config {
        let matches = cmd.try_get_matches_from(&args).unwrap_or_else(|e| e.exit());
        return Ok(Cli::from_arg_matches(&matches)?);
    }
    // required flags may come from the file, so the first pass is lenient
    let matches = cmd
        .clone()
        .ignore_errors(true)
        .try_get_matches_from(&args)
        .unwrap_or_else(|e| e.exit());
    let path = matches
        .get_one::<PathBuf>("config")
        .cloned()
        .ok_or_else(|| Usage("--config needs a path".into()))?;
    let entries = input::read_config(&path).map_err(|e| Usage(format!("{e:#}")))?;
    let (name, sub_matches) = matches
        .subcommand()
        .ok_or_else(|| Usage("a subcommand is required".into()))?;
    let sub = cmd.find_subcommand(name).expect("matched subcommand exists");
    let from_cli = |m: &ArgMatches, id: &str| {
        m.try_contains_id(id).unwrap_or(false) && m.value_source(id) == Some(ValueSource::CommandLine)
    };
    let mut extended = args;
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let (arg, global) = match sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) {
            Some(a) => (a, false),
            None => match cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str())) {
                Some(a) => (a, true),
                None => return Err(Usage(format!("unknown config key '{key}' for '{name}'")).into()),
            },
        };
        let id = arg.get_id().as_str();
        if from_cli(sub_matches, id) || (global && from_cli(&matches, id)) {
            continue;
        }
        if arg.get_action().takes_values() {
            extended.push(format!("--{key}").into());
            extended.push(value.into());
        } else {
            let on: bool = value
                .parse()
                .map_err(|_| Usage(format!("config key '{key}' expects true or false")))?;
            if on {
                extended.push(format!("--{key}").into());
            }
        }
    }
    let matches = cmd.try_get_matches_from(&extended).unwrap_or_else(|e| e.exit());
    Ok(Cli::from_arg_matches(&matches)?)
}

fn surface_of(kappa: Option<&KappaPoint>, theta: Option<[Complex64; 4]>) -> ThetaPoint {
    match (kappa, theta) {
        (Some(k), _) => rh_params(k),
        (None, Some(t)) => ThetaPoint(t),
        (None, None) => unreachable!("clap requires one of --kappa, --theta"),
    }
}

fn run(cli: Cli) -> Result<commands::Outcome> {
    let fmt = cli.output;
    match cli.command {
        Command::Params(a) => commands::params(&a.kappa, a.wall_tol, fmt),
        Command::Disc(a) => {
            let b = match (a.kappa, a.b) {
                (Some(k), _) => kappa_to_eigen(&k),
                (None, Some(b)) => EigenParams::new(b)?,
                (None, None) => unreachable!("clap requires one of --kappa, --b"),
            };
            commands::disc(&b, fmt)
        }
        Command::Lattice(a) => commands::lattice(a.charpoly, a.matrix.as_deref(), fmt),
        Command::Lines(a) => commands::lines(&a.kappa, a.tol, fmt),
        Command::Orbit(a) => {
            let theta = surface_of(a.kappa.as_ref(), a.theta);
            let word: GroupWord = a.word.parse().map_err(|e| Usage(format!("{e}")))?;
            let start = match (a.x, a.lift) {
                (Some(p), _) => Start::Point(p),
                (None, Some([x2, x3])) => Start::Lift { x2, x3, branch: !a.other_root },
                (None, None) => unreachable!("clap requires one of --x, --lift"),
            };
            commands::orbit(&theta, start, &word, a.steps, a.escape_radius, fmt)
        }
        Command::Count(a) => commands::count(a.n, a.space, fmt),
        Command::CountKappa(a) => commands::count_kappa(a.n, fmt),
        Command::Zeta(a) => commands::zeta(a.order, fmt),
        Command::Solve(a) => {
            let mut b = None;
            if let Some(k) = &a.kappa {
                let (wall, mode) = commands::wall_report(k, a.wall_tol)?;
                if wall.on_wall {
                    anyhow::bail!("κ lies on a wall ({mode} test); the surface is singular there");
                }
                b = Some(kappa_to_eigen(k));
            }
            let theta = surface_of(a.kappa.as_ref(), a.theta);
            let cfg = SolverConfig {
                seeds: a.seeds.unwrap_or_else(|| SolverConfig::for_period(a.n).seeds),
                rng_seed: cli.rng,
                newton_max_iter: a.newton_max_iter,
                newton_tol: a.newton_tol,
                dedup_radius: a.dedup_radius,
                surface_tol: a.surface_tol,
                saturation_batches: a.saturation_batches,
                batches: a.batches,
                escape_radius: a.escape_radius,
                seed_radius: a.seed_radius,
            };
            commands::solve(&theta, a.n, &cfg, b.as_ref(), fmt)
        }
        Command::Verify(a) => commands::verify(a.nmax, fmt),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<cubic_core::Error>() {
        Some(cubic_core::Error::InvalidArgument(_) | cubic_core::Error::Parse(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match parse_cli(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{}", out.text) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
