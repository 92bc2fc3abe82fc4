//! `polychord`: chord length densities of polygons from the command line.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polychord::curve::{moments, Engine, GridSpec};
use polychord::decomp::{plan_json, AnyModel};
use polychord::fixtures::{self, PolygonFile};
use polychord::geom::Polygon;
use polychord::{curve, mc, Error};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "polychord", version, about = "Multi-chord length densities of polygons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a density curve or Monte Carlo histogram for one polygon.
    Run(RunArgs),
    /// Write the reference polygons as JSON files.
    Fixtures {
        /// Output directory.
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Analytic,
    Bounds,
    Riemann,
    Semianalytic,
    Montecarlo,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Polygon JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Defaults to analytic for convex input and bounds for concave input.
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    /// `MIN:MAX:N` or `auto`. For Monte Carlo, the edges of the bins.
    #[arg(long, default_value = "auto")]
    grid: String,
    #[arg(long, default_value_t = 1000)]
    bounds_n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    mc_lines: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Divide by the total measure.
    #[arg(long)]
    normalize: bool,
    /// CSV path; the sidecar goes next to it with a `.json` extension.
    #[arg(long)]
    output: PathBuf,
    /// Also write the decomposition plan as JSON.
    #[arg(long)]
    emit_plan: Option<PathBuf>,
}

/// Bins used by Monte Carlo runs on the `auto` grid.
const AUTO_BINS: usize = 64;

#[derive(Debug)]
enum Failure {
    Parse(String),
    Validate(String),
    Engine(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Validate(_) => 2,
            Failure::Engine(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Parse(_) => "parse",
            Failure::Validate(_) => "validate",
            Failure::Engine(_) => "engine",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Validate(m) | Failure::Engine(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::SelfIntersecting { .. }
            | Error::HoleOutsideOuter { .. }
            | Error::TooFewVertices { .. }
            | Error::DegenerateInput(_)
            | Error::DegenerateSegment
            | Error::InvalidGrid(_)
            | Error::InvalidConfig(_) => Failure::Validate(msg),
            _ => Failure::Engine(msg),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    code: u8,
    message: &'a str,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&Failure::Parse(e.to_string().trim_end().to_owned())),
    };
    let out = match cli.command {
        Command::Run(args) => run(&args),
        Command::Fixtures { dir } => write_fixtures(&dir),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}

fn report(f: &Failure) -> ExitCode {
    let rec = ErrorRecord {
        error: f.kind(),
        code: f.code(),
        message: f.message(),
    };
    eprintln!("{}", serde_json::to_string(&rec).expect("error record serializes"));
    ExitCode::from(f.code())
}

fn load_polygon(path: &Path) -> Result<Polygon, Failure> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file: PolygonFile =
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok(file.polygon()?)
}

fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("json")
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Malformed grids are parse errors, well-formed but unusable ones are
/// validation errors.
fn parse_grid(s: &str) -> Result<GridSpec, Failure> {
    s.parse().map_err(|e: Error| {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let well_formed = matches!(parts.as_slice(),
            [a, b, n] if a.parse::<f64>().is_ok() && b.parse::<f64>().is_ok() && n.parse::<usize>().is_ok());
        if well_formed {
            Failure::Validate(e.to_string())
        } else {
            Failure::Parse(e.to_string())
        }
    })
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let grid = parse_grid(&args.grid)?;
    let poly = load_polygon(&args.input)?;
    if let Some(path) = &args.emit_plan {
        write(path, plan_json(&poly)?)?;
    }
    let engine = match args.engine {
        None if poly.is_convex() => Engine::Analytic,
        None => Engine::Bounds { n: args.bounds_n },
        Some(EngineArg::Analytic) => Engine::Analytic,
        Some(EngineArg::Bounds) => Engine::Bounds { n: args.bounds_n },
        Some(EngineArg::Riemann) => Engine::Riemann,
        Some(EngineArg::Semianalytic) => Engine::SemiAnalytic,
        Some(EngineArg::Montecarlo) => return run_monte_carlo(args, &poly, &grid),
    };
    if let Engine::Bounds { n: 0 } = engine {
        return Err(Failure::Validate("--bounds-n must be positive".into()));
    }
    let model = AnyModel::new(&poly, engine)?;
    let mut c = curve::sample_model(&model, &grid)?;
    if args.normalize {
        c.normalize(moments(&model).0)?;
    }
    let mut csv = Vec::new();
    c.write_csv(&mut csv).map_err(io_err(&args.output))?;
    write(&args.output, csv)?;
    write(&sidecar_path(&args.output), c.sidecar_json())
}

fn run_monte_carlo(args: &RunArgs, poly: &Polygon, grid: &GridSpec) -> Result<(), Failure> {
    if args.mc_lines == 0 {
        return Err(Failure::Validate("--mc-lines must be positive".into()));
    }
    let edges = match grid {
        GridSpec::Range { min, max, points } => mc::uniform_edges(*min, *max, points - 1),
        GridSpec::Explicit(v) => v.clone(),
        GridSpec::Auto { .. } => mc::uniform_edges(0.0, poly.diameter(), AUTO_BINS),
    };
    let mut h = mc::monte_carlo(poly, args.mc_lines, args.seed, &edges)?;
    if args.normalize {
        h.normalize()?;
    }
    let mut csv = Vec::new();
    h.write_csv(&mut csv).map_err(io_err(&args.output))?;
    write(&args.output, csv)?;
    write(&sidecar_path(&args.output), h.sidecar_json())
}

fn write_fixtures(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for fx in fixtures::all() {
        let text = serde_json::to_string_pretty(&fx.file()).expect("polygon files serialize");
        write(&dir.join(format!("{}.json", fx.name)), text + "\n")?;
    }
    Ok(())
}
