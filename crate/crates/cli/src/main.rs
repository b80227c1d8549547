//! `cnormals`: censuses, focal sets, normal walks and excess checks from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 query point is not a
//! Morse point, 3 normal not certified regular, 4 a verification found no
//! witness (or the doubling check failed).

use clap::{Args, Parser, Subcommand};
use concurrent_normals::export::{planar_svg, write_census_csv, write_focal_csv};
use concurrent_normals::geometry::{builtin, BUILTIN_NAMES};
use concurrent_normals::walk::{excess_report, PartOutcome};
use concurrent_normals::{
    find_critical_points, focal_cloud, verify_doubling, walk, Error, ExecMode, ImmersionSpec, Manifest,
    NormalLine, SolverConfig, WalkConfig, VERSION,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "cnormals", version, about = "Concurrent normals of immersed manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Random seed, used to draw a base point when `--base` is omitted.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Run every loop sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the builtin manifolds.
    Examples,
    /// Critical points of the squared distance from a query point.
    Census {
        #[command(flatten)]
        manifold: ManifoldArgs,
        /// Query point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Also write the critical points as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Focal point cloud over a chart grid.
    Focal {
        #[command(flatten)]
        manifold: ManifoldArgs,
        /// Grid samples per chart axis.
        #[arg(long, default_value_t = 512)]
        samples: usize,
        /// Normal directions per point in codimension >= 2.
        #[arg(long, default_value_t = 8)]
        directions: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Curve and evolute picture (planar curves only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Walk one normal line and report its events.
    Walk {
        #[command(flatten)]
        manifold: ManifoldArgs,
        #[command(flatten)]
        normal: NormalArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Walk one normal and check the excess statements along it.
    Verify {
        #[command(flatten)]
        manifold: ManifoldArgs,
        #[command(flatten)]
        normal: NormalArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Doubling check for the tube over a closed space curve.
    Tube {
        /// Builtin name of the core curve.
        #[arg(long)]
        child: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        child_params: Vec<f64>,
        /// Tube radius.
        #[arg(long)]
        r: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct ManifoldArgs {
    /// Builtin manifold name (see `examples`).
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    builtin: Option<String>,
    /// Builtin parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    /// JSON manifest file.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct NormalArgs {
    /// Base point in the primary chart; drawn from `--seed` when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    base: Option<Vec<f64>>,
    /// Angle selecting the normal in the normal plane (codimension >= 2).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    normal_angle: f64,
    /// Walk even when the normal is not certified regular.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SolverArgs {
    /// Newton seeds per chart axis.
    #[arg(long)]
    seeds: Option<usize>,
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonMorsePoint(_) => 2,
            Error::RegularityRequired(_) => 3,
            Error::WitnessNotFound(_) | Error::PairingFailure(_) => 4,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = configure_threads(n) {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    Ok(())
}

fn exec_mode(cli: &Cli) -> ExecMode {
    if cli.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn solver_config(cli: &Cli, args: &SolverArgs) -> Result<SolverConfig, Failure> {
    if args.seeds == Some(0) {
        return Err(usage("--seeds must be positive"));
    }
    Ok(SolverConfig {
        seeds_per_axis: args.seeds,
        exec: exec_mode(cli),
        ..SolverConfig::default()
    })
}

fn load(args: &ManifoldArgs) -> Result<(Manifest, ImmersionSpec), Failure> {
    let manifest = match (&args.builtin, &args.manifest) {
        (Some(name), None) => Manifest::builtin(name, &args.params),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read manifest {}: {e}", path.display())))?;
            Manifest::from_json(&text)?
        }
        _ => return Err(usage("give exactly one of --builtin and --manifest")),
    };
    let spec = manifest.instantiate()?;
    Ok((manifest, spec))
}

/// Wraps a result with the tool name, version and the effective config.
fn envelope(cli: &Cli, command: &str, config: Value, result: impl Serialize) -> Result<Value, Failure> {
    let result = serde_json::to_value(result).map_err(|e| usage(format!("serialization: {e}")))?;
    Ok(json!({
        "tool": "cnormals",
        "version": VERSION,
        "command": command,
        "config": {
            "seed": cli.seed,
            "exec": exec_mode(cli),
            "command": config,
        },
        "result": result,
    }))
}

fn emit(cli: &Cli, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| usage(format!("serialization: {e}")))?;
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Examples => cmd_examples(cli),
        Command::Census { manifold, y, solver, csv } => cmd_census(cli, manifold, y, solver, csv.as_deref()),
        Command::Focal {
            manifold,
            samples,
            directions,
            csv,
            svg,
        } => cmd_focal(cli, manifold, *samples, *directions, csv.as_deref(), svg.as_deref()),
        Command::Walk { manifold, normal, solver } => cmd_walk(cli, manifold, normal, solver),
        Command::Verify { manifold, normal, solver } => cmd_verify(cli, manifold, normal, solver),
        Command::Tube {
            child,
            child_params,
            r,
            y,
            solver,
        } => cmd_tube(cli, child, child_params, *r, y, solver),
    }
}

fn cmd_examples(cli: &Cli) -> Outcome {
    let defaults: &[(&str, &[f64], &str)] = &[
        ("circle2d", &[1.0], "circle of radius r in the plane"),
        ("ellipse2d", &[2.0, 1.0], "ellipse with semi-axes a, b in the plane"),
        ("circle3d", &[2.0], "circle of radius r in the plane z = 0 of R^3"),
        ("ellipse3d", &[2.0, 1.0], "ellipse with semi-axes a, b in the plane z = 0 of R^3"),
        ("sphere", &[1.0], "round sphere of radius r"),
        ("ellipsoid", &[3.0, 2.0, 1.0], "ellipsoid with semi-axes a, b, c"),
        ("torus", &[2.0, 1.0], "torus of revolution with radii R > r"),
        ("graph2d", &[1.0, 2.0], "graph of (a x^2 + b y^2)/2 over the unit square, with boundary"),
    ];
    let mut list = Vec::new();
    for name in BUILTIN_NAMES {
        if let Some((_, params, about)) = defaults.iter().find(|d| d.0 == *name) {
            let spec = builtin(name, params)?;
            list.push(json!({
                "name": name,
                "example_params": params,
                "about": about,
                "m": spec.m(),
                "n": spec.n(),
                "betti": spec.betti(),
                "closed": spec.is_closed(),
            }));
        } else {
            list.push(json!({
                "name": name,
                "about": "tube of radius r over a closed curve in R^3: {\"name\": \"tube\", \"child\": {...}, \"r\": r}",
            }));
        }
    }
    emit(cli, &envelope(cli, "examples", json!({}), list)?)?;
    Ok(0)
}

fn cmd_census(cli: &Cli, manifold: &ManifoldArgs, y: &[f64], solver: &SolverArgs, csv: Option<&Path>) -> Outcome {
    let (manifest, spec) = load(manifold)?;
    let cfg = solver_config(cli, solver)?;
    let census = find_critical_points(&spec, y, &cfg)?;
    if let Some(path) = csv {
        write_census_csv(&census, create(path)?)?;
    }
    let config = json!({"manifest": manifest, "y": y, "solver": cfg});
    emit(cli, &envelope(cli, "census", config, &census)?)?;
    Ok(0)
}

fn cmd_focal(
    cli: &Cli,
    manifold: &ManifoldArgs,
    samples: usize,
    directions: usize,
    csv: Option<&Path>,
    svg: Option<&Path>,
) -> Outcome {
    if samples == 0 || directions == 0 {
        return Err(usage("--samples and --directions must be positive"));
    }
    let (manifest, spec) = load(manifold)?;
    let cloud = focal_cloud(&spec, samples, directions, exec_mode(cli))?;
    if let Some(path) = csv {
        write_focal_csv(&cloud, spec.n(), create(path)?)?;
    }
    if let Some(path) = svg {
        let picture = planar_svg(&spec, samples)?;
        std::fs::write(path, picture)?;
    }
    let config = json!({"manifest": manifest, "samples": samples, "directions": directions});
    emit(cli, &envelope(cli, "focal", config, &cloud)?)?;
    Ok(0)
}

fn normal_line(cli: &Cli, spec: &ImmersionSpec, args: &NormalArgs) -> Result<NormalLine, Failure> {
    let base = match &args.base {
        Some(b) => b.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            spec.primary()
                .axes()
                .iter()
                .map(|a| {
                    let margin = if a.periodic { 0.0 } else { 0.1 * a.length() };
                    rng.gen_range(a.lo + margin..a.hi - margin)
                })
                .collect()
        }
    };
    if base.len() != spec.m() {
        return Err(usage(format!("--base needs {} coordinate(s), got {}", spec.m(), base.len())));
    }
    Ok(NormalLine::from_frame(spec, &base, args.normal_angle)?)
}

fn walk_config(cli: &Cli, normal: &NormalArgs, solver: &SolverArgs) -> Result<WalkConfig, Failure> {
    Ok(WalkConfig {
        solver: solver_config(cli, solver)?,
        force: normal.force,
        ..WalkConfig::default()
    })
}

fn cmd_walk(cli: &Cli, manifold: &ManifoldArgs, normal: &NormalArgs, solver: &SolverArgs) -> Outcome {
    let (manifest, spec) = load(manifold)?;
    let line = normal_line(cli, &spec, normal)?;
    let cfg = walk_config(cli, normal, solver)?;
    let report = walk(&spec, &line, &cfg)?;
    let config = json!({"manifest": manifest, "normal": normal, "walk": cfg});
    emit(cli, &envelope(cli, "walk", config, &report)?)?;
    Ok(0)
}

fn part_line(name: &str, part: &PartOutcome) -> String {
    match part {
        PartOutcome::Pass { witness } => format!(
            "{name} PASS (witness count {} excess {} at t = {:.6})",
            witness.count, witness.excess, witness.t
        ),
        PartOutcome::Fail { detail, .. } => format!("{name} FAIL ({detail})"),
        PartOutcome::NotApplicable { reason } => format!("{name} N/A ({reason})"),
    }
}

fn cmd_verify(cli: &Cli, manifold: &ManifoldArgs, normal: &NormalArgs, solver: &SolverArgs) -> Outcome {
    let (manifest, spec) = load(manifold)?;
    let line = normal_line(cli, &spec, normal)?;
    let cfg = walk_config(cli, normal, solver)?;
    let report = excess_report(&spec, &line, &cfg)?;
    eprintln!("regularity {:?}", report.walk.regularity.overall);
    eprintln!("{}", part_line("part1", &report.part1));
    eprintln!("{}", part_line("part2", &report.part2));
    let config = json!({"manifest": manifest, "normal": normal, "walk": cfg});
    emit(cli, &envelope(cli, "verify", config, &report)?)?;
    Ok(if report.passed() { 0 } else { 4 })
}

fn cmd_tube(cli: &Cli, child: &str, child_params: &[f64], r: f64, y: &[f64], solver: &SolverArgs) -> Outcome {
    let core = builtin(child, child_params)?;
    let cfg = solver_config(cli, solver)?;
    let report = verify_doubling(&core, r, y, &cfg)?;
    eprintln!(
        "doubling {} ({} -> {}, excess {} -> {})",
        if report.passed { "PASS" } else { "FAIL" },
        report.child.count(),
        report.tube.count(),
        report.child_excess,
        report.tube_excess
    );
    let config = json!({
        "manifest": Manifest::tube(Manifest::builtin(child, child_params), r),
        "y": y,
        "solver": cfg,
    });
    emit(cli, &envelope(cli, "tube", config, &report)?)?;
    Ok(if report.passed { 0 } else { 4 })
}
