//! spectrakit command-line interface.
//!
//! Exit codes: 0 success, 1 numerical refusal (aliasing, instability, fit
//! failure), 2 configuration error, 3 validation failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use spectrakit::quadgrid::SpatialGrid;
use spectrakit::spectral_pde::{compare_solutions, crank_nicolson_reference, heat_evolve, CnConfig};
use spectrakit::sturm_liouville::{
    build_numeric_transform, find_discrete_eigenvalues, BoundarySpec, ShootingConfig,
};
use spectrakit::validation::{standard_report, Tolerances};
use spectrakit::{
    forward, make_cosine, make_robin, make_sine, make_spatial_grid, make_spectral_grid,
    make_weber, DegenerateTransform, SampledFunction, SpectraError, TestFunctionSpec,
};

#[derive(Parser)]
#[command(name = "spectrakit", version, about = "Degenerate spectral transforms on the half-line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward-transform a test function and emit (s, fhat, weight) samples.
    Transform(TransformArgs),
    /// Solve the heat evolution spectrally, optionally cross-checking
    /// against a Crank-Nicolson finite-difference solution.
    Heat(HeatArgs),
    /// Run the certification battery (Parseval, roundtrip, annihilation,
    /// orthogonality, diagonalization, decay).
    Validate(ValidateArgs),
    /// Build a transform numerically from a Sturm-Liouville problem and
    /// report its discrete eigenvalues and weight samples.
    Sl(SlArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Sine,
    Cosine,
    Robin,
    Weber,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Transform kind.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Robin boundary parameter (kind = robin).
    #[arg(long)]
    a: Option<f64>,
    /// Bessel order (kind = weber).
    #[arg(long)]
    k: Option<u32>,
    /// Inner radius (kind = weber).
    #[arg(long)]
    r0: Option<f64>,
    /// Test function, e.g. gaussian:4,0.7 | bump:4,1.5 | expdecay:1 | powerdecay:2
    #[arg(long)]
    f: Option<String>,
    /// Spatial truncation radius.
    #[arg(long)]
    xmax: Option<f64>,
    /// Number of spatial quadrature panels (default sized from smax).
    #[arg(long)]
    nx: Option<usize>,
    /// Spectral truncation frequency.
    #[arg(long)]
    smax: Option<f64>,
    /// Number of spectral quadrature panels.
    #[arg(long)]
    ns: Option<usize>,
    /// JSON config file providing defaults for the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (CSV for sample data, JSON for reports); stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct HeatArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Evolution time.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Finite-difference time step for the cross-check.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Also run the Crank-Nicolson reference and report the discrepancy.
    #[arg(long)]
    compare_fd: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Emit CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct SlArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Boundary condition: dirichlet | neumann | robin (uses --a).
    #[arg(long, default_value = "dirichlet")]
    bc: String,
    /// Potential: zero | well:DEPTH,WIDTH (q = -DEPTH on [0, WIDTH]).
    #[arg(long, default_value = "zero")]
    q: String,
    /// Upper end of the eigenvalue search interval.
    #[arg(long, default_value_t = 40.0)]
    lambda_max: f64,
}

/// Defaults loadable from --config; command-line flags win.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    kind: Option<String>,
    a: Option<f64>,
    k: Option<u32>,
    r0: Option<f64>,
    f: Option<String>,
    xmax: Option<f64>,
    nx: Option<usize>,
    smax: Option<f64>,
    ns: Option<usize>,
}

struct Resolved {
    transform: DegenerateTransform,
    spec: TestFunctionSpec,
    xmax: f64,
    nx: Option<usize>,
    smax: f64,
    ns: usize,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(SpectraError),
    Validation,
    Io(std::io::Error),
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::AliasingRefused { .. }
            | SpectraError::Instability(_)
            | SpectraError::FitFailure(_) => CliError::Numerical(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn parse_spec(text: &str) -> Result<TestFunctionSpec, CliError> {
    let (name, params) = text.split_once(':').unwrap_or((text, ""));
    let nums: Vec<f64> = if params.is_empty() {
        vec![]
    } else {
        params
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Config(format!("bad number '{p}' in --f: {e}")))
            })
            .collect::<Result<_, _>>()?
    };
    let need = |n: usize| -> Result<(), CliError> {
        if nums.len() == n {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "function '{name}' expects {n} parameter(s), got {}",
                nums.len()
            )))
        }
    };
    match name {
        "gaussian" => {
            need(2)?;
            Ok(TestFunctionSpec::Gaussian { center: nums[0], width: nums[1] })
        }
        "bump" => {
            need(2)?;
            Ok(TestFunctionSpec::SmoothBump { center: nums[0], halfwidth: nums[1] })
        }
        "expdecay" => {
            need(1)?;
            Ok(TestFunctionSpec::ExpDecay { rate: nums[0] })
        }
        "powerdecay" => {
            need(1)?;
            Ok(TestFunctionSpec::PowerDecay { exponent: nums[0] })
        }
        other => Err(CliError::Config(format!(
            "unknown test function '{other}' (expected gaussian|bump|expdecay|powerdecay)"
        ))),
    }
}

fn resolve(common: &CommonArgs) -> Result<Resolved, CliError> {
    let file: FileConfig = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let kind = match common.kind {
        Some(k) => k,
        None => match file.kind.as_deref() {
            Some("sine") => KindArg::Sine,
            Some("cosine") => KindArg::Cosine,
            Some("robin") => KindArg::Robin,
            Some("weber") => KindArg::Weber,
            Some(other) => return Err(CliError::Config(format!("unknown kind '{other}'"))),
            None => return Err(CliError::Config("--kind is required".into())),
        },
    };
    let a = common.a.or(file.a).unwrap_or(1.0);
    let k = common.k.or(file.k).unwrap_or(2);
    let r0 = common.r0.or(file.r0).unwrap_or(1.0);
    let transform = match kind {
        KindArg::Sine => make_sine(),
        KindArg::Cosine => make_cosine(),
        KindArg::Robin => make_robin(a)?,
        KindArg::Weber => make_weber(k, r0)?,
    };
    let default_f = match kind {
        KindArg::Weber => "bump:4,1.5",
        _ => "gaussian:4,0.7",
    };
    let ftext = common
        .f
        .clone()
        .or(file.f)
        .unwrap_or_else(|| default_f.to_string());
    let spec = parse_spec(&ftext)?;
    Ok(Resolved {
        transform,
        spec,
        xmax: common.xmax.or(file.xmax).unwrap_or(40.0),
        nx: common.nx.or(file.nx),
        smax: common.smax.or(file.smax).unwrap_or(40.0),
        ns: common.ns.or(file.ns).unwrap_or(96),
    })
}

fn build_grids(
    r: &Resolved,
) -> Result<(Arc<SpatialGrid>, Arc<spectrakit::SpectralGrid>), CliError> {
    let t = &r.transform;
    let nx = r
        .nx
        .unwrap_or_else(|| SpatialGrid::panels_for(t.x_start, r.xmax, r.smax, 10));
    let xg = Arc::new(make_spatial_grid(
        t.x_start,
        r.xmax,
        nx,
        10,
        t.measure_exponent,
    )?);
    let sg = Arc::new(make_spectral_grid(r.smax, r.ns, 10)?);
    Ok((xg, sg))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_transform(args: &TransformArgs) -> Result<(), CliError> {
    let r = resolve(&args.common)?;
    let (xg, sg) = build_grids(&r)?;
    r.spec
        .validate(xg.x_start, xg.x_trunc)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let f = SampledFunction::from_spec(Arc::clone(&xg), &r.spec);
    let fhat = forward(&r.transform, &f, &sg)?;
    let mut csv = String::from("s,fhat,weight\n");
    for (i, &s) in sg.s_nodes.iter().enumerate() {
        csv.push_str(&format!(
            "{s:.16e},{:.16e},{:.16e}\n",
            fhat.values[i],
            r.transform.spectral_weight(s)
        ));
    }
    emit(&args.common.out, &csv)
}

fn run_heat(args: &HeatArgs) -> Result<(), CliError> {
    let r = resolve(&args.common)?;
    let (xg, sg) = build_grids(&r)?;
    r.spec
        .validate(xg.x_start, xg.x_trunc)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let f = SampledFunction::from_spec(Arc::clone(&xg), &r.spec);
    let sol = heat_evolve(&r.transform, &f, &sg, args.t)?;
    if args.compare_fd {
        let cfg = CnConfig { n: 8000, dt: args.dt, x_far: r.xmax };
        let spec = r.spec;
        let (mesh, fd) = crank_nicolson_reference(&r.transform, &|x| spec.eval(x), args.t, &cfg)?;
        let err = compare_solutions(&sol, &mesh, &fd);
        eprintln!("finite-difference cross-check: relative L2 discrepancy {err:.3e}");
    }
    let mut csv = String::from("x,u,continuous,discrete\n");
    for (i, &x) in xg.nodes.iter().enumerate() {
        csv.push_str(&format!(
            "{x:.16e},{:.16e},{:.16e},{:.16e}\n",
            sol.values[i], sol.continuous_part[i], sol.discrete_part[i]
        ));
    }
    emit(&args.common.out, &csv)
}

fn run_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let r = resolve(&args.common)?;
    let (xg, sg) = build_grids(&r)?;
    let report = standard_report(&r.transform, &xg, &sg, &[r.spec], &Tolerances::default())?;
    let text = if args.csv {
        report.to_csv()
    } else {
        let mut t = report.to_json()?;
        t.push('\n');
        t
    };
    emit(&args.common.out, &text)?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Validation)
    }
}

fn run_sl(args: &SlArgs) -> Result<(), CliError> {
    let a = args.common.a.unwrap_or(1.0);
    let bc = match args.bc.as_str() {
        "dirichlet" => BoundarySpec::Dirichlet,
        "neumann" => BoundarySpec::Neumann,
        "robin" => BoundarySpec::Robin { a },
        other => return Err(CliError::Config(format!("unknown boundary condition '{other}'"))),
    };
    let potential: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match args.q.as_str() {
        "zero" => Arc::new(|_| 0.0),
        text => match text.strip_prefix("well:") {
            Some(params) => {
                let nums: Vec<f64> = params
                    .split(',')
                    .map(|p| {
                        p.trim()
                            .parse::<f64>()
                            .map_err(|e| CliError::Config(format!("bad number in --q: {e}")))
                    })
                    .collect::<Result<_, _>>()?;
                if nums.len() != 2 || nums[1] <= 0.0 {
                    return Err(CliError::Config(
                        "well potential needs well:DEPTH,WIDTH with WIDTH > 0".into(),
                    ));
                }
                let (depth, width) = (nums[0], nums[1]);
                Arc::new(move |x: f64| if x < width { -depth } else { 0.0 })
            }
            None => {
                return Err(CliError::Config(format!(
                    "unknown potential '{text}' (expected zero | well:DEPTH,WIDTH)"
                )))
            }
        },
    };
    let xmax = args.common.xmax.unwrap_or(40.0);
    let smax = args.common.smax.unwrap_or(8.0);
    let ns = args.common.ns.unwrap_or(32);
    let nx = args
        .common
        .nx
        .unwrap_or_else(|| SpatialGrid::panels_for(0.0, xmax, smax, 10));
    let xg = make_spatial_grid(0.0, xmax, nx, 10, 0)?;
    let sg = make_spectral_grid(smax, ns, 10)?;
    let shooting = ShootingConfig { x_max: xmax.min(40.0), lambda_max: args.lambda_max, scan_points: 400 };
    let eigenvalues = find_discrete_eigenvalues(&|x| potential(x), bc, &shooting)?;
    let t = build_numeric_transform(potential, bc, &xg, &sg, &shooting)?;
    let mut csv = String::new();
    csv.push_str("# discrete eigenvalues\n");
    for ev in &eigenvalues {
        csv.push_str(&format!("lambda,{ev:.16e}\n"));
    }
    csv.push_str("s,weight\n");
    for &s in &sg.s_nodes {
        csv.push_str(&format!("{s:.16e},{:.16e}\n", t.spectral_weight(s)));
    }
    emit(&args.common.out, &csv)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SPECTRAKIT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Transform(args) => run_transform(args),
        Command::Heat(args) => run_heat(args),
        Command::Validate(args) => run_validate(args),
        Command::Sl(args) => run_sl(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Numerical(e)) => {
            eprintln!("numerical refusal: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Validation) => {
            eprintln!("validation failed");
            ExitCode::from(3)
        }
    }
}
