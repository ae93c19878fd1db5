//! Command-line driver.
//!
//! Exit status: 0 on success, 1 for invalid input or usage, 2 for numerical
//! failure (unresolved cluster, ambiguous target, failed checks).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fhsim_core::assembly::assemble;
use fhsim_core::linsolve::{dense_generalized_eig, DenseMatrix};
use fhsim_core::sim::{indicator_map, search, SearchWarning};
use fhsim_core::study::{convergence_study, exact_eigenvalue, StudyOptions};
use fhsim_core::{AssembledSystem, CellPattern, Mesh, OperatorFunction, Rect, RegionBox, SimOptions};

use crate::check;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::matrixio::write_matrix;
use crate::meshio::read_mesh;
use crate::report::{indicator_map_csv, Format, StudyReport};

const CONFIG_KEYS: &[&str] = &[
    "nx",
    "region",
    "target",
    "quad-points",
    "threshold",
    "tol",
    "seed",
    "format",
    "out",
    "mesh",
    "dump-matrices",
    "rect",
    "pattern",
    "window-fraction",
    "grid",
];

#[derive(Debug, Parser)]
#[command(name = "fhsim", version, about = "Dirichlet Laplacian eigenvalues by a spectral indicator search")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of one mesh inside one region of the complex plane.
    Solve(SolveArgs),
    /// Convergence table for one exact eigenvalue over a list of meshes.
    Study(StudyArgs),
    /// Full discrete spectrum from the dense reference solver.
    Oracle(OracleArgs),
    /// Indicator values on a grid of boxes, as CSV.
    IndicatorMap(MapArgs),
    /// Projection, equiboundedness and consistency property runs.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// `key=value` settings file; flags override its entries.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Rectangle `x0,x1,y0,y1` (default: unit square).
    #[arg(long, value_name = "X0,X1,Y0,Y1", allow_hyphen_values = true)]
    rect: Option<String>,
    /// Cell triangulation: diagonal, anti-diagonal or criss-cross.
    #[arg(long)]
    pattern: Option<String>,
    /// Write output to PATH instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchFlags {
    /// Quadrature nodes per contour (even, at least 8).
    #[arg(long)]
    quad_points: Option<usize>,
    /// Indicator threshold below which a box is discarded.
    #[arg(long)]
    threshold: Option<f64>,
    /// Absolute box size at which a candidate is emitted.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed of the random probe vector.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    search: SearchFlags,
    /// Cells per side of the uniform mesh.
    #[arg(long)]
    nx: Option<usize>,
    /// Search box `re_min,re_max,im_min,im_max`.
    #[arg(long, value_name = "A,B,C,D", allow_hyphen_values = true)]
    region: Option<String>,
    /// Read the mesh from a file instead of generating one.
    #[arg(long, value_name = "PATH")]
    mesh: Option<PathBuf>,
    /// Write stiffness and mass matrices to PATH.stiffness and PATH.mass.
    #[arg(long, value_name = "PATH")]
    dump_matrices: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    search: SearchFlags,
    /// Comma-separated, strictly increasing cell counts (default 10,20,40,80).
    #[arg(long, value_name = "N,N,...")]
    nx: Option<String>,
    /// Mode `m,n` of the exact eigenvalue (default 1,1).
    #[arg(long, value_name = "M,N")]
    target: Option<String>,
    /// Output format: csv, md or json (default csv).
    #[arg(long)]
    format: Option<String>,
    /// Search window width as a fraction of the spectral gap (default 0.4).
    #[arg(long)]
    window_fraction: Option<f64>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long, value_name = "PATH")]
    mesh: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    dump_matrices: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    search: SearchFlags,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long, value_name = "A,B,C,D", allow_hyphen_values = true)]
    region: Option<String>,
    /// Boxes along the real and imaginary axes (default 32,8).
    #[arg(long, value_name = "NRE,NIM")]
    grid: Option<String>,
    #[arg(long, value_name = "PATH")]
    mesh: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
}

fn numbers<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::usage(format!("invalid {what} `{text}`"))))
        .collect()
}

fn exactly<T: Copy + std::str::FromStr, const N: usize>(text: &str, what: &str) -> Result<[T; N]> {
    let v = numbers::<T>(text, what)?;
    v.try_into().map_err(|_| Error::usage(format!("{what} needs {N} comma-separated values, got `{text}`")))
}

fn parse_pattern(text: &str) -> Result<CellPattern> {
    match text {
        "diagonal" => Ok(CellPattern::Diagonal),
        "anti-diagonal" => Ok(CellPattern::AntiDiagonal),
        "criss-cross" => Ok(CellPattern::CrissCross),
        other => Err(Error::usage(format!("unknown pattern `{other}`"))),
    }
}

/// Settings shared by all subcommands after merging the config file.
struct Context {
    config: Config,
    rect: Rect,
    pattern: CellPattern,
    out: Option<PathBuf>,
}

impl Context {
    fn new(common: &Common) -> Result<Self> {
        let config = match &common.config {
            Some(p) => Config::read(p)?,
            None => Config::default(),
        };
        if let Some((line, key)) = config.unknown_keys(CONFIG_KEYS).first() {
            return Err(Error::parse(*line, format!("unknown setting `{key}`")));
        }
        let rect = match config.pick(common.rect.clone(), "rect")? {
            Some(s) => {
                let [x0, x1, y0, y1] = exactly::<f64, 4>(&s, "rectangle")?;
                Rect::new(x0, y0, x1, y1)?
            }
            None => Rect::UNIT_SQUARE,
        };
        let pattern = match config.pick(common.pattern.clone(), "pattern")? {
            Some(s) => parse_pattern(&s)?,
            None => CellPattern::Diagonal,
        };
        let out = config.pick(common.out.clone(), "out")?;
        Ok(Context { config, rect, pattern, out })
    }

    fn sim_options(&self, flags: &SearchFlags) -> Result<SimOptions> {
        let d = SimOptions::default();
        Ok(SimOptions {
            quad_points: self.config.pick(flags.quad_points, "quad-points")?.unwrap_or(d.quad_points),
            threshold: self.config.pick(flags.threshold, "threshold")?.unwrap_or(d.threshold),
            tol: self.config.pick(flags.tol, "tol")?,
            seed: self.config.pick(flags.seed, "seed")?.unwrap_or(d.seed),
            ..d
        })
    }

    fn region(&self, flag: &Option<String>) -> Result<RegionBox> {
        let text = self.config.pick(flag.clone(), "region")?.ok_or_else(|| Error::usage("--region is required"))?;
        let [a, b, c, d] = exactly::<f64, 4>(&text, "region")?;
        Ok(RegionBox::from_bounds(a, b, c, d)?)
    }

    /// Mesh from `--mesh` or the uniform mesh with `--nx` cells per side.
    fn mesh(&self, nx: Option<usize>, path: &Option<PathBuf>, stderr: &mut dyn Write) -> Result<Mesh> {
        let nx = self.config.pick(nx, "nx")?;
        let path = self.config.pick(path.clone(), "mesh")?;
        match (nx, path) {
            (Some(_), Some(_)) => Err(Error::usage("--nx and --mesh are mutually exclusive")),
            (None, None) => Err(Error::usage("one of --nx or --mesh is required")),
            (Some(n), None) => Ok(Mesh::uniform_with_pattern(n, self.rect, self.pattern)?),
            (None, Some(p)) => {
                let mesh = read_mesh(&p)?;
                if mesh.reoriented_count() > 0 {
                    let _ = writeln!(stderr, "warning: reoriented {} clockwise triangles", mesh.reoriented_count());
                }
                Ok(mesh)
            }
        }
    }

    fn dump(&self, flag: &Option<PathBuf>, system: &AssembledSystem) -> Result<()> {
        if let Some(base) = self.config.pick(flag.clone(), "dump-matrices")? {
            write_matrix(system.stiffness(), with_suffix(&base, "stiffness"))?;
            write_matrix(system.mass(), with_suffix(&base, "mass"))?;
        }
        Ok(())
    }

    fn emit(&self, text: &str, stdout: &mut dyn Write) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
            None => stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
        }
    }
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn solve(args: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let ctx = Context::new(&args.common)?;
    let opts = ctx.sim_options(&args.search)?;
    let region = ctx.region(&args.region)?;
    let mesh = ctx.mesh(args.nx, &args.mesh, stderr)?;
    let system = assemble(&mesh)?;
    ctx.dump(&args.dump_matrices, &system)?;
    let op = OperatorFunction::new(system)?;
    let found = search(&op, &region, &opts)?;
    let mut text = String::new();
    for e in &found.estimates {
        let state = if e.polished { "polished" } else { "unpolished" };
        text.push_str(&format!("{:.12} {:+.3e} {:.3e} {}\n", e.value.re, e.value.im, e.polish_residual, state));
    }
    ctx.emit(&text, stdout)?;
    let mut unresolved = 0;
    for w in &found.warnings {
        match w {
            SearchWarning::UnresolvedCluster { center, half_size, indicator } => {
                unresolved += 1;
                let _ = writeln!(
                    stderr,
                    "warning: unresolved cluster at {center} (half size {half_size:.3e}, indicator {indicator:.3e})"
                );
            }
            SearchWarning::PolishFailed { center, residual } => {
                let _ = writeln!(stderr, "warning: polish did not converge at {center} (residual {residual:.3e})");
            }
        }
    }
    if unresolved > 0 {
        return Err(Error::CheckFailed(format!("{unresolved} unresolved cluster(s)")));
    }
    Ok(())
}

fn study(args: &StudyArgs, stdout: &mut dyn Write) -> Result<()> {
    let ctx = Context::new(&args.common)?;
    let sim = ctx.sim_options(&args.search)?;
    let n_list: Vec<usize> = numbers(&ctx.config.pick(args.nx.clone(), "nx")?.unwrap_or("10,20,40,80".into()), "mesh list")?;
    let [m, n] = exactly::<u32, 2>(&ctx.config.pick(args.target.clone(), "target")?.unwrap_or("1,1".into()), "target")?;
    let format: Format = ctx.config.pick(args.format.clone(), "format")?.as_deref().unwrap_or("csv").parse()?;
    let window_fraction = ctx.config.pick(args.window_fraction, "window-fraction")?.unwrap_or(0.4);
    let opts = StudyOptions { sim, window_fraction, pattern: ctx.pattern };
    let records = convergence_study(&ctx.rect, &n_list, (m, n), &opts)?;
    let report = StudyReport::new(&ctx.rect, (m, n), exact_eigenvalue(&ctx.rect, m, n), &records);
    ctx.emit(&report.render(format), stdout)
}

fn oracle(args: &OracleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let ctx = Context::new(&args.common)?;
    let mesh = ctx.mesh(args.nx, &args.mesh, stderr)?;
    let system = assemble(&mesh)?;
    ctx.dump(&args.dump_matrices, &system)?;
    let eig = dense_generalized_eig(
        &DenseMatrix::from_csr(system.stiffness()),
        &DenseMatrix::from_csr(system.mass()),
        false,
    )?;
    let text: String = eig.values.iter().map(|v| format!("{v:.12}\n")).collect();
    ctx.emit(&text, stdout)
}

fn map(args: &MapArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let ctx = Context::new(&args.common)?;
    let opts = ctx.sim_options(&args.search)?;
    let region = ctx.region(&args.region)?;
    let [nre, nim] = exactly::<usize, 2>(&ctx.config.pick(args.grid.clone(), "grid")?.unwrap_or("32,8".into()), "grid")?;
    let op = OperatorFunction::new(assemble(&ctx.mesh(args.nx, &args.mesh, stderr)?)?)?;
    let cells = indicator_map(&op, &region, nre, nim, &opts)?;
    ctx.emit(&indicator_map_csv(&cells), stdout)
}

fn check_suite(args: &CheckArgs, stdout: &mut dyn Write) -> Result<()> {
    let ctx = Context::new(&args.common)?;
    let outcomes = check::run_all(&ctx.rect)?;
    let text: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    ctx.emit(&text, stdout)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Error::CheckFailed(format!("{failed} check(s) failed")));
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                1
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve(a, stdout, stderr),
        Command::Study(a) => study(a, stdout),
        Command::Oracle(a) => oracle(a, stdout, stderr),
        Command::IndicatorMap(a) => map(a, stdout, stderr),
        Command::Check(a) => check_suite(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
