use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fractal_hm::{Catalog, SolverRegistry};
use fractal_hm_cli::config::{parse_degree_list, parse_delta_list, Outputs, DEFAULT_TOL};
use fractal_hm_cli::{
    render_svg, run_basis, run_renorm, run_solve, run_verify, CliError, FractalRef, RenderOptions,
    ResultFile, SolveConfig,
};

/// Circle-valued harmonic maps of prescribed degree on p.c.f. fractals.
///
/// Catalog fractals: sg, sg3 (also sg4..sg6), hexagasket, pentagasket.
/// Solvers: sg-extension (gasket, exact), pcf-minimize (any fractal).
/// Exit codes: 0 success, 2 config/input, 3 solver, 4 verification mismatch.
#[derive(Parser)]
#[command(name = "fractal-hm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the harmonic map and write JSON/CSV/SVG artifacts.
    Solve(SolveArgs),
    /// Re-check a result file (residual, energy chain, degree, ...).
    Verify {
        result: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Render a result file as SVG.
    Render {
        result: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Plot width in pixels.
        #[arg(long, default_value_t = 600.0)]
        size: f64,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        title: Option<String>,
    },
    /// Cycle basis and cut points of the level-m graph.
    Basis(FractalArgs),
    /// Renormalization factor of the harmonic structure.
    Renorm {
        #[command(flatten)]
        fractal: FractalArgs,
        /// Trace the form at this factor instead of fitting one.
        #[arg(long)]
        r: Option<f64>,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// TOML configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    fractal: Option<String>,
    #[arg(long)]
    level: Option<usize>,
    /// Comma-separated degree vector, e.g. "1,1,1,1".
    #[arg(long, allow_hyphen_values = true)]
    degree: Option<String>,
    /// Comma-separated boundary increments, e.g. "0,1/3".
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    /// cell-loops, basis or basis@m.
    #[arg(long)]
    indexing: Option<String>,
    /// JSON result file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Residual tolerance for the exit status.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct FractalArgs {
    /// Catalog name.
    #[arg(long, required_unless_present = "config")]
    fractal: Option<String>,
    /// TOML file with a [fractal] table (custom IFS).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    level: usize,
}

impl FractalArgs {
    fn fractal_ref(&self) -> anyhow::Result<FractalRef> {
        if let Some(name) = &self.fractal {
            return Ok(FractalRef::Catalog(name.clone()));
        }
        let path = self
            .config
            .as_ref()
            .expect("clap enforces --fractal or --config");
        SolveConfig::from_file(path)?
            .fractal
            .ok_or_else(|| CliError::Config(format!("{} has no fractal", path.display())).into())
    }
}

fn solve_config(a: SolveArgs) -> anyhow::Result<SolveConfig> {
    let mut cfg = match &a.config {
        Some(p) => SolveConfig::from_file(p)?,
        None => SolveConfig::default(),
    };
    if let Some(f) = a.fractal {
        cfg.fractal = Some(FractalRef::Catalog(f));
    }
    cfg.level = a.level.or(cfg.level);
    if let Some(d) = a.degree {
        cfg.degree = Some(parse_degree_list(&d)?);
    }
    if let Some(d) = a.delta {
        cfg.deltas = Some(parse_delta_list(&d)?);
    }
    cfg.solver = a.solver.or(cfg.solver);
    cfg.indexing = a.indexing.or(cfg.indexing);
    cfg.tol = a.tol.or(cfg.tol);
    cfg.output = Outputs {
        json: a.out.or(cfg.output.json),
        csv: a.csv.or(cfg.output.csv),
        svg: a.svg.or(cfg.output.svg),
    };
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let catalog = Catalog::default();
    let registry = SolverRegistry::default();
    match cli.command {
        Command::Solve(args) => {
            let job = solve_config(args)?.into_job(&catalog)?;
            let outcome = run_solve(&job, &registry)?;
            println!("{outcome}");
            if outcome.exit_code != 0 {
                eprintln!("recovered degree or residual does not match the prescription");
            }
            Ok(outcome.exit_code)
        }
        Command::Verify { result, tol } => {
            let file = ResultFile::read(&result)?;
            let report = run_verify(&file, &catalog, &registry, tol)?;
            print!("{report}");
            Ok(if report.passed() { 0 } else { 4 })
        }
        Command::Render {
            result,
            out,
            size,
            radius,
            title,
        } => {
            let file = ResultFile::read(&result)?;
            let svg = render_svg(
                &file,
                &RenderOptions {
                    size,
                    radius,
                    title,
                },
            )?;
            match out {
                Some(p) => {
                    std::fs::write(&p, svg).with_context(|| format!("writing {}", p.display()))?
                }
                None => print!("{svg}"),
            }
            Ok(0)
        }
        Command::Basis(args) => {
            print!("{}", run_basis(&args.fractal_ref()?, args.level, &catalog)?);
            Ok(0)
        }
        Command::Renorm { fractal, r } => {
            println!("{}", run_renorm(&fractal.fractal_ref()?, r, &catalog)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<CliError>()
                .map(CliError::exit_code)
                .unwrap_or(2);
            ExitCode::from(code as u8)
        }
    }
}
