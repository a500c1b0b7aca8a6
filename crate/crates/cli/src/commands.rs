//! The CLI verbs as library functions.

use std::fmt;
use std::path::Path;

use fractal_hm::covering::basis_setup;
use fractal_hm::engine::{find_renormalization_factor, renormalize_form, self_similar_form};
use fractal_hm::graph::{spanning_tree_basis, unit_triangle};
use fractal_hm::{build_graph, solve, Catalog, HarmonicStructure, SolverRegistry};
use nalgebra::DMatrix;

use crate::config::{FractalRef, SolveJob};
use crate::error::{CliError, CliResult};
use crate::output::{CutRecord, ResultFile};
use crate::render::{render_svg, RenderOptions};

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub result: ResultFile,
    /// 0 when the degree round-trips and the residual is within tolerance, else 4.
    pub exit_code: i32,
}

impl fmt::Display for SolveOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.result;
        writeln!(f, "fractal      {}", r.fractal)?;
        writeln!(f, "solver       {}", r.solver)?;
        writeln!(f, "level        {}", r.level)?;
        writeln!(f, "vertices     {}", r.vertices.len())?;
        writeln!(f, "degree       {:?} ({})", r.degree, r.indexing)?;
        writeln!(f, "recovered    {:?}", r.recovered_degree)?;
        writeln!(f, "energy       {:.12}", r.energy)?;
        write!(f, "max residual {:.3e}", r.max_residual)
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Solves, writes the requested artifacts and grades the outcome.
pub fn run_solve(job: &SolveJob, registry: &SolverRegistry) -> CliResult<SolveOutcome> {
    let solver = match &job.solver {
        Some(name) => registry.get(name).map_err(CliError::config)?,
        None => registry.default_for(&job.problem),
    };
    let r = solve(&job.problem, solver)?;
    let result = ResultFile::from_result(
        &job.fractal_ref,
        &job.problem.fractal,
        &job.problem.structure,
        &r,
    );
    if let Some(p) = &job.output.json {
        write_file(p, &result.to_json())?;
    }
    if let Some(p) = &job.output.csv {
        write_file(p, &result.to_csv())?;
    }
    if let Some(p) = &job.output.svg {
        write_file(p, &render_svg(&result, &RenderOptions::default())?)?;
    }
    let ok = r.degree_matches() && r.max_residual <= job.tol;
    Ok(SolveOutcome {
        result,
        exit_code: if ok { 0 } else { 4 },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisReport {
    pub fractal: String,
    pub level: usize,
    pub dimension: usize,
    pub cycles: Vec<Vec<String>>,
    /// Cut points on the next level, or why none could be chosen.
    pub cuts: Result<Vec<CutRecord>, String>,
}

impl fmt::Display for BasisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} level {}: cycle space dimension {}",
            self.fractal, self.level, self.dimension
        )?;
        for (i, c) in self.cycles.iter().enumerate() {
            writeln!(f, "cycle {i}: {}", c.join(" -> "))?;
        }
        match &self.cuts {
            Ok(cuts) => {
                for c in cuts {
                    writeln!(
                        f,
                        "cut {}: {} (plus {}, minus {})",
                        c.cycle, c.vertex, c.plus, c.minus
                    )?;
                }
                Ok(())
            }
            Err(e) => writeln!(f, "cuts: {e}"),
        }
    }
}

pub fn run_basis(
    fractal_ref: &FractalRef,
    level: usize,
    catalog: &Catalog,
) -> CliResult<BasisReport> {
    let fractal = fractal_ref.load(catalog)?;
    let structure = fractal_ref.structure(catalog, &fractal)?;
    let graph = build_graph(&fractal, &structure, level)?;
    let basis = spanning_tree_basis(&graph);
    let cycles = basis
        .cycles
        .iter()
        .map(|c| c.vertices.iter().map(|v| v.to_string()).collect())
        .collect();
    let cuts = basis_setup(&fractal, &structure, level)
        .and_then(|setup| fractal_hm::covering::pcf_cut_points(&fractal, &setup, &[]))
        .map(|cuts| {
            cuts.iter()
                .map(|c| CutRecord {
                    vertex: c.vertex.to_string(),
                    plus: c.plus.to_string(),
                    minus: c.minus.to_string(),
                    shift: c.shift,
                    cycle: c.cycle,
                })
                .collect()
        })
        .map_err(|e| e.to_string());
    Ok(BasisReport {
        fractal: fractal_ref.name().to_string(),
        level,
        dimension: basis.dimension(),
        cycles,
        cuts,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenormReport {
    pub fractal: String,
    pub r: f64,
    /// Relative deviation of the traced form from the base form.
    pub residual: f64,
    pub base: DMatrix<f64>,
    pub traced: DMatrix<f64>,
}

impl fmt::Display for RenormReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: r = {:.15}", self.fractal, self.r)?;
        writeln!(f, "relative deviation {:.3e}", self.residual)?;
        write!(f, "base form{}traced form{}", self.base, self.traced)
    }
}

/// Without `r`: fit the factor (triangle form on three boundary points, else
/// the self-similar form). With `r`: trace the catalog form at that factor.
pub fn run_renorm(
    fractal_ref: &FractalRef,
    r: Option<f64>,
    catalog: &Catalog,
) -> CliResult<RenormReport> {
    let fractal = fractal_ref.load(catalog)?;
    let name = fractal_ref.name().to_string();
    match r {
        None => {
            let fit = if fractal.boundary_len() == 3 {
                find_renormalization_factor(&fractal, &unit_triangle(), 1e-10)?
            } else {
                self_similar_form(&fractal, 1e-10, 2000)?
            };
            let s = HarmonicStructure::uniform(fit.form.clone(), fractal.alphabet(), fit.r)?;
            let traced = renormalize_form(&fractal, &s)?;
            Ok(RenormReport {
                fractal: name,
                r: fit.r,
                residual: fit.residual,
                base: fit.form,
                traced,
            })
        }
        Some(r) => {
            let base = fractal_ref.structure(catalog, &fractal)?.base;
            let s = HarmonicStructure::uniform(base.clone(), fractal.alphabet(), r)?;
            let traced = renormalize_form(&fractal, &s)?;
            let residual = (&traced - &base).amax() / base.amax();
            Ok(RenormReport {
                fractal: name,
                r,
                residual,
                base,
                traced,
            })
        }
    }
}
