//! Re-checks a result file from its raw values.

use std::collections::HashMap;
use std::fmt;

use fractal_hm::covering::build_cut_graph;
use fractal_hm::engine::read_degree;
use fractal_hm::scalar::rational_to_f64;
use fractal_hm::{build_graph, Catalog, CircleMap, DegreeIndexing, Problem, SolverRegistry};

use crate::error::{CliError, CliResult};
use crate::output::ResultFile;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<13} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = a - b;
    (d - d.round()).abs()
}

/// Residual, energy, energy chain (one level finer), boundary, jump, circle
/// and degree checks. Energies are compared relative to `max(1, E)`.
pub fn run_verify(
    result: &ResultFile,
    catalog: &Catalog,
    registry: &SolverRegistry,
    tol: f64,
) -> CliResult<VerifyReport> {
    let (fractal, structure) = result.setting(catalog)?;
    let boundary = result.boundary()?;
    let graph = build_graph(&fractal, &structure, result.level)?;
    let cut = build_cut_graph(&fractal, &graph, &result.cut_points()?, &boundary)?;

    let corrupt = |message: String| CliError::Input {
        path: "<result>".into(),
        message,
    };
    if result.vertices.len() != cut.vertices.len() {
        return Err(corrupt(format!(
            "{} vertex records, the level-{} cut graph has {}",
            result.vertices.len(),
            result.level,
            cut.vertices.len()
        )));
    }
    let mut index: HashMap<(String, Option<String>), usize> = HashMap::new();
    for (i, v) in cut.vertices.iter().enumerate() {
        index.insert(
            (
                graph.vertices[v.original].id.to_string(),
                v.side.map(|s| s.to_string()),
            ),
            i,
        );
    }
    let mut lift = vec![f64::NAN; cut.vertices.len()];
    let mut circle = vec![f64::NAN; cut.vertices.len()];
    for rec in &result.vertices {
        let i = *index
            .get(&(rec.id.clone(), rec.side.clone()))
            .ok_or_else(|| corrupt(format!("unknown vertex {} ({:?})", rec.id, rec.side)))?;
        lift[i] = rec.lift;
        circle[i] = rec.circle;
    }
    if lift.iter().any(|x| !x.is_finite()) || circle.iter().any(|x| !x.is_finite()) {
        return Err(corrupt("missing or non-finite vertex values".into()));
    }

    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String| {
        checks.push(Check {
            name,
            passed,
            detail,
        })
    };

    let bgap = cut
        .fixed
        .iter()
        .map(|&(v, x)| (lift[v] - rational_to_f64(&x)).abs())
        .fold(0.0, f64::max);
    push(
        "boundary",
        bgap <= tol,
        format!("max deviation {bgap:.3e} on V_0"),
    );

    let jgap = cut
        .jumps
        .iter()
        .map(|j| (lift[j.plus] - lift[j.minus] - j.shift as f64).abs())
        .fold(0.0, f64::max);
    push(
        "jumps",
        jgap <= tol,
        format!("{} cuts, max deviation {jgap:.3e}", cut.jumps.len()),
    );

    let cgap = lift
        .iter()
        .zip(&circle)
        .map(|(&l, &c)| circle_gap(l, c))
        .fold(0.0, f64::max);
    push(
        "circle",
        cgap <= tol,
        format!("circle = lift mod 1 up to {cgap:.3e}"),
    );

    let residual = cut.max_residual(&lift);
    push(
        "residual",
        residual <= tol,
        format!("max normalized residual {residual:.3e} (tol {tol:.1e})"),
    );

    let energy = cut.energy(&lift);
    let egap = (energy - result.energy).abs() / energy.abs().max(1.0);
    push(
        "energy",
        egap <= tol,
        format!("recomputed {energy:.12} vs recorded {:.12}", result.energy),
    );

    let indexing: DegreeIndexing = result.indexing.parse().map_err(CliError::config)?;
    let degree = result.degree_vector();
    let finer = Problem::new(fractal.clone(), structure.clone(), result.level + 1)
        .with_degree(degree.clone())
        .with_boundary(boundary)
        .with_indexing(indexing);
    let solver = registry.get(&result.solver).map_err(CliError::config)?;
    match solver.solve_lift(&finer, result.level + 1) {
        Ok(next) => {
            let e2 = next.cut_graph.energy(&next.values);
            let gap = (e2 - energy).abs() / energy.abs().max(1.0);
            push(
                "energy-chain",
                gap <= tol,
                format!("level {} energy {e2:.12}", result.level + 1),
            );
        }
        Err(e) => push(
            "energy-chain",
            false,
            format!("level {} solve failed: {e}", result.level + 1),
        ),
    }

    let map = CircleMap {
        level: result.level,
        values: circle[..cut.original_count()].to_vec(),
    };
    match read_degree(&fractal, &structure, indexing, degree.order(), &map, &graph) {
        Ok(d) => push(
            "degree",
            d == degree,
            format!("recovered {d}, prescribed {degree}"),
        ),
        Err(e) => push("degree", false, e.to_string()),
    }
    Ok(VerifyReport { checks })
}
