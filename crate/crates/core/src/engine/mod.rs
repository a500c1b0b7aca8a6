//! Harmonic solvers, energies and renormalization.

pub mod extension;
pub mod pcf;
pub mod renorm;
pub mod sg;

use std::collections::BTreeMap;
use std::fmt;

use crate::covering::{
    basis_setup, build_cut_graph, cycle_degrees, degree_vector, pcf_cut_points, refine_cycles, sg_cut_points,
    BoundaryData, CircleMap, CutGraph, DegreeVector, Side,
};
use crate::error::{Error, Result};
use crate::geometry::{Fractal, Point, VertexId};
use crate::graph::{build_graph, cell_loops, is_gasket, ApproxGraph, HarmonicStructure};
use crate::scalar::{frac_f64, frac_rational, rational_to_f64, Rational, Scalar};

pub use extension::{classical_extension, jump_extension};
pub use pcf::solve_pcf;
pub use renorm::{find_renormalization_factor, renormalize_form, self_similar_form, RenormFit};
pub use sg::solve_sg_values;

/// Largest level solved in exact rational arithmetic by the gasket recursion.
pub const EXACT_LEVEL_LIMIT: usize = 12;

/// Which loops the degree vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeIndexing {
    /// Gasket cell boundaries `∂T_w`, indexed by `ℓ(w)`.
    CellLoops,
    /// Spanning-tree fundamental cycles of `Γ_level`.
    Basis { level: usize },
}

impl DegreeIndexing {
    pub fn default_for(fractal: &Fractal) -> Self {
        if is_gasket(fractal) {
            DegreeIndexing::CellLoops
        } else {
            DegreeIndexing::Basis { level: 1 }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub fractal: Fractal,
    pub structure: HarmonicStructure,
    pub level: usize,
    pub degree: DegreeVector,
    pub boundary: BoundaryData,
    pub indexing: DegreeIndexing,
    /// Raise the level when the degree cannot be read off unambiguously.
    pub auto_refine: bool,
}

impl Problem {
    pub fn new(fractal: Fractal, structure: HarmonicStructure, level: usize) -> Self {
        let indexing = DegreeIndexing::default_for(&fractal);
        let boundary = BoundaryData::zero(fractal.boundary_len());
        Problem {
            fractal,
            structure,
            level,
            degree: DegreeVector::zero(),
            boundary,
            indexing,
            auto_refine: true,
        }
    }

    pub fn with_degree(mut self, degree: DegreeVector) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryData) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_indexing(mut self, indexing: DegreeIndexing) -> Self {
        self.indexing = indexing;
        self
    }

    /// Least admissible solve level.
    pub fn min_level(&self) -> usize {
        match self.indexing {
            DegreeIndexing::CellLoops => sg::min_level(&self.degree),
            DegreeIndexing::Basis { level } => level + 1,
        }
    }
}

/// A lift on the cut graph, as produced by one solver strategy.
#[derive(Debug, Clone)]
pub struct Lift {
    pub graph: ApproxGraph,
    pub cut_graph: CutGraph,
    pub values: Vec<f64>,
    pub exact: Option<Vec<Rational>>,
}

/// Common interface of the solver strategies, selected by name at run time.
pub trait HarmonicSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn solve_lift(&self, problem: &Problem, level: usize) -> Result<Lift>;
}

/// Exact recursive extension on the gasket.
#[derive(Debug, Default, Clone, Copy)]
pub struct SgExtension;

impl HarmonicSolver for SgExtension {
    fn name(&self) -> &'static str {
        "sg-extension"
    }
    fn description(&self) -> &'static str {
        "recursive jump extension on the Sierpinski gasket (exact rationals up to level 12)"
    }
    fn solve_lift(&self, p: &Problem, level: usize) -> Result<Lift> {
        if p.indexing != DegreeIndexing::CellLoops {
            return Err(Error::InvalidDegree("the gasket recursion indexes degrees by cell loops".into()));
        }
        if level <= EXACT_LEVEL_LIMIT {
            let s = solve_sg_values::<Rational>(&p.fractal, &p.structure, level, &p.degree, &p.boundary)?;
            let values = s.values.iter().map(Scalar::to_f64).collect();
            Ok(Lift { graph: s.graph, cut_graph: s.cut_graph, values, exact: Some(s.values) })
        } else {
            let s = solve_sg_values::<f64>(&p.fractal, &p.structure, level, &p.degree, &p.boundary)?;
            Ok(Lift { graph: s.graph, cut_graph: s.cut_graph, values: s.values, exact: None })
        }
    }
}

/// Constrained energy minimization on any p.c.f. fractal.
#[derive(Debug, Default, Clone, Copy)]
pub struct PcfMinimize;

impl HarmonicSolver for PcfMinimize {
    fn name(&self) -> &'static str {
        "pcf-minimize"
    }
    fn description(&self) -> &'static str {
        "energy minimization on the cut graph with jump constraints (any p.c.f. fractal)"
    }
    fn solve_lift(&self, p: &Problem, level: usize) -> Result<Lift> {
        let cuts = match p.indexing {
            DegreeIndexing::CellLoops => sg_cut_points(&p.fractal, &p.degree)?,
            DegreeIndexing::Basis { level: m } => {
                let setup = basis_setup(&p.fractal, &p.structure, m)?;
                if p.degree.entries().len() > setup.basis.dimension() {
                    return Err(Error::InvalidDegree(format!(
                        "{} entries for a cycle space of dimension {}",
                        p.degree.entries().len(),
                        setup.basis.dimension()
                    )));
                }
                pcf_cut_points(&p.fractal, &setup, &p.degree.padded(setup.basis.dimension()))?
            }
        };
        let graph = build_graph(&p.fractal, &p.structure, level)?;
        let cut_graph = build_cut_graph(&p.fractal, &graph, &cuts, &p.boundary)?;
        let values = solve_pcf(&cut_graph)?;
        Ok(Lift { graph, cut_graph, values, exact: None })
    }
}

/// Solver strategies keyed by name.
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn HarmonicSolver>>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = SolverRegistry { solvers: BTreeMap::new() };
        r.register(Box::new(SgExtension));
        r.register(Box::new(PcfMinimize));
        r
    }
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry { solvers: BTreeMap::new() }
    }

    pub fn register(&mut self, solver: Box<dyn HarmonicSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn HarmonicSolver> {
        self.solvers
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown { kind: "solver", name: name.to_string() })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }

    /// Gasket problems default to the exact recursion, everything else to minimization.
    pub fn default_for(&self, problem: &Problem) -> &dyn HarmonicSolver {
        let name = if problem.indexing == DegreeIndexing::CellLoops { "sg-extension" } else { "pcf-minimize" };
        self.get(name).expect("built-in solver")
    }
}

/// Output of a solve: the lift on the cut graph plus diagnostics.
#[derive(Debug, Clone)]
pub struct HarmonicMapResult {
    pub solver: String,
    pub fractal: String,
    pub level: usize,
    pub degree: DegreeVector,
    pub boundary: BoundaryData,
    pub indexing: DegreeIndexing,
    pub graph: ApproxGraph,
    pub cut_graph: CutGraph,
    pub lift: Vec<f64>,
    pub exact_lift: Option<Vec<Rational>>,
    pub energy: f64,
    pub max_residual: f64,
    /// Degrees read back from the computed circle map.
    pub recovered_degree: DegreeVector,
}

/// One output row per cut-graph copy.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexRow {
    pub id: VertexId,
    pub side: Option<Side>,
    pub point: Point,
    pub lift: f64,
    pub exact: Option<Rational>,
    pub circle: f64,
}

impl HarmonicMapResult {
    pub fn circle(&self) -> CircleMap {
        CircleMap::from_lift(&self.cut_graph, &self.lift)
    }

    pub fn degree_matches(&self) -> bool {
        self.recovered_degree == self.degree
    }

    pub fn rows(&self, fractal: &Fractal) -> Vec<VertexRow> {
        self.cut_graph
            .vertices
            .iter()
            .enumerate()
            .map(|(i, cv)| {
                let gv = &self.graph.vertices[cv.original];
                let exact = self.exact_lift.as_ref().map(|e| e[i]);
                VertexRow {
                    id: gv.id.clone(),
                    side: cv.side,
                    point: fractal.display(gv.location.approx),
                    lift: self.lift[i],
                    exact,
                    circle: exact.map(|x| rational_to_f64(&frac_rational(&x))).unwrap_or_else(|| frac_f64(self.lift[i])),
                }
            })
            .collect()
    }
}

/// `lift mod 1`, in `[0, 1)`.
pub fn project_to_circle(lift: &[f64]) -> Vec<f64> {
    lift.iter().map(|&x| frac_f64(x)).collect()
}

/// `Σ c_xy d(f(x), f(y))²` with the geodesic distance on `R/Z`.
pub fn circle_energy(f: &CircleMap, graph: &ApproxGraph) -> f64 {
    graph
        .edges
        .iter()
        .map(|e| {
            let d = f.values[e.a] - f.values[e.b];
            let d = (d - d.round()).abs();
            e.conductance * d * d
        })
        .sum()
}

/// Degrees of a circle map on `graph`, for degree vectors of the given order
/// (loop order for cell loops; ignored for basis cycles).
pub fn read_degree(
    fractal: &Fractal,
    structure: &HarmonicStructure,
    indexing: DegreeIndexing,
    order: usize,
    circle: &CircleMap,
    graph: &ApproxGraph,
) -> Result<DegreeVector> {
    match indexing {
        DegreeIndexing::CellLoops => {
            let loops = cell_loops(fractal, order)?;
            degree_vector(circle, graph, &loops)
        }
        DegreeIndexing::Basis { level: m } => {
            let setup = basis_setup(fractal, structure, m)?;
            let cycles: Vec<_> = setup.embedded.into_iter().map(|e| e.cycle).collect();
            let cycles = refine_cycles(fractal, structure, &cycles, m + 1, graph.level)?;
            cycle_degrees(circle, graph, &cycles)
        }
    }
}

/// Degrees of a lift, in the problem's indexing, read at the lift's level.
pub fn recover_degree(problem: &Problem, lift: &Lift) -> Result<DegreeVector> {
    let circle = CircleMap::from_lift(&lift.cut_graph, &lift.values);
    read_degree(
        &problem.fractal,
        &problem.structure,
        problem.indexing,
        problem.degree.order(),
        &circle,
        &lift.graph,
    )
}

/// Solves and reads the degree back. With `auto_refine`, a level too coarse
/// to resolve the winding (an increment of 1/4 or more, or a mismatch below
/// the minimal level + 2) is retried one level finer.
pub fn solve(problem: &Problem, solver: &dyn HarmonicSolver) -> Result<HarmonicMapResult> {
    if problem.level < problem.min_level() {
        return Err(Error::LevelTooSmall {
            level: problem.level,
            order: problem.degree.order(),
            required: problem.min_level(),
        });
    }
    let mut level = problem.level;
    loop {
        let lift = solver.solve_lift(problem, level)?;
        match recover_degree(problem, &lift) {
            Ok(recovered) if recovered != problem.degree && problem.auto_refine && level < problem.min_level() + 2 => {
                level += 1
            }
            Ok(recovered) => {
                let energy = lift.cut_graph.energy(&lift.values);
                let max_residual = lift.cut_graph.max_residual(&lift.values);
                return Ok(HarmonicMapResult {
                    solver: solver.name().to_string(),
                    fractal: problem.fractal.name().to_string(),
                    level,
                    degree: problem.degree.clone(),
                    boundary: problem.boundary.clone(),
                    indexing: problem.indexing,
                    graph: lift.graph,
                    cut_graph: lift.cut_graph,
                    lift: lift.values,
                    exact_lift: lift.exact,
                    energy,
                    max_residual,
                    recovered_degree: recovered,
                });
            }
            Err(Error::IncrementTooLarge { .. }) if problem.auto_refine => level += 1,
            Err(e) => return Err(e),
        }
    }
}

impl fmt::Display for DegreeIndexing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeIndexing::CellLoops => f.write_str("cell-loops"),
            DegreeIndexing::Basis { level } => write!(f, "basis@{level}"),
        }
    }
}

impl std::str::FromStr for DegreeIndexing {
    type Err = Error;
    /// `cell-loops`, `basis` (level 1) or `basis@m`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cell-loops" => Ok(DegreeIndexing::CellLoops),
            "basis" => Ok(DegreeIndexing::Basis { level: 1 }),
            other => other
                .strip_prefix("basis@")
                .and_then(|m| m.parse().ok())
                .map(|level| DegreeIndexing::Basis { level })
                .ok_or_else(|| Error::Unknown { kind: "degree indexing", name: other.to_string() }),
        }
    }
}
