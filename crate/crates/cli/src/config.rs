//! Solve configuration: a TOML file, optionally overridden by flags.
//!
//! ```toml
//! fractal = "sg"              # catalog name, or a [fractal] table (below)
//! level = 6
//! degree = [1, 1, 1, 1]
//! deltas = ["0", "1/3"]       # |V_0| - 1 lift increments; strings or numbers
//! solver = "sg-extension"     # optional, default chosen by fractal
//! indexing = "cell-loops"     # or "basis", "basis@m"
//! tol = 1e-9
//!
//! [structure]                 # optional; default is the catalog/fitted form
//! base = [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]
//! r = "3/5"                   # one weight for all maps, or a list
//!
//! [output]
//! json = "sg.json"
//! csv = "sg.csv"
//! svg = "sg.svg"
//! ```
//!
//! A custom fractal replaces the name by a table:
//!
//! ```toml
//! [fractal]
//! name = "my-gasket"
//! boundary = [1, 2, 3]         # letters whose fixed points form V_0
//! skeleton = [[0, 1], [1, 2], [2, 0]]   # optional
//! [[fractal.maps]]
//! linear = [["1/2", 0], [0, "1/2"]]
//! offset = [0, 0]
//! ```
//!
//! Integers and strings such as `"1/3"` or `"0.25"` are exact; TOML floats
//! make the map floating point.

use std::path::{Path, PathBuf};

use fractal_hm::catalog::default_structure;
use fractal_hm::geometry::AffineMap;
use fractal_hm::graph::DEFAULT_CELL_LIMIT;
use fractal_hm::scalar::rational_to_f64;
use fractal_hm::{
    make_fractal, parse_rational, BoundaryData, Catalog, DegreeIndexing, DegreeVector, Fractal,
    FractalSpec, HarmonicStructure, Problem, Rational,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Residual tolerance used when none is given.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A number written either as a TOML/JSON number or as a string literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Literal {
    /// The exact value, or `None` for a float literal.
    pub fn exact(&self) -> CliResult<Option<Rational>> {
        match self {
            Literal::Int(i) => Ok(Some(Rational::from_integer(*i as i128))),
            Literal::Float(_) => Ok(None),
            Literal::Text(s) => parse_rational(s).map(Some).map_err(CliError::config),
        }
    }

    pub fn value(&self) -> CliResult<f64> {
        match self {
            Literal::Float(x) => Ok(*x),
            other => Ok(rational_to_f64(&other.exact()?.expect("exact literal"))),
        }
    }

    /// Exact value; floats are read through their shortest decimal form.
    pub fn rational(&self) -> CliResult<Rational> {
        match self {
            Literal::Float(x) => parse_rational(&x.to_string()).map_err(CliError::config),
            other => Ok(other.exact()?.expect("exact literal")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDef {
    pub linear: [[Literal; 2]; 2],
    pub offset: [Literal; 2],
}

impl MapDef {
    fn to_map(&self) -> CliResult<AffineMap> {
        let all = [
            &self.linear[0][0],
            &self.linear[0][1],
            &self.linear[1][0],
            &self.linear[1][1],
            &self.offset[0],
            &self.offset[1],
        ];
        let exact = all
            .iter()
            .map(|l| l.exact())
            .collect::<CliResult<Vec<_>>>()?;
        if exact.iter().all(Option::is_some) {
            let e: Vec<Rational> = exact.into_iter().flatten().collect();
            Ok(AffineMap::exact([[e[0], e[1]], [e[2], e[3]]], [e[4], e[5]]))
        } else {
            let v = all
                .iter()
                .map(|l| l.value())
                .collect::<CliResult<Vec<_>>>()?;
            Ok(AffineMap::float([[v[0], v[1]], [v[2], v[3]]], [v[4], v[5]]))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomFractal {
    pub name: String,
    pub maps: Vec<MapDef>,
    pub boundary: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skeleton: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display: Option<[[f64; 2]; 2]>,
}

/// Catalog name or inline IFS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FractalRef {
    Catalog(String),
    Custom(CustomFractal),
}

impl FractalRef {
    pub fn name(&self) -> &str {
        match self {
            FractalRef::Catalog(n) => n,
            FractalRef::Custom(c) => &c.name,
        }
    }

    pub fn load(&self, catalog: &Catalog) -> CliResult<Fractal> {
        match self {
            FractalRef::Catalog(name) => catalog.fractal(name).map_err(CliError::config),
            FractalRef::Custom(c) => {
                let maps = c
                    .maps
                    .iter()
                    .map(MapDef::to_map)
                    .collect::<CliResult<Vec<_>>>()?;
                let mut spec = FractalSpec::new(c.name.clone(), maps, c.boundary.clone());
                if let Some(pairs) = &c.skeleton {
                    spec = spec.with_skeleton(pairs.iter().map(|p| (p[0], p[1])).collect());
                }
                if let Some(d) = c.display {
                    spec = spec.with_display(d);
                }
                make_fractal(spec).map_err(CliError::config)
            }
        }
    }

    /// Catalog structure for named fractals, the fitted default otherwise.
    pub fn structure(&self, catalog: &Catalog, fractal: &Fractal) -> CliResult<HarmonicStructure> {
        match self {
            FractalRef::Catalog(name) => catalog.entry(name).and_then(|e| e.structure(fractal)),
            FractalRef::Custom(_) => default_structure(fractal),
        }
        .map_err(CliError::config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Uniform(Literal),
    Each(Vec<Literal>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDef {
    pub base: Vec<Vec<Literal>>,
    pub r: Weights,
}

impl StructureDef {
    pub fn build(&self, n_maps: usize) -> CliResult<HarmonicStructure> {
        let n = self.base.len();
        if self.base.iter().any(|row| row.len() != n) {
            return Err(CliError::Config("structure.base must be square".into()));
        }
        let mut base = DMatrix::zeros(n, n);
        for (i, row) in self.base.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                base[(i, j)] = x.value()?;
            }
        }
        let weights = match &self.r {
            Weights::Uniform(r) => vec![r.value()?; n_maps],
            Weights::Each(rs) => rs.iter().map(Literal::value).collect::<CliResult<_>>()?,
        };
        HarmonicStructure::new(base, weights).map_err(CliError::config)
    }

    pub fn from_structure(s: &HarmonicStructure) -> Self {
        let n = s.base.nrows();
        StructureDef {
            base: (0..n)
                .map(|i| (0..n).map(|j| Literal::Float(s.base[(i, j)])).collect())
                .collect(),
            r: Weights::Each(s.weights.iter().map(|&r| Literal::Float(r)).collect()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub fractal: Option<FractalRef>,
    pub level: Option<usize>,
    pub degree: Option<Vec<i64>>,
    pub deltas: Option<Vec<Literal>>,
    pub structure: Option<StructureDef>,
    pub solver: Option<String>,
    pub indexing: Option<String>,
    pub tol: Option<f64>,
    pub auto_refine: Option<bool>,
    #[serde(default)]
    pub output: Outputs,
}

/// A validated configuration, ready to solve.
#[derive(Debug, Clone)]
pub struct SolveJob {
    pub fractal_ref: FractalRef,
    pub problem: Problem,
    /// Explicit solver name; `None` picks the registry default.
    pub solver: Option<String>,
    pub tol: f64,
    pub output: Outputs,
}

impl SolveConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(CliError::config)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn into_job(self, catalog: &Catalog) -> CliResult<SolveJob> {
        let fractal_ref = self
            .fractal
            .ok_or_else(|| CliError::Config("no fractal given".into()))?;
        let level = self
            .level
            .ok_or_else(|| CliError::Config("no level given".into()))?;
        let fractal = fractal_ref.load(catalog)?;
        let cells = (fractal.alphabet() as f64).powi(level as i32);
        if cells > DEFAULT_CELL_LIMIT as f64 {
            return Err(CliError::Config(format!(
                "level {level} needs {cells:.0} cells, above the limit of {DEFAULT_CELL_LIMIT}"
            )));
        }
        let structure = match &self.structure {
            Some(def) => def.build(fractal.alphabet())?,
            None => fractal_ref.structure(catalog, &fractal)?,
        };
        let boundary = match &self.deltas {
            Some(d) => {
                BoundaryData::new(d.iter().map(Literal::rational).collect::<CliResult<_>>()?)
            }
            None => BoundaryData::zero(fractal.boundary_len()),
        };
        if boundary.deltas.len() + 1 != fractal.boundary_len() {
            return Err(CliError::Config(format!(
                "{} has {} boundary points, so {} deltas are needed (got {})",
                fractal.name(),
                fractal.boundary_len(),
                fractal.boundary_len() - 1,
                boundary.deltas.len()
            )));
        }
        let indexing = match &self.indexing {
            Some(s) => s.parse::<DegreeIndexing>().map_err(CliError::config)?,
            None => DegreeIndexing::default_for(&fractal),
        };
        let degree = DegreeVector::new(self.degree.unwrap_or_default());
        if let DegreeIndexing::Basis { level: m } = indexing {
            let dim = fractal_hm::build_graph(&fractal, &structure, m)
                .map_err(CliError::config)?
                .cycle_space_dim();
            if degree.entries().len() > dim {
                return Err(CliError::Config(format!(
                    "{} degree entries, but the level-{m} cycle space has dimension {dim}",
                    degree.entries().len()
                )));
            }
        }
        let mut problem = Problem::new(fractal, structure, level)
            .with_degree(degree)
            .with_boundary(boundary)
            .with_indexing(indexing);
        if let Some(a) = self.auto_refine {
            problem.auto_refine = a;
        }
        Ok(SolveJob {
            fractal_ref,
            problem,
            solver: self.solver,
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            output: self.output,
        })
    }
}

/// `"1,1,1,1"` → `[1, 1, 1, 1]`; empty text is the zero vector.
pub fn parse_degree_list(text: &str) -> CliResult<Vec<i64>> {
    split_list(text)
        .map(|s| {
            s.parse::<i64>()
                .map_err(|_| CliError::Config(format!("bad degree entry '{s}'")))
        })
        .collect()
}

/// `"0,1/3"` → exact literals.
pub fn parse_delta_list(text: &str) -> CliResult<Vec<Literal>> {
    split_list(text)
        .map(|s| {
            parse_rational(s).map_err(CliError::config)?;
            Ok(Literal::Text(s.to_string()))
        })
        .collect()
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}
