//! Result files (JSON) and CSV export.

use std::fmt::Write as _;
use std::path::Path;

use fractal_hm::covering::{CutPoint, Side};
use fractal_hm::scalar::format_rational;
use fractal_hm::{
    parse_rational, BoundaryData, Catalog, DegreeVector, Fractal, HarmonicMapResult,
    HarmonicStructure,
};
use serde::{Deserialize, Serialize};

use crate::config::{CustomFractal, FractalRef, StructureDef};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub vertex: String,
    pub plus: String,
    pub minus: String,
    pub shift: i64,
    pub cycle: usize,
}

/// One row per cut-graph vertex; split vertices appear twice (`side`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub y: Option<f64>,
    pub lift: f64,
    /// Exact lift as `"p/q"` when the solver worked in rationals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub circle: f64,
}

impl VertexRecord {
    pub fn is_plus(&self) -> bool {
        self.side.as_deref() == Some("plus")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub fractal: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractal_spec: Option<CustomFractal>,
    pub solver: String,
    pub level: usize,
    pub indexing: String,
    pub degree: Vec<i64>,
    pub recovered_degree: Vec<i64>,
    pub deltas: Vec<String>,
    pub structure: StructureDef,
    pub cuts: Vec<CutRecord>,
    pub energy: f64,
    pub max_residual: f64,
    pub vertices: Vec<VertexRecord>,
}

fn side_name(side: Option<Side>) -> Option<String> {
    side.map(|s| s.to_string())
}

impl ResultFile {
    pub fn from_result(
        fractal_ref: &FractalRef,
        fractal: &Fractal,
        structure: &HarmonicStructure,
        r: &HarmonicMapResult,
    ) -> Self {
        let vertices = r
            .rows(fractal)
            .into_iter()
            .map(|row| VertexRecord {
                id: row.id.to_string(),
                side: side_name(row.side),
                x: Some(row.point.x),
                y: Some(row.point.y),
                lift: row.lift,
                exact: row.exact.map(|e| format_rational(&e)),
                circle: row.circle,
            })
            .collect();
        ResultFile {
            fractal: fractal_ref.name().to_string(),
            fractal_spec: match fractal_ref {
                FractalRef::Custom(c) => Some(c.clone()),
                FractalRef::Catalog(_) => None,
            },
            solver: r.solver.clone(),
            level: r.level,
            indexing: r.indexing.to_string(),
            degree: r.degree.entries().to_vec(),
            recovered_degree: r.recovered_degree.entries().to_vec(),
            deltas: r.boundary.deltas.iter().map(format_rational).collect(),
            structure: StructureDef::from_structure(structure),
            cuts: r.cut_graph.cuts.iter().map(cut_record).collect(),
            energy: r.energy,
            max_residual: r.max_residual,
            vertices,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Input {
            path: "<result>".into(),
            message: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let input = |message: String| CliError::Input {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| input(e.to_string()))
    }

    pub fn fractal_ref(&self) -> FractalRef {
        match &self.fractal_spec {
            Some(c) => FractalRef::Custom(c.clone()),
            None => FractalRef::Catalog(self.fractal.clone()),
        }
    }

    /// Fractal and structure the result was computed with.
    pub fn setting(&self, catalog: &Catalog) -> CliResult<(Fractal, HarmonicStructure)> {
        let fractal = self.fractal_ref().load(catalog)?;
        let structure = self.structure.build(fractal.alphabet())?;
        Ok((fractal, structure))
    }

    pub fn boundary(&self) -> CliResult<BoundaryData> {
        let deltas = self
            .deltas
            .iter()
            .map(|d| parse_rational(d))
            .collect::<Result<_, _>>()
            .map_err(CliError::config)?;
        Ok(BoundaryData::new(deltas))
    }

    pub fn degree_vector(&self) -> DegreeVector {
        DegreeVector::new(self.degree.clone())
    }

    pub fn cut_points(&self) -> CliResult<Vec<CutPoint>> {
        self.cuts
            .iter()
            .map(|c| {
                Ok(CutPoint {
                    vertex: c.vertex.parse().map_err(CliError::config)?,
                    plus: c.plus.parse().map_err(CliError::config)?,
                    minus: c.minus.parse().map_err(CliError::config)?,
                    shift: c.shift,
                    cycle: c.cycle,
                })
            })
            .collect()
    }

    /// `id,x,y,lift,circle`; plus copies of cut vertices carry a `+` after the id.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,x,y,lift,circle\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for v in &self.vertices {
            let id = if v.is_plus() {
                format!("{}+", v.id)
            } else {
                v.id.clone()
            };
            writeln!(
                out,
                "{},{},{},{},{}",
                id,
                opt(v.x),
                opt(v.y),
                v.lift,
                v.circle
            )
            .expect("write to string");
        }
        out
    }
}

fn cut_record(c: &CutPoint) -> CutRecord {
    CutRecord {
        vertex: c.vertex.to_string(),
        plus: c.plus.to_string(),
        minus: c.minus.to_string(),
        shift: c.shift,
        cycle: c.cycle,
    }
}
