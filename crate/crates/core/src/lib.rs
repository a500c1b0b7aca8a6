//! Circle-valued harmonic maps of prescribed degree on post-critically
//! finite self-similar sets.
//!
//! The pipeline: build a fractal ([`geometry`], [`catalog`]), approximate it
//! by graphs ([`graph`]), cut the graph so that a real-valued lift can carry
//! the prescribed winding ([`covering`]), then solve ([`engine`]).

pub mod catalog;
pub mod covering;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod scalar;

pub use catalog::Catalog;
pub use covering::{BoundaryData, CircleMap, CutPoint, DegreeVector};
pub use engine::{solve, DegreeIndexing, HarmonicMapResult, HarmonicSolver, Problem, SolverRegistry};
pub use error::{Error, Result};
pub use geometry::{make_fractal, Fractal, FractalSpec, Itinerary, VertexId, Word};
pub use graph::{build_graph, ApproxGraph, HarmonicStructure};
pub use scalar::{parse_rational, Rational};
