//! Command-line front end: configuration, result files, verification and
//! SVG figures for circle-valued harmonic maps.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod render;
pub mod verify;

pub use commands::{run_basis, run_renorm, run_solve, BasisReport, RenormReport, SolveOutcome};
pub use config::{FractalRef, SolveConfig, SolveJob};
pub use error::{CliError, CliResult};
pub use output::ResultFile;
pub use render::{render_svg, RenderOptions};
pub use verify::{run_verify, VerifyReport};
