//! Renormalization of a base form through the level-1 network.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Fractal;
use crate::graph::{build_graph, HarmonicStructure};

/// Trace (Schur complement onto `V_0`) of the level-1 network built from `structure`.
pub fn renormalize_form(fractal: &Fractal, structure: &HarmonicStructure) -> Result<DMatrix<f64>> {
    if fractal.alphabet() < 2 {
        return Err(Error::SingularInterior);
    }
    let g = build_graph(fractal, structure, 1)?;
    let n = g.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for e in &g.edges {
        l[(e.a, e.a)] += e.conductance;
        l[(e.b, e.b)] += e.conductance;
        l[(e.a, e.b)] -= e.conductance;
        l[(e.b, e.a)] -= e.conductance;
    }
    let b = &g.boundary;
    let interior: Vec<usize> = (0..n).filter(|v| !b.contains(v)).collect();
    let lbb = DMatrix::from_fn(b.len(), b.len(), |i, j| l[(b[i], b[j])]);
    if interior.is_empty() {
        return Ok(lbb);
    }
    let lii = DMatrix::from_fn(interior.len(), interior.len(), |i, j| l[(interior[i], interior[j])]);
    let lib = DMatrix::from_fn(interior.len(), b.len(), |i, j| l[(interior[i], b[j])]);
    let chol = lii.cholesky().ok_or(Error::SingularInterior)?;
    let x = chol.solve(&lib);
    let schur = lbb - lib.transpose() * x;
    Ok((&schur + schur.transpose()) * 0.5)
}

/// Renormalization factor and how well the traced form matches the base form.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormFit {
    pub r: f64,
    /// `max |R(D)/r - D| / max |D|` under uniform weights `r`.
    pub residual: f64,
    pub form: DMatrix<f64>,
}

/// Uniform `r` with `R_r(D) = D`. With uniform weights the traced form scales
/// as `R_r(D) = R_1(D) / r`, so `r` is the projection of `R_1(D)` onto `D`.
pub fn find_renormalization_factor(fractal: &Fractal, base: &DMatrix<f64>, tol: f64) -> Result<RenormFit> {
    let unit = HarmonicStructure::uniform(base.clone(), fractal.alphabet(), 1.0)?;
    let traced = renormalize_form(fractal, &unit).map_err(|e| match e {
        Error::SingularInterior => Error::NoFixedPoint("degenerate level-1 network".into()),
        other => other,
    })?;
    let r = traced.dot(base) / base.dot(base);
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::NoFixedPoint(format!("projected factor {r} is outside (0, 1)")));
    }
    let form = &traced / r;
    let residual = (&form - base).amax() / base.amax();
    if residual > tol {
        return Err(Error::NoFixedPoint(format!(
            "traced form differs from the base form by {residual:.3e} after scaling"
        )));
    }
    Ok(RenormFit { r, residual, form })
}

/// Power iteration `D ↦ R_1(D)` (normalized) from the complete graph on `V_0`,
/// returning the self-similar form and its factor.
pub fn self_similar_form(fractal: &Fractal, tol: f64, max_iter: usize) -> Result<RenormFit> {
    let n = fractal.boundary_len();
    let mut d = HarmonicStructure::complete(n, vec![1.0; fractal.alphabet()])?.base;
    let norm = d.norm();
    for _ in 0..max_iter {
        let unit = HarmonicStructure::uniform(d.clone(), fractal.alphabet(), 1.0)?;
        let traced = renormalize_form(fractal, &unit)?;
        let next = &traced * (norm / traced.norm());
        let change = (&next - &d).amax() / next.amax();
        d = next;
        if change < tol * 1e-2 {
            return find_renormalization_factor(fractal, &d, tol);
        }
    }
    Err(Error::NoFixedPoint(format!("power iteration did not settle in {max_iter} steps")))
}
