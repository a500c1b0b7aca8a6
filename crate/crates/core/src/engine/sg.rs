//! Exact recursive solver on the Sierpinski gasket.
//!
//! A cut of order up to `N` only perturbs cells `u` with `|u| ≤ N`; each such
//! cell responds with a corner-independent midpoint correction and a linear
//! energy term (its flux) that feeds into its parent. The responses are built
//! bottom-up, then the values are pushed down from `V_0` level by level.

use num_traits::Zero;

use crate::covering::{build_cut_graph, sg_cut_points, BoundaryData, CutGraph, DegreeVector, Side};
use crate::engine::extension::{cell_response, classical_extension, offset, CellResponse};
use crate::error::{Error, Result};
use crate::geometry::{Fractal, Word};
use crate::graph::{build_graph, is_gasket, loop_index, ApproxGraph, HarmonicStructure};
use crate::scalar::Scalar;

/// Values on every copy of the cut graph.
#[derive(Debug, Clone)]
pub struct SgSolution<T> {
    pub graph: ApproxGraph,
    pub cut_graph: CutGraph,
    pub values: Vec<T>,
}

/// Least level the recursion accepts for a degree vector of order `N`.
pub fn min_level(degree: &DegreeVector) -> usize {
    degree.order() + 1
}

fn check_structure(structure: &HarmonicStructure) -> Result<()> {
    let uniform = structure.weights.iter().all(|&r| (r - 0.6).abs() < 1e-12);
    let c = structure.conductance(0, 1);
    let triangle = c > 0.0
        && (structure.conductance(0, 2) - c).abs() < 1e-12 * c
        && (structure.conductance(1, 2) - c).abs() < 1e-12 * c;
    if uniform && triangle {
        Ok(())
    } else {
        Err(Error::InvalidStructure(
            "the gasket recursion needs the symmetric triangle form with r = 3/5".into(),
        ))
    }
}

fn word_at(depth: usize, mut idx: usize) -> Word {
    let mut letters = vec![0u8; depth];
    for slot in letters.iter_mut().rev() {
        *slot = (idx % 3) as u8 + 1;
        idx /= 3;
    }
    Word(letters)
}

/// Cut carried by the cell `w` (if `|w| ≤ N`): the midpoint opposite its last
/// letter (opposite corner 2 for the root), shifted by `ρ_{ℓ(w)}`.
fn cell_cut<T: Scalar>(w: &Word, degree: &DegreeVector) -> (usize, T) {
    let k = w.last().map(|l| l as usize - 1).unwrap_or(1);
    (k, T::from_ratio(degree.get(loop_index(w)), 1))
}

pub fn solve_sg_values<T: Scalar>(
    fractal: &Fractal,
    structure: &HarmonicStructure,
    level: usize,
    degree: &DegreeVector,
    boundary: &BoundaryData,
) -> Result<SgSolution<T>> {
    if !is_gasket(fractal) {
        return Err(Error::UnsupportedFractal(fractal.name().to_string()));
    }
    check_structure(structure)?;
    let order = degree.order();
    if level < min_level(degree) {
        return Err(Error::LevelTooSmall { level, order, required: min_level(degree) });
    }
    let graph = build_graph(fractal, structure, level)?;
    let cuts = sg_cut_points(fractal, degree)?;
    let cut_graph = build_cut_graph(fractal, &graph, &cuts, boundary)?;

    // bottom-up responses for |u| ≤ N
    let mut responses: Vec<Vec<CellResponse<T>>> = vec![Vec::new(); order + 1];
    for depth in (0..=order).rev() {
        let count = 3usize.pow(depth as u32);
        let mut layer = Vec::with_capacity(count);
        for idx in 0..count {
            let children: [CellResponse<T>; 3] = if depth == order {
                [CellResponse::zero(), CellResponse::zero(), CellResponse::zero()]
            } else {
                std::array::from_fn(|s| responses[depth + 1][3 * idx + s].clone())
            };
            let cut = Some(cell_cut::<T>(&word_at(depth, idx), degree));
            layer.push(cell_response(&children, &cut));
        }
        responses[depth] = layer;
    }

    // top-down push of corner values (as seen from each cell)
    let b = boundary.boundary_values(3)?;
    let mut corners: Vec<[T; 3]> = vec![std::array::from_fn(|i| T::from_rational(&b[i]))];
    for depth in 0..level {
        let mut next = Vec::with_capacity(corners.len() * 3);
        for (idx, a) in corners.iter().enumerate() {
            let [x, y, z] = classical_extension(&a[0], &a[1], &a[2]);
            // midpoints indexed by opposite corner
            let mut m = [y, z, x];
            let cut = if depth <= order {
                let resp = &responses[depth][idx];
                for (mk, d) in m.iter_mut().zip(resp.delta.iter()) {
                    *mk = mk.clone() + d.clone();
                }
                Some(cell_cut::<T>(&word_at(depth, idx), degree))
            } else {
                None
            };
            for s in 0..3 {
                next.push(std::array::from_fn(|t| {
                    if t == s {
                        a[s].clone()
                    } else {
                        let k = 3 - s - t;
                        m[k].clone() + offset(&cut, s, k)
                    }
                }));
            }
        }
        corners = next;
    }

    let mut values: Vec<Option<T>> = vec![None; cut_graph.vertices.len()];
    let n = graph.vertex_count();
    let cut_index: std::collections::HashMap<usize, usize> =
        cut_graph.jumps.iter().enumerate().map(|(k, j)| (j.minus, k)).collect();
    for (ci, cell) in graph.cells.iter().enumerate() {
        for (slot, &v) in cell.corners.iter().enumerate() {
            let target = match cut_index.get(&v) {
                Some(&k) => {
                    let it = graph.corner_itinerary(fractal, ci, v).expect("corner");
                    if it == cut_graph.cuts[k].plus {
                        n + k
                    } else {
                        v
                    }
                }
                None => v,
            };
            let val = corners[ci][slot].clone();
            match &values[target] {
                Some(old) if *old != val && !close(old, &val) => {
                    return Err(Error::NotConverged(format!(
                        "inconsistent values at vertex {}",
                        graph.vertices[v].id
                    )))
                }
                _ => values[target] = Some(val),
            }
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                let cv = cut_graph.vertices[i];
                let side = cv.side.map(|s: Side| format!(" ({s})")).unwrap_or_default();
                Error::MissingValue(format!("{}{side}", graph.vertices[cv.original].id))
            })
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(SgSolution { graph, cut_graph, values })
}

fn close<T: Scalar>(a: &T, b: &T) -> bool {
    let d = (a.clone() - b.clone()).to_f64();
    a.as_rational().is_none() && (d.abs() <= 1e-9 || d.is_zero())
}
