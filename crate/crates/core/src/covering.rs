//! Cut points, cut graphs and degree bookkeeping for lifts of circle-valued maps.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Fractal, Itinerary, VertexId, Word};
use crate::graph::{
    build_graph, cell_loops, is_gasket, spanning_tree_basis, ApproxGraph, CellLoop, Cycle, CycleBasis,
    EmbeddedCycle, Embedder, HarmonicStructure,
};
use crate::scalar::{frac_f64, Rational};

/// Integer degrees, stored without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DegreeVector(Vec<i64>);

impl DegreeVector {
    pub fn new(mut entries: Vec<i64>) -> Self {
        while entries.last() == Some(&0) {
            entries.pop();
        }
        DegreeVector(entries)
    }

    pub fn zero() -> Self {
        DegreeVector(Vec::new())
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i64 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Least `N` such that every non-zero entry is indexed by a loop of
    /// order at most `N` (i.e. index ≤ (3^{N+1} - 3)/2).
    pub fn order(&self) -> usize {
        let len = self.0.len();
        let mut n = 0;
        while (3usize.pow(n as u32 + 1) - 1) / 2 < len {
            n += 1;
        }
        n
    }

    /// Entries padded with zeros to `len`.
    pub fn padded(&self, len: usize) -> Vec<i64> {
        (0..len.max(self.0.len())).map(|i| self.get(i)).collect()
    }
}

impl fmt::Display for DegreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", if parts.is_empty() { "0".to_string() } else { parts.join(", ") })
    }
}

/// Boundary increments: `f(p_1) = 0`, `f(p_{i+1}) = f(p_i) + δ_i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundaryData {
    pub deltas: Vec<Rational>,
}

impl BoundaryData {
    pub fn new(deltas: Vec<Rational>) -> Self {
        BoundaryData { deltas }
    }

    pub fn zero(boundary_len: usize) -> Self {
        BoundaryData { deltas: vec![Rational::from_integer(0); boundary_len.saturating_sub(1)] }
    }

    /// Values on `V_0` in boundary order.
    pub fn boundary_values(&self, boundary_len: usize) -> Result<Vec<Rational>> {
        if self.deltas.len() + 1 != boundary_len {
            return Err(Error::InvalidBoundary(format!(
                "{} increments given, {} expected",
                self.deltas.len(),
                boundary_len.saturating_sub(1)
            )));
        }
        let mut out = vec![Rational::from_integer(0)];
        for d in &self.deltas {
            let last = *out.last().expect("non-empty");
            out.push(last + d);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Minus,
    Plus,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

/// A vertex split into two copies; values satisfy `f(plus) = f(minus) + shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutPoint {
    pub vertex: VertexId,
    /// Itinerary of the vertex seen from the cell whose edges attach to the plus copy.
    pub plus: Itinerary,
    pub minus: Itinerary,
    pub shift: i64,
    /// Position of the loop or basis cycle this cut opens.
    pub cycle: usize,
}

/// Plus-side corner for the cut opposite corner `k` of a gasket cell.
fn plus_corner(k: u8) -> u8 {
    k % 3 + 1
}

/// One cut per gasket cell `u` with `|u| ≤ N`, on the edge of `u` opposite
/// its last letter (opposite corner 2 for the whole gasket). The plus copy sits
/// on the side the traversal `v_1 → v_2 → v_3` leaves, so that each loop winds
/// by `+ρ`.
pub fn sg_cut_points(fractal: &Fractal, degree: &DegreeVector) -> Result<Vec<CutPoint>> {
    if !is_gasket(fractal) {
        return Err(Error::UnsupportedFractal(fractal.name().to_string()));
    }
    let loops = cell_loops(fractal, degree.order())?;
    loops
        .iter()
        .map(|l| {
            let k = l.word.last().unwrap_or(2);
            let p = plus_corner(k);
            let q = plus_corner(p);
            let plus = Itinerary::new(l.word.child(p), q);
            let minus = Itinerary::new(l.word.child(q), p);
            Ok(CutPoint {
                vertex: fractal.canonical_vertex(&plus)?,
                plus,
                minus,
                shift: degree.get(l.index),
                cycle: l.index,
            })
        })
        .collect()
}

/// Fundamental cycles of `Γ_m` refined into `Γ_{m+1}`.
#[derive(Debug, Clone)]
pub struct BasisSetup {
    pub basis: CycleBasis,
    pub coarse: ApproxGraph,
    pub fine: ApproxGraph,
    pub embedded: Vec<EmbeddedCycle>,
}

pub fn basis_setup(fractal: &Fractal, structure: &HarmonicStructure, basis_level: usize) -> Result<BasisSetup> {
    let coarse = build_graph(fractal, structure, basis_level)?;
    let fine = build_graph(fractal, structure, basis_level + 1)?;
    let basis = spanning_tree_basis(&coarse);
    let embedder = Embedder::new(&coarse, &fine)?;
    let embedded = basis.cycles.iter().map(|c| embedder.embed(c)).collect::<Result<Vec<_>>>()?;
    Ok(BasisSetup { basis, coarse, fine, embedded })
}

/// One cut per basis cycle: the least admissible interior vertex of the
/// refinement path of the cycle's generating edge. Admissible means it lies on
/// no other embedded cycle, is not in `V_0`, and its two path edges come from
/// different level-(m+1) cells.
pub fn pcf_cut_points(fractal: &Fractal, setup: &BasisSetup, degree: &[i64]) -> Result<Vec<CutPoint>> {
    let fine = &setup.fine;
    let mut owners: HashMap<&VertexId, HashSet<usize>> = HashMap::new();
    for (i, e) in setup.embedded.iter().enumerate() {
        for v in &e.cycle.vertices {
            owners.entry(v).or_default().insert(i);
        }
    }
    let mut cuts = Vec::with_capacity(setup.embedded.len());
    for (i, e) in setup.embedded.iter().enumerate() {
        let seg = &e.segments[0];
        let mut best: Option<CutPoint> = None;
        for j in 1..seg.len().saturating_sub(1) {
            let xi = &seg[j];
            if owners.get(xi).map(|s| s.len() > 1).unwrap_or(false) {
                continue;
            }
            let idx = |id: &VertexId| fine.index_of(id).ok_or_else(|| Error::MissingValue(id.to_string()));
            let (p, x, s) = (idx(&seg[j - 1])?, idx(xi)?, idx(&seg[j + 1])?);
            if fine.is_boundary(x) {
                continue;
            }
            let before = &fine.edges[fine.edge_between(p, x).expect("path edge")].cells;
            let after = &fine.edges[fine.edge_between(x, s).expect("path edge")].cells;
            if before.iter().any(|c| after.contains(c)) {
                continue;
            }
            let plus = fine.corner_itinerary(fractal, before[0], x).expect("corner");
            let minus = fine.corner_itinerary(fractal, after[0], x).expect("corner");
            if plus == minus {
                continue;
            }
            if best.as_ref().map(|b| xi < &b.vertex).unwrap_or(true) {
                best = Some(CutPoint {
                    vertex: xi.clone(),
                    plus,
                    minus,
                    shift: degree.get(i).copied().unwrap_or(0),
                    cycle: i,
                });
            }
        }
        cuts.push(best.ok_or(Error::NoAdmissibleCut { cycle: i })?);
    }
    Ok(cuts)
}

/// Pushes level-`from` cycles down to level `to` by repeated refinement.
pub fn refine_cycles(
    fractal: &Fractal,
    structure: &HarmonicStructure,
    cycles: &[Cycle],
    from: usize,
    to: usize,
) -> Result<Vec<Cycle>> {
    let mut current = cycles.to_vec();
    if to <= from {
        return Ok(current);
    }
    let mut coarse = build_graph(fractal, structure, from)?;
    for level in from + 1..=to {
        let fine = build_graph(fractal, structure, level)?;
        let embedder = Embedder::new(&coarse, &fine)?;
        current = current
            .iter()
            .map(|c| embedder.embed(c).map(|e| e.cycle))
            .collect::<Result<_>>()?;
        coarse = fine;
    }
    Ok(current)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutVertex {
    /// Vertex index in the uncut graph.
    pub original: usize,
    pub side: Option<Side>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutEdge {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jump {
    pub minus: usize,
    pub plus: usize,
    pub shift: i64,
}

/// `Γ_m` with every cut vertex split in two. Minus copies keep the original
/// index; plus copies are appended after the original vertices.
#[derive(Debug, Clone)]
pub struct CutGraph {
    pub level: usize,
    pub vertices: Vec<CutVertex>,
    pub edges: Vec<CutEdge>,
    pub jumps: Vec<Jump>,
    /// Values forced on `V_0`.
    pub fixed: Vec<(usize, Rational)>,
    pub cuts: Vec<CutPoint>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
}

impl CutGraph {
    pub fn original_count(&self) -> usize {
        self.vertices.len() - self.jumps.len()
    }

    /// Jump whose plus copy is `v`.
    pub fn jump_of_plus(&self, v: usize) -> Option<&Jump> {
        let n = self.original_count();
        (v >= n).then(|| &self.jumps[v - n])
    }

    pub fn jump_of_minus(&self, v: usize) -> Option<&Jump> {
        self.jumps.iter().find(|j| j.minus == v)
    }

    pub fn energy(&self, values: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.conductance * (values[e.a] - values[e.b]).powi(2))
            .sum()
    }

    /// Graph Laplacian `Σ_y c_xy (f(x) - f(y))` at one copy.
    pub fn laplacian_at(&self, values: &[f64], v: usize) -> f64 {
        self.adjacency[v].iter().map(|&(n, c)| c * (values[v] - values[n])).sum()
    }

    fn total_conductance(&self, v: usize) -> f64 {
        self.adjacency[v].iter().map(|&(_, c)| c).sum()
    }

    /// Harmonicity defect at every non-boundary vertex of the glued graph,
    /// normalized by the vertex's total conductance. Split vertices contribute
    /// the sum over both copies.
    pub fn residuals(&self, values: &[f64]) -> Vec<(usize, f64)> {
        let fixed: HashSet<usize> = self.fixed.iter().map(|&(v, _)| v).collect();
        let mut out = Vec::new();
        for v in 0..self.original_count() {
            if fixed.contains(&v) {
                continue;
            }
            let (mut r, mut c) = (self.laplacian_at(values, v), self.total_conductance(v));
            if let Some(j) = self.jump_of_minus(v) {
                r += self.laplacian_at(values, j.plus);
                c += self.total_conductance(j.plus);
            }
            out.push((v, if c > 0.0 { r / c } else { r }));
        }
        out
    }

    pub fn max_residual(&self, values: &[f64]) -> f64 {
        self.residuals(values).iter().map(|&(_, r)| r.abs()).fold(0.0, f64::max)
    }
}

pub fn build_cut_graph(
    fractal: &Fractal,
    graph: &ApproxGraph,
    cuts: &[CutPoint],
    boundary: &BoundaryData,
) -> Result<CutGraph> {
    let values = boundary.boundary_values(fractal.boundary_len())?;
    let n = graph.vertex_count();
    let mut vertices: Vec<CutVertex> = (0..n).map(|v| CutVertex { original: v, side: None }).collect();
    let mut jumps = Vec::with_capacity(cuts.len());
    let mut cut_at: HashMap<usize, usize> = HashMap::new();
    for (k, cut) in cuts.iter().enumerate() {
        let v = graph
            .index_of(&cut.vertex)
            .ok_or_else(|| Error::CutNotInGraph(cut.vertex.to_string()))?;
        if graph.is_boundary(v) {
            return Err(Error::CutOnBoundary(cut.vertex.to_string()));
        }
        if cut_at.insert(v, k).is_some() {
            return Err(Error::InvalidSpec(format!("vertex {} is cut twice", cut.vertex)));
        }
        vertices[v].side = Some(Side::Minus);
        vertices.push(CutVertex { original: v, side: Some(Side::Plus) });
        jumps.push(Jump { minus: v, plus: n + k, shift: cut.shift });
    }
    let mut attached = vec![[false; 2]; cuts.len()];
    let mut endpoint = |v: usize, cells: &[usize]| -> Result<usize> {
        let Some(&k) = cut_at.get(&v) else { return Ok(v) };
        let mut side = None;
        for &c in cells {
            let it = graph.corner_itinerary(fractal, c, v).expect("edge cell contains endpoint");
            let s = it == cuts[k].plus;
            if side.map(|x| x != s).unwrap_or(false) {
                return Err(Error::InvalidSpec(format!("an edge at {} straddles its cut", cuts[k].vertex)));
            }
            side = Some(s);
        }
        let plus = side.unwrap_or(false);
        attached[k][plus as usize] = true;
        Ok(if plus { n + k } else { v })
    };
    let mut edges = Vec::with_capacity(graph.edge_count());
    for e in &graph.edges {
        edges.push(CutEdge { a: endpoint(e.a, &e.cells)?, b: endpoint(e.b, &e.cells)?, conductance: e.conductance });
    }
    for (k, a) in attached.iter().enumerate() {
        if !a[0] || !a[1] {
            return Err(Error::InvalidSpec(format!(
                "cut at {} does not separate its edges (plus itinerary {})",
                cuts[k].vertex, cuts[k].plus
            )));
        }
    }
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for e in &edges {
        adjacency[e.a].push((e.b, e.conductance));
        adjacency[e.b].push((e.a, e.conductance));
    }
    let fixed = graph.boundary.iter().zip(values).map(|(&v, x)| (v, x)).collect();
    Ok(CutGraph { level: graph.level, vertices, edges, jumps, fixed, cuts: cuts.to_vec(), adjacency })
}

/// Circle-valued function on the vertices of an (uncut) graph, values in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMap {
    pub level: usize,
    pub values: Vec<f64>,
}

impl CircleMap {
    /// Projects a lift on a cut graph (minus copies carry the original index).
    pub fn from_lift(cut: &CutGraph, lift: &[f64]) -> Self {
        let values = (0..cut.original_count()).map(|v| frac_f64(lift[v])).collect();
        CircleMap { level: cut.level, values }
    }
}

/// Lift on sheet `k` of the covering.
pub fn lift_sheet(lift: &[f64], k: i64) -> Vec<f64> {
    lift.iter().map(|x| x + k as f64).collect()
}

/// Signed increment `b - a` reduced into `(-1/2, 1/2]`.
pub fn wrap_increment(a: f64, b: f64) -> f64 {
    let d = b - a;
    let w = d - d.round();
    if w <= -0.5 {
        w + 1.0
    } else {
        w
    }
}

/// Winding number of a closed walk through circle values; every geodesic
/// increment must be below 1/4 so the count is unambiguous.
pub fn winding_number(values: &[f64], cycle: usize) -> Result<i64> {
    let n = values.len();
    let mut total = 0.0;
    for i in 0..n {
        let w = wrap_increment(values[i], values[(i + 1) % n]);
        if w.abs() >= 0.25 {
            return Err(Error::IncrementTooLarge { cycle, position: i, increment: w });
        }
        total += w;
    }
    Ok(total.round() as i64)
}

/// Degrees of `f` around the gasket loops `∂T_w` (in loop-index order).
pub fn degree_vector(f: &CircleMap, graph: &ApproxGraph, loops: &[CellLoop]) -> Result<DegreeVector> {
    let mut out = Vec::with_capacity(loops.len());
    for l in loops {
        let walk = l.trace(graph)?;
        let vals: Vec<f64> = walk.iter().map(|&v| f.values[v]).collect();
        out.push(winding_number(&vals, l.index)?);
    }
    Ok(DegreeVector::new(out))
}

/// Degrees of `f` around arbitrary cycles of `graph`.
pub fn cycle_degrees(f: &CircleMap, graph: &ApproxGraph, cycles: &[Cycle]) -> Result<DegreeVector> {
    let mut out = Vec::with_capacity(cycles.len());
    for (i, c) in cycles.iter().enumerate() {
        let vals: Vec<f64> = c.indices(graph)?.iter().map(|&v| f.values[v]).collect();
        out.push(winding_number(&vals, i)?);
    }
    Ok(DegreeVector::new(out))
}

/// Two circle maps on the gasket are homotopic iff their degree vectors agree.
pub fn homotopic(f: &CircleMap, g: &CircleMap, graph: &ApproxGraph, loops: &[CellLoop]) -> Result<bool> {
    Ok(degree_vector(f, graph, loops)? == degree_vector(g, graph, loops)?)
}

/// Finite window of sheets of the covering, glued along the cuts:
/// plus copy on sheet `k` is identified with the minus copy on sheet `k + shift`.
#[derive(Debug, Clone)]
pub struct GluedGraph {
    pub sheets: std::ops::RangeInclusive<i64>,
    /// `(cut-graph vertex, sheet)` for every glued vertex.
    pub vertices: Vec<(usize, i64)>,
    pub values: Vec<f64>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
    fixed: HashSet<usize>,
}

impl GluedGraph {
    pub fn new(cut: &CutGraph, lift: &[f64], sheets: std::ops::RangeInclusive<i64>) -> Self {
        let mut index: HashMap<(usize, i64), usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut values = Vec::new();
        let fixed_orig: HashSet<usize> = cut.fixed.iter().map(|&(v, _)| v).collect();
        let mut fixed = HashSet::new();
        for k in sheets.clone() {
            let sheet = lift_sheet(lift, k);
            for v in 0..cut.original_count() {
                index.insert((v, k), vertices.len());
                if fixed_orig.contains(&v) {
                    fixed.insert(vertices.len());
                }
                vertices.push((v, k));
                values.push(sheet[v]);
            }
        }
        let resolve = |v: usize, k: i64| -> Option<usize> {
            match cut.jump_of_plus(v) {
                Some(j) => index.get(&(j.minus, k + j.shift)).copied(),
                None => index.get(&(v, k)).copied(),
            }
        };
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for k in sheets.clone() {
            for e in &cut.edges {
                if let (Some(a), Some(b)) = (resolve(e.a, k), resolve(e.b, k)) {
                    adjacency[a].push((b, e.conductance));
                    adjacency[b].push((a, e.conductance));
                }
            }
        }
        GluedGraph { sheets, vertices, values, adjacency, fixed }
    }

    /// Normalized Laplacian residual at glued vertices on `sheet` (which should
    /// be far enough inside the window for all neighbours to be present).
    pub fn residuals_on(&self, sheet: i64) -> Vec<f64> {
        (0..self.vertices.len())
            .filter(|&i| self.vertices[i].1 == sheet && !self.fixed.contains(&i))
            .map(|i| {
                let c: f64 = self.adjacency[i].iter().map(|&(_, c)| c).sum();
                let r: f64 = self.adjacency[i]
                    .iter()
                    .map(|&(n, c)| c * (self.values[i] - self.values[n]))
                    .sum();
                if c > 0.0 {
                    r / c
                } else {
                    r
                }
            })
            .collect()
    }
}

/// Cells of length `n` over `{1,2,3}` in lexicographic order.
pub fn gasket_words(n: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..n {
        out = out.iter().flat_map(|w| (1..=3).map(move |l| w.child(l))).collect();
    }
    out
}
