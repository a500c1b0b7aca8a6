//! Level-m graph approximations `Γ_m`, the gasket's cell loops, spanning-tree
//! cycle bases and refinement of cycles from `Γ_m` into `Γ_{m+1}`.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::{AffineMap, ExactPoint, Fractal, Itinerary, Location, PointIndex, VertexId, Word};
use crate::scalar::Rational;

/// Default guard on the number of level-m cells a graph may allocate.
pub const DEFAULT_CELL_LIMIT: u128 = 3_000_000;

/// Base form on `V_0` (a Laplacian: symmetric, zero row sums, non-positive
/// off-diagonal) together with the renormalization weights `r_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicStructure {
    pub base: DMatrix<f64>,
    pub weights: Vec<f64>,
}

impl HarmonicStructure {
    pub fn new(base: DMatrix<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = base.nrows();
        let bad = |m: &str| Err(Error::InvalidStructure(m.to_string()));
        if base.ncols() != n || n < 2 {
            return bad("base form must be a square matrix of size at least 2");
        }
        let scale = base.amax().max(1e-300);
        for i in 0..n {
            let row: f64 = base.row(i).sum();
            if row.abs() > 1e-9 * scale {
                return bad("base form rows must sum to zero");
            }
            for j in 0..n {
                if (base[(i, j)] - base[(j, i)]).abs() > 1e-12 * scale {
                    return bad("base form must be symmetric");
                }
                if i != j && base[(i, j)] > 1e-12 * scale {
                    return bad("off-diagonal conductances must be non-negative");
                }
            }
        }
        // connectivity of the conductance graph on V_0
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && base[(i, j)] < -1e-12 * scale {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("base form must connect V_0");
        }
        // r = 1 is accepted so that renormalization can be probed without scaling
        if weights.is_empty() || weights.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return bad("weights must lie in (0, 1]");
        }
        Ok(HarmonicStructure { base, weights })
    }

    /// Complete graph on `n` vertices with unit conductances.
    pub fn complete(n: usize, weights: Vec<f64>) -> Result<Self> {
        let mut base = DMatrix::from_element(n, n, -1.0);
        for i in 0..n {
            base[(i, i)] = (n - 1) as f64;
        }
        Self::new(base, weights)
    }

    pub fn uniform(base: DMatrix<f64>, n_maps: usize, r: f64) -> Result<Self> {
        Self::new(base, vec![r; n_maps])
    }

    pub fn conductance(&self, s: usize, t: usize) -> f64 {
        -self.base[(s, t)]
    }

    fn check(&self, fractal: &Fractal) -> Result<()> {
        if self.base.nrows() != fractal.boundary_len() {
            return Err(Error::InvalidStructure(format!(
                "base form has size {}, but V_0 has {} points",
                self.base.nrows(),
                fractal.boundary_len()
            )));
        }
        if self.weights.len() != fractal.alphabet() {
            return Err(Error::InvalidStructure(format!(
                "{} weights for {} maps",
                self.weights.len(),
                fractal.alphabet()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphVertex {
    pub id: VertexId,
    pub location: Location,
    /// Position in `V_0` when the vertex is a boundary point.
    pub boundary_slot: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
    /// Level-m cells contributing to this edge.
    pub cells: Vec<usize>,
    /// Part of the cell skeleton (and hence of the cycle structure).
    pub skeleton: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphCell {
    pub word: Word,
    /// Vertex index of `F_w(p_s)` for each boundary slot `s`.
    pub corners: Vec<usize>,
    /// `∏ 1/r_{w_i}`.
    pub energy_scale: f64,
}

#[derive(Debug, Clone)]
pub struct ApproxGraph {
    pub level: usize,
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdge>,
    /// Cells of length `level`, in lexicographic order of their words.
    pub cells: Vec<GraphCell>,
    /// Per vertex: `(neighbour, skeleton edge)` sorted by neighbour.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    /// Vertex indices of `V_0` in boundary order.
    pub boundary: Vec<usize>,
    alphabet: usize,
    index: PointIndex,
    by_id: HashMap<VertexId, usize>,
}

impl ApproxGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn index_of(&self, id: &VertexId) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn locate(&self, p: &Location) -> Option<usize> {
        self.index.get(p)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|k| self.adjacency[a][k].1)
    }

    /// `|E| - |V| + 1` for the connected skeleton.
    pub fn cycle_space_dim(&self) -> usize {
        self.edges.iter().filter(|e| e.skeleton).count() + 1 - self.vertices.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.vertices[v].boundary_slot.is_some()
    }

    /// Index of the cell `w` (with `|w| = level`).
    pub fn cell_index(&self, w: &Word) -> Option<usize> {
        if w.len() != self.level {
            return None;
        }
        let mut k = 0usize;
        for &l in w.letters() {
            if l == 0 || l as usize > self.alphabet {
                return None;
            }
            k = k * self.alphabet + (l as usize - 1);
        }
        Some(k)
    }

    /// Normalized itinerary of corner vertex `v` as seen from cell `cell`.
    pub fn corner_itinerary(&self, fractal: &Fractal, cell: usize, v: usize) -> Option<Itinerary> {
        let c = &self.cells[cell];
        let slot = c.corners.iter().position(|&x| x == v)?;
        Some(Itinerary::new(c.word.clone(), fractal.boundary_labels()[slot]))
    }

    /// `Σ c_xy (f(x) - f(y))²`.
    pub fn energy(&self, values: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.conductance * (values[e.a] - values[e.b]).powi(2))
            .sum()
    }
}

pub fn build_graph(fractal: &Fractal, structure: &HarmonicStructure, level: usize) -> Result<ApproxGraph> {
    build_graph_with_limit(fractal, structure, level, DEFAULT_CELL_LIMIT)
}

pub fn build_graph_with_limit(
    fractal: &Fractal,
    structure: &HarmonicStructure,
    level: usize,
    cell_limit: u128,
) -> Result<ApproxGraph> {
    structure.check(fractal)?;
    let n = fractal.alphabet();
    let cells_needed = (n as u128).checked_pow(level as u32).unwrap_or(u128::MAX);
    if cells_needed > cell_limit {
        return Err(Error::LevelTooLarge { level, cells: cells_needed, limit: cell_limit });
    }

    // cell maps, level by level, in lexicographic order
    let mut layer: Vec<(Word, AffineMap, f64)> = vec![(Word::empty(), fractal.word_map(&Word::empty())?, 1.0)];
    for _ in 0..level {
        let mut next = Vec::with_capacity(layer.len() * n);
        for (w, f, s) in &layer {
            for l in 1..=n as u8 {
                let g = f.compose(fractal.map(l)?);
                next.push((w.child(l), g, s / structure.weights[l as usize - 1]));
            }
        }
        layer = next;
    }

    let boundary_points = fractal.boundary_points();
    let labels = fractal.boundary_labels();
    let mut index = PointIndex::new(fractal.tolerance());
    let mut locations: Vec<Location> = Vec::new();
    let mut names: Vec<Itinerary> = Vec::new();
    let mut cells = Vec::with_capacity(layer.len());
    for (w, f, scale) in &layer {
        let mut corners = Vec::with_capacity(labels.len());
        for (slot, p) in boundary_points.iter().enumerate() {
            let q = f.apply_location(p);
            let it = Itinerary::new(w.clone(), labels[slot]);
            let v = match index.get(&q) {
                Some(v) => {
                    if it < names[v] {
                        names[v] = it;
                    }
                    v
                }
                None => {
                    index.insert(&q, locations.len());
                    locations.push(q);
                    names.push(it);
                    locations.len() - 1
                }
            };
            corners.push(v);
        }
        cells.push(GraphCell { word: w.clone(), corners, energy_scale: *scale });
    }

    // renumber vertices in canonical order
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    let mut new_index = vec![0; order.len()];
    for (k, &old) in order.iter().enumerate() {
        new_index[old] = k;
    }
    index.remap(|i| new_index[i]);
    for c in &mut cells {
        for v in &mut c.corners {
            *v = new_index[*v];
        }
    }
    let mut vertices: Vec<GraphVertex> = order
        .iter()
        .map(|&old| GraphVertex {
            id: VertexId { itinerary: names[old].clone() },
            location: locations[old].clone(),
            boundary_slot: None,
        })
        .collect();
    let mut boundary = Vec::with_capacity(labels.len());
    for (slot, p) in boundary_points.iter().enumerate() {
        let v = index.get(p).ok_or_else(|| Error::InvalidSpec("V_0 is not contained in V_m".into()))?;
        vertices[v].boundary_slot = Some(slot);
        boundary.push(v);
    }

    let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<GraphEdge> = Vec::new();
    for (ci, c) in cells.iter().enumerate() {
        for s in 0..labels.len() {
            for t in s + 1..labels.len() {
                let g = structure.conductance(s, t);
                let skeleton = fractal.skeleton_pair(s, t);
                if g <= 0.0 {
                    if skeleton {
                        return Err(Error::InvalidStructure(format!(
                            "skeleton pair ({}, {}) has no conductance",
                            s + 1,
                            t + 1
                        )));
                    }
                    continue;
                }
                let (a, b) = (c.corners[s].min(c.corners[t]), c.corners[s].max(c.corners[t]));
                if a == b {
                    return Err(Error::InvalidSpec(format!("cell {} has coincident corners", c.word)));
                }
                let k = *edge_of.entry((a, b)).or_insert_with(|| {
                    edges.push(GraphEdge { a, b, conductance: 0.0, cells: Vec::new(), skeleton: false });
                    edges.len() - 1
                });
                edges[k].skeleton |= skeleton;
                edges[k].conductance += g * c.energy_scale;
                edges[k].cells.push(ci);
            }
        }
    }
    edges.sort_by_key(|e| (e.a, e.b));
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (k, e) in edges.iter().enumerate().filter(|(_, e)| e.skeleton) {
        adjacency[e.a].push((e.b, k));
        adjacency[e.b].push((e.a, k));
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    let by_id = vertices.iter().enumerate().map(|(i, v)| (v.id.clone(), i)).collect();
    Ok(ApproxGraph { level, vertices, edges, cells, adjacency, boundary, alphabet: n, index, by_id })
}

/// True when the IFS is the Sierpinski gasket: three half-scale homotheties
/// towards the three boundary points.
pub fn is_gasket(fractal: &Fractal) -> bool {
    if fractal.alphabet() != 3 || fractal.boundary_labels() != [1, 2, 3] || !fractal.is_exact() {
        return false;
    }
    let half = Rational::new(1, 2);
    let z = Rational::zero();
    let pts = fractal.boundary_points();
    fractal.maps().iter().enumerate().all(|(i, m)| {
        let e = m.exact.as_ref().expect("exact");
        e.linear == [[half, z], [z, half]]
            && pts.iter().all(|p| {
                let (a, b) = (p.exact.as_ref().unwrap(), pts[i].exact.as_ref().unwrap());
                e.apply(a) == a.lerp(b, half)
            })
    })
}

/// `ℓ(w) = Σ w_i 3^{i-1}`; a bijection from gasket words onto the naturals.
pub fn loop_index(w: &Word) -> usize {
    w.letters()
        .iter()
        .rev()
        .fold(0usize, |acc, &l| acc * 3 + l as usize)
}

/// Inverse of [`loop_index`].
pub fn loop_word(mut index: usize) -> Word {
    let mut letters = Vec::new();
    while index > 0 {
        let l = (index - 1) % 3 + 1;
        letters.push(l as u8);
        index = (index - l) / 3;
    }
    Word(letters)
}

/// Boundary loop `∂T_w` of a gasket cell, oriented `F_w(v_1) → F_w(v_2) → F_w(v_3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLoop {
    pub word: Word,
    pub index: usize,
    pub corners: [ExactPoint; 3],
}

impl CellLoop {
    /// Vertex indices of the loop in `graph` (level ≥ |w|), starting at `F_w(v_1)`.
    pub fn trace(&self, graph: &ApproxGraph) -> Result<Vec<usize>> {
        if graph.level < self.word.len() {
            return Err(Error::LevelTooSmall {
                level: graph.level,
                order: self.word.len(),
                required: self.word.len(),
            });
        }
        let steps = 1i128 << (graph.level - self.word.len());
        let mut out = Vec::with_capacity(3 * steps as usize);
        for k in 0..3 {
            let (a, b) = (&self.corners[k], &self.corners[(k + 1) % 3]);
            for j in 0..steps {
                let p = a.lerp(b, Rational::new(j, steps));
                let loc = Location { approx: p.to_point(), exact: Some(p) };
                let v = graph
                    .locate(&loc)
                    .ok_or_else(|| Error::MissingValue(format!("loop {} point {j}", self.index)))?;
                out.push(v);
            }
        }
        Ok(out)
    }
}

/// All cell loops with `ℓ(w)` up to the largest index of order `order`, sorted by index.
pub fn cell_loops(fractal: &Fractal, order: usize) -> Result<Vec<CellLoop>> {
    if !is_gasket(fractal) {
        return Err(Error::UnsupportedFractal(fractal.name().to_string()));
    }
    let count = (3usize.pow(order as u32 + 1) - 1) / 2;
    let base = fractal.boundary_points();
    (0..count)
        .map(|index| {
            let word = loop_word(index);
            let c: Vec<ExactPoint> = base
                .iter()
                .map(|p| fractal.apply_word(&word, p).map(|q| q.exact.expect("gasket is exact")))
                .collect::<Result<_>>()?;
            Ok(CellLoop { word, index, corners: [c[0].clone(), c[1].clone(), c[2].clone()] })
        })
        .collect()
}

/// A closed walk `v_0 → v_1 → … → v_{k-1} → v_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub vertices: Vec<VertexId>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
    pub fn indices(&self, graph: &ApproxGraph) -> Result<Vec<usize>> {
        self.vertices
            .iter()
            .map(|id| graph.index_of(id).ok_or_else(|| Error::MissingValue(id.to_string())))
            .collect()
    }
    /// Consecutive pairs including the closing edge.
    pub fn steps(&self) -> impl Iterator<Item = (&VertexId, &VertexId)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleBasis {
    pub level: usize,
    /// Each cycle starts with its generating non-tree edge.
    pub cycles: Vec<Cycle>,
    pub tree_edges: Vec<(VertexId, VertexId)>,
}

impl CycleBasis {
    pub fn dimension(&self) -> usize {
        self.cycles.len()
    }
}

/// BFS spanning tree of the skeleton from the least vertex (neighbours in canonical order);
/// one fundamental cycle per non-tree edge `u → v`, closed by the tree path `v ⇝ u`.
pub fn spanning_tree_basis(graph: &ApproxGraph) -> CycleBasis {
    let n = graph.vertex_count();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut tree_edge = vec![false; graph.edge_count()];
    let mut queue = VecDeque::from([0usize]);
    parent[0] = 0;
    while let Some(u) = queue.pop_front() {
        for &(v, e) in &graph.adjacency[u] {
            if parent[v] == usize::MAX {
                parent[v] = u;
                depth[v] = depth[u] + 1;
                tree_edge[e] = true;
                queue.push_back(v);
            }
        }
    }
    let id = |v: usize| graph.vertices[v].id.clone();
    let mut cycles = Vec::new();
    let mut tree_edges = Vec::new();
    for (k, e) in graph.edges.iter().enumerate().filter(|(_, e)| e.skeleton) {
        if tree_edge[k] {
            tree_edges.push((id(e.a), id(e.b)));
            continue;
        }
        let (u, v) = (e.a, e.b);
        // climb both ends to the lowest common ancestor
        let (mut x, mut y) = (v, u);
        let mut from_v = vec![v];
        let mut from_u = vec![];
        while x != y {
            if depth[x] >= depth[y] {
                x = parent[x];
                from_v.push(x);
            } else {
                from_u.push(y);
                y = parent[y];
            }
        }
        // from_v = v … lca; from_u = u … (child of lca on u's side)
        let mut walk = vec![u];
        walk.extend(from_v.iter().copied());
        walk.extend(from_u.iter().skip(1).rev().copied());
        if walk.last() == Some(&u) {
            walk.pop();
        }
        cycles.push(Cycle { vertices: walk.into_iter().map(id).collect() });
    }
    CycleBasis { level: graph.level, cycles, tree_edges }
}

/// A cycle pushed from `Γ_m` into `Γ_{m+1}`, with the refinement path of each original edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedCycle {
    pub cycle: Cycle,
    /// `segments[i]` runs from the i-th vertex of the coarse cycle to the next, inclusive.
    pub segments: Vec<Vec<VertexId>>,
}

/// Refines cycles of `coarse` (level m) into `fine` (level m + 1).
pub struct Embedder<'a> {
    coarse: &'a ApproxGraph,
    fine: &'a ApproxGraph,
    edges_by_parent: HashMap<usize, Vec<usize>>,
}

impl<'a> Embedder<'a> {
    pub fn new(coarse: &'a ApproxGraph, fine: &'a ApproxGraph) -> Result<Self> {
        if fine.level != coarse.level + 1 || fine.alphabet != coarse.alphabet {
            return Err(Error::InvalidSpec(format!(
                "cannot embed level {} cycles into level {}",
                coarse.level, fine.level
            )));
        }
        let mut edges_by_parent: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, e) in fine.edges.iter().enumerate().filter(|(_, e)| e.skeleton) {
            let mut parents: Vec<usize> = e.cells.iter().map(|c| c / fine.alphabet).collect();
            parents.dedup();
            for p in parents {
                edges_by_parent.entry(p).or_default().push(k);
            }
        }
        Ok(Embedder { coarse, fine, edges_by_parent })
    }

    /// Unique shortest path from `from` to `to` inside the cells carrying the coarse edge.
    pub fn refine_edge(&self, from: &VertexId, to: &VertexId) -> Result<Vec<VertexId>> {
        let missing = |id: &VertexId| Error::MissingValue(id.to_string());
        let (a, b) = (
            self.coarse.index_of(from).ok_or_else(|| missing(from))?,
            self.coarse.index_of(to).ok_or_else(|| missing(to))?,
        );
        let e = self.coarse.edge_between(a, b).ok_or_else(|| {
            Error::InvalidSpec(format!("{from} and {to} are not adjacent at level {}", self.coarse.level))
        })?;
        let (s, t) = (
            self.fine.index_of(from).ok_or_else(|| missing(from))?,
            self.fine.index_of(to).ok_or_else(|| missing(to))?,
        );
        let mut local: HashMap<usize, Vec<usize>> = HashMap::new();
        for c in &self.coarse.edges[e].cells {
            for &k in self.edges_by_parent.get(c).map(Vec::as_slice).unwrap_or(&[]) {
                let fe = &self.fine.edges[k];
                local.entry(fe.a).or_default().push(fe.b);
                local.entry(fe.b).or_default().push(fe.a);
            }
        }
        for adj in local.values_mut() {
            adj.sort_unstable();
            adj.dedup();
        }
        // BFS counting shortest paths
        let mut dist: HashMap<usize, (usize, u64, usize)> = HashMap::new(); // (dist, count, pred)
        dist.insert(s, (0, 1, s));
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let (du, cu, _) = dist[&u];
            for &w in local.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                match dist.get_mut(&w) {
                    None => {
                        dist.insert(w, (du + 1, cu, u));
                        queue.push_back(w);
                    }
                    Some(entry) if entry.0 == du + 1 => entry.1 += cu,
                    _ => {}
                }
            }
        }
        let ambiguous = || Error::AmbiguousPath { from: from.to_string(), to: to.to_string() };
        match dist.get(&t) {
            Some(&(_, 1, _)) => {}
            _ => return Err(ambiguous()),
        }
        let mut path = vec![t];
        let mut x = t;
        while x != s {
            x = dist[&x].2;
            path.push(x);
        }
        path.reverse();
        Ok(path.into_iter().map(|v| self.fine.vertices[v].id.clone()).collect())
    }

    pub fn embed(&self, cycle: &Cycle) -> Result<EmbeddedCycle> {
        let mut vertices = Vec::new();
        let mut segments = Vec::with_capacity(cycle.len());
        for (a, b) in cycle.steps() {
            let seg = self.refine_edge(a, b)?;
            vertices.extend(seg[..seg.len() - 1].iter().cloned());
            segments.push(seg);
        }
        Ok(EmbeddedCycle { cycle: Cycle { vertices }, segments })
    }
}

pub fn embed_cycle(coarse: &ApproxGraph, fine: &ApproxGraph, cycle: &Cycle) -> Result<EmbeddedCycle> {
    Embedder::new(coarse, fine)?.embed(cycle)
}

/// Unit-conductance base form on a triangle.
pub fn unit_triangle() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0])
}

