//! Self-similar sets given by contractive affine maps: words, itineraries,
//! exact/float coordinates and structural validation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Rational};

/// A finite word over the alphabet `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn letters(&self) -> &[u8] {
        &self.0
    }
    pub fn child(&self, letter: u8) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }
    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// The point `F_prefix(p_tail)` where `p_tail` is the fixed point of `F_tail`,
/// i.e. the infinite word `prefix · tail tail tail …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Itinerary {
    pub prefix: Word,
    pub tail: u8,
}

impl Itinerary {
    pub fn new(prefix: Word, tail: u8) -> Self {
        Itinerary { prefix, tail }.normalized()
    }

    pub fn boundary(tail: u8) -> Self {
        Itinerary { prefix: Word::empty(), tail }
    }

    /// Strips trailing letters equal to the tail; the result names the same point.
    pub fn normalized(mut self) -> Self {
        while self.prefix.last() == Some(self.tail) {
            self.prefix.0.pop();
        }
        self
    }
}

impl Ord for Itinerary {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prefix
            .len()
            .cmp(&other.prefix.len())
            .then_with(|| self.prefix.cmp(&other.prefix))
            .then_with(|| self.tail.cmp(&other.tail))
    }
}

impl PartialOrd for Itinerary {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}~{}", self.prefix, self.tail)
    }
}

impl FromStr for Itinerary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse itinerary '{s}'"));
        let (prefix, tail) = s.split_once('~').ok_or_else(bad)?;
        let tail: u8 = tail.trim().parse().map_err(|_| bad())?;
        let letters = if prefix.trim().is_empty() {
            Vec::new()
        } else {
            prefix
                .split('.')
                .map(|l| l.trim().parse::<u8>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Itinerary { prefix: Word(letters), tail })
    }
}

/// Canonical vertex name: the least itinerary (length, then lexicographic) of
/// a point of `V_*`; `level` is the least `m` with the point in `V_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub itinerary: Itinerary,
}

impl VertexId {
    pub fn level(&self) -> usize {
        self.itinerary.prefix.len()
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.itinerary.fmt(f)
    }
}

impl FromStr for VertexId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(VertexId { itinerary: s.parse()? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }
    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactPoint {
    pub x: Rational,
    pub y: Rational,
}

impl ExactPoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        ExactPoint { x, y }
    }
    pub fn to_point(&self) -> Point {
        Point::new(rational_to_f64(&self.x), rational_to_f64(&self.y))
    }
    pub fn lerp(&self, other: &ExactPoint, t: Rational) -> ExactPoint {
        ExactPoint::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

/// A point with its float coordinates and, when the IFS is rational, exact ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub approx: Point,
    pub exact: Option<ExactPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactAffine {
    pub linear: [[Rational; 2]; 2],
    pub offset: [Rational; 2],
}

impl ExactAffine {
    pub fn identity() -> Self {
        let (o, z) = (Rational::one(), Rational::zero());
        ExactAffine { linear: [[o, z], [z, o]], offset: [z, z] }
    }

    pub fn apply(&self, p: &ExactPoint) -> ExactPoint {
        let a = &self.linear;
        ExactPoint::new(
            a[0][0] * p.x + a[0][1] * p.y + self.offset[0],
            a[1][0] * p.x + a[1][1] * p.y + self.offset[1],
        )
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ExactAffine) -> ExactAffine {
        let a = &self.linear;
        let b = &other.linear;
        let mut linear = [[Rational::zero(); 2]; 2];
        for (i, row) in linear.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        let o = self.apply(&ExactPoint::new(other.offset[0], other.offset[1]));
        ExactAffine { linear, offset: [o.x, o.y] }
    }

    fn fixed_point(&self) -> Option<ExactPoint> {
        let a = &self.linear;
        let m00 = Rational::one() - a[0][0];
        let m01 = -a[0][1];
        let m10 = -a[1][0];
        let m11 = Rational::one() - a[1][1];
        let det = m00 * m11 - m01 * m10;
        if det.is_zero() {
            return None;
        }
        let [b0, b1] = self.offset;
        Some(ExactPoint::new((m11 * b0 - m01 * b1) / det, (m00 * b1 - m10 * b0) / det))
    }
}

/// `x ↦ A x + b`, optionally carried in exact rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub linear: [[f64; 2]; 2],
    pub offset: [f64; 2],
    pub exact: Option<ExactAffine>,
}

impl AffineMap {
    pub fn float(linear: [[f64; 2]; 2], offset: [f64; 2]) -> Self {
        AffineMap { linear, offset, exact: None }
    }

    pub fn exact(linear: [[Rational; 2]; 2], offset: [Rational; 2]) -> Self {
        let f = |r: &Rational| rational_to_f64(r);
        AffineMap {
            linear: [[f(&linear[0][0]), f(&linear[0][1])], [f(&linear[1][0]), f(&linear[1][1])]],
            offset: [f(&offset[0]), f(&offset[1])],
            exact: Some(ExactAffine { linear, offset }),
        }
    }

    /// `x ↦ r x + (1 - r) c`.
    pub fn homothety(r: Rational, center: &ExactPoint) -> Self {
        let z = Rational::zero();
        let s = Rational::one() - r;
        AffineMap::exact([[r, z], [z, r]], [s * center.x, s * center.y])
    }

    pub fn identity() -> Self {
        let e = ExactAffine::identity();
        AffineMap::exact(e.linear, e.offset)
    }

    pub fn apply(&self, p: Point) -> Point {
        let a = &self.linear;
        Point::new(
            a[0][0] * p.x + a[0][1] * p.y + self.offset[0],
            a[1][0] * p.x + a[1][1] * p.y + self.offset[1],
        )
    }

    pub fn apply_location(&self, p: &Location) -> Location {
        Location {
            approx: self.apply(p.approx),
            exact: match (&self.exact, &p.exact) {
                (Some(m), Some(q)) => Some(m.apply(q)),
                _ => None,
            },
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let a = &self.linear;
        let b = &other.linear;
        let mut linear = [[0.0; 2]; 2];
        for (i, row) in linear.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        let o = self.apply(Point::new(other.offset[0], other.offset[1]));
        AffineMap {
            linear,
            offset: [o.x, o.y],
            exact: match (&self.exact, &other.exact) {
                (Some(x), Some(y)) => Some(x.compose(y)),
                _ => None,
            },
        }
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.linear;
        let s1 = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        let disc = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
        ((s1 + disc) / 2.0).sqrt()
    }

    pub fn determinant(&self) -> f64 {
        self.linear[0][0] * self.linear[1][1] - self.linear[0][1] * self.linear[1][0]
    }

    pub fn fixed_point(&self) -> Option<Location> {
        let [[a, b], [c, d]] = self.linear;
        let (m00, m01, m10, m11) = (1.0 - a, -b, -c, 1.0 - d);
        let det = m00 * m11 - m01 * m10;
        if det.abs() < 1e-15 {
            return None;
        }
        let [b0, b1] = self.offset;
        let approx = Point::new((m11 * b0 - m01 * b1) / det, (m00 * b1 - m10 * b0) / det);
        let exact = match &self.exact {
            Some(e) => Some(e.fixed_point()?),
            None => None,
        };
        let approx = exact.as_ref().map(|e| e.to_point()).unwrap_or(approx);
        Some(Location { approx, exact })
    }
}

/// Input description of an iterated function system.
#[derive(Debug, Clone, PartialEq)]
pub struct FractalSpec {
    pub name: String,
    pub maps: Vec<AffineMap>,
    /// Letters whose fixed points form `V_0`, in boundary order.
    pub boundary: Vec<u8>,
    pub contraction_bound: f64,
    /// Linear map applied to model coordinates for output.
    pub display: [[f64; 2]; 2],
    /// Pairs of boundary slots (0-based) joined by the cell's boundary curve;
    /// `None` means every pair. Cycle bases and cuts live on this skeleton.
    pub skeleton: Option<Vec<(usize, usize)>>,
}

impl FractalSpec {
    pub fn new(name: impl Into<String>, maps: Vec<AffineMap>, boundary: Vec<u8>) -> Self {
        FractalSpec {
            name: name.into(),
            maps,
            boundary,
            contraction_bound: 1.0,
            display: [[1.0, 0.0], [0.0, 1.0]],
            skeleton: None,
        }
    }

    pub fn with_skeleton(mut self, pairs: Vec<(usize, usize)>) -> Self {
        self.skeleton = Some(pairs);
        self
    }

    pub fn with_display(mut self, display: [[f64; 2]; 2]) -> Self {
        self.display = display;
        self
    }

    pub fn with_contraction_bound(mut self, bound: f64) -> Self {
        self.contraction_bound = bound;
        self
    }
}

/// A validated self-similar set.
#[derive(Debug, Clone)]
pub struct Fractal {
    spec: FractalSpec,
    fixed: Vec<Location>,
    hull: Vec<Point>,
    diameter: f64,
    tolerance: f64,
}

/// Validates contraction, connectivity and post-critical finiteness.
pub fn make_fractal(spec: FractalSpec) -> Result<Fractal> {
    let fractal = Fractal::assemble(spec)?;
    fractal.check_connected()?;
    fractal.check_contacts()?;
    Ok(fractal)
}

impl Fractal {
    /// Checks the maps and labels only; topology is not validated.
    pub fn assemble(mut spec: FractalSpec) -> Result<Fractal> {
        // one float map makes every coordinate approximate
        if spec.maps.iter().any(|m| m.exact.is_none()) {
            for m in &mut spec.maps {
                m.exact = None;
            }
        }
        let n = spec.maps.len();
        if n == 0 {
            return Err(Error::InvalidSpec("no maps".into()));
        }
        if n > u8::MAX as usize {
            return Err(Error::InvalidSpec("alphabet larger than 255".into()));
        }
        for (i, m) in spec.maps.iter().enumerate() {
            let norm = m.operator_norm();
            if !norm.is_finite() || norm >= 1.0 || norm > spec.contraction_bound + 1e-12 {
                return Err(Error::NonContractive { index: i + 1, norm });
            }
        }
        if spec.boundary.is_empty() {
            return Err(Error::InvalidSpec("empty boundary".into()));
        }
        for &l in &spec.boundary {
            if l == 0 || l as usize > n {
                return Err(Error::BadLetter { letter: l as usize, alphabet: n });
            }
        }
        let mut sorted = spec.boundary.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != spec.boundary.len() {
            return Err(Error::InvalidSpec("repeated boundary label".into()));
        }
        if let Some(pairs) = &spec.skeleton {
            let b = spec.boundary.len();
            if pairs.iter().any(|&(s, t)| s >= b || t >= b || s == t) {
                return Err(Error::InvalidSpec("skeleton pair outside the boundary slots".into()));
            }
        }
        let fixed = spec
            .maps
            .iter()
            .map(|m| m.fixed_point().ok_or_else(|| Error::InvalidSpec("map without fixed point".into())))
            .collect::<Result<Vec<_>>>()?;
        let hull = invariant_hull(&spec.maps, &fixed);
        let diameter = polygon_diameter(&hull).max(f64::MIN_POSITIVE);
        Ok(Fractal { tolerance: 1e-12 * diameter.max(1.0), spec, fixed, hull, diameter })
    }

    pub fn spec(&self) -> &FractalSpec {
        &self.spec
    }
    pub fn name(&self) -> &str {
        &self.spec.name
    }
    pub fn alphabet(&self) -> usize {
        self.spec.maps.len()
    }
    pub fn maps(&self) -> &[AffineMap] {
        &self.spec.maps
    }
    pub fn boundary_labels(&self) -> &[u8] {
        &self.spec.boundary
    }
    pub fn boundary_len(&self) -> usize {
        self.spec.boundary.len()
    }
    /// Whether boundary slots `s` and `t` are adjacent on the cell skeleton.
    pub fn skeleton_pair(&self, s: usize, t: usize) -> bool {
        match &self.spec.skeleton {
            None => s != t,
            Some(pairs) => pairs.iter().any(|&(a, b)| (a, b) == (s, t) || (b, a) == (s, t)),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.spec.maps.iter().all(|m| m.exact.is_some())
    }
    pub fn diameter(&self) -> f64 {
        self.diameter
    }
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
    pub fn hull(&self) -> &[Point] {
        &self.hull
    }

    /// Fixed point of `F_letter`.
    pub fn fixed_point(&self, letter: u8) -> Result<&Location> {
        self.check_letter(letter)?;
        Ok(&self.fixed[letter as usize - 1])
    }

    pub fn boundary_points(&self) -> Vec<Location> {
        self.spec.boundary.iter().map(|&l| self.fixed[l as usize - 1].clone()).collect()
    }

    pub fn map(&self, letter: u8) -> Result<&AffineMap> {
        self.check_letter(letter)?;
        Ok(&self.spec.maps[letter as usize - 1])
    }

    fn check_letter(&self, letter: u8) -> Result<()> {
        if letter == 0 || letter as usize > self.alphabet() {
            return Err(Error::BadLetter { letter: letter as usize, alphabet: self.alphabet() });
        }
        Ok(())
    }

    /// `F_w = F_{w_1} ∘ … ∘ F_{w_n}`.
    pub fn word_map(&self, w: &Word) -> Result<AffineMap> {
        let mut acc = AffineMap::identity();
        if !self.is_exact() {
            acc.exact = None;
        }
        for &l in w.letters() {
            acc = acc.compose(self.map(l)?);
        }
        Ok(acc)
    }

    pub fn apply_word(&self, w: &Word, p: &Location) -> Result<Location> {
        let mut q = p.clone();
        for &l in w.letters().iter().rev() {
            q = self.map(l)?.apply_location(&q);
        }
        Ok(q)
    }

    pub fn vertex_coordinates(&self, it: &Itinerary) -> Result<Location> {
        let p = self.fixed_point(it.tail)?.clone();
        self.apply_word(&it.prefix, &p)
    }

    /// Output coordinates.
    pub fn display(&self, p: Point) -> Point {
        let d = &self.spec.display;
        Point::new(d[0][0] * p.x + d[0][1] * p.y, d[1][0] * p.x + d[1][1] * p.y)
    }

    pub fn same_point(&self, a: &Location, b: &Location) -> bool {
        match (&a.exact, &b.exact) {
            (Some(x), Some(y)) => x == y,
            _ => a.approx.dist(b.approx) <= self.tolerance,
        }
    }

    /// Least itinerary naming the same point; fails if the tail is not a boundary label.
    pub fn canonical_vertex(&self, it: &Itinerary) -> Result<VertexId> {
        if !self.spec.boundary.contains(&it.tail) {
            return Err(Error::InvalidSpec(format!(
                "itinerary {it} does not end in a boundary label"
            )));
        }
        for &l in it.prefix.letters() {
            self.check_letter(l)?;
        }
        let it = it.clone().normalized();
        let target = self.vertex_coordinates(&it)?;
        let mut best = it.clone();
        let mut stack: Vec<(Word, AffineMap)> = vec![(Word::empty(), self.word_map(&Word::empty())?)];
        let slack = 4.0 * self.tolerance;
        while let Some((w, f)) = stack.pop() {
            for &t in &self.spec.boundary {
                let cand = Itinerary::new(w.clone(), t);
                if cand < best {
                    let p = f.apply_location(&self.fixed[t as usize - 1]);
                    if self.same_point(&p, &target) {
                        best = cand;
                    }
                }
            }
            if w.len() < best.prefix.len() {
                for l in 1..=self.alphabet() as u8 {
                    let g = f.compose(&self.spec.maps[l as usize - 1]);
                    let cell: Vec<Point> = self.hull.iter().map(|&p| g.apply(p)).collect();
                    if point_polygon_distance(target.approx, &convex_hull(&cell)) <= slack {
                        stack.push((w.child(l), g));
                    }
                }
            }
        }
        Ok(VertexId { itinerary: best })
    }

    fn level_one_corners(&self) -> Vec<Vec<Location>> {
        self.spec
            .maps
            .iter()
            .map(|m| self.boundary_points().iter().map(|p| m.apply_location(p)).collect())
            .collect()
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.alphabet();
        let corners = self.level_one_corners();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for i in 0..n {
            for j in i + 1..n {
                let touch = corners[i]
                    .iter()
                    .any(|a| corners[j].iter().any(|b| self.same_point(a, b)));
                if touch {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, 0);
        if (0..n).all(|i| find(&mut parent, i) == root) {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    /// Level-1 cells may meet only in single points that are images of `V_0`
    /// under both maps; any area or segment overlap means the set is not p.c.f.
    fn check_contacts(&self) -> Result<()> {
        let n = self.alphabet();
        if n < 2 {
            return Err(Error::NotPcf("a single map has no junction points".into()));
        }
        let corners = self.level_one_corners();
        let cells: Vec<Vec<Point>> = self
            .spec
            .maps
            .iter()
            .map(|m| convex_hull(&self.hull.iter().map(|&p| m.apply(p)).collect::<Vec<_>>()))
            .collect();
        let tol = 1e-9 * self.diameter;
        for i in 0..n {
            for j in i + 1..n {
                let (p, q) = (&cells[i], &cells[j]);
                let overlap = polygon_area(&clip_convex(p, q));
                if overlap > 1e-9 * polygon_area(p).max(polygon_area(q)) {
                    return Err(Error::NotPcf(format!("cells {} and {} overlap", i + 1, j + 1)));
                }
                let mut near: Vec<Point> = p
                    .iter()
                    .filter(|&&v| point_polygon_distance(v, q) <= tol)
                    .chain(q.iter().filter(|&&v| point_polygon_distance(v, p) <= tol))
                    .copied()
                    .collect();
                if near.is_empty() {
                    continue;
                }
                if polygon_diameter(&near) > 10.0 * tol {
                    return Err(Error::NotPcf(format!(
                        "cells {} and {} meet along a segment",
                        i + 1,
                        j + 1
                    )));
                }
                let c = near.pop().expect("non-empty");
                let shared = corners[i].iter().any(|a| {
                    a.approx.dist(c) <= 10.0 * tol
                        && corners[j].iter().any(|b| self.same_point(a, b))
                });
                if !shared {
                    return Err(Error::NotPcf(format!(
                        "cells {} and {} touch outside the images of V_0",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Convex polygon `H` with `F_i(H) ⊂ H` for all maps.
fn invariant_hull(maps: &[AffineMap], fixed: &[Location]) -> Vec<Point> {
    let mut hull = convex_hull(&fixed.iter().map(|l| l.approx).collect::<Vec<_>>());
    for _ in 0..200 {
        let mut pts = hull.clone();
        for m in maps {
            pts.extend(hull.iter().map(|&p| m.apply(p)));
        }
        let next = convex_hull(&pts);
        let scale = polygon_diameter(&next).max(1e-300);
        let grown = next
            .iter()
            .map(|&p| point_polygon_distance(p, &hull))
            .fold(0.0, f64::max);
        hull = next;
        if grown <= 1e-14 * scale {
            break;
        }
    }
    hull
}

/// Counter-clockwise hull without collinear points (monotone chain).
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.dist(*b) <= 1e-15);
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| a.sub(o).cross(b.sub(o));
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-15 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-15 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        s += poly[i].cross(poly[(i + 1) % poly.len()]);
    }
    (s / 2.0).abs()
}

fn polygon_diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in poly.iter().enumerate() {
        for b in &poly[i + 1..] {
            d = d.max(a.dist(*b));
        }
    }
    d
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.x * ab.x + ab.y * ab.y;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).x * ab.x + p.sub(a).y * ab.y) / len2;
    p.dist(a.add(ab.scale(t.clamp(0.0, 1.0))))
}

/// Zero inside (or on) a counter-clockwise convex polygon.
pub fn point_polygon_distance(p: Point, poly: &[Point]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => p.dist(poly[0]),
        2 => segment_distance(p, poly[0], poly[1]),
        n => {
            let inside = (0..n).all(|i| poly[(i + 1) % n].sub(poly[i]).cross(p.sub(poly[i])) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| segment_distance(p, poly[i], poly[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Sutherland–Hodgman clip of one convex polygon by another (both CCW).
fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    if clip.len() < 3 {
        return Vec::new();
    }
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let side = |p: Point| b.sub(a).cross(p.sub(a));
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push(p.add(q.sub(p).scale(t)));
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Hash lookup of points: exact keys when available, otherwise a tolerance grid.
#[derive(Debug, Clone, Default)]
pub struct PointIndex {
    exact: HashMap<ExactPoint, usize>,
    grid: HashMap<(i64, i64), Vec<(Point, usize)>>,
    tol: f64,
}

impl PointIndex {
    pub fn new(tol: f64) -> Self {
        PointIndex { tol, ..Default::default() }
    }

    fn cell(&self, p: Point) -> (i64, i64) {
        let h = self.tol * 16.0;
        ((p.x / h).floor() as i64, (p.y / h).floor() as i64)
    }

    pub fn get(&self, p: &Location) -> Option<usize> {
        if let Some(e) = &p.exact {
            return self.exact.get(e).copied();
        }
        let (cx, cy) = self.cell(p.approx);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.grid.get(&(cx + dx, cy + dy)) {
                    if let Some(&(_, i)) = bucket.iter().find(|(q, _)| q.dist(p.approx) <= self.tol) {
                        return Some(i);
                    }
                }
            }
        }
        None
    }

    pub fn insert(&mut self, p: &Location, index: usize) {
        if let Some(e) = &p.exact {
            self.exact.insert(e.clone(), index);
        } else {
            let c = self.cell(p.approx);
            self.grid.entry(c).or_default().push((p.approx, index));
        }
    }

    pub fn remap(&mut self, f: impl Fn(usize) -> usize) {
        for v in self.exact.values_mut() {
            *v = f(*v);
        }
        for bucket in self.grid.values_mut() {
            for (_, v) in bucket.iter_mut() {
                *v = f(*v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn gasket() -> Fractal {
        let v = [
            ExactPoint::new(r(0, 1), r(0, 1)),
            ExactPoint::new(r(1, 2), r(1, 1)),
            ExactPoint::new(r(1, 1), r(0, 1)),
        ];
        let maps = v.iter().map(|c| AffineMap::homothety(r(1, 2), c)).collect();
        make_fractal(FractalSpec::new("sg", maps, vec![1, 2, 3])).unwrap()
    }

    #[test]
    fn itinerary_normalization_and_order() {
        let a = Itinerary::new(Word(vec![1, 2, 2]), 2);
        assert_eq!(a.prefix, Word(vec![1]));
        let b = Itinerary::new(Word(vec![2]), 1);
        assert!(a < b);
        assert!(Itinerary::boundary(3) < a);
        assert_eq!("1.2~3".parse::<Itinerary>().unwrap(), Itinerary::new(Word(vec![1, 2]), 3));
        assert_eq!(Itinerary::boundary(2).to_string(), "~2");
    }

    #[test]
    fn canonical_vertex_picks_least_name() {
        let sg = gasket();
        let id = sg.canonical_vertex(&Itinerary::new(Word(vec![2]), 1)).unwrap();
        assert_eq!(id.itinerary, Itinerary::new(Word(vec![1]), 2));
        assert_eq!(id.level(), 1);
        let deep = sg.canonical_vertex(&Itinerary::new(Word(vec![3, 1, 1, 1]), 1)).unwrap();
        assert_eq!(deep.itinerary, Itinerary::new(Word(vec![1]), 3));
        let corner = sg.canonical_vertex(&Itinerary::new(Word(vec![3, 3]), 3)).unwrap();
        assert_eq!(corner.itinerary, Itinerary::boundary(3));
    }

    #[test]
    fn rejects_expanding_and_overlapping_maps() {
        let c = ExactPoint::new(r(0, 1), r(0, 1));
        let m = AffineMap::homothety(r(3, 2), &c);
        let e = make_fractal(FractalSpec::new("bad", vec![m], vec![1])).unwrap_err();
        assert!(matches!(e, Error::NonContractive { .. }));
        // Unit square tiled by four quarter squares: cells share edges.
        let sq = [(0, 0), (1, 0), (1, 1), (0, 1)];
        let maps = sq
            .iter()
            .map(|&(x, y)| AffineMap::homothety(r(1, 2), &ExactPoint::new(r(x, 1), r(y, 1))))
            .collect();
        let e = make_fractal(FractalSpec::new("square", maps, vec![1, 2, 3, 4])).unwrap_err();
        assert!(matches!(e, Error::NotPcf(_)), "{e:?}");
    }

    #[test]
    fn rejects_disconnected_cantor_dust() {
        let maps = [(0, 0), (1, 0), (1, 1)]
            .iter()
            .map(|&(x, y)| AffineMap::homothety(r(1, 3), &ExactPoint::new(r(x, 1), r(y, 1))))
            .collect();
        let e = make_fractal(FractalSpec::new("dust", maps, vec![1, 2, 3])).unwrap_err();
        assert_eq!(e, Error::Disconnected);
    }

    #[test]
    fn hull_is_invariant() {
        let sg = gasket();
        assert!((polygon_area(sg.hull()) - 0.5).abs() < 1e-12);
    }
}
