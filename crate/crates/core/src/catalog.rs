//! Built-in fractals, registered by name.
//!
//! * `sg` — Sierpinski gasket in the frame `v_1 = (0,0)`, `v_2 = (1/2,1)`,
//!   `v_3 = (1,0)`; output coordinates scale `y` by `√3/2`.
//! * `sgN` (N = 2..=6, `sg3` registered) — level-N subdivision of the
//!   triangle: `N(N+1)/2` homotheties of ratio `1/N` centred at the averages
//!   of `N-1` corners, ordered lexicographically by the sorted corner tuple.
//! * `hexagasket` — regular hexagon `P_k` at angle `210° - 60k` (k = 0..5),
//!   ratio 1/3; maps with odd `k` are composed with the 60° counter-clockwise
//!   rotation, `F_k(x) = (2/3) P_k + (1/3) R x`, so the cells still meet in
//!   single points. `V_0 = {P_0, P_2, P_4}`.
//! * `pentagasket` — regular pentagon `P_k` at angle `90° - 72k`, ratio
//!   `(3 - √5)/2`, no rotations, `V_0` all five corners. The energy uses the
//!   self-similar form on all ten corner pairs, but the cell skeleton (which
//!   carries cycles and cuts) is the pentagon ring.

use std::collections::BTreeMap;

use crate::engine::renorm::{find_renormalization_factor, self_similar_form};
use crate::error::{Error, Result};
use crate::geometry::{make_fractal, AffineMap, ExactPoint, Fractal, FractalSpec};
use crate::graph::{unit_triangle, HarmonicStructure};
use crate::scalar::Rational;

/// Tolerance used when fitting catalog harmonic structures.
pub const STRUCTURE_TOL: f64 = 1e-10;

pub trait CatalogEntry: Send + Sync {
    fn name(&self) -> String;
    fn description(&self) -> String;
    fn spec(&self) -> FractalSpec;
    /// Self-similar harmonic structure with uniform weights.
    fn structure(&self, fractal: &Fractal) -> Result<HarmonicStructure> {
        default_structure(fractal)
    }
}

/// Triangle form with fitted `r` for three boundary points, otherwise the
/// power-iterated self-similar form.
pub fn default_structure(fractal: &Fractal) -> Result<HarmonicStructure> {
    let fit = if fractal.boundary_len() == 3 {
        find_renormalization_factor(fractal, &unit_triangle(), STRUCTURE_TOL)?
    } else {
        self_similar_form(fractal, STRUCTURE_TOL, 2000)?
    };
    HarmonicStructure::uniform(fit.form, fractal.alphabet(), fit.r)
}

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn triangle() -> [ExactPoint; 3] {
    [ExactPoint::new(q(0, 1), q(0, 1)), ExactPoint::new(q(1, 2), q(1, 1)), ExactPoint::new(q(1, 1), q(0, 1))]
}

const EQUILATERAL: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 0.866_025_403_784_438_6]];

/// Gasket of subdivision order `n ≥ 2`.
pub struct SgN(pub usize);

impl CatalogEntry for SgN {
    fn name(&self) -> String {
        if self.0 == 2 {
            "sg".into()
        } else {
            format!("sg{}", self.0)
        }
    }
    fn description(&self) -> String {
        if self.0 == 2 {
            "Sierpinski gasket".into()
        } else {
            format!("level-{} Sierpinski gasket ({} maps)", self.0, self.0 * (self.0 + 1) / 2)
        }
    }
    fn spec(&self) -> FractalSpec {
        let n = self.0;
        let v = triangle();
        let mut tuples: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..n - 1 {
            tuples = tuples
                .iter()
                .flat_map(|t| {
                    let start = t.last().copied().unwrap_or(0);
                    (start..3).map(move |j| {
                        let mut u = t.clone();
                        u.push(j);
                        u
                    })
                })
                .collect();
        }
        let mut maps = Vec::new();
        let mut boundary = vec![0u8; 3];
        for (i, t) in tuples.iter().enumerate() {
            let k = Rational::from_integer(t.len() as i128);
            let cx = t.iter().map(|&j| v[j].x).sum::<Rational>() / k;
            let cy = t.iter().map(|&j| v[j].y).sum::<Rational>() / k;
            maps.push(AffineMap::homothety(q(1, n as i128), &ExactPoint::new(cx, cy)));
            if t.iter().all(|&j| j == t[0]) {
                boundary[t[0]] = i as u8 + 1;
            }
        }
        FractalSpec::new(self.name(), maps, boundary)
            .with_display(EQUILATERAL)
            .with_contraction_bound(1.0 / n as f64)
    }
}

pub struct Hexagasket;

impl CatalogEntry for Hexagasket {
    fn name(&self) -> String {
        "hexagasket".into()
    }
    fn description(&self) -> String {
        "hexagasket, ratio 1/3, odd maps rotated by 60°".into()
    }
    fn spec(&self) -> FractalSpec {
        let (c, s) = (0.5, 3f64.sqrt() / 2.0);
        let rot = [[c, -s], [s, c]];
        let maps = (0..6)
            .map(|k| {
                let a = (210.0 - 60.0 * k as f64).to_radians();
                let p = [a.cos(), a.sin()];
                let lin = if k % 2 == 1 {
                    [[rot[0][0] / 3.0, rot[0][1] / 3.0], [rot[1][0] / 3.0, rot[1][1] / 3.0]]
                } else {
                    [[1.0 / 3.0, 0.0], [0.0, 1.0 / 3.0]]
                };
                AffineMap::float(lin, [2.0 * p[0] / 3.0, 2.0 * p[1] / 3.0])
            })
            .collect();
        FractalSpec::new("hexagasket", maps, vec![1, 3, 5]).with_contraction_bound(1.0 / 3.0)
    }
}

pub struct Pentagasket;

impl CatalogEntry for Pentagasket {
    fn name(&self) -> String {
        "pentagasket".into()
    }
    fn description(&self) -> String {
        "pentagasket, ratio (3-√5)/2".into()
    }
    fn spec(&self) -> FractalSpec {
        let r = (3.0 - 5f64.sqrt()) / 2.0;
        let maps = (0..5)
            .map(|k| {
                let a = (90.0 - 72.0 * k as f64).to_radians();
                AffineMap::float([[r, 0.0], [0.0, r]], [(1.0 - r) * a.cos(), (1.0 - r) * a.sin()])
            })
            .collect();
        FractalSpec::new("pentagasket", maps, vec![1, 2, 3, 4, 5])
            .with_contraction_bound(r)
            .with_skeleton((0..5).map(|k| (k, (k + 1) % 5)).collect())
    }
}

/// Registry of catalog fractals.
pub struct Catalog {
    entries: BTreeMap<String, Box<dyn CatalogEntry>>,
}

impl Default for Catalog {
    fn default() -> Self {
        let mut c = Catalog { entries: BTreeMap::new() };
        c.register(Box::new(SgN(2)));
        c.register(Box::new(SgN(3)));
        c.register(Box::new(Hexagasket));
        c.register(Box::new(Pentagasket));
        c
    }
}

impl Catalog {
    pub fn register(&mut self, entry: Box<dyn CatalogEntry>) {
        self.entries.insert(entry.name(), entry);
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    /// Looks up a registered name; `sgN` for `N` in 2..=6 is built on demand.
    pub fn entry(&self, name: &str) -> Result<Box<dyn CatalogEntry + '_>> {
        if let Some(e) = self.entries.get(name) {
            return Ok(Box::new(Borrowed(e.as_ref())));
        }
        if let Some(n) = name.strip_prefix("sg").and_then(|s| s.parse::<usize>().ok()) {
            if (2..=6).contains(&n) {
                return Ok(Box::new(SgN(n)));
            }
        }
        Err(Error::Unknown { kind: "fractal", name: name.to_string() })
    }

    pub fn fractal(&self, name: &str) -> Result<Fractal> {
        make_fractal(self.entry(name)?.spec())
    }

    pub fn load(&self, name: &str) -> Result<(Fractal, HarmonicStructure)> {
        let entry = self.entry(name)?;
        let fractal = make_fractal(entry.spec())?;
        let structure = entry.structure(&fractal)?;
        Ok((fractal, structure))
    }
}

struct Borrowed<'a>(&'a dyn CatalogEntry);

impl CatalogEntry for Borrowed<'_> {
    fn name(&self) -> String {
        self.0.name()
    }
    fn description(&self) -> String {
        self.0.description()
    }
    fn spec(&self) -> FractalSpec {
        self.0.spec()
    }
    fn structure(&self, fractal: &Fractal) -> Result<HarmonicStructure> {
        self.0.structure(fractal)
    }
}

