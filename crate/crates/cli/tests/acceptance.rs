//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::collections::HashMap;
use std::time::Instant;

use fractal_hm::covering::{basis_setup, homotopic, pcf_cut_points, winding_number, GluedGraph};
use fractal_hm::engine::pcf::solve_pcf;
use fractal_hm::engine::sg::solve_sg_values;
use fractal_hm::engine::{
    classical_extension, find_renormalization_factor, jump_extension, renormalize_form,
    HarmonicSolver, SgExtension,
};
use fractal_hm::graph::{cell_loops, unit_triangle};
use fractal_hm::{
    build_graph, solve, BoundaryData, Catalog, DegreeVector, Fractal, HarmonicMapResult,
    HarmonicStructure, Problem, Rational,
};
use fractal_hm_cli::config::FractalRef;
use fractal_hm_cli::render::marker_hues;
use fractal_hm_cli::{render_svg, RenderOptions, ResultFile};

type Outcome = Result<String, String>;

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sg() -> (Fractal, HarmonicStructure) {
    Catalog::default().load("sg").unwrap()
}

/// Stationarity of the level-1 gasket energy with corners (a, b, c) and the
/// cell-3 copy of the v1-v3 midpoint raised by rho, solved by Cramer's rule.
fn stationary(a: Rational, b: Rational, c: Rational, rho: Rational) -> [Rational; 3] {
    let m = [
        [q(4, 1), q(-1, 1), q(-1, 1)],
        [q(-1, 1), q(4, 1), q(-1, 1)],
        [q(-1, 1), q(-1, 1), q(4, 1)],
    ];
    let rhs = [a + b, b + c + rho, a + c - q(2, 1) * rho];
    let det3 = |m: &[[Rational; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    let mut out = [q(0, 1); 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for i in 0..3 {
            mk[i][k] = rhs[i];
        }
        *o = det3(&mk) / d;
    }
    out
}

const GRID_DEGREES: [&[i64]; 4] = [&[0], &[1], &[2], &[1, 1, 1, 1]];
const GRID_DELTAS: [(i128, i128); 2] = [(0, 0), (1, 3)];

fn grid_problem(deg: &[i64], delta: (i128, i128), level: usize) -> Problem {
    let (f, s) = sg();
    let d = q(delta.0, delta.1.max(1));
    Problem::new(f, s, level)
        .with_degree(DegreeVector::new(deg.to_vec()))
        .with_boundary(BoundaryData::new(vec![d, d]))
}

fn c1_extension_matrices() -> Outcome {
    let classical = [
        [q(2, 5), q(2, 5), q(1, 5)],
        [q(1, 5), q(2, 5), q(2, 5)],
        [q(2, 5), q(1, 5), q(2, 5)],
    ];
    let correction = [
        [q(3, 10), q(1, 10), q(1, 10)],
        [q(1, 10), q(3, 10), q(1, 10)],
        [q(1, 10), q(1, 10), q(3, 10)],
    ];
    for k in 0..3 {
        let mut e = [q(0, 1); 3];
        e[k] = q(1, 1);
        let got = classical_extension(&e[0], &e[1], &e[2]);
        for i in 0..3 {
            ensure(got[i] == classical[i][k], || {
                format!("classical entry ({i},{k}) = {}", got[i])
            })?;
        }
        ensure(got == stationary(e[0], e[1], e[2], q(0, 1)), || {
            format!("classical column {k} not stationary")
        })?;
    }
    for rho in -3..=3 {
        let r = q(rho, 1);
        let (got, plus) = jump_extension(&q(0, 1), &q(0, 1), &q(0, 1), &r);
        let shift = [q(0, 1), r, -q(2, 1) * r];
        for i in 0..3 {
            let want: Rational = (0..3).map(|j| correction[i][j] * shift[j]).sum();
            ensure(got[i] == want, || {
                format!("correction entry {i} at rho {rho}: {} vs {want}", got[i])
            })?;
        }
        ensure(plus == got[2] + r, || "z_+ != z_- + rho".into())?;
    }
    for (a, b, c, rho) in [(1, 0, 0, 0), (0, 1, 0, 1), (3, -2, 5, -2), (1, 1, 1, 3)] {
        let (a, b, c, rho) = (q(a, 1), q(b, 7), q(c, 3), q(rho, 1));
        let (got, _) = jump_extension(&a, &b, &c, &rho);
        ensure(got == stationary(a, b, c, rho), || {
            "jump extension not stationary".into()
        })?;
    }
    Ok("classical and correction matrices entrywise, rational".into())
}

fn c2_jump_solve() -> Outcome {
    let (f, s) = sg();
    let sol = solve_sg_values::<Rational>(
        &f,
        &s,
        1,
        &DegreeVector::new(vec![1]),
        &BoundaryData::zero(3),
    )
    .map_err(|e| e.to_string())?;
    let at = |n: &str| sol.values[sol.graph.index_of(&n.parse().unwrap()).unwrap()];
    let got = [at("1~2"), at("2~3"), at("1~3")];
    let plus = sol.values[sol.cut_graph.jumps[0].plus];
    let oracle = stationary(q(0, 1), q(0, 1), q(0, 1), q(1, 1));
    ensure(got == oracle, || format!("{got:?} vs oracle {oracle:?}"))?;
    ensure(
        got == [q(-1, 10), q(1, 10), q(-1, 2)] && plus == q(1, 2),
        || format!("{got:?}, z+ {plus}"),
    )?;
    Ok(format!(
        "(f_x, f_y, f_z-) = ({}, {}, {}), z+ = {plus}",
        got[0], got[1], got[2]
    ))
}

fn c3_energy_invariance() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for deg in GRID_DEGREES {
        for delta in GRID_DELTAS {
            let p0 = grid_problem(deg, delta, 1);
            let mut energies = Vec::new();
            for level in p0.min_level()..=8 {
                let lift = SgExtension
                    .solve_lift(&grid_problem(deg, delta, level), level)
                    .map_err(|e| e.to_string())?;
                energies.push(lift.cut_graph.energy(&lift.values));
            }
            for e in &energies {
                worst = worst.max((e - energies[0]).abs());
            }
            count += energies.len();
        }
    }
    ensure(worst <= 1e-9, || format!("energy drift {worst:.3e}"))?;
    Ok(format!(
        "{count} solves, levels N+1..8, max drift {worst:.1e}"
    ))
}

fn c4_glued_harmonicity() -> Outcome {
    let mut worst = 0.0f64;
    for deg in GRID_DEGREES {
        for delta in GRID_DELTAS {
            let p0 = grid_problem(deg, delta, 1);
            for level in p0.min_level()..=8 {
                let lift = SgExtension
                    .solve_lift(&grid_problem(deg, delta, level), level)
                    .map_err(|e| e.to_string())?;
                let glued = {
                    let reach = lift
                        .cut_graph
                        .jumps
                        .iter()
                        .map(|j| j.shift.abs())
                        .max()
                        .unwrap_or(0)
                        + 1;
                    GluedGraph::new(&lift.cut_graph, &lift.values, -reach..=reach)
                };
                let r = glued
                    .residuals_on(0)
                    .iter()
                    .fold(0.0f64, |m, x| m.max(x.abs()));
                worst = worst.max(r).max(lift.cut_graph.max_residual(&lift.values));
            }
        }
    }
    ensure(worst <= 1e-9, || format!("residual {worst:.3e}"))?;
    Ok(format!("max glued-graph residual {worst:.1e}"))
}

fn c5_degree_round_trip() -> Outcome {
    let mut reads = Vec::new();
    for deg in GRID_DEGREES {
        for delta in GRID_DELTAS {
            let order = DegreeVector::new(deg.to_vec()).order();
            for level in order + 3..=8 {
                let r = solve(&grid_problem(deg, delta, level), &SgExtension)
                    .map_err(|e| e.to_string())?;
                ensure(
                    r.recovered_degree == DegreeVector::new(deg.to_vec()),
                    || format!("{deg:?} at level {level}: recovered {}", r.recovered_degree),
                )?;
                if r.level != level {
                    reads.push(format!("{deg:?}@{level}->{}", r.level));
                }
            }
        }
    }
    let refined = if reads.is_empty() {
        "none".to_string()
    } else {
        reads.join(" ")
    };
    Ok(format!(
        "exact at levels N+3..8; refined for the 1/4 increment rule: {refined}"
    ))
}

fn c6_oracle_equivalence() -> Outcome {
    let (f, s) = sg();
    let mut vectors: Vec<Vec<i64>> = Vec::new();
    for x in 0..7i64.pow(4) {
        vectors.push((0..4).map(|i| (x / 7i64.pow(i)) % 7 - 3).collect());
    }
    // structured sample of orders 2 and 3, entries in -3..=3
    for (len, count) in [(13usize, 60i64), (40, 30)] {
        for k in 0..count {
            vectors.push(
                (0..len as i64)
                    .map(|i| (7919 * i + 104_729 * k + i * i * k) % 7 - 3)
                    .collect(),
            );
        }
    }
    let mut worst = 0.0f64;
    let mut solves = 0;
    for (n, v) in vectors.iter().enumerate() {
        let deg = DegreeVector::new(v.clone());
        // every vector at delta 0 up to level 3; every 7th also at delta 1/3 and level 4
        let full = n % 7 == 0;
        for delta in if full {
            &GRID_DELTAS[..]
        } else {
            &GRID_DELTAS[..1]
        } {
            let b = BoundaryData::new(vec![q(delta.0, delta.1.max(1)); 2]);
            for level in deg.order() + 1..=if full { 4 } else { 3 } {
                let sol =
                    solve_sg_values::<f64>(&f, &s, level, &deg, &b).map_err(|e| e.to_string())?;
                let min = solve_pcf(&sol.cut_graph).map_err(|e| e.to_string())?;
                let gap = sol
                    .values
                    .iter()
                    .zip(&min)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(gap);
                solves += 1;
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max gap {worst:.3e}"))?;
    Ok(format!("{solves} instance pairs (all |rho| <= 3 of order <= 1, patterned orders 2-3, levels N+1..4), max gap {worst:.1e}"))
}

fn c7_renormalization() -> Outcome {
    let (f, _) = sg();
    let fit =
        find_renormalization_factor(&f, &unit_triangle(), 1e-10).map_err(|e| e.to_string())?;
    ensure((fit.r - 0.6).abs() <= 1e-10, || format!("r = {}", fit.r))?;
    let s = HarmonicStructure::uniform(unit_triangle(), 3, 0.6).map_err(|e| e.to_string())?;
    let traced = renormalize_form(&f, &s).map_err(|e| e.to_string())?;
    let dev = (traced - unit_triangle()).amax();
    ensure(dev <= 1e-10, || format!("traced form off by {dev:.3e}"))?;
    Ok(format!(
        "r = {:.15}, traced form deviation {dev:.1e}",
        fit.r
    ))
}

fn c8_pcf_structure() -> Outcome {
    let cat = Catalog::default();
    let (sg3, s3) = cat.load("sg3").unwrap();
    let dim = build_graph(&sg3, &s3, 1)
        .map_err(|e| e.to_string())?
        .cycle_space_dim();
    ensure(dim == 9, || format!("SG_3 dimension {dim}"))?;
    let (f, s) = sg();
    for m in 0..=6u32 {
        let n = build_graph(&f, &s, m as usize)
            .map_err(|e| e.to_string())?
            .vertex_count();
        ensure(n == 3 * (3usize.pow(m) + 1) / 2, || {
            format!("SG level {m}: {n} vertices")
        })?;
    }
    let mut summary = Vec::new();
    for name in ["sg3", "hexagasket", "pentagasket"] {
        let (f, s) = cat.load(name).unwrap();
        let setup = basis_setup(&f, &s, 1).map_err(|e| e.to_string())?;
        let d = setup.basis.dimension();
        let cuts = pcf_cut_points(&f, &setup, &vec![1; d]).map_err(|e| format!("{name}: {e}"))?;
        let mut seen = std::collections::HashSet::new();
        for (i, c) in cuts.iter().enumerate() {
            ensure(seen.insert(c.vertex.clone()), || {
                format!("{name}: cut {} repeated", c.vertex)
            })?;
            ensure(setup.coarse.index_of(&c.vertex).is_none(), || {
                format!("{name}: cut {} is coarse", c.vertex)
            })?;
            for (j, e) in setup.embedded.iter().enumerate() {
                ensure(e.cycle.vertices.contains(&c.vertex) == (i == j), || {
                    format!("{name}: cut {} vs cycle {j}", c.vertex)
                })?;
            }
            let v = setup.fine.index_of(&c.vertex).ok_or("cut not in V_2")?;
            ensure(!setup.fine.is_boundary(v), || format!("{name}: cut on V_0"))?;
        }
        summary.push(format!("{name} {d}"));
    }
    Ok(format!(
        "SG_3 dim 9; |V_m| ok for m <= 6; disjoint private cuts: {}",
        summary.join(", ")
    ))
}

fn c9_homotopy() -> Outcome {
    let (f, s) = sg();
    let run = |d1: i128, d2: i128| {
        let p = Problem::new(f.clone(), s.clone(), 5)
            .with_boundary(BoundaryData::new(vec![q(d1, 1), q(d2, 1)]));
        solve(&p, &SgExtension).map_err(|e| e.to_string())
    };
    let (a, b) = (run(0, 0)?, run(1, -1)?);
    let loops = cell_loops(&f, 0).map_err(|e| e.to_string())?;
    let same = homotopic(&a.circle(), &b.circle(), &a.graph, &loops).map_err(|e| e.to_string())?;
    let gap = a
        .circle()
        .values
        .iter()
        .zip(&b.circle().values)
        .map(|(x, y)| {
            let d = x - y;
            (d - d.round()).abs()
        })
        .fold(0.0, f64::max);
    ensure(same, || "maps reported non-homotopic".into())?;
    ensure(gap > 0.1, || format!("pointwise gap only {gap:.3}"))?;
    Ok(format!(
        "homotopic = true, max pointwise circle distance {gap:.3}"
    ))
}

fn c10_figures() -> Outcome {
    let (f, s) = sg();
    let opts = RenderOptions::default();
    let mut lines = Vec::new();
    for deg in GRID_DEGREES {
        let p = Problem::new(f.clone(), s.clone(), 6).with_degree(DegreeVector::new(deg.to_vec()));
        let render = || -> Result<(String, HarmonicMapResult), String> {
            let r = solve(&p, &SgExtension).map_err(|e| e.to_string())?;
            let file = ResultFile::from_result(&FractalRef::Catalog("sg".into()), &f, &s, &r);
            Ok((render_svg(&file, &opts).map_err(|e| e.to_string())?, r))
        };
        let (svg, r) = render()?;
        let (again, _) = render()?;
        ensure(svg == again, || {
            format!("{deg:?}: output differs between runs")
        })?;
        let hues: HashMap<String, f64> = marker_hues(&svg).into_iter().collect();
        let outer = cell_loops(&f, 0).map_err(|e| e.to_string())?[0]
            .trace(&r.graph)
            .map_err(|e| e.to_string())?;
        let samples: Vec<f64> = outer
            .iter()
            .map(|&v| {
                hues.get(&r.graph.vertices[v].id.to_string())
                    .map(|h| h / 360.0)
                    .ok_or("unmarked vertex")
            })
            .collect::<Result<_, _>>()?;
        let w = winding_number(&samples, 0).map_err(|e| e.to_string())?;
        ensure(w == deg[0], || format!("{deg:?}: hue winds {w} times"))?;
        lines.push(format!("{deg:?} winds {w}"));
    }
    Ok(format!(
        "deterministic SVGs; outer-loop hue winding: {}",
        lines.join(", ")
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("extension matrices exact", c1_extension_matrices),
        ("jump solve at level 1", c2_jump_solve),
        ("energy invariance", c3_energy_invariance),
        ("harmonicity on the glued graph", c4_glued_harmonicity),
        ("degree round-trip", c5_degree_round_trip),
        ("recursion vs minimizer", c6_oracle_equivalence),
        ("renormalization", c7_renormalization),
        ("p.c.f. structure counts", c8_pcf_structure),
        ("homotopy test", c9_homotopy),
        ("figure regeneration", c10_figures),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
