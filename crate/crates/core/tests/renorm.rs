mod common;

use common::{laplacian, q, schur_exact};
use fractal_hm::engine::{find_renormalization_factor, renormalize_form, self_similar_form};
use fractal_hm::graph::unit_triangle;
use fractal_hm::*;
use num_traits::Zero;

/// Exact renormalization factor of the unit triangle form on a gasket-like
/// fractal, from the topology of its level-1 network.
fn exact_triangle_factor(name: &str) -> Rational {
    let f = Catalog::default().fractal(name).unwrap();
    let unit = HarmonicStructure::uniform(unit_triangle(), f.alphabet(), 1.0).unwrap();
    let g = build_graph(&f, &unit, 1).unwrap();
    let edges: Vec<_> = g.edges.iter().map(|e| (e.a, e.b, q(e.conductance.round() as i128, 1))).collect();
    let s = schur_exact(&laplacian(g.vertex_count(), &edges), &g.boundary);
    // the trace must be a multiple of the triangle form
    let r = -s[0][1];
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { r * q(2, 1) } else { -r };
            assert_eq!(s[i][j], want, "{name} entry ({i},{j})");
        }
    }
    assert!(!r.is_zero());
    r
}

#[test]
fn gasket_factors_are_exact() {
    assert_eq!(exact_triangle_factor("sg"), q(3, 5));
    assert_eq!(exact_triangle_factor("sg3"), q(7, 15));
    assert_eq!(exact_triangle_factor("hexagasket"), q(3, 7));
}

#[test]
fn fitted_factors_match_exact_ones() {
    let cat = Catalog::default();
    for (name, r) in [("sg", 3.0 / 5.0), ("sg3", 7.0 / 15.0), ("hexagasket", 3.0 / 7.0)] {
        let f = cat.fractal(name).unwrap();
        let fit = find_renormalization_factor(&f, &unit_triangle(), 1e-10).unwrap();
        assert!((fit.r - r).abs() < 1e-12, "{name}: {}", fit.r);
    }
}

#[test]
fn sg_form_is_a_fixed_point() {
    let (f, s) = Catalog::default().load("sg").unwrap();
    let traced = renormalize_form(&f, &s).unwrap();
    assert!((traced - unit_triangle()).amax() < 1e-10);
}

#[test]
fn pentagasket_self_similar_form() {
    let f = Catalog::default().fractal("pentagasket").unwrap();
    let fit = self_similar_form(&f, 1e-10, 2000).unwrap();
    // closed form of the factor under the uniform ansatz
    let r = (161f64.sqrt() - 9.0) / 8.0;
    assert!((fit.r - r).abs() < 1e-10, "{}", fit.r);
    let side = -fit.form[(0, 1)];
    let diagonal = -fit.form[(0, 2)];
    assert!(side > diagonal && diagonal > 0.0);
    for k in 0..5 {
        assert!((-fit.form[(k, (k + 1) % 5)] - side).abs() < 1e-9);
        assert!((-fit.form[(k, (k + 2) % 5)] - diagonal).abs() < 1e-9);
    }
    let s = HarmonicStructure::uniform(fit.form.clone(), 5, fit.r).unwrap();
    assert!((renormalize_form(&f, &s).unwrap() - &fit.form).amax() < 1e-8);
}

#[test]
fn mismatched_base_form_has_no_fixed_point() {
    let f = Catalog::default().fractal("sg").unwrap();
    let mut d = unit_triangle();
    d[(0, 1)] = -3.0;
    d[(1, 0)] = -3.0;
    d[(0, 0)] = 4.0;
    d[(1, 1)] = 4.0;
    let err = find_renormalization_factor(&f, &d, 1e-10).unwrap_err();
    assert!(matches!(err, Error::NoFixedPoint(_)), "{err:?}");
}
