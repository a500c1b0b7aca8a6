mod common;

use std::collections::HashSet;

use fractal_hm::graph::{
    build_graph_with_limit, cell_loops, loop_index, loop_word, spanning_tree_basis, unit_triangle, Embedder,
};
use fractal_hm::*;
use proptest::prelude::*;

fn load(name: &str) -> (Fractal, HarmonicStructure) {
    Catalog::default().load(name).unwrap()
}

#[test]
fn sg_vertex_and_edge_counts() {
    let (f, s) = load("sg");
    for m in 0..=6u32 {
        let g = build_graph(&f, &s, m as usize).unwrap();
        assert_eq!(g.vertex_count(), 3 * (3usize.pow(m) + 1) / 2, "level {m}");
        assert_eq!(g.edge_count(), 3usize.pow(m + 1), "level {m}");
    }
}

#[test]
fn sg_conductances_scale_by_five_thirds() {
    let (f, s) = load("sg");
    for m in 0..=4 {
        let g = build_graph(&f, &s, m).unwrap();
        let c = (5.0f64 / 3.0).powi(m as i32);
        assert!(g.edges.iter().all(|e| (e.conductance - c).abs() < 1e-12 * c), "level {m}");
    }
}

#[test]
fn cycle_space_dimensions() {
    let (sg, s) = load("sg");
    assert_eq!(build_graph(&sg, &s, 0).unwrap().cycle_space_dim(), 1);
    assert_eq!(build_graph(&sg, &s, 1).unwrap().cycle_space_dim(), 4);
    let (sg3, s3) = load("sg3");
    assert_eq!(build_graph(&sg3, &s3, 1).unwrap().cycle_space_dim(), 9);
    let (hex, sh) = load("hexagasket");
    assert_eq!(build_graph(&hex, &sh, 1).unwrap().cycle_space_dim(), 7);
    // the pentagon ring: 5 cells of 5 edges on 20 vertices
    let (pg, sp) = load("pentagasket");
    assert_eq!(build_graph(&pg, &sp, 1).unwrap().cycle_space_dim(), 6);
}

#[test]
fn basis_cycles_are_closed_skeleton_walks() {
    for name in ["sg", "sg3", "hexagasket", "pentagasket"] {
        let (f, s) = load(name);
        for m in 0..=2 {
            let g = build_graph(&f, &s, m).unwrap();
            let basis = spanning_tree_basis(&g);
            assert_eq!(basis.dimension(), g.cycle_space_dim(), "{name} level {m}");
            for c in &basis.cycles {
                let idx = c.indices(&g).unwrap();
                assert!(idx.len() >= 3);
                assert_eq!(idx.iter().collect::<HashSet<_>>().len(), idx.len(), "simple cycle");
                for k in 0..idx.len() {
                    let (a, b) = (idx[k], idx[(k + 1) % idx.len()]);
                    assert!(g.adjacency[a].iter().any(|&(n, _)| n == b), "{name}: {a}-{b} not adjacent");
                }
            }
        }
    }
}

#[test]
fn embedding_keeps_coarse_vertices_in_order() {
    for name in ["sg", "sg3", "hexagasket", "pentagasket"] {
        let (f, s) = load(name);
        let coarse = build_graph(&f, &s, 1).unwrap();
        let fine = build_graph(&f, &s, 2).unwrap();
        let emb = Embedder::new(&coarse, &fine).unwrap();
        for c in &spanning_tree_basis(&coarse).cycles {
            let e = emb.embed(c).unwrap();
            assert_eq!(e.segments.len(), c.len());
            for (k, seg) in e.segments.iter().enumerate() {
                assert_eq!(seg.first(), Some(&c.vertices[k]));
                assert_eq!(seg.last(), Some(&c.vertices[(k + 1) % c.len()]));
            }
            let coarse_ids: HashSet<_> = coarse.vertices.iter().map(|v| &v.id).collect();
            let kept: Vec<_> = e.cycle.vertices.iter().filter(|v| coarse_ids.contains(v)).collect();
            assert_eq!(kept, c.vertices.iter().collect::<Vec<_>>(), "{name}");
            // still a closed walk in the fine graph
            let idx = e.cycle.indices(&fine).unwrap();
            for k in 0..idx.len() {
                assert!(fine.edge_between(idx[k], idx[(k + 1) % idx.len()]).is_some());
            }
        }
    }
}

#[test]
fn cell_loops_are_indexed_breadth_first() {
    let (f, s) = load("sg");
    let loops = cell_loops(&f, 2).unwrap();
    assert_eq!(loops.len(), 13);
    let words: Vec<String> = loops.iter().take(5).map(|l| l.word.to_string()).collect();
    assert_eq!(words, ["", "1", "2", "3", "1.1"]);
    let g = build_graph(&f, &s, 3).unwrap();
    assert_eq!(loops[0].trace(&g).unwrap().len(), 24);
    assert_eq!(loops[12].trace(&g).unwrap().len(), 6);
}

#[test]
fn guard_on_level_size() {
    let (f, s) = load("sg");
    let err = build_graph_with_limit(&f, &s, 5, 100).unwrap_err();
    assert!(matches!(err, Error::LevelTooLarge { level: 5, cells: 243, limit: 100 }), "{err:?}");
}

#[test]
fn harmonic_structure_validation() {
    let d = unit_triangle();
    assert!(HarmonicStructure::uniform(d.clone(), 3, 0.6).is_ok());
    assert!(HarmonicStructure::uniform(d.clone(), 3, 1.0).is_ok());
    assert!(HarmonicStructure::uniform(d.clone(), 3, 0.0).is_err());
    assert!(HarmonicStructure::uniform(d.clone(), 3, 1.5).is_err());
    let mut bad = d.clone();
    bad[(0, 1)] = 1.0;
    assert!(HarmonicStructure::new(bad, vec![0.6; 3]).is_err());
}

#[test]
fn energy_of_affine_function_on_level_zero() {
    let (f, s) = load("sg");
    let g = build_graph(&f, &s, 0).unwrap();
    // values 0,1,2 on the triangle: 1 + 1 + 4
    assert!((g.energy(&[0.0, 1.0, 2.0]) - 6.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn loop_index_round_trip(index in 0usize..5000) {
        prop_assert_eq!(loop_index(&loop_word(index)), index);
    }

    #[test]
    fn loop_index_orders_by_length(a in prop::collection::vec(1u8..=3, 0..5), b in prop::collection::vec(1u8..=3, 0..5)) {
        let (ia, ib) = (loop_index(&Word(a.clone())), loop_index(&Word(b.clone())));
        if a.len() < b.len() {
            prop_assert!(ia < ib);
        }
        prop_assert_eq!(ia == ib, a == b);
    }
}
