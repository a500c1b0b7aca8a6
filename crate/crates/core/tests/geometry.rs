mod common;

use common::q;
use fractal_hm::geometry::{AffineMap, ExactPoint};
use fractal_hm::*;
use proptest::prelude::*;

fn sg() -> Fractal {
    Catalog::default().fractal("sg").unwrap()
}

fn it(s: &str) -> Itinerary {
    s.parse().unwrap()
}

#[test]
fn itinerary_text_round_trip() {
    for s in ["~1", "1~2", "1.2~3", "3.1.1~2"] {
        assert_eq!(it(s).to_string(), s);
    }
    assert_eq!(Itinerary::new(Word(vec![2, 3, 3]), 3).to_string(), "2~3");
    assert!("1.2".parse::<Itinerary>().is_err());
}

#[test]
fn itinerary_order_is_length_first() {
    let mut v = vec![it("1.1~2"), it("2~1"), it("~3"), it("1~3")];
    v.sort();
    let s: Vec<String> = v.iter().map(|i| i.to_string()).collect();
    assert_eq!(s, ["~3", "1~3", "2~1", "1.1~2"]);
}

#[test]
fn sg_vertex_coordinates_by_hand() {
    // F_1 F_2 (v_3): v_3 = (1,0) -> (3/4, 1/2) -> (3/8, 1/4)
    let f = sg();
    let p = f.vertex_coordinates(&it("1.2~3")).unwrap();
    assert_eq!(p.exact, Some(ExactPoint::new(q(3, 8), q(1, 4))));
    let p = f.vertex_coordinates(&it("~2")).unwrap();
    assert_eq!(p.exact, Some(ExactPoint::new(q(1, 2), q(1, 1))));
}

#[test]
fn canonical_vertex_picks_least_name() {
    let f = sg();
    assert_eq!(f.canonical_vertex(&it("2~1")).unwrap().to_string(), "1~2");
    assert_eq!(f.canonical_vertex(&it("1.2~1")).unwrap().to_string(), "1.1~2");
    assert_eq!(f.canonical_vertex(&it("3.3~3")).unwrap().to_string(), "~3");
    assert_eq!(f.canonical_vertex(&it("1~2")).unwrap().level(), 1);
}

#[test]
fn non_contractive_map_is_rejected() {
    let maps = vec![
        AffineMap::homothety(q(1, 2), &ExactPoint::new(q(0, 1), q(0, 1))),
        AffineMap::float([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.0]),
    ];
    let err = make_fractal(FractalSpec::new("bad", maps, vec![1])).unwrap_err();
    assert!(matches!(err, Error::NonContractive { index: 2, .. }), "{err:?}");
}

#[test]
fn bad_boundary_letter() {
    let maps = vec![AffineMap::homothety(q(1, 2), &ExactPoint::new(q(0, 1), q(0, 1)))];
    let err = make_fractal(FractalSpec::new("bad", maps, vec![4])).unwrap_err();
    assert_eq!(err, Error::BadLetter { letter: 4, alphabet: 1 });
}

#[test]
fn cantor_dust_is_disconnected() {
    let corners = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let maps = corners
        .iter()
        .map(|&(x, y)| AffineMap::homothety(q(1, 4), &ExactPoint::new(q(x, 1), q(y, 1))))
        .collect();
    let err = make_fractal(FractalSpec::new("dust", maps, vec![1, 2, 4, 3])).unwrap_err();
    assert_eq!(err, Error::Disconnected);
}

#[test]
fn square_tiling_is_not_pcf() {
    let corners = [(0, 0), (1, 0), (1, 1), (0, 1)];
    let maps = corners
        .iter()
        .map(|&(x, y)| AffineMap::homothety(q(1, 2), &ExactPoint::new(q(x, 1), q(y, 1))))
        .collect();
    let err = make_fractal(FractalSpec::new("square", maps, vec![1, 2, 3, 4])).unwrap_err();
    assert!(matches!(err, Error::NotPcf(_)), "{err:?}");
}

#[test]
fn catalog_fractals_validate() {
    let cat = Catalog::default();
    assert_eq!(cat.names(), ["hexagasket", "pentagasket", "sg", "sg3"]);
    for name in ["sg", "sg3", "sg4", "hexagasket", "pentagasket"] {
        let f = cat.fractal(name).unwrap();
        assert_eq!(f.name(), name);
    }
    assert!(matches!(cat.fractal("koch"), Err(Error::Unknown { .. })));
    assert_eq!(cat.fractal("sg3").unwrap().alphabet(), 6);
    assert_eq!(cat.fractal("hexagasket").unwrap().boundary_len(), 3);
}

fn word(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(1u8..=3, 0..=max_len)
}

proptest! {
    #[test]
    fn canonical_names_the_same_point(w in word(5), tail in 1u8..=3) {
        let f = sg();
        let i = Itinerary::new(Word(w), tail);
        let v = f.canonical_vertex(&i).unwrap();
        let a = f.vertex_coordinates(&i).unwrap();
        let b = f.vertex_coordinates(&v.itinerary).unwrap();
        prop_assert_eq!(a.exact, b.exact);
        prop_assert!(v.itinerary <= i);
        prop_assert_eq!(f.canonical_vertex(&v.itinerary).unwrap(), v);
    }

    #[test]
    fn word_maps_compose(u in word(4), v in word(4)) {
        let f = sg();
        let p = f.boundary_points()[0].clone();
        let mut uv = u.clone();
        uv.extend(&v);
        let direct = f.apply_word(&Word(uv), &p).unwrap();
        let nested = f.apply_word(&Word(u), &f.apply_word(&Word(v), &p).unwrap()).unwrap();
        prop_assert_eq!(direct.exact, nested.exact);
    }
}
