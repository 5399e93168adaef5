use proptest::prelude::*;
use subtile::geometry::{
    classify_embedded, collared_prototiles, prototile_polygons, realize_supertile, svg_string, CoronaIndex,
};
use subtile::models::{kenyon_system_with_layout, square_system, KenyonLayout};
use subtile::{corona, Coloring, CubicParams, SubstitutionSystem};

fn kenyon(p: u32, q: u32, r: u32) -> SubstitutionSystem {
    kenyon_system_with_layout(CubicParams::new(p, q, r).unwrap(), KenyonLayout::Geometric)
        .unwrap()
        .system
}

#[test]
fn supertile_areas_scale() {
    for sys in [kenyon(1, 1, 1), kenyon(1, 1, 4), kenyon(1, 2, 5)] {
        let protos = prototile_polygons(&sys, &sys.default_shape).unwrap();
        for (j, proto) in protos.iter().enumerate() {
            for n in 0..=6 {
                let (realized, _) = realize_supertile(&sys, &sys.default_shape, j, n).unwrap();
                let expect = sys.theta.powi(2 * n as i32) * proto.area();
                assert!((realized.area() - expect).abs() <= 1e-6 * expect, "{} j={j} n={n}", sys.name);
            }
        }
    }
}

#[test]
fn svg_is_deterministic() {
    let sys = kenyon(1, 1, 4);
    let (realized, _) = realize_supertile(&sys, &sys.default_shape, 1, 5).unwrap();
    let a = svg_string(&realized, &Coloring::ByType);
    let b = svg_string(&realized, &Coloring::ByType);
    assert_eq!(a, b);
    assert_eq!(a.matches("<polygon").count(), realized.len());
}

#[test]
fn collared_count_for_111() {
    let sys = kenyon(1, 1, 1);
    let atlas = collared_prototiles(&sys, &sys.default_shape, 9, 1).unwrap();
    assert_eq!(atlas.count, 13);
    assert!(atlas.min_witnesses() >= 2);
    let json = atlas.to_json().unwrap();
    assert!(json.contains("\"center_type\""));
}

#[test]
fn embedded_classes_use_the_atlas() {
    let sys = kenyon(1, 2, 5);
    let atlas = collared_prototiles(&sys, &sys.default_shape, 5, 1).unwrap();
    assert_eq!(atlas.count, 36);
    let (patch, classes) = classify_embedded(&sys, &sys.default_shape, &atlas, 1, 3, 3).unwrap();
    assert_eq!(patch.len(), classes.len());
    assert!(classes.iter().all(|&c| c < atlas.count));
}

#[test]
fn square_corona_of_inner_cell() {
    let sys = square_system().system;
    let (realized, _) = realize_supertile(&sys, &sys.default_shape, 2, 1).unwrap();
    let inner = realized
        .tiles
        .iter()
        .position(|t| (t.polygon.centroid()[0] - 2.5).abs() < 1e-9 && (t.polygon.centroid()[1] - 2.5).abs() < 1e-9)
        .unwrap();
    assert_eq!(corona(&realized, inner).unwrap().len(), 8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn neighbor_relation_is_symmetric(seed in 0usize..10_000) {
        let sys = kenyon(1, 1, 4);
        let (realized, _) = realize_supertile(&sys, &sys.default_shape, 1, 6).unwrap();
        let index = CoronaIndex::new(&realized);
        let i = seed % realized.len();
        for j in index.touching(i) {
            prop_assert!(index.touching(j).contains(&i));
            prop_assert!(j != i);
        }
    }
}
