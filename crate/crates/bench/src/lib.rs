//! Shared fixtures for the benchmarks.

use subtile::{kenyon_system_with_layout, square_system, CubicParams, KenyonLayout, SubstitutionSystem, TorusPoint};

/// The weakly mixing Kenyon system, geometric digits.
pub fn kenyon_114() -> SubstitutionSystem {
    let params = CubicParams::new(1, 1, 4).expect("valid parameters");
    kenyon_system_with_layout(params, KenyonLayout::Geometric)
        .expect("irreducible")
        .system
}

pub fn square() -> SubstitutionSystem {
    square_system().system
}

/// A generic torus point with no rational coordinates.
pub fn generic_point(s: usize) -> TorusPoint {
    TorusPoint::new((0..s).map(|i| (0.137 + 0.618_033_988_75 * i as f64).fract()))
}
