//! Realization of address patches as polygons, coronas, collared tiles,
//! supertile hierarchies and SVG rendering. Planar (`d = 2`) only.

mod corona;
mod hierarchy;
pub mod polygon;
mod svg;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deformation::ShapeMatrix;
use crate::substitution::{Address, Patch, SubstitutionError, SubstitutionSystem};

pub use corona::{
    classify_embedded, collared_prototiles, collared_prototiles_auto, corona, CollaredAtlas,
    CollaredClass, CoronaIndex, Signature,
};
pub use hierarchy::{HierarchyNode, SupertileHierarchy};
pub use polygon::{Bbox, Point, Polygon};
pub use svg::{palette_color, render_svg, svg_string, Coloring};

/// Polygons with smaller area are treated as degenerate.
pub const MIN_TILE_AREA: f64 = 1e-9;
/// Absolute tolerance for closed-support intersection.
pub const TOUCH_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("system {0} has no prototile edges")]
    MissingPrototiles(String),
    #[error("geometry needs d = 2, the system has d = {0}")]
    UnsupportedDimension(usize),
    #[error("prototile {kind} realizes with area {area:e}")]
    DegenerateShape { kind: usize, area: f64 },
    #[error("tile {index} is too close to the patch boundary for a complete corona")]
    IncompleteCorona { index: usize },
    #[error("collared count still changing at level {level}: {count} then {next}")]
    NotSaturated {
        level: usize,
        count: usize,
        next: usize,
    },
    #[error("no fully collared copy of a level-{level} supertile of type {kind} found")]
    NoInteriorCopy { level: usize, kind: usize },
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizedTile {
    pub kind: usize,
    pub addr: Address,
    pub polygon: Polygon,
}

/// A patch with every tile drawn as a polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedPatch {
    pub tiles: Vec<RealizedTile>,
    pub shape: ShapeMatrix,
}

impl RealizedPatch {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.tiles.iter().map(|t| t.polygon.area()).sum()
    }

    pub fn bbox(&self) -> Bbox {
        self.tiles
            .iter()
            .fold(Bbox::EMPTY, |b, t| b.union(&t.polygon.bbox()))
    }

    /// Area-weighted centroid of the tiles.
    pub fn centroid(&self) -> Point {
        let (mut sx, mut sy, mut sa) = (0.0, 0.0, 0.0);
        for t in &self.tiles {
            let a = t.polygon.area();
            let c = t.polygon.centroid();
            sx += a * c[0];
            sy += a * c[1];
            sa += a;
        }
        [sx / sa, sy / sa]
    }

    /// Largest tile diameter.
    pub fn max_diameter(&self) -> f64 {
        self.tiles.iter().map(|t| t.polygon.diameter()).fold(0.0, f64::max)
    }
}

/// Prototile polygons under `shape`, anchored at the origin.
pub fn prototile_polygons(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
) -> Result<Vec<Polygon>, GeometryError> {
    if sys.d != 2 || shape.d() != 2 {
        return Err(GeometryError::UnsupportedDimension(sys.d));
    }
    let edges = sys
        .prototile_edges
        .as_ref()
        .ok_or_else(|| GeometryError::MissingPrototiles(sys.name.clone()))?;
    edges
        .iter()
        .enumerate()
        .map(|(kind, [u, v])| {
            let (u, v) = (shape.realize(u), shape.realize(v));
            let poly = Polygon::parallelogram([0.0, 0.0], [u[0], u[1]], [v[0], v[1]]);
            let area = poly.area();
            if area < MIN_TILE_AREA {
                Err(GeometryError::DegenerateShape { kind, area })
            } else {
                Ok(poly)
            }
        })
        .collect()
}

pub fn realize_patch(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    patch: &Patch,
) -> Result<RealizedPatch, GeometryError> {
    let protos = prototile_polygons(sys, shape)?;
    let tiles = patch
        .tiles
        .iter()
        .map(|t| {
            let o = shape.realize(&t.addr);
            RealizedTile {
                kind: t.kind,
                addr: t.addr.clone(),
                polygon: protos[t.kind].translated([o[0], o[1]]),
            }
        })
        .collect();
    Ok(RealizedPatch {
        tiles,
        shape: shape.clone(),
    })
}

/// Realized level-`n` supertile together with its hierarchy.
pub fn realize_supertile(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    root: usize,
    level: usize,
) -> Result<(RealizedPatch, SupertileHierarchy), GeometryError> {
    let patch = sys.expand_supertile(root, level)?;
    let realized = realize_patch(sys, shape, &patch)?;
    let hierarchy = SupertileHierarchy::build(sys, root, level, &realized)?;
    Ok((realized, hierarchy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CubicParams;
    use crate::models::{kenyon_system_with_layout, square_system, KenyonLayout};

    #[test]
    fn square_level_one_is_a_six_by_six_square() {
        let sys = square_system().system;
        let patch = sys.expand_supertile(2, 1).unwrap();
        let r = realize_patch(&sys, &sys.default_shape, &patch).unwrap();
        assert_eq!(r.len(), 36);
        assert!((r.area() - 36.0).abs() < 1e-12);
        assert_eq!(r.bbox(), Bbox { min: [0.0, 0.0], max: [6.0, 6.0] });
    }

    #[test]
    fn kenyon_level_two_area() {
        let k = kenyon_system_with_layout(CubicParams::new(1, 1, 1).unwrap(), KenyonLayout::Geometric).unwrap();
        let sys = &k.system;
        let patch = sys.expand_supertile(1, 2).unwrap();
        let r = realize_patch(sys, &sys.default_shape, &patch).unwrap();
        assert_eq!(r.len(), 4);
        let root = prototile_polygons(sys, &sys.default_shape).unwrap()[1].area();
        let expect = k.lambda.norm_sqr().powi(2) * root;
        assert!((r.area() - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn degenerate_shape_rejected() {
        let sys = square_system().system;
        let flat = ShapeMatrix::from_rows(&[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]], "").unwrap();
        let patch = sys.expand_supertile(0, 0).unwrap();
        assert!(matches!(
            realize_patch(&sys, &flat, &patch),
            Err(GeometryError::DegenerateShape { .. })
        ));
    }
}
