//! Coronas and collared prototiles.
//!
//! Adjacency is decided numerically (closed supports within [`TOUCH_TOL`]),
//! but a tile's collar is recorded as exact address offsets, so two collars
//! are translation-equivalent exactly when their signatures are equal.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{realize_patch, Bbox, GeometryError, RealizedPatch, SupertileHierarchy, TOUCH_TOL};
use crate::deformation::ShapeMatrix;
use crate::substitution::{Address, Patch, PatchTile, SubstitutionSystem};

/// Relative shortfall in covered area tolerated by the completeness check.
const COVERAGE_TOL: f64 = 1e-9;

/// Uniform-grid spatial index over tile bounding boxes.
pub struct CoronaIndex<'a> {
    patch: &'a RealizedPatch,
    cell: f64,
    grid: HashMap<(i64, i64), Vec<usize>>,
    max_diameter: f64,
}

impl<'a> CoronaIndex<'a> {
    pub fn new(patch: &'a RealizedPatch) -> Self {
        let max_diameter = patch.max_diameter();
        let cell = if max_diameter > 0.0 { max_diameter } else { 1.0 };
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, t) in patch.tiles.iter().enumerate() {
            let b = t.polygon.bbox();
            for (cx, cy) in Self::cells(cell, &b) {
                grid.entry((cx, cy)).or_default().push(i);
            }
        }
        CoronaIndex {
            patch,
            cell,
            grid,
            max_diameter,
        }
    }

    fn cells(cell: f64, b: &Bbox) -> impl Iterator<Item = (i64, i64)> {
        let lo = [(b.min[0] / cell).floor() as i64, (b.min[1] / cell).floor() as i64];
        let hi = [(b.max[0] / cell).floor() as i64, (b.max[1] / cell).floor() as i64];
        (lo[0]..=hi[0]).flat_map(move |x| (lo[1]..=hi[1]).map(move |y| (x, y)))
    }

    /// Tiles whose bounding boxes meet `b`, ascending.
    pub fn query(&self, b: &Bbox) -> Vec<usize> {
        let mut out: Vec<usize> = Self::cells(self.cell, b)
            .filter_map(|c| self.grid.get(&c))
            .flatten()
            .copied()
            .filter(|&i| self.patch.tiles[i].polygon.bbox().overlaps(b, TOUCH_TOL))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn max_diameter(&self) -> f64 {
        self.max_diameter
    }

    /// Whether the tiles cover `region` completely.
    pub fn covers(&self, region: &Bbox) -> bool {
        let covered: f64 = self
            .query(region)
            .iter()
            .map(|&i| self.patch.tiles[i].polygon.clip(region).area())
            .sum();
        covered >= region.area() * (1.0 - COVERAGE_TOL)
    }

    /// Tiles meeting tile `i`, without the completeness check.
    pub fn touching(&self, i: usize) -> Vec<usize> {
        let poly = &self.patch.tiles[i].polygon;
        self.query(&poly.bbox().expand(TOUCH_TOL))
            .into_iter()
            .filter(|&j| j != i && poly.distance(&self.patch.tiles[j].polygon) <= TOUCH_TOL)
            .collect()
    }

    /// Tiles within `depth` adjacency steps of tile `i` (excluding `i`).
    pub fn k_corona(&self, i: usize, depth: usize) -> Result<Vec<usize>, GeometryError> {
        let region = self.patch.tiles[i]
            .polygon
            .bbox()
            .expand(depth as f64 * self.max_diameter);
        if !self.covers(&region) {
            return Err(GeometryError::IncompleteCorona { index: i });
        }
        let mut seen: HashSet<usize> = HashSet::from([i]);
        let mut frontier = vec![i];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &t in &frontier {
                for j in self.touching(t) {
                    if seen.insert(j) {
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        seen.remove(&i);
        let mut out: Vec<usize> = seen.into_iter().collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Collar signature of tile `i` at `depth`.
    pub fn signature(&self, i: usize, depth: usize) -> Result<Signature, GeometryError> {
        let center = &self.patch.tiles[i];
        let mut corona: Vec<(usize, Address)> = self
            .k_corona(i, depth)?
            .into_iter()
            .map(|j| {
                let t = &self.patch.tiles[j];
                let offset = t.addr.checked_sub(&center.addr).expect("offsets fit");
                (t.kind, offset)
            })
            .collect();
        corona.sort();
        Ok(Signature {
            center: center.kind,
            corona,
        })
    }
}

/// 1-corona of tile `index`: all tiles whose closed supports meet it.
pub fn corona(realized: &RealizedPatch, index: usize) -> Result<Vec<usize>, GeometryError> {
    CoronaIndex::new(realized).k_corona(index, 1)
}

/// A tile type together with its collar, offsets relative to the center.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub center: usize,
    pub corona: Vec<(usize, Address)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollaredClass {
    pub class_id: usize,
    pub center_type: usize,
    pub corona: Vec<(usize, Address)>,
    pub witnesses: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollaredAtlas {
    pub count: usize,
    pub corona_depth: usize,
    /// Level at which the classes were enumerated.
    pub level: usize,
    pub interior_tiles: usize,
    pub classes: Vec<CollaredClass>,
}

impl CollaredAtlas {
    fn from_counts(counts: BTreeMap<Signature, usize>, depth: usize, level: usize) -> Self {
        let interior_tiles = counts.values().sum();
        let classes: Vec<CollaredClass> = counts
            .into_iter()
            .enumerate()
            .map(|(class_id, (sig, witnesses))| CollaredClass {
                class_id,
                center_type: sig.center,
                corona: sig.corona,
                witnesses,
            })
            .collect();
        CollaredAtlas {
            count: classes.len(),
            corona_depth: depth,
            level,
            interior_tiles,
            classes,
        }
    }

    /// Class index of a signature.
    pub fn lookup(&self, sig: &Signature) -> Option<usize> {
        self.classes
            .binary_search_by(|c| (c.center_type, &c.corona).cmp(&(sig.center, &sig.corona)))
            .ok()
    }

    pub fn min_witnesses(&self) -> usize {
        self.classes.iter().map(|c| c.witnesses).min().unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }
}

/// Signature counts over the interior tiles of a realized patch.
fn patch_classes(realized: &RealizedPatch, depth: usize) -> BTreeMap<Signature, usize> {
    let index = CoronaIndex::new(realized);
    let sigs: Vec<Signature> = (0..realized.len())
        .into_par_iter()
        .filter_map(|i| index.signature(i, depth).ok())
        .collect();
    let mut counts = BTreeMap::new();
    for sig in sigs {
        *counts.entry(sig).or_insert(0) += 1;
    }
    counts
}

/// Signature counts over the level-`level` supertiles of every type.
fn level_classes(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    level: usize,
    depth: usize,
) -> Result<BTreeMap<Signature, usize>, GeometryError> {
    let mut counts = BTreeMap::new();
    for root in 0..sys.m {
        let patch = sys.expand_supertile(root, level)?;
        let realized = realize_patch(sys, shape, &patch)?;
        for (sig, n) in patch_classes(&realized, depth) {
            *counts.entry(sig).or_insert(0) += n;
        }
    }
    Ok(counts)
}

/// Collared classes at `level`, checked against `level + 1`.
///
/// The system's digits must tile (for Kenyon, the geometric layout).
pub fn collared_prototiles(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    level: usize,
    depth: usize,
) -> Result<CollaredAtlas, GeometryError> {
    let here = level_classes(sys, shape, level, depth)?;
    let next = level_classes(sys, shape, level + 1, depth)?;
    if here.is_empty() || here.len() != next.len() || next.values().any(|&w| w < 2) {
        return Err(GeometryError::NotSaturated {
            level,
            count: here.len(),
            next: next.len(),
        });
    }
    Ok(CollaredAtlas::from_counts(next, depth, level + 1))
}

/// Raises the level until the class count repeats with every class seen at
/// least twice.
pub fn collared_prototiles_auto(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    depth: usize,
    max_level: usize,
) -> Result<CollaredAtlas, GeometryError> {
    let mut prev = 0;
    for level in 0..=max_level {
        let counts = level_classes(sys, shape, level, depth)?;
        let count = counts.len();
        if count > 0 && count == prev && counts.values().all(|&w| w >= 2) {
            return Ok(CollaredAtlas::from_counts(counts, depth, level));
        }
        if level == max_level {
            return Err(GeometryError::NotSaturated {
                level: level - 1,
                count: prev,
                next: count,
            });
        }
        prev = count;
    }
    unreachable!("loop returns at max_level")
}

/// A level-`level` supertile of type `root` with a collar class per tile.
///
/// The supertile is located inside a deeper supertile so that every one of
/// its tiles has a complete corona. Addresses are relative to the
/// supertile's anchor, in the order of [`SubstitutionSystem::expand_supertile`].
/// Classes missing from `atlas` get indices from `atlas.count` upward.
pub fn classify_embedded(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    atlas: &CollaredAtlas,
    root: usize,
    level: usize,
    max_extra: usize,
) -> Result<(RealizedPatch, Vec<usize>), GeometryError> {
    for extra in 1..=max_extra {
        for outer in 0..sys.m {
            let patch = sys.expand_supertile(outer, level + extra)?;
            let realized = realize_patch(sys, shape, &patch)?;
            let hierarchy = SupertileHierarchy::build(sys, outer, level + extra, &realized)?;
            let index = CoronaIndex::new(&realized);
            let center = realized.centroid();
            let mut candidates: Vec<usize> = hierarchy
                .at_level(level)
                .filter(|&i| hierarchy.node(i).kind == root)
                .collect();
            let dist = |i: usize| {
                let c = hierarchy.node(i).bbox.center();
                (c[0] - center[0]).hypot(c[1] - center[1])
            };
            candidates.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)));
            for node in candidates {
                let node = hierarchy.node(node);
                let sigs: Result<Vec<Signature>, _> = node
                    .range
                    .clone()
                    .into_par_iter()
                    .map(|i| index.signature(i, atlas.corona_depth))
                    .collect();
                let Ok(sigs) = sigs else { continue };
                let mut unknown: BTreeMap<Signature, usize> = BTreeMap::new();
                let classes = sigs
                    .iter()
                    .map(|sig| {
                        atlas.lookup(sig).unwrap_or_else(|| {
                            let next = atlas.count + unknown.len();
                            *unknown.entry(sig.clone()).or_insert(next)
                        })
                    })
                    .collect();
                let local = Patch {
                    tiles: realized.tiles[node.range.clone()]
                        .iter()
                        .map(|t| PatchTile {
                            kind: t.kind,
                            addr: t.addr.checked_sub(&node.addr).expect("offsets fit"),
                        })
                        .collect(),
                    level,
                    root,
                };
                return Ok((realize_patch(sys, shape, &local)?, classes));
            }
        }
    }
    Err(GeometryError::NoInteriorCopy { level, kind: root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::square_system;

    #[test]
    fn interior_square_tile_has_eight_neighbours() {
        let sys = square_system().system;
        let patch = sys.expand_supertile(0, 1).unwrap();
        let r = realize_patch(&sys, &sys.default_shape, &patch).unwrap();
        let at = |x: f64, y: f64| {
            r.tiles
                .iter()
                .position(|t| sys.default_shape.realize(&t.addr) == vec![x, y])
                .unwrap()
        };
        // the origin tile sits in the corner of the 6x6 block
        assert!(matches!(corona(&r, at(0.0, 0.0)), Err(GeometryError::IncompleteCorona { .. })));
        let inner = at(2.0, 2.0);
        assert_eq!(corona(&r, inner).unwrap().len(), 8);
    }

    #[test]
    fn square_collars_saturate() {
        let sys = square_system().system;
        let atlas = collared_prototiles_auto(&sys, &sys.default_shape, 1, 3).unwrap();
        assert!(atlas.count > 0);
        assert!(atlas.min_witnesses() >= 2);
        let again = collared_prototiles(&sys, &sys.default_shape, atlas.level, 1).unwrap();
        assert_eq!(again.count, atlas.count);
    }
}
