//! The tree of sub-supertiles of an expanded supertile.
//!
//! [`SubstitutionSystem::expand_supertile`] emits the tiles of
//! `omega^n(T_j)` block by block: for each `k` in order and each digit
//! `x in digits[j][k]`, the tiles of `omega^{n-1}(T_k)` shifted by
//! `M^{n-1} x`. Every sub-supertile therefore owns a contiguous range of the
//! tile list, which the hierarchy records.

use std::ops::Range;

use super::{Bbox, GeometryError, RealizedPatch};
use crate::linalg::IntMatrix;
use crate::substitution::{Address, SubstitutionError, SubstitutionSystem};

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyNode {
    pub level: usize,
    pub kind: usize,
    /// Address of the supertile's anchor (its level-0 origin tile offset).
    pub addr: Address,
    pub range: Range<usize>,
    pub children: Vec<usize>,
    pub bbox: Bbox,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupertileHierarchy {
    pub nodes: Vec<HierarchyNode>,
    pub root: usize,
}

impl SupertileHierarchy {
    pub fn build(
        sys: &SubstitutionSystem,
        root_kind: usize,
        level: usize,
        realized: &RealizedPatch,
    ) -> Result<Self, GeometryError> {
        let powers = sys.driver_powers(level)?;
        let s = sys.substitution_matrix();
        // sizes[l][k]: tile count of omega^l(T_k)
        let mut sizes = vec![vec![1u128; sys.m]];
        for l in 1..=level {
            let prev = &sizes[l - 1];
            let next = (0..sys.m)
                .map(|k| (0..sys.m).map(|i| s.get(i, k) as u128 * prev[i]).sum())
                .collect();
            sizes.push(next);
        }
        if sizes[level][root_kind] != realized.len() as u128 {
            return Err(SubstitutionError::Invalid(format!(
                "realized patch has {} tiles, a level-{level} supertile of type {root_kind} has {}",
                realized.len(),
                sizes[level][root_kind]
            ))
            .into());
        }
        let mut builder = Builder {
            sys,
            powers: &powers,
            sizes: &sizes,
            realized,
            nodes: Vec::new(),
        };
        let root = builder.node(level, root_kind, Address::zero(sys.s), 0)?;
        Ok(SupertileHierarchy {
            nodes: builder.nodes,
            root,
        })
    }

    pub fn node(&self, i: usize) -> &HierarchyNode {
        &self.nodes[i]
    }

    /// Indices of all nodes at `level`.
    pub fn at_level(&self, level: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.nodes[i].level == level)
    }
}

struct Builder<'a> {
    sys: &'a SubstitutionSystem,
    powers: &'a [IntMatrix],
    sizes: &'a [Vec<u128>],
    realized: &'a RealizedPatch,
    nodes: Vec<HierarchyNode>,
}

impl Builder<'_> {
    fn node(&mut self, level: usize, kind: usize, addr: Address, start: usize) -> Result<usize, GeometryError> {
        let end = start + self.sizes[level][kind] as usize;
        let mut children = Vec::new();
        let bbox = if level == 0 {
            self.realized.tiles[start].polygon.bbox()
        } else {
            let mut cursor = start;
            let mut bbox = Bbox::EMPTY;
            for k in 0..self.sys.m {
                for x in &self.sys.digits[kind][k] {
                    let shift = self.powers[level - 1]
                        .checked_mul_vec(x)
                        .map(Address)
                        .ok_or(SubstitutionError::OverflowGuard { level })?;
                    let child_addr = addr
                        .checked_add(&shift)
                        .ok_or(SubstitutionError::OverflowGuard { level })?;
                    let child = self.node(level - 1, k, child_addr, cursor)?;
                    cursor = self.nodes[child].range.end;
                    bbox = bbox.union(&self.nodes[child].bbox);
                    children.push(child);
                }
            }
            debug_assert_eq!(cursor, end);
            bbox
        };
        self.nodes.push(HierarchyNode {
            level,
            kind,
            addr,
            range: start..end,
            children,
            bbox,
        });
        Ok(self.nodes.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::super::realize_supertile;
    use crate::algebra::CubicParams;
    use crate::models::{kenyon_system_with_layout, KenyonLayout};

    #[test]
    fn leaves_match_tiles() {
        let k = kenyon_system_with_layout(CubicParams::new(1, 1, 4).unwrap(), KenyonLayout::Geometric).unwrap();
        let sys = &k.system;
        let (realized, h) = realize_supertile(sys, &sys.default_shape, 1, 4).unwrap();
        let root = h.node(h.root);
        assert_eq!(root.range, 0..realized.len());
        for i in h.at_level(0) {
            let n = h.node(i);
            let t = &realized.tiles[n.range.start];
            assert_eq!((t.kind, &t.addr), (n.kind, &n.addr));
        }
        assert_eq!(h.at_level(0).count(), realized.len());
    }
}
