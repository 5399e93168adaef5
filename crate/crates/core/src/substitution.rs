//! Substitution systems in integer address coordinates.
//!
//! A system stores, for every pair of prototiles `(j, k)`, the addresses of
//! the copies of prototile `k` inside the inflated prototile `j`. Addresses
//! are exact integer vectors with respect to a fixed basis of the module of
//! return vectors; the driver matrix `M` is the action of the expansion on
//! that module, `address(phi x) = M address(x)`. Geometry enters only later,
//! through a [`ShapeMatrix`].

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deformation::ShapeMatrix;
use crate::linalg::{Int, IntMatrix};

/// Default cap on supertile levels; coordinates grow like `theta^n`.
pub const DEFAULT_MAX_LEVEL: usize = 40;
/// Default cap on the number of tiles produced by a single expansion.
pub const DEFAULT_MAX_TILES: usize = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstitutionError {
    #[error("integer overflow while expanding to level {level}")]
    OverflowGuard { level: usize },
    #[error("level {level} exceeds the configured maximum {max}")]
    LevelCap { level: usize, max: usize },
    #[error("expansion would produce {tiles} tiles, above the configured maximum {max}")]
    TooManyTiles { tiles: u128, max: usize },
    #[error("prototile index {0} out of range")]
    BadPrototile(usize),
    #[error("substitution matrix is not primitive")]
    NotPrimitive,
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("driver inconsistent at {x:?}: expected {expected:?}, driver gives {got:?}")]
    InconsistentDriver {
        x: Vec<Int>,
        expected: Vec<Int>,
        got: Vec<Int>,
    },
}

/// Exact integer coordinates of a return vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(pub Vec<Int>);

impl Address {
    pub fn zero(s: usize) -> Self {
        Address(vec![0; s])
    }

    pub fn checked_add(&self, other: &Address) -> Option<Address> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_add(*b))
            .collect::<Option<Vec<_>>>()
            .map(Address)
    }

    pub fn checked_sub(&self, other: &Address) -> Option<Address> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Address)
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&x| x as f64).collect()
    }
}

impl std::ops::Deref for Address {
    type Target = [Int];
    fn deref(&self) -> &[Int] {
        &self.0
    }
}

impl<const N: usize> From<[Int; N]> for Address {
    fn from(a: [Int; N]) -> Self {
        Address(a.to_vec())
    }
}

/// One tile of a patch: prototile index and address.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatchTile {
    pub kind: usize,
    pub addr: Address,
}

/// The tiles of `omega^level(T_root)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub tiles: Vec<PatchTile>,
    pub level: usize,
    pub root: usize,
}

impl Patch {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn census(&self, m: usize) -> Vec<u64> {
        let mut counts = vec![0u64; m];
        for t in &self.tiles {
            counts[t.kind] += 1;
        }
        counts
    }
}

/// Limits applied to supertile expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpansionLimits {
    pub max_level: usize,
    pub max_tiles: usize,
}

impl Default for ExpansionLimits {
    fn default() -> Self {
        ExpansionLimits {
            max_level: DEFAULT_MAX_LEVEL,
            max_tiles: DEFAULT_MAX_TILES,
        }
    }
}

/// A tile substitution expressed in address coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionSystem {
    pub name: String,
    pub m: usize,
    pub s: usize,
    pub d: usize,
    pub theta: f64,
    /// `address(phi x) = driver * address(x)`, addresses as column vectors.
    pub driver: IntMatrix,
    /// `digits[j][k]`: addresses of the copies of prototile `k` in `omega(T_j)`.
    pub digits: Vec<Vec<Vec<Address>>>,
    #[serde(rename = "defaultShape")]
    pub default_shape: ShapeMatrix,
    /// Human-readable name of each address basis vector.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    /// Each prototile as a parallelogram spanned by two address vectors,
    /// anchored at the tile's address.
    #[serde(
        default,
        rename = "prototileEdges",
        skip_serializing_if = "Option::is_none"
    )]
    pub prototile_edges: Option<Vec<[Address; 2]>>,
}

impl SubstitutionSystem {
    /// Checks every dimension in the record.
    pub fn validate(&self) -> Result<(), SubstitutionError> {
        let bad = |msg: String| Err(SubstitutionError::Invalid(msg));
        if self.m == 0 || self.s == 0 || self.d == 0 {
            return bad("m, s and d must be positive".into());
        }
        if self.theta.is_nan() || self.theta <= 1.0 {
            return bad(format!("expansion factor {} must exceed 1", self.theta));
        }
        if self.driver.rows() != self.s || self.driver.cols() != self.s {
            return bad(format!("driver must be {0}x{0}", self.s));
        }
        if self.digits.len() != self.m || self.digits.iter().any(|row| row.len() != self.m) {
            return bad(format!("digit table must be {0}x{0}", self.m));
        }
        for (j, row) in self.digits.iter().enumerate() {
            for (k, cell) in row.iter().enumerate() {
                if cell.iter().any(|a| a.len() != self.s) {
                    return bad(format!("digit addresses in ({j},{k}) must have length {}", self.s));
                }
            }
        }
        let (dr, dc) = self.default_shape.entries.shape();
        if dr != self.d || dc != self.s {
            return bad(format!("default shape must be {}x{}", self.d, self.s));
        }
        if !self.labels.is_empty() && self.labels.len() != self.m {
            return bad("labels must name every prototile".into());
        }
        if !self.basis.is_empty() && self.basis.len() != self.s {
            return bad("basis must name every generator".into());
        }
        if let Some(edges) = &self.prototile_edges {
            if edges.len() != self.m || edges.iter().flatten().any(|e| e.len() != self.s) {
                return bad("prototile edges must give two addresses per prototile".into());
            }
        }
        Ok(())
    }

    pub fn label(&self, k: usize) -> String {
        self.labels.get(k).cloned().unwrap_or_else(|| k.to_string())
    }

    /// `S(j,k) = #digits[k][j]`.
    pub fn substitution_matrix(&self) -> IntMatrix {
        let mut s = IntMatrix::zeros(self.m, self.m);
        for (k, row) in self.digits.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                s.set(j, k, cell.len() as Int);
            }
        }
        s
    }

    /// Transposed driver; the torus map of the spectral cocycle.
    pub fn driver_transpose(&self) -> IntMatrix {
        self.driver.transpose()
    }

    /// Exact driver powers `M^0..=M^n`.
    pub fn driver_powers(&self, n: usize) -> Result<Vec<IntMatrix>, SubstitutionError> {
        let mut powers = Vec::with_capacity(n + 1);
        powers.push(IntMatrix::identity(self.s));
        for level in 1..=n {
            let next = powers[level - 1]
                .checked_mul(&self.driver)
                .ok_or(SubstitutionError::OverflowGuard { level })?;
            powers.push(next);
        }
        Ok(powers)
    }

    /// `omega^n(T_j)` via `P_{n+1}(j) = U_k U_{x in D_jk} (P_n(k) + M^n x)`.
    pub fn expand_supertile(&self, j: usize, n: usize) -> Result<Patch, SubstitutionError> {
        self.expand_supertile_with(j, n, ExpansionLimits::default())
    }

    pub fn expand_supertile_with(
        &self,
        j: usize,
        n: usize,
        limits: ExpansionLimits,
    ) -> Result<Patch, SubstitutionError> {
        if j >= self.m {
            return Err(SubstitutionError::BadPrototile(j));
        }
        if n > limits.max_level {
            return Err(SubstitutionError::LevelCap {
                level: n,
                max: limits.max_level,
            });
        }
        let expected: u128 = self
            .census_exact(j, n)
            .map(|c| c.iter().map(|&x| x as u128).sum())
            .ok_or(SubstitutionError::OverflowGuard { level: n })?;
        if expected > limits.max_tiles as u128 {
            return Err(SubstitutionError::TooManyTiles {
                tiles: expected,
                max: limits.max_tiles,
            });
        }
        let powers = self.driver_powers(n)?;
        // translated digits per level: M^level x, computed once
        let mut levels: Vec<Vec<PatchTile>> = (0..self.m)
            .map(|k| {
                vec![PatchTile {
                    kind: k,
                    addr: Address::zero(self.s),
                }]
            })
            .collect();
        for (level, power) in powers.iter().enumerate().take(n) {
            let needed = self.types_needed(j, n - level - 1);
            let mut next: Vec<Vec<PatchTile>> = vec![Vec::new(); self.m];
            for jj in 0..self.m {
                if !needed[jj] {
                    continue;
                }
                let mut tiles = Vec::new();
                for (k, below) in levels.iter().enumerate() {
                    for x in &self.digits[jj][k] {
                        let shift = power
                            .checked_mul_vec(x)
                            .map(Address)
                            .ok_or(SubstitutionError::OverflowGuard { level: level + 1 })?;
                        for t in below {
                            let addr = t
                                .addr
                                .checked_add(&shift)
                                .ok_or(SubstitutionError::OverflowGuard { level: level + 1 })?;
                            tiles.push(PatchTile { kind: t.kind, addr });
                        }
                    }
                }
                next[jj] = tiles;
            }
            levels = next;
        }
        Ok(Patch {
            tiles: std::mem::take(&mut levels[j]),
            level: n,
            root: j,
        })
    }

    /// Which prototiles appear as level-`depth`-from-top supertiles of `T_j`.
    fn types_needed(&self, j: usize, depth: usize) -> Vec<bool> {
        let mut cur = vec![false; self.m];
        cur[j] = true;
        for _ in 0..depth {
            let mut next = vec![false; self.m];
            for (jj, _) in cur.iter().enumerate().filter(|(_, &on)| on) {
                for (k, reached) in next.iter_mut().enumerate() {
                    *reached |= !self.digits[jj][k].is_empty();
                }
            }
            cur = next;
        }
        cur
    }

    fn census_exact(&self, j: usize, n: usize) -> Option<Vec<Int>> {
        let s = self.substitution_matrix();
        let mut v = vec![0 as Int; self.m];
        v[j] = 1;
        for _ in 0..n {
            v = s.checked_mul_vec(&v)?;
        }
        Some(v)
    }

    /// Tile counts by type of `omega^n(T_j)`, i.e. `S^n e_j`.
    pub fn tile_census(&self, j: usize, n: usize) -> Result<Vec<Int>, SubstitutionError> {
        if j >= self.m {
            return Err(SubstitutionError::BadPrototile(j));
        }
        self.census_exact(j, n)
            .ok_or(SubstitutionError::OverflowGuard { level: n })
    }

    /// The system of `omega^k`: digits are the addresses in level-`k`
    /// supertiles, the driver is `M^k` and the expansion factor `theta^k`.
    pub fn power(&self, k: usize) -> Result<SubstitutionSystem, SubstitutionError> {
        if k == 0 {
            return Err(SubstitutionError::Invalid("power must be at least 1".into()));
        }
        let mut digits = vec![vec![Vec::new(); self.m]; self.m];
        for (j, row) in digits.iter_mut().enumerate() {
            let patch = self.expand_supertile(j, k)?;
            for t in patch.tiles {
                row[t.kind].push(t.addr);
            }
        }
        let driver = self
            .driver
            .checked_pow(k as u32)
            .ok_or(SubstitutionError::OverflowGuard { level: k })?;
        Ok(SubstitutionSystem {
            name: format!("{}^{k}", self.name),
            theta: self.theta.powi(k as i32),
            driver,
            digits,
            ..self.clone()
        })
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, SubstitutionError> {
        let sys: SubstitutionSystem = serde_json::from_str(text)
            .map_err(|e| SubstitutionError::Invalid(e.to_string()))?;
        sys.validate()?;
        Ok(sys)
    }
}

/// True iff some power `S^k`, `k <= (m-1)^2 + 1`, is entrywise positive.
pub fn is_primitive(s: &IntMatrix) -> bool {
    assert!(s.is_square());
    let m = s.rows();
    if m == 0 {
        return false;
    }
    if s.row(0).iter().any(|&x| x < 0) || (0..m).any(|i| s.row(i).iter().any(|&x| x < 0)) {
        return false;
    }
    let pattern: Vec<Vec<bool>> = (0..m)
        .map(|i| (0..m).map(|j| s.get(i, j) > 0).collect())
        .collect();
    let mut power = pattern.clone();
    let bound = (m - 1) * (m - 1) + 1;
    for _ in 1..=bound {
        if power.iter().flatten().all(|&b| b) {
            return true;
        }
        let mut next = vec![vec![false; m]; m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = (0..m).any(|k| power[i][k] && pattern[k][j]);
            }
        }
        power = next;
    }
    false
}

/// Perron-Frobenius data of a primitive non-negative matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfData {
    pub pf_value: f64,
    /// Right eigenvector normalized to sum 1 (tile frequencies).
    pub right: Vec<f64>,
    /// Left eigenvector normalized to sum 1.
    pub left: Vec<f64>,
    /// Largest modulus among the remaining eigenvalues.
    pub second_modulus: f64,
}

fn power_iteration(a: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let m = a.nrows();
    // A + I has the same PF vector and is aperiodic
    let shifted = a + DMatrix::<f64>::identity(m, m);
    let mut v = nalgebra::DVector::from_element(m, 1.0 / m as f64);
    for _ in 0..100_000 {
        let w = &shifted * &v;
        let w = &w / w.sum();
        let delta = (&w - &v).amax();
        v = w;
        if delta < 1e-16 {
            break;
        }
    }
    let av = a * &v;
    let value = av.sum() / v.sum();
    (value, v.iter().copied().collect())
}

pub fn pf_data(s: &IntMatrix) -> Result<PfData, SubstitutionError> {
    if !is_primitive(s) {
        return Err(SubstitutionError::NotPrimitive);
    }
    let a = s.to_f64();
    let (pf_value, right) = power_iteration(&a);
    let (_, left) = power_iteration(&a.transpose());
    let eig = crate::linalg::eigenvalues(&a);
    let mut moduli: Vec<(f64, f64)> = eig
        .iter()
        .map(|z| ((z - pf_value).norm(), z.norm()))
        .collect();
    // drop the eigenvalue closest to the PF value
    moduli.sort_by(|x, y| x.0.total_cmp(&y.0));
    let second_modulus = moduli
        .iter()
        .skip(1)
        .map(|&(_, m)| m)
        .fold(0.0, f64::max);
    Ok(PfData {
        pf_value,
        right,
        left,
        second_modulus,
    })
}

/// Independent description of how the expansion acts on return vectors.
pub trait MultiplicationOracle {
    /// Address of `phi(x)` for a return vector with address `x`.
    fn multiply(&self, x: &Address) -> Address;
}

/// Compares the driver with `oracle` on `samples` random addresses with
/// coordinates in `[-1000, 1000]`.
pub fn driver_consistency(
    sys: &SubstitutionSystem,
    oracle: &dyn MultiplicationOracle,
    samples: usize,
    seed: u64,
) -> Result<(), SubstitutionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = (0..sys.s).map(|i| {
        let mut e = vec![0; sys.s];
        e[i] = 1;
        Address(e)
    });
    let random = (0..samples).map(|_| Address((0..sys.s).map(|_| rng.random_range(-1000..=1000)).collect()));
    let inputs: Vec<Address> = basis.chain(random).collect();
    for x in inputs {
        let expected = oracle.multiply(&x);
        let got = sys
            .driver
            .checked_mul_vec(&x)
            .ok_or(SubstitutionError::OverflowGuard { level: 1 })?;
        if expected.0 != got {
            return Err(SubstitutionError::InconsistentDriver {
                x: x.0,
                expected: expected.0,
                got,
            });
        }
    }
    Ok(())
}

/// True iff the `(type, address)` pairs of `patch` are pairwise distinct.
/// Tiles of different types may share an anchor.
pub fn addresses_distinct(patch: &Patch) -> bool {
    let mut seen = HashSet::with_capacity(patch.len());
    patch.tiles.iter().all(|t| seen.insert((t.kind, &t.addr)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CubicParams;
    use crate::models::{kenyon_system, square_system};

    fn k111() -> SubstitutionSystem {
        kenyon_system(CubicParams::new(1, 1, 1).unwrap()).unwrap().system
    }

    #[test]
    fn kenyon_matrices() {
        let s = k111().substitution_matrix();
        assert_eq!(s.to_rows(), vec![vec![0, 0, 1], vec![1, 1, 1], vec![0, 1, 0]]);
        let s = kenyon_system(CubicParams::new(1, 1, 4).unwrap())
            .unwrap()
            .system
            .substitution_matrix();
        assert_eq!(s.to_rows(), vec![vec![0, 0, 4], vec![1, 1, 1], vec![0, 4, 0]]);
    }

    #[test]
    fn primitivity() {
        assert!(is_primitive(&k111().substitution_matrix()));
        assert!(is_primitive(&square_system().system.substitution_matrix()));
        assert!(!is_primitive(&IntMatrix::identity(3)));
    }

    #[test]
    fn small_expansions() {
        let sys = k111();
        let a1 = sys.expand_supertile(0, 1).unwrap();
        assert_eq!(a1.tiles, vec![PatchTile { kind: 1, addr: Address::from([0, 0, 0]) }]);
        let b1 = sys.expand_supertile(1, 1).unwrap();
        assert_eq!(
            b1.tiles,
            vec![
                PatchTile { kind: 1, addr: Address::from([-1, 0, 1]) },
                PatchTile { kind: 2, addr: Address::from([-1, 0, 1]) },
            ]
        );
        assert_eq!(sys.expand_supertile(1, 2).unwrap().len(), 4);
        assert_eq!(sys.tile_census(1, 2).unwrap(), vec![1, 2, 1]);
        assert_eq!(sys.tile_census(2, 0).unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn limits_are_enforced() {
        let sys = square_system().system;
        let tight = ExpansionLimits { max_level: 2, max_tiles: 100 };
        assert!(matches!(sys.expand_supertile_with(0, 3, tight), Err(SubstitutionError::LevelCap { .. })));
        assert!(matches!(sys.expand_supertile_with(0, 2, tight), Err(SubstitutionError::TooManyTiles { .. })));
        assert!(matches!(sys.expand_supertile(5, 1), Err(SubstitutionError::BadPrototile(5))));
    }

    #[test]
    fn pf_of_kenyon_114() {
        let sys = kenyon_system(CubicParams::new(1, 1, 4).unwrap()).unwrap().system;
        let pf = pf_data(&sys.substitution_matrix()).unwrap();
        assert!((pf.pf_value - 3.475_507_41).abs() < 1e-6);
        assert!((pf.second_modulus - 2.145_610_48).abs() < 1e-6);
        assert!((pf.right.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(matches!(pf_data(&IntMatrix::identity(2)), Err(SubstitutionError::NotPrimitive)));
    }

    #[test]
    fn power_system_matches_deeper_expansion() {
        let sys = k111();
        let sq = sys.power(2).unwrap();
        let mut direct: Vec<_> = sys.expand_supertile(1, 4).unwrap().tiles;
        let mut via: Vec<_> = sq.expand_supertile(1, 2).unwrap().tiles;
        direct.sort();
        via.sort();
        assert_eq!(direct, via);
    }

    #[test]
    fn json_round_trip() {
        let sys = k111();
        let text = sys.to_json().unwrap();
        let back = SubstitutionSystem::from_json(&text).unwrap();
        assert_eq!(back, sys);
        assert!(text.contains("\"defaultShape\""));
    }

    #[test]
    fn inconsistent_driver_reported() {
        struct Doubler;
        impl MultiplicationOracle for Doubler {
            fn multiply(&self, x: &Address) -> Address {
                Address(x.iter().map(|v| 2 * v).collect())
            }
        }
        let err = driver_consistency(&k111(), &Doubler, 5, 1).unwrap_err();
        assert!(matches!(err, SubstitutionError::InconsistentDriver { ref x, .. } if x == &vec![1, 0, 0]));
    }
}
