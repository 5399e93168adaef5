//! The two concrete families: Kenyon `(p,q,r)` tilings and the 6x6 square
//! substitution.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{classify_cubic, AlgebraError, CubicClass, CubicParams, CubicTag};
use crate::deformation::ShapeMatrix;
use crate::linalg::{Int, IntMatrix};
use crate::substitution::{Address, MultiplicationOracle, SubstitutionSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{params} is reducible (integer root {root}); the Kenyon construction needs an irreducible cubic")]
    Reducible { params: CubicParams, root: i64 },
    #[error("{params} has three real roots; the Kenyon construction needs a complex root")]
    NoComplexRoot { params: CubicParams },
    #[error("{params} has p = q = 0, so its complex root is not a complex Perron number")]
    NonPerron { params: CubicParams },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;

/// Placement of the `B -> B` and `C -> B` digits.
///
/// `Printed` keeps the ranges `j = 0..q-1` and `j = 0..p-1` of the published
/// digit list. Those sets reproduce the published cocycle matrix, but the
/// parallelograms they place overlap. `Geometric` shifts both ranges to
/// `j = 1..q` and `j = 1..p`, which tiles each inflated prototile exactly.
/// Every address-level quantity except the explicit cocycle entries agrees
/// between the two layouts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum KenyonLayout {
    #[default]
    Printed,
    Geometric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KenyonModel {
    pub params: CubicParams,
    pub class: CubicClass,
    pub lambda: Complex64,
    pub layout: KenyonLayout,
    pub system: SubstitutionSystem,
}

impl KenyonModel {
    pub fn shape(&self) -> &ShapeMatrix {
        &self.system.default_shape
    }

    /// Oracle multiplying return vectors by `lambda` in the plane.
    pub fn multiplier(&self) -> KenyonMultiplier {
        KenyonMultiplier::new(self.params, self.lambda, self.class.real_root)
    }
}

pub fn kenyon_system(params: CubicParams) -> Result<KenyonModel, ModelError> {
    kenyon_system_with_layout(params, KenyonLayout::Printed)
}

pub fn kenyon_system_with_layout(
    params: CubicParams,
    layout: KenyonLayout,
) -> Result<KenyonModel, ModelError> {
    let class = classify_cubic(params)?;
    match class.tag {
        CubicTag::Reducible(root) => return Err(ModelError::Reducible { params, root }),
        CubicTag::ThreeRealRoots => return Err(ModelError::NoComplexRoot { params }),
        CubicTag::ComplexNonPerron => return Err(ModelError::NonPerron { params }),
        CubicTag::ComplexPisot | CubicTag::ComplexPerronStronglyNonPisot => {}
    }
    let lambda = class.lambda.expect("complex classes carry lambda");
    let (p, q, r) = (params.p as Int, params.q as Int, params.r as Int);
    let shift = match layout {
        KenyonLayout::Printed => 0,
        KenyonLayout::Geometric => 1,
    };

    let mut digits = vec![vec![Vec::<Address>::new(); 3]; 3];
    digits[A][B].push(Address::from([0, 0, 0]));
    digits[B][B] = (shift..q + shift).map(|j| Address::from([-r, -j, p])).collect();
    digits[B][C] = (1..=r).map(|j| Address::from([-j, 0, p])).collect();
    digits[C][A] = (1..=r).map(|j| Address::from([-j, 0, p])).collect();
    digits[C][B] = (shift..p + shift).map(|j| Address::from([0, 0, p - j])).collect();

    let driver = IntMatrix::from_rows(&[[0, 0, -r], [1, 0, -q], [0, 1, p]]).expect("3x3");
    let powers = [Complex64::new(1.0, 0.0), lambda, lambda * lambda];
    let shape = ShapeMatrix::new(
        DMatrix::from_fn(2, 3, |i, j| if i == 0 { powers[j].re } else { powers[j].im }),
        "1, lambda, lambda^2",
    );
    let e = |i: usize| {
        let mut v = [0; 3];
        v[i] = 1;
        Address::from(v)
    };
    let name = match layout {
        KenyonLayout::Printed => format!("kenyon{params}"),
        KenyonLayout::Geometric => format!("kenyon{params}-geometric"),
    };
    let system = SubstitutionSystem {
        name,
        m: 3,
        s: 3,
        d: 2,
        theta: lambda.norm(),
        driver,
        digits,
        default_shape: shape,
        basis: vec!["1".into(), "lambda".into(), "lambda^2".into()],
        labels: vec!["A".into(), "B".into(), "C".into()],
        prototile_edges: Some(vec![[e(0), e(1)], [e(1), e(2)], [e(0), e(2)]]),
    };
    Ok(KenyonModel {
        params,
        class,
        lambda,
        layout,
        system,
    })
}

/// Multiplication by `lambda` computed through the Minkowski embedding
/// `n1 + n2 x + n3 x^2 -> (value at lambda, value at the real root)`, which
/// is invertible on `R^3`; the product is mapped back and rounded.
#[derive(Clone, Debug)]
pub struct KenyonMultiplier {
    lambda: Complex64,
    beta: f64,
    embed_inv: Matrix3<f64>,
}

impl KenyonMultiplier {
    pub fn new(_params: CubicParams, lambda: Complex64, beta: f64) -> Self {
        let l2 = lambda * lambda;
        let embed = Matrix3::new(
            1.0, lambda.re, l2.re, //
            0.0, lambda.im, l2.im, //
            1.0, beta, beta * beta,
        );
        KenyonMultiplier {
            lambda,
            beta,
            embed_inv: embed.try_inverse().expect("Vandermonde of distinct roots"),
        }
    }
}

impl MultiplicationOracle for KenyonMultiplier {
    fn multiply(&self, x: &Address) -> Address {
        let (n1, n2, n3) = (x[0] as f64, x[1] as f64, x[2] as f64);
        let at_lambda = self.lambda * (n1 + self.lambda * (n2 + self.lambda * n3));
        let at_beta = self.beta * (n1 + self.beta * (n2 + self.beta * n3));
        let coords = self.embed_inv * Vector3::new(at_lambda.re, at_lambda.im, at_beta);
        Address(coords.iter().map(|c| c.round() as Int).collect())
    }
}

/// Substitution images of the square model, printed top row first.
/// Symbols are the prototile labels `0`, `1`, `2`.
pub const SQUARE_GRIDS: [[&str; 6]; 3] = [
    ["222222", "222222", "101001", "100101", "222222", "222222"],
    ["222222", "222222", "101001", "101101", "222222", "222222"],
    ["010001", "001100", "222222", "222222", "100100", "100101"],
];

/// Basis order of square-model addresses.
pub const SQUARE_BASIS: [&str; 3] = ["v01", "v2", "h"];

#[derive(Clone, Debug, PartialEq)]
pub struct SquareModel {
    pub system: SubstitutionSystem,
    /// `grids[j][row][col]`, row 0 at the top.
    pub grids: [[[u8; 6]; 6]; 3],
}

fn parse_grids() -> [[[u8; 6]; 6]; 3] {
    let mut grids = [[[0u8; 6]; 6]; 3];
    for (j, rows) in SQUARE_GRIDS.iter().enumerate() {
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.bytes().enumerate() {
                grids[j][y][x] = ch - b'0';
            }
        }
    }
    grids
}

/// Whether a grid row holds tiles of types 0 and 1 (`true`) or type 2.
fn row_is_01(row: &[u8; 6]) -> bool {
    let twos = row.iter().filter(|&&t| t == 2).count();
    assert!(twos == 0 || twos == 6, "rows are homogeneous in the 01/2 split");
    twos == 0
}

impl SquareModel {
    /// Row types of tile `j`'s image from the bottom up, `true` for a 01-row.
    pub fn row_types(&self, j: usize) -> [bool; 6] {
        std::array::from_fn(|y| row_is_01(&self.grids[j][5 - y]))
    }

    /// Occurrences of `pattern` (rows top-down) inside the image of tile `j`.
    pub fn pattern_occurrences(&self, j: usize, pattern: &[&[u8]]) -> Vec<(usize, usize)> {
        let (ph, pw) = (pattern.len(), pattern[0].len());
        let mut hits = Vec::new();
        for top in 0..=6 - ph {
            for left in 0..=6 - pw {
                let matches = (0..ph)
                    .all(|dy| (0..pw).all(|dx| self.grids[j][top + dy][left + dx] == pattern[dy][dx]));
                if matches {
                    hits.push((top, left));
                }
            }
        }
        hits
    }

    /// Oracle for the inflation built from the row types of the images.
    pub fn row_oracle(&self) -> SquareRowOracle {
        let count = |j: usize| {
            let types = self.row_types(j);
            let ones = types.iter().filter(|&&t| t).count() as Int;
            (ones, 6 - ones)
        };
        SquareRowOracle {
            row01: count(0),
            row2: count(2),
        }
    }
}

pub fn square_system() -> SquareModel {
    let grids = parse_grids();
    let mut digits = vec![vec![Vec::<Address>::new(); 3]; 3];
    for (j, grid) in grids.iter().enumerate() {
        let (mut c01, mut c2) = (0 as Int, 0 as Int);
        for y in 0..6 {
            let row = &grid[5 - y];
            for (x, &kind) in row.iter().enumerate() {
                digits[j][kind as usize].push(Address::from([c01, c2, x as Int]));
            }
            if row_is_01(row) {
                c01 += 1;
            } else {
                c2 += 1;
            }
        }
    }
    for row in &mut digits {
        for cell in row {
            cell.sort();
        }
    }
    let driver = IntMatrix::from_rows(&[[2, 4, 0], [4, 2, 0], [0, 0, 6]]).expect("3x3");
    let shape = ShapeMatrix::new(
        DMatrix::from_row_slice(2, 3, &[0.0, 0.0, 1.0, 1.0, 1.0, 0.0]),
        "v01, v2, h",
    );
    let e = |i: usize| {
        let mut v = [0; 3];
        v[i] = 1;
        Address::from(v)
    };
    let system = SubstitutionSystem {
        name: "square".into(),
        m: 3,
        s: 3,
        d: 2,
        theta: 6.0,
        driver,
        digits,
        default_shape: shape,
        basis: SQUARE_BASIS.iter().map(|s| s.to_string()).collect(),
        labels: vec!["0".into(), "1".into(), "2".into()],
        prototile_edges: Some(vec![[e(2), e(0)], [e(2), e(0)], [e(2), e(1)]]),
    };
    SquareModel { system, grids }
}

/// Inflation by 6 with vertical bookkeeping: a 01-row inflates to the rows
/// of a 0/1 image, a 2-row to the rows of a 2 image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SquareRowOracle {
    /// (01-rows, 2-rows) in the image of a 01-row.
    pub row01: (Int, Int),
    /// (01-rows, 2-rows) in the image of a 2-row.
    pub row2: (Int, Int),
}

impl MultiplicationOracle for SquareRowOracle {
    fn multiply(&self, x: &Address) -> Address {
        let (a, b, c) = (x[0], x[1], x[2]);
        Address(vec![
            a * self.row01.0 + b * self.row2.0,
            a * self.row01.1 + b * self.row2.1,
            6 * c,
        ])
    }
}

/// Eigenvalue moduli of the square driver, descending.
pub fn square_driver_eigen() -> Vec<f64> {
    let model = square_system();
    let mut moduli: Vec<f64> = crate::linalg::eigenvalues(&model.system.driver.to_f64())
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substitution::{driver_consistency, pf_data};
    use approx::assert_relative_eq;

    fn cp(p: u32, q: u32, r: u32) -> CubicParams {
        CubicParams::new(p, q, r).unwrap()
    }

    #[test]
    fn kenyon_111_digits() {
        let k = kenyon_system(cp(1, 1, 1)).unwrap();
        let d = &k.system.digits;
        assert_eq!(d[A][B], vec![Address::from([0, 0, 0])]);
        for cell in [&d[B][B], &d[B][C], &d[C][A]] {
            assert_eq!(cell, &vec![Address::from([-1, 0, 1])]);
        }
        assert_eq!(d[C][B], vec![Address::from([0, 0, 1])]);
        assert!(d[A][A].is_empty() && d[A][C].is_empty() && d[C][C].is_empty() && d[B][A].is_empty());
    }

    #[test]
    fn kenyon_rejections() {
        assert!(matches!(kenyon_system(cp(0, 0, 2)), Err(ModelError::NonPerron { .. })));
        assert!(matches!(kenyon_system(cp(1, 1, 3)), Err(ModelError::Reducible { root: -1, .. })));
        assert!(matches!(kenyon_system(cp(4, 1, 1)), Err(ModelError::NoComplexRoot { .. })));
    }

    #[test]
    fn kenyon_driver_transpose() {
        let k = kenyon_system(cp(2, 3, 7)).unwrap();
        assert_eq!(
            k.system.driver_transpose().to_rows(),
            vec![vec![0, 1, 0], vec![0, 0, 1], vec![-7, -3, 2]]
        );
    }

    #[test]
    fn kenyon_oracle_agrees() {
        for (p, q, r) in [(1, 1, 1), (1, 1, 4), (1, 2, 5), (3, 2, 9)] {
            let k = kenyon_system(cp(p, q, r)).unwrap();
            driver_consistency(&k.system, &k.multiplier(), 500, 7).unwrap();
        }
    }

    #[test]
    fn geometric_layout_has_same_matrix() {
        let printed = kenyon_system(cp(1, 2, 5)).unwrap();
        let geometric = kenyon_system_with_layout(cp(1, 2, 5), KenyonLayout::Geometric).unwrap();
        assert_eq!(
            printed.system.substitution_matrix(),
            geometric.system.substitution_matrix()
        );
        assert_eq!(geometric.system.digits[C][B][0], Address::from([0, 0, 0]));
    }

    #[test]
    fn square_censuses() {
        let sq = square_system();
        assert_eq!(sq.system.tile_census(0, 1).unwrap(), vec![6, 6, 24]);
        assert_eq!(sq.system.tile_census(1, 1).unwrap(), vec![5, 7, 24]);
        assert_eq!(sq.system.tile_census(2, 1).unwrap(), vec![15, 9, 12]);
        assert_eq!(sq.system.substitution_matrix().column_sums(), vec![36, 36, 36]);
    }

    #[test]
    fn square_row_types() {
        let sq = square_system();
        let tall = [false, false, true, true, false, false];
        assert_eq!(sq.row_types(0), tall);
        assert_eq!(sq.row_types(1), tall);
        assert_eq!(sq.row_types(2), [true, true, false, false, true, true]);
    }

    #[test]
    fn square_driver_from_rows() {
        let sq = square_system();
        driver_consistency(&sq.system, &sq.row_oracle(), 1000, 3).unwrap();
        let moduli = square_driver_eigen();
        for (got, want) in moduli.iter().zip([6.0, 6.0, 2.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
        assert_eq!(sq.system.driver.trace(), 10);
    }

    #[test]
    fn square_pf_is_36() {
        let sq = square_system();
        let pf = pf_data(&sq.system.substitution_matrix()).unwrap();
        assert_relative_eq!(pf.pf_value, 36.0, max_relative = 1e-12);
        assert_relative_eq!(pf.second_modulus, 12.0, max_relative = 1e-9);
    }

    #[test]
    fn recognizability_witness() {
        let sq = square_system();
        let pattern: [&[u8]; 2] = [&[1, 0], &[1, 1]];
        assert_eq!(sq.pattern_occurrences(1, &pattern), vec![(2, 2)]);
    }

    #[test]
    fn square_address_of_a_cell() {
        // top-left cell of tile 2's image sits above three 01-rows and two 2-rows
        let sq = square_system();
        assert!(sq.system.digits[2][0].contains(&Address::from([3, 2, 0])));
    }
}
