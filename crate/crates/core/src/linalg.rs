//! Exact integer matrices and a few dense helpers shared by the other modules.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

/// Integer type used for all address arithmetic.
pub type Int = i128;

/// Dense row-major integer matrix with overflow-checked arithmetic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<Int>>", try_from = "Vec<Vec<Int>>")]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[Int]>>(rows: &[R]) -> Result<Self, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(IntMatrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Int {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: Int = 0;
                for k in 0..self.cols {
                    acc = acc.checked_add(self.get(i, k).checked_mul(other.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Some(out)
    }

    pub fn checked_mul_vec(&self, v: &[Int]) -> Option<Vec<Int>> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .try_fold(0 as Int, |acc, (a, b)| acc.checked_add(a.checked_mul(*b)?))
            })
            .collect()
    }

    pub fn checked_pow(&self, k: u32) -> Option<IntMatrix> {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows);
        for _ in 0..k {
            result = result.checked_mul(self)?;
        }
        Some(result)
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> Int {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<Int>())
            .max()
            .unwrap_or(0)
    }

    pub fn trace(&self) -> Int {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn column_sums(&self) -> Vec<Int> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Monic characteristic polynomial coefficients `[1, c1, ..., cn]` of
    /// `det(xI - A)`, computed exactly with the Faddeev-LeVerrier recursion.
    pub fn charpoly(&self) -> Option<Vec<Int>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![1 as Int];
        let mut m_k = Self::zeros(n, n);
        let mut c_prev: Int = 1;
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{k-1} I
            let mut next = self.checked_mul(&m_k)?;
            for i in 0..n {
                next.set(i, i, next.get(i, i).checked_add(c_prev)?);
            }
            let am = self.checked_mul(&next)?;
            let c_k = -am.trace() / k as Int;
            coeffs.push(c_k);
            m_k = next;
            c_prev = c_k;
        }
        Some(coeffs)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) as f64)
    }

    pub fn to_complex(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            Complex::new(self.get(i, j) as f64, 0.0)
        })
    }
}

impl From<IntMatrix> for Vec<Vec<Int>> {
    fn from(m: IntMatrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<Int>>> for IntMatrix {
    type Error = String;

    fn try_from(rows: Vec<Vec<Int>>) -> Result<Self, Self::Error> {
        IntMatrix::from_rows(&rows)
    }
}

/// Eigenvalues of a real square matrix (via the real Schur form).
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Determinant of a small real matrix given as columns `cols` of `m`.
pub fn minor_det(m: &DMatrix<f64>, cols: &[usize]) -> f64 {
    let sub = DMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])]);
    sub.determinant()
}

/// All `k`-element subsets of `0..n`, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_of_companion() {
        // companion of z^3 - p z^2 + q z + r with p=1,q=1,r=4
        let m = IntMatrix::from_rows(&[[0, 1, 0], [0, 0, 1], [-4, -1, 1]]).unwrap();
        assert_eq!(m.charpoly().unwrap(), vec![1, -1, 1, 4]);
    }

    #[test]
    fn overflow_is_detected() {
        let big = IntMatrix::from_rows(&[[Int::MAX / 2, 0], [0, 1]]).unwrap();
        assert!(big.checked_mul(&big).is_none());
        assert!(big.checked_mul_vec(&[3, 0]).is_none());
    }

    #[test]
    fn inf_norm_and_transpose() {
        let m = IntMatrix::from_rows(&[[0, 1, 0], [0, 0, 1], [-1, -1, 1]]).unwrap();
        assert_eq!(m.inf_norm(), 3);
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose().get(0, 2), -1);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows: Vec<Vec<Int>> = vec![vec![1, 2], vec![3]];
        assert!(IntMatrix::from_rows(&rows).is_err());
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(5, 2).len(), 10);
    }
}
