//! The spectral cocycle over the toral endomorphism `z -> M^T z mod Z^s`.
//!
//! `M(z)(j,k) = sum_{x in digits[j][k]} e(<z, x>)` with `e(t) = exp(-2 pi i t)`,
//! and `M(z, n) = M((M^T)^{n-1} z) ... M(z)`. Products are renormalized to
//! unit Frobenius norm after every step, with the logarithm of the scale
//! accumulated separately, so arbitrarily long products never overflow.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Int, IntMatrix};
use crate::substitution::{pf_data, SubstitutionSystem};

/// Largest `n` accepted by [`domination_check`].
pub const MAX_DOMINATION_STEPS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("direction vector is zero")]
    ZeroVector,
    #[error("window {window} must satisfy 1 <= window <= N = {n}")]
    BadWindow { n: usize, window: usize },
    #[error("domination check needs n <= {max}, got {n}")]
    TooManySteps { n: usize, max: usize },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("integer overflow in exact matrix power")]
    Overflow,
}

/// `a * z mod 1` with the rounding error of the product compensated.
#[inline]
pub(crate) fn frac_product(z: f64, a: Int) -> f64 {
    let af = a as f64;
    let p = z * af;
    let err = z.mul_add(af, -p);
    p.rem_euclid(1.0) + err
}

#[inline]
fn reduce(t: f64) -> f64 {
    let r = t.rem_euclid(1.0);
    // rem_euclid rounds tiny negatives up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `<z, x> mod 1` in `[0, 1)`.
#[inline]
pub fn phase(z: &[f64], x: &[Int]) -> f64 {
    reduce(z.iter().zip(x).map(|(&zi, &xi)| frac_product(zi, xi)).sum())
}

/// `exp(-2 pi i t)`.
#[inline]
pub fn e(t: f64) -> Complex64 {
    // evaluate at the representative in [-1/2, 1/2)
    let t = t - t.round();
    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * t)
}

/// A point of `R^s / Z^s`, stored with coordinates in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: impl IntoIterator<Item = f64>) -> Self {
        TorusPoint(coords.into_iter().map(reduce).collect())
    }

    pub fn zero(s: usize) -> Self {
        TorusPoint(vec![0.0; s])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `frac(A z)` for an integer matrix `A`.
    pub fn apply(&self, a: &IntMatrix) -> TorusPoint {
        TorusPoint(
            (0..a.rows())
                .map(|i| reduce(a.row(i).iter().zip(&self.0).map(|(&aij, &zj)| frac_product(zj, aij)).sum()))
                .collect(),
        )
    }

    /// Sup-norm distance to the nearest lattice point, in `[0, 1/2]`.
    pub fn lattice_distance(&self) -> f64 {
        self.0.iter().map(|&x| x.min(1.0 - x)).fold(0.0, f64::max)
    }

    /// `z, A z, ..., A^{n-1} z`, each computed from `z` with an exact integer
    /// power of `A` while the entries fit, by stepping otherwise.
    pub fn orbit_exact(&self, a: &IntMatrix, n: usize) -> Vec<TorusPoint> {
        let mut out = Vec::with_capacity(n);
        let mut power = Some(IntMatrix::identity(a.rows()));
        for k in 0..n {
            let next = match &power {
                Some(p) if p.inf_norm() < (1 << 52) => self.apply(p),
                _ => out.last().map_or_else(|| self.clone(), |prev: &TorusPoint| prev.apply(a)),
            };
            out.push(next);
            if k + 1 < n {
                power = power.and_then(|p| p.checked_mul(a));
            }
        }
        out
    }
}

/// The deformed Fourier matrix at `z`.
pub fn fourier_matrix(sys: &SubstitutionSystem, z: &TorusPoint) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(sys.m, sys.m, Complex64::new(0.0, 0.0));
    for (j, row) in sys.digits.iter().enumerate() {
        for (k, cell) in row.iter().enumerate() {
            out[(j, k)] = cell.iter().map(|x| e(phase(z.coords(), x))).sum();
        }
    }
    out
}

/// Renormalized cocycle product.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleResult {
    /// `log ||M(z, n)||_F`.
    pub log_norm: f64,
    /// `M(z, n) / ||M(z, n)||_F`.
    pub unit_matrix: DMatrix<Complex64>,
    pub steps: usize,
    /// `(1/k) log ||M(z, k)||_F` for `k = 1..=n`.
    pub trail: Vec<f64>,
}

impl CocycleResult {
    /// `exp(log_norm) * unit_matrix`.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        self.unit_matrix.map(|c| c * self.log_norm.exp())
    }
}

/// Running product with Frobenius renormalization; calls `visit(k, log_norm,
/// unit)` after step `k`.
fn renormalized_product(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    n: usize,
    mut visit: impl FnMut(usize, f64, &DMatrix<Complex64>),
) -> (f64, DMatrix<Complex64>) {
    let mt = sys.driver_transpose();
    let mut unit = DMatrix::<Complex64>::identity(sys.m, sys.m);
    let mut log_norm = 0.0;
    let mut point = z.clone();
    for k in 1..=n {
        unit = fourier_matrix(sys, &point) * unit;
        let norm = unit.norm();
        if norm == 0.0 {
            return (f64::NEG_INFINITY, unit);
        }
        unit /= Complex64::new(norm, 0.0);
        log_norm += norm.ln();
        visit(k, log_norm, &unit);
        point = point.apply(&mt);
    }
    if n == 0 {
        let scale = (sys.m as f64).sqrt();
        unit /= Complex64::new(scale, 0.0);
        log_norm = scale.ln();
    }
    (log_norm, unit)
}

pub fn cocycle_product(sys: &SubstitutionSystem, z: &TorusPoint, n: usize) -> CocycleResult {
    let mut trail = Vec::with_capacity(n);
    let (log_norm, unit_matrix) =
        renormalized_product(sys, z, n, |k, log_norm, _| trail.push(log_norm / k as f64));
    CocycleResult {
        log_norm,
        unit_matrix,
        steps: n,
        trail,
    }
}

/// Unrenormalized product `M(z, n)`, for small `n`.
pub fn cocycle_product_raw(sys: &SubstitutionSystem, z: &TorusPoint, n: usize) -> DMatrix<Complex64> {
    let mt = sys.driver_transpose();
    let mut prod = DMatrix::<Complex64>::identity(sys.m, sys.m);
    for point in z.orbit_exact(&mt, n) {
        prod = fourier_matrix(sys, &point) * prod;
    }
    prod
}

/// Matrix norms available for reporting.
#[derive(Clone, Debug, PartialEq)]
pub enum Norm {
    Frobenius,
    /// Largest singular value.
    Operator2,
    /// `max_i sum_j |B_ij| v_j / v_i` for a positive weight vector `v`.
    Weighted(Vec<f64>),
}

impl Norm {
    /// Weighted norm with the Perron-Frobenius eigenvector of `S^T`.
    ///
    /// Since `|M(z,n)| <= (S^T)^n` entrywise and `S^T v = pf v`, every cocycle
    /// product satisfies `||M(z,n)||_v <= pf^n`, with equality at `z = 0`.
    pub fn pf_weighted(sys: &SubstitutionSystem) -> Norm {
        match pf_data(&sys.substitution_matrix()) {
            Ok(pf) => Norm::Weighted(pf.left),
            Err(_) => Norm::Weighted(vec![1.0; sys.m]),
        }
    }

    pub fn matrix(&self, b: &DMatrix<Complex64>) -> f64 {
        match self {
            Norm::Frobenius => b.norm(),
            Norm::Operator2 => b.clone().svd(false, false).singular_values.max(),
            Norm::Weighted(v) => (0..b.nrows())
                .map(|i| (0..b.ncols()).map(|j| b[(i, j)].norm() * v[j]).sum::<f64>() / v[i])
                .fold(0.0, f64::max),
        }
    }

    pub fn vector(&self, x: &DVector<Complex64>) -> f64 {
        match self {
            Norm::Frobenius | Norm::Operator2 => x.norm(),
            Norm::Weighted(v) => x
                .iter()
                .zip(v)
                .map(|(c, w)| c.norm() / w)
                .fold(0.0, f64::max),
        }
    }
}

/// Upper Lyapunov exponent estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lyapunov {
    pub chi_plus: f64,
    /// `(1/k) log ||M(z, k)||` for `k = 1..=N`, in the reporting norm.
    pub trail: Vec<f64>,
    pub window: usize,
}

/// Default trailing window, `N / 10`.
pub fn default_window(n: usize) -> usize {
    (n / 10).max(1)
}

fn windowed_max(trail: &[f64], n: usize, window: usize) -> f64 {
    let start = n.saturating_sub(window).max(1);
    trail[start - 1..n].iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn check_window(n: usize, window: usize) -> Result<(), CocycleError> {
    if window == 0 || window > n {
        return Err(CocycleError::BadWindow { n, window });
    }
    Ok(())
}

/// `max_{N - window <= k <= N} (1/k) log ||M(z, k)||` in the PF-weighted norm.
pub fn lyapunov(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    n: usize,
    window: usize,
) -> Result<Lyapunov, CocycleError> {
    lyapunov_with_norm(sys, z, n, window, &Norm::pf_weighted(sys))
}

pub fn lyapunov_with_norm(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    n: usize,
    window: usize,
    norm: &Norm,
) -> Result<Lyapunov, CocycleError> {
    check_window(n, window)?;
    let mut trail = Vec::with_capacity(n);
    renormalized_product(sys, z, n, |k, log_norm, unit| {
        trail.push((log_norm + norm.matrix(unit).ln()) / k as f64);
    });
    // a vanished product stops the visitor early
    trail.resize(n, f64::NEG_INFINITY);
    Ok(Lyapunov {
        chi_plus: windowed_max(&trail, n, window),
        trail,
        window,
    })
}

/// Lyapunov estimates over many points in parallel, in input order.
pub fn lyapunov_field(
    sys: &SubstitutionSystem,
    points: &[TorusPoint],
    n: usize,
    window: usize,
) -> Result<Vec<f64>, CocycleError> {
    check_window(n, window)?;
    let norm = Norm::pf_weighted(sys);
    points
        .par_iter()
        .map(|z| lyapunov_with_norm(sys, z, n, window, &norm).map(|l| l.chi_plus))
        .collect()
}

fn directional(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    zeta: &[Complex64],
    n: usize,
    annihilator: Option<&[f64]>,
) -> Result<f64, CocycleError> {
    if zeta.len() != sys.m {
        return Err(CocycleError::DimensionMismatch {
            expected: sys.m,
            got: zeta.len(),
        });
    }
    check_window(n, default_window(n))?;
    let norm = Norm::pf_weighted(sys);
    let mut v = DVector::from_column_slice(zeta);
    let initial = norm.vector(&v);
    if initial == 0.0 || !initial.is_finite() {
        return Err(CocycleError::ZeroVector);
    }
    v /= Complex64::new(initial, 0.0);
    let project = |v: &mut DVector<Complex64>| {
        if let Some(w) = annihilator {
            let ww: f64 = w.iter().map(|x| x * x).sum();
            let wv: Complex64 = w.iter().zip(v.iter()).map(|(a, b)| b * a).sum();
            for (vi, wi) in v.iter_mut().zip(w) {
                *vi -= wv * (wi / ww);
            }
        }
    };
    project(&mut v);
    let mt = sys.driver_transpose();
    let mut point = z.clone();
    let mut log_norm = 0.0;
    let mut trail = Vec::with_capacity(n);
    for k in 1..=n {
        v = fourier_matrix(sys, &point) * v;
        project(&mut v);
        let size = norm.vector(&v);
        if size == 0.0 {
            trail.resize(n, f64::NEG_INFINITY);
            break;
        }
        v /= Complex64::new(size, 0.0);
        log_norm += size.ln();
        trail.push(log_norm / k as f64);
        point = point.apply(&mt);
    }
    Ok(windowed_max(&trail, n, default_window(n)))
}

/// Growth rate of `M(z, n) zeta`, windowed like [`lyapunov`].
pub fn lyapunov_directional(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    zeta: &[Complex64],
    n: usize,
) -> Result<f64, CocycleError> {
    directional(sys, z, zeta, n, None)
}

/// Directional growth with the iterate re-projected onto `w^perp` after
/// every step. At `z = 0` with `w` the PF eigenvector of `S`, `w^perp` is
/// invariant under `S^T` and the projection only strips rounding drift
/// towards the dominant direction.
pub fn lyapunov_directional_restricted(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    zeta: &[Complex64],
    n: usize,
    w: &[f64],
) -> Result<f64, CocycleError> {
    if w.len() != sys.m {
        return Err(CocycleError::DimensionMismatch {
            expected: sys.m,
            got: w.len(),
        });
    }
    directional(sys, z, zeta, n, Some(w))
}

/// `|M(z,n)(j,k)| <= ((S^T)^n)(j,k) + 1e-9` for every entry.
pub fn domination_check(sys: &SubstitutionSystem, z: &TorusPoint, n: usize) -> Result<bool, CocycleError> {
    if n > MAX_DOMINATION_STEPS {
        return Err(CocycleError::TooManySteps {
            n,
            max: MAX_DOMINATION_STEPS,
        });
    }
    let bound = sys
        .substitution_matrix()
        .transpose()
        .checked_pow(n as u32)
        .ok_or(CocycleError::Overflow)?;
    let prod = cocycle_product_raw(sys, z, n);
    Ok((0..sys.m).all(|j| (0..sys.m).all(|k| prod[(j, k)].norm() <= bound.get(j, k) as f64 + 1e-9)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CubicParams;
    use crate::models::{kenyon_system, square_system};
    use approx::assert_relative_eq;

    fn k111() -> SubstitutionSystem {
        kenyon_system(CubicParams::new(1, 1, 1).unwrap()).unwrap().system
    }

    #[test]
    fn reduction_lands_in_unit_interval() {
        let z = TorusPoint::new([-1e-20, 2.5, -0.25, 1.0]);
        assert_eq!(z.coords(), &[0.0, 0.5, 0.75, 0.0]);
        assert_eq!(z.lattice_distance(), 0.5);
    }

    #[test]
    fn phase_is_exact_for_dyadic_points() {
        assert_eq!(phase(&[0.5, 0.25], &[3, -7]), 0.75);
        assert!((e(0.5) + 1.0).norm() < 1e-15);
        assert!((e(0.25) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn fourier_at_half_integers() {
        let m = fourier_matrix(&k111(), &TorusPoint::new([0.5, 0.0, 0.5]));
        let expect = [[0.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, -1.0, 0.0]];
        for j in 0..3 {
            for k in 0..3 {
                assert!((m[(j, k)] - Complex64::new(expect[j][k], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_gives_transposed_substitution_matrix() {
        let sys = square_system().system;
        let m = fourier_matrix(&sys, &TorusPoint::zero(3));
        let st = sys.substitution_matrix().transpose();
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(m[(j, k)], Complex64::new(st.get(j, k) as f64, 0.0));
            }
        }
    }

    #[test]
    fn renormalized_matches_raw() {
        let sys = k111();
        let z = TorusPoint::new([0.123, 0.456, 0.789]);
        let res = cocycle_product(&sys, &z, 3);
        let raw = cocycle_product_raw(&sys, &z, 3);
        assert!((res.matrix() - &raw).norm() <= 1e-12 * raw.norm());
        assert_eq!(res.trail.len(), 3);
    }

    #[test]
    fn log_norm_at_zero() {
        let sys = k111();
        let res = cocycle_product(&sys, &TorusPoint::zero(3), 10);
        let exact = sys.substitution_matrix().transpose().checked_pow(10).unwrap().to_f64().norm();
        assert_relative_eq!(res.log_norm, exact.ln(), max_relative = 1e-13);
    }

    #[test]
    fn window_is_validated() {
        let sys = k111();
        let z = TorusPoint::zero(3);
        assert!(matches!(lyapunov(&sys, &z, 10, 0), Err(CocycleError::BadWindow { .. })));
        assert!(matches!(lyapunov(&sys, &z, 10, 11), Err(CocycleError::BadWindow { .. })));
    }

    #[test]
    fn zero_direction_rejected() {
        let sys = k111();
        let zero = [Complex64::new(0.0, 0.0); 3];
        assert_eq!(
            lyapunov_directional(&sys, &TorusPoint::zero(3), &zero, 20),
            Err(CocycleError::ZeroVector)
        );
    }

    #[test]
    fn weighted_norm_at_zero_is_pf_power() {
        let sys = square_system().system;
        let l = lyapunov(&sys, &TorusPoint::zero(3), 50, 5).unwrap();
        assert_relative_eq!(l.chi_plus, 36f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn orbit_exact_matches_stepping() {
        let sys = k111();
        let mt = sys.driver_transpose();
        let z = TorusPoint::new([0.3, 0.1, 0.7]);
        let orbit = z.orbit_exact(&mt, 6);
        let mut step = z.clone();
        for point in &orbit {
            for (a, b) in point.coords().iter().zip(step.coords()) {
                let diff = (a - b).abs();
                assert!(diff.min(1.0 - diff) < 1e-12);
            }
            step = step.apply(&mt);
        }
    }

    #[test]
    fn domination_refuses_long_products() {
        let sys = k111();
        assert!(domination_check(&sys, &TorusPoint::zero(3), 13).is_err());
        assert!(domination_check(&sys, &TorusPoint::zero(3), 12).unwrap());
    }
}
