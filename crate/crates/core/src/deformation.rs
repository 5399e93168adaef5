//! Shape matrices, torus orbits of lifted frequencies, and the diagnostics
//! built on them: the eigenvalue test and the escape (Veech) statistic.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocycle::TorusPoint;
use crate::linalg::{combinations, eigenvalues, minor_det, IntMatrix};
use crate::substitution::SubstitutionSystem;

/// Minimum `|det|` of the best `d x d` minor for a usable shape.
pub const DEFAULT_MIN_MINOR: f64 = 1e-6;
/// Eigenvalues within this distance of the unit circle are not classified.
pub const UNIT_CIRCLE_BAND: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeformationError {
    #[error("rho = {0} must lie in (0, 1/2)")]
    BadRho(f64),
    #[error("driver eigenvalue of modulus {0} is within {UNIT_CIRCLE_BAND} of the unit circle")]
    Degenerate(f64),
    #[error("radius {radius} rejected {rejected} of {attempts} samples as degenerate")]
    RadiusTooLarge {
        radius: f64,
        rejected: usize,
        attempts: usize,
    },
    #[error("shape is {rows}x{cols}, expected {d}x{s}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        d: usize,
        s: usize,
    },
    #[error("frequency has length {got}, expected {d}")]
    FrequencyMismatch { got: usize, d: usize },
    #[error("power must be at least 1")]
    ZeroPower,
}

/// A `d x s` real matrix whose columns realize the address basis in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeMatrix {
    pub entries: DMatrix<f64>,
    pub basis_label: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShapeRepr {
    Rows(Vec<Vec<f64>>),
    Labeled {
        entries: Vec<Vec<f64>>,
        #[serde(rename = "basisLabel")]
        basis_label: String,
    },
}

impl Serialize for ShapeMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let rows = self.rows();
        if self.basis_label.is_empty() {
            ShapeRepr::Rows(rows).serialize(ser)
        } else {
            ShapeRepr::Labeled {
                entries: rows,
                basis_label: self.basis_label.clone(),
            }
            .serialize(ser)
        }
    }
}

impl<'de> Deserialize<'de> for ShapeMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let (rows, label) = match ShapeRepr::deserialize(de)? {
            ShapeRepr::Rows(rows) => (rows, String::new()),
            ShapeRepr::Labeled {
                entries,
                basis_label,
            } => (entries, basis_label),
        };
        ShapeMatrix::from_rows(&rows, label).map_err(serde::de::Error::custom)
    }
}

impl ShapeMatrix {
    pub fn new(entries: DMatrix<f64>, basis_label: impl Into<String>) -> Self {
        ShapeMatrix {
            entries,
            basis_label: basis_label.into(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>], basis_label: impl Into<String>) -> Result<Self, String> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err("shape rows must have equal length".into());
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Ok(ShapeMatrix::new(
            DMatrix::from_row_slice(rows.len(), cols, &flat),
            basis_label,
        ))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn d(&self) -> usize {
        self.entries.nrows()
    }

    pub fn s(&self) -> usize {
        self.entries.ncols()
    }

    /// Position in `R^d` of an address.
    pub fn realize(&self, addr: &[crate::linalg::Int]) -> Vec<f64> {
        (0..self.d())
            .map(|i| addr.iter().enumerate().map(|(j, &a)| self.entries[(i, j)] * a as f64).sum())
            .collect()
    }

    /// Largest `|det|` over the `d x d` column minors.
    pub fn max_minor(&self) -> f64 {
        combinations(self.s(), self.d())
            .iter()
            .map(|cols| minor_det(&self.entries, cols).abs())
            .fold(0.0, f64::max)
    }

    /// Entrywise max distance.
    pub fn distance(&self, other: &ShapeMatrix) -> f64 {
        (&self.entries - &other.entries).amax()
    }

    fn check(&self, sys: &SubstitutionSystem) -> Result<(), DeformationError> {
        if self.d() != sys.d || self.s() != sys.s {
            return Err(DeformationError::ShapeMismatch {
                rows: self.d(),
                cols: self.s(),
                d: sys.d,
                s: sys.s,
            });
        }
        Ok(())
    }
}

/// `z = L^T lam mod Z^s`.
pub fn lift(shape: &ShapeMatrix, lam: &[f64]) -> TorusPoint {
    assert_eq!(lam.len(), shape.d(), "frequency dimension");
    TorusPoint::new((0..shape.s()).map(|j| (0..shape.d()).map(|i| shape.entries[(i, j)] * lam[i]).sum()))
}

/// Distances `eps_n = ||(M^T)^{kn} z||` to the lattice, `n = 0..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EpsilonSequence {
    pub values: Vec<f64>,
}

impl EpsilonSequence {
    /// Fraction of `n in 1..=N` with `eps_n < rho`.
    pub fn fraction_below(&self, rho: f64) -> f64 {
        let tail = &self.values[1..];
        if tail.is_empty() {
            return 1.0;
        }
        tail.iter().filter(|&&x| x < rho).count() as f64 / tail.len() as f64
    }

    /// Least-squares slope of `ln eps_n` against `n` over the nonzero terms;
    /// `None` with fewer than two of them.
    pub fn log_slope(&self) -> Option<f64> {
        log_slope(self.values.iter().enumerate().filter(|(_, &v)| v > 0.0))
    }
}

fn log_slope<'a>(points: impl Iterator<Item = (usize, &'a f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.map(|(n, &v)| (n as f64, v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Decay rate `exp(slope)` of `eps_n` over `range`.
pub fn decay_rate(seq: &EpsilonSequence, range: std::ops::Range<usize>) -> Option<f64> {
    log_slope(
        seq.values[range.clone()]
            .iter()
            .enumerate()
            .map(|(i, v)| (i + range.start, v))
            .filter(|(_, &v)| v > 0.0),
    )
    .map(f64::exp)
}

pub fn epsilon_sequence(sys: &SubstitutionSystem, z: &TorusPoint, n: usize) -> EpsilonSequence {
    let mt = sys.driver_transpose();
    epsilon_sequence_with(&mt, z, n)
}

/// The sequence for `omega^k`, iterating `(M^T)^k`.
pub fn epsilon_sequence_power(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    n: usize,
    k: u32,
) -> Result<EpsilonSequence, DeformationError> {
    if k == 0 {
        return Err(DeformationError::ZeroPower);
    }
    let mt = sys
        .driver_transpose()
        .checked_pow(k)
        .expect("driver power fits in i128");
    Ok(epsilon_sequence_with(&mt, z, n))
}

fn epsilon_sequence_with(mt: &IntMatrix, z: &TorusPoint, n: usize) -> EpsilonSequence {
    let mut values = Vec::with_capacity(n + 1);
    let mut point = z.clone();
    values.push(point.lattice_distance());
    for _ in 0..n {
        point = point.apply(mt);
        values.push(point.lattice_distance());
    }
    EpsilonSequence { values }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EigenVerdict {
    CandidateEigenvalue,
    /// `first_escape` is the first tail index with `eps_n >= tol`; `None`
    /// when the tail stays below `tol` but the fit does not decay.
    Rejected { first_escape: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenTest {
    pub verdict: EigenVerdict,
    pub min_tail_epsilon: f64,
    /// Slope of `ln eps_n` over the nonzero terms.
    pub slope: Option<f64>,
    pub sequence: EpsilonSequence,
}

impl EigenTest {
    pub fn is_candidate(&self) -> bool {
        self.verdict == EigenVerdict::CandidateEigenvalue
    }
}

/// Candidate iff `eps_n < tol` on the last third of `0..=N` and the
/// log-linear fit of the nonzero terms decays. Sequences that are zero
/// except for at most one term count as decaying.
pub fn eigenvalue_test(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    lam: &[f64],
    n: usize,
    tol: f64,
) -> Result<EigenTest, DeformationError> {
    shape.check(sys)?;
    if lam.len() != sys.d {
        return Err(DeformationError::FrequencyMismatch {
            got: lam.len(),
            d: sys.d,
        });
    }
    let sequence = epsilon_sequence(sys, &lift(shape, lam), n);
    let tail_start = n - n / 3;
    let tail = &sequence.values[tail_start..];
    let first_escape = tail.iter().position(|&x| x >= tol).map(|i| i + tail_start);
    let min_tail_epsilon = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let slope = sequence.log_slope();
    let decays = slope.is_none_or(|s| s < 0.0);
    let verdict = if first_escape.is_none() && decays {
        EigenVerdict::CandidateEigenvalue
    } else {
        EigenVerdict::Rejected { first_escape }
    };
    Ok(EigenTest {
        verdict,
        min_tail_epsilon,
        slope,
        sequence,
    })
}

/// Fraction of `n in 1..=N` with `eps_n(z) < rho`.
pub fn veech_statistic(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    n: usize,
    rho: f64,
) -> Result<f64, DeformationError> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(DeformationError::BadRho(rho));
    }
    Ok(epsilon_sequence(sys, z, n).fraction_below(rho))
}

/// `2 / (||M^T||_inf + 1)`.
pub fn rho_default(sys: &SubstitutionSystem) -> f64 {
    2.0 / (sys.driver_transpose().inf_norm() as f64 + 1.0)
}

/// Number of driver eigenvalues outside the unit circle and whether it
/// reaches `d + 1`.
pub fn expanding_dimension(sys: &SubstitutionSystem) -> Result<(usize, bool), DeformationError> {
    let mut count = 0;
    for z in eigenvalues(&sys.driver.to_f64()) {
        let m = z.norm();
        if (m - 1.0).abs() < UNIT_CIRCLE_BAND {
            return Err(DeformationError::Degenerate(m));
        }
        if m > 1.0 {
            count += 1;
        }
    }
    Ok((count, count > sys.d))
}

/// `count` shapes with entries perturbed uniformly within `+-radius`.
///
/// Sample `i` draws from stream `i` of a ChaCha8 generator seeded with
/// `seed`; samples whose best minor falls below `min_minor` are redrawn
/// from the same stream.
pub fn sample_deformations(
    base: &ShapeMatrix,
    radius: f64,
    count: usize,
    seed: u64,
    min_minor: f64,
) -> Result<Vec<ShapeMatrix>, DeformationError> {
    let mut out = Vec::with_capacity(count);
    let (mut attempts, mut rejected) = (0usize, 0usize);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        loop {
            attempts += 1;
            let entries = base.entries.map(|x| {
                if radius > 0.0 {
                    x + rng.random_range(-radius..=radius)
                } else {
                    x
                }
            });
            let shape = ShapeMatrix::new(entries, base.basis_label.clone());
            if shape.max_minor() >= min_minor {
                out.push(shape);
                break;
            }
            rejected += 1;
            if 2 * rejected > attempts.max(count) {
                return Err(DeformationError::RadiusTooLarge {
                    radius,
                    rejected,
                    attempts,
                });
            }
        }
    }
    Ok(out)
}

/// `count` frequencies with norm uniform in `[lo, hi]` and uniform direction.
pub fn sample_frequencies(d: usize, count: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let dir: Vec<f64> = loop {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 1e-3 && n <= 1.0 {
                    break v.iter().map(|x| x / n).collect();
                }
            };
            let r = rng.random_range(lo..=hi);
            dir.iter().map(|x| x * r).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CubicParams;
    use crate::models::{kenyon_system, square_system};

    fn kenyon(p: u32, q: u32, r: u32) -> SubstitutionSystem {
        kenyon_system(CubicParams::new(p, q, r).unwrap()).unwrap().system
    }

    #[test]
    fn rho_defaults() {
        assert_eq!(rho_default(&kenyon(1, 1, 1)), 0.5);
        assert_eq!(rho_default(&kenyon(1, 1, 4)), 2.0 / 7.0);
        assert_eq!(rho_default(&square_system().system), 2.0 / 7.0);
    }

    #[test]
    fn expanding_dimensions() {
        assert_eq!(expanding_dimension(&kenyon(1, 1, 4)).unwrap(), (3, true));
        assert_eq!(expanding_dimension(&kenyon(1, 1, 1)).unwrap(), (2, false));
        assert_eq!(expanding_dimension(&square_system().system).unwrap(), (3, true));
    }

    #[test]
    fn lift_of_integer_data_is_zero() {
        let shape = ShapeMatrix::from_rows(&[vec![1.0, -2.0, 3.0], vec![0.0, 4.0, 1.0]], "").unwrap();
        assert_eq!(lift(&shape, &[2.0, -1.0]), TorusPoint::zero(3));
        let k = kenyon(1, 1, 1);
        assert_eq!(lift(&k.default_shape, &[0.0, 0.0]), TorusPoint::zero(3));
    }

    #[test]
    fn zero_point_never_escapes() {
        let sys = kenyon(1, 1, 4);
        let seq = epsilon_sequence(&sys, &TorusPoint::zero(3), 50);
        assert!(seq.values.iter().all(|&x| x == 0.0));
        assert_eq!(veech_statistic(&sys, &TorusPoint::zero(3), 50, 0.2).unwrap(), 1.0);
    }

    #[test]
    fn rho_is_validated() {
        let sys = kenyon(1, 1, 4);
        let z = TorusPoint::zero(3);
        assert_eq!(veech_statistic(&sys, &z, 5, 0.5), Err(DeformationError::BadRho(0.5)));
        assert_eq!(veech_statistic(&sys, &z, 5, 0.0), Err(DeformationError::BadRho(0.0)));
    }

    #[test]
    fn zero_frequency_is_candidate() {
        let sys = kenyon(1, 1, 4);
        let t = eigenvalue_test(&sys, &sys.default_shape, &[0.0, 0.0], 60, 1e-3).unwrap();
        assert!(t.is_candidate());
    }

    #[test]
    fn square_horizontal_integer_frequency() {
        let sys = square_system().system;
        let t = eigenvalue_test(&sys, &sys.default_shape, &[1.0, 0.0], 60, 1e-3).unwrap();
        assert!(t.is_candidate());
        assert!(t.sequence.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_radius_copies_base() {
        let base = kenyon(1, 1, 4).default_shape;
        let samples = sample_deformations(&base, 0.0, 4, 1, DEFAULT_MIN_MINOR).unwrap();
        assert!(samples.iter().all(|s| *s == base));
    }

    #[test]
    fn huge_radius_on_degenerate_base_fails() {
        let base = ShapeMatrix::from_rows(&[vec![0.0; 3], vec![0.0; 3]], "").unwrap();
        let err = sample_deformations(&base, 1e-9, 10, 1, 1e-3).unwrap_err();
        assert!(matches!(err, DeformationError::RadiusTooLarge { .. }));
    }

    #[test]
    fn shape_json_forms() {
        let plain: ShapeMatrix = serde_json::from_str("[[1.0,2.0],[3.0,4.5]]").unwrap();
        assert_eq!(plain.entries[(1, 1)], 4.5);
        let labeled = ShapeMatrix::new(plain.entries.clone(), "a, b");
        let text = serde_json::to_string(&labeled).unwrap();
        assert!(text.contains("basisLabel"));
        assert_eq!(serde_json::from_str::<ShapeMatrix>(&text).unwrap(), labeled);
    }
}
