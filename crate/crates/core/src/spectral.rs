//! Twisted integrals over supertiles and boxes, and the local-dimension
//! lower bounds they feed.
//!
//! For a level-`n` supertile of type `j`,
//! `sum_{tiles (k,a)} e(<lam, L a>) psi_k^(lam) = [M(z, n) Psi^(lam)](j)` with
//! `z = L^T lam`. The left side is the brute-force oracle, the right side the
//! fast evaluation through the cocycle.

use nalgebra::DVector;
use num_complex::Complex64;
use thiserror::Error;

use crate::cocycle::{e, fourier_matrix, phase, TorusPoint};
use crate::deformation::{lift, ShapeMatrix};
use crate::geometry::{prototile_polygons, Bbox, GeometryError, RealizedPatch, SupertileHierarchy};
use crate::linalg::IntMatrix;
use crate::substitution::{pf_data, SubstitutionError, SubstitutionSystem};

/// Deepest supertile the brute-force oracle will enumerate.
pub const MAX_BRUTEFORCE_LEVEL: usize = 12;
/// Products up to this length are evaluated without renormalization.
const RAW_PRODUCT_STEPS: usize = 20;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("brute force is limited to n <= {max}, got {n}")]
    TooDeep { n: usize, max: usize },
    #[error("patch covers {covered:.6} of the {needed:.6} area of the box of half-width {half_width}")]
    BoxTooLarge {
        half_width: f64,
        covered: f64,
        needed: f64,
    },
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Fourier transforms `psi_k^(lam)` of per-prototile test functions.
pub trait TestFunction: Sync {
    fn psi_hat(&self, kind: usize, lam: &[f64]) -> Complex64;

    fn description(&self) -> String;

    fn vector(&self, m: usize, lam: &[f64]) -> DVector<Complex64> {
        DVector::from_fn(m, |k, _| self.psi_hat(k, lam))
    }
}

/// Frequency-independent values; `Constant(vec![0; m])` is the zero function.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantPsi(pub Vec<Complex64>);

impl TestFunction for ConstantPsi {
    fn psi_hat(&self, kind: usize, _lam: &[f64]) -> Complex64 {
        self.0[kind]
    }

    fn description(&self) -> String {
        let values: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        format!("constant [{}]", values.join(", "))
    }
}

/// `(1 - e(a)) / (2 pi i a) = e^{-pi i a} sin(pi a) / (pi a)`.
fn interval_transform(a: f64) -> Complex64 {
    if a.abs() < 1e-12 {
        return Complex64::new(1.0, 0.0);
    }
    let x = std::f64::consts::PI * a;
    Complex64::from_polar(x.sin() / x, -x)
}

/// Indicators of the prototile parallelograms `{s u + t v : s, t in [0,1]}`,
/// with `psi^(lam) = |det(u, v)| g(<lam, u>) g(<lam, v>)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelogramIndicators {
    pub edges: Vec<([f64; 2], [f64; 2])>,
}

impl ParallelogramIndicators {
    pub fn new(sys: &SubstitutionSystem, shape: &ShapeMatrix) -> Result<Self, GeometryError> {
        let polys = prototile_polygons(sys, shape)?;
        Ok(ParallelogramIndicators {
            edges: polys
                .iter()
                .map(|p| {
                    let [o, u, _, v] = [p.vertices[0], p.vertices[1], p.vertices[2], p.vertices[3]];
                    ([u[0] - o[0], u[1] - o[1]], [v[0] - o[0], v[1] - o[1]])
                })
                .collect(),
        })
    }

    pub fn areas(&self) -> Vec<f64> {
        self.edges
            .iter()
            .map(|(u, v)| (u[0] * v[1] - u[1] * v[0]).abs())
            .collect()
    }
}

impl TestFunction for ParallelogramIndicators {
    fn psi_hat(&self, kind: usize, lam: &[f64]) -> Complex64 {
        let (u, v) = self.edges[kind];
        let det = (u[0] * v[1] - u[1] * v[0]).abs();
        let lu = lam[0] * u[0] + lam[1] * u[1];
        let lv = lam[0] * v[0] + lam[1] * v[1];
        interval_transform(lu) * interval_transform(lv) * det
    }

    fn description(&self) -> String {
        "prototile indicators".into()
    }
}

/// `c_k` times the indicator of prototile `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedIndicators {
    pub base: ParallelogramIndicators,
    pub weights: Vec<f64>,
}

impl WeightedIndicators {
    /// Weights with `sum_k freq_k c_k area_k = 0`: the indicator vector at
    /// `lam = 0` with its component along the frequency vector removed.
    pub fn mean_zero(sys: &SubstitutionSystem, shape: &ShapeMatrix) -> Result<Self, SpectralError> {
        let base = ParallelogramIndicators::new(sys, shape)?;
        let freq = pf_data(&sys.substitution_matrix())?.right;
        let areas = base.areas();
        let fa: f64 = freq.iter().zip(&areas).map(|(f, a)| f * a).sum();
        let ff: f64 = freq.iter().map(|f| f * f).sum();
        let weights = areas
            .iter()
            .zip(&freq)
            .map(|(a, f)| (a - fa / ff * f) / a)
            .collect();
        Ok(WeightedIndicators { base, weights })
    }
}

impl TestFunction for WeightedIndicators {
    fn psi_hat(&self, kind: usize, lam: &[f64]) -> Complex64 {
        self.base.psi_hat(kind, lam) * self.weights[kind]
    }

    fn description(&self) -> String {
        format!("weighted prototile indicators {:?}", self.weights)
    }
}

/// `[M(z, l) Psi^]` for `l = 0..=n`, one vector per level.
fn level_vectors(
    sys: &SubstitutionSystem,
    z: &TorusPoint,
    n: usize,
    psi: &DVector<Complex64>,
) -> Vec<DVector<Complex64>> {
    let orbit = z.orbit_exact(&sys.driver_transpose(), n);
    let mut out = Vec::with_capacity(n + 1);
    out.push(psi.clone());
    let mut v = psi.clone();
    let mut log_scale = 0.0_f64;
    for (l, point) in orbit.iter().enumerate() {
        v = fourier_matrix(sys, point) * v;
        if l >= RAW_PRODUCT_STEPS {
            let size = v.norm();
            if size > 0.0 {
                v /= Complex64::new(size, 0.0);
                log_scale += size.ln();
            }
        }
        out.push(v.map(|c| c * log_scale.exp()));
    }
    out
}

/// Fast evaluation `[M(z, n) Psi^(lam)](j)`, `z = lift(shape, lam)`.
pub fn twisted_supertile_integral(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    lam: &[f64],
    j: usize,
    n: usize,
    psi: &dyn TestFunction,
) -> Complex64 {
    let z = lift(shape, lam);
    let v = psi.vector(sys.m, lam);
    level_vectors(sys, &z, n, &v)[n][j]
}

/// Direct sum over the tiles of `omega^n(T_j)`.
pub fn twisted_supertile_bruteforce(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    lam: &[f64],
    j: usize,
    n: usize,
    psi: &dyn TestFunction,
) -> Result<Complex64, SpectralError> {
    if n > MAX_BRUTEFORCE_LEVEL {
        return Err(SpectralError::TooDeep {
            n,
            max: MAX_BRUTEFORCE_LEVEL,
        });
    }
    let z = lift(shape, lam);
    let psi = psi.vector(sys.m, lam);
    let patch = sys.expand_supertile(j, n)?;
    Ok(patch
        .tiles
        .iter()
        .map(|t| e(phase(z.coords(), &t.addr)) * psi[t.kind])
        .sum())
}

/// The integral over the supertile translated by `y`.
pub fn translated_supertile_integral(
    sys: &SubstitutionSystem,
    shape: &ShapeMatrix,
    lam: &[f64],
    j: usize,
    n: usize,
    y: &[f64],
    psi: &dyn TestFunction,
) -> Complex64 {
    let t: f64 = lam.iter().zip(y).map(|(a, b)| a * b).sum();
    e(t) * twisted_supertile_integral(sys, shape, lam, j, n, psi)
}

/// Greedy decomposition of the box `center + [-R, R]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDecomposition {
    pub bbox: Bbox,
    pub half_width: f64,
    /// `counts[i][j]`: level-`i` supertiles of type `j` inside the box.
    pub counts: Vec<Vec<u64>>,
    /// Hierarchy nodes of the chosen supertiles.
    pub supertiles: Vec<usize>,
    /// Tiles meeting the box but not inside it.
    pub leftover: Vec<usize>,
}

impl BoxDecomposition {
    pub fn per_level(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    /// `max_i sum_j counts[i][j] / (R^{d-1} theta^{i(1-d)})`.
    pub fn bound_constant(&self, d: usize, theta: f64) -> f64 {
        let df = d as f64;
        self.per_level()
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 / (self.half_width.powf(df - 1.0) * theta.powf(i as f64 * (1.0 - df))))
            .fold(0.0, f64::max)
    }
}

/// Takes every maximal supertile inside the box, top-down; tiles that only
/// meet the box are returned as leftovers.
pub fn box_decomposition(
    realized: &RealizedPatch,
    hierarchy: &SupertileHierarchy,
    center: [f64; 2],
    half_width: f64,
) -> Result<BoxDecomposition, SpectralError> {
    let bbox = Bbox::square(center, half_width);
    let covered: f64 = realized.tiles.iter().map(|t| t.polygon.clip(&bbox).area()).sum();
    let needed = bbox.area();
    if covered < needed * (1.0 - 1e-9) {
        return Err(SpectralError::BoxTooLarge {
            half_width,
            covered,
            needed,
        });
    }
    let top = hierarchy.node(hierarchy.root).level;
    let m = hierarchy.nodes.iter().map(|n| n.kind).max().unwrap_or(0) + 1;
    let mut dec = BoxDecomposition {
        bbox,
        half_width,
        counts: vec![vec![0; m]; top + 1],
        supertiles: Vec::new(),
        leftover: Vec::new(),
    };
    let mut stack = vec![hierarchy.root];
    while let Some(i) = stack.pop() {
        let node = hierarchy.node(i);
        if !node.bbox.overlaps(&bbox, 0.0) {
            continue;
        }
        if bbox.contains_box(&node.bbox, 1e-12) {
            dec.counts[node.level][node.kind] += 1;
            dec.supertiles.push(i);
        } else if node.level == 0 {
            if realized.tiles[node.range.start].polygon.clip(&bbox).area() > 0.0 {
                dec.leftover.push(node.range.start);
            }
        } else {
            stack.extend(node.children.iter().rev());
        }
    }
    dec.supertiles.sort_unstable();
    dec.leftover.sort_unstable();
    Ok(dec)
}

/// Sum of the translated supertile integrals and the leftover tile terms.
pub fn twisted_box_integral(
    sys: &SubstitutionSystem,
    realized: &RealizedPatch,
    hierarchy: &SupertileHierarchy,
    dec: &BoxDecomposition,
    lam: &[f64],
    psi: &dyn TestFunction,
) -> Complex64 {
    let z = lift(&realized.shape, lam);
    let psi_vec = psi.vector(sys.m, lam);
    let top = dec.counts.len().saturating_sub(1);
    let levels = level_vectors(sys, &z, top, &psi_vec);
    let supertiles: Complex64 = dec
        .supertiles
        .iter()
        .map(|&i| {
            let node = hierarchy.node(i);
            e(phase(z.coords(), &node.addr)) * levels[node.level][node.kind]
        })
        .sum();
    let leftover: Complex64 = dec
        .leftover
        .iter()
        .map(|&i| {
            let t = &realized.tiles[i];
            e(phase(z.coords(), &t.addr)) * psi_vec[t.kind]
        })
        .sum();
    supertiles + leftover
}

/// Direct sum over every tile meeting the box.
pub fn twisted_box_bruteforce(
    sys: &SubstitutionSystem,
    realized: &RealizedPatch,
    bbox: &Bbox,
    lam: &[f64],
    psi: &dyn TestFunction,
) -> Complex64 {
    let z = lift(&realized.shape, lam);
    let psi_vec = psi.vector(sys.m, lam);
    realized
        .tiles
        .iter()
        .filter(|t| t.polygon.clip(bbox).area() > 0.0)
        .map(|t| e(phase(z.coords(), &t.addr)) * psi_vec[t.kind])
        .sum()
}

/// `2 min{d - chi / log theta, 1}`, clamped below at 0.
pub fn dim_lower_bound(chi_plus: f64, d: usize, theta: f64) -> f64 {
    assert!(theta > 1.0, "expansion factor must exceed 1");
    (2.0 * (d as f64 - chi_plus / theta.ln()).min(1.0)).max(0.0)
}

/// The bound at `lam = 0`, driven by the second eigenvalue of `S`.
pub fn dim_lower_bound_zero(s: &IntMatrix, d: usize, theta: f64) -> Result<f64, SpectralError> {
    let pf = pf_data(s)?;
    Ok(dim_lower_bound(pf.second_modulus.ln(), d, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CubicParams;
    use crate::models::{kenyon_system, square_system};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn level_zero_is_psi() {
        let sys = kenyon_system(CubicParams::new(1, 1, 1).unwrap()).unwrap().system;
        let psi = ParallelogramIndicators::new(&sys, &sys.default_shape).unwrap();
        let lam = [0.3, -0.7];
        for j in 0..3 {
            let fast = twisted_supertile_integral(&sys, &sys.default_shape, &lam, j, 0, &psi);
            assert!((fast - psi.psi_hat(j, &lam)).norm() < 1e-15);
        }
    }

    #[test]
    fn square_count_at_zero() {
        let sys = square_system().system;
        let ones = ConstantPsi(vec![c(1.0); 3]);
        let brute = twisted_supertile_bruteforce(&sys, &sys.default_shape, &[0.0, 0.0], 2, 1, &ones).unwrap();
        assert_eq!(brute, c(36.0));
    }

    #[test]
    fn indicator_transform_at_zero_is_area() {
        let sys = square_system().system;
        let psi = ParallelogramIndicators::new(&sys, &sys.default_shape).unwrap();
        assert_eq!(psi.psi_hat(0, &[0.0, 0.0]), c(1.0));
        // integer frequency along an edge kills the unit square's transform
        assert!(psi.psi_hat(2, &[1.0, 0.0]).norm() < 1e-15);
    }

    #[test]
    fn mean_zero_weights_are_orthogonal_to_frequencies() {
        let sys = kenyon_system(CubicParams::new(1, 1, 4).unwrap()).unwrap().system;
        let psi = WeightedIndicators::mean_zero(&sys, &sys.default_shape).unwrap();
        let freq = pf_data(&sys.substitution_matrix()).unwrap().right;
        let dot: Complex64 = (0..3).map(|k| psi.psi_hat(k, &[0.0, 0.0]) * freq[k]).sum();
        assert!(dot.norm() < 1e-12);
    }

    #[test]
    fn bound_formula() {
        assert_eq!(dim_lower_bound(2.0 * 3f64.ln(), 2, 3.0), 0.0);
        assert_eq!(dim_lower_bound(0.5 * 3f64.ln(), 2, 3.0), 2.0);
        assert_eq!(dim_lower_bound(10.0, 2, 3.0), 0.0);
    }

    #[test]
    fn too_deep_rejected() {
        let sys = square_system().system;
        let ones = ConstantPsi(vec![c(1.0); 3]);
        assert!(matches!(
            twisted_supertile_bruteforce(&sys, &sys.default_shape, &[0.0, 0.0], 0, 13, &ones),
            Err(SpectralError::TooDeep { .. })
        ));
    }
}
