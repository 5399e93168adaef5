//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use num_complex::Complex64;

/// Roots of a monic polynomial (`coeffs[0]` is the constant term) by
/// Durand-Kerner iteration.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let radius = 1.0 + coeffs[..deg].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut moved = 0.0_f64;
        for i in 0..deg {
            let denom: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| roots[i] - roots[j])
                .product();
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    // polish with Newton on the original polynomial
    let deriv: Vec<f64> = (1..=deg).map(|k| k as f64 * coeffs[k]).collect();
    let eval_d = |z: Complex64| deriv.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let d = eval_d(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    roots
}

/// Roots of `z^3 - p z^2 + q z + r`.
pub fn cubic_roots(p: u32, q: u32, r: u32) -> Vec<Complex64> {
    polynomial_roots(&[r as f64, q as f64, -(p as f64), 1.0])
}

/// Exact characteristic polynomial of a 3x3 integer matrix, constant term
/// first, by cofactor expansion.
pub fn charpoly3(a: &[[i128; 3]; 3]) -> [i128; 4] {
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    [-det, minors, -trace, 1]
}

/// `exp(-2 pi i t)`, written out independently of the library.
pub fn ex(t: f64) -> Complex64 {
    let a = -2.0 * std::f64::consts::PI * t;
    Complex64::new(a.cos(), a.sin())
}

/// Dense complex matrix product on row vectors.
pub fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}
