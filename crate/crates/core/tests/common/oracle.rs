//! Reference implementations that share no code with the crate: adaptive
//! Simpson quadrature for distribution tails, a sums-of-squares ANOVA, and a
//! least-squares fit through nalgebra.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        left + right + diff / 15.0
    } else {
        adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// ∫ₐᵇ f by adaptive Simpson.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let f: &dyn Fn(f64) -> f64 = &f;
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adapt(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Two-sided Student-t tail. Substituting u = √ν·tanθ turns the density into
/// cos^(ν−1)θ on [0, π/2].
pub fn t_two_sided(t: f64, nu: f64) -> f64 {
    let g = |th: f64| th.cos().powf(nu - 1.0);
    let theta = (t.abs() / nu.sqrt()).atan();
    let total = integrate(g, 0.0, FRAC_PI_2, 1e-14);
    integrate(g, theta, FRAC_PI_2, 1e-14) / total
}

/// I_x(a, b) for a, b ≥ ½ via w = sin²φ, which makes the integrand
/// 2·sin^(2a−1)φ·cos^(2b−1)φ, bounded on [0, π/2].
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    assert!(a >= 0.5 && b >= 0.5, "oracle needs a, b ≥ 1/2");
    let g = |phi: f64| 2.0 * phi.sin().powf(2.0 * a - 1.0) * phi.cos().powf(2.0 * b - 1.0);
    let upper = x.sqrt().asin();
    let total = integrate(g, 0.0, FRAC_PI_2, 1e-14);
    integrate(g, 0.0, upper, 1e-14) / total
}

/// Upper tail of F(d1, d2).
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pooled two-sample t statistic, written out directly.
pub fn pooled_t(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(xs), mean(ys));
    let ss = xs.iter().map(|v| (v - mx).powi(2)).sum::<f64>() + ys.iter().map(|v| (v - my).powi(2)).sum::<f64>();
    let dof = (xs.len() + ys.len() - 2) as f64;
    let se = (ss / dof * (1.0 / xs.len() as f64 + 1.0 / ys.len() as f64)).sqrt();
    ((mx - my) / se, dof)
}

/// Balanced two-way ANOVA interaction test from the classical sums of squares.
/// Cells are ordered (reference, x, y, both). Returns (F, df_den, p).
pub fn ss_anova(cells: [&[f64]; 4]) -> (f64, f64, f64) {
    let n = cells[0].len() as f64;
    let m: Vec<f64> = cells.iter().map(|c| mean(c)).collect();
    let grand = m.iter().sum::<f64>() / 4.0;
    // Factor A: i_x (cells 1 and 3 on), factor B: i_y (cells 2 and 3 on).
    let a = [(m[0] + m[2]) / 2.0, (m[1] + m[3]) / 2.0];
    let b = [(m[0] + m[1]) / 2.0, (m[2] + m[3]) / 2.0];
    let idx = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let ss_ab: f64 = idx
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| n * (m[k] - a[i] - b[j] + grand).powi(2))
        .sum();
    let ss_e: f64 = cells
        .iter()
        .zip(&m)
        .map(|(c, mu)| c.iter().map(|v| (v - mu).powi(2)).sum::<f64>())
        .sum();
    let df = 4.0 * (n - 1.0);
    let f = ss_ab / (ss_e / df);
    (f, df, f_sf(f, 1.0, df))
}

/// OLS on rows (1, i_x, i_y, i_x·i_y) through nalgebra's SVD, plus the t
/// statistic of β₃ and its residual degrees of freedom.
pub fn ols_2x2(cells: [&[f64]; 4]) -> ([f64; 4], f64, f64) {
    let ind = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for (c, &(ix, iy)) in cells.iter().zip(&ind) {
        for &v in c.iter() {
            rows.extend_from_slice(&[1.0, ix, iy, ix * iy]);
            ys.push(v);
        }
    }
    let n = ys.len();
    let x = DMatrix::from_row_slice(n, 4, &rows);
    let y = DVector::from_vec(ys);
    let beta = x.clone().svd(true, true).solve(&y, 1e-15).expect("svd solve");
    let resid = &y - &x * &beta;
    let dof = (n - 4) as f64;
    let mse = resid.norm_squared() / dof;
    let xtx_inv = (x.transpose() * &x).try_inverse().expect("full rank");
    let t3 = beta[3] / (mse * xtx_inv[(3, 3)]).sqrt();
    ([beta[0], beta[1], beta[2], beta[3]], t3, dof)
}
