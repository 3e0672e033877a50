//! Shared test support: an independent quadrature oracle and frozen
//! reference values.
//!
//! The oracle quadrature here is deliberately separate from the library's
//! internal integration routines: a plain adaptive Simpson rule, so that
//! agreement between the two is evidence rather than tautology.

#![allow(dead_code)]

pub mod reference;

/// Adaptive Simpson integration, absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson_panel<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, ml, fml) = simpson_panel(f, a, fa, m, fm);
        let (right, mr, fmr) = simpson_panel(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth >= 40 {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, left, ml, fml, 0.5 * tol, depth + 1)
            + rec(f, m, fm, b, fb, right, mr, fmr, 0.5 * tol, depth + 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson_panel(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 0)
}

/// Oracle for F(φ;k) by direct adaptive quadrature of the defining integral.
pub fn oracle_incomplete_f(phi: f64, k: f64) -> f64 {
    simpson(&|t: f64| 1.0 / (1.0 - (k * t.sin()).powi(2)).sqrt(), 0.0, phi, 1e-13)
}

/// Oracle for E(φ;k) by direct adaptive quadrature.
pub fn oracle_incomplete_e(phi: f64, k: f64) -> f64 {
    simpson(&|t: f64| (1.0 - (k * t.sin()).powi(2)).sqrt(), 0.0, phi, 1e-13)
}

/// Trapezoid sum over one period for smooth 2π-periodic integrands
/// (spectrally accurate).
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: &F, n: usize) -> f64 {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    (0..n).map(|j| f(j as f64 * h)).sum::<f64>() * h
}

/// Least-squares line y = intercept + slope·x; returns (slope, intercept, r²).
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, intercept, r2)
}
