//! Elliptic integrals and Jacobi elliptic functions.
//!
//! Real evaluation of K(k), F(φ;k), E(φ;k), am(u;k), sn, cn, plus the
//! complex-strip evaluation of h_k(z) = 1 - k² sin² z and 1/√h_k used by the
//! dynamical modes. Complete and incomplete integrals go through Carlson
//! symmetric forms; the amplitude inverts F by safeguarded Newton after
//! argument reduction modulo 2K.

use num_complex::Complex64;
use thiserror::Error;

/// Point in the complex plane, z = re + i·im.
pub type ComplexPoint = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFunctionError {
    #[error("modulus must satisfy 0 <= k < 1, got {0}")]
    InvalidModulus(f64),
    #[error("point with |Im z| = {im_abs} lies outside the analyticity strip |Im z| < {rho}")]
    OutsideStrip { im_abs: f64, rho: f64 },
}

/// Elliptic modulus k with 0 ≤ k < 1.
///
/// The complementary modulus k′ = √(1-k²) is computed on demand; k=0 is a
/// valid degeneration and downstream evaluators short-circuit it to
/// trigonometric formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self, SpecialFunctionError> {
        if !(0.0..1.0).contains(&k) || !k.is_finite() {
            return Err(SpecialFunctionError::InvalidModulus(k));
        }
        Ok(Modulus { k })
    }

    pub const ZERO: Modulus = Modulus { k: 0.0 };

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_sq(&self) -> f64 {
        self.k * self.k
    }

    /// Complementary modulus k′ = √(1-k²).
    pub fn k_prime(&self) -> f64 {
        // (1-k)(1+k) avoids cancellation as k -> 1
        ((1.0 - self.k) * (1.0 + self.k)).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.k == 0.0
    }
}

/// Carlson symmetric integral R_F(x,y,z), x,y,z ≥ 0 with at most one zero.
///
/// Duplication shrinks the spread by 4 per step; the degree-5 tail of the
/// Taylor series leaves a relative error ~ ERRTOL⁶ ≈ 1e-18.
fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 1e-3;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut ave;
    let (mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / ave.sqrt()
}

/// Carlson symmetric integral R_D(x,y,z) = R_J(x,y,z,z), z > 0.
fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 1e-3;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut ave;
    let (mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (zt + lam));
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = 0.2 * (xt + yt + 3.0 * zt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac
            * (1.0
                + ed * (-3.0 / 14.0 + 0.25 * (9.0 / 22.0) * ed - 1.5 * (3.0 / 26.0) * dz * ee)
                + dz * (ee / 6.0 + dz * (-(9.0 / 22.0) * ec + dz * (3.0 / 26.0) * ea)))
            / (ave * ave.sqrt())
}

/// Complete elliptic integral of the first kind, K(k) = F(π/2; k).
pub fn complete_k(m: Modulus) -> f64 {
    if m.is_zero() {
        return std::f64::consts::FRAC_PI_2;
    }
    carlson_rf(0.0, m.k_prime() * m.k_prime(), 1.0)
}

/// Complete elliptic integral of the second kind, E(k) = E(π/2; k).
pub fn complete_e(m: Modulus) -> f64 {
    if m.is_zero() {
        return std::f64::consts::FRAC_PI_2;
    }
    let kp2 = m.k_prime() * m.k_prime();
    carlson_rf(0.0, kp2, 1.0) - (m.k_sq() / 3.0) * carlson_rd(0.0, kp2, 1.0)
}

/// F on the principal interval φ ∈ [-π/2, π/2].
fn incomplete_f_principal(phi: f64, m: Modulus) -> f64 {
    let s = phi.sin();
    let c2 = phi.cos() * phi.cos();
    s * carlson_rf(c2, 1.0 - m.k_sq() * s * s, 1.0)
}

/// Incomplete elliptic integral of the first kind,
/// F(φ;k) = ∫₀^φ (1-k² sin²τ)^{-1/2} dτ, any real φ.
///
/// Reduced by the quasi-periodicity F(φ+nπ) = F(φ) + 2nK before the Carlson
/// evaluation so large arguments do not accumulate drift.
pub fn incomplete_f(phi: f64, m: Modulus) -> f64 {
    if m.is_zero() {
        return phi;
    }
    let n = (phi / std::f64::consts::PI).round();
    let phi_r = phi - n * std::f64::consts::PI;
    let base = if n == 0.0 {
        0.0
    } else {
        2.0 * n * complete_k(m)
    };
    base + incomplete_f_principal(phi_r, m)
}

/// Incomplete elliptic integral of the second kind,
/// E(φ;k) = ∫₀^φ √(1-k² sin²τ) dτ, any real φ.
pub fn incomplete_e(phi: f64, m: Modulus) -> f64 {
    if m.is_zero() {
        return phi;
    }
    let n = (phi / std::f64::consts::PI).round();
    let phi_r = phi - n * std::f64::consts::PI;
    let s = phi_r.sin();
    let c2 = phi_r.cos() * phi_r.cos();
    let q = 1.0 - m.k_sq() * s * s;
    let principal = s * carlson_rf(c2, q, 1.0) - (m.k_sq() / 3.0) * s * s * s * carlson_rd(c2, q, 1.0);
    if n == 0.0 {
        principal
    } else {
        2.0 * n * complete_e(m) + principal
    }
}

/// Jacobi amplitude am(u;k): the inverse of φ ↦ F(φ;k).
///
/// Argument is reduced modulo 2K (one period of the shifted amplitude),
/// then F(φ) = u_r is solved on [-π/2, π/2] by Newton with the exact
/// derivative dF/dφ = (1-k² sin²φ)^{-1/2} and a bisection safeguard.
pub fn jacobi_am(u: f64, m: Modulus) -> f64 {
    if m.is_zero() {
        return u;
    }
    let big_k = complete_k(m);
    let n = (u / (2.0 * big_k)).round();
    let ur = u - 2.0 * n * big_k;
    // ur ∈ [-K, K] up to roundoff; clamp the target into the solvable range
    let ur = ur.clamp(-big_k, big_k);
    let phi = if ur == big_k {
        std::f64::consts::FRAC_PI_2
    } else if ur == -big_k {
        -std::f64::consts::FRAC_PI_2
    } else {
        crate::numerics::newton_bisect(
            &|phi: f64| {
                let s = phi.sin();
                let f = incomplete_f_principal(phi, m) - ur;
                let df = 1.0 / (1.0 - m.k_sq() * s * s).sqrt();
                (f, df)
            },
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
            1e-15,
            60,
        )
    };
    n * std::f64::consts::PI + phi
}

/// Jacobi sn(u;k) = sin(am(u;k)).
pub fn jacobi_sn(u: f64, m: Modulus) -> f64 {
    jacobi_am(u, m).sin()
}

/// Jacobi cn(u;k) = cos(am(u;k)).
pub fn jacobi_cn(u: f64, m: Modulus) -> f64 {
    jacobi_am(u, m).cos()
}

/// h_k(z) = 1 - k² sin² z for complex z = x + iy, via the real expansion
/// sin²(x+iy) = sin²x cosh²y - cos²x sinh²y + (i/2) sin 2x sinh 2y.
///
/// Zeros sit exactly at z = (π/2 + nπ) ± i·arcosh(1/k).
pub fn h_k(z: ComplexPoint, m: Modulus) -> ComplexPoint {
    let (x, y) = (z.re, z.im);
    let (sx, cx) = x.sin_cos();
    let (shy, chy) = (y.sinh(), y.cosh());
    let re_sin2 = sx * sx * chy * chy - cx * cx * shy * shy;
    let im_sin2 = 0.5 * (2.0 * x).sin() * (2.0 * y).sinh();
    ComplexPoint::new(1.0 - m.k_sq() * re_sin2, -m.k_sq() * im_sin2)
}

/// 1/√(h_k(z)) on the analyticity strip |Im z| < ρ_k, branch fixed by
/// continuity from the positive real axis (where h_k > 0).
///
/// Inside the strip h_k omits the half-line (-∞, 0], so the principal
/// square root is the continuous branch.
pub fn inv_sqrt_h(z: ComplexPoint, m: Modulus) -> Result<ComplexPoint, SpecialFunctionError> {
    let rho = rho_of_modulus(m);
    if z.im.abs() >= rho {
        return Err(SpecialFunctionError::OutsideStrip {
            im_abs: z.im.abs(),
            rho,
        });
    }
    Ok(ComplexPoint::new(1.0, 0.0) / h_k(z, m).sqrt())
}

/// Strip half-width ρ_k = arcosh(1/k); infinity for k = 0.
pub fn rho_of_modulus(m: Modulus) -> f64 {
    if m.is_zero() {
        return f64::INFINITY;
    }
    (1.0 / m.k()).acosh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(k: f64) -> Modulus {
        Modulus::new(k).unwrap()
    }

    #[test]
    fn modulus_rejects_out_of_range() {
        assert!(Modulus::new(1.0).is_err());
        assert!(Modulus::new(-0.2).is_err());
        assert!(Modulus::new(f64::NAN).is_err());
        assert!(Modulus::new(0.0).is_ok());
        assert!(Modulus::new(0.999).is_ok());
    }

    #[test]
    fn complementary_modulus_identity() {
        for k in [0.0, 0.1, 0.5, 0.9, 0.9999] {
            let md = m(k);
            let s = md.k_sq() + md.k_prime() * md.k_prime();
            assert!((s - 1.0).abs() < 1e-15, "k={k}: {s}");
        }
    }

    #[test]
    fn complete_k_at_zero_is_half_pi() {
        assert_eq!(complete_k(Modulus::ZERO), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn complete_k_equals_f_at_half_pi() {
        for k in [0.2, 0.5, 0.77, 0.95] {
            let md = m(k);
            let diff = complete_k(md) - incomplete_f(std::f64::consts::FRAC_PI_2, md);
            assert!(diff.abs() < 1e-14, "k={k}: {diff}");
        }
    }

    #[test]
    fn f_is_odd_and_zero_at_zero() {
        let md = m(0.6);
        assert_eq!(incomplete_f(0.0, md), 0.0);
        for phi in [0.3, 1.2, 2.9] {
            let d = incomplete_f(phi, md) + incomplete_f(-phi, md);
            assert!(d.abs() < 1e-13);
        }
    }

    #[test]
    fn f_quasi_periodicity() {
        let md = m(0.7);
        let two_k = 2.0 * complete_k(md);
        for phi in [-1.0, 0.0, 0.4, 1.5, 2.0] {
            let lhs = incomplete_f(phi + std::f64::consts::PI, md);
            let rhs = incomplete_f(phi, md) + two_k;
            assert!((lhs - rhs).abs() < 1e-12, "phi={phi}");
        }
    }

    #[test]
    fn am_of_zero_modulus_is_identity() {
        for u in [-3.0, 0.0, 0.5, 7.7] {
            assert_eq!(jacobi_am(u, Modulus::ZERO), u);
        }
    }

    #[test]
    fn am_shift_by_two_k() {
        let md = m(0.6);
        let two_k = 2.0 * complete_k(md);
        for u in [-1.0, 0.0, 0.3, 2.2] {
            let d = jacobi_am(u + two_k, md) - jacobi_am(u, md) - std::f64::consts::PI;
            assert!(d.abs() < 1e-12, "u={u}: {d}");
        }
    }

    #[test]
    fn am_at_exact_k_multiples() {
        // reduction boundary: u = K lands exactly on φ = π/2
        let md = m(0.8);
        let big_k = complete_k(md);
        assert!((jacobi_am(big_k, md) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((jacobi_am(-big_k, md) + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((jacobi_am(2.0 * big_k, md) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn sn_cn_basic_values() {
        let md = m(0.4);
        assert_eq!(jacobi_sn(0.0, md), 0.0);
        assert_eq!(jacobi_cn(0.0, md), 1.0);
        let big_k = complete_k(md);
        assert!((jacobi_sn(big_k, md) - 1.0).abs() < 1e-10);
        assert!(jacobi_cn(big_k, md).abs() < 1e-10);
    }

    #[test]
    fn sn_cn_period_four_k() {
        let md = m(0.4);
        let four_k = 4.0 * complete_k(md);
        for u in [0.3, 1.0, 2.5] {
            assert!((jacobi_sn(u + four_k, md) - jacobi_sn(u, md)).abs() < 1e-10);
            assert!((jacobi_cn(u + four_k, md) - jacobi_cn(u, md)).abs() < 1e-10);
        }
    }

    #[test]
    fn h_k_real_axis_and_zero() {
        let md = m(0.5);
        let at0 = h_k(ComplexPoint::new(0.0, 0.0), md);
        assert_eq!(at0, ComplexPoint::new(1.0, 0.0));
        let at_half_pi = h_k(ComplexPoint::new(std::f64::consts::FRAC_PI_2, 0.0), md);
        assert!((at_half_pi.re - 0.75).abs() < 1e-15);
        assert_eq!(at_half_pi.im, 0.0);
        // zero of h_k at π/2 + i arcosh(2)
        let z = ComplexPoint::new(std::f64::consts::FRAC_PI_2, 2.0_f64.acosh());
        assert!(h_k(z, md).norm() < 1e-10);
    }

    #[test]
    fn h_k_no_zero_inside_strip() {
        let md = m(0.5);
        let rho = rho_of_modulus(md);
        let mut min_mod = f64::INFINITY;
        for i in 0..200 {
            for j in 0..100 {
                let x = 2.0 * std::f64::consts::PI * (i as f64) / 200.0;
                let y = (rho - 0.05) * (2.0 * (j as f64) / 99.0 - 1.0);
                min_mod = min_mod.min(h_k(ComplexPoint::new(x, y), md).norm());
            }
        }
        assert!(min_mod > 1e-3, "min |h_k| on strip grid: {min_mod}");
    }

    #[test]
    fn inv_sqrt_h_rejects_outside_strip() {
        let md = m(0.5);
        let rho = rho_of_modulus(md);
        let inside = inv_sqrt_h(ComplexPoint::new(1.0, 0.9 * rho), md);
        assert!(inside.is_ok());
        let outside = inv_sqrt_h(ComplexPoint::new(1.0, 1.1 * rho), md);
        assert!(matches!(
            outside,
            Err(SpecialFunctionError::OutsideStrip { .. })
        ));
    }

    #[test]
    fn rho_closed_forms() {
        let k = 1.0 / 1.0_f64.cosh();
        assert!((rho_of_modulus(m(k)) - 1.0).abs() < 1e-14);
        assert!(rho_of_modulus(Modulus::ZERO).is_infinite());
        assert!(rho_of_modulus(m(0.3)) > rho_of_modulus(m(0.6)));
    }

    proptest! {
        #[test]
        fn am_inverts_f(phi in -6.0..6.0f64, k in 0.0..0.95f64) {
            let md = m(k);
            let u = incomplete_f(phi, md);
            let back = jacobi_am(u, md);
            prop_assert!((back - phi).abs() < 1e-10);
        }

        #[test]
        fn sn_cn_pythagorean(u in -20.0..20.0f64, k in 0.0..0.99f64) {
            let md = m(k);
            let (s, c) = (jacobi_sn(u, md), jacobi_cn(u, md));
            prop_assert!((s * s + c * c - 1.0).abs() < 1e-12);
        }
    }
}
