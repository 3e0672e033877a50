//! Ellipse parametrization, elliptic polar coordinates, confocal caustics,
//! rotation numbers, and the action-angle boundary parametrization.
//!
//! An ellipse is described by center (x0,y0), semi-focal distance c, elliptic
//! radius μ0 and tilt θ, so that the boundary is
//!     R_θ · (c cosh μ0 cos φ, c sinh μ0 sin φ) + (x0, y0),
//! with semi-axes a = c cosh μ0, b = c sinh μ0 and eccentricity
//! e0 = 1/cosh μ0. Circles are the degeneration c → 0, μ0 → ∞ with
//! c cosh μ0 → R, stored by radius.
//!
//! The confocal caustic C_λ (0 < λ < b) carries modulus
//! k_λ = c/√(a²−λ²), argument shift δ_λ = 2F(arcsin(λ/b); k_λ) and rotation
//! number ω_λ = δ_λ/(4K(k_λ)), strictly increasing from 0 to 1/2.

use crate::special_functions::{
    complete_e, complete_k, incomplete_e, incomplete_f, jacobi_am, Modulus,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec2 = nalgebra::Vector2<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid ellipse parameters: {0}")]
    InvalidEllipse(String),
    #[error("lambda = {lambda} outside the caustic range (0, {b})")]
    LambdaOutOfRange { lambda: f64, b: f64 },
    #[error("rotation number {p}/{q} outside (0, 1/2)")]
    RotationOutOfRange { p: u32, q: u32 },
    #[error("elliptic polar coordinates are undefined for a circle")]
    CircleDegenerate,
    #[error("least-squares fit needs at least {needed} nodes, got {got}")]
    FitUnderdetermined { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum EllipseKind {
    /// Proper ellipse: semi-focal distance c > 0, elliptic radius mu0 > 0.
    Focal { c: f64, mu0: f64 },
    /// Circle of the given radius (e0 = 0).
    Circle { radius: f64 },
}

/// A (possibly degenerate) ellipse in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub x0: f64,
    pub y0: f64,
    /// Tilt of the major axis, in [0, π).
    pub theta: f64,
    kind: EllipseKind,
}

impl EllipseParams {
    /// Ellipse from the focal parametrization (c, μ0).
    pub fn new(x0: f64, y0: f64, c: f64, mu0: f64, theta: f64) -> Result<Self, GeometryError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(GeometryError::InvalidEllipse(format!(
                "semi-focal distance must be positive, got {c}"
            )));
        }
        if !(mu0 > 0.0) || !mu0.is_finite() {
            return Err(GeometryError::InvalidEllipse(format!(
                "elliptic radius must be positive, got {mu0}"
            )));
        }
        Ok(EllipseParams {
            x0,
            y0,
            theta: theta.rem_euclid(std::f64::consts::PI),
            kind: EllipseKind::Focal { c, mu0 },
        })
    }

    pub fn circle(x0: f64, y0: f64, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidEllipse(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(EllipseParams {
            x0,
            y0,
            theta: 0.0,
            kind: EllipseKind::Circle { radius },
        })
    }

    /// Ellipse from semi-axes a ≥ b > 0; a = b yields the circle.
    pub fn from_axes(x0: f64, y0: f64, a: f64, b: f64, theta: f64) -> Result<Self, GeometryError> {
        if !(b > 0.0) || a < b || !a.is_finite() {
            return Err(GeometryError::InvalidEllipse(format!(
                "requires a >= b > 0, got a={a}, b={b}"
            )));
        }
        if a == b {
            return Self::circle(x0, y0, a);
        }
        let c = (a * a - b * b).sqrt();
        // mu0 = artanh(b/a)
        let mu0 = 0.5 * ((a + b) / (a - b)).ln();
        Self::new(x0, y0, c, mu0, theta)
    }

    pub fn is_circle(&self) -> bool {
        matches!(self.kind, EllipseKind::Circle { .. })
    }

    /// Semi-major axis.
    pub fn a(&self) -> f64 {
        match self.kind {
            EllipseKind::Focal { c, mu0 } => c * mu0.cosh(),
            EllipseKind::Circle { radius } => radius,
        }
    }

    /// Semi-minor axis.
    pub fn b(&self) -> f64 {
        match self.kind {
            EllipseKind::Focal { c, mu0 } => c * mu0.sinh(),
            EllipseKind::Circle { radius } => radius,
        }
    }

    /// Semi-focal distance; 0 for circles.
    pub fn c(&self) -> f64 {
        match self.kind {
            EllipseKind::Focal { c, .. } => c,
            EllipseKind::Circle { .. } => 0.0,
        }
    }

    /// Elliptic radius of the boundary; +∞ for circles.
    pub fn mu0(&self) -> f64 {
        match self.kind {
            EllipseKind::Focal { mu0, .. } => mu0,
            EllipseKind::Circle { .. } => f64::INFINITY,
        }
    }

    /// Eccentricity e0 = 1/cosh μ0 = c/a ∈ [0, 1).
    pub fn e0(&self) -> f64 {
        match self.kind {
            EllipseKind::Focal { mu0, .. } => 1.0 / mu0.cosh(),
            EllipseKind::Circle { .. } => 0.0,
        }
    }

    pub fn e0_modulus(&self) -> Modulus {
        Modulus::new(self.e0()).expect("eccentricity is always in [0,1)")
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.x0, self.y0)
    }

    /// Boundary point at elliptic angle φ.
    pub fn boundary_point(&self, phi: f64) -> Vec2 {
        let local = Vec2::new(self.a() * phi.cos(), self.b() * phi.sin());
        self.rotate(local) + self.center()
    }

    /// d/dφ of the boundary point.
    pub fn boundary_tangent(&self, phi: f64) -> Vec2 {
        let local = Vec2::new(-self.a() * phi.sin(), self.b() * phi.cos());
        self.rotate(local)
    }

    fn rotate(&self, v: Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }

    /// Inverse of `rotate` composed with centering: world -> ellipse frame.
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let d = p - self.center();
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }
}

/// Map elliptic polar coordinates (μ, φ) to the plane through the frame of
/// the given ellipse: x = c cosh μ cos φ, y = c sinh μ sin φ, then rotate by
/// θ and translate by the center.
pub fn elliptic_to_cartesian(e: &EllipseParams, mu: f64, phi: f64) -> Result<Vec2, GeometryError> {
    match e.kind {
        EllipseKind::Circle { .. } => Err(GeometryError::CircleDegenerate),
        EllipseKind::Focal { c, .. } => {
            let local = Vec2::new(c * mu.cosh() * phi.cos(), c * mu.sinh() * phi.sin());
            Ok(e.rotate(local) + e.center())
        }
    }
}

/// Confocal caustic data for one λ ∈ (0, b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausticParams {
    pub lambda: f64,
    /// Modulus k_λ with k_λ² = (a²−b²)/(a²−λ²).
    #[serde(with = "serde_modulus")]
    pub k_lambda: Modulus,
    /// Argument shift per bounce: δ_λ = 2F(arcsin(λ/b); k_λ).
    pub delta_lambda: f64,
    /// Rotation number ω_λ = δ_λ/(4K(k_λ)) ∈ (0, 1/2).
    pub omega_lambda: f64,
    /// Analyticity strip half-width ρ_{k_λ} = arcosh(1/k_λ).
    pub rho_k: f64,
}

mod serde_modulus {
    use crate::special_functions::Modulus;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Modulus, s: S) -> Result<S::Ok, S::Error> {
        m.k().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Modulus, D::Error> {
        let k = f64::deserialize(d)?;
        Modulus::new(k).map_err(serde::de::Error::custom)
    }
}

/// Caustic invariants for a given λ.
pub fn caustic_from_lambda(e: &EllipseParams, lambda: f64) -> Result<CausticParams, GeometryError> {
    let b = e.b();
    if !(lambda > 0.0 && lambda < b) {
        return Err(GeometryError::LambdaOutOfRange { lambda, b });
    }
    let a = e.a();
    let k = e.c() / (a * a - lambda * lambda).sqrt();
    let k_lambda = Modulus::new(k).map_err(|err| GeometryError::InvalidEllipse(err.to_string()))?;
    let delta_lambda = 2.0 * incomplete_f((lambda / b).asin(), k_lambda);
    let omega_lambda = delta_lambda / (4.0 * complete_k(k_lambda));
    Ok(CausticParams {
        lambda,
        k_lambda,
        delta_lambda,
        omega_lambda,
        rho_k: crate::special_functions::rho_of_modulus(k_lambda),
    })
}

/// Rotation number of the caustic through λ.
pub fn rotation_number(e: &EllipseParams, lambda: f64) -> Result<f64, GeometryError> {
    Ok(caustic_from_lambda(e, lambda)?.omega_lambda)
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The unique caustic with rotation number p/q ∈ (0, 1/2).
///
/// ω_λ is strictly increasing on (0, b) onto (0, 1/2); the solve brackets by
/// bisection down to width 1e-13·b, then applies one Newton polish with a
/// finite-difference slope.
pub fn lambda_from_rotation(
    e: &EllipseParams,
    p: u32,
    q: u32,
) -> Result<CausticParams, GeometryError> {
    if p == 0 || q == 0 || 2 * p >= q {
        return Err(GeometryError::RotationOutOfRange { p, q });
    }
    let g = gcd(p, q);
    let (p, q) = (p / g, q / g);
    let target = p as f64 / q as f64;
    let b = e.b();
    if e.is_circle() {
        // ω = arcsin(λ/b)/π exactly
        let lambda = b * (std::f64::consts::PI * target).sin();
        return caustic_from_lambda(e, lambda);
    }
    let omega = |lam: f64| -> f64 {
        caustic_from_lambda(e, lam)
            .map(|c| c.omega_lambda)
            .unwrap_or(if lam <= 0.0 { 0.0 } else { 0.5 })
    };
    let (mut lo, mut hi) = (0.0_f64, b);
    while hi - lo > 1e-13 * b {
        let mid = 0.5 * (lo + hi);
        if omega(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut lambda = 0.5 * (lo + hi);
    let h = 1e-7 * b;
    let slope = (omega((lambda + h).min(b * (1.0 - 1e-12))) - omega((lambda - h).max(1e-12 * b)))
        / (2.0 * h);
    if slope > 0.0 {
        let polished = lambda - (omega(lambda) - target) / slope;
        if polished > lo - (hi - lo) && polished < hi + (hi - lo) && polished > 0.0 && polished < b
        {
            lambda = polished;
        }
    }
    let caustic = caustic_from_lambda(e, lambda)?;
    debug_assert!(
        (caustic.omega_lambda - target).abs() <= 1e-12,
        "rotation solve residual {}",
        (caustic.omega_lambda - target).abs()
    );
    Ok(caustic)
}

/// Action-angle boundary parametrization adapted to a caustic: the point at
/// angle coordinate θ has elliptic coordinates (μ0, φ_λ(θ)) with
///     φ_λ(θ) = π/2 + am((4K(k_λ)/2π)·(θ − π/2); k_λ).
/// One bounce advances θ by 2π·ω_λ, and consecutive chords are tangent to
/// the caustic. The amplitude is anchored on the minor axis (φ = π/2 at
/// θ = π/2); anchoring it on the major axis breaks the tangency property.
/// The θ origin is chosen so that φ_λ(0) = 0 and the circle limit k → 0 is
/// the identity.
pub fn action_angle_boundary(e: &EllipseParams, caustic: &CausticParams, theta: f64) -> (f64, f64) {
    let half_pi = 0.5 * std::f64::consts::PI;
    let four_k = 4.0 * complete_k(caustic.k_lambda);
    let u = four_k / (2.0 * std::f64::consts::PI) * (theta - half_pi);
    let phi = half_pi + jacobi_am(u, caustic.k_lambda);
    (e.mu0(), phi)
}

/// Inverse of the angular part of `action_angle_boundary`:
/// θ(φ) = π/2 + (2π/4K)·F(φ − π/2; k_λ).
pub fn action_angle_theta(caustic: &CausticParams, phi: f64) -> f64 {
    let half_pi = 0.5 * std::f64::consts::PI;
    let four_k = 4.0 * complete_k(caustic.k_lambda);
    half_pi + 2.0 * std::f64::consts::PI / four_k * incomplete_f(phi - half_pi, caustic.k_lambda)
}

/// Distance defect between the line through p1, p2 (world coordinates) and
/// tangency to the confocal caustic C_λ, measured through the caustic's
/// support function: a line with unit normal n at signed distance h from the
/// center is tangent iff |h| = √((a²−λ²)n_x² + (b²−λ²)n_y²). Returns
/// | |h| − support |, zero exactly for tangent chords.
pub fn chord_caustic_gap(e: &EllipseParams, lambda: f64, p1: Vec2, p2: Vec2) -> f64 {
    let q1 = e.to_local(p1);
    let q2 = e.to_local(p2);
    let u = (q2 - q1).normalize();
    let n = Vec2::new(-u.y, u.x);
    let h = n.dot(&q1);
    let sup = ((e.a() * e.a() - lambda * lambda) * n.x * n.x
        + (e.b() * e.b() - lambda * lambda) * n.y * n.y)
        .sqrt();
    (h.abs() - sup).abs()
}

/// Arc length from φ=0: s(φ) = a·E(φ; e0), where E is the incomplete
/// elliptic integral of the second kind.
pub fn arc_length(e: &EllipseParams, phi: f64) -> f64 {
    e.a() * incomplete_e(phi, e.e0_modulus())
}

/// Perimeter 4a·E(e0).
pub fn perimeter(e: &EllipseParams) -> f64 {
    4.0 * e.a() * complete_e(e.e0_modulus())
}

/// Radius of curvature ρ(φ) = (a² sin²φ + b² cos²φ)^{3/2}/(ab).
pub fn radius_of_curvature(e: &EllipseParams, phi: f64) -> f64 {
    let (a, b) = (e.a(), e.b());
    let s = phi.sin();
    let c = phi.cos();
    (a * a * s * s + b * b * c * c).powf(1.5) / (a * b)
}

/// Lazutkin coordinate of the boundary angle φ, normalized to total mass 1:
/// x(φ) = F(φ; e0)/(4K(e0)); in particular x(2π) = 1 exactly.
pub fn lazutkin_x(e: &EllipseParams, phi: f64) -> f64 {
    let m = e.e0_modulus();
    if m.is_zero() {
        return phi / (2.0 * std::f64::consts::PI);
    }
    incomplete_f(phi, m) / (4.0 * complete_k(m))
}

/// Finite real Fourier series f(φ) = a₀ + Σ_{j=1}^J (a_j cos jφ + b_j sin jφ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicFunction {
    a0: f64,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
}

impl PeriodicFunction {
    pub fn new(a0: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        let mut cos_coeffs = cos_coeffs;
        let mut sin_coeffs = sin_coeffs;
        let n = cos_coeffs.len().max(sin_coeffs.len());
        cos_coeffs.resize(n, 0.0);
        sin_coeffs.resize(n, 0.0);
        PeriodicFunction {
            a0,
            cos_coeffs,
            sin_coeffs,
        }
    }

    pub fn zero() -> Self {
        PeriodicFunction::new(0.0, vec![], vec![])
    }

    pub fn constant(v: f64) -> Self {
        PeriodicFunction::new(v, vec![], vec![])
    }

    /// Single harmonic a·cos(jφ) + b·sin(jφ).
    pub fn harmonic(j: usize, a: f64, b: f64) -> Self {
        assert!(j >= 1);
        let mut cos_coeffs = vec![0.0; j];
        let mut sin_coeffs = vec![0.0; j];
        cos_coeffs[j - 1] = a;
        sin_coeffs[j - 1] = b;
        PeriodicFunction::new(0.0, cos_coeffs, sin_coeffs)
    }

    /// Highest harmonic index J.
    pub fn degree(&self) -> usize {
        self.cos_coeffs.len()
    }

    pub fn mean(&self) -> f64 {
        self.a0
    }

    /// Cosine coefficient a_j (j ≥ 1); 0 beyond the stored degree.
    pub fn a(&self, j: usize) -> f64 {
        if j == 0 {
            self.a0
        } else {
            self.cos_coeffs.get(j - 1).copied().unwrap_or(0.0)
        }
    }

    /// Sine coefficient b_j (j ≥ 1).
    pub fn b(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.sin_coeffs.get(j - 1).copied().unwrap_or(0.0)
        }
    }

    /// Complex Fourier coefficient f^(j) = (a_j - i b_j)/2 for j ≥ 1, so that
    /// f = Σ f^(j) e^{ijφ} + c.c. + a0.
    pub fn complex_coeff(&self, j: usize) -> num_complex::Complex64 {
        num_complex::Complex64::new(0.5 * self.a(j), -0.5 * self.b(j))
    }

    pub fn eval(&self, phi: f64) -> f64 {
        // angle-addition recurrence keeps evaluation O(J) without J trig calls
        let (s1, c1) = phi.sin_cos();
        let mut cj = c1;
        let mut sj = s1;
        let mut acc = self.a0;
        for j in 0..self.cos_coeffs.len() {
            acc += self.cos_coeffs[j] * cj + self.sin_coeffs[j] * sj;
            let c_next = cj * c1 - sj * s1;
            sj = sj * c1 + cj * s1;
            cj = c_next;
        }
        acc
    }

    /// Term-wise derivative.
    pub fn derivative(&self) -> PeriodicFunction {
        let mut cos_coeffs = Vec::with_capacity(self.degree());
        let mut sin_coeffs = Vec::with_capacity(self.degree());
        for j in 1..=self.degree() {
            cos_coeffs.push(j as f64 * self.b(j));
            sin_coeffs.push(-(j as f64) * self.a(j));
        }
        PeriodicFunction::new(0.0, cos_coeffs, sin_coeffs)
    }

    /// Antiderivative evaluated at φ with value 0 at φ=0 (contains the
    /// secular term a₀·φ, so it is a function on ℝ, not on the circle).
    pub fn antiderivative_eval(&self, phi: f64) -> f64 {
        let mut acc = self.a0 * phi;
        for j in 1..=self.degree() {
            let jf = j as f64;
            acc += self.a(j) * (jf * phi).sin() / jf - self.b(j) * ((jf * phi).cos() - 1.0) / jf;
        }
        acc
    }

    /// Trigonometric projection of N uniform samples f(2πi/N), keeping all
    /// representable harmonics J = floor((N-1)/2).
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n >= 1);
        let j_max = (n - 1) / 2;
        let mut a0 = 0.0;
        for &v in samples {
            a0 += v;
        }
        a0 /= n as f64;
        let mut cos_coeffs = vec![0.0; j_max];
        let mut sin_coeffs = vec![0.0; j_max];
        let w = 2.0 * std::f64::consts::PI / n as f64;
        for j in 1..=j_max {
            let mut ca = 0.0;
            let mut sa = 0.0;
            for (i, &v) in samples.iter().enumerate() {
                let (s, c) = (w * (i * j) as f64).sin_cos();
                ca += v * c;
                sa += v * s;
            }
            cos_coeffs[j - 1] = 2.0 * ca / n as f64;
            sin_coeffs[j - 1] = 2.0 * sa / n as f64;
        }
        PeriodicFunction::new(a0, cos_coeffs, sin_coeffs)
    }

    /// Least-squares fit of degree J through scattered nodes; requires at
    /// least 4J+1 nodes so the normal equations stay well conditioned.
    pub fn fit_scattered(nodes: &[f64], values: &[f64], degree: usize) -> Result<Self, GeometryError> {
        assert_eq!(nodes.len(), values.len());
        let needed = 4 * degree + 1;
        if nodes.len() < needed {
            return Err(GeometryError::FitUnderdetermined {
                needed,
                got: nodes.len(),
            });
        }
        let ncols = 2 * degree + 1;
        let mut design = nalgebra::DMatrix::<f64>::zeros(nodes.len(), ncols);
        for (r, &t) in nodes.iter().enumerate() {
            design[(r, 0)] = 1.0;
            for j in 1..=degree {
                let (s, c) = (j as f64 * t).sin_cos();
                design[(r, 2 * j - 1)] = c;
                design[(r, 2 * j)] = s;
            }
        }
        let rhs = nalgebra::DVector::from_column_slice(values);
        let svd = design.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| GeometryError::InvalidEllipse(e.to_string()))?;
        let mut cos_coeffs = vec![0.0; degree];
        let mut sin_coeffs = vec![0.0; degree];
        for j in 1..=degree {
            cos_coeffs[j - 1] = sol[2 * j - 1];
            sin_coeffs[j - 1] = sol[2 * j];
        }
        Ok(PeriodicFunction::new(sol[0], cos_coeffs, sin_coeffs))
    }

    /// max over a 4096-point grid of |f| + |f′|.
    pub fn c1_norm(&self) -> f64 {
        let d = self.derivative();
        let n = 4096;
        let mut best = 0.0_f64;
        for i in 0..n {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            best = best.max(self.eval(phi).abs() + d.eval(phi).abs());
        }
        best
    }

    /// Unweighted L² norm squared over [0, 2π): 2π a₀² + π Σ (a_j² + b_j²).
    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc = 2.0 * std::f64::consts::PI * self.a0 * self.a0;
        for j in 1..=self.degree() {
            acc += std::f64::consts::PI * (self.a(j).powi(2) + self.b(j).powi(2));
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> PeriodicFunction {
        PeriodicFunction::new(
            self.a0 * factor,
            self.cos_coeffs.iter().map(|v| v * factor).collect(),
            self.sin_coeffs.iter().map(|v| v * factor).collect(),
        )
    }

    pub fn plus(&self, other: &PeriodicFunction) -> PeriodicFunction {
        let deg = self.degree().max(other.degree());
        let mut cos_coeffs = vec![0.0; deg];
        let mut sin_coeffs = vec![0.0; deg];
        for j in 1..=deg {
            cos_coeffs[j - 1] = self.a(j) + other.a(j);
            sin_coeffs[j - 1] = self.b(j) + other.b(j);
        }
        PeriodicFunction::new(self.a0 + other.a0, cos_coeffs, sin_coeffs)
    }
}
