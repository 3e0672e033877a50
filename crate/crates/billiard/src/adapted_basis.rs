//! Basis functions adapted to the elliptic billiard: the five elliptic-motion
//! generators (homothety, two translations, rotation, hyperbolic rotation),
//! the dynamical modes c_q, s_q tied to the rational caustics, inner products
//! in the weighted space
//!     ⟨f, g⟩_{e0} = ∫₀^{2π} f g (1 − e0²cos²φ)² dφ,
//! correlation matrices between the trigonometric and dynamical families,
//! truncated inversion of the change-of-basis system, analyticity-strip
//! diagnostics, and the projection / ellipse-fitting pipeline built on top.
//!
//! Index conventions (documented once, used everywhere):
//! * trig-by-mode correlation matrix: row 2q ↔ cos(qφ), row 2q+1 ↔ sin(qφ)
//!   (row 1 is identically zero), column 2j ↔ c_j, column 2j+1 ↔ s_j for
//!   j ≥ 3; columns 0..6 hold the same trig functions so the prefix block is
//!   the exact trig Gram (2π at (0,0), π on the other nonzero diagonal).
//! * normalized-basis Gram: index 0..4 ↔ 𝕖_0..𝕖_4 = (e_h/√(2π), e_τ2/√π,
//!   e_τ1/√π, e_r/√π, e_hr/√π); index 2k ↔ c_k/‖c_k‖, 2k−1 ↔ s_k/‖s_k‖ for
//!   k ≥ 3, so the mode block starts at index 5.

use crate::elliptic_geometry::{
    action_angle_boundary, action_angle_theta, lambda_from_rotation, CausticParams, EllipseParams,
    GeometryError, PeriodicFunction, Vec2,
};
use crate::numerics;
use crate::special_functions::{complete_k, incomplete_f, Modulus, SpecialFunctionError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("dynamical modes need order q >= 3, got {q}")]
    ModeOrderTooLow { q: u32 },
    #[error("kind {kind:?} is not a mode")]
    NotAMode { kind: BasisKind },
    #[error("correlation matrix needs q_max >= {needed}, got {got}")]
    QMaxTooSmall { needed: usize, got: usize },
    #[error("truncation at q0 = {q0} leaves no tail inside a matrix of size {size}")]
    TruncationTooLarge { q0: usize, size: usize },
    #[error("operation needs the weighted normalized-basis Gram, not the plain trig-by-mode matrix")]
    WrongConvention,
    #[error("truncated system is numerically singular (condition {condition:.3e})")]
    SingularTruncation { condition: f64 },
    #[error("strip widths need 3 <= j < m, got j = {j}, m = {m}")]
    WidthsOrder { j: u32, m: u32 },
    #[error("eccentricity {0} outside (0, 1)")]
    InvalidEccentricity(f64),
    #[error("fit step collapsed the ellipse: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Homothety,
    Trans1,
    Trans2,
    Rotation,
    HypRotation,
    CosMode(u32),
    SinMode(u32),
}

impl BasisKind {
    pub const GENERATORS: [BasisKind; 5] = [
        BasisKind::Homothety,
        BasisKind::Trans1,
        BasisKind::Trans2,
        BasisKind::Rotation,
        BasisKind::HypRotation,
    ];

    pub fn mode_order(&self) -> Option<u32> {
        match *self {
            BasisKind::CosMode(q) | BasisKind::SinMode(q) => Some(q),
            _ => None,
        }
    }
}

/// One member of the adapted family. `normalization` multiplies the raw
/// formula; `unit` constructors set it to 1/‖·‖_{e0}.
#[derive(Debug, Clone)]
pub struct BasisFunction {
    pub kind: BasisKind,
    pub e0: f64,
    pub caustic: Option<CausticParams>,
    pub normalization: f64,
}

fn mode_caustic(e: &EllipseParams, q: u32) -> Result<CausticParams, BasisError> {
    if q < 3 {
        return Err(BasisError::ModeOrderTooLow { q });
    }
    Ok(lambda_from_rotation(e, 1, q)?)
}

impl BasisFunction {
    /// Un-normalized basis function on the ellipse `e`; mode kinds pick up
    /// the caustic of rotation number 1/q.
    pub fn raw(e: &EllipseParams, kind: BasisKind) -> Result<Self, BasisError> {
        let caustic = match kind.mode_order() {
            Some(q) => Some(mode_caustic(e, q)?),
            None => None,
        };
        Ok(BasisFunction {
            kind,
            e0: e.e0(),
            caustic,
            normalization: 1.0,
        })
    }

    /// Mode with an explicitly supplied caustic (any modulus, not only the
    /// rational ones of `e`). Generator kinds are rejected.
    pub fn with_caustic(
        e0: f64,
        kind: BasisKind,
        caustic: CausticParams,
    ) -> Result<Self, BasisError> {
        match kind.mode_order() {
            Some(q) if q >= 3 => Ok(BasisFunction {
                kind,
                e0,
                caustic: Some(caustic),
                normalization: 1.0,
            }),
            Some(q) => Err(BasisError::ModeOrderTooLow { q }),
            None => Err(BasisError::NotAMode { kind }),
        }
    }

    /// Normalized variant: ‖𝕖‖_{e0} = 1. Generator norms are closed-form
    /// (‖e_h‖² = 2π, the other four have norm² = π); mode norms come from
    /// the weighted trapezoid rule, spectrally exact for these analytic
    /// integrands.
    pub fn unit(e: &EllipseParams, kind: BasisKind) -> Result<Self, BasisError> {
        let mut b = Self::raw(e, kind)?;
        let norm_sq = match kind {
            BasisKind::Homothety => TAU,
            BasisKind::Trans1 | BasisKind::Trans2 | BasisKind::Rotation | BasisKind::HypRotation => {
                std::f64::consts::PI
            }
            _ => {
                let n = 4096;
                let mut acc = 0.0;
                for i in 0..n {
                    let phi = TAU * i as f64 / n as f64;
                    let v = eval_mode(&b, phi);
                    let w = weight(b.e0, phi);
                    acc += v * v * w * w;
                }
                acc * TAU / n as f64
            }
        };
        b.normalization = 1.0 / norm_sq.sqrt();
        Ok(b)
    }
}

fn weight(e0: f64, phi: f64) -> f64 {
    let c = phi.cos();
    1.0 - e0 * e0 * c * c
}

/// Point evaluation. Generators are rational in cos φ, sin φ; the modes are
///     c_q(φ) = cos(q·θ_q(φ)) / √(1 − k_q² cos²φ),
/// with θ_q the angular action-angle coordinate of the order-q caustic, so
/// that at e0 = 0 they reduce exactly to cos(qφ) and sin(qφ).
pub fn eval_mode(b: &BasisFunction, phi: f64) -> f64 {
    let w = weight(b.e0, phi);
    let raw = match b.kind {
        BasisKind::Homothety => 1.0 / w,
        BasisKind::Trans1 => phi.cos() / w,
        BasisKind::Trans2 => phi.sin() / w,
        BasisKind::Rotation => (2.0 * phi).sin() / w,
        BasisKind::HypRotation => (2.0 * phi).cos() / w,
        BasisKind::CosMode(q) | BasisKind::SinMode(q) => {
            let caustic = b
                .caustic
                .as_ref()
                .expect("mode kinds always carry a caustic");
            let k = caustic.k_lambda.k();
            let c = phi.cos();
            let envelope = (1.0 - k * k * c * c).sqrt();
            let theta = action_angle_theta(caustic, phi);
            let osc = match b.kind {
                BasisKind::CosMode(_) => (q as f64 * theta).cos(),
                _ => (q as f64 * theta).sin(),
            };
            osc / envelope
        }
    };
    raw * b.normalization
}

/// Anything evaluable at a boundary angle φ.
pub trait AngularFunction {
    fn value(&self, phi: f64) -> f64;
}

impl AngularFunction for PeriodicFunction {
    fn value(&self, phi: f64) -> f64 {
        self.eval(phi)
    }
}

impl AngularFunction for BasisFunction {
    fn value(&self, phi: f64) -> f64 {
        eval_mode(self, phi)
    }
}

const INNER_TOL: f64 = 1e-10;

/// ⟨f, g⟩_{e0} by adaptive quadrature.
pub fn weighted_inner<F, G>(f: &F, g: &G, e0: f64) -> f64
where
    F: AngularFunction + ?Sized,
    G: AngularFunction + ?Sized,
{
    numerics::integrate(
        &|phi| {
            let w = weight(e0, phi);
            f.value(phi) * g.value(phi) * w * w
        },
        0.0,
        TAU,
        INNER_TOL,
    )
}

/// Unweighted ⟨f, g⟩_{L²}.
pub fn plain_inner<F, G>(f: &F, g: &G) -> f64
where
    F: AngularFunction + ?Sized,
    G: AngularFunction + ?Sized,
{
    numerics::integrate(&|phi| f.value(phi) * g.value(phi), 0.0, TAU, INNER_TOL)
}

pub fn weighted_norm<F: AngularFunction + ?Sized>(f: &F, e0: f64) -> f64 {
    weighted_inner(f, f, e0).sqrt()
}

const THETA_GRID: usize = 2048;

/// φ values of the order-q action-angle parametrization on the uniform θ
/// grid; the change of variables behind every oscillatory pairing here.
fn mode_angle_samples(e: &EllipseParams, caustic: &CausticParams, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| action_angle_boundary(e, caustic, TAU * i as f64 / n as f64).1)
        .collect()
}

/// Unweighted pairings (⟨μ1, c_q⟩, ⟨μ1, s_q⟩) for q over the range. Uses
///     ⟨f, c_q⟩ = (2K(k_q)/π) ∫₀^{2π} f(φ_q(θ)) cos(qθ) dθ,
/// which the trapezoid rule resolves to spectral accuracy; both vanish for
/// deformations that keep the order-q caustic to first order.
pub fn integrability_residuals<F: AngularFunction + ?Sized>(
    e: &EllipseParams,
    mu1: &F,
    q_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<(u32, f64, f64)>, BasisError> {
    let mut out = Vec::new();
    for q in q_range {
        let caustic = mode_caustic(e, q)?;
        let phis = mode_angle_samples(e, &caustic, THETA_GRID);
        let factor = 4.0 * complete_k(caustic.k_lambda) / THETA_GRID as f64;
        let (mut rc, mut rs) = (0.0, 0.0);
        for (i, &phi) in phis.iter().enumerate() {
            let theta = TAU * i as f64 / THETA_GRID as f64;
            let v = mu1.value(phi);
            rc += v * (q as f64 * theta).cos();
            rs += v * (q as f64 * theta).sin();
        }
        out.push((q, factor * rc, factor * rs));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightConvention {
    /// Rows cos/sin(qφ) against columns c_j/s_j in the plain L² product.
    PlainTrigByMode,
    /// Weighted Gram ⟨𝕖_i, 𝕖_h⟩_{e0} of the normalized basis.
    WeightedBasis,
}

#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub q_max: usize,
    pub entries: DMatrix<f64>,
    pub weight_convention: WeightConvention,
    pub e0: f64,
}

fn canonical_ellipse(e0: f64) -> Result<EllipseParams, BasisError> {
    if !(0.0..1.0).contains(&e0) {
        return Err(BasisError::InvalidEccentricity(e0));
    }
    if e0 == 0.0 {
        Ok(EllipseParams::circle(0.0, 0.0, 1.0)?)
    } else {
        Ok(EllipseParams::from_axes(
            0.0,
            0.0,
            1.0,
            (1.0 - e0 * e0).sqrt(),
            0.0,
        )?)
    }
}

/// Trig-by-mode correlation matrix ã on the canonical ellipse of
/// eccentricity e0 (semiaxis a = 1): ã_{2q,2j} = ⟨cos qφ, c_j⟩_{L²} and the
/// three sin/cos companions, for q ≤ q_max and mode orders j ∈ [3, q_max].
/// Size 2q_max+2; see the module doc for the index layout. Entries are
/// computed through the action-angle substitution, never by direct
/// φ-quadrature of the oscillatory integrand.
pub fn correlation_matrix(e0: f64, q_max: usize) -> Result<CorrelationMatrix, BasisError> {
    if q_max < 6 {
        return Err(BasisError::QMaxTooSmall {
            needed: 6,
            got: q_max,
        });
    }
    let e = canonical_ellipse(e0)?;
    let size = 2 * q_max + 2;
    let mut m = DMatrix::<f64>::zeros(size, size);
    m[(0, 0)] = TAU;
    for ord in 1..=2usize {
        m[(2 * ord, 2 * ord)] = std::f64::consts::PI;
        m[(2 * ord + 1, 2 * ord + 1)] = std::f64::consts::PI;
    }
    let n = THETA_GRID;
    for j in 3..=q_max {
        let caustic = mode_caustic(&e, j as u32)?;
        let phis = mode_angle_samples(&e, &caustic, n);
        let factor = 4.0 * complete_k(caustic.k_lambda) / n as f64;
        let (cos_j, sin_j): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|i| {
                let t = j as f64 * TAU * i as f64 / n as f64;
                (t.cos(), t.sin())
            })
            .unzip();
        for q in 0..=q_max {
            let (mut cc, mut cs, mut sc, mut ss) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                let (s, c) = (q as f64 * phis[i]).sin_cos();
                cc += c * cos_j[i];
                cs += c * sin_j[i];
                sc += s * cos_j[i];
                ss += s * sin_j[i];
            }
            m[(2 * q, 2 * j)] = factor * cc;
            m[(2 * q, 2 * j + 1)] = factor * cs;
            m[(2 * q + 1, 2 * j)] = factor * sc;
            m[(2 * q + 1, 2 * j + 1)] = factor * ss;
        }
    }
    Ok(CorrelationMatrix {
        q_max,
        entries: m,
        weight_convention: WeightConvention::PlainTrigByMode,
        e0,
    })
}

fn basis_kind_for_index(i: usize) -> BasisKind {
    match i {
        0 => BasisKind::Homothety,
        1 => BasisKind::Trans2,
        2 => BasisKind::Trans1,
        3 => BasisKind::Rotation,
        4 => BasisKind::HypRotation,
        _ => {
            let k = ((i + 1) / 2) as u32;
            if i % 2 == 0 {
                BasisKind::CosMode(k)
            } else {
                BasisKind::SinMode(k)
            }
        }
    }
}

/// Weighted Gram ⟨𝕖_i, 𝕖_h⟩_{e0} of the normalized basis, size 2q_max+1
/// (mode orders up to q_max). Modes are normalized with the same grid used
/// for the products, so the mode diagonal is exactly 1.
pub fn weighted_gram_matrix(e0: f64, q_max: usize) -> Result<CorrelationMatrix, BasisError> {
    if q_max < 3 {
        return Err(BasisError::QMaxTooSmall {
            needed: 3,
            got: q_max,
        });
    }
    let e = canonical_ellipse(e0)?;
    let size = 2 * q_max + 1;
    let n = THETA_GRID;
    let wsq: Vec<f64> = (0..n)
        .map(|i| {
            let w = weight(e0, TAU * i as f64 / n as f64);
            w * w
        })
        .collect();
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(size);
    for idx in 0..size {
        let kind = basis_kind_for_index(idx);
        let b = match kind.mode_order() {
            Some(q) => BasisFunction::raw(&e, BasisKind::CosMode(q.max(3)))
                .and_then(|proto| {
                    BasisFunction::with_caustic(e0, kind, proto.caustic.unwrap())
                })?,
            None => BasisFunction::raw(&e, kind)?,
        };
        let mut vals: Vec<f64> = (0..n)
            .map(|i| eval_mode(&b, TAU * i as f64 / n as f64))
            .collect();
        let norm_sq = match kind {
            BasisKind::Homothety => TAU,
            BasisKind::Trans1 | BasisKind::Trans2 | BasisKind::Rotation | BasisKind::HypRotation => {
                std::f64::consts::PI
            }
            _ => vals
                .iter()
                .zip(&wsq)
                .map(|(v, w)| v * v * w)
                .sum::<f64>()
                * TAU
                / n as f64,
        };
        let inv = 1.0 / norm_sq.sqrt();
        for v in vals.iter_mut() {
            *v *= inv;
        }
        samples.push(vals);
    }
    let mut m = DMatrix::<f64>::zeros(size, size);
    for i in 0..size {
        for h in i..size {
            let dot = samples[i]
                .iter()
                .zip(&samples[h])
                .zip(&wsq)
                .map(|((a, b), w)| a * b * w)
                .sum::<f64>()
                * TAU
                / n as f64;
            m[(i, h)] = dot;
            m[(h, i)] = dot;
        }
    }
    Ok(CorrelationMatrix {
        q_max,
        entries: m,
        weight_convention: WeightConvention::WeightedBasis,
        e0,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct InversionReport {
    /// Frobenius mass of A − I on the tail block.
    pub off_diagonal_mass: f64,
    /// Spectral condition number of the truncated tail Gram.
    pub condition: f64,
    /// Least-squares slope of log(max_j |d_{jk}|) against the mode order of
    /// column k; negative when the expansion coefficients decay.
    pub decay_slope: f64,
}

/// Solve the truncated change-of-basis system D·A = B, where A is the Gram
/// of the normalized basis beyond index 2q0 and B pairs the head (indices
/// ≤ 2q0) against that tail. Requires a `WeightedBasis` matrix.
pub fn truncated_inversion(
    m: &CorrelationMatrix,
    q0: usize,
) -> Result<(DMatrix<f64>, InversionReport), BasisError> {
    if m.weight_convention != WeightConvention::WeightedBasis {
        return Err(BasisError::WrongConvention);
    }
    let size = m.entries.nrows();
    if q0 < 3 {
        return Err(BasisError::ModeOrderTooLow { q: q0 as u32 });
    }
    let head = 2 * q0 + 1;
    if head + 1 >= size {
        return Err(BasisError::TruncationTooLarge { q0, size });
    }
    let tail = size - head;
    let a = m.entries.view((head, head), (tail, tail)).into_owned();
    let b = m.entries.view((0, head), (head, tail)).into_owned();
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !condition.is_finite() || condition > 1e12 {
        return Err(BasisError::SingularTruncation { condition });
    }
    // A is symmetric, so D A = B is A Dᵀ = Bᵀ
    let dt = a
        .clone()
        .lu()
        .solve(&b.transpose())
        .ok_or(BasisError::SingularTruncation { condition })?;
    let d = dt.transpose();
    let mut off = 0.0;
    for k in 0..tail {
        for h in 0..tail {
            let target = if k == h { 1.0 } else { 0.0 };
            off += (a[(k, h)] - target) * (a[(k, h)] - target);
        }
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for c in 0..tail {
        let order = (head + c + 1) / 2;
        let peak = (0..head).map(|r| d[(r, c)].abs()).fold(0.0, f64::max);
        if peak > 1e-14 {
            pts.push((order as f64, peak.ln()));
        }
    }
    let decay_slope = least_squares_slope(&pts);
    Ok((
        d,
        InversionReport {
            off_diagonal_mass: off.sqrt(),
            condition,
            decay_slope,
        },
    ))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Shared core: the substitution v = cosh t, v² = 1/(1 − k′²sin²ψ) turns
/// the strip integral into F(ψ; k′) with sin ψ = tanh ρ / k′. The caller
/// supplies sin ψ so that it can be formed without cancellation; at the
/// tangency sin ψ = 1 the value is K(k′) exactly.
fn strip_psi_integral(kp: f64, sin_psi: f64) -> f64 {
    let mp = Modulus::new(kp).expect("complementary modulus of k > 0 lies in (0,1)");
    let s = sin_psi.min(1.0);
    if s >= 1.0 {
        complete_k(mp)
    } else {
        incomplete_f(s.asin(), mp)
    }
}

/// ∫₀^ρ dt/√(1 − k² cosh²t), defined for k·cosh ρ ≤ 1 (arguments past the
/// tangency are clamped to it).
pub fn strip_time_integral(k: Modulus, rho: f64) -> f64 {
    let kk = k.k();
    if kk == 0.0 {
        return rho;
    }
    let kp = (1.0 - kk * kk).sqrt();
    strip_psi_integral(kp, rho.tanh() / kp)
}

/// I(x, y) = ∫₀^{arcosh(1/y)} dt/√(1 − x² cosh²t) for x ≤ y. The endpoint
/// angle is formed directly from (x, y), so the tangency case x = y returns
/// K(√(1 − y²)) exactly.
pub fn strip_integral(x: Modulus, y: f64) -> f64 {
    let xx = x.k();
    if xx == 0.0 {
        return (1.0 / y).acosh();
    }
    let xp = (1.0 - xx * xx).sqrt();
    strip_psi_integral(xp, (1.0 - y * y).sqrt() / xp)
}

/// κ_m = π(1/√(1−k²) − 1/√(1−k²/2)) / (4K(k)), the slack constant in the
/// strip-width inequality; strictly decreasing in the caustic order.
pub fn analyticity_kappa(k: Modulus) -> f64 {
    let kk = k.k();
    let kappa_p = std::f64::consts::PI
        * (1.0 / (1.0 - kk * kk).sqrt() - 1.0 / (1.0 - 0.5 * kk * kk).sqrt());
    kappa_p / (4.0 * complete_k(k))
}

/// (ρ_{k_j}, σ_m(ρ_{k_j}), σ_∞(ρ_{k_j})) on the canonical ellipse of
/// eccentricity e0, where σ_m(ρ) = (2π/4K(k_m)) ∫₀^ρ dt/√(1 − k_m²cosh²t)
/// and σ_∞ replaces k_m by e0. Pre: 3 ≤ j < m, both are regular because
/// k_m < k_j implies k_m·cosh ρ_{k_j} = k_m/k_j < 1.
pub fn analyticity_widths(e0: f64, j: u32, m: u32) -> Result<(f64, f64, f64), BasisError> {
    if e0 <= 0.0 || e0 >= 1.0 {
        return Err(BasisError::InvalidEccentricity(e0));
    }
    if j < 3 || m <= j {
        return Err(BasisError::WidthsOrder { j, m });
    }
    let e = canonical_ellipse(e0)?;
    let cj = lambda_from_rotation(&e, 1, j)?;
    let cm = lambda_from_rotation(&e, 1, m)?;
    let rho = cj.rho_k;
    let half_pi_over = |k: Modulus| 0.5 * TAU / (4.0 * complete_k(k));
    let km = cm.k_lambda;
    let e0m = e.e0_modulus();
    let sigma_m = 2.0 * half_pi_over(km) * strip_time_integral(km, rho);
    let sigma_inf = 2.0 * half_pi_over(e0m) * strip_time_integral(e0m, rho);
    Ok((rho, sigma_m, sigma_inf))
}

/// For each q: (q, q²(k_q − e0), q²·sup_φ|ξ_q(φ) − ξ_∞(φ)|) with
/// ξ_k(φ) = (2π/4K(k))F(φ; k); both sequences stay bounded as q grows, and
/// vanish identically on the circle.
pub fn deviation_check(
    e: &EllipseParams,
    q_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<(u32, f64, f64)>, BasisError> {
    let e0 = e.e0();
    let e0m = e.e0_modulus();
    let norm_inf = 0.5 / complete_k(e0m);
    let mut out = Vec::new();
    for q in q_range {
        let caustic = mode_caustic(e, q)?;
        let kq = caustic.k_lambda;
        let qf = q as f64;
        let dev_k = qf * qf * (kq.k() - e0);
        let norm_q = 0.5 / complete_k(kq);
        let mut sup = 0.0_f64;
        let n = 512;
        for i in 0..n {
            let phi = TAU * i as f64 / n as f64;
            let xi_q = TAU * norm_q * incomplete_f(phi, kq);
            let xi_inf = TAU * norm_inf * incomplete_f(phi, e0m);
            sup = sup.max((xi_q - xi_inf).abs());
        }
        out.push((q, dev_k, qf * qf * sup));
    }
    Ok(out)
}

/// Coordinates of a function along the normalized elliptic-motion block:
/// a0 ↔ e_h, a1 ↔ e_τ1, b1 ↔ e_τ2, a2 ↔ e_hr, b2 ↔ e_r (each divided by
/// its weighted norm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

const PROJECTION_GRID: usize = 4096;

/// Weighted-orthogonal projection onto the five normalized generators. The
/// generators are mutually orthogonal in L²_{e0}, so the coefficients are
/// plain inner products; the residual is returned as a trigonometric series
/// interpolated on a 4096-point grid (the aliasing tail of the rational
/// generators is below machine precision).
pub fn project_elliptic_motions(
    e: &EllipseParams,
    mu: &PeriodicFunction,
) -> Result<(MotionCoefficients, PeriodicFunction), BasisError> {
    let e0 = e.e0();
    let n = PROJECTION_GRID;
    let order = [
        BasisKind::Homothety,
        BasisKind::Trans1,
        BasisKind::Trans2,
        BasisKind::HypRotation,
        BasisKind::Rotation,
    ];
    let norms = [
        TAU.sqrt(),
        std::f64::consts::PI.sqrt(),
        std::f64::consts::PI.sqrt(),
        std::f64::consts::PI.sqrt(),
        std::f64::consts::PI.sqrt(),
    ];
    let mut unit_samples = [const { Vec::new() }; 5];
    for (g, kind) in order.iter().enumerate() {
        let b = BasisFunction::raw(e, *kind)?;
        unit_samples[g] = (0..n)
            .map(|i| eval_mode(&b, TAU * i as f64 / n as f64) / norms[g])
            .collect();
    }
    let mu_vals: Vec<f64> = (0..n).map(|i| mu.eval(TAU * i as f64 / n as f64)).collect();
    let wsq: Vec<f64> = (0..n)
        .map(|i| {
            let w = weight(e0, TAU * i as f64 / n as f64);
            w * w
        })
        .collect();
    let mut coeff = [0.0_f64; 5];
    for g in 0..5 {
        coeff[g] = mu_vals
            .iter()
            .zip(&unit_samples[g])
            .zip(&wsq)
            .map(|((m, u), w)| m * u * w)
            .sum::<f64>()
            * TAU
            / n as f64;
    }
    let residual_vals: Vec<f64> = (0..n)
        .map(|i| {
            let mut v = mu_vals[i];
            for g in 0..5 {
                v -= coeff[g] * unit_samples[g][i];
            }
            v
        })
        .collect();
    Ok((
        MotionCoefficients {
            a0: coeff[0],
            a1: coeff[1],
            b1: coeff[2],
            a2: coeff[3],
            b2: coeff[4],
        },
        PeriodicFunction::from_samples(&residual_vals),
    ))
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub coefficients: MotionCoefficients,
    pub input_c1: f64,
    pub residual_c1: f64,
    /// Circle targets have no rotation or hyperbolic step.
    pub rotation_steps_skipped: bool,
}

fn rotate_vec(theta: f64, v: Vec2) -> Vec2 {
    let (s, c) = theta.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Boundary point of the domain described by `mu` over the ellipse `e`, in
/// world coordinates. For a circle the elliptic coordinates degenerate to
/// the radial exponent: r = R·e^{μ(φ)}.
fn perturbed_point(e: &EllipseParams, mu: &PeriodicFunction, phi: f64) -> Vec2 {
    let m1 = mu.eval(phi);
    if e.is_circle() {
        let r = e.a() * m1.exp();
        e.center() + Vec2::new(r * phi.cos(), r * phi.sin())
    } else {
        let m = e.mu0() + m1;
        let local = Vec2::new(e.c() * m.cosh() * phi.cos(), e.c() * m.sinh() * phi.sin());
        e.center() + rotate_vec(e.theta, local)
    }
}

/// Elliptic-coordinate description of the world point `p` relative to `e`:
/// returns (φ, μ − μ0). Inverts z = c·cosh(μ + iφ) through the complex
/// arccosh branch with μ > 0, φ ∈ [0, 2π).
pub fn elliptic_deviation(e: &EllipseParams, p: Vec2) -> (f64, f64) {
    if e.is_circle() {
        let q = p - e.center();
        let phi = q.y.atan2(q.x).rem_euclid(TAU);
        (phi, (q.norm() / e.a()).ln())
    } else {
        let q = e.to_local(p);
        let w = (Complex64::new(q.x, q.y) / e.c()).acosh();
        (w.im.rem_euclid(TAU), w.re - e.mu0())
    }
}

const FIT_GRID: usize = 1024;

/// Highest harmonic carrying more than roundoff relative to the C¹ size;
/// grid-sampled inputs store thousands of noise coefficients that would
/// otherwise inflate the refit degree.
fn significant_degree(mu: &PeriodicFunction) -> usize {
    let floor = 1e-13 * (1.0 + mu.c1_norm());
    let mut deg = 0;
    for j in 1..=mu.degree() {
        if mu.a(j).abs() + mu.b(j).abs() > floor {
            deg = j;
        }
    }
    deg
}

/// One pass of the ellipse-fitting sequence: project onto the motion block,
/// apply translation → homothety → rotation → hyperbolic rotation with the
/// linearized coefficient maps, then recompute the perturbation relative to
/// the fitted ellipse. Coefficient maps (raw generator coordinates):
/// translation (a1·c/(e0√(1−e0²)), b1·c/e0), homothety e^{a0/√(1−e0²)},
/// rotation angle 2b2/e0², hyperbolic exponent a2/√(1−e0²). For circles
/// only the translation and homothety steps apply. The returned residual
/// norm decays quadratically in the input size.
pub fn best_ellipse_fit(
    e: &EllipseParams,
    mu: &PeriodicFunction,
) -> Result<(EllipseParams, PeriodicFunction, FitReport), BasisError> {
    let (coeffs, _) = project_elliptic_motions(e, mu)?;
    let a0 = coeffs.a0 / TAU.sqrt();
    let a1 = coeffs.a1 / std::f64::consts::PI.sqrt();
    let b1 = coeffs.b1 / std::f64::consts::PI.sqrt();
    let a2 = coeffs.a2 / std::f64::consts::PI.sqrt();
    let b2 = coeffs.b2 / std::f64::consts::PI.sqrt();
    let (fitted, skipped) = if e.is_circle() {
        let r = e.a();
        let center = e.center() + Vec2::new(a1 * r, b1 * r);
        (
            EllipseParams::circle(center.x, center.y, r * a0.exp())?,
            true,
        )
    } else {
        let e0 = e.e0();
        let root = (1.0 - e0 * e0).sqrt();
        let tau_local = Vec2::new(a1 * e.c() / (e0 * root), b1 * e.c() / e0);
        let center = e.center() + rotate_vec(e.theta, tau_local);
        let scale = (a0 / root).exp();
        let theta_new = e.theta + 2.0 * b2 / (e0 * e0);
        let hyp = a2 / root;
        let a_new = e.a() * scale * hyp.exp();
        let b_new = e.b() * scale * (-hyp).exp();
        if !(b_new > 0.0 && a_new > b_new) {
            return Err(BasisError::DegenerateFit(format!(
                "axes after homothety/hyperbolic steps: a = {a_new}, b = {b_new}"
            )));
        }
        (
            EllipseParams::from_axes(center.x, center.y, a_new, b_new, theta_new)?,
            false,
        )
    };
    let mut nodes = Vec::with_capacity(FIT_GRID);
    let mut values = Vec::with_capacity(FIT_GRID);
    for i in 0..FIT_GRID {
        let phi = TAU * i as f64 / FIT_GRID as f64;
        let p = perturbed_point(e, mu, phi);
        let (node, dev) = elliptic_deviation(&fitted, p);
        nodes.push(node);
        values.push(dev);
    }
    let degree = (significant_degree(mu) + 4).clamp(12, 200);
    let mu_new = PeriodicFunction::fit_scattered(&nodes, &values, degree)?;
    let report = FitReport {
        coefficients: coeffs,
        input_c1: mu.c1_norm(),
        residual_c1: mu_new.c1_norm(),
        rotation_steps_skipped: skipped,
    };
    Ok((fitted, mu_new, report))
}
