//! Maximal marked length spectrum: Birkhoff maximal (p,q) periodic orbits,
//! the β-function β(p/q) = −L_max(p/q)/q, pinned-vertex length profiles
//! L_{p/q}(s), and the integrated squared deviation
//!     Δ_{p/q} = ∫ (L_{p/q}(s) − ⟨L_{p/q}⟩)² ds,
//! which vanishes on domains whose (p,q) orbits all have equal length
//! (in particular on ellipses, for every p/q).
//!
//! Orbits are found by coordinate ascent on lifted vertex parameters
//! v_0 < v_1 < … < v_{q−1} < v_0 + 2πp in bounce order: each vertex in turn
//! maximizes the two adjacent chord lengths over the interval between its
//! neighbors, which preserves cyclic monotonicity by construction.

use crate::billiard_core::{BilliardError, DomainBoundary, OrbitRecord, PhasePoint};
use crate::elliptic_geometry::{
    action_angle_boundary, action_angle_theta, lambda_from_rotation, EllipseParams, GeometryError,
    PeriodicFunction, Vec2,
};
use crate::numerics;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("rotation number {p}/{q} must be in lowest terms with 0 < p/q < 1/2")]
    BadFraction { p: u32, q: u32 },
    #[error("pin grid needs at least {needed} points, got {got}")]
    GridTooCoarse { needed: usize, got: usize },
    #[error("coordinate ascent stagnated: best length {best}, last sweep gain {gain}")]
    Stagnation { best: f64, gain: f64 },
    #[error(transparent)]
    Billiard(#[from] BilliardError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One row of the maximal marked length spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumEntry {
    pub p: u32,
    pub q: u32,
    pub l_max: f64,
    /// β(p/q) = −L_max/q
    pub beta: f64,
    /// Δ_{p/q} ≥ 0
    pub delta: f64,
    pub witness: OrbitRecord,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_fraction(p: u32, q: u32) -> Result<(), SpectrumError> {
    if p == 0 || q == 0 || gcd(p, q) != 1 || 2 * p >= q {
        return Err(SpectrumError::BadFraction { p, q });
    }
    Ok(())
}

/// Perimeter of the inscribed polygon with lifted bounce-order vertices v
/// (strictly increasing) closing over the winding 2πp.
fn polygon_length(d: &DomainBoundary, v: &[f64], wind: f64) -> f64 {
    let q = v.len();
    let mut total = 0.0;
    for i in 0..q - 1 {
        total += (d.position(v[i + 1]) - d.position(v[i])).norm();
    }
    total + (d.position(v[0] + wind) - d.position(v[q - 1])).norm()
}

/// Criticality residual g(t) = γ′(t)·(u_in − u_out) for the vertex between
/// fixed endpoints a, b, together with its t-derivative. g = 0 is exactly
/// the reflection law cos(angle in) = cos(angle out).
fn criticality(d: &DomainBoundary, t: f64, a: Vec2, b: Vec2) -> (f64, f64) {
    let p = d.position(t);
    let dp = d.derivative(t);
    let ddp = d.second_derivative(t);
    let r_in = p - a;
    let l_in = r_in.norm();
    let r_out = b - p;
    let l_out = r_out.norm();
    let u_in = r_in / l_in;
    let u_out = r_out / l_out;
    let g = dp.dot(&(u_in - u_out));
    let du_in = (dp - u_in * u_in.dot(&dp)) / l_in;
    let du_out = (-dp + u_out * u_out.dot(&dp)) / l_out;
    let dg = ddp.dot(&(u_in - u_out)) + dp.dot(&(du_in - du_out));
    (g, dg)
}

/// Residual, all three Jacobian entries, and |γ′| for the vertex at t with
/// lifted neighbor parameters lo, hi.
fn criticality_row(d: &DomainBoundary, t: f64, lo: f64, hi: f64) -> (f64, f64, f64, f64, f64) {
    let p = d.position(t);
    let dp = d.derivative(t);
    let ddp = d.second_derivative(t);
    let a = d.position(lo);
    let b = d.position(hi);
    let da = d.derivative(lo);
    let db = d.derivative(hi);
    let r_in = p - a;
    let l_in = r_in.norm();
    let u_in = r_in / l_in;
    let r_out = b - p;
    let l_out = r_out.norm();
    let u_out = r_out / l_out;
    let g = dp.dot(&(u_in - u_out));
    let du_in = (dp - u_in * u_in.dot(&dp)) / l_in;
    let du_out = (-dp + u_out * u_out.dot(&dp)) / l_out;
    let dg = ddp.dot(&(u_in - u_out)) + dp.dot(&(du_in - du_out));
    let dg_lo = -dp.dot(&((da - u_in * u_in.dot(&da)) / l_in));
    let dg_hi = -dp.dot(&((db - u_out * u_out.dot(&db)) / l_out));
    (g, dg, dg_lo, dg_hi, dp.norm())
}

fn is_bounce_ordered(v: &[f64], wind: f64) -> bool {
    v.windows(2).all(|w| w[0] < w[1]) && v[v.len() - 1] < v[0] + wind
}

/// Newton iteration on the full criticality system g_i(v) = 0, refining a
/// configuration already near the maximum. The Jacobian is cyclic
/// tridiagonal; at the orbit sizes in play a dense LU is cheap. Steps are
/// damped to keep strict bounce order. Returns true once the normalized
/// residual max_i |g_i|/|γ′| drops below 1e-13.
fn newton_refine(d: &DomainBoundary, v: &mut [f64], wind: f64, first: usize) -> bool {
    let q = v.len();
    let m = q - first;
    if m == 0 {
        return true;
    }
    for _ in 0..40 {
        let mut res = nalgebra::DVector::<f64>::zeros(m);
        let mut jac = nalgebra::DMatrix::<f64>::zeros(m, m);
        let mut worst = 0.0_f64;
        for i in first..q {
            let lo_idx = if i == 0 { q - 1 } else { i - 1 };
            let hi_idx = if i == q - 1 { 0 } else { i + 1 };
            let lo = if i == 0 { v[q - 1] - wind } else { v[i - 1] };
            let hi = if i == q - 1 { v[0] + wind } else { v[i + 1] };
            let (g, dg, dg_lo, dg_hi, speed) = criticality_row(d, v[i], lo, hi);
            let row = i - first;
            res[row] = g;
            jac[(row, row)] += dg;
            if lo_idx >= first {
                jac[(row, lo_idx - first)] += dg_lo;
            }
            if hi_idx >= first {
                jac[(row, hi_idx - first)] += dg_hi;
            }
            worst = worst.max((g / speed).abs());
        }
        if worst < 1e-13 {
            return true;
        }
        // On domains where the orbit sits in a one-parameter family (circle,
        // ellipse) the Jacobian is singular along the family direction; the
        // SVD cutoff gives the minimum-norm Newton step in that case.
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let Ok(step) = svd.solve(&res, 1e-12 * smax.max(f64::MIN_POSITIVE)) else {
            return false;
        };
        let mut scale = 1.0_f64;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = v.to_vec();
            for i in first..q {
                trial[i] = v[i] - scale * step[i - first];
            }
            if is_bounce_ordered(&trial, wind) {
                v.copy_from_slice(&trial);
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return false;
        }
    }
    false
}

/// One coordinate-ascent sweep; vertices with index < first stay pinned.
/// Brent localizes the two-chord maximum, then Newton on the reflection
/// condition polishes it to machine precision (Brent alone stalls at ~√ε
/// because the objective is quadratically flat at the max).
fn ascent_sweep(d: &DomainBoundary, v: &mut [f64], wind: f64, first: usize, xtol: f64) {
    let q = v.len();
    for i in first..q {
        let lo = if i == 0 { v[q - 1] - wind } else { v[i - 1] };
        let hi = if i == q - 1 { v[0] + wind } else { v[i + 1] };
        let p_prev = d.position(lo);
        let p_next = d.position(hi);
        let f = |t: f64| (d.position(t) - p_prev).norm() + (p_next - d.position(t)).norm();
        let (mut t_star, _) = numerics::brent_max(&f, lo, hi, xtol, 200);
        let span = hi - lo;
        for _ in 0..4 {
            let (g, dg) = criticality(d, t_star, p_prev, p_next);
            if !dg.is_finite() || dg.abs() < 1e-300 {
                break;
            }
            let t_new = (t_star - g / dg).clamp(lo + 1e-12 * span, hi - 1e-12 * span);
            let moved = (t_new - t_star).abs();
            t_star = t_new;
            if moved < 1e-15 * (1.0 + t_star.abs()) {
                break;
            }
        }
        v[i] = t_star;
    }
}

const SWEEP_GAIN_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 400;
const BRENT_XTOL: f64 = 1e-10;

/// Coordinate ascent until the per-sweep perimeter gain is small, then full
/// Newton on the criticality system down to machine precision. Returns the
/// converged perimeter.
fn ascend_to_convergence(
    d: &DomainBoundary,
    v: &mut [f64],
    wind: f64,
    first: usize,
) -> Result<f64, SpectrumError> {
    let mut length = polygon_length(d, v, wind);
    let mut warm = false;
    for _ in 0..MAX_SWEEPS {
        ascent_sweep(d, v, wind, first, BRENT_XTOL);
        let new_length = polygon_length(d, v, wind);
        let gain = new_length - length;
        length = new_length;
        if gain < SWEEP_GAIN_TOL * (1.0 + length.abs()) {
            warm = true;
            break;
        }
    }
    if !warm || !newton_refine(d, v, wind, first) {
        return Err(SpectrumError::Stagnation {
            best: length,
            gain: f64::NAN,
        });
    }
    Ok(polygon_length(d, v, wind))
}

/// Assemble the orbit record for a converged vertex configuration.
fn witness_record(d: &DomainBoundary, v: &[f64], wind: f64, p: u32, q: u32) -> OrbitRecord {
    let n = v.len();
    let mut lifted: Vec<f64> = v.to_vec();
    lifted.push(v[0] + wind);
    let positions: Vec<_> = lifted.iter().map(|&t| d.position(t)).collect();
    let mut points = Vec::with_capacity(n + 1);
    let mut chords = Vec::with_capacity(n);
    let mut total = 0.0;
    for i in 0..n {
        let dir = (positions[i + 1] - positions[i]).normalize();
        let phi = dir.dot(&d.unit_tangent(lifted[i])).clamp(-1.0, 1.0).acos();
        points.push(PhasePoint {
            s: d.reduce_s(d.s_of_t(lifted[i])),
            phi,
        });
        let len = (positions[i + 1] - positions[i]).norm();
        chords.push(len);
        total += len;
    }
    points.push(points[0]);
    OrbitRecord {
        points,
        chord_lengths: chords,
        rotation_estimate: p as f64 / q as f64,
        total_length: total,
    }
}

/// Maximal total length among inscribed q-gons with winding number p,
/// alongside the maximizing orbit. Seeded from the regular configuration
/// plus 8 deterministic jittered configurations.
pub fn birkhoff_orbit(
    d: &DomainBoundary,
    p: u32,
    q: u32,
) -> Result<(f64, OrbitRecord), SpectrumError> {
    check_fraction(p, q)?;
    let wind = 2.0 * std::f64::consts::PI * p as f64;
    let qf = q as f64;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(0x42_1107);
    for seed in 0..9 {
        let mut v: Vec<f64> = if seed == 0 {
            (0..q).map(|i| wind * i as f64 / qf).collect()
        } else {
            let t0 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
            let jitter = 0.4 * wind / qf;
            let mut v: Vec<f64> = (0..q)
                .map(|i| t0 + wind * i as f64 / qf + jitter * (rng.gen::<f64>() - 0.5))
                .collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        let length = ascend_to_convergence(d, &mut v, wind, 0)?;
        if best.as_ref().map_or(true, |(l, _)| length > *l) {
            best = Some((length, v));
        }
    }
    let (l_max, v) = best.unwrap();
    Ok((l_max, witness_record(d, &v, wind, p, q)))
}

/// Maximal q-gon perimeter with the first vertex pinned at each arc length
/// in `s_grid`. Uses the free maximizer as warm start and continues it along
/// the grid, so the profile tracks one branch continuously.
pub fn l_profile(
    d: &DomainBoundary,
    p: u32,
    q: u32,
    s_grid: &[f64],
) -> Result<Vec<f64>, SpectrumError> {
    check_fraction(p, q)?;
    let wind = 2.0 * std::f64::consts::PI * p as f64;
    let (_, free) = birkhoff_orbit(d, p, q)?;
    // recover lifted vertex parameters of the free maximizer
    let mut v: Vec<f64> = Vec::with_capacity(q as usize);
    let mut prev = d.t_of_s(free.points[0].s);
    v.push(prev);
    for pt in &free.points[1..q as usize] {
        let mut t = d.t_of_s(pt.s);
        while t <= prev {
            t += 2.0 * std::f64::consts::PI;
        }
        v.push(t);
        prev = t;
    }
    let mut out = Vec::with_capacity(s_grid.len());
    let mut t_prev = v[0];
    for &s in s_grid {
        let t_pin = d.t_of_s(d.reduce_s(s));
        // shift the whole configuration with the pin, then re-converge
        let shift = t_pin - t_prev;
        for vi in v.iter_mut() {
            *vi += shift;
        }
        v[0] = t_pin;
        t_prev = t_pin;
        let length = ascend_to_convergence(d, &mut v, wind, 1)?;
        out.push(length);
    }
    Ok(out)
}

/// Δ_{p/q} via the trapezoid rule on a uniform n_grid pin grid, with the
/// arc-length-normalized mean so that a constant profile gives exactly 0.
pub fn delta_pq(
    d: &DomainBoundary,
    p: u32,
    q: u32,
    n_grid: usize,
) -> Result<f64, SpectrumError> {
    if n_grid < 32 {
        return Err(SpectrumError::GridTooCoarse {
            needed: 32,
            got: n_grid,
        });
    }
    let per = d.perimeter();
    let s_grid: Vec<f64> = (0..n_grid).map(|i| per * i as f64 / n_grid as f64).collect();
    let profile = l_profile(d, p, q, &s_grid)?;
    let mean = profile.iter().sum::<f64>() / n_grid as f64;
    // periodic uniform grid: trapezoid weights are all equal
    let h = per / n_grid as f64;
    Ok(profile.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() * h)
}

const DELTA_DEFAULT_GRID: usize = 48;

/// Spectrum rows (L_max, β, Δ) for a list of lowest-term fractions.
pub fn beta_table(
    d: &DomainBoundary,
    fractions: &[(u32, u32)],
) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    fractions
        .iter()
        .map(|&(p, q)| {
            let (l_max, witness) = birkhoff_orbit(d, p, q)?;
            let delta = delta_pq(d, p, q, DELTA_DEFAULT_GRID)?;
            Ok(SpectrumEntry {
                p,
                q,
                l_max,
                beta: -l_max / q as f64,
                delta,
                witness,
            })
        })
        .collect()
}

/// First variation of the length of the elliptic (p,q) orbit through the
/// boundary point at parameter φ, under the elliptic-coordinate perturbation
/// μ1: returns 2 λ_{p/q} Σ_{k=1}^{q} μ1(φ^k) over the orbit vertices.
pub fn first_variation_length(
    e: &EllipseParams,
    mu1: &PeriodicFunction,
    p: u32,
    q: u32,
    phi: f64,
) -> Result<f64, SpectrumError> {
    check_fraction(p, q)?;
    let caustic = lambda_from_rotation(e, p, q)?;
    let theta0 = action_angle_theta(&caustic, phi);
    let step = 2.0 * std::f64::consts::PI * p as f64 / q as f64;
    let mut sum = 0.0;
    for k in 1..=q {
        let (_, phik) = action_angle_boundary(e, &caustic, theta0 + step * k as f64);
        sum += mu1.eval(phik);
    }
    Ok(2.0 * caustic.lambda * sum)
}

/// Worst reflection defect |angle_in − angle_out| over the orbit vertices.
/// For a closed orbit (first and last phase point equal) the wrap vertex is
/// included; otherwise only interior vertices are checked.
pub fn reflection_residual(d: &DomainBoundary, orbit: &OrbitRecord) -> f64 {
    let pts = &orbit.points;
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let closed = (pts[0].s - pts[n - 1].s).abs() < 1e-9 * d.perimeter()
        && (pts[0].phi - pts[n - 1].phi).abs() < 1e-9;
    let pos: Vec<_> = pts.iter().map(|p| d.position(d.t_of_s(p.s))).collect();
    let mut worst = 0.0_f64;
    for j in 1..n - 1 {
        let d_in = (pos[j] - pos[j - 1]).normalize();
        let d_out = (pos[j + 1] - pos[j]).normalize();
        let tang = d.unit_tangent(d.t_of_s(pts[j].s));
        let a_in = d_in.dot(&tang).clamp(-1.0, 1.0).acos();
        let a_out = d_out.dot(&tang).clamp(-1.0, 1.0).acos();
        worst = worst.max((a_in - a_out).abs());
    }
    if closed {
        let d_in = (pos[0] - pos[n - 2]).normalize();
        let d_out = (pos[1] - pos[0]).normalize();
        let tang = d.unit_tangent(d.t_of_s(pts[0].s));
        let a_in = d_in.dot(&tang).clamp(-1.0, 1.0).acos();
        let a_out = d_out.dot(&tang).clamp(-1.0, 1.0).acos();
        worst = worst.max((a_in - a_out).abs());
    }
    worst
}
