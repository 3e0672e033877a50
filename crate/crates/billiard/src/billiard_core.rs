//! The billiard map on strictly convex planar domains.
//!
//! A domain boundary is one of: an ellipse, an ellipse perturbed in elliptic
//! coordinates (c cosh(μ0+μ(φ)) cos φ, c sinh(μ0+μ(φ)) sin φ), a polar graph
//! around a center, or a closed sampled curve (trigonometric interpolation).
//! The canonical parameter t is the angular parameter of the construction
//! variant; arc length is served from eagerly built quadrature tables.
//!
//! Phase space uses (s, φ): arc length along the boundary and the angle of
//! the outgoing ray above the positive (counterclockwise) tangent. The
//! generating function ℓ(s,s′) = ‖γ(s)−γ(s′)‖ satisfies ∂ℓ/∂s = −cos φ and
//! ∂ℓ/∂s′ = cos φ′.

use crate::elliptic_geometry::{EllipseParams, GeometryError, PeriodicFunction, Vec2};
use crate::numerics;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BilliardError {
    #[error("boundary is not strictly convex: {0}")]
    NotConvex(String),
    #[error("ray with phi = {phi} is glancing (|sin phi| too small)")]
    GlancingRay { phi: f64 },
    #[error("degenerate chord: s = {s} and s2 = {s2} coincide on the boundary")]
    DegenerateChord { s: f64, s2: f64 },
    #[error("next-intersection solve failed: {0}")]
    RootFindFailure(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Boundary construction variants.
#[derive(Debug, Clone)]
pub enum BoundaryShape {
    Ellipse(EllipseParams),
    PerturbedEllipse {
        base: EllipseParams,
        mu: PeriodicFunction,
    },
    PolarGraph {
        rho: PeriodicFunction,
        center: Vec2,
    },
    SampledCurve {
        x: PeriodicFunction,
        y: PeriodicFunction,
    },
}

/// A strictly convex boundary with cached arc-length and Lazutkin tables.
///
/// Immutable after construction; all queries are thread-safe.
#[derive(Debug, Clone)]
pub struct DomainBoundary {
    shape: BoundaryShape,
    /// cumulative arc length at t_i = 2πi/N, i = 0..=N
    arc_table: Vec<f64>,
    /// cumulative ∫ ρ(t)^{-2/3} ds at the same nodes
    lazutkin_table: Vec<f64>,
    perimeter: f64,
    lazutkin_total: f64,
}

const TABLE_N: usize = 2048;
const CONVEXITY_GRID: usize = 1024;
/// Reflection angles closer than this to the tangential fixed sets
/// {φ=0, π} are rejected as glancing.
pub const GLANCING_TOL: f64 = 1e-6;

impl DomainBoundary {
    pub fn ellipse(e: EllipseParams) -> Result<Self, BilliardError> {
        Self::build(BoundaryShape::Ellipse(e))
    }

    /// Ellipse perturbed in elliptic coordinates. The base must be a proper
    /// ellipse: elliptic coordinates degenerate for circles (perturb circles
    /// through `polar_graph` instead).
    pub fn perturbed_ellipse(
        base: EllipseParams,
        mu: PeriodicFunction,
    ) -> Result<Self, BilliardError> {
        if base.is_circle() {
            return Err(BilliardError::Geometry(GeometryError::CircleDegenerate));
        }
        Self::build(BoundaryShape::PerturbedEllipse { base, mu })
    }

    pub fn polar_graph(rho: PeriodicFunction, center: Vec2) -> Result<Self, BilliardError> {
        Self::build(BoundaryShape::PolarGraph { rho, center })
    }

    /// Closed curve through uniformly indexed sample points (t_i = 2πi/N),
    /// interpolated trigonometrically. Points must wind counterclockwise.
    pub fn sampled_curve(points: &[Vec2]) -> Result<Self, BilliardError> {
        if points.len() < 8 {
            return Err(BilliardError::NotConvex(format!(
                "need at least 8 sample points, got {}",
                points.len()
            )));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        Self::build(BoundaryShape::SampledCurve {
            x: PeriodicFunction::from_samples(&xs),
            y: PeriodicFunction::from_samples(&ys),
        })
    }

    fn build(shape: BoundaryShape) -> Result<Self, BilliardError> {
        let mut d = DomainBoundary {
            shape,
            arc_table: Vec::new(),
            lazutkin_table: Vec::new(),
            perimeter: 0.0,
            lazutkin_total: 0.0,
        };
        d.validate_convexity()?;
        d.build_tables();
        Ok(d)
    }

    fn validate_convexity(&self) -> Result<(), BilliardError> {
        let mut min_curv = f64::INFINITY;
        let mut min_speed = f64::INFINITY;
        for i in 0..CONVEXITY_GRID {
            let t = 2.0 * std::f64::consts::PI * i as f64 / CONVEXITY_GRID as f64;
            let d1 = self.derivative(t);
            let d2 = self.second_derivative(t);
            let speed = d1.norm();
            let cross = d1.x * d2.y - d1.y * d2.x;
            min_speed = min_speed.min(speed);
            min_curv = min_curv.min(cross / speed.powi(3));
        }
        if !(min_speed > 1e-12) {
            return Err(BilliardError::NotConvex(format!(
                "parametrization speed collapses (min |γ'| = {min_speed})"
            )));
        }
        if !(min_curv > 0.0) {
            return Err(BilliardError::NotConvex(format!(
                "signed curvature dips to {min_curv} on the test grid \
                 (boundary must be strictly convex and counterclockwise)"
            )));
        }
        Ok(())
    }

    fn build_tables(&mut self) {
        let n = TABLE_N;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let speed = |t: f64| self.derivative(t).norm();
        let laz_density = |t: f64| self.curvature_radius(t).powf(-2.0 / 3.0) * speed(t);
        let mut arc = Vec::with_capacity(n + 1);
        let mut laz = Vec::with_capacity(n + 1);
        arc.push(0.0);
        laz.push(0.0);
        let mut acc_s = 0.0;
        let mut acc_l = 0.0;
        for i in 0..n {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            acc_s += numerics::gk15(&speed, a, b);
            acc_l += numerics::gk15(&laz_density, a, b);
            arc.push(acc_s);
            laz.push(acc_l);
        }
        self.perimeter = acc_s;
        self.lazutkin_total = acc_l;
        self.arc_table = arc;
        self.lazutkin_table = laz;
    }

    pub fn shape(&self) -> &BoundaryShape {
        &self.shape
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// γ(t).
    pub fn position(&self, t: f64) -> Vec2 {
        match &self.shape {
            BoundaryShape::Ellipse(e) => e.boundary_point(t),
            BoundaryShape::PerturbedEllipse { base, mu } => {
                let m = base.mu0() + mu.eval(t);
                let c = base.c();
                let local = Vec2::new(c * m.cosh() * t.cos(), c * m.sinh() * t.sin());
                rotate(base.theta, local) + base.center()
            }
            BoundaryShape::PolarGraph { rho, center } => {
                let r = rho.eval(t);
                center + Vec2::new(r * t.cos(), r * t.sin())
            }
            BoundaryShape::SampledCurve { x, y } => Vec2::new(x.eval(t), y.eval(t)),
        }
    }

    /// γ'(t), analytic per variant.
    pub fn derivative(&self, t: f64) -> Vec2 {
        match &self.shape {
            BoundaryShape::Ellipse(e) => e.boundary_tangent(t),
            BoundaryShape::PerturbedEllipse { base, mu } => {
                let m = base.mu0() + mu.eval(t);
                let mp = mu.derivative().eval(t);
                let c = base.c();
                let (st, ct) = t.sin_cos();
                let local = Vec2::new(
                    c * (m.sinh() * mp * ct - m.cosh() * st),
                    c * (m.cosh() * mp * st + m.sinh() * ct),
                );
                rotate(base.theta, local)
            }
            BoundaryShape::PolarGraph { rho, .. } => {
                let r = rho.eval(t);
                let rp = rho.derivative().eval(t);
                let (st, ct) = t.sin_cos();
                Vec2::new(rp * ct - r * st, rp * st + r * ct)
            }
            BoundaryShape::SampledCurve { x, y } => {
                Vec2::new(x.derivative().eval(t), y.derivative().eval(t))
            }
        }
    }

    /// γ''(t), analytic per variant.
    pub fn second_derivative(&self, t: f64) -> Vec2 {
        match &self.shape {
            BoundaryShape::Ellipse(e) => {
                let local = Vec2::new(-e.a() * t.cos(), -e.b() * t.sin());
                rotate(e.theta, local)
            }
            BoundaryShape::PerturbedEllipse { base, mu } => {
                let m = base.mu0() + mu.eval(t);
                let d1 = mu.derivative();
                let mp = d1.eval(t);
                let mpp = d1.derivative().eval(t);
                let c = base.c();
                let (st, ct) = t.sin_cos();
                let (shm, chm) = (m.sinh(), m.cosh());
                let local = Vec2::new(
                    c * (chm * (mp * mp - 1.0) * ct + shm * (mpp * ct - 2.0 * mp * st)),
                    c * (shm * (mp * mp - 1.0) * st + chm * (mpp * st + 2.0 * mp * ct)),
                );
                rotate(base.theta, local)
            }
            BoundaryShape::PolarGraph { rho, .. } => {
                let r = rho.eval(t);
                let d1 = rho.derivative();
                let rp = d1.eval(t);
                let rpp = d1.derivative().eval(t);
                let (st, ct) = t.sin_cos();
                Vec2::new(
                    (rpp - r) * ct - 2.0 * rp * st,
                    (rpp - r) * st + 2.0 * rp * ct,
                )
            }
            BoundaryShape::SampledCurve { x, y } => Vec2::new(
                x.derivative().derivative().eval(t),
                y.derivative().derivative().eval(t),
            ),
        }
    }

    pub fn unit_tangent(&self, t: f64) -> Vec2 {
        let d = self.derivative(t);
        d / d.norm()
    }

    /// Signed curvature κ(t) = [γ', γ'']/|γ'|³ (> 0 for counterclockwise
    /// convex boundaries).
    pub fn curvature(&self, t: f64) -> f64 {
        let d1 = self.derivative(t);
        let d2 = self.second_derivative(t);
        (d1.x * d2.y - d1.y * d2.x) / d1.norm().powi(3)
    }

    fn curvature_radius(&self, t: f64) -> f64 {
        1.0 / self.curvature(t)
    }

    /// Arc length from t=0 to t (t in ℝ, winding adds whole perimeters).
    pub fn s_of_t(&self, t: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let wind = (t / two_pi).floor();
        let tr = t - wind * two_pi;
        let h = two_pi / TABLE_N as f64;
        let i = ((tr / h) as usize).min(TABLE_N - 1);
        let base = self.arc_table[i];
        let extra = numerics::gk15(&|u: f64| self.derivative(u).norm(), i as f64 * h, tr);
        wind * self.perimeter + base + extra
    }

    /// Inverse of `s_of_t`.
    pub fn t_of_s(&self, s: f64) -> f64 {
        let wind = (s / self.perimeter).floor();
        let sr = s - wind * self.perimeter;
        let idx = match self
            .arc_table
            .binary_search_by(|probe| probe.partial_cmp(&sr).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
        .min(TABLE_N - 1);
        let h = 2.0 * std::f64::consts::PI / TABLE_N as f64;
        let (lo, hi) = (idx as f64 * h, (idx + 1) as f64 * h);
        let t = if sr <= self.arc_table[idx] {
            lo
        } else if sr >= self.arc_table[idx + 1] {
            hi
        } else {
            numerics::newton_bisect(
                &|t: f64| (self.s_of_t(t) - sr, self.derivative(t).norm()),
                lo,
                hi,
                1e-14,
                60,
            )
        };
        t + wind * 2.0 * std::f64::consts::PI
    }

    /// Reduce an arc-length coordinate into [0, perimeter).
    pub fn reduce_s(&self, s: f64) -> f64 {
        s.rem_euclid(self.perimeter)
    }

    /// Validated phase point with s reduced modulo the perimeter.
    pub fn phase_point(&self, s: f64, phi: f64) -> Result<PhasePoint, BilliardError> {
        if !(phi > GLANCING_TOL && phi < std::f64::consts::PI - GLANCING_TOL) {
            return Err(BilliardError::GlancingRay { phi });
        }
        Ok(PhasePoint {
            s: self.reduce_s(s),
            phi,
        })
    }
}

fn rotate(theta: f64, v: Vec2) -> Vec2 {
    let (s, c) = theta.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Point of the phase cylinder: arc length s (mod perimeter) and reflection
/// angle φ ∈ (0, π) above the positive tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub s: f64,
    pub phi: f64,
}

impl PhasePoint {
    /// Twist coordinates (x, y) = (s, −cos φ).
    pub fn twist(&self) -> (f64, f64) {
        (self.s, -self.phi.cos())
    }
}

/// One billiard trajectory segment.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    /// n+1 phase points: start plus each bounce.
    pub points: Vec<PhasePoint>,
    /// chord_lengths[i] = ℓ(points[i].s, points[i+1].s)
    pub chord_lengths: Vec<f64>,
    /// average boundary-parameter advance per bounce, as a fraction of 2π
    pub rotation_estimate: f64,
    pub total_length: f64,
}

/// Generating function ℓ(s, s2) = ‖γ(s) − γ(s2)‖.
pub fn generating_ell(d: &DomainBoundary, s: f64, s2: f64) -> Result<f64, BilliardError> {
    let sep = (s - s2).rem_euclid(d.perimeter());
    let sep = sep.min(d.perimeter() - sep);
    if sep < 1e-12 * d.perimeter() {
        return Err(BilliardError::DegenerateChord { s, s2 });
    }
    let p1 = d.position(d.t_of_s(s));
    let p2 = d.position(d.t_of_s(s2));
    Ok((p1 - p2).norm())
}

/// Outcome of one ray shot: next parameter and the chord it traversed.
struct RayHit {
    t_next: f64,
    chord: f64,
    direction: Vec2,
}

/// Find the next boundary intersection of the ray leaving γ(t0) at angle phi
/// above the tangent. The signed side function g(t) = [dir, γ(t) − P] is
/// negative just after t0 and positive just before t0 + 2π with exactly one
/// crossing for a strictly convex boundary.
fn shoot_ray(d: &DomainBoundary, t0: f64, phi: f64) -> Result<RayHit, BilliardError> {
    let p0 = d.position(t0);
    let tang = d.unit_tangent(t0);
    let normal = Vec2::new(-tang.y, tang.x); // inward for ccw boundaries
    let (sphi, cphi) = phi.sin_cos();
    let dir = cphi * tang + sphi * normal;
    let g = |t: f64| -> f64 {
        let w = d.position(t) - p0;
        dir.x * w.y - dir.y * w.x
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    const COARSE: usize = 64;
    // first interior coarse node with g > 0 ends the bracket; if none, the
    // root hides in the last cell next to the trivial period root
    let mut lo = t0;
    let mut hi = t0 + two_pi;
    for j in 1..COARSE {
        let t = t0 + two_pi * j as f64 / COARSE as f64;
        if g(t) > 0.0 {
            hi = t;
            lo = t0 + two_pi * (j - 1) as f64 / COARSE as f64;
            break;
        }
    }
    if hi == t0 + two_pi {
        lo = t0 + two_pi * (COARSE - 1) as f64 / COARSE as f64;
    }
    // both t0 and t0 + 2π are trivial roots of g; walk the offending end
    // inward by halving until the bracket has a strict sign change
    if lo == t0 {
        let mut eps = (hi - t0) * 0.5;
        let mut found = false;
        for _ in 0..60 {
            if g(t0 + eps) < 0.0 {
                lo = t0 + eps;
                found = true;
                break;
            }
            eps *= 0.5;
        }
        if !found {
            return Err(BilliardError::RootFindFailure(format!(
                "could not isolate the exit root above t0 = {t0}, phi = {phi}"
            )));
        }
    }
    if g(hi) <= 0.0 {
        let top = t0 + two_pi;
        let mut eps = (top - lo) * 0.5;
        let mut found = false;
        for _ in 0..60 {
            if g(top - eps) > 0.0 {
                hi = top - eps;
                found = true;
                break;
            }
            eps *= 0.5;
        }
        if !found {
            return Err(BilliardError::RootFindFailure(format!(
                "could not isolate the exit root below t0 + 2π, t0 = {t0}, phi = {phi}"
            )));
        }
    }
    let gp = |t: f64| -> f64 {
        let w = d.derivative(t);
        dir.x * w.y - dir.y * w.x
    };
    let t_next = numerics::newton_bisect(&|t: f64| (g(t), gp(t)), lo, hi, 1e-14, 100);
    let chord = (d.position(t_next) - p0).norm();
    Ok(RayHit {
        t_next,
        chord,
        direction: dir,
    })
}

/// One application of the billiard map.
pub fn billiard_step(d: &DomainBoundary, p: &PhasePoint) -> Result<PhasePoint, BilliardError> {
    let (next, _) = billiard_step_t(d, p)?;
    Ok(next)
}

/// Billiard step that also reports the parameter advance Δt ∈ (0, 2π), used
/// for winding bookkeeping.
fn billiard_step_t(
    d: &DomainBoundary,
    p: &PhasePoint,
) -> Result<(PhasePoint, f64), BilliardError> {
    if !(p.phi > GLANCING_TOL && p.phi < std::f64::consts::PI - GLANCING_TOL) {
        return Err(BilliardError::GlancingRay { phi: p.phi });
    }
    let t0 = d.t_of_s(p.s);
    let hit = shoot_ray(d, t0, p.phi)?;
    let t_new = hit.t_next;
    let tang = d.unit_tangent(t_new);
    let cos_phi = (hit.direction.dot(&tang)).clamp(-1.0, 1.0);
    let phi_new = cos_phi.acos();
    let s_new = d.reduce_s(d.s_of_t(t_new));
    Ok((
        PhasePoint {
            s: s_new,
            phi: phi_new,
        },
        t_new - t0,
    ))
}

/// Iterate the billiard map n times, recording the orbit.
pub fn iterate(d: &DomainBoundary, p: &PhasePoint, n: usize) -> Result<OrbitRecord, BilliardError> {
    assert!(n >= 1);
    let mut points = Vec::with_capacity(n + 1);
    let mut chords = Vec::with_capacity(n);
    points.push(*p);
    let mut current = *p;
    let mut winding = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let t0 = d.t_of_s(current.s);
        let hit = shoot_ray(d, t0, current.phi)?;
        let tang = d.unit_tangent(hit.t_next);
        let phi_new = (hit.direction.dot(&tang)).clamp(-1.0, 1.0).acos();
        if !(phi_new > GLANCING_TOL && phi_new < std::f64::consts::PI - GLANCING_TOL) {
            return Err(BilliardError::GlancingRay { phi: phi_new });
        }
        current = PhasePoint {
            s: d.reduce_s(d.s_of_t(hit.t_next)),
            phi: phi_new,
        };
        winding += hit.t_next - t0;
        total += hit.chord;
        chords.push(hit.chord);
        points.push(current);
    }
    Ok(OrbitRecord {
        points,
        chord_lengths: chords,
        rotation_estimate: winding / (n as f64 * 2.0 * std::f64::consts::PI),
        total_length: total,
    })
}

/// Lazutkin coordinates of a phase point:
/// x = C⁻¹ ∫₀^s ρ^{-2/3} ds′ and y = 4 C⁻¹ ρ^{1/3} sin(φ/2), with
/// C = ∮ ρ^{-2/3} ds. Near y = 0 the conjugated map is x ↦ x + y + O(y³).
pub fn lazutkin_coords(d: &DomainBoundary, p: &PhasePoint) -> (f64, f64) {
    let t = d.t_of_s(d.reduce_s(p.s));
    let two_pi = 2.0 * std::f64::consts::PI;
    let tr = t.rem_euclid(two_pi);
    let h = two_pi / TABLE_N as f64;
    let i = ((tr / h) as usize).min(TABLE_N - 1);
    let extra = numerics::gk15(
        &|u: f64| d.curvature_radius(u).powf(-2.0 / 3.0) * d.derivative(u).norm(),
        i as f64 * h,
        tr,
    );
    let x = (d.lazutkin_table[i] + extra) / d.lazutkin_total;
    let y = 4.0 / d.lazutkin_total * d.curvature_radius(tr).powf(1.0 / 3.0) * (p.phi / 2.0).sin();
    (x, y)
}
