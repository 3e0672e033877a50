mod common;

use billiard::billiard_core::{
    billiard_step, generating_ell, iterate, lazutkin_coords, DomainBoundary, PhasePoint,
};
use billiard::elliptic_geometry::{
    action_angle_boundary, caustic_from_lambda, chord_caustic_gap, EllipseParams,
    PeriodicFunction, Vec2,
};

fn ellipse_e05() -> (EllipseParams, DomainBoundary) {
    let e = EllipseParams::from_axes(0.0, 0.0, 1.0, (3.0_f64).sqrt() / 2.0, 0.0).unwrap();
    let d = DomainBoundary::ellipse(e).unwrap();
    (e, d)
}

/// Phase point whose outgoing chord runs from the action-angle point θ to
/// the action-angle point θ + 2πω, hence is tangent to the caustic.
fn caustic_phase_point(
    e: &EllipseParams,
    d: &DomainBoundary,
    lambda: f64,
    theta0: f64,
) -> PhasePoint {
    let caustic = caustic_from_lambda(e, lambda).unwrap();
    let (_, phi0) = action_angle_boundary(e, &caustic, theta0);
    let (_, phi1) = action_angle_boundary(
        e,
        &caustic,
        theta0 + 2.0 * std::f64::consts::PI * caustic.omega_lambda,
    );
    let p0 = e.boundary_point(phi0);
    let p1 = e.boundary_point(phi1);
    let u = (p1 - p0).normalize();
    let tang = d.unit_tangent(phi0);
    let phi = u.dot(&tang).clamp(-1.0, 1.0).acos();
    PhasePoint {
        s: d.reduce_s(d.s_of_t(phi0)),
        phi,
    }
}

#[test]
fn generating_partials_match_reflection_angles() {
    let (_, d) = ellipse_e05();
    let (s1, s2) = (0.41, 2.73);
    let t1 = d.t_of_s(s1);
    let t2 = d.t_of_s(s2);
    let p1 = d.position(t1);
    let p2 = d.position(t2);
    let u = (p2 - p1).normalize();
    let cos_phi = u.dot(&d.unit_tangent(t1));
    let cos_phi2 = u.dot(&d.unit_tangent(t2));
    let h = 1e-6;
    let dl_ds1 = (generating_ell(&d, s1 + h, s2).unwrap() - generating_ell(&d, s1 - h, s2).unwrap())
        / (2.0 * h);
    let dl_ds2 = (generating_ell(&d, s1, s2 + h).unwrap() - generating_ell(&d, s1, s2 - h).unwrap())
        / (2.0 * h);
    assert!(
        (dl_ds1 + cos_phi).abs() < 1e-9,
        "d ell/d s = {dl_ds1}, -cos phi = {}",
        -cos_phi
    );
    assert!(
        (dl_ds2 - cos_phi2).abs() < 1e-9,
        "d ell/d s2 = {dl_ds2}, cos phi2 = {cos_phi2}"
    );
}

#[test]
fn chords_stay_tangent_to_confocal_caustic() {
    let (e, d) = ellipse_e05();
    let b = e.b();
    for frac in [0.3, 0.6, 0.9] {
        let lambda = frac * b;
        let p = caustic_phase_point(&e, &d, lambda, 0.313);
        let orbit = iterate(&d, &p, 200).unwrap();
        let mut worst = 0.0_f64;
        for w in orbit.points.windows(2) {
            let a = d.position(d.t_of_s(w[0].s));
            let bb = d.position(d.t_of_s(w[1].s));
            worst = worst.max(chord_caustic_gap(&e, lambda, a, bb));
        }
        assert!(worst <= 1e-8, "lambda = {frac} b: worst gap {worst}");
    }
}

#[test]
fn step_lands_on_action_angle_prediction() {
    let (e, d) = ellipse_e05();
    let lambda = 0.5 * e.b();
    let caustic = caustic_from_lambda(&e, lambda).unwrap();
    let theta0 = 0.77;
    let p = caustic_phase_point(&e, &d, lambda, theta0);
    let q = billiard_step(&d, &p).unwrap();
    let (_, phi_pred) = action_angle_boundary(
        &e,
        &caustic,
        theta0 + 2.0 * std::f64::consts::PI * caustic.omega_lambda,
    );
    let s_pred = d.reduce_s(d.s_of_t(phi_pred));
    let diff = (q.s - s_pred).abs();
    let diff = diff.min(d.perimeter() - diff);
    assert!(diff < 1e-7, "arc-length defect {diff}");
}

#[test]
fn rotation_estimate_converges_to_caustic_rotation_number() {
    let (e, d) = ellipse_e05();
    let lambda = 0.5 * e.b();
    let caustic = caustic_from_lambda(&e, lambda).unwrap();
    let p = caustic_phase_point(&e, &d, lambda, 0.0);
    let orbit = iterate(&d, &p, 2000).unwrap();
    let err = (orbit.rotation_estimate - caustic.omega_lambda).abs();
    assert!(err < 5e-5, "rotation estimate off by {err}");
}

#[test]
fn twist_is_monotone() {
    // ∂s'/∂y > 0 with y = -cos φ
    let (_, d) = ellipse_e05();
    let h = 1e-6;
    for (s, phi) in [(0.3_f64, 0.9_f64), (1.9, 1.8), (4.0, 2.4)] {
        let y = -phi.cos();
        let step_s = |y: f64| -> f64 {
            let p = PhasePoint {
                s,
                phi: (-y).acos(),
            };
            billiard_step(&d, &p).unwrap().s
        };
        let mut ds = step_s(y + h) - step_s(y - h);
        let per = d.perimeter();
        if ds > 0.5 * per {
            ds -= per;
        }
        if ds < -0.5 * per {
            ds += per;
        }
        assert!(ds / (2.0 * h) > 0.0, "twist fails at (s, phi) = ({s}, {phi})");
    }
}

#[test]
fn step_preserves_phase_area() {
    // the map is exact symplectic in (s, y = -cos φ): FD Jacobian det = 1
    let base = EllipseParams::from_axes(0.0, 0.0, 1.0, 0.8, 0.0).unwrap();
    let mu = PeriodicFunction::new(0.0, vec![0.0, 0.01, 0.004], vec![0.0, 0.0, 0.006]);
    let shapes = [
        DomainBoundary::ellipse(base).unwrap(),
        DomainBoundary::perturbed_ellipse(base, mu).unwrap(),
    ];
    let h = 1e-5;
    for d in &shapes {
        for (s, phi) in [(0.5_f64, 1.0_f64), (2.7, 2.1)] {
            let y0 = -phi.cos();
            let per = d.perimeter();
            let step = |s: f64, y: f64| -> (f64, f64) {
                let p = PhasePoint {
                    s: d.reduce_s(s),
                    phi: (-y).acos(),
                };
                let q = billiard_step(d, &p).unwrap();
                (q.s, -q.phi.cos())
            };
            let unwrap_near = |val: f64, anchor: f64| -> f64 {
                let mut v = val;
                while v - anchor > 0.5 * per {
                    v -= per;
                }
                while v - anchor < -0.5 * per {
                    v += per;
                }
                v
            };
            let (s0p, _) = step(s, y0);
            let (spp, ypp) = step(s + h, y0);
            let (spm, ypm) = step(s - h, y0);
            let (syp, yyp) = step(s, y0 + h);
            let (sym, yym) = step(s, y0 - h);
            let ds_ds = (unwrap_near(spp, s0p) - unwrap_near(spm, s0p)) / (2.0 * h);
            let dy_ds = (ypp - ypm) / (2.0 * h);
            let ds_dy = (unwrap_near(syp, s0p) - unwrap_near(sym, s0p)) / (2.0 * h);
            let dy_dy = (yyp - yym) / (2.0 * h);
            let det = ds_ds * dy_dy - ds_dy * dy_ds;
            assert!(
                (det - 1.0).abs() < 1e-5,
                "det = {det} at (s, phi) = ({s}, {phi})"
            );
        }
    }
}

#[test]
fn lazutkin_remainder_is_cubic_on_circle() {
    // exact closed form: x' - x - y = (2/π)(φ/2 - sin(φ/2))
    let d = DomainBoundary::ellipse(EllipseParams::circle(0.0, 0.0, 1.0).unwrap()).unwrap();
    for phi in [0.4, 0.1, 0.025] {
        let p = d.phase_point(0.9, phi).unwrap();
        let (x, y) = lazutkin_coords(&d, &p);
        let q = billiard_step(&d, &p).unwrap();
        let (xq, _) = lazutkin_coords(&d, &q);
        let mut dx = xq - x;
        if dx < 0.0 {
            dx += 1.0;
        }
        let rem = dx - y;
        let expect = 2.0 / std::f64::consts::PI * (phi / 2.0 - (phi / 2.0).sin());
        assert!(
            (rem - expect).abs() < 1e-10,
            "phi = {phi}: remainder {rem}, closed form {expect}"
        );
    }
}

#[test]
fn lazutkin_remainder_cubic_scaling_on_ellipse() {
    let (_, d) = ellipse_e05();
    let mut logs: Vec<(f64, f64)> = Vec::new();
    for k in 0..6 {
        let phi = 0.4 / 2.0_f64.powi(k);
        let p = d.phase_point(0.7, phi).unwrap();
        let (x, y) = lazutkin_coords(&d, &p);
        let q = billiard_step(&d, &p).unwrap();
        let (xq, _) = lazutkin_coords(&d, &q);
        let mut dx = xq - x;
        if dx < 0.0 {
            dx += 1.0;
        }
        let rem = (dx - y).abs();
        assert!(rem > 1e-13, "remainder at noise floor, cannot fit slope");
        logs.push((y.ln(), rem.ln()));
    }
    let n = logs.len() as f64;
    let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (sxx, sxy): (f64, f64) = logs
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!(slope >= 2.7, "log-log slope {slope} < 2.7");
}

#[test]
fn polar_graph_step_matches_ellipse_variant() {
    // the same ellipse built as a polar graph about its center produces the
    // same billiard map in world coordinates
    let (a, b) = (1.0, 0.75);
    let e = EllipseParams::from_axes(0.0, 0.0, a, b, 0.0).unwrap();
    let de = DomainBoundary::ellipse(e).unwrap();
    let n = 512;
    let rho = |ang: f64| -> f64 {
        // support radius of the axis-aligned ellipse along direction ang
        let (s, c) = ang.sin_cos();
        1.0 / ((c / a).powi(2) + (s / b).powi(2)).sqrt()
    };
    let vals: Vec<f64> = (0..n)
        .map(|i| rho(2.0 * std::f64::consts::PI * i as f64 / n as f64))
        .collect();
    let dp = DomainBoundary::polar_graph(
        PeriodicFunction::from_samples(&vals),
        Vec2::new(0.0, 0.0),
    )
    .unwrap();
    // same world starting point and direction on both representations
    let t_e = 0.9_f64;
    let p_world = e.boundary_point(t_e);
    let ang = p_world.y.atan2(p_world.x).rem_euclid(2.0 * std::f64::consts::PI);
    let phi = 1.2;
    let pe = PhasePoint {
        s: de.reduce_s(de.s_of_t(t_e)),
        phi,
    };
    // the tangent direction agrees, so equal phi means equal rays
    let tangent_gap = (de.unit_tangent(t_e) - dp.unit_tangent(ang)).norm();
    assert!(tangent_gap < 1e-9, "tangent mismatch {tangent_gap}");
    let pp = PhasePoint {
        s: dp.reduce_s(dp.s_of_t(ang)),
        phi,
    };
    let qe = billiard_step(&de, &pe).unwrap();
    let qp = billiard_step(&dp, &pp).unwrap();
    let we = de.position(de.t_of_s(qe.s));
    let wp = dp.position(dp.t_of_s(qp.s));
    assert!((we - wp).norm() < 1e-8, "landing points differ");
    assert!((qe.phi - qp.phi).abs() < 1e-8, "angles differ");
}
