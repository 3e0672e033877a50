use std::time::Instant;

use billiard::adapted_basis::elliptic_deviation;
use billiard::als_flow::{
    affine_curvature, evolve, iso_ratio, moment_ellipse, monotonicity_experiment, pde_residual,
    FlowState, FlowStatus, Normalization, SampledCurve, CONIC_ISO_RATIO,
};
use billiard::elliptic_geometry::{EllipseParams, PeriodicFunction, Vec2};

fn unit_circle(n: usize) -> SampledCurve {
    SampledCurve::from_ellipse(&EllipseParams::circle(0.0, 0.0, 1.0).unwrap(), n).unwrap()
}

fn polar(coeffs: &[(usize, f64, f64)], n: usize) -> SampledCurve {
    let top = coeffs.iter().map(|&(j, _, _)| j).max().unwrap();
    let mut a = vec![0.0; top];
    let mut b = vec![0.0; top];
    for &(j, aj, bj) in coeffs {
        a[j - 1] = aj;
        b[j - 1] = bj;
    }
    let rho = PeriodicFunction::new(1.0, a, b);
    SampledCurve::from_polar(&rho, Vec2::new(0.0, 0.0), n).unwrap()
}

fn mode_amp(points: &[Vec2], mode: usize, degree: usize) -> f64 {
    let e = moment_ellipse(&SampledCurve::new(points.to_vec()).unwrap()).unwrap();
    let mut angles = Vec::new();
    let mut radii = Vec::new();
    for p in points {
        let d = *p - e.center();
        angles.push(d.y.atan2(d.x));
        radii.push(d.norm());
    }
    let fit = PeriodicFunction::fit_scattered(&angles, &radii, degree).unwrap();
    fit.a(mode).hypot(fit.b(mode))
}

#[test]
fn m1_circle_law() {
    let t0 = Instant::now();
    let state = FlowState::from_curve(unit_circle(64)).unwrap();
    let (traj, status) = evolve(&state, 0.025, 15, Normalization::None).unwrap();
    let mut worst_nu = 0.0f64;
    let mut worst_area = 0.0f64;
    for st in &traj {
        let law = 3.0 / (3.0 - 4.0 * st.time);
        let nu = st.nu_samples.iter().cloned().fold(0.0f64, f64::max);
        worst_nu = worst_nu.max((nu / law - 1.0).abs());
        let area_law = std::f64::consts::PI * (1.0 - 4.0 * st.time / 3.0).powf(1.5);
        worst_area = worst_area.max((st.area / area_law - 1.0).abs());
    }
    eprintln!(
        "M1 circle law: status {status:?} worst nu rel {worst_nu:.3e} worst area rel {worst_area:.3e} elapsed {:?}",
        t0.elapsed()
    );
}

#[test]
fn m2_mode_rates() {
    let t0 = Instant::now();
    let eps = 1e-3;
    let curve = polar(&[(5, eps, 0.0)], 128);
    let state = FlowState::from_curve(curve).unwrap();
    let horizon = 1e-3;

    for (label, norm, expect) in [
        ("radius unnormalized", Normalization::None, -8.0),
        ("radius fixed-area", Normalization::FixedArea, -7.0),
    ] {
        let (traj, _) = evolve(&state, horizon / 4.0, 4, norm).unwrap();
        let a0 = mode_amp(&traj[0].curve.points, 5, 15);
        let a1 = mode_amp(&traj[4].curve.points, 5, 15);
        let rate = (a1 / a0).ln() / horizon;
        eprintln!("M2 {label}: amp {a0:.6e} -> {a1:.6e} rate {rate:.5} expect {expect}");
    }

    let (traj, _) = evolve(&state, horizon / 4.0, 4, Normalization::None).unwrap();
    let spread = |st: &FlowState| {
        let hi = st.nu_samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = st.nu_samples.iter().cloned().fold(f64::INFINITY, f64::min);
        0.5 * (hi - lo)
    };
    let d0 = spread(&traj[0]);
    let d1 = spread(&traj[4]);
    // unnormalized nu drifts as a whole; compare against the shifting mean
    let mean = |st: &FlowState| st.nu_samples.iter().sum::<f64>() / st.nu_samples.len() as f64;
    let rate = ((d1 / mean(&traj[4])) / (d0 / mean(&traj[0]))).ln() / horizon;
    let raw = (d1 / d0).ln() / horizon;
    eprintln!(
        "M2 curvature spread: {d0:.6e} -> {d1:.6e} raw rate {raw:.5} mean-relative {rate:.5} expect -17/3 = {:.5}",
        -17.0 / 3.0
    );
    eprintln!("M2 transfer: nu spread {d0:.5e} vs 168*eps = {:.5e}", 168.0 * eps);
    eprintln!("M2 elapsed {:?}", t0.elapsed());
}

#[test]
fn m3_n_doubling() {
    let t0 = Instant::now();
    let mut finals = Vec::new();
    for n in [64usize, 128] {
        let state = FlowState::from_curve(polar(&[(3, 0.02, 0.0)], n)).unwrap();
        let (traj, status) = evolve(&state, 0.02, 5, Normalization::FixedArea).unwrap();
        assert_eq!(status, FlowStatus::Completed);
        let last = traj.last().unwrap();
        let numax = last.nu_samples.iter().cloned().fold(0.0f64, f64::max);
        finals.push((last.iso_ratio, last.affine_perimeter, numax, last.area));
    }
    let (i0, l0, n0, a0) = finals[0];
    let (i1, l1, n1, a1) = finals[1];
    eprintln!(
        "M3 doubling rel diffs: iso {:.3e} perim {:.3e} numax {:.3e} area {:.3e} elapsed {:?}",
        (i0 / i1 - 1.0).abs(),
        (l0 / l1 - 1.0).abs(),
        (n0 / n1 - 1.0).abs(),
        (a0 / a1 - 1.0).abs(),
        t0.elapsed()
    );
}

#[test]
fn m4_gap_monotone() {
    let t0 = Instant::now();
    let curve = polar(&[(3, 0.05, 0.0), (4, 0.0, 0.02)], 128);
    for norm in [Normalization::FixedArea, Normalization::None] {
        let state = FlowState::from_curve(curve.clone()).unwrap();
        let (traj, status) = evolve(&state, 0.01, 20, norm).unwrap();
        let gaps: Vec<f64> = traj.iter().map(|s| CONIC_ISO_RATIO - s.iso_ratio).collect();
        let mut monotone = true;
        let mut worst = f64::INFINITY;
        for w in gaps.windows(2) {
            if w[1] >= w[0] {
                monotone = false;
            }
            worst = worst.min(w[0] - w[1]);
        }
        eprintln!(
            "M4 {norm:?}: status {status:?} gap {:.6e} -> {:.6e} monotone {monotone} min step {worst:.3e}",
            gaps[0],
            gaps[gaps.len() - 1]
        );
    }
    eprintln!("M4 elapsed {:?}", t0.elapsed());
}

#[test]
fn m5_ellipse_fixed_point() {
    let t0 = Instant::now();
    let e = EllipseParams::from_axes(0.2, -0.1, 1.3, 0.7, 0.4).unwrap();
    let state = FlowState::from_curve(SampledCurve::from_ellipse(&e, 96).unwrap()).unwrap();
    let (traj, status) = evolve(&state, 0.02, 5, Normalization::FixedArea).unwrap();
    let mut wa = 0.0f64;
    let mut wb = 0.0f64;
    let mut wi = 0.0f64;
    for st in &traj {
        let f = moment_ellipse(&st.curve).unwrap();
        wa = wa.max((f.a() - e.a()).abs());
        wb = wb.max((f.b() - e.b()).abs());
        wi = wi.max((st.iso_ratio - CONIC_ISO_RATIO).abs());
    }
    eprintln!(
        "M5 ellipse fixed point: status {status:?} |da| {wa:.3e} |db| {wb:.3e} |iso-8pi2| {wi:.3e} elapsed {:?}",
        t0.elapsed()
    );
}

#[test]
fn m6_blowup_truncation() {
    let t0 = Instant::now();
    let state = FlowState::from_curve(unit_circle(64)).unwrap();
    let (traj, status) = evolve(&state, 0.1, 10, Normalization::None).unwrap();
    eprintln!(
        "M6 blowup: status {status:?} outputs {} last t {:.4} last numax {:.3} elapsed {:?}",
        traj.len(),
        traj.last().unwrap().time,
        traj.last().unwrap().nu_samples.iter().cloned().fold(0.0f64, f64::max),
        t0.elapsed()
    );
}

#[test]
fn m7_residual_halving() {
    let t0 = Instant::now();
    let state = FlowState::from_curve(polar(&[(3, 0.03, 0.0)], 96)).unwrap();
    let (t1, _) = evolve(&state, 1e-3, 1, Normalization::None).unwrap();
    let (t2, _) = evolve(&state, 5e-4, 1, Normalization::None).unwrap();
    let r1 = pde_residual(&t1[0], &t1[1]).unwrap();
    let r2 = pde_residual(&t2[0], &t2[1]).unwrap();
    eprintln!(
        "M7 residual: r(1e-3) {r1:.6e} r(5e-4) {r2:.6e} ratio {:.3} elapsed {:?}",
        r1 / r2,
        t0.elapsed()
    );
}

#[test]
fn m8_monotonicity_experiment() {
    let t0 = Instant::now();
    let samples = monotonicity_experiment(5, 1e-3, 1e-3).unwrap();
    let mut monotone = true;
    for w in samples.windows(2) {
        if w[1].delta >= w[0].delta {
            monotone = false;
        }
    }
    let res_rate = (samples.last().unwrap().resonant[0] / samples[0].resonant[0]).ln() / 1e-3;
    eprintln!(
        "M8 q=5: {} samples delta {:.6e} -> {:.6e} monotone {monotone} resonant[0] {:.4e} -> {:.4e} rate {res_rate:.4}",
        samples.len(),
        samples[0].delta,
        samples.last().unwrap().delta,
        samples[0].resonant[0],
        samples.last().unwrap().resonant[0],
    );
    eprintln!("M8 elapsed for eps=1e-3 {:?}", t0.elapsed());
    let t1 = Instant::now();
    let flat = monotonicity_experiment(5, 0.0, 1e-3).unwrap();
    let worst = flat.iter().map(|s| s.delta.abs()).fold(0.0f64, f64::max);
    eprintln!("M8 eps=0: worst |delta| {worst:.3e} elapsed {:?}", t1.elapsed());
}

#[test]
fn m9_cross_module() {
    let t0 = Instant::now();
    let e = EllipseParams::from_axes(0.2, -0.1, 1.2, 0.8, 0.3).unwrap();
    for (label, curve) in [
        ("ellipse", SampledCurve::from_ellipse(&e, 96).unwrap()),
        ("gentle bump", polar(&[(3, 0.03, 0.0)], 96)),
    ] {
        let iso = iso_ratio(&curve).unwrap();
        let fit = moment_ellipse(&curve).unwrap();
        let resid = curve
            .points
            .iter()
            .map(|&p| elliptic_deviation(&fit, p).1.abs())
            .fold(0.0f64, f64::max);
        eprintln!(
            "M9 {label}: gap {:.3e} fit residual {:.3e}",
            CONIC_ISO_RATIO - iso,
            resid
        );
    }
    let nu = affine_curvature(&unit_circle(64)).unwrap();
    eprintln!("M9 sanity nu[0] {:.6} elapsed {:?}", nu[0], t0.elapsed());
}
