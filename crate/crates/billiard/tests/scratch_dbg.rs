use billiard::als_flow::{evolve, FlowState, Normalization, SampledCurve};
use billiard::elliptic_geometry::{PeriodicFunction, Vec2};

#[test]
fn dbg_m4_entry() {
    let rho = PeriodicFunction::new(1.0, vec![0.0, 0.0, 0.05, 0.0], vec![0.0, 0.0, 0.0, 0.02]);
    let curve = SampledCurve::from_polar(&rho, Vec2::new(0.0, 0.0), 128).unwrap();
    eprintln!("=== from_curve ===");
    let state = FlowState::from_curve(curve).unwrap();
    eprintln!("=== evolve entry ===");
    let r = evolve(&state, 0.01, 1, Normalization::FixedArea);
    eprintln!("evolve result ok={} status={:?}", r.is_ok(), r.as_ref().map(|(_, s)| *s));
}
