use ma_plate_core::discretization::{make_grid, DomainKind, ScalarField};
use ma_plate_core::elasticity3d::QuadraticForm3;
use ma_plate_core::harness::{lower_bound_gap, manufacture, run_scaling, ScalingExperiment};
use ma_plate_core::poly::{zero_mat3, Mat3Poly, Poly2};

fn half_r2(s: f64) -> Poly2 {
    Poly2::from_terms(&[(0.5 * s, 2, 0), (0.5 * s, 0, 2)])
}

fn hs() -> Vec<f64> {
    (3..=7).map(|k| 2f64.powi(-k)).collect()
}

#[test]
fn manufactured_paraboloid_scales_like_gamma_plus_two() {
    let g = make_grid(DomainKind::UnitDisk, 65).unwrap();
    let w = [Poly2::zero(), Poly2::zero()];
    let spec = manufacture(&half_r2(1.0), &w, zero_mat3(), 1.5, &g).unwrap();
    let exp = ScalingExperiment::new(spec, half_r2(1.0), w, QuadraticForm3::default(), hs(), g, 3).unwrap();
    let r = run_scaling(&exp).unwrap();
    assert!((r.slope.unwrap() - 3.5).abs() < 0.1);
    assert!(r.limit_rel_error().unwrap() < 1e-3);
    assert_eq!(r.verdict(0.1, 0.2), "ok");
    // ratios decrease monotonically toward the limit
    assert!(r.rows.windows(2).all(|p| p[1].ratio < p[0].ratio));
}

#[test]
fn incompatible_bending_keeps_ratio_bounded_below() {
    let g = make_grid(DomainKind::UnitDisk, 65).unwrap();
    let w = [Poly2::zero(), Poly2::zero()];
    let mut b: Mat3Poly = zero_mat3();
    b[0][1] = Poly2::x1();
    b[1][0] = Poly2::x1();
    let spec = manufacture(&half_r2(1.0), &w, b, 1.5, &g).unwrap();
    let exp = ScalingExperiment::new(spec, half_r2(1.0), w, QuadraticForm3::default(), hs(), g, 3).unwrap();
    let r = run_scaling(&exp).unwrap();
    assert!(r.min_ratio > 0.5 * r.expected_limit && r.expected_limit > 0.1);
}

#[test]
fn zero_limit_ratio_decays() {
    // B_g = −∇²v: the limit energy vanishes
    let g = make_grid(DomainKind::UnitDisk, 65).unwrap();
    let w = [Poly2::zero(), Poly2::zero()];
    let mut b = zero_mat3();
    b[0][0] = Poly2::constant(-1.0);
    b[1][1] = Poly2::constant(-1.0);
    let spec = manufacture(&half_r2(1.0), &w, b, 1.5, &g).unwrap();
    let exp = ScalingExperiment::new(spec, half_r2(1.0), w, QuadraticForm3::default(), hs(), g, 3).unwrap();
    let r = run_scaling(&exp).unwrap();
    assert_eq!(r.expected_limit, 0.0);
    assert_eq!(r.verdict(0.1, 0.2), "zero limit: ratio decreasing to 0");
}

#[test]
fn gap_follows_compatibility() {
    let g = make_grid(DomainKind::UnitDisk, 33).unwrap();
    let w = [Poly2::zero(), Poly2::zero()];
    let cands = |s: f64| {
        vec![
            ("+".to_string(), ScalarField::from_fn(&g, |x| 0.5 * s * (x[0] * x[0] + x[1] * x[1]))),
            ("-".to_string(), ScalarField::from_fn(&g, |x| -0.5 * s * (x[0] * x[0] + x[1] * x[1]))),
        ]
    };
    let q = QuadraticForm3::default();

    // B = Id with f = 1: the candidate −r²/2 has ∇²v = −B
    let mut b = zero_mat3();
    b[0][0] = Poly2::constant(1.0);
    b[1][1] = Poly2::constant(1.0);
    let spec = manufacture(&half_r2(1.0), &w, b, 1.5, &g).unwrap();
    let rep = lower_bound_gap(&spec, &cands(1.0), &q, 1e-8).unwrap();
    assert!(rep.gap < 1e-12 && rep.best == "-" && rep.compat.compatible() && rep.consistent);

    // no bending prestrain: det B = 0 ≠ 1, every candidate pays
    let spec = manufacture(&half_r2(1.0), &w, zero_mat3(), 1.5, &g).unwrap();
    let rep = lower_bound_gap(&spec, &cands(1.0), &q, 1e-8).unwrap();
    assert!(rep.gap > 0.1 && !rep.compat.compatible() && rep.consistent);
    assert_eq!(rep.compat.verdict(), "violated(second)");
}
