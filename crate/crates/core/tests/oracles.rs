//! Values frozen from independent computations (closed forms, symbolic
//! algebra, adaptive scipy quadrature of the radial integrals).

use std::f64::consts::PI;

use approx::assert_relative_eq;
use ma_plate_core::discretization::{gauss_curvature_metric, make_grid, DomainKind, ScalarField, SymMatrixField};
use ma_plate_core::elasticity3d::{limit_energy_poly, QuadraticForm3};
use ma_plate_core::poly::{zero_mat3, Poly2};
use ma_plate_core::radial::{lambda_multiplier, radial_energy, radial_minimizer, RadialProfile};

#[test]
fn radial_energy_of_two_minus_r() {
    // 2π∫r(2−r)²/(2 − 2r/3) and 2π∫2r|log r|(2−r)
    let e = radial_energy(&RadialProfile::constraint(|r| 2.0 - r, 2001, &[]).unwrap()).unwrap();
    assert_relative_eq!(e.term_curvature, 3.6102742103019207, max_relative = 1e-8);
    assert_relative_eq!(e.term_log, 4.886921905584122, max_relative = 1e-8);
    assert_relative_eq!(e.total, 8.497196115886043, max_relative = 1e-8);
}

#[test]
fn radial_energy_of_eps_step() {
    for (eps, want) in [(0.1, 6.316897391607232), (0.01, 8.08772220999044), (0.001, 9.90841521534761)] {
        let e = radial_energy(&RadialProfile::eps_step(eps, 2001).unwrap()).unwrap();
        assert_relative_eq!(e.total, want, max_relative = 1e-7);
    }
}

#[test]
fn radial_minimizer_of_quartic_profile() {
    // f = 1 + r²/4 ⇒ v′ = r√(1 + r²/8)
    let f = RadialProfile::constraint(|r| 1.0 + 0.25 * r * r, 2001, &[]).unwrap();
    let v = radial_minimizer(&f).unwrap();
    for (r, val) in v.r.iter().zip(&v.values).step_by(100) {
        let want = 8.0 / 3.0 * (1.0 + r * r / 8.0).powf(1.5) - 8.0 / 3.0;
        assert!((val - want).abs() < 1e-9, "r = {r}: {val} vs {want}");
    }
    let e = radial_energy(&f).unwrap();
    assert_relative_eq!(e.total, 7.083550914121395, max_relative = 1e-8);
}

#[test]
fn constant_multiplier_scales_with_sign_only() {
    for c in [0.5, 1.0, 4.0] {
        let lam = lambda_multiplier(&RadialProfile::constant(c, 501).unwrap()).unwrap();
        assert!(lam.values.iter().all(|l| (l + 2.0).abs() < 1e-9));
    }
}

#[test]
fn perturbed_flat_metric_curvature() {
    // κ(Id − ε²∇v⊗∇v) for v = r²/2 is −ε²/(1 − ε²r²)²
    let g = make_grid(DomainKind::UnitDisk, 65).unwrap();
    let v = ScalarField::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
    let eps = 0.3;
    let k = gauss_curvature_metric(&SymMatrixField::identity(&g), &v, eps).unwrap();
    for idx in g.interior_nodes() {
        let x = g.coords(idx);
        let r2 = x[0] * x[0] + x[1] * x[1];
        let want = -eps * eps / (1.0 - eps * eps * r2).powi(2);
        assert!((k.values[idx] - want).abs() < 1e-10, "{} vs {want}", k.values[idx]);
    }
}

#[test]
fn limit_energy_of_paraboloid_without_prestrain() {
    // (1/12)∫|Id|² over the masked disk quadrature → 2π/12
    let g = make_grid(DomainKind::UnitDisk, 257).unwrap();
    let v = Poly2::from_terms(&[(0.5, 2, 0), (0.5, 0, 2)]);
    let e = limit_energy_poly(&v, &zero_mat3(), &QuadraticForm3::default(), &g);
    assert_relative_eq!(e, PI / 6.0, max_relative = 1e-3);
}
