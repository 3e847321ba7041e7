use proptest::prelude::*;

use ma_plate_core::discretization::{
    curlT_curl, det2, gradient, hessian, integrate, make_grid, sym_outer, DomainKind, ScalarField,
};
use ma_plate_core::elasticity3d::{compat_check, density_w, GrowthSpec, QuadraticForm3};
use ma_plate_core::expr::parse_expr;
use ma_plate_core::harness::manufacture;
use ma_plate_core::poly::{zero_mat3, Poly2};
use ma_plate_core::radial::{radial_energy, RadialProfile};
use ma_plate_core::solver::{gauge_fix, ConstraintMode, PenalizedObjective};
use nalgebra::{Matrix3, Rotation3, Vector3};

fn quad_coeffs() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-2.0f64..2.0)
}

fn quad(c: [f64; 6]) -> impl Fn([f64; 2]) -> f64 + Sync {
    move |x| c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1] * x[1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_fix_is_idempotent(c in quad_coeffs(), a in -3.0f64..3.0, b in -3.0f64..3.0, d in -3.0f64..3.0) {
        let g = make_grid(DomainKind::UnitDisk, 33).unwrap();
        let v = ScalarField::from_fn(&g, quad(c));
        let once = gauge_fix(&v);
        let twice = gauge_fix(&once);
        prop_assert!(once.sub(&twice).max_abs() < 1e-12);
        // affine shifts are invisible after gauge fixing
        let shifted = ScalarField::from_fn(&g, |x| quad(c)(x) + a + b * x[0] + d * x[1]);
        prop_assert!(gauge_fix(&shifted).sub(&once).max_abs() < 1e-10);
    }

    #[test]
    fn hessian_exact_on_quadratics(c in quad_coeffs(), square in any::<bool>()) {
        let kind = if square { DomainKind::UnitSquare } else { DomainKind::UnitDisk };
        let g = make_grid(kind, 17).unwrap();
        let h = hessian(&ScalarField::from_fn(&g, quad(c)));
        for k in g.domain_nodes() {
            prop_assert!((h.a11[k] - 2.0 * c[3]).abs() < 1e-9);
            prop_assert!((h.a12[k] - c[4]).abs() < 1e-9);
            prop_assert!((h.a22[k] - 2.0 * c[5]).abs() < 1e-9);
        }
    }

    #[test]
    fn determinant_identity_on_quadratics(c in quad_coeffs()) {
        // det∇²v = −½curlᵀcurl(∇v⊗∇v), exact for quadratic v
        let g = make_grid(DomainKind::UnitSquare, 17).unwrap();
        let v = ScalarField::from_fn(&g, quad(c));
        let gv = gradient(&v);
        let r = det2(&hessian(&v)).add(&curlT_curl(&sym_outer(&gv, &gv)).scale(0.5));
        prop_assert!(r.max_abs_interior() < 1e-8);
    }

    #[test]
    fn penalized_gradient_matches_differences(seed in 0u64..1000, mu in 0.5f64..50.0, ineq in any::<bool>()) {
        let g = make_grid(DomainKind::UnitDisk, 17).unwrap();
        let f = ScalarField::from_fn(&g, |x| 1.0 + 0.2 * x[0]);
        let mode = if ineq { ConstraintMode::Inequality } else { ConstraintMode::Equality };
        let mut obj = PenalizedObjective::new(&f, mode, mu);
        let s = seed as f64;
        for (k, l) in obj.lambda.iter_mut().enumerate() {
            *l = 0.5 + 0.4 * (k as f64 * 0.37 + s).sin();
        }
        let x: Vec<f64> = (0..g.len()).map(|k| {
            let p = g.coords(k);
            0.5 * (p[0] * p[0] + p[1] * p[1]) + 0.1 * (k as f64 * 1.3 + s).sin()
        }).collect();
        let d: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.71 + 2.0 * s).cos()).collect();
        let mut grad = vec![0.0; g.len()];
        obj.value_grad(&x, &mut grad);
        let t = 1e-5;
        let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        let xm: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - t * b).collect();
        let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * t);
        let an: f64 = grad.iter().zip(&d).map(|(a, b)| a * b).sum();
        prop_assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "{fd} vs {an}");
    }

    #[test]
    fn density_is_frame_indifferent(axis in prop::array::uniform3(-1.0f64..1.0), angle in -3.0f64..3.0,
                                    m in prop::array::uniform9(-0.5f64..0.5)) {
        let f = Matrix3::identity() + Matrix3::from_row_slice(&m);
        let ax = Vector3::from(axis);
        prop_assume!(ax.norm() > 1e-3);
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(ax), angle);
        prop_assert!((density_w(&(r.matrix() * f)) - density_w(&f)).abs() < 1e-10);
        prop_assert!(density_w(&r.matrix().clone_owned()) < 1e-12);
    }

    #[test]
    fn density_hessian_at_identity_is_q3(m in prop::array::uniform9(-1.0f64..1.0)) {
        let g = Matrix3::from_row_slice(&m);
        let q = QuadraticForm3::default();
        let t = 1e-4;
        let d2 = (q.density(&(Matrix3::identity() + g * t)) + q.density(&(Matrix3::identity() - g * t))
            - 2.0 * q.density(&Matrix3::identity())) / (t * t);
        // second derivative of W along G equals 2·Q₃(G)/2·2 = 2Q₃(G)
        prop_assert!((d2 - 2.0 * q.eval(&g)).abs() < 1e-4 * (1.0 + q.eval(&g)));
    }

    #[test]
    fn constant_f_energy_is_linear(c in 0.1f64..10.0) {
        let e = radial_energy(&RadialProfile::constant(c, 401).unwrap()).unwrap();
        prop_assert!((e.total - 2.0 * std::f64::consts::PI * c).abs() < 1e-7 * c);
    }

    #[test]
    fn manufactured_specs_are_gauss_compatible_without_bending(c in prop::array::uniform3(-1.0f64..1.0)) {
        // with B = 0 the second compatibility condition reduces to det∇²v = 0,
        // so a manufactured spec is compatible iff v is developable
        let g = make_grid(DomainKind::UnitDisk, 17).unwrap();
        let v = Poly2::from_terms(&[(c[0], 2, 0), (c[1], 1, 1), (c[2], 0, 2)]);
        let spec: GrowthSpec = manufacture(&v, &[Poly2::zero(), Poly2::zero()], zero_mat3(), 1.5, &g).unwrap();
        let det = 4.0 * c[0] * c[2] - c[1] * c[1];
        let rep = compat_check(&spec, &g, 1e-9);
        prop_assert!((rep.gauss_residual - det.abs()).abs() < 1e-9);
    }

    #[test]
    fn expression_numbers_round_trip(x in -1e6f64..1e6) {
        let s = format!("{x:e}");
        let e = parse_expr(&s).unwrap();
        prop_assert_eq!(e.eval([0.0, 0.0]).unwrap(), x);
    }

    #[test]
    fn quadrature_integrates_affine_exactly_on_square(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let g = make_grid(DomainKind::UnitSquare, 17).unwrap();
        let q = integrate(&ScalarField::from_fn(&g, |x| a + b * x[0] + c * x[1]));
        prop_assert!((q - (a + 0.5 * b + 0.5 * c)).abs() < 1e-12);
    }
}
