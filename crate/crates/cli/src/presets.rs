//! Manufactured growth presets `(v, w, B_g)`; `S_g` follows from the pair.

use std::sync::Arc;

use ma_plate_core::discretization::{Grid2D, ScalarField};
use ma_plate_core::elasticity3d::GrowthSpec;
use ma_plate_core::families::saddle_family;
use ma_plate_core::harness::{det_hessian_poly, manufacture};
use ma_plate_core::poly::{zero_mat3, Mat3Poly, Poly2};

use crate::CliError;

pub const GROWTH_PRESETS: [&str; 5] = ["zero", "paraboloid", "paraboloid-bent", "incompatible-B", "conformal"];

#[derive(Clone, Debug)]
pub struct GrowthPreset {
    pub name: String,
    pub v: Poly2,
    pub w: [Poly2; 2],
    pub b_g: Mat3Poly,
}

fn half_r2(sign: f64) -> Poly2 {
    Poly2::from_terms(&[(0.5 * sign, 2, 0), (0.5 * sign, 0, 2)])
}

fn diag(c: f64) -> Mat3Poly {
    let mut m = zero_mat3();
    m[0][0] = Poly2::constant(c);
    m[1][1] = Poly2::constant(c);
    m
}

/// Accepts `NAME` or `preset:NAME`.
pub fn growth_preset(name: &str) -> Result<GrowthPreset, CliError> {
    let key = name.strip_prefix("preset:").unwrap_or(name);
    let zero2 = [Poly2::zero(), Poly2::zero()];
    let (v, w, b_g) = match key {
        "zero" => (Poly2::zero(), zero2, zero_mat3()),
        // f ≡ 1, no bending prestrain: limit energy (1/12)∫|Id|²
        "paraboloid" => (half_r2(1.0), zero2, zero_mat3()),
        // B_g = −∇²v: compatible, zero limit energy
        "paraboloid-bent" => (half_r2(1.0), zero2, diag(-1.0)),
        // (sym B_g)₁₂ = x₁ has nonzero curl
        "incompatible-B" => {
            let mut b = zero_mat3();
            b[0][1] = Poly2::x1();
            b[1][0] = Poly2::x1();
            (half_r2(1.0), zero2, b)
        }
        // S_g = −(r²/4)Id, B_g = Id, v = −r²/2, w = −x r²/4
        "conformal" => {
            let w = [
                Poly2::from_terms(&[(-0.25, 3, 0), (-0.25, 1, 2)]),
                Poly2::from_terms(&[(-0.25, 2, 1), (-0.25, 0, 3)]),
            ];
            (half_r2(-1.0), w, diag(1.0))
        }
        _ => {
            return Err(CliError::Invalid(format!(
                "unknown growth preset '{name}' (one of {})",
                GROWTH_PRESETS.join(", ")
            )))
        }
    };
    Ok(GrowthPreset {
        name: key.to_string(),
        v,
        w,
        b_g,
    })
}

impl GrowthPreset {
    pub fn spec(&self, gamma: f64, grid: &Grid2D) -> Result<GrowthSpec, CliError> {
        Ok(manufacture(&self.v, &self.w, self.b_g.clone(), gamma, grid)?)
    }

    /// `f = det∇²v`.
    pub fn f(&self) -> Poly2 {
        det_hessian_poly(&self.v)
    }

    /// Candidate displacements for the lower-bound gap: `±v`, and for a
    /// constant `f = c ≠ 0` the quadratics with that determinant
    /// (`±√c r²/2`, or saddles at three angles for `c < 0`).
    pub fn gap_candidates(&self, grid: &Arc<Grid2D>) -> Vec<(String, ScalarField)> {
        let v = self.v.clone();
        let mut out = vec![
            ("v".to_string(), ScalarField::from_fn(grid, |x| v.eval(x))),
            ("-v".to_string(), ScalarField::from_fn(grid, |x| -v.eval(x))),
        ];
        let f = self.f();
        let c = f.eval([0.0, 0.0]);
        let constant = f.d1() == Poly2::zero() && f.d2() == Poly2::zero();
        if constant && c > 0.0 {
            for s in [1.0, -1.0] {
                let k = s * c.sqrt();
                out.push((format!("{k}*r^2/2"), ScalarField::from_fn(grid, |x| 0.5 * k * (x[0] * x[0] + x[1] * x[1]))));
            }
        } else if constant && c < 0.0 {
            for theta in [0.0, 0.7, 2.1] {
                out.push((format!("saddle({theta})"), saddle_family(grid, theta).scale((-c).sqrt())));
            }
        }
        out
    }
}
