//! Prestrained 3D energy: the density `W`, its quadratic forms, growth
//! tensors, Kirchhoff–Love recovery deformations and the thin-slab integral.
//!
//! Normalisation: `W(F) = dist²(F, SO(3))`, so that the default quadratic
//! form is `Q₃(F) = |sym F|²` (Lamé `λ = 0`, `μ = ½`).

use nalgebra::{Matrix3, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{hessian, Grid2D, ScalarField};
use crate::error::{Error, Result};
use crate::poly::{eval_mat3, sym_block, zero_vec3, Mat3Poly, Poly2, Vec3Poly};
use crate::quadrature::gauss_legendre;

pub type M3 = Matrix3<f64>;

/// Signed singular values: the smallest is negated when `det F < 0`, so that
/// `dist²(F, SO(3)) = Σ(σ̃ᵢ − 1)²`.
fn signed_singular_values(f: &M3) -> [f64; 3] {
    let svd = SVD::new(*f, false, false);
    let mut s = [
        svd.singular_values[0],
        svd.singular_values[1],
        svd.singular_values[2],
    ];
    if f.determinant() < 0.0 {
        let imin = (0..3).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        s[imin] = -s[imin];
    }
    s
}

/// Frobenius distance from `F` to the rotation group.
pub fn dist_so3(f: &M3) -> f64 {
    let s = signed_singular_values(f);
    s.iter().map(|x| (x - 1.0).powi(2)).sum::<f64>().sqrt()
}

/// `W(F) = dist²(F, SO(3))`.
pub fn density_w(f: &M3) -> f64 {
    QuadraticForm3::default().density(f)
}

/// `Q₃(F) = 2μ|sym F|² + λ(tr F)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm3 {
    pub lame_lambda: f64,
    pub lame_mu: f64,
}

impl Default for QuadraticForm3 {
    fn default() -> Self {
        QuadraticForm3 {
            lame_lambda: 0.0,
            lame_mu: 0.5,
        }
    }
}

impl QuadraticForm3 {
    pub fn new(lame_lambda: f64, lame_mu: f64) -> Result<Self> {
        if !(lame_mu > 0.0 && lame_lambda >= 0.0) {
            return Err(Error::Config(format!(
                "quadratic form needs mu > 0 and lambda >= 0 (got {lame_lambda}, {lame_mu})"
            )));
        }
        Ok(QuadraticForm3 {
            lame_lambda,
            lame_mu,
        })
    }

    pub fn eval(&self, f: &M3) -> f64 {
        let s = (f + f.transpose()) * 0.5;
        2.0 * self.lame_mu * s.norm_squared() + self.lame_lambda * f.trace().powi(2)
    }

    /// Frame-indifferent density whose Hessian at the identity is this form:
    /// `2μΣ(σ̃ᵢ−1)² + λ(Σ(σ̃ᵢ−1))²`.
    pub fn density(&self, f: &M3) -> f64 {
        let s = signed_singular_values(f);
        let d = [s[0] - 1.0, s[1] - 1.0, s[2] - 1.0];
        2.0 * self.lame_mu * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
            + self.lame_lambda * (d[0] + d[1] + d[2]).powi(2)
    }

    /// Minimising third column/row vector for a symmetric 2×2 block `(a11, a12, a22)`.
    pub fn c_vector(&self, f: [f64; 3]) -> [f64; 3] {
        let tr = f[0] + f[2];
        [
            0.0,
            0.0,
            -self.lame_lambda * tr / (2.0 * self.lame_mu + self.lame_lambda),
        ]
    }

    /// `Q₂` of a symmetric 2×2 block `(a11, a12, a22)`.
    pub fn q2_sym(&self, f: [f64; 3]) -> f64 {
        let (mu, la) = (self.lame_mu, self.lame_lambda);
        let tr = f[0] + f[2];
        2.0 * mu * (f[0] * f[0] + 2.0 * f[1] * f[1] + f[2] * f[2])
            + 2.0 * mu * la / (2.0 * mu + la) * tr * tr
    }
}

/// `min { Q₃(F̃) : F̃₂ₓ₂ = F }` and the minimising vector `c(F)`.
pub fn reduce_q2(q: &QuadraticForm3, f: [[f64; 2]; 2]) -> (f64, [f64; 3]) {
    let sym = [f[0][0], 0.5 * (f[0][1] + f[1][0]), f[1][1]];
    (q.q2_sym(sym), q.c_vector(sym))
}

/// `l(F) = (F₁₃+F₃₁, F₂₃+F₃₂, F₃₃)`, so that `sym(F − F₂ₓ₂*) = sym(l ⊗ e₃)`.
pub fn l_map(f: &M3) -> [f64; 3] {
    [f[(0, 2)] + f[(2, 0)], f[(1, 2)] + f[(2, 1)], f[(2, 2)]]
}

fn l_map_poly(m: &Mat3Poly) -> Vec3Poly {
    [&m[0][2] + &m[2][0], &m[1][2] + &m[2][1], m[2][2].clone()]
}

/// Growth data `A^h = Id + h^γ S_g + h^{γ/2} x₃ B_g`.
#[derive(Clone, Debug)]
pub struct GrowthSpec {
    pub s_g: Mat3Poly,
    pub b_g: Mat3Poly,
    pub gamma: f64,
}

impl GrowthSpec {
    pub fn zero(gamma: f64) -> Self {
        GrowthSpec {
            s_g: crate::poly::zero_mat3(),
            b_g: crate::poly::zero_mat3(),
            gamma,
        }
    }

    pub fn s_at(&self, x: [f64; 2]) -> M3 {
        to_m3(eval_mat3(&self.s_g, x))
    }

    pub fn b_at(&self, x: [f64; 2]) -> M3 {
        to_m3(eval_mat3(&self.b_g, x))
    }
}

fn to_m3(a: [[f64; 3]; 3]) -> M3 {
    M3::from_fn(|i, j| a[i][j])
}

/// `A^h(x)` and its inverse at `x = (x₁, x₂, x₃)`.
pub fn growth_tensor(spec: &GrowthSpec, h: f64, x: [f64; 3]) -> Result<(M3, M3)> {
    if h <= 0.0 {
        return Err(Error::Config(format!("thickness must be positive, got {h}")));
    }
    let xp = [x[0], x[1]];
    growth_tensor_from(spec.s_at(xp), spec.b_at(xp), spec.gamma, h, x[2])
}

fn growth_tensor_from(s: M3, b: M3, gamma: f64, h: f64, x3: f64) -> Result<(M3, M3)> {
    let a = M3::identity() + s * h.powf(gamma) + b * (h.powf(gamma / 2.0) * x3);
    let det = a.determinant();
    if !(det > 0.0) {
        return Err(Error::Domain {
            node: 0,
            msg: format!("growth tensor has det {det:e} <= 0"),
        });
    }
    let inv = a.try_inverse().ok_or_else(|| Error::Domain {
        node: 0,
        msg: "growth tensor not invertible".into(),
    })?;
    Ok((a, inv))
}

/// `u(x′, x₃) = U₀(x′) + x₃ U₁(x′) + x₃² U₂(x′)` with polynomial coefficients.
#[derive(Clone, Debug)]
pub struct Deformation3 {
    pub u0: Vec3Poly,
    pub u1: Vec3Poly,
    pub u2: Vec3Poly,
    /// Fields the deformation was assembled from (empty for hand-built ones).
    pub v: Poly2,
    pub w: [Poly2; 2],
    pub d0: Vec3Poly,
    pub d1: Vec3Poly,
    du0: [[Poly2; 2]; 3],
    du1: [[Poly2; 2]; 3],
    du2: [[Poly2; 2]; 3],
}

fn grad3(u: &Vec3Poly) -> [[Poly2; 2]; 3] {
    [u[0].grad(), u[1].grad(), u[2].grad()]
}

/// Per-node polynomial values needed to assemble `∇u` at any `x₃`.
struct NodeJet {
    du0: [[f64; 2]; 3],
    u1: [f64; 3],
    du1: [[f64; 2]; 3],
    u2: [f64; 3],
    du2: [[f64; 2]; 3],
}

impl Deformation3 {
    pub fn new(u0: Vec3Poly, u1: Vec3Poly, u2: Vec3Poly) -> Self {
        let (du0, du1, du2) = (grad3(&u0), grad3(&u1), grad3(&u2));
        Deformation3 {
            u0,
            u1,
            u2,
            v: Poly2::zero(),
            w: [Poly2::zero(), Poly2::zero()],
            d0: zero_vec3(),
            d1: zero_vec3(),
            du0,
            du1,
            du2,
        }
    }

    /// `(x′, x₃) ↦ (x′, x₃)`.
    pub fn identity() -> Self {
        Self::new(
            [Poly2::x1(), Poly2::x2(), Poly2::zero()],
            [Poly2::zero(), Poly2::zero(), Poly2::constant(1.0)],
            zero_vec3(),
        )
    }

    /// `R u + t` for a fixed matrix `R` and translation `t`.
    pub fn left_compose(&self, r: &M3, t: [f64; 3]) -> Self {
        let mix = |u: &Vec3Poly, shift: bool| -> Vec3Poly {
            std::array::from_fn(|i| {
                let mut p = Poly2::zero();
                for (j, uj) in u.iter().enumerate() {
                    p = &p + &uj.scale(r[(i, j)]);
                }
                if shift {
                    p = &p + &Poly2::constant(t[i]);
                }
                p
            })
        };
        let mut out = Self::new(mix(&self.u0, true), mix(&self.u1, false), mix(&self.u2, false));
        out.v = self.v.clone();
        out.w = self.w.clone();
        out.d0 = self.d0.clone();
        out.d1 = self.d1.clone();
        out
    }

    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let xp = [x[0], x[1]];
        std::array::from_fn(|i| {
            self.u0[i].eval(xp) + x[2] * self.u1[i].eval(xp) + x[2] * x[2] * self.u2[i].eval(xp)
        })
    }

    fn jet(&self, xp: [f64; 2]) -> NodeJet {
        let e = |d: &[[Poly2; 2]; 3]| -> [[f64; 2]; 3] {
            std::array::from_fn(|i| [d[i][0].eval(xp), d[i][1].eval(xp)])
        };
        NodeJet {
            du0: e(&self.du0),
            u1: std::array::from_fn(|i| self.u1[i].eval(xp)),
            du1: e(&self.du1),
            u2: std::array::from_fn(|i| self.u2[i].eval(xp)),
            du2: e(&self.du2),
        }
    }

    /// Analytic deformation gradient at `(x₁, x₂, x₃)`.
    pub fn gradient(&self, x: [f64; 3]) -> M3 {
        self.jet([x[0], x[1]]).gradient(x[2])
    }
}

impl NodeJet {
    fn gradient(&self, x3: f64) -> M3 {
        M3::from_fn(|i, j| {
            if j < 2 {
                self.du0[i][j] + x3 * self.du1[i][j] + x3 * x3 * self.du2[i][j]
            } else {
                self.u1[i] + 2.0 * x3 * self.u2[i]
            }
        })
    }
}

/// Upper bound of a polynomial's sup-norm over `[-1, 1]²` (sum of |coefficients|).
pub(crate) fn poly_sup_bound(p: &Poly2) -> f64 {
    p.terms().map(|(_, _, c)| c.abs()).sum()
}

/// Stretching `sym∇w + ½∇v⊗∇v − (sym S_g)₂ₓ₂` as a polynomial block.
pub fn stretching(spec: &GrowthSpec, v: &Poly2, w: &[Poly2; 2]) -> [Poly2; 3] {
    let gv = v.grad();
    let s = sym_block(&spec.s_g);
    let half = |p: Poly2| p.scale(0.5);
    [
        &(&w[0].d1() + &half(&gv[0] * &gv[0])) - &s[0],
        &(&half(&w[0].d2() + &w[1].d1()) + &half(&gv[0] * &gv[1])) - &s[1],
        &(&w[1].d2() + &half(&gv[1] * &gv[1])) - &s[2],
    ]
}

/// Default tolerance on the stretching residual accepted by [`build_recovery`].
pub const STRETCH_TOL: f64 = 1e-9;

/// Recovery deformation
/// `u = (x′ + h^γ w, h^{γ/2} v) + x₃(−h^{γ/2}∇v, 1) + h^γ x₃ d⁰ + ½h^{γ/2} x₃² d¹`
/// with `d⁰ = l(S_g) − ½|∇v|²e₃ + c(s)` and `d¹ = l(B_g) + c(−∇²v − (sym B_g)₂ₓ₂)`.
pub fn build_recovery(
    spec: &GrowthSpec,
    v: &Poly2,
    w: &[Poly2; 2],
    q: &QuadraticForm3,
    h: f64,
) -> Result<Deformation3> {
    let s = stretching(spec, v, w);
    let residual = s.iter().map(poly_sup_bound).fold(0.0, f64::max);
    if residual > STRETCH_TOL {
        return Err(Error::Rejected {
            what: "stretching",
            residual,
            tol: STRETCH_TOL,
        });
    }
    let (hg, hg2) = (h.powf(spec.gamma), h.powf(spec.gamma / 2.0));
    // c(·) is linear: c(F) = κ tr(F) e₃.
    let kappa = q.c_vector([1.0, 0.0, 0.0])[2];
    let gv = v.grad();
    let hv = v.hessian();
    let bsym = sym_block(&spec.b_g);

    let mut d0 = l_map_poly(&spec.s_g);
    d0[2] = &d0[2] - &(&(&gv[0] * &gv[0]) + &(&gv[1] * &gv[1])).scale(0.5);
    d0[2] = &d0[2] + &(&s[0] + &s[2]).scale(kappa);

    let mut d1 = l_map_poly(&spec.b_g);
    let tr_b = &(&hv[0][0] + &hv[1][1]) + &(&bsym[0] + &bsym[2]);
    d1[2] = &d1[2] - &tr_b.scale(kappa);

    let u0 = [
        &Poly2::x1() + &w[0].scale(hg),
        &Poly2::x2() + &w[1].scale(hg),
        v.scale(hg2),
    ];
    let u1 = [
        &gv[0].scale(-hg2) + &d0[0].scale(hg),
        &gv[1].scale(-hg2) + &d0[1].scale(hg),
        &Poly2::constant(1.0) + &d0[2].scale(hg),
    ];
    let u2 = std::array::from_fn(|i| d1[i].scale(0.5 * hg2));
    let mut u = Deformation3::new(u0, u1, u2);
    u.v = v.clone();
    u.w = w.clone();
    u.d0 = d0;
    u.d1 = d1;
    Ok(u)
}

/// `(1/h) ∫_{Ω×(−h/2,h/2)} W(∇u (A^h)⁻¹)` with masked in-plane quadrature and
/// an `n_thick`-point Gauss–Legendre rule across the thickness.
pub fn energy_3d(
    u: &Deformation3,
    spec: &GrowthSpec,
    q: &QuadraticForm3,
    h: f64,
    grid: &Grid2D,
    n_thick: usize,
) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::Config(format!("thickness must be positive, got {h}")));
    }
    let (xi, wi) = gauss_legendre(n_thick.max(1));
    let nodes: Vec<usize> = grid.domain_nodes().collect();
    let contrib: Vec<Result<f64>> = nodes
        .par_iter()
        .map(|&k| {
            let xp = grid.coords(k);
            let jet = u.jet(xp);
            let (s, b) = (spec.s_at(xp), spec.b_at(xp));
            let mut acc = 0.0;
            for (x, w) in xi.iter().zip(&wi) {
                let x3 = 0.5 * h * x;
                let (_, ainv) = growth_tensor_from(s, b, spec.gamma, h, x3).map_err(|e| match e {
                    Error::Domain { msg, .. } => Error::Domain { node: k, msg },
                    other => other,
                })?;
                acc += w * q.density(&(jet.gradient(x3) * ainv));
            }
            // (1/h)·(h/2)·Σ wᵢ
            Ok(0.5 * acc * grid.weight(k))
        })
        .collect();
    let mut total = 0.0;
    for c in contrib {
        total += c?;
    }
    Ok(total)
}

/// `(1/12) ∫ Q₂(∇²v + (sym B_g)₂ₓ₂)` from a sampled displacement.
pub fn limit_energy(v: &ScalarField, b_g: &Mat3Poly, q: &QuadraticForm3) -> f64 {
    let hv = hessian(v);
    let bs = sym_block(b_g);
    let g = &v.grid;
    let mut total = 0.0;
    for k in g.domain_nodes() {
        let x = g.coords(k);
        let f = [
            hv.a11[k] + bs[0].eval(x),
            hv.a12[k] + bs[1].eval(x),
            hv.a22[k] + bs[2].eval(x),
        ];
        total += g.weight(k) * q.q2_sym(f);
    }
    total / 12.0
}

/// Same integrand with the exact Hessian of a polynomial displacement.
pub fn limit_energy_poly(v: &Poly2, b_g: &Mat3Poly, q: &QuadraticForm3, grid: &Grid2D) -> f64 {
    let hv = v.hessian();
    let bs = sym_block(b_g);
    let mut total = 0.0;
    for k in grid.domain_nodes() {
        let x = grid.coords(k);
        let f = [
            hv[0][0].eval(x) + bs[0].eval(x),
            hv[0][1].eval(x) + bs[1].eval(x),
            hv[1][1].eval(x) + bs[2].eval(x),
        ];
        total += grid.weight(k) * q.q2_sym(f);
    }
    total / 12.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompatCondition {
    /// `curl (sym B_g)₂ₓ₂ ≡ 0`
    First,
    /// `curlᵀcurl (S_g)₂ₓ₂ + det (sym B_g)₂ₓ₂ ≡ 0`
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub violated: Vec<CompatCondition>,
    pub curl_residual: f64,
    pub gauss_residual: f64,
    pub tol: f64,
}

impl CompatReport {
    pub fn compatible(&self) -> bool {
        self.violated.is_empty()
    }

    pub fn verdict(&self) -> String {
        match self.violated.first() {
            None => "compatible".into(),
            Some(CompatCondition::First) => "violated(first)".into(),
            Some(CompatCondition::Second) => "violated(second)".into(),
        }
    }
}

/// Evaluate both linearised compatibility conditions in max norm over the grid.
pub fn compat_check(spec: &GrowthSpec, grid: &Grid2D, tol: f64) -> CompatReport {
    let b = sym_block(&spec.b_g);
    // row-wise curl of [[b11, b12], [b12, b22]]
    let curl = [&b[1].d1() - &b[0].d2(), &b[2].d1() - &b[1].d2()];
    let s = sym_block(&spec.s_g);
    let ctc = &(&s[2].d1().d1() - &s[1].d1().d2().scale(2.0)) + &s[0].d2().d2();
    let gauss = &ctc + &(&(&b[0] * &b[2]) - &(&b[1] * &b[1]));
    let mut curl_residual: f64 = 0.0;
    let mut gauss_residual: f64 = 0.0;
    for k in grid.domain_nodes() {
        let x = grid.coords(k);
        curl_residual = curl_residual.max(curl[0].eval(x).abs()).max(curl[1].eval(x).abs());
        gauss_residual = gauss_residual.max(gauss.eval(x).abs());
    }
    let mut violated = Vec::new();
    if curl_residual > tol {
        violated.push(CompatCondition::First);
    }
    if gauss_residual > tol {
        violated.push(CompatCondition::Second);
    }
    CompatReport {
        violated,
        curl_residual,
        gauss_residual,
        tol,
    }
}
