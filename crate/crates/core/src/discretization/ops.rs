use rayon::prelude::*;

use super::field::{ScalarField, SymMatrixField};
use super::grid::{Grid2D, SparseOp};
use crate::error::{Error, Result};

fn apply(op: &SparseOp, v: &ScalarField) -> ScalarField {
    let g = &v.grid;
    let values = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if g.in_domain(k) {
                op.apply_row(k, &v.values)
            } else {
                f64::NAN
            }
        })
        .collect();
    ScalarField::new(g.clone(), values)
}

pub fn gradient(v: &ScalarField) -> [ScalarField; 2] {
    let s = v.grid.stencils();
    [apply(&s.d1, v), apply(&s.d2, v)]
}

pub fn hessian(v: &ScalarField) -> SymMatrixField {
    let s = v.grid.stencils();
    SymMatrixField {
        grid: v.grid.clone(),
        a11: apply(&s.d11, v).values,
        a12: apply(&s.d12, v).values,
        a22: apply(&s.d22, v).values,
    }
}

pub fn laplacian(v: &ScalarField) -> ScalarField {
    hessian(v).trace()
}

/// `∂²₁₁F₂₂ − 2∂²₁₂F₁₂ + ∂²₂₂F₁₁`
#[allow(non_snake_case)]
pub fn curlT_curl(f: &SymMatrixField) -> ScalarField {
    let g = &f.grid;
    let s = g.stencils();
    let values = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if !g.in_domain(k) {
                return f64::NAN;
            }
            s.d11.apply_row(k, &f.a22) - 2.0 * s.d12.apply_row(k, &f.a12)
                + s.d22.apply_row(k, &f.a11)
        })
        .collect();
    ScalarField::new(g.clone(), values)
}

pub fn det2(f: &SymMatrixField) -> ScalarField {
    let g = &f.grid;
    let values = (0..g.len())
        .map(|k| {
            if g.in_domain(k) {
                f.a11[k] * f.a22[k] - f.a12[k] * f.a12[k]
            } else {
                f64::NAN
            }
        })
        .collect();
    ScalarField::new(g.clone(), values)
}

pub fn cof2(f: &SymMatrixField) -> SymMatrixField {
    SymMatrixField {
        grid: f.grid.clone(),
        a11: f.a22.clone(),
        a12: f.a12.iter().map(|x| -x).collect(),
        a22: f.a11.clone(),
    }
}

/// Symmetric product `a ⊗ b` of two vector fields (symmetrised).
pub fn sym_outer(a: &[ScalarField; 2], b: &[ScalarField; 2]) -> SymMatrixField {
    let g = &a[0].grid;
    let vals: Vec<[f64; 3]> = (0..g.len())
        .map(|k| {
            let (a1, a2, b1, b2) = (a[0].values[k], a[1].values[k], b[0].values[k], b[1].values[k]);
            [a1 * b1, 0.5 * (a1 * b2 + a2 * b1), a2 * b2]
        })
        .collect();
    SymMatrixField::from_triples(g, &vals)
}

/// Composed 5-point biharmonic; defined at nodes two rings inside the fringe,
/// `NaN` elsewhere.
pub fn bilaplacian(v: &ScalarField) -> ScalarField {
    let lap = laplacian(v);
    let lap2 = laplacian(&lap);
    let g = &v.grid;
    let values = (0..g.len())
        .map(|k| if g.is_deep(k) { lap2.values[k] } else { f64::NAN })
        .collect();
    ScalarField::new(g.clone(), values)
}

/// Masked quadrature `Σ q·w` in fixed node order.
pub fn integrate(q: &ScalarField) -> f64 {
    integrate_values(&q.grid, &q.values)
}

fn integrate_values(g: &Grid2D, q: &[f64]) -> f64 {
    let w = g.weights();
    let mut s = 0.0;
    for k in 0..g.len() {
        if w[k] != 0.0 {
            s += w[k] * q[k];
        }
    }
    s
}

/// Gauss curvature of the metric `P − ε²∇v₁⊗∇v₁`, computed from `P`, its
/// Christoffel symbols and the Hessian of `v₁`:
///
/// `κ = κ(P)/(1 − ε²a) − ε² det(∇²v₁ − Γᵏ∂ₖv₁) / ((1 − ε²a)² det P)`,
/// where `a = Pⁱʲ∂ᵢv₁∂ⱼv₁`.
pub fn gauss_curvature_metric(p: &SymMatrixField, v1: &ScalarField, eps: f64) -> Result<ScalarField> {
    let parts = curvature_parts(p, v1, eps)?;
    let e2 = eps * eps;
    let values = parts
        .iter()
        .map(|c| match c {
            None => f64::NAN,
            Some(c) => c.k_p / c.q - e2 * c.det_m / (c.q * c.q * c.det_p),
        })
        .collect();
    Ok(ScalarField::new(p.grid.clone(), values))
}

/// Per-node ingredients of the perturbed-metric curvature.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CurvatureParts {
    /// `κ(P)`
    pub k_p: f64,
    pub det_p: f64,
    /// `1 − ε²Pⁱʲ∂ᵢv₁∂ⱼv₁`
    pub q: f64,
    /// `det(∇²v₁ − Γᵏ∂ₖv₁)`
    pub det_m: f64,
}

pub(crate) fn curvature_parts(
    p: &SymMatrixField,
    v1: &ScalarField,
    eps: f64,
) -> Result<Vec<Option<CurvatureParts>>> {
    let g = &p.grid;
    for k in g.domain_nodes() {
        let [a, b, c] = p.at(k);
        if !(a > 0.0 && a * c - b * b > 0.0) {
            return Err(Error::Domain {
                node: k,
                msg: format!("metric not positive definite: ({a:e}, {b:e}, {c:e})"),
            });
        }
    }
    let s = g.stencils();
    let e2 = eps * eps;
    let comps = [&p.a11, &p.a12, &p.a22];
    let out: Vec<std::result::Result<Option<CurvatureParts>, String>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            if !g.in_domain(k) {
                return Ok(None);
            }
            let [e, f, gg] = p.at(k);
            // dp[l][c] = ∂_l of component c ∈ {11, 12, 22}
            let mut dp = [[0.0; 3]; 2];
            for c in 0..3 {
                dp[0][c] = s.d1.apply_row(k, comps[c]);
                dp[1][c] = s.d2.apply_row(k, comps[c]);
            }
            let pij = |l: usize, i: usize, j: usize| dp[l][i + j];
            let e_22 = s.d22.apply_row(k, &p.a11);
            let f_12 = s.d12.apply_row(k, &p.a12);
            let g_11 = s.d11.apply_row(k, &p.a22);
            let (eu, ev) = (dp[0][0], dp[1][0]);
            let (fu, fv) = (dp[0][1], dp[1][1]);
            let (gu, gv) = (dp[0][2], dp[1][2]);
            let det3 = |m: [[f64; 3]; 3]| {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let detp = e * gg - f * f;
            let k_p = (det3([
                [-0.5 * e_22 + f_12 - 0.5 * g_11, 0.5 * eu, fu - 0.5 * ev],
                [fv - 0.5 * gu, e, f],
                [0.5 * gv, f, gg],
            ]) - det3([[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, gg]]))
                / (detp * detp);
            if eps == 0.0 {
                return Ok(Some(CurvatureParts { k_p, det_p: detp, q: 1.0, det_m: 0.0 }));
            }
            let pinv = [[gg / detp, -f / detp], [-f / detp, e / detp]];
            let grad = [s.d1.apply_row(k, &v1.values), s.d2.apply_row(k, &v1.values)];
            let hess = [
                [s.d11.apply_row(k, &v1.values), s.d12.apply_row(k, &v1.values)],
                [s.d12.apply_row(k, &v1.values), s.d22.apply_row(k, &v1.values)],
            ];
            let mut m = hess;
            for i in 0..2 {
                for j in 0..2 {
                    for kk in 0..2 {
                        let mut gam = 0.0;
                        for l in 0..2 {
                            gam += 0.5 * pinv[kk][l] * (pij(i, j, l) + pij(j, i, l) - pij(l, i, j));
                        }
                        m[i][j] -= gam * grad[kk];
                    }
                }
            }
            let mut a = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    a += pinv[i][j] * grad[i] * grad[j];
                }
            }
            let q = 1.0 - e2 * a;
            if q <= 0.0 {
                return Err(format!("perturbed metric degenerate (1 - eps^2 a = {q:e})"));
            }
            let detm = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            Ok(Some(CurvatureParts { k_p, det_p: detp, q, det_m: detm }))
        })
        .collect();
    out.into_iter()
        .enumerate()
        .map(|(k, r)| r.map_err(|msg| Error::Domain { node: k, msg }))
        .collect()
}
