//! Correction `z_ε` making the metric `P_ε − ε²∇(v+z)⊗∇(v+z)` flat, with
//! `P_ε = Id + 2ε²S + ε³s_ε`.

use faer::sparse::Triplet;
use serde::Serialize;

use super::sparse::LuFactor;
use crate::discretization::{
    curlT_curl, curvature_parts, det2, gauss_curvature_metric, hessian, ScalarField, SymMatrixField,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct MatchingOptions {
    /// Target for `max|Φ(ε, z)|` over interior nodes.
    pub tol: f64,
    pub max_iter: usize,
    /// Tolerance of `det∇²v = −curlᵀcurl S`; default `25h²(1 + max|det∇²v|)`.
    pub compat_tol: Option<f64>,
    /// Lower bound required of `det∇²v` at interior nodes.
    pub min_ellipticity: f64,
}

impl Default for MatchingOptions {
    fn default() -> Self {
        MatchingOptions {
            tol: 1e-10,
            max_iter: 30,
            compat_tol: None,
            min_ellipticity: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchingReport {
    #[serde(skip)]
    pub z: ScalarField,
    pub eps: f64,
    /// Final `max|Φ|`.
    pub residual: f64,
    pub iterations: usize,
    /// `max|Φ|` before each Newton step and at the end.
    pub trace: Vec<f64>,
    /// `max|κ(g_ε(z_ε))|` over interior nodes.
    pub curvature: f64,
    pub z_max: f64,
    pub ellipticity: f64,
}

/// `s_ε = ε·S²`, which keeps `P_ε` an `O(ε⁴)` perturbation of `Id + 2ε²S`.
pub fn default_s_eps<'a>(
    s_g: &'a (dyn Fn([f64; 2]) -> [f64; 3] + Sync),
) -> impl Fn([f64; 2], f64) -> [f64; 3] + Sync + 'a {
    move |x, eps| {
        let [a, b, c] = s_g(x);
        [eps * (a * a + b * b), eps * b * (a + c), eps * (b * b + c * c)]
    }
}

/// `P_ε = Id + 2ε²S + ε³s_ε` sampled on the grid.
pub fn metric_field(
    grid: &std::sync::Arc<crate::discretization::Grid2D>,
    s_g: &(dyn Fn([f64; 2]) -> [f64; 3] + Sync),
    s_eps: &(dyn Fn([f64; 2], f64) -> [f64; 3] + Sync),
    eps: f64,
) -> SymMatrixField {
    let (e2, e3) = (eps * eps, eps * eps * eps);
    SymMatrixField::from_fn(grid, |x| {
        let s = s_g(x);
        let t = s_eps(x, eps);
        [1.0 + 2.0 * e2 * s[0] + e3 * t[0], 2.0 * e2 * s[1] + e3 * t[1], 1.0 + 2.0 * e2 * s[2] + e3 * t[2]]
    })
}

/// `Φ(ε, z) = (1 − ε²a)·det P·κ(P)/ε² − det(∇²(v+z) − Γ∂(v+z))` at interior
/// nodes (zero elsewhere); `κ(g_ε(z)) = ε²Φ/((1 − ε²a)² det P)`.
pub fn matching_residual(p: &SymMatrixField, v: &ScalarField, z: &ScalarField, eps: f64) -> Result<ScalarField> {
    if eps == 0.0 {
        return Err(Error::Config("matching residual needs eps != 0".into()));
    }
    let g = &p.grid;
    let w = v.add(z);
    let parts = curvature_parts(p, &w, eps)?;
    let e2 = eps * eps;
    let values = (0..g.len())
        .map(|k| match parts[k] {
            Some(c) if g.is_interior(k) => c.q * c.det_p * c.k_p / e2 - c.det_m,
            Some(_) => 0.0,
            None => f64::NAN,
        })
        .collect();
    Ok(ScalarField::new(g.clone(), values))
}

/// Quasi-Newton iteration on `Φ(ε, z) = 0` with `z = 0` on the boundary
/// ring; every step solves `−cof∇²(v+z):∇²δ = −Φ`.
pub fn matching_correct(
    v: &ScalarField,
    s_g: &(dyn Fn([f64; 2]) -> [f64; 3] + Sync),
    s_eps: &(dyn Fn([f64; 2], f64) -> [f64; 3] + Sync),
    eps: f64,
    opts: &MatchingOptions,
) -> Result<MatchingReport> {
    let grid = &v.grid;
    let hv = hessian(v);
    let det = det2(&hv);
    let ellipticity = grid
        .interior_nodes()
        .map(|k| det.values[k])
        .fold(f64::INFINITY, f64::min);
    if !(ellipticity >= opts.min_ellipticity) {
        return Err(Error::Rejected {
            what: "uniform ellipticity: min det∇²v",
            residual: ellipticity,
            tol: opts.min_ellipticity,
        });
    }
    let s_field = SymMatrixField::from_fn(grid, s_g);
    let ctc = curlT_curl(&s_field);
    let mismatch = grid
        .interior_nodes()
        .map(|k| (det.values[k] + ctc.values[k]).abs())
        .fold(0.0, f64::max);
    let compat_tol = opts
        .compat_tol
        .unwrap_or_else(|| 25.0 * grid.spacing().powi(2) * (1.0 + det.max_abs_interior()));
    if mismatch > compat_tol {
        return Err(Error::Integrability {
            what: "det∇²v = −curlᵀcurl S",
            residual: mismatch,
            tol: compat_tol,
        });
    }
    let mut z = ScalarField::zeros(grid);
    if eps == 0.0 {
        return Ok(MatchingReport {
            z,
            eps,
            residual: mismatch,
            iterations: 0,
            trace: vec![mismatch],
            curvature: 0.0,
            z_max: 0.0,
            ellipticity,
        });
    }

    let p = metric_field(grid, s_g, s_eps, eps);
    let interior: Vec<usize> = grid.interior_nodes().collect();
    let mut pos = vec![usize::MAX; grid.len()];
    for (i, &k) in interior.iter().enumerate() {
        pos[k] = i;
    }
    let st = grid.stencils();
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let phi = matching_residual(&p, v, &z, eps)?;
        let res = phi.max_abs_interior();
        trace.push(res);
        if !res.is_finite() || (trace.len() > 1 && res > 10.0 * trace[trace.len() - 2]) {
            return Err(Error::NoConvergence {
                what: "matching Newton",
                msg: format!("diverged; residual trace {trace:?}"),
            });
        }
        if res < opts.tol {
            break;
        }
        if iterations == opts.max_iter {
            return Err(Error::NoConvergence {
                what: "matching Newton",
                msg: format!("no convergence in {} steps; residual trace {trace:?}", opts.max_iter),
            });
        }
        let hw = hessian(&v.add(&z));
        let mut trips = Vec::with_capacity(interior.len() * 12);
        for (i, &k) in interior.iter().enumerate() {
            let [a11, a12, a22] = hw.at(k);
            for (op, c) in [(&st.d11, a22), (&st.d12, -2.0 * a12), (&st.d22, a11)] {
                let (cols, vals) = op.row(k);
                for (&m, &w) in cols.iter().zip(vals) {
                    if pos[m] != usize::MAX {
                        trips.push(Triplet::new(i, pos[m], c * w));
                    }
                }
            }
        }
        let lu = LuFactor::new(interior.len(), &trips)?;
        let rhs: Vec<f64> = interior.iter().map(|&k| phi.values[k]).collect();
        let delta = lu.solve(&rhs);
        for (i, &k) in interior.iter().enumerate() {
            z.values[k] += delta[i];
        }
        iterations += 1;
    }
    let kappa = gauss_curvature_metric(&p, &v.add(&z), eps)?;
    let curvature = grid
        .interior_nodes()
        .map(|k| kappa.values[k].abs())
        .fold(0.0, f64::max);
    Ok(MatchingReport {
        z_max: z.max_abs(),
        z,
        eps,
        residual: *trace.last().unwrap(),
        iterations,
        trace,
        curvature,
        ellipticity,
    })
}
