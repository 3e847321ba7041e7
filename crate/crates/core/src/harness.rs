//! Thin-film scaling experiments with manufactured prestrain.
//!
//! The growth data is built backwards from a chosen pair `(v, w)` so the
//! in-plane stretching of the recovery sequence vanishes identically; the 3D
//! energy of that sequence is then compared with the 2D bending energy.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{Grid2D, ScalarField};
use crate::elasticity3d::{
    build_recovery, compat_check, energy_3d, limit_energy, limit_energy_poly, stretching, CompatReport,
    GrowthSpec, QuadraticForm3,
};
use crate::error::{Error, Result};
use crate::poly::{embed_sym, Mat3Poly, Poly2};

/// Tolerance of the polynomial audits in [`manufacture`].
pub const AUDIT_TOL: f64 = 1e-10;

/// `det∇²v` as a polynomial.
pub fn det_hessian_poly(v: &Poly2) -> Poly2 {
    let h = v.hessian();
    &(&h[0][0] * &h[1][1]) - &(&h[0][1] * &h[0][1])
}

fn curl_t_curl_poly(s: &[Poly2; 3]) -> Poly2 {
    &(&s[2].d1().d1() - &s[1].d1().d2().scale(2.0)) + &s[0].d2().d2()
}

fn sup_on(p: &Poly2, grid: &Grid2D) -> f64 {
    grid.domain_nodes().map(|k| p.eval(grid.coords(k)).abs()).fold(0.0, f64::max)
}

/// Growth data whose 2×2 stretching block is `sym∇w + ½∇v⊗∇v`, so that
/// `det∇²v = −curlᵀcurl (S_g)₂ₓ₂` holds identically. Audited on `grid`.
pub fn manufacture(v: &Poly2, w: &[Poly2; 2], b_g: Mat3Poly, gamma: f64, grid: &Grid2D) -> Result<GrowthSpec> {
    let gv = v.grad();
    let block = [
        &w[0].d1() + &(&gv[0] * &gv[0]).scale(0.5),
        &(&w[0].d2() + &w[1].d1()).scale(0.5) + &(&gv[0] * &gv[1]).scale(0.5),
        &w[1].d2() + &(&gv[1] * &gv[1]).scale(0.5),
    ];
    let spec = GrowthSpec {
        s_g: embed_sym(&block),
        b_g,
        gamma,
    };
    let stretch = stretching(&spec, v, w)
        .iter()
        .map(|p| sup_on(p, grid))
        .fold(0.0, f64::max);
    let gauss = sup_on(&(&det_hessian_poly(v) + &curl_t_curl_poly(&block)), grid);
    let residual = stretch.max(gauss);
    if !(residual <= AUDIT_TOL * (1.0 + sup_on(&det_hessian_poly(v), grid))) {
        return Err(Error::Integrability {
            what: "manufactured constraint audit",
            residual,
            tol: AUDIT_TOL,
        });
    }
    Ok(spec)
}

#[derive(Clone, Debug)]
pub struct ScalingExperiment {
    pub spec: GrowthSpec,
    pub v: Poly2,
    pub w: [Poly2; 2],
    pub q: QuadraticForm3,
    pub h_list: Vec<f64>,
    /// In-plane quadrature grid.
    pub grid: Arc<Grid2D>,
    /// Gauss points across the thickness.
    pub n_thick: usize,
    pub expected_limit: f64,
}

impl ScalingExperiment {
    /// Validates the thickness range and the manufactured contract and
    /// computes the expected limit `(1/12)∫Q₂(∇²v + sym B_g)`.
    pub fn new(
        spec: GrowthSpec,
        v: Poly2,
        w: [Poly2; 2],
        q: QuadraticForm3,
        h_list: Vec<f64>,
        grid: Arc<Grid2D>,
        n_thick: usize,
    ) -> Result<Self> {
        if !(spec.gamma > 1.0 && spec.gamma < 2.0) {
            return Err(Error::Config(format!("gamma must lie in (1, 2), got {}", spec.gamma)));
        }
        if h_list.is_empty() || h_list.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Config("h_list must hold positive thicknesses".into()));
        }
        if h_list.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::Config("h_list must be strictly decreasing".into()));
        }
        if n_thick == 0 {
            return Err(Error::Config("n_thick must be positive".into()));
        }
        let stretch = stretching(&spec, &v, &w)
            .iter()
            .map(|p| sup_on(p, &grid))
            .fold(0.0, f64::max);
        if stretch > AUDIT_TOL {
            return Err(Error::Rejected {
                what: "manufactured contract sym∇w + ½∇v⊗∇v = sym S_g",
                residual: stretch,
                tol: AUDIT_TOL,
            });
        }
        let expected_limit = limit_energy_poly(&v, &spec.b_g, &q, &grid);
        Ok(ScalingExperiment {
            spec,
            v,
            w,
            q,
            h_list,
            grid,
            n_thick,
            expected_limit,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub h: f64,
    pub energy: f64,
    /// `energy / h^{γ+2}`
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingResult {
    pub gamma: f64,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `log energy` against `log h`; `None` when some
    /// energy is zero (the log-log fit is undefined).
    pub slope: Option<f64>,
    /// Richardson extrapolation of the ratio over the two smallest `h`.
    pub limit: Option<f64>,
    pub expected_limit: f64,
    /// Smallest observed ratio.
    pub min_ratio: f64,
}

impl ScalingResult {
    /// `|limit − expected| / expected`, when both are available and nonzero.
    pub fn limit_rel_error(&self) -> Option<f64> {
        let l = self.limit?;
        (self.expected_limit != 0.0).then(|| (l - self.expected_limit).abs() / self.expected_limit.abs())
    }

    pub fn verdict(&self, slope_tol: f64, limit_tol: f64) -> String {
        let target = self.gamma + 2.0;
        if self.expected_limit.abs() < 1e-12 && self.rows.iter().any(|r| r.energy != 0.0) {
            let decreasing = self.rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
            return if decreasing {
                "zero limit: ratio decreasing to 0".into()
            } else {
                "zero limit: ratios not decreasing".into()
            };
        }
        match self.slope {
            None if self.rows.iter().all(|r| r.energy == 0.0) => "zero energy (slope undefined)".into(),
            None => "slope undefined".into(),
            Some(s) if (s - target).abs() > slope_tol => format!("slope {s:.4} off γ+2 = {target}"),
            Some(_) => match self.limit_rel_error() {
                Some(e) if e > limit_tol => format!("limit off by {:.2}%", 100.0 * e),
                _ => "ok".into(),
            },
        }
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let s = sxy / sxx;
    s.is_finite().then_some(s)
}

/// Order `p` of the leading correction `ratio(h) ≈ L + C h^p`: the recovery
/// sequence's first neglected terms are `h^{2γ−2}` relative to the limit.
pub fn richardson_order(gamma: f64) -> f64 {
    2.0 * gamma - 2.0
}

/// 3D energies of the recovery sequence for every `h`, in parallel.
pub fn run_scaling(exp: &ScalingExperiment) -> Result<ScalingResult> {
    let gamma = exp.spec.gamma;
    let energies: Vec<Result<f64>> = exp
        .h_list
        .par_iter()
        .map(|&h| {
            let u = build_recovery(&exp.spec, &exp.v, &exp.w, &exp.q, h)?;
            energy_3d(&u, &exp.spec, &exp.q, h, &exp.grid, exp.n_thick)
        })
        .collect();
    let mut rows = Vec::with_capacity(exp.h_list.len());
    for (&h, e) in exp.h_list.iter().zip(energies) {
        let energy = e?;
        rows.push(ScalingRow {
            h,
            energy,
            ratio: energy / h.powf(gamma + 2.0),
        });
    }
    let slope = if rows.iter().all(|r| r.energy > 0.0) {
        let lx: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r.energy.ln()).collect();
        fit_slope(&lx, &ly)
    } else {
        None
    };
    let limit = match rows.as_slice() {
        [.., a, b] => {
            let p = richardson_order(gamma);
            let (ha, hb) = (a.h.powf(p), b.h.powf(p));
            Some((a.ratio * hb - b.ratio * ha) / (hb - ha))
        }
        [only] => Some(only.ratio),
        [] => None,
    };
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    Ok(ScalingResult {
        gamma,
        rows,
        slope,
        limit,
        expected_limit: exp.expected_limit,
        min_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    /// `min` over the candidates of `(1/12)∫Q₂(∇²v + sym B_g)`.
    pub gap: f64,
    pub best: String,
    pub candidates: Vec<(String, f64)>,
    pub compat: CompatReport,
    /// Whether `gap < tol` agrees with the compatibility verdict.
    pub consistent: bool,
}

/// Smallest limit energy over a candidate family, cross-reported with the
/// linearised compatibility conditions.
pub fn lower_bound_gap(
    spec: &GrowthSpec,
    candidates: &[(String, ScalarField)],
    q: &QuadraticForm3,
    tol: f64,
) -> Result<GapReport> {
    let Some((_, first)) = candidates.first() else {
        return Err(Error::Config("lower_bound_gap needs at least one candidate".into()));
    };
    let grid = first.grid.clone();
    let values: Vec<(String, f64)> = candidates
        .iter()
        .map(|(name, v)| (name.clone(), limit_energy(v, &spec.b_g, q)))
        .collect();
    let (best, gap) = values
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(n, g)| (n.clone(), *g))
        .unwrap();
    let compat = compat_check(spec, &grid, tol);
    let consistent = (gap < tol) == compat.compatible();
    Ok(GapReport {
        gap,
        best,
        candidates: values,
        compat,
        consistent,
    })
}
