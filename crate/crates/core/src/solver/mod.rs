//! Minimization of `∫|∇²v|²` subject to `det∇²v = f` (or `≥ f`) on a grid by
//! an augmented Lagrangian with a preconditioned L-BFGS inner solver, plus
//! Euler–Lagrange residuals, gauge fixing and the matching correction.

pub mod lbfgs;
mod matching;
mod sparse;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use faer::sparse::Triplet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{
    bilaplacian, det2, gradient, hessian, integrate, laplacian, Grid2D, ScalarField,
};
use crate::error::{Error, Result};
use crate::radial::{radial_minimizer, RadialProfile};

pub use matching::{
    default_s_eps, matching_correct, matching_residual, metric_field, MatchingOptions,
    MatchingReport,
};

use sparse::SpdFactor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintMode {
    /// `det∇²v = f`
    Equality,
    /// `det∇²v ≥ f`
    Inequality,
}

impl FromStr for ConstraintMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq" | "equality" => Ok(ConstraintMode::Equality),
            "ineq" | "inequality" => Ok(ConstraintMode::Inequality),
            _ => Err(Error::Config(format!("unknown constraint mode '{s}' (eq|ineq)"))),
        }
    }
}

impl fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintMode::Equality => "equality",
            ConstraintMode::Inequality => "inequality",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Initial penalty weight.
    pub penalty_mu: f64,
    pub mu_growth: f64,
    pub multiplier_update: Toggle,
    pub max_outer: usize,
    /// Inner stop: `√(gᵀP⁻¹g)` with `P` the Gauss–Newton preconditioner.
    pub inner_tol: f64,
    pub max_inner: usize,
    /// Stop when the max-norm constraint violation is below this.
    pub constraint_tol: f64,
    pub mode: ConstraintMode,
    pub lbfgs_memory: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            penalty_mu: 10.0,
            mu_growth: 4.0,
            multiplier_update: Toggle::On,
            max_outer: 40,
            inner_tol: 1e-6,
            max_inner: 400,
            constraint_tol: 1e-4,
            mode: ConstraintMode::Equality,
            lbfgs_memory: 12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("solver: {m}")));
        if !(self.penalty_mu > 0.0) {
            return bad("penalty_mu must be > 0");
        }
        if !(self.mu_growth > 1.0) {
            return bad("mu_growth must be > 1");
        }
        if self.max_outer < 1 {
            return bad("max_outer must be >= 1");
        }
        if !(self.constraint_tol > 0.0) {
            return bad("constraint_tol must be > 0");
        }
        if !(self.inner_tol > 0.0) {
            return bad("inner_tol must be > 0");
        }
        if self.max_inner < 1 || self.lbfgs_memory < 1 {
            return bad("max_inner and lbfgs_memory must be >= 1");
        }
        Ok(())
    }

    fn with_mode(&self, mode: ConstraintMode) -> Self {
        SolverConfig {
            mode,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub outer: usize,
    /// `∫|∇²v|²` after the inner solve.
    pub energy: f64,
    pub residual: f64,
    pub mu: f64,
    pub inner_iters: usize,
    pub decrement: f64,
    /// Penalized objective never increased over the accepted inner steps.
    pub monotone: bool,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ElResidual {
    pub interior: f64,
    pub bdry_normal: f64,
    pub bdry_third: f64,
}

impl ElResidual {
    pub fn max(&self) -> f64 {
        self.interior.max(self.bdry_normal).max(self.bdry_third)
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Gauge-fixed minimizer.
    pub v: ScalarField,
    pub energy: f64,
    pub constraint_residual: f64,
    pub el_residual: ElResidual,
    pub outer_iters: usize,
    pub converged: bool,
    pub mode: ConstraintMode,
    pub trace: Vec<TraceEntry>,
    /// Discrete multiplier, sign convention of `J + ∫λ(det∇²v − f)`.
    pub multiplier: ScalarField,
    /// `det∇²v` (inequality mode only).
    pub psi: Option<ScalarField>,
    pub warnings: Vec<String>,
}

/// Subtract the quadrature-mean affine part: the result has zero mean and
/// zero mean gradient.
pub fn gauge_fix(v: &ScalarField) -> ScalarField {
    let g = &v.grid;
    let area = integrate(&ScalarField::constant(g, 1.0));
    let [g1, g2] = gradient(v);
    let (m1, m2) = (integrate(&g1) / area, integrate(&g2) / area);
    let u = v.sub(&ScalarField::from_fn(g, |x| m1 * x[0] + m2 * x[1]));
    let mean = integrate(&u) / area;
    u.map(|a| a - mean)
}

/// `√|mean f|·|x − c|²/2` for positive mean, the saddle `√|mean f|(x₁² − x₂²)/2`
/// around the domain centre otherwise.
pub fn default_initial_guess(f: &ScalarField) -> ScalarField {
    let g = &f.grid;
    let area = integrate(&ScalarField::constant(g, 1.0));
    let mean = integrate(f) / area;
    let c = g.coords(g.center_node());
    let s = mean.abs().sqrt();
    ScalarField::from_fn(g, |x| {
        let (a, b) = (x[0] - c[0], x[1] - c[1]);
        if mean > 0.0 {
            0.5 * s * (a * a + b * b)
        } else {
            0.5 * s * (a * a - b * b)
        }
    })
}

const PRECOND_REFRESH: usize = 50;

/// `λ = −2 sign f` (the exact multiplier of quadratic paraboloids and saddles),
/// in the storage convention of `mode`.
fn initial_multiplier(f: &ScalarField, mode: ConstraintMode) -> Vec<f64> {
    let g = &f.grid;
    (0..g.len())
        .map(|k| {
            if !g.in_domain(k) {
                return 0.0;
            }
            let lam = -2.0 * f.values[k].signum();
            match mode {
                ConstraintMode::Equality => lam,
                ConstraintMode::Inequality => (-lam).max(0.0),
            }
        })
        .collect()
}

/// Lift of the radial minimizer `v_f` onto a disk grid.
pub fn radial_initial_guess(f: &RadialProfile, grid: &Arc<Grid2D>) -> Result<ScalarField> {
    Ok(radial_minimizer(f)?.lift(grid))
}

/// `Σ w(|∇²v|² + penalty(det∇²v − f))` over all domain nodes, as a function
/// of nodal values (length `grid.len()`, exterior entries ignored).
///
/// The constraint is imposed on the boundary ring too (one-sided Hessians):
/// with the energy but not the constraint there, ring values relax and pull
/// quadratic minimizers off their exact discrete stationarity
/// (`λ = −2 sign f`).
///
/// Equality: `λg + μg²/2`. Inequality: `((λ − μg)₊² − λ²)/(2μ)`, `λ ≥ 0`.
pub struct PenalizedObjective {
    grid: Arc<Grid2D>,
    f: Vec<f64>,
    mode: ConstraintMode,
    pub mu: f64,
    pub lambda: Vec<f64>,
    dom: Vec<usize>,
}

impl PenalizedObjective {
    pub fn new(f: &ScalarField, mode: ConstraintMode, mu: f64) -> Self {
        let grid = f.grid.clone();
        let dom = grid.domain_nodes().collect();
        PenalizedObjective {
            f: f.values.clone(),
            lambda: vec![0.0; grid.len()],
            grid,
            mode,
            mu,
            dom,
        }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    fn hess_at(&self, k: usize, x: &[f64]) -> [f64; 3] {
        let s = self.grid.stencils();
        [s.d11.apply_row(k, x), s.d12.apply_row(k, x), s.d22.apply_row(k, x)]
    }

    /// Value and coefficients of `∂/∂(a11, a12, a22)` at node `k`.
    fn node(&self, k: usize, x: &[f64]) -> (f64, [f64; 3]) {
        let w = self.grid.weight(k);
        let [a11, a12, a22] = self.hess_at(k, x);
        let mut e = w * (a11 * a11 + 2.0 * a12 * a12 + a22 * a22);
        let mut c = [2.0 * w * a11, 4.0 * w * a12, 2.0 * w * a22];
        let r = a11 * a22 - a12 * a12 - self.f[k];
        let (lam, mu) = (self.lambda[k], self.mu);
        let s = match self.mode {
            ConstraintMode::Equality => {
                e += w * (lam * r + 0.5 * mu * r * r);
                w * (lam + mu * r)
            }
            ConstraintMode::Inequality => {
                let t = (lam - mu * r).max(0.0);
                e += w / (2.0 * mu) * (t * t - lam * lam);
                -w * t
            }
        };
        c[0] += s * a22;
        c[1] -= 2.0 * s * a12;
        c[2] += s * a11;
        (e, c)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let parts: Vec<f64> = self.dom.par_iter().map(|&k| self.node(k, x).0).collect();
        parts.iter().sum()
    }

    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let parts: Vec<(f64, [f64; 3])> = self.dom.par_iter().map(|&k| self.node(k, x)).collect();
        let n = self.grid.len();
        let mut c = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut val = 0.0;
        for (&k, (e, ck)) in self.dom.iter().zip(&parts) {
            val += e;
            for m in 0..3 {
                c[m][k] = ck[m];
            }
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        let s = self.grid.stencils();
        s.d11.add_transpose(&c[0], grad);
        s.d12.add_transpose(&c[1], grad);
        s.d22.add_transpose(&c[2], grad);
        val
    }

    /// Signed constraint `det∇²v − f` (zero off the domain).
    fn constraint(&self, x: &[f64]) -> Vec<f64> {
        (0..self.grid.len())
            .map(|k| {
                if self.grid.in_domain(k) {
                    let [a, b, c] = self.hess_at(k, x);
                    a * c - b * b - self.f[k]
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn violation(&self, g: &[f64]) -> f64 {
        let grid = &self.grid;
        grid.domain_nodes()
            .map(|k| match self.mode {
                ConstraintMode::Equality => g[k].abs(),
                ConstraintMode::Inequality => (-g[k]).max(0.0),
            })
            .fold(0.0, f64::max)
    }

    fn update_multiplier(&mut self, g: &[f64]) {
        for k in self.grid.domain_nodes() {
            self.lambda[k] = match self.mode {
                ConstraintMode::Equality => self.lambda[k] + self.mu * g[k],
                ConstraintMode::Inequality => (self.lambda[k] - self.mu * g[k]).max(0.0),
            };
        }
    }

    /// Multiplier in the equality sign convention.
    fn multiplier_field(&self) -> ScalarField {
        let sign = match self.mode {
            ConstraintMode::Equality => 1.0,
            ConstraintMode::Inequality => -1.0,
        };
        let grid = &self.grid;
        let vals: Vec<f64> = (0..grid.len())
            .map(|k| if grid.in_domain(k) { sign * self.lambda[k] } else { f64::NAN })
            .collect();
        ScalarField::new(grid.clone(), vals)
    }

    /// Gauss–Newton preconditioner `Σw(2|∇²·|² + μ·active (cof∇²v:∇²·)²)`.
    fn preconditioner(&self, x: &[f64]) -> Result<Precond> {
        let grid = &self.grid;
        let s = grid.stencils();
        let mut pos = vec![usize::MAX; grid.len()];
        for (i, &k) in self.dom.iter().enumerate() {
            pos[k] = i;
        }
        let locals: Vec<Vec<Triplet<usize, usize, f64>>> = self
            .dom
            .par_iter()
            .map(|&k| {
                let w = grid.weight(k);
                let rows = [s.d11.row(k), s.d12.row(k), s.d22.row(k)];
                let mut cols: Vec<usize> = rows.iter().flat_map(|r| r.0.iter().copied()).collect();
                cols.sort_unstable();
                cols.dedup();
                let m = cols.len();
                let dense = |r: (&[usize], &[f64])| {
                    let mut d = vec![0.0; m];
                    for (&c, &v) in r.0.iter().zip(r.1) {
                        d[cols.binary_search(&c).unwrap()] += v;
                    }
                    d
                };
                let r: Vec<Vec<f64>> = rows.iter().map(|&r| dense(r)).collect();
                let mut blocks: Vec<(f64, Vec<f64>)> =
                    vec![(2.0 * w, r[0].clone()), (4.0 * w, r[1].clone()), (2.0 * w, r[2].clone())];
                let [a11, a12, a22] = self.hess_at(k, x);
                let active = match self.mode {
                    ConstraintMode::Equality => true,
                    ConstraintMode::Inequality => {
                        self.lambda[k] - self.mu * (a11 * a22 - a12 * a12 - self.f[k]) > 0.0
                    }
                };
                if active {
                    let q: Vec<f64> =
                        (0..m).map(|i| a22 * r[0][i] - 2.0 * a12 * r[1][i] + a11 * r[2][i]).collect();
                    blocks.push((self.mu * w, q));
                }
                let mut out = Vec::with_capacity(m * (m + 1) / 2);
                for i in 0..m {
                    for j in 0..m {
                        let (pi, pj) = (pos[cols[i]], pos[cols[j]]);
                        if pi < pj {
                            continue;
                        }
                        let v: f64 = blocks.iter().map(|(c, b)| c * b[i] * b[j]).sum();
                        if v != 0.0 {
                            out.push(Triplet::new(pi, pj, v));
                        }
                    }
                }
                out
            })
            .collect();
        let mut trips: Vec<Triplet<usize, usize, f64>> = locals.into_iter().flatten().collect();
        let nd = self.dom.len();
        let mut diag = vec![0.0; nd];
        for t in &trips {
            if t.row == t.col {
                diag[t.row] += t.val;
            }
        }
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let base = trips.len();
        let mut shift = 1e-12 * dmax;
        for _ in 0..4 {
            trips.truncate(base);
            trips.extend((0..nd).map(|i| Triplet::new(i, i, shift)));
            if let Ok(fac) = SpdFactor::new(nd, &trips) {
                return Ok(Precond::new(fac, grid, &self.dom));
            }
            shift *= 1e3;
        }
        Err(Error::NoConvergence {
            what: "preconditioner",
            msg: "cholesky failed for every diagonal shift".into(),
        })
    }
}

struct Precond {
    fac: SpdFactor,
    dom: Vec<usize>,
    /// Orthonormal basis of affine functions restricted to the domain nodes.
    affine: Vec<Vec<f64>>,
}

impl Precond {
    fn new(fac: SpdFactor, grid: &Grid2D, dom: &[usize]) -> Self {
        let mut affine: Vec<Vec<f64>> = Vec::new();
        let raw: [Box<dyn Fn([f64; 2]) -> f64>; 3] =
            [Box::new(|_| 1.0), Box::new(|x| x[0]), Box::new(|x| x[1])];
        for b in raw.iter() {
            let mut v: Vec<f64> = dom.iter().map(|&k| b(grid.coords(k))).collect();
            for e in &affine {
                let d: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(e).for_each(|(a, b)| *a -= d * b);
            }
            let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.iter_mut().for_each(|a| *a /= nrm);
            affine.push(v);
        }
        Precond {
            fac,
            dom: dom.to_vec(),
            affine,
        }
    }

    fn apply(&self, q: &mut [f64]) {
        let mut b: Vec<f64> = self.dom.iter().map(|&k| q[k]).collect();
        self.fac.solve_in_place(&mut b);
        for e in &self.affine {
            let d: f64 = b.iter().zip(e).map(|(a, b)| a * b).sum();
            b.iter_mut().zip(e).for_each(|(a, b)| *a -= d * b);
        }
        q.iter_mut().for_each(|v| *v = 0.0);
        for (&k, v) in self.dom.iter().zip(b) {
            q[k] = v;
        }
    }
}

/// Residuals of the Euler–Lagrange system for the pair `(v, λ)`:
/// interior `2Δ²v + cof∇²v:∇²λ` (max over fringe-excluded nodes), and on
/// boundary nodes `(2∇²v + λcof∇²v):(n⊗n)` and
/// `∂τ[(2∇²v + λcof∇²v):(τ⊗n)] + (2∇Δv + cof∇²v∇λ)·n`.
pub fn el_residual(v: &ScalarField, lambda: &ScalarField) -> ElResidual {
    let g = &v.grid;
    let h = hessian(v);
    let hl = hessian(lambda);
    let bl = bilaplacian(v);
    let interior = g
        .deep_nodes()
        .map(|k| {
            let [a11, a12, a22] = h.at(k);
            let [l11, l12, l22] = hl.at(k);
            (2.0 * bl.values[k] + a22 * l11 - 2.0 * a12 * l12 + a11 * l22).abs()
        })
        .fold(0.0, f64::max);

    // T = 2∇²v + λ cof∇²v
    let t_at = |k: usize| {
        let [a11, a12, a22] = h.at(k);
        let l = lambda.values[k];
        [2.0 * a11 + l * a22, 2.0 * a12 - l * a12, 2.0 * a22 + l * a11]
    };
    let contract = |t: [f64; 3], a: [f64; 2], b: [f64; 2]| {
        t[0] * a[0] * b[0] + t[1] * (a[0] * b[1] + a[1] * b[0]) + t[2] * a[1] * b[1]
    };
    let bdry_normal = g
        .boundary_nodes()
        .map(|k| {
            let nrm = g.outward_normal(k);
            contract(t_at(k), nrm, nrm).abs()
        })
        .fold(0.0, f64::max);

    let tn = ScalarField::new(
        g.clone(),
        (0..g.len())
            .map(|k| {
                if !g.in_domain(k) {
                    return f64::NAN;
                }
                let nrm = g.outward_normal(k);
                contract(t_at(k), [-nrm[1], nrm[0]], nrm)
            })
            .collect(),
    );
    let [tn1, tn2] = gradient(&tn);
    let [dl1, dl2] = gradient(&laplacian(v));
    let [lam1, lam2] = gradient(lambda);
    let bdry_third = g
        .boundary_nodes()
        .map(|k| {
            let nrm = g.outward_normal(k);
            let tau = [-nrm[1], nrm[0]];
            let [a11, a12, a22] = h.at(k);
            let cl = [a22 * lam1.values[k] - a12 * lam2.values[k], -a12 * lam1.values[k] + a11 * lam2.values[k]];
            let flux = (2.0 * dl1.values[k] + cl[0]) * nrm[0] + (2.0 * dl2.values[k] + cl[1]) * nrm[1];
            (tau[0] * tn1.values[k] + tau[1] * tn2.values[k] + flux).abs()
        })
        .fold(0.0, f64::max);
    ElResidual {
        interior,
        bdry_normal,
        bdry_third,
    }
}

/// Minimize with the constraint mode taken from `cfg`.
pub fn minimize(f: &ScalarField, cfg: &SolverConfig, v0: &ScalarField) -> Result<SolveReport> {
    cfg.validate()?;
    let grid = f.grid.clone();
    if !Arc::ptr_eq(&grid, &v0.grid) && (grid.kind() != v0.grid.kind() || grid.n() != v0.grid.n()) {
        return Err(Error::Config("f and v0 live on different grids".into()));
    }
    if let Some(k) = grid.domain_nodes().find(|&k| !f.values[k].is_finite()) {
        return Err(Error::Domain {
            node: k,
            msg: "f is not finite".into(),
        });
    }
    if let Some(k) = grid.domain_nodes().find(|&k| !v0.values[k].is_finite()) {
        return Err(Error::Domain {
            node: k,
            msg: "initial guess is not finite".into(),
        });
    }
    let mut warnings = Vec::new();
    let (fmin, fmax) = grid
        .domain_nodes()
        .map(|k| f.values[k])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if fmin <= 0.0 && fmax >= 0.0 {
        warnings.push(format!(
            "f changes sign or vanishes (min {fmin:e}, max {fmax:e}); no convergence guarantee"
        ));
    }
    if cfg.mode == ConstraintMode::Inequality && fmin <= 0.0 {
        warnings.push("relaxed problem expects f bounded below by a positive constant".into());
    }

    let mut x: Vec<f64> = (0..grid.len())
        .map(|k| if grid.in_domain(k) { v0.values[k] } else { 0.0 })
        .collect();
    let mut obj = PenalizedObjective::new(f, cfg.mode, cfg.penalty_mu);
    obj.lambda = initial_multiplier(f, cfg.mode);
    let energy_of = |x: &[f64]| {
        let v = ScalarField::new(grid.clone(), x.to_vec());
        integrate(&hessian(&v).frob2())
    };
    let opts = lbfgs::LbfgsOptions {
        memory: cfg.lbfgs_memory,
        max_iter: cfg.max_inner,
        tol: cfg.inner_tol,
        ..Default::default()
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut prev_res = f64::INFINITY;
    for outer in 1..=cfg.max_outer {
        // rebuild the preconditioner periodically: curvature and the active
        // set move during the inner solve
        let mut out = lbfgs::LbfgsOutcome::default();
        let mut used = 0;
        while used < cfg.max_inner {
            let pre = obj.preconditioner(&x)?;
            let chunk = lbfgs::LbfgsOptions {
                max_iter: PRECOND_REFRESH.min(cfg.max_inner - used),
                ..opts
            };
            let part = lbfgs::minimize(&mut x, |y, gr| obj.value_grad(y, gr), |q| pre.apply(q), &chunk);
            used += part.iterations.max(1);
            if out.history.is_empty() {
                out.history = part.history.clone();
            } else {
                out.history.extend_from_slice(&part.history[1..]);
            }
            out.decrement = part.decrement;
            out.converged = part.converged;
            out.line_search_failed = part.line_search_failed;
            if part.converged || part.line_search_failed {
                break;
            }
        }
        out.iterations = used;
        let g = obj.constraint(&x);
        let res = obj.violation(&g);
        let monotone = out.history.windows(2).all(|w| w[1] <= w[0]);
        trace.push(TraceEntry {
            outer,
            energy: energy_of(&x),
            residual: res,
            mu: obj.mu,
            inner_iters: out.iterations,
            decrement: out.decrement,
            monotone,
        });
        // a stalled line search at round-off level counts as stationary
        let inner_ok = out.converged || (out.line_search_failed && out.decrement < 1e2 * cfg.inner_tol);
        if res < cfg.constraint_tol && inner_ok {
            converged = true;
            break;
        }
        if cfg.multiplier_update == Toggle::On {
            obj.update_multiplier(&g);
            if res > cfg.constraint_tol && res > 0.25 * prev_res {
                obj.mu *= cfg.mu_growth;
            }
        } else if res > cfg.constraint_tol {
            obj.mu *= cfg.mu_growth;
        }
        prev_res = res;
    }
    let v_raw = ScalarField::new(
        grid.clone(),
        (0..grid.len())
            .map(|k| if grid.in_domain(k) { x[k] } else { f64::NAN })
            .collect(),
    );
    let v = gauge_fix(&v_raw);
    let hv = hessian(&v);
    let energy = integrate(&hv.frob2());
    let g = obj.constraint(&x);
    let constraint_residual = obj.violation(&g);
    let multiplier = obj.multiplier_field();
    let el = el_residual(&v, &multiplier);
    let psi = match cfg.mode {
        ConstraintMode::Inequality => Some(det2(&hv)),
        ConstraintMode::Equality => None,
    };
    Ok(SolveReport {
        v,
        energy,
        constraint_residual,
        el_residual: el,
        outer_iters: trace.len(),
        converged,
        mode: cfg.mode,
        trace,
        multiplier,
        psi,
        warnings,
    })
}

/// Minimize over `det∇²v = f`.
pub fn constrained_minimize(f: &ScalarField, cfg: &SolverConfig, v0: &ScalarField) -> Result<SolveReport> {
    minimize(f, &cfg.with_mode(ConstraintMode::Equality), v0)
}

/// Minimize over `det∇²v ≥ f`; the report carries `ψ[f] = det∇²v`.
pub fn relaxed_minimize(f: &ScalarField, cfg: &SolverConfig, v0: &ScalarField) -> Result<SolveReport> {
    minimize(f, &cfg.with_mode(ConstraintMode::Inequality), v0)
}
