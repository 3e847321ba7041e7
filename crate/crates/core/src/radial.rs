//! Radially symmetric solutions on the unit disk: `v_f`, its energy, the
//! admissibility integrals and the radial Lagrange multiplier.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{Grid2D, ScalarField};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    ConstraintF,
    DisplacementV,
    MultiplierLambda,
}

/// A function of `r ∈ [0, 1]` sampled on `m` uniform nodes, optionally
/// backed by the closed form it was sampled from.
#[derive(Clone)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    /// Nodal derivative, when known; enables Hermite interpolation.
    pub slope: Option<Vec<f64>>,
    /// Points where the source may jump; quadrature splits there.
    pub breaks: Vec<f64>,
    /// Sampled lower bound `c` of a constraint profile.
    pub lower_bound: f64,
    source: Option<RadialFn>,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile")
            .field("kind", &self.kind)
            .field("m", &self.r.len())
            .field("breaks", &self.breaks)
            .field("lower_bound", &self.lower_bound)
            .field("has_source", &self.source.is_some())
            .finish()
    }
}

fn uniform_nodes(m: usize) -> Result<Vec<f64>> {
    if m < 3 {
        return Err(Error::Config(format!("radial grid needs at least 3 nodes, got {m}")));
    }
    Ok((0..m).map(|i| i as f64 / (m - 1) as f64).collect())
}

impl RadialProfile {
    /// Constraint profile sampled from a closed form.
    pub fn constraint(f: impl Fn(f64) -> f64 + Send + Sync + 'static, m: usize, breaks: &[f64]) -> Result<Self> {
        let src: RadialFn = Arc::new(f);
        let r = uniform_nodes(m)?;
        let values: Vec<f64> = r.iter().map(|&x| src(x)).collect();
        let mut breaks: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0).collect();
        breaks.sort_by(f64::total_cmp);
        let mut lower = values.iter().copied().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
        for &b in &breaks {
            for x in [b - 1e-12, b + 1e-12] {
                lower = lower.min(src(x));
            }
        }
        Ok(RadialProfile {
            kind: ProfileKind::ConstraintF,
            r,
            values,
            slope: None,
            breaks,
            lower_bound: lower,
            source: Some(src),
        })
    }

    pub fn constant(c: f64, m: usize) -> Result<Self> {
        Self::constraint(move |_| c, m, &[])
    }

    /// `f_ε = ε` on `(0, ½]`, `1` on `(½, 1]`.
    pub fn eps_step(eps: f64, m: usize) -> Result<Self> {
        Self::constraint(move |r| if r <= 0.5 { eps } else { 1.0 }, m, &[0.5])
    }

    /// Profile known only through samples on a uniform grid.
    pub fn from_samples(kind: ProfileKind, values: Vec<f64>, slope: Option<Vec<f64>>) -> Result<Self> {
        let r = uniform_nodes(values.len())?;
        if let Some(s) = &slope {
            if s.len() != values.len() {
                return Err(Error::Config("slope length mismatch".into()));
            }
        }
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(RadialProfile {
            kind,
            r,
            values,
            slope,
            breaks: Vec::new(),
            lower_bound: lower,
            source: None,
        })
    }

    pub fn m(&self) -> usize {
        self.r.len()
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.m() - 1) as f64
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    /// Value at any `r ∈ [0, 1]`: the closed form when available, otherwise
    /// cubic Hermite (with slopes) or linear interpolation.
    pub fn eval(&self, r: f64) -> f64 {
        if let Some(s) = &self.source {
            return s(r);
        }
        let dr = self.spacing();
        let t = (r / dr).clamp(0.0, (self.m() - 1) as f64);
        let i = (t.floor() as usize).min(self.m() - 2);
        let s = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        match &self.slope {
            Some(d) => {
                let (m0, m1) = (d[i] * dr, d[i + 1] * dr);
                let (s2, s3) = (s * s, s * s * s);
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * m0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * m1
            }
            None => y0 + s * (y1 - y0),
        }
    }

    /// Lift to the disk grid: `x ↦ p(|x|)`.
    pub fn lift(&self, grid: &Arc<Grid2D>) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.eval((x[0] * x[0] + x[1] * x[1]).sqrt().min(1.0)))
    }

    /// Rows `r,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (r, v) in self.r.iter().zip(&self.values) {
            writeln!(w, "{r:e},{v:e}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// quadrature helpers

struct Gl {
    lo: (Vec<f64>, Vec<f64>),
    hi: (Vec<f64>, Vec<f64>),
}

impl Gl {
    fn new() -> Self {
        Gl {
            lo: gauss_legendre(7),
            hi: gauss_legendre(10),
        }
    }

    fn fixed(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        crate::quadrature::integrate_gl(g, a, b, &self.hi)
    }

    /// Adaptive bisection comparing a 7- and 10-point rule.
    fn adaptive(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let coarse = crate::quadrature::integrate_gl(g, a, b, &self.lo);
        let fine = crate::quadrature::integrate_gl(g, a, b, &self.hi);
        if depth == 0 || (fine - coarse).abs() <= tol.max(1e-15 * fine.abs()) {
            return fine;
        }
        let m = 0.5 * (a + b);
        self.adaptive(g, a, m, 0.5 * tol, depth - 1) + self.adaptive(g, m, b, 0.5 * tol, depth - 1)
    }

    /// `∫_a^b g` over cells split at `breaks`, geometrically graded towards
    /// `a` when `a = 0` (integrable endpoint singularities).
    fn graded(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut pts = vec![a, b];
        pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        let floor = if a > 0.0 { a } else { b * 2f64.powi(-60) };
        let mut x = b;
        while x > floor {
            x *= 0.5;
            if x > a {
                pts.push(x);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2)
            .map(|w| self.adaptive(g, w[0], w[1], tol, 40))
            .sum()
    }
}

/// Cumulative `F(r) = ∫₀^r 2s f(s) ds` on the profile nodes.
struct Cumulative<'a> {
    f: &'a RadialProfile,
    gl: Gl,
    nodes: Vec<f64>,
}

impl<'a> Cumulative<'a> {
    fn new(f: &'a RadialProfile) -> Self {
        let gl = Gl::new();
        let g = |s: f64| 2.0 * s * f.eval(s);
        let mut nodes = Vec::with_capacity(f.m());
        nodes.push(0.0);
        let mut acc = 0.0;
        for i in 1..f.m() {
            acc += gl.graded(&g, if i == 1 { 0.0 } else { f.r[i - 1] }, f.r[i], &f.breaks, 1e-16);
            nodes.push(acc);
        }
        Cumulative { f, gl, nodes }
    }

    fn at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let dr = self.f.spacing();
        let i = ((r / dr).floor() as usize).min(self.f.m() - 1);
        let base = self.f.r[i];
        if r == base {
            return self.nodes[i];
        }
        let g = |s: f64| 2.0 * s * self.f.eval(s);
        let lo = if i == 0 { 0.0 } else { base };
        let extra = if i == 0 {
            self.gl.graded(&g, 0.0, r, &self.f.breaks, 1e-16)
        } else if self.f.breaks.iter().any(|&b| b > lo && b < r) {
            self.gl.graded(&g, lo, r, &self.f.breaks, 1e-16)
        } else {
            self.gl.fixed(&g, lo, r)
        };
        self.nodes[i] + extra
    }
}

fn require_positive(f: &RadialProfile) -> Result<()> {
    if f.kind != ProfileKind::ConstraintF {
        return Err(Error::Config("expected a constraint profile".into()));
    }
    if !(f.lower_bound > 0.0) {
        return Err(Error::NotAdmissible(format!(
            "f must be bounded below by a positive constant (sampled min {:e})",
            f.lower_bound
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// admissibility

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibleIntegral {
    /// `∫ r|log r| f`
    First,
    /// `∫ r³f² / ∫₀^r s f`
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub fails: Option<AdmissibleIntegral>,
    /// Truncated estimates `∫_δ^1` for `δ = 10⁻², 10⁻⁴, …`.
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl Admissibility {
    pub fn verdict(&self) -> String {
        match self.fails {
            None => "admissible".into(),
            Some(AdmissibleIntegral::First) => "fails(first)".into(),
            Some(AdmissibleIntegral::Second) => "fails(second)".into(),
        }
    }
}

const TRUNCATIONS: [f64; 6] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12];

fn diverging(seq: &[f64]) -> bool {
    let n = seq.len();
    if seq.iter().any(|x| !x.is_finite()) {
        return true;
    }
    let d1 = (seq[n - 1] - seq[n - 2]).abs();
    let d0 = (seq[n - 2] - seq[n - 3]).abs();
    let scale = 1.0 + seq[n - 1].abs();
    d1 > 1e-9 * scale && d1 > 0.5 * d0
}

/// Estimate both admissibility integrals under refinement of the cut-off
/// near `r = 0` and flag divergence from the trend of the increments.
pub fn radial_admissible(f: &RadialProfile) -> Admissibility {
    let fails_second = Admissibility {
        admissible: false,
        fails: Some(AdmissibleIntegral::Second),
        first: Vec::new(),
        second: Vec::new(),
    };
    if f.kind != ProfileKind::ConstraintF || !(f.lower_bound > 0.0) {
        return fails_second;
    }
    let gl = Gl::new();
    let g1 = |r: f64| r * r.ln().abs() * f.eval(r);
    // ∫₀^r s f(s) ds, graded from 0 so singular f is handled
    let inner = |r: f64| gl.graded(&|s: f64| s * f.eval(s), 0.0, r, &f.breaks, 1e-15);
    let g2 = |r: f64| {
        let fr = f.eval(r);
        r.powi(3) * fr * fr / inner(r)
    };
    let first: Vec<f64> = TRUNCATIONS.iter().map(|&d| gl.graded(&g1, d, 1.0, &f.breaks, 1e-12)).collect();
    // The second integrand nests a quadrature: use a coarser fixed rule per cell.
    let second: Vec<f64> = TRUNCATIONS
        .iter()
        .map(|&d| {
            let mut pts: Vec<f64> = vec![d, 1.0];
            let mut x = 1.0;
            while x > d {
                x *= 0.5;
                if x > d {
                    pts.push(x);
                }
            }
            pts.extend(f.breaks.iter().copied().filter(|&b| b > d));
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            pts.windows(2).map(|w| gl.fixed(&g2, w[0], w[1])).sum()
        })
        .collect();
    let fails = if diverging(&first) {
        Some(AdmissibleIntegral::First)
    } else if diverging(&second) {
        Some(AdmissibleIntegral::Second)
    } else {
        None
    };
    Admissibility {
        admissible: fails.is_none(),
        fails,
        first,
        second,
    }
}

// ---------------------------------------------------------------------------
// minimizer and energy

/// `v_f(r) = ∫₀^r (∫₀^s 2t f(t) dt)^{1/2} ds`, with `v_f′ = √F` stored as slope.
pub fn radial_minimizer(f: &RadialProfile) -> Result<RadialProfile> {
    require_positive(f)?;
    let adm = radial_admissible(f);
    if !adm.admissible {
        return Err(Error::NotAdmissible(adm.verdict()));
    }
    let cum = Cumulative::new(f);
    let sqrt_f = |s: f64| cum.at(s).max(0.0).sqrt();
    let mut v = Vec::with_capacity(f.m());
    v.push(0.0);
    let mut acc = 0.0;
    for i in 1..f.m() {
        let (a, b) = (f.r[i - 1], f.r[i]);
        acc += if f.breaks.iter().any(|&x| x > a && x < b) {
            cum.gl.graded(&sqrt_f, a, b, &f.breaks, 1e-16)
        } else {
            cum.gl.fixed(&sqrt_f, a, b)
        };
        v.push(acc);
    }
    let slope: Vec<f64> = cum.nodes.iter().map(|x| x.max(0.0).sqrt()).collect();
    RadialProfile::from_samples(ProfileKind::DisplacementV, v, Some(slope))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialEnergy {
    /// `2π ∫ r³f²/F`
    pub term_curvature: f64,
    /// `2π ∫ 2r|log r| f`
    pub term_log: f64,
    pub total: f64,
}

/// `∫_Ω |∇²v_f|² = 2π∫ r³f²/∫₀^r 2sf + 2π∫ 2r|log r| f`.
pub fn radial_energy(f: &RadialProfile) -> Result<RadialEnergy> {
    require_positive(f)?;
    let adm = radial_admissible(f);
    if let Some(which) = adm.fails {
        return Err(Error::NotAdmissible(format!("divergent {which:?} integral")));
    }
    let cum = Cumulative::new(f);
    let g1 = |r: f64| {
        let fr = f.eval(r);
        r.powi(3) * fr * fr / cum.at(r)
    };
    let g2 = |r: f64| 2.0 * r * r.ln().abs() * f.eval(r);
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for i in 1..f.m() {
        let (a, b) = (if i == 1 { 0.0 } else { f.r[i - 1] }, f.r[i]);
        t1 += cum.gl.graded(&g1, a, b, &f.breaks, 1e-14);
        t2 += cum.gl.graded(&g2, a, b, &f.breaks, 1e-14);
    }
    let (t1, t2) = (2.0 * PI * t1, 2.0 * PI * t2);
    if !(t1.is_finite() && t2.is_finite()) {
        return Err(Error::NotAdmissible("non-finite energy term".into()));
    }
    Ok(RadialEnergy {
        term_curvature: t1,
        term_log: t2,
        total: t1 + t2,
    })
}

// ---------------------------------------------------------------------------
// multiplier

/// Radial multiplier: `λ′ = −2r(Δv)′/v′` integrated backward from
/// `λ(1) = −2v″(1)/v′(1)` with classical RK4 on the profile grid.
pub fn lambda_multiplier(f: &RadialProfile) -> Result<RadialProfile> {
    require_positive(f)?;
    let cum = Cumulative::new(f);
    let dr = f.spacing();
    let fd = 1e-5;
    let fprime = |r: f64| {
        let (a, b) = ((r - fd).max(0.0), (r + fd).min(1.0));
        (f.eval(b) - f.eval(a)) / (b - a)
    };
    // (Δv)′ = (2f + rf′)/v′ − r²f²/v′³ − v′/r²
    let rhs = |r: f64| -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        let vp = cum.at(r).sqrt();
        if !(vp > 0.0) {
            return Err(Error::SingularOde {
                r,
                msg: "v' vanishes".into(),
            });
        }
        let fr = f.eval(r);
        let dlap = (2.0 * fr + r * fprime(r)) / vp - r * r * fr * fr / vp.powi(3) - vp / (r * r);
        Ok(-2.0 * r * dlap / vp)
    };
    let m = f.m();
    let mut lam = vec![0.0; m];
    lam[m - 1] = -2.0 * f.eval(1.0) / cum.at(1.0);
    for i in (1..m).rev() {
        let r = f.r[i];
        // the right-hand side does not depend on λ
        let (k1, k2, k4) = (rhs(r)?, rhs(r - 0.5 * dr)?, rhs(r - dr)?);
        lam[i - 1] = lam[i] - dr / 6.0 * (k1 + 4.0 * k2 + k4);
    }
    let slope: Vec<f64> = f.r.iter().map(|&r| rhs(r)).collect::<Result<_>>()?;
    RadialProfile::from_samples(ProfileKind::MultiplierLambda, lam, Some(slope))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialElResidual {
    /// `max |(λ′v′)′ + 2(r(Δv)′)′|` over nodes in `(δ, 1)`, three-node fringe at `r = 1` excluded.
    pub interior: f64,
    /// `2v″(1) + λ(1)v′(1)`
    pub boundary_normal: f64,
    /// `2(Δv)′(1) + v′(1)λ′(1)`
    pub boundary_third: f64,
    /// The tangential-derivative term vanishes identically for radial data.
    pub boundary_tangential: f64,
}

/// Second-order finite-difference derivative on a uniform grid.
fn fd_derivative(y: &[f64], dr: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dr)
            } else if i == n - 1 {
                (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * dr)
            } else {
                (y[i + 1] - y[i - 1]) / (2.0 * dr)
            }
        })
        .collect()
}

/// Radial Euler–Lagrange check by finite differences on the profile grid.
pub fn radial_el_check(v: &RadialProfile, lambda: &RadialProfile, delta: f64) -> Result<RadialElResidual> {
    if v.m() != lambda.m() {
        return Err(Error::Config("profiles on different grids".into()));
    }
    let dr = v.spacing();
    let vp = v.slope.clone().unwrap_or_else(|| fd_derivative(&v.values, dr));
    let vpp = fd_derivative(&vp, dr);
    let lap: Vec<f64> = (0..v.m())
        .map(|i| if v.r[i] > 0.0 { vpp[i] + vp[i] / v.r[i] } else { 2.0 * vpp[i] })
        .collect();
    let dlap = fd_derivative(&lap, dr);
    let lp = lambda.slope.clone().unwrap_or_else(|| fd_derivative(&lambda.values, dr));
    let flux: Vec<f64> = (0..v.m())
        .map(|i| lp[i] * vp[i] + 2.0 * v.r[i] * dlap[i])
        .collect();
    let dflux = fd_derivative(&flux, dr);
    let interior = (0..v.m())
        // nested one-sided differences lose an order next to r = 1
        .filter(|&i| v.r[i] > delta && i + 3 < v.m())
        .map(|i| dflux[i].abs())
        .fold(0.0, f64::max);
    let last = v.m() - 1;
    Ok(RadialElResidual {
        interior,
        boundary_normal: 2.0 * vpp[last] + lambda.values[last] * vp[last],
        boundary_third: 2.0 * dlap[last] + vp[last] * lp[last],
        boundary_tangential: 0.0,
    })
}
