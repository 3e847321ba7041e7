//! Analytic minimiser families: the saddle family for `f ≡ −1` and the
//! holomorphic construction for `f < 0` with `Δ log|f| = 0`, plus recovery
//! of a potential from a prescribed Hessian field.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::{gradient, laplacian, Grid2D, ScalarField, SymMatrixField};
use crate::error::{Error, Result};
use crate::poly::Poly2;

/// `cos θ (x₁² − x₂²)/2 + sin θ x₁x₂`
pub fn saddle_poly(theta: f64) -> Poly2 {
    let (c, s) = (theta.cos(), theta.sin());
    Poly2::from_terms(&[(0.5 * c, 2, 0), (-0.5 * c, 0, 2), (s, 1, 1)])
}

pub fn saddle_family(grid: &Arc<Grid2D>, theta: f64) -> ScalarField {
    let p = saddle_poly(theta);
    ScalarField::from_fn(grid, |x| p.eval(x))
}

/// Tolerances for the harmonicity, integrability and path-independence audits.
#[derive(Clone, Copy, Debug)]
pub struct FamilyOptions {
    /// Scale `C` of the default tolerances `C·h²·(1 + data size)`.
    pub tol_scale: f64,
    /// Random node pairs compared along the two staircase paths.
    pub audit_pairs: usize,
    pub seed: u64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            tol_scale: 25.0,
            audit_pairs: 64,
            seed: 0x5eed,
        }
    }
}

impl FamilyOptions {
    fn tol(&self, grid: &Grid2D, size: f64) -> f64 {
        self.tol_scale * grid.spacing().powi(2) * (1.0 + size)
    }
}

/// Trapezoid integral of `g` from `from` to `to` along a straight grid line.
fn segment(grid: &Grid2D, g: &[ScalarField; 2], from: (usize, usize), to: (usize, usize)) -> f64 {
    let h = grid.spacing();
    let (mut i, mut j) = from;
    let mut acc = 0.0;
    while (i, j) != to {
        let (ni, nj, axis, sign) = if i != to.0 {
            if to.0 > i {
                (i + 1, j, 0, 1.0)
            } else {
                (i - 1, j, 0, -1.0)
            }
        } else if to.1 > j {
            (i, j + 1, 1, 1.0)
        } else {
            (i, j - 1, 1, -1.0)
        };
        let (a, b) = (grid.index(i, j), grid.index(ni, nj));
        acc += sign * 0.5 * h * (g[axis].values[a] + g[axis].values[b]);
        i = ni;
        j = nj;
    }
    acc
}

/// Reconstruct `p` with `∇p = g`, `p(base) = 0`, by integrating along
/// x-then-y staircase paths from the node nearest the centre. Path
/// independence is audited against y-then-x paths on random node pairs.
pub fn integrate_gradient(g: &[ScalarField; 2], opts: &FamilyOptions) -> Result<ScalarField> {
    let grid = g[0].grid.clone();
    let base = grid.center_node();
    let (i0, j0) = grid.ij(base);
    let n = grid.n();
    let mut row = vec![f64::NAN; n];
    row[i0] = 0.0;
    for i in (0..i0).rev() {
        if !grid.in_domain(grid.index(i, j0)) {
            break;
        }
        row[i] = row[i + 1] + segment(&grid, g, (i + 1, j0), (i, j0));
    }
    for i in i0 + 1..n {
        if !grid.in_domain(grid.index(i, j0)) {
            break;
        }
        row[i] = row[i - 1] + segment(&grid, g, (i - 1, j0), (i, j0));
    }
    let mut values = vec![f64::NAN; grid.len()];
    for i in 0..n {
        if row[i].is_nan() {
            continue;
        }
        values[grid.index(i, j0)] = row[i];
        for dir in [-1isize, 1] {
            let mut j = j0 as isize + dir;
            while j >= 0 && (j as usize) < n && grid.in_domain(grid.index(i, j as usize)) {
                let prev = grid.index(i, (j - dir) as usize);
                let k = grid.index(i, j as usize);
                values[k] = values[prev] + segment(&grid, g, (i, (j - dir) as usize), (i, j as usize));
                j += dir;
            }
        }
    }
    if let Some(k) = grid.domain_nodes().find(|&k| values[k].is_nan()) {
        return Err(Error::Domain {
            node: k,
            msg: "node unreachable by staircase paths".into(),
        });
    }
    // y-then-x paths from the base to random nodes
    let nodes: Vec<usize> = grid.domain_nodes().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let gsize = g.iter().map(|c| c.max_abs()).fold(0.0, f64::max);
    let tol = opts.tol(&grid, gsize);
    let mut worst: f64 = 0.0;
    for _ in 0..opts.audit_pairs {
        let k = nodes[rng.random_range(0..nodes.len())];
        let (i, j) = grid.ij(k);
        let corner = (i0, j);
        if !grid.in_domain(grid.index(i0, j)) {
            continue;
        }
        let alt = segment(&grid, g, (i0, j0), corner) + segment(&grid, g, corner, (i, j));
        worst = worst.max((alt - values[k]).abs());
    }
    if worst > tol {
        return Err(Error::Integrability {
            what: "path independence",
            residual: worst,
            tol,
        });
    }
    Ok(ScalarField::new(grid, values))
}

/// `φ` with `∇φ = (−∂₂u, ∂₁u)` and `φ(base) = 0`.
pub fn harmonic_conjugate(u: &ScalarField, opts: &FamilyOptions) -> Result<ScalarField> {
    let grid = &u.grid;
    let lap = laplacian(u).max_abs_interior();
    let tol = opts.tol(grid, u.max_abs());
    if lap > tol {
        return Err(Error::Integrability {
            what: "harmonicity (max |Δu|)",
            residual: lap,
            tol,
        });
    }
    let [g1, g2] = gradient(u);
    integrate_gradient(&[g2.scale(-1.0), g1], opts)
}

/// `λ[[cos ψ, −sin ψ], [−sin ψ, −cos ψ]]` with `λ = √|f|`, `ψ = φ + θ` and `φ`
/// the harmonic conjugate of `log λ`.
pub fn hessian_family(f: &ScalarField, theta: f64, opts: &FamilyOptions) -> Result<SymMatrixField> {
    let grid = &f.grid;
    let fmax = grid
        .domain_nodes()
        .map(|k| f.values[k])
        .fold(f64::NEG_INFINITY, f64::max);
    if !(fmax < 0.0) {
        return Err(Error::Rejected {
            what: "f must be bounded above by a negative constant; max f",
            residual: fmax,
            tol: 0.0,
        });
    }
    let lambda = f.map(|v| v.abs().sqrt());
    let phi = harmonic_conjugate(&lambda.map(f64::ln), opts)?;
    Ok(SymMatrixField::from_fn_indexed(grid, |k| {
        let (l, psi) = (lambda.values[k], phi.values[k] + theta);
        let (c, s) = (psi.cos(), psi.sin());
        [l * c, -l * s, -l * c]
    }))
}

/// Potential `v` with `∇²v ≈ H`, gauge `v(base) = 0`, `∇v(base) = 0`.
pub fn potential_from_hessian(h: &SymMatrixField, opts: &FamilyOptions) -> Result<ScalarField> {
    let grid = &h.grid;
    let a11 = ScalarField::new(grid.clone(), h.a11.clone());
    let a12 = ScalarField::new(grid.clone(), h.a12.clone());
    let a22 = ScalarField::new(grid.clone(), h.a22.clone());
    let [_, d2_11] = gradient(&a11);
    let [d1_12, d2_12] = gradient(&a12);
    let [d1_22, _] = gradient(&a22);
    let curl = d1_12.sub(&d2_11).max_abs_interior().max(d1_22.sub(&d2_12).max_abs_interior());
    let size = a11.max_abs().max(a12.max_abs()).max(a22.max_abs());
    let tol = opts.tol(grid, size);
    if curl > tol {
        return Err(Error::Integrability {
            what: "row curl of Hessian field",
            residual: curl,
            tol,
        });
    }
    let p1 = integrate_gradient(&[a11, a12.clone()], opts)?;
    let p2 = integrate_gradient(&[a12, a22], opts)?;
    integrate_gradient(&[p1, p2], opts)
}
