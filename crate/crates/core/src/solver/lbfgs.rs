//! Limited-memory BFGS with a user-supplied initial inverse Hessian and
//! Armijo backtracking.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when `√(gᵀ H₀ g)` falls below this.
    pub tol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 12,
            max_iter: 500,
            tol: 1e-9,
            armijo: 1e-4,
            max_backtracks: 40,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LbfgsOutcome {
    pub iterations: usize,
    pub converged: bool,
    /// Objective at every accepted iterate, starting with the initial point.
    pub history: Vec<f64>,
    /// Final `√(gᵀ H₀ g)`.
    pub decrement: f64,
    pub line_search_failed: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimise `f` from `x` in place. `eval(x, grad)` returns the value and fills
/// the gradient; `precond(q)` applies the initial inverse Hessian in place.
pub fn minimize(
    x: &mut [f64],
    mut eval: impl FnMut(&[f64], &mut [f64]) -> f64,
    precond: impl Fn(&mut [f64]),
    opts: &LbfgsOptions,
) -> LbfgsOutcome {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut fx = eval(x, &mut g);
    let mut out = LbfgsOutcome {
        history: vec![fx],
        ..Default::default()
    };
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    for it in 0..opts.max_iter {
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        precond(&mut q);
        if pairs.is_empty() {
            out.decrement = dot(&g, &q).max(0.0).sqrt();
            if out.decrement < opts.tol {
                out.converged = true;
                out.iterations = it;
                return out;
            }
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            // not a descent direction: restart from the preconditioned gradient
            pairs.clear();
            d = g.clone();
            precond(&mut d);
            d.iter_mut().for_each(|v| *v = -*v);
            slope = dot(&g, &d);
            if slope >= 0.0 {
                out.line_search_failed = true;
                out.iterations = it;
                return out;
            }
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..opts.max_backtracks {
            for i in 0..n {
                xn[i] = x[i] + step * d[i];
            }
            let fnew = eval(&xn, &mut gn);
            if fnew.is_finite() && fnew <= fx + opts.armijo * step * slope {
                let s: Vec<f64> = (0..n).map(|i| xn[i] - x[i]).collect();
                let y: Vec<f64> = (0..n).map(|i| gn[i] - g[i]).collect();
                let sy = dot(&s, &y);
                if sy > 1e-300 {
                    if pairs.len() == opts.memory {
                        pairs.pop_front();
                    }
                    pairs.push_back((s, y, 1.0 / sy));
                }
                x.copy_from_slice(&xn);
                g.copy_from_slice(&gn);
                fx = fnew;
                out.history.push(fx);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            out.line_search_failed = true;
            out.iterations = it;
            let mut q = g.clone();
            precond(&mut q);
            out.decrement = dot(&g, &q).max(0.0).sqrt();
            return out;
        }
        let mut q = g.clone();
        precond(&mut q);
        out.decrement = dot(&g, &q).max(0.0).sqrt();
        if out.decrement < opts.tol {
            out.converged = true;
            out.iterations = it + 1;
            return out;
        }
    }
    out.iterations = opts.max_iter;
    out
}
