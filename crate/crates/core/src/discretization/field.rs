use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;

use super::grid::{DomainKind, Grid2D};
use crate::error::{Error, Result};

/// Nodal scalar values; exterior nodes hold `NaN`.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: Arc<Grid2D>,
    pub values: Vec<f64>,
}

/// Nodal symmetric 2×2 tensor `[[a11, a12], [a12, a22]]`.
#[derive(Clone, Debug)]
pub struct SymMatrixField {
    pub grid: Arc<Grid2D>,
    pub a11: Vec<f64>,
    pub a12: Vec<f64>,
    pub a22: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid2D>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field length mismatch");
        ScalarField { grid, values }
    }

    /// Sample `f(x)` at every in-domain node.
    pub fn from_fn(grid: &Arc<Grid2D>, f: impl Fn([f64; 2]) -> f64 + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                if grid.in_domain(k) {
                    f(grid.coords(k))
                } else {
                    f64::NAN
                }
            })
            .collect();
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &Arc<Grid2D>, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        self.zip_map(self, |a, _| f(a))
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let g = &self.grid;
        let values = (0..g.len())
            .into_par_iter()
            .map(|k| {
                if g.in_domain(k) {
                    f(self.values[k], other.values[k])
                } else {
                    f64::NAN
                }
            })
            .collect();
        ScalarField {
            grid: g.clone(),
            values,
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a * s)
    }

    /// Max |value| over nodes selected by `keep`.
    pub fn max_abs_where(&self, keep: impl Fn(usize) -> bool) -> f64 {
        (0..self.grid.len())
            .filter(|&k| keep(k))
            .map(|k| self.values[k].abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_where(|k| self.grid.in_domain(k))
    }

    pub fn max_abs_interior(&self) -> f64 {
        self.max_abs_where(|k| self.grid.is_interior(k))
    }

    pub fn max_abs_deep(&self) -> f64 {
        self.max_abs_where(|k| self.grid.is_deep(k))
    }

    pub fn all_finite(&self) -> bool {
        self.grid.domain_nodes().all(|k| self.values[k].is_finite())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, &self.grid)?;
        for k in self.grid.domain_nodes() {
            let (i, j) = self.grid.ij(k);
            let x = self.grid.coords(k);
            writeln!(w, "{i},{j},{:e},{:e},{:e}", x[0], x[1], self.values[k])?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (grid, rows) = read_rows(r, 5)?;
        let mut values = vec![f64::NAN; grid.len()];
        for (k, cols) in rows {
            values[k] = cols[4];
        }
        Ok(ScalarField { grid, values })
    }
}

impl SymMatrixField {
    pub fn from_fn(grid: &Arc<Grid2D>, f: impl Fn([f64; 2]) -> [f64; 3] + Sync) -> Self {
        let vals: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                if grid.in_domain(k) {
                    f(grid.coords(k))
                } else {
                    [f64::NAN; 3]
                }
            })
            .collect();
        Self::from_triples(grid, &vals)
    }

    /// Build from a per-node closure (exterior nodes get `NaN`).
    pub fn from_fn_indexed(grid: &Arc<Grid2D>, f: impl Fn(usize) -> [f64; 3] + Sync) -> Self {
        let vals: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|k| if grid.in_domain(k) { f(k) } else { [f64::NAN; 3] })
            .collect();
        Self::from_triples(grid, &vals)
    }

    pub(crate) fn from_triples(grid: &Arc<Grid2D>, vals: &[[f64; 3]]) -> Self {
        SymMatrixField {
            grid: grid.clone(),
            a11: vals.iter().map(|v| v[0]).collect(),
            a12: vals.iter().map(|v| v[1]).collect(),
            a22: vals.iter().map(|v| v[2]).collect(),
        }
    }

    pub fn identity(grid: &Arc<Grid2D>) -> Self {
        Self::from_fn(grid, |_| [1.0, 0.0, 1.0])
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.a11[idx], self.a12[idx], self.a22[idx]]
    }

    pub fn add(&self, o: &SymMatrixField) -> Self {
        self.combine(o, 1.0, 1.0)
    }

    pub fn sub(&self, o: &SymMatrixField) -> Self {
        self.combine(o, 1.0, -1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.combine(self, s, 0.0)
    }

    fn combine(&self, o: &SymMatrixField, a: f64, b: f64) -> Self {
        let lin = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
        };
        SymMatrixField {
            grid: self.grid.clone(),
            a11: lin(&self.a11, &o.a11),
            a12: lin(&self.a12, &o.a12),
            a22: lin(&self.a22, &o.a22),
        }
    }

    /// Pointwise squared Frobenius norm `a11² + 2a12² + a22²`.
    pub fn frob2(&self) -> ScalarField {
        let g = &self.grid;
        let values = (0..g.len())
            .map(|k| {
                if g.in_domain(k) {
                    self.a11[k].powi(2) + 2.0 * self.a12[k].powi(2) + self.a22[k].powi(2)
                } else {
                    f64::NAN
                }
            })
            .collect();
        ScalarField::new(g.clone(), values)
    }

    /// Pointwise trace.
    pub fn trace(&self) -> ScalarField {
        let g = &self.grid;
        let values = (0..g.len())
            .map(|k| {
                if g.in_domain(k) {
                    self.a11[k] + self.a22[k]
                } else {
                    f64::NAN
                }
            })
            .collect();
        ScalarField::new(g.clone(), values)
    }

    /// Rows are `i,j,x1,x2,det,a11,a12,a22`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, &self.grid)?;
        for k in self.grid.domain_nodes() {
            let (i, j) = self.grid.ij(k);
            let x = self.grid.coords(k);
            let [a, b, c] = self.at(k);
            writeln!(
                w,
                "{i},{j},{:e},{:e},{:e},{:e},{:e},{:e}",
                x[0],
                x[1],
                a * c - b * b,
                a,
                b,
                c
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (grid, rows) = read_rows(r, 8)?;
        let mut vals = vec![[f64::NAN; 3]; grid.len()];
        for (k, cols) in rows {
            vals[k] = [cols[5], cols[6], cols[7]];
        }
        Ok(Self::from_triples(&grid, &vals))
    }
}

fn write_header<W: Write>(w: &mut W, g: &Grid2D) -> Result<()> {
    writeln!(w, "# grid={} n={}", g.kind().name(), g.n())?;
    Ok(())
}

type Rows = Vec<(usize, Vec<f64>)>;

fn read_rows<R: BufRead>(r: R, ncols: usize) -> Result<(Arc<Grid2D>, Rows)> {
    let bad = |line: usize, msg: &str| Error::Config(format!("field csv line {line}: {msg}"));
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))??;
    let mut kind = None;
    let mut n = None;
    for tok in header.trim_start_matches('#').split_whitespace() {
        if let Some(v) = tok.strip_prefix("grid=") {
            kind = Some(v.parse::<DomainKind>()?);
        } else if let Some(v) = tok.strip_prefix("n=") {
            n = Some(v.parse::<usize>().map_err(|e| bad(1, &e.to_string()))?);
        }
    }
    let (kind, n) = match (kind, n) {
        (Some(k), Some(n)) => (k, n),
        _ => return Err(bad(1, "missing grid header")),
    };
    let grid = Arc::new(Grid2D::new(kind, n)?);
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != ncols {
            return Err(bad(ln + 2, "wrong column count"));
        }
        let i: usize = cols[0].parse().map_err(|_| bad(ln + 2, "bad i"))?;
        let j: usize = cols[1].parse().map_err(|_| bad(ln + 2, "bad j"))?;
        if i >= n || j >= n {
            return Err(bad(ln + 2, "index out of range"));
        }
        let nums = cols
            .iter()
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad(ln + 2, "bad number")))
            .collect::<Result<Vec<_>>>()?;
        rows.push((grid.index(i, j), nums));
    }
    Ok((grid, rows))
}
