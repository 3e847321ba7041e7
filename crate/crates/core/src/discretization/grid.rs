use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted number of nodes per axis.
pub const MIN_NODES: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `[0, 1]²`
    UnitSquare,
    /// `{|x| < 1}` embedded in `[-1, 1]²`
    UnitDisk,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::UnitSquare => "square",
            DomainKind::UnitDisk => "disk",
        }
    }

    pub fn area(self) -> f64 {
        match self {
            DomainKind::UnitSquare => 1.0,
            DomainKind::UnitDisk => std::f64::consts::PI,
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" | "unit_square" => Ok(DomainKind::UnitSquare),
            "disk" | "unit_disk" => Ok(DomainKind::UnitDisk),
            other => Err(Error::Config(format!("unknown domain kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// All eight neighbours lie in the domain.
    Interior,
    /// In the domain, but some neighbour does not.
    Boundary,
    Exterior,
}

/// Compressed sparse rows over grid node indices.
#[derive(Clone, Debug, Default)]
pub struct SparseOp {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOp {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut op = SparseOp {
            row_ptr: Vec::with_capacity(rows.len() + 1),
            ..Default::default()
        };
        op.row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                op.cols.push(c);
                op.vals.push(v);
            }
            op.row_ptr.push(op.cols.len());
        }
        op
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn apply_row(&self, i: usize, x: &[f64]) -> f64 {
        let (c, v) = self.row(i);
        c.iter().zip(v).map(|(&j, &w)| w * x[j]).sum()
    }

    /// `out[j] += Σ_i y[i] A[i][j]`
    pub fn add_transpose(&self, y: &[f64], out: &mut [f64]) {
        for i in 0..self.nrows() {
            if y[i] == 0.0 {
                continue;
            }
            let (c, v) = self.row(i);
            for (&j, &w) in c.iter().zip(v) {
                out[j] += w * y[i];
            }
        }
    }
}

/// Precomputed derivative stencils. Every row of an in-domain node is exact
/// on polynomials of degree ≤ 2 whenever the mask leaves room for a
/// second-order stencil.
#[derive(Clone, Debug)]
pub struct Stencils {
    pub d1: SparseOp,
    pub d2: SparseOp,
    pub d11: SparseOp,
    pub d12: SparseOp,
    pub d22: SparseOp,
}

/// Uniform Cartesian grid with an interior mask.
#[derive(Clone, Debug)]
pub struct Grid2D {
    kind: DomainKind,
    n: usize,
    h: f64,
    origin: f64,
    mask: Vec<NodeKind>,
    depth: Vec<u8>,
    weights: Vec<f64>,
    stencils: Stencils,
}

pub fn make_grid(kind: DomainKind, n: usize) -> Result<Arc<Grid2D>> {
    Grid2D::new(kind, n).map(Arc::new)
}

const MAX_DEPTH: u8 = 4;

impl Grid2D {
    pub fn new(kind: DomainKind, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_NODES} nodes per axis, got {n}"
            )));
        }
        let (origin, extent) = match kind {
            DomainKind::UnitSquare => (0.0, 1.0),
            DomainKind::UnitDisk => (-1.0, 2.0),
        };
        let h = extent / (n - 1) as f64;
        let inside: Vec<bool> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx % n, idx / n);
                match kind {
                    DomainKind::UnitSquare => true,
                    DomainKind::UnitDisk => {
                        let x = origin + i as f64 * h;
                        let y = origin + j as f64 * h;
                        x * x + y * y < 1.0
                    }
                }
            })
            .collect();
        let at = |i: isize, j: isize| -> bool {
            i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n && inside[j as usize * n + i as usize]
        };
        let mut depth = vec![0u8; n * n];
        let mut mask = vec![NodeKind::Exterior; n * n];
        for idx in 0..n * n {
            if !inside[idx] {
                continue;
            }
            let (i, j) = ((idx % n) as isize, (idx / n) as isize);
            let mut d = 0u8;
            'grow: while d < MAX_DEPTH {
                let b = d as isize + 1;
                for dj in -b..=b {
                    for di in -b..=b {
                        if !at(i + di, j + dj) {
                            break 'grow;
                        }
                    }
                }
                d += 1;
            }
            depth[idx] = d;
            mask[idx] = if d >= 1 {
                NodeKind::Interior
            } else {
                NodeKind::Boundary
            };
        }
        // Each in-domain node collects a quarter of every adjacent cell of the
        // bounding box: trapezoid weights on the square, h² per node on the disk.
        let weights = (0..n * n)
            .map(|idx| {
                if !inside[idx] {
                    return 0.0;
                }
                let (i, j) = (idx % n, idx / n);
                let cx = usize::from(i > 0) + usize::from(i + 1 < n);
                let cy = usize::from(j > 0) + usize::from(j + 1 < n);
                0.25 * h * h * (cx * cy) as f64
            })
            .collect();
        let stencils = build_stencils(n, h, &at);
        Ok(Grid2D {
            kind,
            n,
            h,
            origin,
            mask,
            depth,
            weights,
            stencils,
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.ij(idx);
        [
            self.origin + i as f64 * self.h,
            self.origin + j as f64 * self.h,
        ]
    }

    pub fn node_kind(&self, idx: usize) -> NodeKind {
        self.mask[idx]
    }

    pub fn in_domain(&self, idx: usize) -> bool {
        self.mask[idx] != NodeKind::Exterior
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.mask[idx] == NodeKind::Interior
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.mask[idx] == NodeKind::Boundary
    }

    /// Number of complete rings of in-domain neighbours around the node
    /// (capped at 4). Interior nodes have depth ≥ 1.
    pub fn depth(&self, idx: usize) -> u8 {
        self.depth[idx]
    }

    /// Nodes at least two cells away from the mask fringe; residual norms
    /// are taken over these.
    pub fn is_deep(&self, idx: usize) -> bool {
        self.depth[idx] >= 2
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn stencils(&self) -> &Stencils {
        &self.stencils
    }

    pub fn domain_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.in_domain(k))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_interior(k))
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_boundary(k))
    }

    pub fn deep_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_deep(k))
    }

    /// In-domain node closest to the centre of the domain.
    pub fn center_node(&self) -> usize {
        let c = match self.kind {
            DomainKind::UnitSquare => 0.5,
            DomainKind::UnitDisk => 0.0,
        };
        self.domain_nodes()
            .min_by(|&a, &b| {
                let (pa, pb) = (self.coords(a), self.coords(b));
                let da = (pa[0] - c).powi(2) + (pa[1] - c).powi(2);
                let db = (pb[0] - c).powi(2) + (pb[1] - c).powi(2);
                da.total_cmp(&db)
            })
            .expect("grid has in-domain nodes")
    }

    /// Outward unit normal assigned to a node from the domain geometry.
    pub fn outward_normal(&self, idx: usize) -> [f64; 2] {
        let x = self.coords(idx);
        match self.kind {
            DomainKind::UnitDisk => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if r == 0.0 {
                    [1.0, 0.0]
                } else {
                    [x[0] / r, x[1] / r]
                }
            }
            DomainKind::UnitSquare => {
                // Nearest side(s); corners get the normalised diagonal.
                let d = [x[0], 1.0 - x[0], x[1], 1.0 - x[1]];
                let m = d.iter().cloned().fold(f64::INFINITY, f64::min);
                let tol = 1e-12 + 1e-9 * self.h;
                let mut nx: f64 = 0.0;
                let mut ny: f64 = 0.0;
                if (d[0] - m).abs() < tol {
                    nx -= 1.0;
                }
                if (d[1] - m).abs() < tol {
                    nx += 1.0;
                }
                if (d[2] - m).abs() < tol {
                    ny -= 1.0;
                }
                if (d[3] - m).abs() < tol {
                    ny += 1.0;
                }
                let r = (nx * nx + ny * ny).sqrt();
                if r == 0.0 {
                    [1.0, 0.0]
                } else {
                    [nx / r, ny / r]
                }
            }
        }
    }
}

type Offsets = &'static [(isize, f64)];

const FIRST_OPTIONS: [Offsets; 5] = [
    &[(-1, -0.5), (1, 0.5)],
    &[(0, -1.5), (1, 2.0), (2, -0.5)],
    &[(0, 1.5), (-1, -2.0), (-2, 0.5)],
    &[(0, -1.0), (1, 1.0)],
    &[(0, 1.0), (-1, -1.0)],
];

const SECOND_OPTIONS: [Offsets; 5] = [
    &[(-1, 1.0), (0, -2.0), (1, 1.0)],
    &[(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)],
    &[(0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)],
    &[(0, 1.0), (1, -2.0), (2, 1.0)],
    &[(0, 1.0), (-1, -2.0), (-2, 1.0)],
];

fn build_stencils(n: usize, h: f64, at: &dyn Fn(isize, isize) -> bool) -> Stencils {
    let nn = n * n;
    let idx_of = |i: isize, j: isize| j as usize * n + i as usize;
    let mut d1 = Vec::with_capacity(nn);
    let mut d2 = Vec::with_capacity(nn);
    let mut d11 = Vec::with_capacity(nn);
    let mut d12 = Vec::with_capacity(nn);
    let mut d22 = Vec::with_capacity(nn);
    for idx in 0..nn {
        let (i, j) = ((idx % n) as isize, (idx / n) as isize);
        if !at(i, j) {
            for v in [&mut d1, &mut d2, &mut d11, &mut d12, &mut d22] {
                v.push(Vec::new());
            }
            continue;
        }
        let axis = |opts: &[Offsets], dir: (isize, isize), scale: f64| -> Vec<(usize, f64)> {
            for o in opts {
                if o.iter().all(|&(k, _)| at(i + k * dir.0, j + k * dir.1)) {
                    return o
                        .iter()
                        .map(|&(k, w)| (idx_of(i + k * dir.0, j + k * dir.1), w * scale))
                        .collect();
                }
            }
            Vec::new()
        };
        d1.push(axis(&FIRST_OPTIONS, (1, 0), 1.0 / h));
        d2.push(axis(&FIRST_OPTIONS, (0, 1), 1.0 / h));
        d11.push(axis(&SECOND_OPTIONS, (1, 0), 1.0 / (h * h)));
        d22.push(axis(&SECOND_OPTIONS, (0, 1), 1.0 / (h * h)));
        // Mixed derivative: tensor product of first-derivative stencils,
        // preferring the most centred combination that fits in the mask.
        let mut best: Option<(usize, Vec<(usize, f64)>)> = None;
        for (rx, ox) in FIRST_OPTIONS.iter().enumerate() {
            for (ry, oy) in FIRST_OPTIONS.iter().enumerate() {
                let rank = rx.max(ry) * 10 + rx + ry;
                if best.as_ref().is_some_and(|(r, _)| *r <= rank) {
                    continue;
                }
                let fits = ox
                    .iter()
                    .all(|&(a, _)| oy.iter().all(|&(b, _)| at(i + a, j + b)));
                if fits {
                    let mut row = Vec::with_capacity(ox.len() * oy.len());
                    for &(a, wa) in ox.iter() {
                        for &(b, wb) in oy.iter() {
                            row.push((idx_of(i + a, j + b), wa * wb / (h * h)));
                        }
                    }
                    best = Some((rank, row));
                }
            }
        }
        d12.push(best.map(|(_, r)| r).unwrap_or_default());
    }
    Stencils {
        d1: SparseOp::from_rows(d1),
        d2: SparseOp::from_rows(d2),
        d11: SparseOp::from_rows(d11),
        d12: SparseOp::from_rows(d12),
        d22: SparseOp::from_rows(d22),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_weights_are_exact() {
        let g = Grid2D::new(DomainKind::UnitSquare, 65).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-12, "sum {s}");
    }

    #[test]
    fn disk_weights_converge_to_pi() {
        let mut errs = Vec::new();
        for n in [33, 65, 129, 257] {
            let g = Grid2D::new(DomainKind::UnitDisk, n).unwrap();
            let s: f64 = g.weights().iter().sum();
            let rel = (s - std::f64::consts::PI).abs() / std::f64::consts::PI;
            assert!(rel < 4.0 / n as f64, "n={n} rel={rel}");
            errs.push((s - std::f64::consts::PI).abs());
        }
        assert!(errs[3] < errs[0]);
        let g = Grid2D::new(DomainKind::UnitDisk, 129).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - std::f64::consts::PI).abs() < 0.03, "sum {s}");
    }

    #[test]
    fn too_small_is_config_error() {
        assert!(matches!(
            Grid2D::new(DomainKind::UnitDisk, 5),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mask_marks_exterior_only_for_disk() {
        let sq = Grid2D::new(DomainKind::UnitSquare, 17).unwrap();
        assert!((0..sq.len()).all(|k| sq.in_domain(k)));
        let disk = Grid2D::new(DomainKind::UnitDisk, 17).unwrap();
        assert!(!disk.in_domain(0));
        for k in 0..disk.len() {
            let x = disk.coords(k);
            assert_eq!(disk.in_domain(k), x[0] * x[0] + x[1] * x[1] < 1.0);
        }
        let c = disk.center_node();
        assert_eq!(disk.coords(c), [0.0, 0.0]);
        assert!(disk.depth(c) >= 4);
    }
}
