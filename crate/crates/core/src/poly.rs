//! Bivariate polynomials with exact differentiation.
//!
//! Closed-form data (manufactured displacements, growth tensors, recovery
//! deformations) is carried as `Poly2` so every derivative the 3D energy
//! needs is analytic.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Sparse polynomial in `(x1, x2)`; keys are exponent pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(coef: f64, p1: u32, p2: u32) -> Self {
        let mut terms = BTreeMap::new();
        if coef != 0.0 {
            terms.insert((p1, p2), coef);
        }
        Self { terms }
    }

    pub fn x1() -> Self {
        Self::monomial(1.0, 1, 0)
    }

    pub fn x2() -> Self {
        Self::monomial(1.0, 0, 1)
    }

    /// Build from `(coef, p1, p2)` triples; repeated exponents accumulate.
    pub fn from_terms(terms: &[(f64, u32, u32)]) -> Self {
        let mut p = Self::zero();
        for &(c, a, b) in terms {
            p.add_term(c, a, b);
        }
        p
    }

    fn add_term(&mut self, c: f64, p1: u32, p2: u32) {
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry((p1, p2)).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&(p1, p2));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    /// Largest absolute coefficient.
    pub fn max_coef(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), &c)| c * x[0].powi(a as i32) * x[1].powi(b as i32))
            .sum()
    }

    pub fn d1(&self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), &c) in &self.terms {
            if a > 0 {
                out.add_term(c * a as f64, a - 1, b);
            }
        }
        out
    }

    pub fn d2(&self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), &c) in &self.terms {
            if b > 0 {
                out.add_term(c * b as f64, a, b - 1);
            }
        }
        out
    }

    /// Partial derivative along axis `k` (0 or 1).
    pub fn d(&self, k: usize) -> Self {
        if k == 0 {
            self.d1()
        } else {
            self.d2()
        }
    }

    pub fn grad(&self) -> [Poly2; 2] {
        [self.d1(), self.d2()]
    }

    pub fn hessian(&self) -> [[Poly2; 2]; 2] {
        let g = self.grad();
        let h12 = g[0].d2();
        [[g[0].d1(), h12.clone()], [h12, g[1].d2()]]
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (&(a, b), &c) in &self.terms {
            out.add_term(c * s, a, b);
        }
        out
    }

    /// Drop coefficients below `tol` in absolute value.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = Self::zero();
        for (&(a, b), &c) in &self.terms {
            if c.abs() > tol {
                out.add_term(c, a, b);
            }
        }
        out
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(a, b), &c) in &rhs.terms {
            out.add_term(c, a, b);
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(a, b), &c) in &rhs.terms {
            out.add_term(-c, a, b);
        }
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(a, b), &c) in &self.terms {
            for (&(p, q), &d) in &rhs.terms {
                out.add_term(c * d, a + p, b + q);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly2 {
            type Output = Poly2;
            fn $m(self, rhs: Poly2) -> Poly2 {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Vector of three polynomials (a map `Ω → ℝ³`).
pub type Vec3Poly = [Poly2; 3];

/// 3×3 matrix of polynomials.
pub type Mat3Poly = [[Poly2; 3]; 3];

pub fn zero_vec3() -> Vec3Poly {
    [Poly2::zero(), Poly2::zero(), Poly2::zero()]
}

pub fn zero_mat3() -> Mat3Poly {
    [zero_vec3(), zero_vec3(), zero_vec3()]
}

pub fn eval_mat3(m: &Mat3Poly, x: [f64; 2]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[i][j].eval(x);
        }
    }
    out
}

/// Symmetric 2×2 block `(a11, a12, a22)` of a polynomial matrix.
pub fn sym_block(m: &Mat3Poly) -> [Poly2; 3] {
    [
        m[0][0].clone(),
        (&m[0][1] + &m[1][0]).scale(0.5),
        m[1][1].clone(),
    ]
}

/// Embed a symmetric 2×2 polynomial block as a 3×3 matrix with zero third row/column.
pub fn embed_sym(block: &[Poly2; 3]) -> Mat3Poly {
    let mut m = zero_mat3();
    m[0][0] = block[0].clone();
    m[0][1] = block[1].clone();
    m[1][0] = block[1].clone();
    m[1][1] = block[2].clone();
    m
}
