//! Thin wrappers over faer's sparse factorizations.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Cholesky factor of a symmetric positive definite matrix given by its
/// lower-triangle triplets (duplicates are summed).
pub(crate) struct SpdFactor {
    llt: Llt<usize, f64>,
    n: usize,
}

impl SpdFactor {
    pub fn new(n: usize, lower: &[Triplet<usize, usize, f64>]) -> Result<Self> {
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, lower)
            .map_err(|e| Error::Eval(format!("sparse assembly: {e:?}")))?;
        let llt = a.sp_cholesky(Side::Lower).map_err(|e| Error::NoConvergence {
            what: "preconditioner",
            msg: format!("cholesky failed: {e:?}"),
        })?;
        Ok(SpdFactor { llt, n })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(rhs.as_mut());
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = rhs[(i, 0)];
        }
    }
}

/// LU factor of a general square sparse matrix.
pub(crate) struct LuFactor {
    lu: Lu<usize, f64>,
    n: usize,
}

impl LuFactor {
    pub fn new(n: usize, trips: &[Triplet<usize, usize, f64>]) -> Result<Self> {
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, trips)
            .map_err(|e| Error::Eval(format!("sparse assembly: {e:?}")))?;
        let lu = a.sp_lu().map_err(|e| Error::NoConvergence {
            what: "linear solve",
            msg: format!("sparse LU failed: {e:?}"),
        })?;
        Ok(LuFactor { lu, n })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }
}
