use nalgebra::{DMatrix, DVector};

use crate::anderson::FixedPointProblem;
use crate::error::{check_len, Error, Result};

/// Dense affine map `G(x) = A x + b`.
#[derive(Debug, Clone)]
pub struct AffineProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    h: f64,
    exact: Option<DVector<f64>>,
}

impl AffineProblem {
    /// The fixed point is precomputed when `I - A` is nonsingular.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, h: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidDimension(format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        check_len(a.nrows(), b.len())?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {h}")));
        }
        let n = b.len();
        let exact = (DMatrix::identity(n, n) - &a).lu().solve(&b).filter(|x| x.iter().all(|v| v.is_finite()));
        Ok(Self { a, b, h, exact })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.b
    }
}

impl FixedPointProblem for AffineProblem {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn h(&self) -> f64 {
        self.h
    }

    fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim(), x.len())?;
        Ok(&self.a * x + &self.b)
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn exact_solution(&self) -> Option<DVector<f64>> {
        self.exact.clone()
    }
}
