use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::anderson::FixedPointProblem;
use crate::error::{check_len, Error, Result};
use crate::grid::{tridiag_solve, SymmetricBandMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonVariant {
    /// `G(x) = (I - (2/3) D^{-1} M) x + (2/3) D^{-1} b`, `D = diag(M)`.
    WeightedJacobi,
    /// `G(x) = (I - M) x + b`.
    Richardson,
}

impl fmt::Display for PoissonVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoissonVariant::WeightedJacobi => "jacobi",
            PoissonVariant::Richardson => "richardson",
        })
    }
}

impl FromStr for PoissonVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jacobi" | "weighted-jacobi" => Ok(PoissonVariant::WeightedJacobi),
            "richardson" => Ok(PoissonVariant::Richardson),
            other => Err(Error::InvalidParameter(format!("unknown Poisson variant '{other}'"))),
        }
    }
}

/// `M u = b` with `M` the Dirichlet second-difference matrix on `x_j = j h`,
/// `h = 1/(n+1)`, and `b_j = f(x_j)`.
#[derive(Debug, Clone)]
pub struct PoissonProblem {
    variant: PoissonVariant,
    h: f64,
    m: SymmetricBandMatrix,
    b: DVector<f64>,
    exact: DVector<f64>,
}

impl PoissonProblem {
    /// Unit source `f = 1`.
    pub fn new(variant: PoissonVariant, n: usize) -> Result<Self> {
        Self::with_source(variant, n, |_| 1.0)
    }

    pub fn with_source(variant: PoissonVariant, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!("Poisson needs n >= 2, got {n}")));
        }
        let h = 1.0 / (n as f64 + 1.0);
        let m = SymmetricBandMatrix::laplacian_dirichlet(n, h)?;
        let b = DVector::from_fn(n, |j, _| f((j + 1) as f64 * h));
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("source samples must be finite".into()));
        }
        let off = vec![1.0 / (h * h); n - 1];
        let diag = vec![-2.0 / (h * h); n];
        let exact = tridiag_solve(&off, &diag, &off, &b)?;
        Ok(Self { variant, h, m, b, exact })
    }

    pub fn variant(&self) -> PoissonVariant {
        self.variant
    }

    pub fn matrix(&self) -> &SymmetricBandMatrix {
        &self.m
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    /// Grid points `x_j = j h`, `j = 1..n`.
    pub fn nodes(&self) -> DVector<f64> {
        DVector::from_fn(self.b.len(), |j, _| (j + 1) as f64 * self.h)
    }

    /// `(e_0)_j = sum_{i=1}^{20} sin(2 pi i x_j)`.
    pub fn initial_error(&self) -> DVector<f64> {
        self.nodes().map(|x| (1..=20).map(|i| (2.0 * PI * i as f64 * x).sin()).sum())
    }

    /// `x_0 = x* + e_0`.
    pub fn initial_guess(&self) -> DVector<f64> {
        &self.exact + self.initial_error()
    }

    /// Eigenvalues of the iteration matrix in closed form, `j = 1..n`.
    pub fn iteration_eigenvalues(&self) -> DVector<f64> {
        let n = self.b.len();
        DVector::from_fn(n, |j, _| {
            let s = (PI * (j + 1) as f64 / (2.0 * (n as f64 + 1.0))).sin().powi(2);
            match self.variant {
                PoissonVariant::WeightedJacobi => 1.0 - 4.0 / 3.0 * s,
                PoissonVariant::Richardson => 1.0 + 4.0 / (self.h * self.h) * s,
            }
        })
    }

    pub fn reference_solution(&self) -> &DVector<f64> {
        &self.exact
    }
}

impl FixedPointProblem for PoissonProblem {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn h(&self) -> f64 {
        self.h
    }

    fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim(), x.len())?;
        let mx = self.m.matvec(x)?;
        Ok(match self.variant {
            PoissonVariant::WeightedJacobi => x + (mx - &self.b) * (self.h * self.h / 3.0),
            PoissonVariant::Richardson => x - mx + &self.b,
        })
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn exact_solution(&self) -> Option<DVector<f64>> {
        Some(self.exact.clone())
    }
}
