//! Grid-sampled vectors and the small set of direct solvers the iterations
//! are built on: symmetric band Cholesky, pivoted tridiagonal elimination,
//! general band LU, Krylov matrices and synthetic spectral operators.

mod band;
mod dense;
mod tridiag;

pub use band::{BandFactor, BandLu, GeneralBandMatrix, SymmetricBandMatrix};
pub use dense::{krylov_matrix, orthogonality_defect, random_orthogonal, SpectralOperator};
pub use tridiag::tridiag_solve;

use nalgebra::{ComplexField, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field of grid values: `f64` or `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy + sealed::Sealed {
    fn to_complex(self) -> Complex64;
    /// Drops the imaginary part when `Self` is real.
    fn from_complex(z: Complex64) -> Self;
}

impl Scalar for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn from_complex(z: Complex64) -> Self {
        z.re
    }
}

impl Scalar for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }

    fn from_complex(z: Complex64) -> Self {
        z
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for num_complex::Complex64 {}
}

/// A function sampled on an equispaced grid with spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T: Scalar = f64> {
    values: DVector<T>,
    h: f64,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(values: DVector<T>, h: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidDimension(format!(
                "grid function needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {h}")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample at index {i}")));
        }
        Ok(Self { values, h })
    }

    /// Samples `f(x_j)` at `x_j = offset + j h`, `j = 0..n`.
    pub fn from_fn(n: usize, h: f64, offset: f64, f: impl Fn(f64) -> T) -> Result<Self> {
        let values = DVector::from_fn(n, |j, _| f(offset + j as f64 * h));
        Self::new(values, h)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    pub fn into_values(self) -> DVector<T> {
        self.values
    }
}

pub(crate) fn all_finite<T: Scalar>(v: &DVector<T>) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_function_rejects_bad_input() {
        assert!(GridFunction::new(DVector::from_element(1, 1.0), 0.1).is_err());
        assert!(GridFunction::new(DVector::from_element(3, 1.0), 0.0).is_err());
        assert!(GridFunction::new(DVector::from_vec(vec![1.0, f64::NAN]), 0.1).is_err());
        let g = GridFunction::from_fn(5, 0.25, 0.0, |x| x * x).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.values()[4], 1.0);
    }
}
