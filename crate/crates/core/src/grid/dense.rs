use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Scalar;
use crate::error::{check_len, Error, Result};

/// Krylov matrix `[b, A b, ..., A^{m-1} b]`.
pub fn krylov_matrix<T, F>(mut apply: F, b: &DVector<T>, m: usize) -> Result<DMatrix<T>>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> DVector<T>,
{
    if m < 1 {
        return Err(Error::InvalidParameter("Krylov dimension must be at least 1".into()));
    }
    let mut k = DMatrix::zeros(b.len(), m);
    k.set_column(0, b);
    for j in 1..m {
        let next = apply(&k.column(j - 1).into_owned());
        check_len(b.len(), next.len())?;
        k.set_column(j, &next);
    }
    Ok(k)
}

/// Seeded random orthogonal matrix: a standard-normal matrix orthonormalized
/// by modified Gram-Schmidt with one reorthogonalization pass.
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let r: f64 = q.column(i).dot(&q.column(j));
                let qi = q.column(i).into_owned();
                q.column_mut(j).axpy(-r, &qi, 1.0);
            }
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}

/// Symmetric operator `W diag(lambda) W^T` with orthogonal `W`.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    w: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl SpectralOperator {
    pub fn new(w: DMatrix<f64>, lambda: DVector<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::InvalidDimension("eigenvector matrix must be square".into()));
        }
        check_len(w.nrows(), lambda.len())?;
        let defect = orthogonality_defect(&w);
        if defect > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "eigenvector matrix is not orthogonal (defect {defect:e})"
            )));
        }
        Ok(Self { w, lambda })
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.lambda
    }

    pub fn apply<T: Scalar>(&self, v: &DVector<T>) -> Result<DVector<T>> {
        check_len(self.dim(), v.len())?;
        let n = self.dim();
        let coeffs = DVector::from_fn(n, |i, _| {
            let mut acc = T::zero();
            for r in 0..n {
                acc += v[r].scale(self.w[(r, i)]);
            }
            acc.scale(self.lambda[i])
        });
        Ok(DVector::from_fn(n, |r, _| {
            let mut acc = T::zero();
            for i in 0..n {
                acc += coeffs[i].scale(self.w[(r, i)]);
            }
            acc
        }))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.w * DMatrix::from_diagonal(&self.lambda) * self.w.transpose()
    }
}

/// `max |W^T W - I|`.
pub fn orthogonality_defect(w: &DMatrix<f64>) -> f64 {
    let g = w.transpose() * w;
    let n = g.nrows();
    (g - DMatrix::identity(n, n)).iter().fold(0.0, |a, v| a.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn krylov_columns() {
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let k = krylov_matrix(|v| v.clone(), &b, 1).unwrap();
        assert_eq!(k.ncols(), 1);
        assert_eq!(k.column(0), b.column(0));

        let k = krylov_matrix(|v| v * 2.0, &b, 3).unwrap();
        assert_eq!(k.column(2).into_owned(), &b * 4.0);

        let d = DVector::from_vec(vec![1.0, 2.0]);
        let k = krylov_matrix(|v| v.component_mul(&d), &DVector::from_vec(vec![1.0, 1.0]), 2).unwrap();
        assert_eq!(k, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));

        assert!(krylov_matrix(|v: &DVector<f64>| v.clone(), &b, 0).is_err());
    }

    #[test]
    fn random_orthogonal_properties() {
        let one = random_orthogonal(1, 5);
        assert_eq!(one[(0, 0)].abs(), 1.0);
        assert_eq!(random_orthogonal(9, 42), random_orthogonal(9, 42));
        assert!(orthogonality_defect(&random_orthogonal(16, 7)) <= 1e-12);
        assert!(orthogonality_defect(&random_orthogonal(64, 1)) <= 1e-12);
    }

    #[test]
    fn spectral_apply_cases() {
        let n = 10;
        let v = DVector::from_fn(n, |i, _| (i as f64).cos());
        let w = random_orthogonal(n, 3);
        let s = SpectralOperator::new(w.clone(), DVector::from_element(n, 1.0)).unwrap();
        assert!((s.apply(&v).unwrap() - &v).norm() < 1e-13);

        let d = DVector::from_fn(n, |i, _| i as f64 - 2.5);
        let s = SpectralOperator::new(DMatrix::identity(n, n), d.clone()).unwrap();
        assert_eq!(s.apply(&v).unwrap(), v.component_mul(&d));

        let s = SpectralOperator::new(w.clone(), d.clone()).unwrap();
        let dense = &w * DMatrix::from_diagonal(&d) * w.transpose();
        assert!((s.apply(&v).unwrap() - dense * &v).amax() < 1e-12);
        assert!(s.apply(&DVector::<f64>::zeros(3)).is_err());
    }
}
