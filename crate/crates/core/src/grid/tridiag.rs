use nalgebra::DVector;

use super::Scalar;
use crate::error::{check_len, Error, Result};

/// Solves a tridiagonal system by Gaussian elimination with partial
/// pivoting. `lower` and `upper` hold the `n - 1` off-diagonals.
///
/// Row interchanges make this safe for indefinite systems such as discrete
/// Helmholtz operators, where the pivot-free recurrence can break down.
pub fn tridiag_solve<T: Scalar>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &DVector<T>,
) -> Result<DVector<T>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidDimension("empty tridiagonal system".into()));
    }
    check_len(n - 1, lower.len())?;
    check_len(n - 1, upper.len())?;
    check_len(n, rhs.len())?;

    let mut dl = lower.to_vec();
    let mut d = diag.to_vec();
    let mut du = upper.to_vec();
    // second super-diagonal created by interchanges
    let mut du2 = vec![T::zero(); n.saturating_sub(2)];
    let mut b = rhs.clone();

    for i in 0..n - 1 {
        if d[i].modulus() >= dl[i].modulus() {
            if d[i].is_zero() {
                return Err(Error::SingularSystem(i));
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            let bi = b[i];
            b[i + 1] -= fact * bi;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -(fact * du2[i]);
            }
            du[i] = tmp;
            let (bi, bi1) = (b[i], b[i + 1]);
            b[i] = bi1;
            b[i + 1] = bi - fact * bi1;
        }
        dl[i] = T::zero();
    }
    if d[n - 1].is_zero() {
        return Err(Error::SingularSystem(n - 1));
    }

    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    if !super::all_finite(&b) {
        return Err(Error::SingularSystem(n - 1));
    }
    Ok(b)
}
