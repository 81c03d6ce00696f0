use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::{drive, AAConfig, ConvergenceRecord, FixedPointProblem};
use crate::error::{check_len, Error, Result};
use crate::grid::{all_finite, Scalar};
use crate::norms::{gram_from_duals, WeightOperator, WeightedQr};

/// Dense `S = (X + D)(D^* P^2 D)^{-1} D^* P^2` for a window of `dx` and `df`
/// columns. Meant for small verification problems.
pub fn multisecant_operator<T: Scalar>(
    dx_cols: &[DVector<T>],
    df_cols: &[DVector<T>],
    wop: &WeightOperator,
) -> Result<DMatrix<T>> {
    check_len(df_cols.len(), dx_cols.len())?;
    let n = wop.dim();
    let m = df_cols.len();
    if m == 0 {
        return Ok(DMatrix::zeros(n, n));
    }
    for (a, b) in dx_cols.iter().zip(df_cols) {
        check_len(n, a.len())?;
        check_len(n, b.len())?;
    }
    let duals = df_cols.iter().map(|c| wop.dual(c)).collect::<Result<Vec<_>>>()?;
    // (D^* P^2 D)^{-1} D^* P^2 = R^{-1} Q^* P^2 for D = QR with P^2-orthonormal Q
    let qr = WeightedQr::new(df_cols, &duals)?;
    if qr.min_relative_pivot() <= 1e-13 {
        return Err(Error::SingularGram);
    }
    let zt = DMatrix::from_fn(m, n, |i, j| qr.q_duals()[i][j].conjugate());
    let left = qr.r().solve_upper_triangular(&zt).ok_or(Error::SingularGram)?;
    let y = DMatrix::from_fn(n, m, |i, j| dx_cols[j][i] + df_cols[j][i]);
    let s = y * left;
    if !s.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularGram);
    }
    Ok(s)
}

/// `argmin ||F v||_w` subject to `sum v = 1`, via the Lagrange condition
/// `H y = 1`, `alpha = y / sum y`, with `H = F^* P^2 F`. Columns are ordered
/// oldest first; if `H` cannot be factored the oldest columns are dropped and
/// the returned vector is padded with leading zeros.
pub fn constrained_alpha<T: Scalar>(f_cols: &[DVector<T>], wop: &WeightOperator) -> Result<DVector<T>> {
    let m1 = f_cols.len();
    if m1 == 0 {
        return Err(Error::EmptyWindow);
    }
    let duals = f_cols.iter().map(|c| wop.dual(c)).collect::<Result<Vec<_>>>()?;
    let (h, _) = gram_from_duals(f_cols, &duals, &f_cols[0])?;
    for start in 0..m1 {
        let k = m1 - start;
        let ones = DVector::from_element(k, T::one());
        // H = R^* R from the weighted QR keeps the conditioning of F rather than F^* F
        let from_qr = WeightedQr::new(&f_cols[start..], &duals[start..]).ok().and_then(|qr| {
            if qr.min_relative_pivot() <= 1e-13 {
                return None;
            }
            let z = qr.r().ad_solve_upper_triangular(&ones)?;
            qr.r().solve_upper_triangular(&z)
        });
        let y = match from_qr {
            Some(y) => y,
            None => {
                let sub = h.view((start, start), (k, k)).into_owned();
                let Some(ch) = sub.cholesky() else { continue };
                ch.solve(&ones)
            }
        };
        let total = y.sum();
        if !all_finite(&y) || total.modulus() == 0.0 {
            continue;
        }
        let mut alpha = DVector::zeros(m1);
        alpha.rows_mut(start, k).copy_from(&(y / total));
        return Ok(alpha);
    }
    // every residual vanishes in the weighted norm; the newest is as good as any
    let mut alpha = DVector::zeros(m1);
    alpha[m1 - 1] = T::one();
    Ok(alpha)
}

/// `x_{k+1} = sum_i alpha_i ((1 - beta) x_i + beta G(x_i))`.
pub fn constrained_update<T: Scalar>(
    xs: &[DVector<T>],
    gs: &[DVector<T>],
    alpha: &DVector<T>,
    beta: f64,
) -> Result<DVector<T>> {
    check_len(xs.len(), gs.len())?;
    check_len(xs.len(), alpha.len())?;
    let n = xs.first().ok_or(Error::EmptyWindow)?.len();
    let mut out = DVector::zeros(n);
    let (a, b) = (T::from_real(1.0 - beta), T::from_real(beta));
    for ((x, g), &al) in xs.iter().zip(gs).zip(alpha.iter()) {
        if beta != 1.0 {
            out.axpy(al * a, x, T::one());
        }
        out.axpy(al * b, g, T::one());
    }
    Ok(out)
}

/// The constrained form of Anderson acceleration, mainly for cross-checks.
pub fn constrained_run<T: Scalar, P: FixedPointProblem<T> + ?Sized>(
    problem: &P,
    config: &AAConfig,
    x0: &DVector<T>,
) -> Result<(ConvergenceRecord, DVector<T>)> {
    config.validate()?;
    let wop = WeightOperator::build(config.norm, problem.dim(), problem.h())?;
    let mut window: VecDeque<(DVector<T>, DVector<T>, DVector<T>)> = VecDeque::new();
    let memory = config.memory;
    let beta = config.beta;
    let w = wop.clone();
    drive(problem, x0, config, &wop, move |x, g| {
        window.push_back((x.clone(), g.clone(), g - x));
        while !memory.admits(window.len().saturating_sub(1)) {
            window.pop_front();
        }
        let (xs, gs, fs): (Vec<_>, Vec<_>, Vec<_>) = window.iter().cloned().fold(
            (Vec::new(), Vec::new(), Vec::new()),
            |(mut a, mut b, mut c), (x, g, f)| {
                a.push(x);
                b.push(g);
                c.push(f);
                (a, b, c)
            },
        );
        let alpha = constrained_alpha(&fs, &w)?;
        let mut lsq = DVector::zeros(x.len());
        for (f, &a) in fs.iter().zip(alpha.iter()) {
            lsq.axpy(a, f, T::one());
        }
        Ok((constrained_update(&xs, &gs, &alpha, beta)?, Some(lsq.norm())))
    })
}
