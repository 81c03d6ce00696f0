use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::config::Memory;
use crate::error::{check_len, Error, Result};
use crate::grid::Scalar;
use crate::grid::all_finite;
use crate::norms::{gram_from_duals, WeightOperator, WeightedQr};

/// Sliding windows `X_k = [dx_i]` and `D_k = [df_i]` plus the previous
/// iterate and residual. Duals of the `df` columns are cached so each step
/// costs one weight solve.
#[derive(Debug, Clone)]
pub struct AAHistory<T: Scalar = f64> {
    memory: Memory,
    dx: VecDeque<DVector<T>>,
    df: VecDeque<DVector<T>>,
    duals: VecDeque<DVector<T>>,
    prev_x: Option<DVector<T>>,
    prev_f: Option<DVector<T>>,
}

impl<T: Scalar> AAHistory<T> {
    pub fn new(memory: Memory) -> Self {
        Self {
            memory,
            dx: VecDeque::new(),
            df: VecDeque::new(),
            duals: VecDeque::new(),
            prev_x: None,
            prev_f: None,
        }
    }

    pub fn len(&self) -> usize {
        self.df.len()
    }

    pub fn is_empty(&self) -> bool {
        self.df.is_empty()
    }

    pub fn memory(&self) -> Memory {
        self.memory
    }

    /// Columns `x_{i+1} - x_i`, oldest first.
    pub fn dx_cols(&self) -> Vec<DVector<T>> {
        self.dx.iter().cloned().collect()
    }

    /// Columns `f_{i+1} - f_i`, oldest first.
    pub fn df_cols(&self) -> Vec<DVector<T>> {
        self.df.iter().cloned().collect()
    }

    pub fn prev_x(&self) -> Option<&DVector<T>> {
        self.prev_x.as_ref()
    }

    pub fn prev_f(&self) -> Option<&DVector<T>> {
        self.prev_f.as_ref()
    }

    /// Records the pair `(x_k, f_k)`, appending difference columns against the
    /// previous pair and evicting the oldest column beyond capacity.
    pub fn push(&mut self, x: &DVector<T>, f: &DVector<T>, wop: &WeightOperator) -> Result<()> {
        check_len(x.len(), f.len())?;
        if let (Some(px), Some(pf)) = (&self.prev_x, &self.prev_f) {
            check_len(px.len(), x.len())?;
            if self.memory != Memory::Finite(0) {
                let dfi = f - pf;
                self.duals.push_back(wop.dual(&dfi)?);
                self.dx.push_back(x - px);
                self.df.push_back(dfi);
                while !self.memory.admits(self.df.len()) {
                    self.pop_oldest();
                }
            }
        }
        self.prev_x = Some(x.clone());
        self.prev_f = Some(f.clone());
        Ok(())
    }

    pub fn pop_oldest(&mut self) {
        self.dx.pop_front();
        self.df.pop_front();
        self.duals.pop_front();
    }

    pub fn clear(&mut self) {
        self.dx.clear();
        self.df.clear();
        self.duals.clear();
        self.prev_x = None;
        self.prev_f = None;
    }
}

/// Result of one extrapolation.
#[derive(Debug, Clone)]
pub struct StepOutcome<T: Scalar = f64> {
    pub next: DVector<T>,
    /// Coefficients for the columns that survived, oldest first. Empty for a
    /// Picard step.
    pub gamma: DVector<T>,
    /// Columns discarded by the least-squares fallback.
    pub dropped: usize,
    /// `||f_k - D_k gamma||_2`.
    pub lsq_residual: f64,
}

/// Columns whose orthogonalized part falls below this fraction of their norm
/// count as dependent (where a Gram factorization would break down).
pub const PIVOT_FLOOR: f64 = 1e-8;

/// `argmin_v ||f - D v||_w`. A weighted QR of the window is tried first; if a
/// column is numerically dependent the Gram matrix is factored with a ridge of
/// `reg * trace(G) / m`, and failing that the oldest column is dropped.
pub fn solve_gamma<T: Scalar>(
    columns: &[DVector<T>],
    f: &DVector<T>,
    wop: &WeightOperator,
    reg: f64,
) -> Result<DVector<T>> {
    let duals = columns.iter().map(|c| wop.dual(c)).collect::<Result<Vec<_>>>()?;
    solve_gamma_with_duals(columns, &duals, f, reg).map(|(g, _)| g)
}

/// As [`solve_gamma`] with cached duals. Also returns how many of the oldest
/// columns had to be discarded.
pub(crate) fn solve_gamma_with_duals<T: Scalar>(
    columns: &[DVector<T>],
    duals: &[DVector<T>],
    f: &DVector<T>,
    reg: f64,
) -> Result<(DVector<T>, usize)> {
    if columns.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let m = columns.len();
    for start in 0..m {
        let (cols, dls) = (&columns[start..], &duals[start..]);
        let qr = WeightedQr::new(cols, dls)?;
        if qr.min_relative_pivot() > PIVOT_FLOOR {
            if let Ok(v) = qr.solve(f) {
                if all_finite(&v) {
                    return Ok((v, start));
                }
            }
        }
        let k = m - start;
        let (g, r) = gram_from_duals(cols, dls, f)?;
        let trace: f64 = (0..k).map(|i| g[(i, i)].real()).sum();
        let ridge = reg * trace / k as f64;
        if ridge > 0.0 {
            let mut gr = g;
            for i in 0..k {
                gr[(i, i)] += T::from_real(ridge);
            }
            if let Some(v) = cholesky_solve(gr, &r) {
                return Ok((v, start));
            }
        }
    }
    Err(Error::EmptyWindow)
}

fn cholesky_solve<T: Scalar>(g: DMatrix<T>, r: &DVector<T>) -> Option<DVector<T>> {
    let ch = g.cholesky()?;
    let v = ch.solve(r);
    all_finite(&v).then_some(v)
}

/// `x_{k+1} = g_k - sum_i gamma_i (dx_i + df_i)` on the current window, or
/// `g_k` when the window is empty. `f` must be `g - x` for the iterate most
/// recently pushed.
pub(crate) fn extrapolate<T: Scalar>(
    history: &mut AAHistory<T>,
    g: &DVector<T>,
    f: &DVector<T>,
    reg: f64,
) -> Result<StepOutcome<T>> {
    if history.is_empty() {
        return Ok(StepOutcome {
            next: g.clone(),
            gamma: DVector::zeros(0),
            dropped: 0,
            lsq_residual: f.norm(),
        });
    }
    let cols: Vec<_> = history.df.iter().cloned().collect();
    let duals: Vec<_> = history.duals.iter().cloned().collect();
    let (gamma, dropped) = match solve_gamma_with_duals(&cols, &duals, f, reg) {
        Ok(v) => v,
        Err(Error::EmptyWindow) => {
            for _ in 0..cols.len() {
                history.pop_oldest();
            }
            return Ok(StepOutcome {
                next: g.clone(),
                gamma: DVector::zeros(0),
                dropped: cols.len(),
                lsq_residual: f.norm(),
            });
        }
        Err(e) => return Err(e),
    };
    for _ in 0..dropped {
        history.pop_oldest();
    }
    let mut next = g.clone();
    let mut lsq = f.clone();
    for (i, (dx, df)) in history.dx.iter().zip(history.df.iter()).enumerate() {
        let c = gamma[i];
        next.axpy(-c, dx, T::one());
        next.axpy(-c, df, T::one());
        lsq.axpy(-c, df, T::one());
    }
    Ok(StepOutcome { next, gamma, dropped, lsq_residual: lsq.norm() })
}
