//! Picard iteration and Anderson acceleration.
//!
//! The main path is the unconstrained form: with `D_k` the window of residual
//! differences and `gamma = argmin ||f_k - D_k gamma||_w`,
//! `x_{k+1} = G(x_k) - sum_i gamma_i (G(x_{i+1}) - G(x_i))`.
//! The weighted norm comes from a [`WeightOperator`].

mod config;
mod history;
mod multisecant;
mod record;

pub use config::{AAConfig, Memory};
pub use history::{solve_gamma, AAHistory, StepOutcome, PIVOT_FLOOR};
pub use multisecant::{constrained_alpha, constrained_run, constrained_update, multisecant_operator};
pub use record::{ConvergenceRecord, IterationRow, Termination};

use nalgebra::DVector;

use crate::error::{check_len, Error, Result};
use crate::grid::{all_finite, Scalar};
use crate::norms::WeightOperator;

/// Residual growth (relative to the first) treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// A map `G` whose fixed point is sought.
pub trait FixedPointProblem<T: Scalar = f64> {
    fn dim(&self) -> usize;

    /// Grid spacing used by the weighted norms.
    fn h(&self) -> f64;

    fn apply(&self, x: &DVector<T>) -> Result<DVector<T>>;

    /// `G` is affine.
    fn is_linear(&self) -> bool {
        false
    }

    fn exact_solution(&self) -> Option<DVector<T>> {
        None
    }
}

impl<T: Scalar, P: FixedPointProblem<T> + ?Sized> FixedPointProblem<T> for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn h(&self) -> f64 {
        (**self).h()
    }
    fn apply(&self, x: &DVector<T>) -> Result<DVector<T>> {
        (**self).apply(x)
    }
    fn is_linear(&self) -> bool {
        (**self).is_linear()
    }
    fn exact_solution(&self) -> Option<DVector<T>> {
        (**self).exact_solution()
    }
}

/// The accelerator state for step-by-step use.
#[derive(Debug, Clone)]
pub struct Anderson<T: Scalar = f64> {
    history: AAHistory<T>,
    wop: WeightOperator,
    beta: f64,
    reg: f64,
}

impl<T: Scalar> Anderson<T> {
    pub fn new(config: &AAConfig, wop: WeightOperator) -> Result<Self> {
        config.validate()?;
        Ok(Self { history: AAHistory::new(config.memory), wop, beta: config.beta, reg: config.reg })
    }

    /// Builds the weight for a problem from the configured norm.
    pub fn for_problem<P: FixedPointProblem<T> + ?Sized>(config: &AAConfig, problem: &P) -> Result<Self> {
        let wop = WeightOperator::build(config.norm, problem.dim(), problem.h())?;
        Self::new(config, wop)
    }

    pub fn history(&self) -> &AAHistory<T> {
        &self.history
    }

    pub fn weight(&self) -> &WeightOperator {
        &self.wop
    }

    /// Records `(x, G(x))` into the window without extrapolating.
    pub fn observe(&mut self, x: &DVector<T>, gx: &DVector<T>) -> Result<()> {
        let g = self.damped(x, gx);
        let f = &g - x;
        self.history.push(x, &f, &self.wop)
    }

    /// Records `(x_k, G(x_k))` and returns `x_{k+1}`.
    pub fn step(&mut self, x: &DVector<T>, gx: &DVector<T>) -> Result<StepOutcome<T>> {
        check_len(x.len(), gx.len())?;
        let g = self.damped(x, gx);
        let f = &g - x;
        self.history.push(x, &f, &self.wop)?;
        history::extrapolate(&mut self.history, &g, &f, self.reg)
    }

    fn damped(&self, x: &DVector<T>, gx: &DVector<T>) -> DVector<T> {
        if self.beta == 1.0 {
            gx.clone()
        } else {
            let b = T::from_real(self.beta);
            x * T::from_real(1.0 - self.beta) + gx * b
        }
    }
}

/// Picard iteration `x_{k+1} = G(x_k)` with the stopping rules of `config`
/// (memory and beta are ignored).
pub fn picard_run<T: Scalar, P: FixedPointProblem<T> + ?Sized>(
    problem: &P,
    x0: &DVector<T>,
    config: &AAConfig,
) -> Result<(ConvergenceRecord, DVector<T>)> {
    config.validate()?;
    let wop = WeightOperator::build(config.norm, problem.dim(), problem.h())?;
    drive(problem, x0, config, &wop, |_, g| Ok((g.clone(), None)))
}

/// Anderson acceleration: `x_1 = G(x_0)` then one extrapolation per iteration.
pub fn aa_run<T: Scalar, P: FixedPointProblem<T> + ?Sized>(
    problem: &P,
    config: &AAConfig,
    x0: &DVector<T>,
) -> Result<(ConvergenceRecord, DVector<T>)> {
    let mut acc = Anderson::for_problem(config, problem)?;
    let wop = acc.weight().clone();
    drive(problem, x0, config, &wop, |x, g| {
        let out = acc.step(x, g)?;
        Ok((out.next, Some(out.lsq_residual)))
    })
}

/// Shared loop. `next` maps `(x_k, G(x_k))` to `x_{k+1}` and an optional
/// least-squares residual for row `k`.
pub(crate) fn drive<T, P, F>(
    problem: &P,
    x0: &DVector<T>,
    config: &AAConfig,
    wop: &WeightOperator,
    mut next: F,
) -> Result<(ConvergenceRecord, DVector<T>)>
where
    T: Scalar,
    P: FixedPointProblem<T> + ?Sized,
    F: FnMut(&DVector<T>, &DVector<T>) -> Result<(DVector<T>, Option<f64>)>,
{
    check_len(problem.dim(), x0.len())?;
    let exact = problem.exact_solution();
    let mut rec = ConvergenceRecord::new();
    let mut x = x0.clone();
    let mut r0 = 0.0;
    for k in 0..=config.max_iters {
        let g = match problem.apply(&x) {
            Ok(g) => g,
            Err(e) => {
                rec.status = Termination::Failed(e);
                break;
            }
        };
        check_len(x.len(), g.len())?;
        let f = &g - &x;
        let res = f.norm();
        if !res.is_finite() || !all_finite(&g) {
            rec.status = Termination::Diverged;
            break;
        }
        let res_w = wop.norm(&f)?;
        if k == 0 {
            r0 = res;
        }
        rec.rows.push(IterationRow {
            iter: k,
            res_l2: res,
            res_w,
            err_l2: exact.as_ref().map(|e| (&x - e).norm()),
            lsq_res: None,
        });
        if res <= config.tol * r0 {
            rec.status = Termination::Converged;
            break;
        }
        if res > DIVERGENCE_FACTOR * r0 {
            rec.status = Termination::Diverged;
            break;
        }
        if k == config.max_iters {
            rec.status = Termination::MaxIters;
            break;
        }
        match next(&x, &g) {
            Ok((xn, lsq)) => {
                rec.rows[k].lsq_res = lsq;
                if !all_finite(&xn) {
                    rec.status = Termination::Diverged;
                    break;
                }
                x = xn;
            }
            Err(e) => {
                rec.status = Termination::Failed(e);
                break;
            }
        }
    }
    Ok((rec, x))
}

/// Runs `k` Picard steps from `x0`, then one AA step with memory `m` whose
/// window holds the last `m` Picard differences. Returns `x_{k+1} - x*`.
pub fn one_step_aa<T: Scalar, P: FixedPointProblem<T> + ?Sized>(
    problem: &P,
    x0: &DVector<T>,
    k: usize,
    m: usize,
    wop: &WeightOperator,
) -> Result<DVector<T>> {
    if m < 1 || k < m {
        return Err(Error::InvalidParameter(format!("one-step AA needs k >= m >= 1, got k={k}, m={m}")));
    }
    let exact = problem
        .exact_solution()
        .ok_or_else(|| Error::Unsupported("one-step AA needs the exact fixed point".into()))?;
    check_len(problem.dim(), x0.len())?;
    let config = AAConfig::new(m).with_reg(0.0);
    let mut acc = Anderson::new(&config, wop.clone())?;
    let mut x = x0.clone();
    for j in 0..k {
        let g = problem.apply(&x)?;
        if j + m >= k {
            acc.observe(&x, &g)?;
        }
        x = g;
    }
    let g = problem.apply(&x)?;
    let out = acc.step(&x, &g)?;
    if out.dropped > 0 {
        return Err(Error::SingularGram);
    }
    Ok(out.next - exact)
}

#[cfg(test)]
mod tests;
