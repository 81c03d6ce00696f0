use crate::error::Error;

/// One row of a convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub iter: usize,
    /// `||f_k||_2`, the unweighted residual.
    pub res_l2: f64,
    /// Residual in the run's weighted norm.
    pub res_w: f64,
    /// `||x_k - x*||_2` when the fixed point is known.
    pub err_l2: Option<f64>,
    /// `||f_k - D_k gamma_k||_2`, the minimized linearized residual of the
    /// Anderson step (Anderson runs only).
    pub lsq_res: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Converged,
    MaxIters,
    /// Non-finite iterate or residual growth beyond `1e12` times the initial.
    Diverged,
    /// The map or an inner solve failed; the history up to that point is kept.
    Failed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub rows: Vec<IterationRow>,
    pub status: Termination,
}

impl ConvergenceRecord {
    pub fn new() -> Self {
        Self { rows: Vec::new(), status: Termination::MaxIters }
    }

    pub fn initial_residual(&self) -> Option<f64> {
        self.rows.first().map(|r| r.res_l2)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.rows.last().map(|r| r.res_l2)
    }

    /// First iteration with `res_l2 <= rel * res_l2[0]`.
    pub fn iterations_to(&self, rel: f64) -> Option<usize> {
        let r0 = self.initial_residual()?;
        self.rows.iter().find(|r| r.res_l2 <= rel * r0).map(|r| r.iter)
    }

    /// Largest `res_l2[k] / res_l2[0]` seen.
    pub fn max_growth(&self) -> f64 {
        let Some(r0) = self.initial_residual() else { return 0.0 };
        self.rows.iter().map(|r| r.res_l2 / r0).fold(0.0, f64::max)
    }

    pub fn converged(&self) -> bool {
        self.status == Termination::Converged
    }
}

impl Default for ConvergenceRecord {
    fn default() -> Self {
        Self::new()
    }
}
