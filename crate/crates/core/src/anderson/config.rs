use crate::error::{Error, Result};
use crate::norms::NormKind;

/// History window length of the accelerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Memory {
    Finite(usize),
    Unbounded,
}

impl Memory {
    pub fn capacity(self) -> Option<usize> {
        match self {
            Memory::Finite(m) => Some(m),
            Memory::Unbounded => None,
        }
    }

    pub(crate) fn admits(self, len: usize) -> bool {
        self.capacity().is_none_or(|m| len <= m)
    }
}

impl From<usize> for Memory {
    fn from(m: usize) -> Self {
        Memory::Finite(m)
    }
}

/// Solver configuration shared by Picard and Anderson runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AAConfig {
    pub memory: Memory,
    /// Mixing parameter; the map is replaced by `(1 - beta) x + beta G(x)`.
    pub beta: f64,
    /// Norm of the least-squares step (also used for the weighted residual).
    pub norm: NormKind,
    /// Stop once `||f_k||_2 <= tol * ||f_0||_2`.
    pub tol: f64,
    pub max_iters: usize,
    /// Relative ridge added to the Gram matrix when its factorization fails.
    pub reg: f64,
}

impl Default for AAConfig {
    fn default() -> Self {
        Self {
            memory: Memory::Finite(10),
            beta: 1.0,
            norm: NormKind::L2,
            tol: 1e-8,
            max_iters: 500,
            reg: 1e-12,
        }
    }
}

impl AAConfig {
    pub fn new(memory: impl Into<Memory>) -> Self {
        Self { memory: memory.into(), ..Self::default() }
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_reg(mut self, reg: f64) -> Self {
        self.reg = reg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.reg >= 0.0 && self.reg.is_finite()) {
            return Err(Error::InvalidParameter(format!("reg must be nonnegative, got {}", self.reg)));
        }
        Ok(())
    }
}
