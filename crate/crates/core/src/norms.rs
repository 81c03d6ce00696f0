//! Discrete `H^{-s}` inner products.
//!
//! With `K` the half-sample Neumann Laplacian on `n` points, the weight
//! matrix is `W_s = sum_{r=0}^{s} (-K)^r` and
//!
//! ```text
//! <u, v>_s = h * u^* W_s^{-1} v
//! ```
//!
//! `W_s` is SPD with half-bandwidth `s`, but its condition number grows like
//! `h^{-2s}`. Writing `t = -K`, the weight factors over the `(s+1)`-th roots of
//! unity `z_k != 1`:
//!
//! ```text
//! 1 + t + ... + t^s = (t - z_1)(t - z_2)...(t - z_s)
//! ```
//!
//! so `W_s^{-1}` is applied as `s` shifted tridiagonal solves, each with
//! condition number of order `h^{-2}`. No square root of `W_s` is ever formed:
//! every quantity the least-squares step needs is an inner product.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::grid::{tridiag_solve, Scalar, SymmetricBandMatrix};

/// Sobolev order `s` of the `H^{-s}` norm; `s = 0` is plain `L^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NormKind {
    s: u32,
}

impl NormKind {
    pub const L2: Self = Self { s: 0 };
    pub const HM1: Self = Self { s: 1 };
    pub const HM2: Self = Self { s: 2 };

    pub const fn new(s: u32) -> Self {
        Self { s }
    }

    pub const fn order(self) -> u32 {
        self.s
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.s {
            0 => write!(f, "l2"),
            s => write!(f, "hm{s}"),
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;

    /// Accepts `l2`, `hm1`, `hm2`, ... (`hm0` is also `l2`).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "l2" {
            return Ok(Self::L2);
        }
        t.strip_prefix("hm")
            .and_then(|d| d.parse::<u32>().ok())
            .map(Self::new)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown norm '{s}' (expected l2, hm1, hm2, hm<s>)")))
    }
}

/// Factorized weight `W_s` together with the grid it was built for.
#[derive(Debug, Clone)]
pub struct WeightOperator {
    kind: NormKind,
    n: usize,
    h: f64,
    scale: f64,
    matrix: SymmetricBandMatrix,
    shifted: Vec<ShiftedSolve>,
}

/// Tridiagonal `-K - z I` for one root `z`.
#[derive(Debug, Clone)]
struct ShiftedSolve {
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
}

impl ShiftedSolve {
    fn solve(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        tridiag_solve(&self.lower, &self.diag, &self.lower, v)
    }
}

impl WeightOperator {
    /// Assembles and factors `W_s` for an `n`-point grid with spacing `h`.
    ///
    /// The `L^2` weight needs no Laplacian and is accepted for any `n >= 1`;
    /// `s >= 1` requires `n >= 2`.
    pub fn build(kind: NormKind, n: usize, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {h}")));
        }
        if kind.s == 0 {
            return Ok(Self {
                kind,
                n,
                h,
                scale: 1.0,
                matrix: SymmetricBandMatrix::identity(n)?,
                shifted: Vec::new(),
            });
        }
        if n < 2 {
            return Err(Error::InvalidDimension(format!("H^-{} weight needs n >= 2, got {n}", kind.s)));
        }
        let neg_k = SymmetricBandMatrix::laplacian_neumann(n, h)?.scale(-1.0);
        let mut w = SymmetricBandMatrix::identity(n)?;
        let mut power = SymmetricBandMatrix::identity(n)?;
        for _ in 0..kind.s {
            power = power.mul_commuting(&neg_k)?;
            w = w.add(&power)?;
        }
        let lower: Vec<Complex64> = neg_k.band(1).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let shifted = (1..=kind.s)
            .map(|k| {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / (kind.s + 1) as f64);
                let diag = neg_k.band(0).iter().map(|&v| v - z).collect();
                ShiftedSolve { lower: lower.clone(), diag }
            })
            .collect();
        Ok(Self { kind, n, h, scale: 1.0, matrix: w, shifted })
    }

    /// Plain `L^2` weight on an `n`-point grid.
    pub fn l2(n: usize, h: f64) -> Result<Self> {
        Self::build(NormKind::L2, n, h)
    }

    /// Same operator with the inner product multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight scale must be positive, got {c}")));
        }
        Ok(Self { scale: self.scale * c, ..self.clone() })
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// The assembled band matrix `W_s`.
    pub fn matrix(&self) -> &SymmetricBandMatrix {
        &self.matrix
    }

    /// `W_s^{-1} v`.
    pub fn apply_inverse<T: Scalar>(&self, v: &DVector<T>) -> Result<DVector<T>> {
        check_len(self.n, v.len())?;
        if self.shifted.is_empty() {
            return Ok(v.clone());
        }
        // W_s is real: the real and imaginary parts are solved separately so
        // that the conjugate-pair product is real up to rounding.
        let re = self.solve_real(v.map(|x| x.real()))?;
        if v.iter().all(|x| x.imaginary() == 0.0) {
            return Ok(re.map(|r| T::from_complex(Complex64::new(r, 0.0))));
        }
        let im = self.solve_real(v.map(|x| x.imaginary()))?;
        Ok(DVector::from_fn(self.n, |i, _| T::from_complex(Complex64::new(re[i], im[i]))))
    }

    fn solve_real(&self, v: DVector<f64>) -> Result<DVector<f64>> {
        let mut y = v.map(|x| Complex64::new(x, 0.0));
        for factor in &self.shifted {
            y = factor.solve(&y)?;
        }
        Ok(y.map(|z| z.re))
    }

    /// Riesz representative `z = c h W_s^{-1} v`, so that `<u, v> = u^* z`.
    pub fn dual<T: Scalar>(&self, v: &DVector<T>) -> Result<DVector<T>> {
        let mut z = self.apply_inverse(v)?;
        let c = self.scale * self.h;
        z.iter_mut().for_each(|x| *x = x.scale(c));
        Ok(z)
    }

    /// `<u, v> = h u^* W_s^{-1} v`, conjugate-linear in `u`.
    pub fn inner<T: Scalar>(&self, u: &DVector<T>, v: &DVector<T>) -> Result<T> {
        check_len(self.n, u.len())?;
        Ok(u.dotc(&self.dual(v)?))
    }

    pub fn norm<T: Scalar>(&self, u: &DVector<T>) -> Result<f64> {
        Ok(self.inner(u, u)?.real().max(0.0).sqrt())
    }

    /// Gram matrix `G_ij = <D_i, D_j>` and right-hand side `g_i = <D_i, f>`.
    pub fn gram_system<T: Scalar>(
        &self,
        columns: &[DVector<T>],
        f: &DVector<T>,
    ) -> Result<(DMatrix<T>, DVector<T>)> {
        let duals = columns.iter().map(|c| self.dual(c)).collect::<Result<Vec<_>>>()?;
        gram_from_duals(columns, &duals, f)
    }
}

/// Assembles the Gram system from columns and their precomputed duals
/// (`duals[i] = c h W^{-1} columns[i]`).
pub fn gram_from_duals<T: Scalar>(
    columns: &[DVector<T>],
    duals: &[DVector<T>],
    f: &DVector<T>,
) -> Result<(DMatrix<T>, DVector<T>)> {
    let m = columns.len();
    check_len(m, duals.len())?;
    for c in columns {
        check_len(f.len(), c.len())?;
    }
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = duals[i].dotc(&columns[j]);
            g[(i, j)] = v;
            g[(j, i)] = v.conjugate();
        }
        // the diagonal of a Hermitian matrix is real
        g[(i, i)] = T::from_real(g[(i, i)].real());
    }
    let rhs = DVector::from_fn(m, |i, _| duals[i].dotc(f));
    Ok((g, rhs))
}

/// Columns orthonormalized in a weighted inner product, `D = Q R` with
/// `Q^* P^2 Q = I`.
#[derive(Debug, Clone)]
pub struct WeightedQr<T: Scalar> {
    q: Vec<DVector<T>>,
    q_duals: Vec<DVector<T>>,
    r: DMatrix<T>,
    min_relative_pivot: f64,
}

impl<T: Scalar> WeightedQr<T> {
    /// Two-pass classical Gram-Schmidt. `duals[i]` must be the dual of
    /// `columns[i]`; the duals of the `Q` columns follow by the same updates.
    pub fn new(columns: &[DVector<T>], duals: &[DVector<T>]) -> Result<Self> {
        let m = columns.len();
        check_len(m, duals.len())?;
        let mut q: Vec<DVector<T>> = Vec::with_capacity(m);
        let mut qd: Vec<DVector<T>> = Vec::with_capacity(m);
        let mut r = DMatrix::zeros(m, m);
        let mut min_rel = f64::INFINITY;
        for j in 0..m {
            check_len(columns[j].len(), duals[j].len())?;
            let mut v = columns[j].clone();
            let mut z = duals[j].clone();
            let n0 = z.dotc(&v).real().max(0.0).sqrt();
            for _ in 0..2 {
                for i in 0..q.len() {
                    let c = qd[i].dotc(&v);
                    v.axpy(-c, &q[i], T::one());
                    z.axpy(-c, &qd[i], T::one());
                    r[(i, j)] += c;
                }
            }
            let nrm = z.dotc(&v).real().max(0.0).sqrt();
            let rel = if n0 > 0.0 { nrm / n0 } else { 0.0 };
            min_rel = min_rel.min(rel);
            if !(nrm > 0.0 && nrm.is_finite()) {
                min_rel = 0.0;
                break;
            }
            let inv = T::from_real(1.0 / nrm);
            q.push(v * inv);
            qd.push(z * inv);
            r[(j, j)] = T::from_real(nrm);
        }
        Ok(Self { q, q_duals: qd, r, min_relative_pivot: if m == 0 { 0.0 } else { min_rel } })
    }

    /// Smallest `R_jj / ||d_j||`; zero when a column is dependent on the
    /// earlier ones.
    pub fn min_relative_pivot(&self) -> f64 {
        self.min_relative_pivot
    }

    pub fn r(&self) -> &DMatrix<T> {
        &self.r
    }

    pub fn q(&self) -> &[DVector<T>] {
        &self.q
    }

    pub fn q_duals(&self) -> &[DVector<T>] {
        &self.q_duals
    }

    /// `argmin_v ||f - D v||` in the weighted norm.
    pub fn solve(&self, f: &DVector<T>) -> Result<DVector<T>> {
        let m = self.r.ncols();
        if self.q.len() < m || m == 0 {
            return Err(Error::SingularGram);
        }
        let mut rest = f.clone();
        let mut c = DVector::zeros(m);
        for i in 0..m {
            c[i] = self.q_duals[i].dotc(&rest);
            rest.axpy(-c[i], &self.q[i], T::one());
        }
        self.back_substitute(c)
    }

    /// `R^{-1} c`.
    pub fn back_substitute(&self, mut c: DVector<T>) -> Result<DVector<T>> {
        let m = self.r.ncols();
        for i in (0..m).rev() {
            let mut s = c[i];
            for j in i + 1..m {
                s -= self.r[(i, j)] * c[j];
            }
            if self.r[(i, i)].modulus() == 0.0 {
                return Err(Error::SingularGram);
            }
            c[i] = s / self.r[(i, i)];
        }
        Ok(c)
    }
}
