use nalgebra::{DMatrix, DVector};

use super::Scalar;
use crate::error::{check_len, Error, Result};

/// Symmetric band matrix stored by lower diagonals: `bands[d][i] = A[i + d, i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBandMatrix {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl SymmetricBandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("band matrix order must be positive".into()));
        }
        let bw = bw.min(n - 1);
        let bands = (0..=bw).map(|d| vec![0.0; n - d]).collect();
        Ok(Self { n, bands })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, 0)?;
        m.bands[0].fill(1.0);
        Ok(m)
    }

    /// Neumann Laplacian with the half-sample closure at both ends:
    /// diagonal `(-1, -2, ..., -2, -1) / h^2`, off-diagonals `1 / h^2`.
    pub fn laplacian_neumann(n: usize, h: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!("Neumann Laplacian needs n >= 2, got {n}")));
        }
        check_spacing(h)?;
        let s = 1.0 / (h * h);
        let mut m = Self::zeros(n, 1)?;
        m.bands[0].fill(-2.0 * s);
        m.bands[0][0] = -s;
        m.bands[0][n - 1] = -s;
        m.bands[1].fill(s);
        Ok(m)
    }

    /// Dirichlet Laplacian on interior points: `tridiag(1, -2, 1) / h^2`.
    pub fn laplacian_dirichlet(n: usize, h: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension("Dirichlet Laplacian needs n >= 1".into()));
        }
        check_spacing(h)?;
        let s = 1.0 / (h * h);
        let mut m = Self::zeros(n, 1)?;
        m.bands[0].fill(-2.0 * s);
        if n > 1 {
            m.bands[1].fill(s);
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    /// The `d`-th sub-diagonal (`d = 0` is the main diagonal).
    pub fn band(&self, d: usize) -> &[f64] {
        &self.bands[d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d > self.bandwidth() {
            0.0
        } else {
            self.bands[d][j]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        assert!(d <= self.bandwidth(), "entry ({i}, {j}) outside the band");
        self.bands[d][j] = value;
    }

    pub fn matvec<T: Scalar>(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_len(self.n, x.len())?;
        let mut y = DVector::from_fn(self.n, |i, _| x[i].scale(self.bands[0][i]));
        for (d, band) in self.bands.iter().enumerate().skip(1) {
            for (j, &a) in band.iter().enumerate() {
                y[j + d] += x[j].scale(a);
                y[j] += x[j + d].scale(a);
            }
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn scale(&self, c: f64) -> Self {
        let bands = self.bands.iter().map(|b| b.iter().map(|v| c * v).collect()).collect();
        Self { n: self.n, bands }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.n, other.n)?;
        let bw = self.bandwidth().max(other.bandwidth());
        let mut out = Self::zeros(self.n, bw)?;
        for (d, band) in out.bands.iter_mut().enumerate() {
            for (j, v) in band.iter_mut().enumerate() {
                *v = self.get(j + d, j) + other.get(j + d, j);
            }
        }
        Ok(out)
    }

    /// Product of two commuting symmetric band matrices (e.g. powers of one
    /// matrix); only the lower triangle of `self * other` is formed.
    pub fn mul_commuting(&self, other: &Self) -> Result<Self> {
        check_len(self.n, other.n)?;
        let (ba, bb) = (self.bandwidth(), other.bandwidth());
        let mut out = Self::zeros(self.n, ba + bb)?;
        let n = self.n;
        for d in 0..=out.bandwidth() {
            for j in 0..n - d {
                let i = j + d;
                let lo = i.saturating_sub(ba).max(j.saturating_sub(bb));
                let hi = (i + ba).min(j + bb).min(n - 1);
                let mut acc = 0.0;
                for k in lo..=hi {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.bands[d][j] = acc;
            }
        }
        Ok(out)
    }

    /// Band Cholesky factorization `A = L L^T`, no pivoting.
    pub fn cholesky(&self) -> Result<BandFactor> {
        BandFactor::new(self)
    }
}

fn check_spacing(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("grid spacing must be positive, got {h}")))
    }
}

/// Lower Cholesky factor of a [`SymmetricBandMatrix`], same band layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BandFactor {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl BandFactor {
    pub fn new(a: &SymmetricBandMatrix) -> Result<Self> {
        let n = a.n;
        let bw = a.bandwidth();
        let mut l = a.bands.clone();
        let at = |l: &Vec<Vec<f64>>, i: usize, k: usize| l[i - k][k];
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut pivot = l[0][j];
            for k in lo..j {
                let v = at(&l, j, k);
                pivot -= v * v;
            }
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite { row: j, pivot });
            }
            let diag = pivot.sqrt();
            l[0][j] = diag;
            for i in j + 1..=(j + bw).min(n - 1) {
                let mut v = l[i - j][j];
                for k in i.saturating_sub(bw)..j {
                    v -= at(&l, i, k) * at(&l, j, k);
                }
                l[i - j][j] = v / diag;
            }
        }
        Ok(Self { n, bands: l })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    /// Solves `L L^T y = rhs`. The factor is real, so complex right-hand sides
    /// are handled componentwise.
    pub fn solve<T: Scalar>(&self, rhs: &DVector<T>) -> Result<DVector<T>> {
        check_len(self.n, rhs.len())?;
        let mut y = rhs.clone();
        self.solve_in_place(&mut y);
        Ok(y)
    }

    pub(crate) fn solve_in_place<T: Scalar>(&self, y: &mut DVector<T>) {
        let n = self.n;
        let bw = self.bandwidth();
        for i in 0..n {
            let mut v = y[i];
            for k in i.saturating_sub(bw)..i {
                v -= y[k].scale(self.bands[i - k][k]);
            }
            y[i] = v.unscale(self.bands[0][i]);
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in i + 1..=(i + bw).min(n - 1) {
                v -= y[k].scale(self.bands[k - i][i]);
            }
            y[i] = v.unscale(self.bands[0][i]);
        }
    }

    /// Dense `L L^T`, for checks.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let l = DMatrix::from_fn(self.n, self.n, |i, j| {
            if i >= j && i - j <= self.bandwidth() {
                self.bands[i - j][j]
            } else {
                0.0
            }
        });
        &l * l.transpose()
    }
}

/// Real general band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct GeneralBandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // rows[i][c] holds A[i, i - kl + c] for c in 0..=2kl+ku; the extra kl
    // slots absorb fill-in from row interchanges during LU.
    rows: Vec<Vec<f64>>,
}

impl GeneralBandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, rows: vec![vec![0.0; width]; n] }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let c = j as isize - i as isize + self.kl as isize;
        (c >= 0 && (c as usize) < self.rows[i].len()).then_some(c as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |c| self.rows[i][c])
    }

    /// Adds `value` to entry `(i, j)`, which must lie inside the declared band.
    pub fn add_to(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside the declared band"
        );
        let c = self.slot(i, j).expect("inside band");
        self.rows[i][c] += value;
    }

    pub fn matvec(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.n, x.len())?;
        Ok(DVector::from_fn(self.n, |i, _| {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
        }))
    }

    /// LU factorization with partial (row) pivoting.
    pub fn lu(mut self) -> Result<BandLu> {
        let n = self.n;
        let reach = self.kl + self.ku;
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = vec![Vec::new(); n];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let p = (k..=last_row)
                .max_by(|&a, &b| self.get(a, k).abs().total_cmp(&self.get(b, k).abs()))
                .unwrap_or(k);
            if self.get(p, k) == 0.0 {
                return Err(Error::SingularSystem(k));
            }
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.get(k, j), self.get(p, j));
                    let ck = self.slot(k, j).expect("pivot row window");
                    let cp = self.slot(p, j).expect("candidate row window");
                    self.rows[k][ck] = b;
                    self.rows[p][cp] = a;
                }
            }
            pivots.push(p);
            let pivot = self.get(k, k);
            let mut mults = Vec::with_capacity(last_row - k);
            for i in k + 1..=last_row {
                let m = self.get(i, k) / pivot;
                mults.push(m);
                if m == 0.0 {
                    continue;
                }
                for j in k..=last_col {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        let c = self.slot(i, j).expect("fill inside window");
                        self.rows[i][c] -= m * u;
                    }
                }
            }
            multipliers[k] = mults;
        }
        Ok(BandLu { upper: self, pivots, multipliers })
    }
}

/// Factors produced by [`GeneralBandMatrix::lu`].
#[derive(Debug, Clone)]
pub struct BandLu {
    upper: GeneralBandMatrix,
    pivots: Vec<usize>,
    multipliers: Vec<Vec<f64>>,
}

impl BandLu {
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let u = &self.upper;
        check_len(u.n, rhs.len())?;
        let n = u.n;
        let mut y = rhs.clone();
        for k in 0..n {
            y.swap_rows(k, self.pivots[k]);
            let yk = y[k];
            for (off, m) in self.multipliers[k].iter().enumerate() {
                y[k + 1 + off] -= m * yk;
            }
        }
        let reach = u.kl + u.ku;
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                v -= u.get(i, j) * y[j];
            }
            y[i] = v / u.get(i, i);
        }
        Ok(y)
    }
}
