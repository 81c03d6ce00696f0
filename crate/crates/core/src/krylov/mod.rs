//! Restarted GMRES on the linear system hidden in an affine fixed-point map.

use nalgebra::DVector;

use crate::anderson::{ConvergenceRecord, FixedPointProblem, IterationRow, Termination, DIVERGENCE_FACTOR};
use crate::error::{check_len, Error, Result};
use crate::grid::all_finite;
use crate::norms::{NormKind, WeightOperator};

/// `(I - A) x = b` for an affine map `G(x) = A x + b`. `G(0)` is evaluated
/// once.
pub struct AffineSystem<'a, P: FixedPointProblem + ?Sized> {
    problem: &'a P,
    b: DVector<f64>,
}

impl<'a, P: FixedPointProblem + ?Sized> AffineSystem<'a, P> {
    pub fn new(problem: &'a P) -> Result<Self> {
        let b = problem.apply(&DVector::zeros(problem.dim()))?;
        Ok(Self { problem, b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn problem(&self) -> &P {
        self.problem
    }

    /// `v - (G(v) - G(0))`.
    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.dim(), v.len())?;
        let g = self.problem.apply(v)?;
        Ok(v - (g - &self.b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresConfig {
    /// Inner iterations per cycle; `None` never restarts.
    pub restart: Option<usize>,
    pub tol: f64,
    /// Cap on the total number of inner iterations.
    pub max_iters: usize,
    /// Norm for the `res_w` column.
    pub norm: NormKind,
    /// Measure `max |V^T V - I|` at the end of each cycle.
    pub track_orthogonality: bool,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { restart: Some(20), tol: 1e-8, max_iters: 500, norm: NormKind::L2, track_orthogonality: false }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutput {
    pub record: ConvergenceRecord,
    pub x: DVector<f64>,
    /// Operator applications, including one per restart for the new residual.
    pub matvecs: usize,
    /// Worst basis orthogonality defect over all cycles (when tracked).
    pub max_basis_defect: Option<f64>,
}

/// Restarted GMRES from `x0`. Row `j` holds the residual after `j` inner
/// iterations, formed as `r_0 - V_{j+1} H_j y_j` within a cycle.
pub fn gmres_restarted<P: FixedPointProblem + ?Sized>(
    sys: &AffineSystem<'_, P>,
    x0: &DVector<f64>,
    config: &GmresConfig,
) -> Result<GmresOutput> {
    if config.restart == Some(0) {
        return Err(Error::InvalidParameter("restart length must be at least 1".into()));
    }
    if !(config.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", config.tol)));
    }
    let n = sys.dim();
    check_len(n, x0.len())?;
    let wop = WeightOperator::build(config.norm, n, sys.problem().h())?;
    let exact = sys.problem().exact_solution();
    let row = |iter: usize, x: &DVector<f64>, r: &DVector<f64>| -> Result<IterationRow> {
        Ok(IterationRow {
            iter,
            res_l2: r.norm(),
            res_w: wop.norm(r)?,
            err_l2: exact.as_ref().map(|e| (x - e).norm()),
            lsq_res: None,
        })
    };

    let mut out = GmresOutput {
        record: ConvergenceRecord::new(),
        x: x0.clone(),
        matvecs: 0,
        max_basis_defect: None,
    };
    let mut r = sys.rhs() - sys.apply(&out.x)?;
    out.matvecs += 1;
    let r0 = r.norm();
    if !r0.is_finite() {
        out.record.status = Termination::Diverged;
        return Ok(out);
    }
    out.record.rows.push(row(0, &out.x, &r)?);
    if r0 == 0.0 {
        out.record.status = Termination::Converged;
        return Ok(out);
    }
    let target = config.tol * r0;
    let mut total = 0;

    loop {
        let beta = r.norm();
        let cycle = config.restart.unwrap_or(usize::MAX).min(config.max_iters - total);
        let mut v: Vec<DVector<f64>> = vec![&r / beta];
        let mut hcols: Vec<DVector<f64>> = Vec::new();
        let mut rcols: Vec<DVector<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut status = None;
        let mut xk = out.x.clone();

        for j in 0..cycle {
            let mut w = match sys.apply(&v[j]) {
                Ok(w) => w,
                Err(e) => {
                    status = Some(Termination::Failed(e));
                    break;
                }
            };
            out.matvecs += 1;
            let wnorm = w.norm();
            let mut hj = DVector::zeros(j + 2);
            for (i, vi) in v.iter().enumerate() {
                hj[i] = vi.dot(&w);
                w.axpy(-hj[i], vi, 1.0);
            }
            let hnext = w.norm();
            hj[j + 1] = hnext;
            let breakdown = hnext <= 1e-14 * wnorm.max(f64::MIN_POSITIVE);
            let raw = hj.clone();
            for i in 0..j {
                let t = cs[i] * hj[i] + sn[i] * hj[i + 1];
                hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
                hj[i] = t;
            }
            let rho = hj[j].hypot(hj[j + 1]);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (hj[j] / rho, hj[j + 1] / rho) };
            cs.push(c);
            sn.push(s);
            hj[j] = rho;
            hj[j + 1] = 0.0;
            g.push(-s * g[j]);
            g[j] *= c;
            hcols.push(raw);
            rcols.push(hj);
            if !breakdown {
                v.push(w / hnext);
            }

            let y = back_substitute(&rcols, &g)?;
            xk = out.x.clone();
            for (vi, yi) in v.iter().zip(y.iter()) {
                xk.axpy(*yi, vi, 1.0);
            }
            // r_j = r_0 - V_{j+1} Hbar_j y
            let mut rj = r.clone();
            for (col, yc) in hcols.iter().zip(y.iter()) {
                for (i, hij) in col.iter().enumerate() {
                    if i < v.len() {
                        rj.axpy(-hij * yc, &v[i], 1.0);
                    }
                }
            }
            total += 1;
            if !all_finite(&xk) || !rj.norm().is_finite() {
                status = Some(Termination::Diverged);
                break;
            }
            let res = rj.norm();
            out.record.rows.push(row(total, &xk, &rj)?);
            if res <= target || breakdown {
                status = Some(Termination::Converged);
                break;
            }
            if res > DIVERGENCE_FACTOR * r0 {
                status = Some(Termination::Diverged);
                break;
            }
        }

        if config.track_orthogonality {
            let d = basis_defect(&v);
            out.max_basis_defect = Some(out.max_basis_defect.map_or(d, |m: f64| m.max(d)));
        }
        if !matches!(status, Some(Termination::Diverged)) {
            out.x = xk;
        }
        if let Some(s) = status {
            out.record.status = s;
            return Ok(out);
        }
        if total >= config.max_iters {
            out.record.status = Termination::MaxIters;
            return Ok(out);
        }
        r = sys.rhs() - sys.apply(&out.x)?;
        out.matvecs += 1;
    }
}

/// Solves the rotated upper triangular system `R y = g`.
fn back_substitute(rcols: &[DVector<f64>], g: &[f64]) -> Result<DVector<f64>> {
    let k = rcols.len();
    let mut y = DVector::from_column_slice(&g[..k]);
    for i in (0..k).rev() {
        let mut s = y[i];
        for j in i + 1..k {
            s -= rcols[j][i] * y[j];
        }
        if rcols[i][i] == 0.0 {
            return Err(Error::SingularSystem(i));
        }
        y[i] = s / rcols[i][i];
    }
    Ok(y)
}

fn basis_defect(v: &[DVector<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..v.len() {
        for j in 0..=i {
            let d = v[i].dot(&v[j]) - if i == j { 1.0 } else { 0.0 };
            worst = worst.max(d.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests;
