use nalgebra::DVector;
use num_complex::Complex64;

use crate::anderson::FixedPointProblem;
use crate::error::{check_len, Error, Result};
use crate::grid::tridiag_solve;

/// Kerr coefficient of the layered medium.
pub fn kerr_profile(x: f64) -> f64 {
    const TOL: f64 = 1e-12;
    if x <= 0.1 + TOL {
        0.0
    } else if x <= 0.2 + TOL {
        1.0
    } else if x <= 0.3 + TOL {
        2.0
    } else if x <= 0.7 + TOL {
        3.0
    } else {
        4.0
    }
}

/// `u'' + k0^2 (1 + eps |u|^2) u = 0` on `[0, 1]` with
/// `u'(0) + i k0 u(0) = 2 i k0` and `u'(1) - i k0 u(1) = 0`.
///
/// One application of the map freezes `|u|^2` at the current iterate and
/// solves the resulting linear problem. Boundary rows eliminate ghost points
/// with central differences.
#[derive(Debug, Clone)]
pub struct NonlinearHelmholtzProblem {
    k0: f64,
    h: f64,
    eps: DVector<f64>,
}

impl NonlinearHelmholtzProblem {
    pub const SPACING: f64 = 0.002;

    /// The layered medium on a grid of spacing 0.002 (501 points).
    pub fn new(k0: f64) -> Result<Self> {
        let n = (1.0 / Self::SPACING).round() as usize + 1;
        let h = 1.0 / (n - 1) as f64;
        let eps = DVector::from_fn(n, |j, _| kerr_profile(j as f64 * h));
        Self::with_epsilon(k0, eps)
    }

    /// Custom samples of the Kerr coefficient at `x_j = j / (len - 1)`.
    pub fn with_epsilon(k0: f64, eps: DVector<f64>) -> Result<Self> {
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::InvalidParameter(format!("k0 must be positive, got {k0}")));
        }
        if eps.len() < 3 {
            return Err(Error::InvalidDimension(format!("need at least 3 grid points, got {}", eps.len())));
        }
        if eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("Kerr coefficients must be finite".into()));
        }
        let h = 1.0 / (eps.len() - 1) as f64;
        Ok(Self { k0, h, eps })
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn epsilon(&self) -> &DVector<f64> {
        &self.eps
    }

    pub fn nodes(&self) -> DVector<f64> {
        DVector::from_fn(self.eps.len(), |j, _| j as f64 * self.h)
    }

    /// `u_0 = exp(i k0 x)`.
    pub fn initial_guess(&self) -> DVector<Complex64> {
        self.nodes().map(|x| Complex64::from_polar(1.0, self.k0 * x))
    }
}

impl FixedPointProblem<Complex64> for NonlinearHelmholtzProblem {
    fn dim(&self) -> usize {
        self.eps.len()
    }

    fn h(&self) -> f64 {
        self.h
    }

    fn apply(&self, u: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let n = self.dim();
        check_len(n, u.len())?;
        let (h, k0) = (self.h, self.k0);
        let ihk = Complex64::new(0.0, h * k0);
        let mut diag: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from(-2.0 + h * h * k0 * k0 * (1.0 + self.eps[j] * u[j].norm_sqr())))
            .collect();
        let one = Complex64::from(1.0);
        let lower = vec![one; n - 1];
        let upper = vec![one; n - 1];
        diag[0] = diag[0] / 2.0 + ihk;
        diag[n - 1] = diag[n - 1] / 2.0 + ihk;
        let mut rhs = DVector::zeros(n);
        rhs[0] = 2.0 * ihk;
        tridiag_solve(&lower, &diag, &upper, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anderson::{aa_run, picard_run, AAConfig};

    #[test]
    fn profile_table() {
        let got: Vec<f64> = [0.05, 0.15, 0.25, 0.5, 0.8].iter().map(|&x| kerr_profile(x)).collect();
        assert_eq!(got, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(kerr_profile(0.1), 0.0);
        assert_eq!(kerr_profile(0.7), 3.0);
        let p = NonlinearHelmholtzProblem::new(20.0).unwrap();
        assert_eq!(p.dim(), 501);
        assert!((p.h() - 0.002).abs() < 1e-15);
        assert_eq!(p.epsilon()[50], 0.0);
        assert_eq!(p.epsilon()[51], 1.0);
        assert_eq!(p.epsilon()[350], 3.0);
        assert_eq!(p.epsilon()[351], 4.0);
    }

    #[test]
    fn initial_guess_unit_modulus() {
        let p = NonlinearHelmholtzProblem::new(20.0).unwrap();
        let u0 = p.initial_guess();
        assert!(u0.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        assert!((u0[250] - Complex64::from_polar(1.0, 10.0)).norm() < 1e-14);
    }

    #[test]
    fn linear_medium_one_step() {
        let p = NonlinearHelmholtzProblem::with_epsilon(20.0, DVector::zeros(501)).unwrap();
        let u1 = p.apply(&p.initial_guess()).unwrap();
        let u2 = p.apply(&u1).unwrap();
        assert!((&u2 - &u1).norm() < 1e-12 * u1.norm());
        // the continuous solution is the incoming plane wave
        let err = (&u1 - p.initial_guess()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn discrete_equations_hold() {
        let p = NonlinearHelmholtzProblem::new(20.0).unwrap();
        let u = p.initial_guess();
        let v = p.apply(&u).unwrap();
        let (h, k) = (p.h(), p.k0());
        let i = Complex64::i();
        for j in 1..500 {
            let coef = k * k * (1.0 + p.epsilon()[j] * u[j].norm_sqr());
            let r = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h) + coef * v[j];
            assert!(r.norm() < 1e-8 * k * k, "row {j}: {r}");
        }
        // ghost-point elimination equals central Robin closure
        let ghost_left = v[1] + 2.0 * h * i * k * v[0] - 4.0 * h * i * k;
        let coef0 = k * k * (1.0 + p.epsilon()[0] * u[0].norm_sqr());
        let r0 = (v[1] - 2.0 * v[0] + ghost_left) / (h * h) + coef0 * v[0];
        assert!(r0.norm() < 1e-7 * k * k);
        let ghost_right = v[499] + 2.0 * h * i * k * v[500];
        let coefn = k * k * (1.0 + p.epsilon()[500] * u[500].norm_sqr());
        let rn = (ghost_right - 2.0 * v[500] + v[499]) / (h * h) + coefn * v[500];
        assert!(rn.norm() < 1e-7 * k * k);
    }

    #[test]
    fn picard_does_not_converge() {
        let p = NonlinearHelmholtzProblem::new(20.0).unwrap();
        let cfg = AAConfig::new(0).with_max_iters(100);
        let (rec, _) = picard_run(&p, &p.initial_guess(), &cfg).unwrap();
        let r0 = rec.rows[0].res_l2;
        assert!(!rec.converged());
        assert!(rec.rows.iter().all(|r| r.res_l2 > 0.1 * r0));
    }

    #[test]
    fn weak_medium_accelerated() {
        let base = NonlinearHelmholtzProblem::new(20.0).unwrap();
        let p = NonlinearHelmholtzProblem::with_epsilon(20.0, base.epsilon() * 0.1).unwrap();
        let cfg = AAConfig::new(1).with_max_iters(100).with_tol(1e-10);
        let (rec, u) = aa_run(&p, &cfg, &p.initial_guess()).unwrap();
        assert!(rec.converged());
        assert!((p.apply(&u).unwrap() - &u).norm() < 1e-8);
    }

    #[test]
    fn rejects_bad_wavenumber() {
        assert!(NonlinearHelmholtzProblem::new(0.0).is_err());
        assert!(NonlinearHelmholtzProblem::new(f64::NAN).is_err());
    }
}
