use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{bound_c, check_interval};
use crate::error::{check_len, Error, Result};
use crate::grid::{random_orthogonal, SpectralOperator};
use crate::norms::NormKind;
use crate::problems::AffineProblem;

// Separate streams keep a shared seed from correlating W, lambda and e_0.
const PLACEMENT_STREAM: u64 = 1;
const ERROR_STREAM: u64 = 2;

/// Where the eigenvalues sit inside `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Both endpoints included.
    Equispaced,
    /// Chebyshev points of the first kind mapped to `[a, b]`.
    Chebyshev,
    /// Uniform samples.
    Random(u64),
}

/// The orthonormal eigenbasis `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Identity,
    RandomOrthogonal(u64),
    /// Eigenvectors of the half-sample Neumann Laplacian, shared with the
    /// `H^{-s}` weights.
    CosineModes,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialError {
    Ones,
    /// Standard normal entries.
    Random(u64),
    Given(DVector<f64>),
}

/// A symmetric linear map `A = W diag(lambda) W^T` with spectrum in `[a, b]`
/// and an initial error `e_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub placement: Placement,
    pub basis: Basis,
    pub e0: InitialError,
    /// Grid spacing attached to the problem, `1/n` by default.
    pub h: f64,
}

impl SpectrumSpec {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("spectrum needs n >= 1".into()));
        }
        check_interval(a, b)?;
        Ok(Self {
            n,
            a,
            b,
            placement: Placement::Random(0),
            basis: Basis::RandomOrthogonal(0),
            e0: InitialError::Random(0),
            h: 1.0 / n as f64,
        })
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    pub fn with_basis(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_initial_error(mut self, e0: InitialError) -> Self {
        self.e0 = e0;
        self
    }

    /// Shifts every seed by `t`.
    pub fn with_trial(&self, t: u64) -> Self {
        let mut s = self.clone();
        if let Placement::Random(seed) = s.placement {
            s.placement = Placement::Random(seed.wrapping_add(t));
        }
        if let Basis::RandomOrthogonal(seed) = s.basis {
            s.basis = Basis::RandomOrthogonal(seed.wrapping_add(t));
        }
        if let InitialError::Random(seed) = s.e0 {
            s.e0 = InitialError::Random(seed.wrapping_add(t));
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        check_interval(self.a, self.b)?;
        if let InitialError::Given(e) = &self.e0 {
            check_len(self.n, e.len())?;
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        let (n, a, b) = (self.n, self.a, self.b);
        match self.placement {
            Placement::Equispaced if n == 1 => DVector::from_element(1, 0.5 * (a + b)),
            Placement::Equispaced => DVector::from_fn(n, |i, _| a + (b - a) * i as f64 / (n - 1) as f64),
            Placement::Chebyshev => DVector::from_fn(n, |i, _| {
                0.5 * (a + b) + 0.5 * (b - a) * ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos()
            }),
            Placement::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(PLACEMENT_STREAM);
                DVector::from_fn(n, |_, _| rng.random_range(a..=b))
            }
        }
    }

    pub fn basis_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        match self.basis {
            Basis::Identity => DMatrix::identity(n, n),
            Basis::RandomOrthogonal(seed) => random_orthogonal(n, seed),
            Basis::CosineModes => DMatrix::from_fn(n, n, |i, j| {
                let scale = if j == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
                scale * (PI * j as f64 * (i as f64 + 0.5) / n as f64).cos()
            }),
        }
    }

    pub fn operator(&self) -> Result<SpectralOperator> {
        SpectralOperator::new(self.basis_matrix(), self.eigenvalues())
    }

    /// `e_0` in the original coordinates.
    pub fn initial_error(&self) -> DVector<f64> {
        match &self.e0 {
            InitialError::Ones => DVector::from_element(self.n, 1.0),
            InitialError::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(ERROR_STREAM);
                DVector::from_fn(self.n, |_, _| rng.sample(StandardNormal))
            }
            InitialError::Given(e) => e.clone(),
        }
    }

    /// `G(x) = A x`, whose fixed point is zero, so `x_0 = e_0`.
    pub fn problem(&self) -> Result<AffineProblem> {
        self.validate()?;
        AffineProblem::new(self.operator()?.to_dense(), DVector::zeros(self.n), self.h)
    }
}

/// Diagonal `Sigma` with `W Sigma^2 W^T = h W_s^{-1}` for the cosine basis,
/// i.e. the eigenvalues of the `H^{-s}` metric in that basis.
pub fn sigma_for_norm(kind: NormKind, n: usize, h: f64) -> DVector<f64> {
    DVector::from_fn(n, |j, _| {
        let mu = 4.0 / (h * h) * (PI * j as f64 / (2 * n) as f64).sin().powi(2);
        let w: f64 = (0..=kind.order()).map(|r| mu.powi(r as i32)).sum();
        (h / w).sqrt()
    })
}

/// Measured and predicted contraction for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub trial: u64,
    pub k: usize,
    pub m: usize,
    /// `||Sigma D^{-1} W^T e_{k+1}|| / max(Sigma) / ||D^{-1} W^T A e_k||`.
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

struct Projection {
    lambda: DVector<f64>,
    /// `(Lambda - I) W^T e_k`.
    v: DVector<f64>,
    /// `v` minus its weighted projection on the Krylov space.
    r: DVector<f64>,
}

fn check_sigma(n: usize, sigma: Option<&DVector<f64>>) -> Result<()> {
    if let Some(s) = sigma {
        check_len(n, s.len())?;
        if s.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidParameter("Sigma must be positive".into()));
        }
    }
    Ok(())
}

fn project(spec: &SpectrumSpec, k: usize, m: usize, sigma: Option<&DVector<f64>>) -> Result<Projection> {
    if m < 1 || k < m {
        return Err(Error::InvalidParameter(format!("one-step error needs k >= m >= 1, got k={k}, m={m}")));
    }
    spec.validate()?;
    check_sigma(spec.n, sigma)?;
    let n = spec.n;
    let lambda = spec.eigenvalues();
    let w = spec.basis_matrix();
    let e0 = w.transpose() * spec.initial_error();
    let ek = DVector::from_fn(n, |i, _| lambda[i].powi(k as i32) * e0[i]);
    let v = DVector::from_fn(n, |i, _| (lambda[i] - 1.0) * ek[i]);
    let u = DVector::from_fn(n, |i, _| (lambda[i] - 1.0).powi(2) * lambda[i].powi((k - m) as i32) * e0[i]);
    let sig = sigma.cloned().unwrap_or_else(|| DVector::from_element(n, 1.0));
    // Sigma K_m(Lambda, u) = K_m(Lambda, Sigma u) since both are diagonal.
    let q = arnoldi_diagonal(&lambda, &u.component_mul(&sig), m)?;
    let mut r = v.component_mul(&sig);
    for _ in 0..2 {
        for qj in &q {
            let c = qj.dot(&r);
            r.axpy(-c, qj, 1.0);
        }
    }
    let r = r.component_div(&sig);
    Ok(Projection { lambda, v, r })
}

/// Orthonormal basis of `K_m(diag(lambda), u)` by Arnoldi with full
/// reorthogonalization.
fn arnoldi_diagonal(lambda: &DVector<f64>, u: &DVector<f64>, m: usize) -> Result<Vec<DVector<f64>>> {
    let un = u.norm();
    if !(un > 0.0 && un.is_finite()) {
        return Err(Error::DegenerateKrylov(0));
    }
    let mut q = vec![u / un];
    while q.len() < m {
        let mut w = q.last().unwrap().component_mul(lambda);
        let before = w.norm();
        for _ in 0..2 {
            for qj in &q {
                let c = qj.dot(&w);
                w.axpy(-c, qj, 1.0);
            }
        }
        let after = w.norm();
        if !(after > 1e-13 * before) {
            return Err(Error::DegenerateKrylov(q.len()));
        }
        q.push(w / after);
    }
    Ok(q)
}

/// `e_{k+1} = W D_mu (I - Pi) D_mu^{-1} W^T A e_k` with `D_mu = Lambda (Lambda - I)^{-1}`
/// and `Pi` the projection on `K_m(Lambda, (Lambda - I)^2 Lambda^{k-m} W^T e_0)`,
/// orthogonal in the `Sigma^2` inner product when `sigma` is given.
pub fn predicted_one_step_error(
    spec: &SpectrumSpec,
    k: usize,
    m: usize,
    sigma: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    let p = project(spec, k, m, sigma)?;
    let scaled = DVector::from_fn(spec.n, |i, _| p.lambda[i] / (p.lambda[i] - 1.0) * p.r[i]);
    Ok(spec.basis_matrix() * scaled)
}

/// Evaluates the one-step contraction against `C(a, b, m)` over seeded trials
/// (`spec.with_trial(t)` for `t < trials`).
pub fn verify_one_step_bound(
    spec: &SpectrumSpec,
    k: usize,
    m: usize,
    trials: u64,
    sigma: Option<&DVector<f64>>,
) -> Result<Vec<BoundReport>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let bound = bound_c(spec.a, spec.b, m as u32)?;
    let smax = sigma.map_or(1.0, |s| s.max());
    (0..trials)
        .map(|t| {
            let s = spec.with_trial(t);
            let p = project(&s, k, m, sigma)?;
            let left = match sigma {
                Some(sig) => p.r.component_mul(sig).norm() / smax,
                None => p.r.norm(),
            };
            let ratio = left / p.v.norm();
            Ok(BoundReport { trial: t, k, m, ratio, bound, pass: ratio <= bound * (1.0 + 1e-10) })
        })
        .collect()
}
