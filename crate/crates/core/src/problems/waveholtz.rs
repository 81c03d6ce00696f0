use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::anderson::FixedPointProblem;
use crate::error::{check_len, Error, Result};
use crate::grid::{tridiag_solve, GeneralBandMatrix};

/// Wave-speed profiles on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveSpeed {
    /// Constant speed 1.
    Uniform,
    /// Smooth dip `1 - 0.55 exp(-144 (x - 1/2)^2)`.
    Gaussian,
    /// Slow layer of speed 0.3 on `|x - 1/2| < 1/8`.
    Layer,
}

impl WaveSpeed {
    pub fn at(self, x: f64) -> f64 {
        match self {
            WaveSpeed::Uniform => 1.0,
            WaveSpeed::Gaussian => 1.0 - 0.55 * (-144.0 * (x - 0.5).powi(2)).exp(),
            WaveSpeed::Layer => {
                if (x - 0.5).abs() < 0.125 {
                    0.3
                } else {
                    1.0
                }
            }
        }
    }
}

impl fmt::Display for WaveSpeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveSpeed::Uniform => "a",
            WaveSpeed::Gaussian => "b",
            WaveSpeed::Layer => "c",
        })
    }
}

impl FromStr for WaveSpeed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "uniform" => Ok(WaveSpeed::Uniform),
            "b" | "gaussian" => Ok(WaveSpeed::Gaussian),
            "c" | "layer" => Ok(WaveSpeed::Layer),
            other => Err(Error::InvalidParameter(format!("unknown wave speed '{other}'"))),
        }
    }
}

/// Squared speed of the 2D cross-shaped medium.
pub fn cross_medium(x: f64, y: f64) -> f64 {
    const TOL: f64 = 1e-12;
    let inside = |t: f64| (0.4 - TOL..=0.6 + TOL).contains(&t);
    if inside(x) || inside(y) {
        0.3
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Line,
    Square,
}

/// Variable-coefficient Dirichlet Laplacian with face-averaged coefficients.
#[derive(Debug, Clone)]
struct Stencil {
    domain: Domain,
    side: usize,
    inv_h2: f64,
    // face k of a line sits between grid nodes k and k+1 (walls are nodes 0 and side+1)
    ax: Vec<f64>,
    ay: Vec<f64>,
}

impl Stencil {
    fn dim(&self) -> usize {
        match self.domain {
            Domain::Line => self.side,
            Domain::Square => self.side * self.side,
        }
    }

    fn line(a: &[f64], w: &[f64], out: &mut [f64], stride: usize, inv_h2: f64) {
        let n = a.len() - 1;
        for i in 0..n {
            let c = w[i * stride];
            let l = if i > 0 { w[(i - 1) * stride] } else { 0.0 };
            let r = if i + 1 < n { w[(i + 1) * stride] } else { 0.0 };
            out[i * stride] += (a[i + 1] * (r - c) - a[i] * (c - l)) * inv_h2;
        }
    }

    fn apply_into(&self, w: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let s = self.side;
        match self.domain {
            Domain::Line => Self::line(&self.ax, w, out, 1, self.inv_h2),
            Domain::Square => {
                for iy in 0..s {
                    let row = iy * s;
                    Self::line(&self.ax[iy * (s + 1)..(iy + 1) * (s + 1)], &w[row..], &mut out[row..], 1, self.inv_h2);
                }
                for ix in 0..s {
                    Self::line(&self.ay[ix * (s + 1)..(ix + 1) * (s + 1)], &w[ix..], &mut out[ix..], s, self.inv_h2);
                }
            }
        }
    }

    fn apply(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(w.len());
        self.apply_into(w.as_slice(), out.as_mut_slice());
        out
    }

    /// `L + shift I` in band storage.
    fn shifted_band(&self, shift: f64) -> GeneralBandMatrix {
        let n = self.dim();
        let s = self.side;
        let bw = if self.domain == Domain::Line { 1 } else { s };
        let mut m = GeneralBandMatrix::zeros(n, bw, bw);
        let mut couple = |i: usize, j: Option<usize>, a: f64| {
            m.add_to(i, i, -a * self.inv_h2);
            if let Some(j) = j {
                m.add_to(i, j, a * self.inv_h2);
            }
        };
        match self.domain {
            Domain::Line => {
                for i in 0..s {
                    couple(i, i.checked_sub(1), self.ax[i]);
                    couple(i, (i + 1 < s).then_some(i + 1), self.ax[i + 1]);
                }
            }
            Domain::Square => {
                for iy in 0..s {
                    for ix in 0..s {
                        let i = iy * s + ix;
                        let fx = &self.ax[iy * (s + 1)..];
                        let fy = &self.ay[ix * (s + 1)..];
                        couple(i, (ix > 0).then(|| i - 1), fx[ix]);
                        couple(i, (ix + 1 < s).then(|| i + 1), fx[ix + 1]);
                        couple(i, (iy > 0).then(|| i - s), fy[iy]);
                        couple(i, (iy + 1 < s).then(|| i + s), fy[iy + 1]);
                    }
                }
            }
        }
        for i in 0..n {
            m.add_to(i, i, shift);
        }
        m
    }
}

/// Time-filtered wave solve over one period, `u -> (2/T) int_0^T (cos(w t) - 1/4) w(t) dt`,
/// with `w` the leapfrog solution started from `u` at rest and forced by `cos(w t) f`.
///
/// The unknowns are the interior grid values, lexicographic (`x` fastest) on the square.
#[derive(Debug, Clone)]
pub struct WaveHoltzProblem {
    stencil: Stencil,
    h: f64,
    omega: f64,
    period: f64,
    nt: usize,
    dt: f64,
    source: usize,
    forcing: DVector<f64>,
    dense_reference: bool,
    reference: OnceLock<Option<DVector<f64>>>,
}

impl WaveHoltzProblem {
    pub const LINE_POINTS: usize = 513;
    pub const LINE_SOURCE_NODE: usize = 128;
    pub const LINE_AMPLITUDE: f64 = 2.0;
    pub const SQUARE_POINTS: usize = 65;
    pub const SQUARE_OMEGA: f64 = 11.0;
    pub const SQUARE_SOURCE: (f64, f64) = (0.25, 0.75);
    pub const SQUARE_AMPLITUDE: f64 = 1.0;
    pub const DEFAULT_CFL: f64 = 0.5;

    pub fn line_omega() -> f64 {
        25.0 * SQRT_2
    }

    /// Default 1D experiment for the given speed profile.
    pub fn line_default(speed: WaveSpeed) -> Result<Self> {
        Self::line(Self::LINE_POINTS, Self::line_omega(), speed, Self::DEFAULT_CFL)
    }

    /// `n` unknowns at `x_j = j h`, `h = 1/(n+1)`, with the source at node 128
    /// (or the middle node when the grid is coarser).
    pub fn line(n: usize, omega: f64, speed: WaveSpeed, cfl: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!("need at least 2 unknowns, got {n}")));
        }
        let h = 1.0 / (n as f64 + 1.0);
        let c: Vec<f64> = (0..n + 2).map(|j| speed.at(j as f64 * h)).collect();
        let ax: Vec<f64> = c.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let cmax = c.iter().cloned().fold(0.0, f64::max);
        let node = if Self::LINE_SOURCE_NODE <= n { Self::LINE_SOURCE_NODE } else { n.div_ceil(2) };
        let stencil = Stencil { domain: Domain::Line, side: n, inv_h2: 1.0 / (h * h), ax, ay: Vec::new() };
        Self::assemble(stencil, h, omega, cmax, cfl, node - 1, Self::LINE_AMPLITUDE, true)
    }

    /// Default 2D experiment on the 65x65 grid.
    pub fn square_default() -> Result<Self> {
        Self::square(Self::SQUARE_POINTS, Self::SQUARE_OMEGA, Self::DEFAULT_CFL)
    }

    /// `points x points` grid on the unit square including the walls.
    pub fn square(points: usize, omega: f64, cfl: f64) -> Result<Self> {
        if points < 4 {
            return Err(Error::InvalidDimension(format!("need at least 4 points per side, got {points}")));
        }
        let s = points - 2;
        let h = 1.0 / (points - 1) as f64;
        let kappa = |gx: usize, gy: usize| cross_medium(gx as f64 * h, gy as f64 * h);
        let mut ax = Vec::with_capacity(s * (s + 1));
        for iy in 0..s {
            ax.extend((0..=s).map(|f| 0.5 * (kappa(f, iy + 1) + kappa(f + 1, iy + 1))));
        }
        let mut ay = Vec::with_capacity(s * (s + 1));
        for ix in 0..s {
            ay.extend((0..=s).map(|f| 0.5 * (kappa(ix + 1, f) + kappa(ix + 1, f + 1))));
        }
        let cmax = (0..points)
            .flat_map(|gx| (0..points).map(move |gy| (gx, gy)))
            .map(|(gx, gy)| kappa(gx, gy).sqrt())
            .fold(0.0, f64::max);
        let (sx, sy) = Self::SQUARE_SOURCE;
        let gx = ((sx / h).round() as usize).clamp(1, s);
        let gy = ((sy / h).round() as usize).clamp(1, s);
        let stencil = Stencil { domain: Domain::Square, side: s, inv_h2: 1.0 / (h * h), ax, ay };
        Self::assemble(stencil, h, omega, cmax, cfl, (gy - 1) * s + gx - 1, Self::SQUARE_AMPLITUDE, false)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        stencil: Stencil,
        h: f64,
        omega: f64,
        cmax: f64,
        cfl: f64,
        source: usize,
        amplitude: f64,
        dense_reference: bool,
    ) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        let cfl_max = match stencil.domain {
            Domain::Line => 1.0,
            Domain::Square => 1.0 / SQRT_2,
        };
        if !(cfl > 0.0 && cfl <= cfl_max) {
            return Err(Error::InvalidParameter(format!("CFL number must lie in (0, {cfl_max}], got {cfl}")));
        }
        let period = 2.0 * PI / omega;
        let mut nt = (period * cmax / (cfl * h)).ceil() as usize;
        nt += nt % 2;
        let n = stencil.dim();
        let mut p = Self {
            stencil,
            h,
            omega,
            period,
            nt,
            dt: period / nt as f64,
            source,
            forcing: DVector::zeros(n),
            dense_reference,
            reference: OnceLock::new(),
        };
        let mut unit = DVector::zeros(n);
        unit[source] = 1.0;
        let pilot = p.helmholtz_solve(&unit)?;
        let peak = pilot.amax();
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(Error::SingularSystem(source));
        }
        p.forcing = unit * (amplitude / peak);
        Ok(p)
    }

    /// Computes the dense reference solution on demand (off by default in 2D).
    pub fn with_dense_reference(mut self, enabled: bool) -> Self {
        self.dense_reference = enabled;
        self.reference = OnceLock::new();
        self
    }

    pub fn domain(&self) -> Domain {
        self.stencil.domain
    }

    /// Interior points per side.
    pub fn side(&self) -> usize {
        self.stencil.side
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn steps(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn source_index(&self) -> usize {
        self.source
    }

    pub fn forcing(&self) -> &DVector<f64> {
        &self.forcing
    }

    /// Initial iterate `u_0 = 0`.
    pub fn initial_guess(&self) -> DVector<f64> {
        DVector::zeros(self.stencil.dim())
    }

    /// Spatial operator `L` (negative semidefinite).
    pub fn laplacian(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.stencil.dim(), w.len())?;
        Ok(self.stencil.apply(w))
    }

    /// Direct solve of `(L + omega^2) u = f`.
    pub fn helmholtz_solve(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.stencil.dim(), f.len())?;
        let w2 = self.omega * self.omega;
        match self.stencil.domain {
            Domain::Line => {
                let s = &self.stencil;
                let off: Vec<f64> = s.ax[1..s.side].iter().map(|a| a * s.inv_h2).collect();
                let diag: Vec<f64> = (0..s.side).map(|i| w2 - (s.ax[i] + s.ax[i + 1]) * s.inv_h2).collect();
                tridiag_solve(&off, &diag, &off, f)
            }
            Domain::Square => self.stencil.shifted_band(w2).lu()?.solve(f),
        }
    }

    fn run(&self, u: &DVector<f64>, f: Option<&DVector<f64>>, mut observe: impl FnMut(&[f64], &[f64])) -> DVector<f64> {
        let n = u.len();
        let dt2 = self.dt * self.dt;
        let mut lw = vec![0.0; n];
        let mut prev = u.as_slice().to_vec();
        let mut cur = u.as_slice().to_vec();
        let mut acc = DVector::<f64>::zeros(n);
        let weight = |k: usize| {
            let w = (self.omega * k as f64 * self.dt).cos() - 0.25;
            if k == 0 || k == self.nt {
                0.5 * w
            } else {
                w
            }
        };
        self.stencil.apply_into(&cur, &mut lw);
        for i in 0..n {
            let fi = f.map_or(0.0, |f| f[i]);
            prev[i] = cur[i] + 0.5 * dt2 * (lw[i] - fi);
        }
        acc.axpy(weight(0), u, 0.0);
        for k in 0..self.nt {
            if k > 0 {
                self.stencil.apply_into(&cur, &mut lw);
            }
            let ct = (self.omega * k as f64 * self.dt).cos();
            for i in 0..n {
                let fi = f.map_or(0.0, |f| f[i]);
                prev[i] = 2.0 * cur[i] - prev[i] + dt2 * (lw[i] - ct * fi);
            }
            std::mem::swap(&mut prev, &mut cur);
            observe(&prev, &cur);
            let wk = weight(k + 1);
            for (a, c) in acc.iter_mut().zip(&cur) {
                *a += wk * c;
            }
        }
        acc * (2.0 * self.dt / self.period)
    }

    /// The linear part `G(u) - G(0)`.
    pub fn apply_linear(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.stencil.dim(), u.len())?;
        Ok(self.run(u, None, |_, _| {}))
    }

    /// Discrete wave energy `|w^{k+1} - w^k|^2 / dt^2 - <w^{k+1}, L w^k>` after each
    /// unforced step from rest at `u`.
    pub fn energy_history(&self, u: &DVector<f64>) -> Result<Vec<f64>> {
        check_len(self.stencil.dim(), u.len())?;
        let mut out = Vec::with_capacity(self.nt);
        let mut lw = vec![0.0; u.len()];
        let dt2 = self.dt * self.dt;
        self.run(u, None, |old, new| {
            self.stencil.apply_into(old, &mut lw);
            let kinetic: f64 = old.iter().zip(new).map(|(a, b)| (b - a) * (b - a)).sum::<f64>() / dt2;
            let potential: f64 = new.iter().zip(&lw).map(|(a, b)| a * b).sum();
            out.push(kinetic - potential);
        });
        Ok(out)
    }

    /// Exact transfer factor of the discrete filter for an eigenmode of `-L` with eigenvalue `mu`.
    pub fn discrete_beta(&self, mu: f64) -> f64 {
        let theta = (1.0 - 0.5 * self.dt * self.dt * mu).clamp(-1.0, 1.0).acos();
        let mut sum = 0.0;
        for k in 0..=self.nt {
            let w = (self.omega * k as f64 * self.dt).cos() - 0.25;
            let w = if k == 0 || k == self.nt { 0.5 * w } else { w };
            sum += w * (k as f64 * theta).cos();
        }
        sum * 2.0 * self.dt / self.period
    }

    /// Dense assembly of `A` and elimination of `(I - A) x = G(0)`.
    pub fn reference_solution(&self) -> Result<DVector<f64>> {
        let n = self.stencil.dim();
        let b = self.apply(&DVector::zeros(n))?;
        let mut m = DMatrix::<f64>::identity(n, n);
        let mut e = DVector::zeros(n);
        for j in 0..n {
            e[j] = 1.0;
            let col = self.run(&e, None, |_, _| {});
            e[j] = 0.0;
            m.column_mut(j).axpy(-1.0, &col, 1.0);
        }
        m.lu().solve(&b).ok_or(Error::SingularSystem(n))
    }
}

impl FixedPointProblem for WaveHoltzProblem {
    fn dim(&self) -> usize {
        self.stencil.dim()
    }

    fn h(&self) -> f64 {
        self.h
    }

    fn apply(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_len(self.stencil.dim(), u.len())?;
        Ok(self.run(u, Some(&self.forcing), |_, _| {}))
    }

    fn is_linear(&self) -> bool {
        true
    }

    fn exact_solution(&self) -> Option<DVector<f64>> {
        if !self.dense_reference {
            return None;
        }
        self.reference.get_or_init(|| self.reference_solution().ok()).clone()
    }
}
