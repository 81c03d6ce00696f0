//! Fixed-point problems.

mod affine;
mod helmholtz;
mod poisson;
mod waveholtz;

pub use affine::AffineProblem;
pub use helmholtz::{kerr_profile, NonlinearHelmholtzProblem};
pub use poisson::{PoissonProblem, PoissonVariant};
pub use waveholtz::{cross_medium, Domain, WaveHoltzProblem, WaveSpeed};
