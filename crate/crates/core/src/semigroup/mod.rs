//! `K_t = e^{-t(B+V)}` on a grid by Strang splitting against the exact Bessel kernel, a
//! Feynman–Kac Monte Carlo estimator, and the perturbation identity linking the two
//! semigroups.

mod feynman_kac;
mod perturbation;
mod splitting;

pub use feynman_kac::{feynman_kac, McEstimate, PATHS_PER_WORKER};
pub use perturbation::{perturbation_residual, PerturbationReport};
pub use splitting::{
    schrodinger_apply, schrodinger_kernel_column, theta_mass, Propagator, SplittingScheme,
};
