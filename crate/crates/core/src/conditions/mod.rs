//! Superharmonic profiles on balanced intervals and numerical checks of the decay
//! conditions (D) and (K).

mod decay;
mod profile;
mod superharmonic;

pub use decay::{
    check_condition_d, check_condition_k, fit_line, sample_intervals, DecayFitReport, DecayOptions,
};
pub use profile::{
    find_balanced_j, phi_eval, phi_equation_residual, SuperharmonicProfile, TestFunction,
    WeakIdentityReport, BALANCE_TOL,
};
pub use superharmonic::{
    check_superharmonic, profile_grid, profile_scheme, SuperharmonicReport, SLACK,
};
