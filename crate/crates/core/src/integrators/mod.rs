//! Explicit Runge-Kutta integration with dense output, and the method of
//! steps for constant-delay systems built on it.

mod delay;
mod dense;
mod dopri;

pub use delay::{
    breaking_points, integrate_dde, integrate_dde_with, DdeOptions, DdeSolution, DelaySystem,
};
pub use dense::{sample, DenseSolution, IntegrationStats};
pub use dopri::{
    integrate_ode, integrate_ode_with, integrate_with_context, StepContext, StepOptions,
    Tolerances,
};
