//! Differential calculus in the boundary coordinates `(r, s)` and the
//! algebra of the auxiliary functions used near a boundary point.
//!
//! Everything here works on raw point values; nothing touches grids.

pub mod aux;
pub mod ops;

pub use aux::{
    big_a, big_abar, big_b, check_params, eval_J, eval_Jbar, eval_Theta, eval_w_coefficients, profile_bound,
    q_for_gamma, sigma_max, theta_brackets, theta_terms, theta_upper_bound, AuxInputs, AuxParams, FeasibilityReport,
    LEstimates, WCoefficients,
};
pub use ops::{dot_flow, fd_flow_derivs, flow_from_cartesian, grad_flow, laplacian_flow, psi_r_decompose, FlowDerivs};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("(r, s) = ({r}, {s}) violates 1 - rK > 0 or r >= 0")]
    RegionViolation { r: f64, s: f64 },
    #[error("decomposition undefined at s = {s} (beta' too small)")]
    DecompositionUndefined { s: f64 },
    #[error("weight r^-gamma is singular at (r, s) = ({r}, {s})")]
    SingularWeight { r: f64, s: f64 },
    #[error("profile quotient undefined for s = {s} <= eta = {eta}")]
    ProfileUndefined { s: f64, eta: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
