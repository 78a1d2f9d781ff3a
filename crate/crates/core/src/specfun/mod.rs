//! Special functions and quadrature behind every density in the crate.
//!
//! Densities are evaluated in log space throughout; the Bessel argument
//! `sqrt(lambda z)` reaches the hundreds at realistic channel parameters.

mod bessel;
mod chi2;
mod gamma;
mod quad;

pub use bessel::{asymptotic_threshold, bessel_i_scaled, ln_bessel_i, DEBYE_MIN_ORDER};
pub use chi2::{noncentral_chi2_cdf, noncentral_chi2_logpdf, noncentral_chi2_pdf};
pub use gamma::{log_binomial, log_gamma, normal_cdf, normal_sf};
pub use quad::{integrate, try_integrate, QuadratureResult, ABS_FLOOR, MAX_DEPTH};

pub(crate) use chi2::{ncx2_cdf, ncx2_logpdf};
