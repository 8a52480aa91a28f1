//! The residualization method: OLS on time plus covariates, residual
//! extraction, residual-on-residual Kendall correlation, and a loess smoother
//! for inspecting what the linear fit leaves behind.

mod loess;
mod ols;
mod residual;

pub use loess::{loess_smooth, DEFAULT_SPAN};
pub use ols::{ols_fit, Design, OlsFit};
pub use residual::{
    residual_correlation, residual_correlation_with, residualize, residualize_on, time_design,
    ResidualSeries,
};
