//! Dynamic regression: regression with ARIMA errors fitted by exact maximum
//! likelihood, KPSS-driven differencing, and stepwise AICc order selection.

mod arma;
mod auto;
mod fit;
mod kpss;
pub mod optim;

pub use arma::{
    ar_to_unconstrained, arma_loglik, coefficients_to_partials, difference, filter_columns,
    is_invertible, is_stationary, ma_to_unconstrained, min_root_modulus, pacf_to_ar,
    partials_to_coefficients, unconstrained_to_ma, ArimaOrder, ArmaStateSpace, Innovations, MAX_D,
    MAX_P, MAX_Q,
};
pub use auto::{auto_arima, auto_arima_with, choose_d, AutoArima, AutoArimaOptions, TraceEntry};
pub use fit::{
    aicc, coef_test, fit_arima, fit_arima_with, normal_two_sided, ArimaFit, CoefTest, FitOptions,
    Regressors, StdErrorSource,
};
pub use kpss::{kpss_lags, kpss_stat, kpss_test, KpssResult, KpssTrend};
