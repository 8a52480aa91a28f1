//! Rank-correlation statistics: Kendall's tau-b, the trend and lag-1
//! diagnostics built on it, and batch aggregation.

mod diagnostics;
mod kendall;

pub use diagnostics::{
    diagnose, lag1_dependence, lag_pairs, median, rate_of, significance_rate,
    summarize_diagnostics, trend_correlation, DiagnosticSummary, SeriesDiagnostics,
};
pub use kendall::{
    kendall_tau, kendall_tau_with, KendallOptions, KendallResult, PValueMethod,
    DEFAULT_EXACT_CUTOFF, MAX_EXACT_CUTOFF,
};
