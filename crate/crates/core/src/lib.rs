//! Detecting and demonstrating spurious correlations between time series.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod cli;
pub mod detrend;
pub mod dynreg;
pub mod error;
pub mod ingest;
pub mod series;
pub mod simgen;
pub mod tscore;

pub use error::{Error, Result};
pub use series::{Source, TimeSeries};

/// Book chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/kendall.md")]
    mod kendall {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/detrending.md")]
    mod detrending {}
    #[doc = include_str!("../../../book/src/dynreg.md")]
    mod dynreg {}
    #[doc = include_str!("../../../book/src/ingest.md")]
    mod ingest {}
    #[doc = include_str!("../../../book/src/audits.md")]
    mod audits {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
