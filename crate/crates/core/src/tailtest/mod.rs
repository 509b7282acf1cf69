//! Screening for asymptotic independence before estimation.

pub mod gev;
pub mod tqcc;

pub use gev::{fit_gev, Gev, GevFit};
pub use tqcc::{
    frechet_margin, tqcc, tqcc_pvalue, tqcc_statistic, tqcc_threshold, IndependenceTestResult,
    MarginTransform, TqccStatistic, DEFAULT_NULL_REPS,
};
