//! Estimation of the tail Gini functional at extreme levels when the loss
//! and the systemic variable are asymptotically independent.
//!
//! The estimator is computed nonparametrically at an intermediate tail
//! fraction `k/n` and extrapolated to the extreme level `p` with the power
//! `(k/(n p))^(1 - 1/eta + gamma1)`, where `gamma1` is the extreme value
//! index of the loss and `eta` the coefficient of tail dependence.
//!
//! ```
//! use tailgini::{fit_tail_gini, SimModel, RngStream, TailConfig, TailFractions};
//!
//! let model = SimModel::model1(0.35, 0.3).unwrap();
//! let sample = model.sample_stream(5000, RngStream::new(1, 0)).unwrap();
//! let config = TailConfig::from_fractions(5000, TailFractions::default(), 0.01).unwrap();
//! let fit = fit_tail_gini(&sample, config).unwrap();
//! assert!(fit.theta_extreme > 0.0);
//! ```

pub mod config;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod ingest;
pub mod io;
pub mod quad;
pub mod sample;
pub mod simulation;
pub mod tailtest;

pub use config::{parse_model, RunConfig};
pub use error::{Error, Result};
pub use estimators::{
    eta_hat, fit_tail_gini, hill_gamma1, phi0_constant, tg_extreme, tg_hw_baseline, tg_intermediate,
    TailConfig, TailFractions, TailGiniFit,
};
pub use experiments::{run_replications, ExperimentResult, ExperimentSpec, Method, SweepGrid, TrueValues};
pub use ingest::{align, summary_stats, weekly_losses, LossSeries, PriceSeries};
pub use sample::{empirical_cdf_value, order_statistics, tg_bruteforce, PairedSample};
pub use simulation::{preset_by_name, true_tg_oracle, ModelKind, RngStream, SimModel, PRESETS};
pub use tailtest::{tqcc_pvalue, IndependenceTestResult};
