//! Executable experiments: decay fits, Barenblatt tracking and property
//! suites, each producing a [`Report`].

mod config;
mod experiments;
mod fit;
mod report;
mod rng;
mod suites;

pub use config::{
    ExperimentConfig, ExperimentSection, GridConfig, InitialDatum, OperatorConfig, PerturbationConfig, PhiConfig,
    Suite, TimeConfig,
};
pub use experiments::{barenblatt_comparison, barenblatt_error, initial_datum, predicted_alpha, run_decay_experiment};
pub use fit::{fit_power_law, fit_power_law_series, DecayFit, FIT_SAMPLES, MIN_POINTS};
pub use report::{merge_reports, number, Report};
pub use rng::{job_rng, random_field, random_nonnegative_field, BumpField};
pub use suites::{
    conservation_suite, contraction_suite, convergence_study, default_gn_params, gn_suite, order_suite, run_suite,
    CONTRACTION_SLACK, MASS_DRIFT, MONOTONE_SLACK, ORDER_SLACK,
};

use crate::exponents::ExponentError;
use crate::measure::MeasureError;
use crate::operators::OperatorError;
use crate::resolvent::ResolventError;
use crate::semigroup::SemigroupError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),
    #[error("norm vanished at t = {time}; only {points} usable points remain before extinction")]
    Extinction { time: f64, points: usize },
    #[error("Barenblatt support radius {radius} exceeds the usable half-width {limit}")]
    SupportOverflow { radius: f64, limit: f64 },
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
}
