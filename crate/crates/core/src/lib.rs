//! CMA-ES with two-point step-size adaptation.
//!
//! The optimizer samples `x_k = m + σ y_k`, `y_k ~ N(0, C)`, recombines the
//! best candidates into a new mean and then adapts σ by evaluating two test
//! points placed symmetrically about the new mean along the realized mean
//! shift. `C` is learned with a rank-one and a rank-μ update. Cumulative
//! step-size adaptation (CSA) is available as a baseline controller, and the
//! [`experiment`] module runs grids of benchmark comparisons.
//!
//! ```
//! use tpa_cmaes::engine::{run, RunConfig, TerminationCriteria};
//! use tpa_cmaes::objectives::sphere;
//!
//! let mut config = RunConfig::new(vec![3.0; 5], 2.0);
//! config.termination = TerminationCriteria::default().with_target(Some(1e-10));
//! let result = run(&config, &sphere).unwrap();
//! assert!(result.best_f < 1e-10);
//! ```

pub mod covariance;
pub mod engine;
pub mod experiment;
pub mod objectives;
pub mod params;
pub mod recombine;
pub mod sampler;
pub mod stepsize;

pub use engine::{
    run, run_with_restarts, Optimizer, RestartPolicy, RunConfig, RunRecord, RunResult, StepSizeMode,
    TerminationCriteria, TerminationReason,
};
pub use objectives::{Objective, ObjectiveKind, ObjectiveSpec};
pub use params::{ParamOverrides, StrategyParams};
