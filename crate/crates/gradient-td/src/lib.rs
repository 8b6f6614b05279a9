//! Off-policy linear value learning with gradient corrections.
//!
//! This crate implements the gradient-TD family around TD with Regularized
//! Corrections: the prediction updates (TD, clipped TD, TDC, GTD2, HTD,
//! TDRC, TDC++), their control extensions (Q-learning, QC, QRC, and
//! actor-critic variants), exact MSPBE evaluation from finite-MDP
//! expectation matrices, the classic benchmark problems, an eigenvalue
//! analyzer for the stacked expected-update ODE, and a seeded, reproducible
//! experiment harness with a CLI front end.
//!
//! ```
//! use gradient_td::env::PredictionEnv;
//! use gradient_td::mdp::td_fixed_point;
//! use gradient_td::metrics::rmspbe;
//!
//! let env = PredictionEnv::by_name("randomwalk-tabular")?;
//! let fixed_point = td_fixed_point(&env.model)?;
//! assert!(rmspbe(&fixed_point.weights, &env.model) < 1e-8);
//! # Ok::<(), gradient_td::Error>(())
//! ```
//!
//! The narrative guide lives in `book/`; its chapters are compiled as doc
//! tests below so the examples stay correct.

pub mod agents;
pub mod env;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod metrics;
pub mod optim;
pub mod rng;
pub mod stability;

mod guide;

pub use error::{Error, Result};
