//! Law-invariant risk measures on discrete and empirical laws, hedged risk
//! over compact strategy sets, and a Monte Carlo harness for the plug-in
//! estimation error of these quantities.
//!
//! Losses are positive: a larger outcome is a worse outcome.
// `!(a < b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]


pub mod dist;
pub mod error;
pub mod experiments;
pub mod hedge;
pub mod oracle;
pub mod risk;
pub mod rng;

pub use dist::{Discrete, Distribution, SampleVector};
pub use error::{Error, Result};
pub use hedge::{HedgeResult, ScenarioSet, StrategySet, Utility};
pub use risk::{LossFunction, RiskSpec};
