//! Simulator and experiment harness for the iterated Battle of the Exes game
//! played by independent tabular Q-learners with inequity-averse utilities.

pub mod agent;
pub mod env;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod social;

pub use error::{Error, Result};
