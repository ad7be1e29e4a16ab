//! Dynamics, tracking control and simulation of a four-wheel skid-steering robot.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod plot;
pub mod poly;
pub mod reduced;
pub mod report;
pub mod sim;
pub mod trajectory;
pub mod tuning;
