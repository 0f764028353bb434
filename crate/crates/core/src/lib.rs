// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod cli;
pub mod dist;
pub mod error;
pub mod mc;
pub mod msd;
pub mod numerics;
pub mod report;
pub mod study;
pub mod tables;

pub use error::{MsdError, Result};
