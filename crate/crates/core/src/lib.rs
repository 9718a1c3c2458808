//! Event-study estimation, pre-trend testing, and inference conditional on
//! passing the pre-test.

pub mod error;
pub mod estimators;
pub mod event_study;
pub mod gaussian;
pub mod pretest;
pub mod simulation;

pub use error::{Error, ErrorKind, Result};
pub use nalgebra;
