//! Simulation and crossing-count estimation for piecewise smooth stochastic
//! processes.
//!
//! A piecewise smooth process follows a deterministic flow between the jump
//! times of a marked point process; a discrete mode selects the active vector
//! field. This crate simulates such processes exactly at the event level,
//! discretizes them onto regular observation grids, and estimates the average
//! number of continuous crossings of a level (1D) or an oriented segment or
//! polyline (2D) three ways: Monte Carlo counting on the grid, kernel plug-in
//! crossing-rate integrals, and exact event-level counting as a reference.
//! A GPS module applies the same machinery to trajectory data given as
//! timestamped position/speed/heading records.

// Parameter guards are written `!(x > 0.0)` so that NaN fails into the
// error branch; the comparison the lint suggests would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crossing_count;
pub mod density_estimation;
pub mod error;
pub mod estimators;
pub mod geom;
pub mod gps_pipeline;
pub mod psp_sim;
pub mod rng;
pub mod surfaces;

pub use error::{Error, Result};
