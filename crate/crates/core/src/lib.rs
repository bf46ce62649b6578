//! Bio-inspired gene selection and deep softmax classification for
//! microarray-style data.
//!
//! The crate is organized by stage:
//!
//! - [`data`]: datasets, CSV loading, normalization, splits and feature masks.
//! - [`metaheuristics`]: firefly and elephant search over binary feature masks.
//! - [`fitness`]: objectives that score a mask (merit, wrapper, weighted mix).
//! - [`neural`]: a feedforward softmax network with four gradient updaters.
//! - [`pipeline`]: select → train → evaluate, synthetic data and batch reports.
//! - [`config`]: the flat `section.key = value` configuration surface.

pub mod config;
pub mod data;
pub mod error;
pub mod fitness;
pub mod metaheuristics;
pub mod neural;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result, Stage};
