//! Numerical workbench for inverse potential scattering on cubic grids:
//! a Lippmann-Schwinger forward solver at real and complex wavenumber,
//! far-field data generation (backscattering and fixed-incident slices),
//! a numerical contraction certificate for the damped orthogonality
//! estimate, and a Born-plus-fixed-point inversion from backscattering
//! data.
//!
//! Start with the runnable examples (`cargo run --example forward_solve`,
//! `certificate`, `born_inversion`, ...); the `scatterbench` binary wraps
//! the same pipelines behind a config file.

pub mod certificate;
pub mod config;
pub mod container;
pub mod dataset;
pub mod datatools;
pub mod error;
pub mod farfield;
pub mod fft;
pub mod forward;
pub mod gmres;
pub mod grid;
pub mod inversion;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod runner;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
