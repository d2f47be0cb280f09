pub mod amplitudes;
pub mod born;
pub mod cli;
pub mod config;
pub mod dynamics2d;
pub mod dynamics3d;
pub mod engine;
pub mod error;
pub mod grid;
pub mod io;
pub mod lab;
pub mod operator;
pub mod linalg;
pub mod potentials;
pub mod quadrature;

pub use error::{Error, Result};
pub use linalg::C64;
