pub mod analytic;
#[cfg(feature = "cli")]
pub mod cli;
pub mod combinatorics;
pub mod engine;
pub mod error;
pub mod geom;
pub mod plane_measure;
pub mod verify;
