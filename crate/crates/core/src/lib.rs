//! Curvature of connections over finite-dimensional spectral triples.

pub mod check;
pub mod commands;
pub mod curvature;
pub mod fgp;
pub mod fixtures;
pub mod forms;
pub mod harness;
pub mod linalg;
pub mod random;
pub mod report;
pub mod scenario;
pub mod submersion;
pub mod triple;
