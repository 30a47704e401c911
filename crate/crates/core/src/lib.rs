//! Spectral parameter power series (SPPS) solvers for Sturm-Liouville
//! problems, polynomial operator pencils and Zakharov-Shabat systems.

pub mod cli;
pub mod error;
pub mod poly;
pub mod powers;
pub mod problem;
pub mod quadrature;
pub mod series;
pub mod spectrum;

pub use error::{Error, Result};
