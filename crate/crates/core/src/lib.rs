//! Exact decision procedures for partition regularity of rational matrices.

pub mod columns;
pub mod decide;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod json;
pub mod linalg;
pub mod oracle;
pub mod partition;
pub mod rational;
pub mod search;

pub use error::{Error, Result};
pub use linalg::{QMatrix, QVector};
pub use rational::Rational;
