//! Model-agnostic residual diagnostics.

pub mod auditor_data;
pub mod curves;
pub mod data;
pub mod error;
pub mod influence;
pub mod models;
pub mod multimodel;
pub mod numerics;
pub mod scores;
mod serde_float;

pub use error::{AuditError, Result};
