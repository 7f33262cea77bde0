//! Exports for inspection and the run-record replay check.

pub mod dot;
pub mod graphml;
pub mod replay;

pub use dot::export_dot;
pub use graphml::export_graphml;
pub use replay::replay;
