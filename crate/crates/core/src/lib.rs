pub mod error;
pub mod eval;
pub mod fixtures;
pub mod formats;
pub mod memory;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod reconcile;
pub mod schema;
pub mod stub;
pub mod text;

pub type MetricReport = eval::MetricReport<f64>;
pub type ExactMetricReport = eval::MetricReport<num_rational::Rational64>;
