pub mod ansible;
pub mod dataset;
pub mod harness;
pub mod metrics;
pub mod schema;
pub mod yaml;
