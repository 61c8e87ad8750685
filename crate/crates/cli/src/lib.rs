//! Command-line driver library: run configuration, the JSON system and
//! report formats, verification and transport pipelines, and the parallel
//! classification scan over the sphere.

pub mod config;
pub mod jsonio;
pub mod pipeline;
pub mod scan;

pub use config::RunConfig;
pub use jsonio::{ClassificationReport, SystemDefinition, TransportReport};
pub use pipeline::{classify_generator, classify_point, transport, verify, VerifyReport};
pub use scan::{scan_sphere, ScanRow};
