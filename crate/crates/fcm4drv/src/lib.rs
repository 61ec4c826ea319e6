pub mod activation;
pub mod aggregate;
pub mod cli;
pub mod drv;
pub mod engine;
pub mod error;
pub mod format;
pub mod oracle;
pub mod report;

pub use activation::{ActivationKind, ActivationSpec};
pub use aggregate::{AggregatorKind, AggregatorSpec};
pub use drv::{DistanceMetric, Drv};
pub use engine::{FcmModel, ReasoningTrace};
