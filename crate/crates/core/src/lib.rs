//! Multi-type Cannings population models.
//!
//! Exact backward transition matrices on block-labeled partitions, machine
//! checks of their structural laws, and the limiting multi-type coalescents.

pub mod ancestral;
pub mod cli;
pub mod error;
pub mod io;
pub mod laws;
pub mod limits;
pub mod model;
pub mod partition;
pub mod rational;
pub mod report;
pub mod tensor;

pub use error::{Error, Result};
pub use model::{CanningsModel, OffspringLaw};
pub use partition::LabeledPartition;
pub use rational::Rational;
pub use tensor::MergeTensor;
