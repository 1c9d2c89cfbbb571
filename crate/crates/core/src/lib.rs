//! Two-layer hierarchical coded caching: byte-level placement and delivery
//! simulation, closed-form memory/rate analytics, and baseline rate
//! calculators, all in exact rational arithmetic.

pub mod analytics;
pub mod baselines;
pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod hier;
pub mod model;
pub mod single;
pub mod span;
pub mod verify;

pub use error::{Error, Result};
pub use exact::Q;
pub use model::{ChunkId, CodedSymbol, DemandProfile, FilePartition, HierConfig, Library};
