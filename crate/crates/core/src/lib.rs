//! Regulatory rule formalization and compliance test generation.
//!
//! The crate turns natural-language regulatory rules into a checkable
//! IF-THEN requirement language, filters the result through executable
//! testability constraints, and generates concrete compliance test cases
//! via equivalence partitioning and boundary value analysis. Domain
//! knowledge (meta-model, symbol vocabulary and grammar, constraints) is
//! explicated from multiple model providers by consensus and carried as
//! explicit, serializable artifacts.

pub mod decimal;
pub mod gateway;
pub mod knowledge;
pub mod metrics;
pub mod testability;
pub mod testgen;
pub mod trl;
pub mod value;

pub use decimal::Decimal;
pub use value::{TimeOfDay, TimeRange, Value};
