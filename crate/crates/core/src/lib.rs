//! Combined storage-assignment and order-picking optimization for mezzanine
//! warehouses.
//!
//! The crate bundles:
//!
//! * [`warehouse`] — the immutable domain model (layout, racks, compartments,
//!   products, orders, association rules) with geometry and hard-constraint
//!   validation,
//! * [`moo`] — generic multi-objective machinery (dominance, non-dominated
//!   sorting, crowding distance, Pareto fronts, quality indicators),
//! * [`storage`] — the 3-phase storage-assignment pipeline around a
//!   domain-specific NSGA-II, plus three baseline policies,
//! * [`pick`] — market-graph construction and ant-colony pick-route search
//!   in two variants, plus a modified S-Shape baseline,
//! * [`instance`] — seeded synthetic generation of benchmark warehouses,
//!   assortments, correlations and customer orders,
//! * [`experiment`] — the benchmark harness running evaluation settings over
//!   a work pool and writing CSV result tables.

pub mod error;
pub mod experiment;
pub mod instance;
pub mod moo;
pub mod pick;
pub mod rng;
pub mod storage;
pub mod warehouse;

pub use error::{Error, Result};
