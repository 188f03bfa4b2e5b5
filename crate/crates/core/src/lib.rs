//! Linear index coding over small finite fields: exact minimum transmission
//! counts, clique-cover heuristics, coding-gain bounds, hardness reductions
//! and seeded random experiments.

pub mod bounds;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod field;
pub mod graph;
pub mod heuristic;
pub mod instance;
pub mod linalg;
pub mod reductions;
pub mod rng;

pub use error::{Error, Result};
pub use exact::{opt_multi, opt_q, verify_solution, SolveOptions, SolveResult, Status, Strategy};
pub use field::{Elem, Field};
pub use graph::Graph;
pub use instance::{Client, HasSpec, Instance};
pub use linalg::MatrixQ;
