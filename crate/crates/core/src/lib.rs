//! Scheduling engine for a distribution company trading with microgrids.
//!
//! The operation problem is a bilevel program: the distribution company
//! (Disco) maximizes profit in the upper level, each microgrid minimizes its
//! operation cost in the lower level. The compiler replaces every lower-level
//! LP with its KKT conditions, linearizes complementarity with big-M
//! binaries, rewrites the bilinear price-times-exchange revenue term through
//! strong duality, and hands the resulting single-level MILP to an embedded
//! solver or to an external one through an LP-format file.

pub mod bilevel;
pub mod error;
pub mod flow;
pub mod milp;
pub mod model;
pub mod pwl;
pub mod report;
pub mod scenario;
pub mod synthetic;

pub use error::CoreError;
