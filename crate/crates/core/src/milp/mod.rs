//! Canonical LP/MILP form, embedded simplex + branch-and-bound, and the
//! LP-file export / solution-file import surface for external solvers.

pub mod branch_bound;
pub mod lp_file;
pub mod model;
pub mod simplex;
pub mod solution;

pub use branch_bound::{solve_milp, MilpOptions};
pub use lp_file::{export_model, import_solution, import_solution_str, write_lp_string};
pub use model::{ColId, Column, MilpModel, ObjSense, Row, RowId, Sense};
pub use simplex::{solve_lp, solve_lp_with_bounds};
pub use solution::{SolveStats, SolveStatus, Solution};
