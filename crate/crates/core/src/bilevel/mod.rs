//! Bilevel-to-MILP compilation: microgrid LPs, their KKT systems, big-M
//! complementarity, the strong-duality objective rewrite, and final assembly.

pub mod assemble;
pub mod duality;
pub mod kkt;
pub mod ll;

pub use assemble::{compile, CompiledModel, MgBlock, ScenarioBlock};
pub use duality::{strong_duality_expr, DualityObjectiveExpr};
pub use kkt::{derive_kkt, KktSystem, StationarityRow};
pub use ll::{build_ll_lp, LlFamily, LlSolution, LowerLevelLp};
