//! Domain model and dataset ingestion.

pub mod dataset;
pub mod types;
pub mod validate;

pub use dataset::{load_case, load_config};
pub use types::{
    Bus, CaseConfig, CaseInput, DgUnit, DiscoDg, Line, MarketData, Microgrid, NetworkModel,
    PvUnit, SolverMode, StorageUnit,
};
pub use validate::{validate_case, validate_radial};
