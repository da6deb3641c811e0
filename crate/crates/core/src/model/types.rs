//! Domain data model: network, DERs, microgrids, market data, case config.

use std::collections::HashMap;

use crate::error::CoreError;

/// One distribution-network bus. Voltages are in kV, loads in MW.
#[derive(Debug, Clone)]
pub struct Bus {
    pub id: usize,
    pub v_min: f64,
    pub v_max: f64,
    /// Forecast load per hour, before scenario scaling.
    pub base_load_profile: Vec<f64>,
    pub has_mg: bool,
    pub has_dg: bool,
    pub has_pv: bool,
}

/// Radial feeder segment. R and Z in ohm, current limit in kA.
#[derive(Debug, Clone)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub resistance_r: f64,
    pub impedance_z: f64,
    pub current_max: f64,
}

/// Dispatchable generator (owned by the Disco or by a microgrid).
#[derive(Debug, Clone)]
pub struct DgUnit {
    pub name: String,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub p_initial: f64,
    pub bid: f64,
}

impl DgUnit {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(0.0 <= self.p_min && self.p_min <= self.p_max) {
            return Err(CoreError::Validation(format!(
                "DG {}: requires 0 <= p_min <= p_max",
                self.name
            )));
        }
        if self.ramp_up <= 0.0 || self.ramp_down <= 0.0 {
            return Err(CoreError::Validation(format!(
                "DG {}: ramp limits must be positive",
                self.name
            )));
        }
        if self.p_initial < self.p_min || self.p_initial > self.p_max {
            return Err(CoreError::Validation(format!(
                "DG {}: p_initial outside [p_min, p_max]",
                self.name
            )));
        }
        Ok(())
    }
}

/// Disco-owned DG attached to a network bus.
#[derive(Debug, Clone)]
pub struct DiscoDg {
    pub bus: usize,
    pub unit: DgUnit,
}

/// Disco-owned PV plant; output = peak * pv shape * scenario multiplier.
#[derive(Debug, Clone)]
pub struct PvUnit {
    pub name: String,
    pub bus: usize,
    pub profile: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StorageUnit {
    pub e_min: f64,
    pub e_max: f64,
    pub e_initial: f64,
    pub p_rate_max: f64,
    pub eta_ch: f64,
    pub eta_dch: f64,
}

impl StorageUnit {
    pub fn validate(&self, owner: &str) -> Result<(), CoreError> {
        if !(self.e_min <= self.e_initial && self.e_initial <= self.e_max) {
            return Err(CoreError::Validation(format!(
                "storage of {owner}: requires e_min <= e_initial <= e_max"
            )));
        }
        if self.p_rate_max <= 0.0 {
            return Err(CoreError::Validation(format!(
                "storage of {owner}: p_rate_max must be positive"
            )));
        }
        for (tag, eta) in [("eta_ch", self.eta_ch), ("eta_dch", self.eta_dch)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(CoreError::Validation(format!(
                    "storage of {owner}: {tag} must be in (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Microgrid {
    pub id: usize,
    pub attached_bus: usize,
    pub demand_profile: Vec<f64>,
    /// Deterministic forecast PV at the lower level.
    pub pv_profile: Vec<f64>,
    pub dg: DgUnit,
    pub storage: StorageUnit,
    /// Maximum interruptible fraction of demand per hour.
    pub il_cap_fraction: f64,
    /// Per-hour IL contract price; resolved at load time (explicit or the
    /// 80%-of-Disco default).
    pub il_bid: Vec<f64>,
    pub exchange_max: f64,
}

#[derive(Debug, Clone)]
pub struct MarketData {
    pub wem_price: Vec<f64>,
    pub penalty_price: Vec<f64>,
    pub retail_price: Vec<f64>,
    pub disco_il_bid: Vec<f64>,
    pub lem_price_cap: f64,
    pub wem_purchase_cap: f64,
    /// Absolute cap on the Disco-side IL per bus and hour; the 30%-of-load
    /// rule applies on top of this.
    pub disco_il_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Embedded,
    Export,
}

#[derive(Debug, Clone)]
pub struct CaseConfig {
    pub horizon_t: usize,
    pub flexibility_enabled: bool,
    /// Overrides for the data-derived big-M defaults.
    pub big_m_primal: Option<f64>,
    pub big_m_dual: Option<f64>,
    pub pwl_segments: usize,
    pub solver_mode: SolverMode,
    /// Wholesale purchase in the hour before the horizon; when set, the
    /// purchased-power ramp row is also emitted at t = 1.
    pub initial_purchase: Option<f64>,
    /// Exchange level of each microgrid before the horizon (ramp definition
    /// at t = 1).
    pub initial_exchange: f64,
}

impl Default for CaseConfig {
    fn default() -> Self {
        CaseConfig {
            horizon_t: 24,
            flexibility_enabled: true,
            big_m_primal: None,
            big_m_dual: None,
            pwl_segments: 6,
            solver_mode: SolverMode::Embedded,
            initial_purchase: None,
            initial_exchange: 0.0,
        }
    }
}

impl CaseConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.horizon_t < 1 {
            return Err(CoreError::Validation("horizon_T must be >= 1".into()));
        }
        if self.pwl_segments < 1 {
            return Err(CoreError::Validation("pwl_segments must be >= 1".into()));
        }
        for (tag, m) in [("big_m_primal", self.big_m_primal), ("big_m_dual", self.big_m_dual)] {
            if let Some(v) = m {
                if v <= 0.0 {
                    return Err(CoreError::Validation(format!("{tag} must be positive")));
                }
            }
        }
        Ok(())
    }
}

/// Radial distribution network with its attachment sets.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub dgs: Vec<DiscoDg>,
    pub pvs: Vec<PvUnit>,
    index: HashMap<usize, usize>,
}

impl NetworkModel {
    pub fn new(
        buses: Vec<Bus>,
        lines: Vec<Line>,
        dgs: Vec<DiscoDg>,
        pvs: Vec<PvUnit>,
    ) -> Result<Self, CoreError> {
        let mut index = HashMap::new();
        for (i, b) in buses.iter().enumerate() {
            if index.insert(b.id, i).is_some() {
                return Err(CoreError::Validation(format!("duplicate bus id {}", b.id)));
            }
        }
        Ok(NetworkModel {
            buses,
            lines,
            dgs,
            pvs,
            index,
        })
    }

    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn root_id(&self) -> usize {
        self.buses.first().map(|b| b.id).unwrap_or(1)
    }
}

/// Everything a case run needs, immutable after validation.
#[derive(Debug, Clone)]
pub struct CaseInput {
    pub network: NetworkModel,
    pub microgrids: Vec<Microgrid>,
    pub market: MarketData,
    pub config: CaseConfig,
}
