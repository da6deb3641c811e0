//! Ingestion of the bundled dataset files.
//!
//! One structured text file per entity class; `#` starts a comment, numbers
//! use a decimal point. Column orders are documented in the bundled data
//! files themselves.

use std::fs;
use std::path::Path;

use crate::error::CoreError;

use super::types::{
    Bus, CaseConfig, CaseInput, DgUnit, DiscoDg, Line, MarketData, Microgrid, NetworkModel,
    PvUnit, SolverMode, StorageUnit,
};
use super::validate;

struct DataLine {
    no: usize,
    tokens: Vec<String>,
}

fn data_lines(path: &Path) -> Result<Vec<DataLine>, CoreError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CoreError::Io(format!("reading {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        out.push(DataLine {
            no: i + 1,
            tokens: line.split_whitespace().map(str::to_string).collect(),
        });
    }
    Ok(out)
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64, CoreError> {
    tok.parse().map_err(|_| {
        CoreError::Parse(format!(
            "{}:{line}: '{tok}' is not a number",
            path.file_name().unwrap_or_default().to_string_lossy()
        ))
    })
}

fn parse_usize(path: &Path, line: usize, tok: &str) -> Result<usize, CoreError> {
    tok.parse().map_err(|_| {
        CoreError::Parse(format!(
            "{}:{line}: '{tok}' is not an integer",
            path.file_name().unwrap_or_default().to_string_lossy()
        ))
    })
}

fn expect_tokens(path: &Path, l: &DataLine, n: usize) -> Result<(), CoreError> {
    if l.tokens.len() < n {
        return Err(CoreError::Parse(format!(
            "{}:{}: expected at least {n} columns, found {}",
            path.file_name().unwrap_or_default().to_string_lossy(),
            l.no,
            l.tokens.len()
        )));
    }
    Ok(())
}

fn parse_series(path: &Path, l: &DataLine, skip: usize) -> Result<Vec<f64>, CoreError> {
    l.tokens[skip..]
        .iter()
        .map(|t| parse_f64(path, l.no, t))
        .collect()
}

/// Expand a 1-value series to the horizon, or check the length.
fn fit_series(name: &str, mut s: Vec<f64>, t: usize) -> Result<Vec<f64>, CoreError> {
    if s.len() == 1 {
        s = vec![s[0]; t];
    }
    if s.len() != t {
        return Err(CoreError::Validation(format!(
            "{name}: profile length {} does not match horizon {t}",
            s.len()
        )));
    }
    Ok(s)
}

pub fn load_config(path: &Path) -> Result<CaseConfig, CoreError> {
    let mut cfg = CaseConfig::default();
    for l in data_lines(path)? {
        expect_tokens(path, &l, 2)?;
        let key = l.tokens[0].as_str();
        let val = l.tokens[1].as_str();
        match key {
            "horizon_T" => cfg.horizon_t = parse_usize(path, l.no, val)?,
            "flexibility_enabled" => cfg.flexibility_enabled = val == "true" || val == "1",
            "big_m_primal" => cfg.big_m_primal = Some(parse_f64(path, l.no, val)?),
            "big_m_dual" => cfg.big_m_dual = Some(parse_f64(path, l.no, val)?),
            "pwl_segments" => cfg.pwl_segments = parse_usize(path, l.no, val)?,
            "initial_purchase" => cfg.initial_purchase = Some(parse_f64(path, l.no, val)?),
            "initial_exchange" => cfg.initial_exchange = parse_f64(path, l.no, val)?,
            "solver_mode" => {
                cfg.solver_mode = match val {
                    "embedded" => SolverMode::Embedded,
                    "export" => SolverMode::Export,
                    other => {
                        return Err(CoreError::Parse(format!(
                            "case config line {}: unknown solver_mode '{other}'",
                            l.no
                        )))
                    }
                }
            }
            other => {
                return Err(CoreError::Parse(format!(
                    "case config line {}: unknown key '{other}'",
                    l.no
                )))
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Profiles {
    load_shape: Vec<f64>,
    pv_shape: Vec<f64>,
}

fn load_profiles(path: &Path, t: usize) -> Result<Profiles, CoreError> {
    let mut load_shape = None;
    let mut pv_shape = None;
    for l in data_lines(path)? {
        expect_tokens(path, &l, 2)?;
        let series = parse_series(path, &l, 1)?;
        match l.tokens[0].as_str() {
            "load_shape" => load_shape = Some(fit_series("load_shape", series, t)?),
            "pv_shape" => pv_shape = Some(fit_series("pv_shape", series, t)?),
            other => {
                return Err(CoreError::Parse(format!(
                    "profiles line {}: unknown series '{other}'",
                    l.no
                )))
            }
        }
    }
    Ok(Profiles {
        load_shape: load_shape
            .ok_or_else(|| CoreError::Validation("profiles: missing load_shape".into()))?,
        pv_shape: pv_shape
            .ok_or_else(|| CoreError::Validation("profiles: missing pv_shape".into()))?,
    })
}

fn load_buses(path: &Path, shape: &[f64]) -> Result<Vec<Bus>, CoreError> {
    let mut buses = Vec::new();
    for l in data_lines(path)? {
        expect_tokens(path, &l, 4)?;
        let id = parse_usize(path, l.no, &l.tokens[0])?;
        let v_min = parse_f64(path, l.no, &l.tokens[1])?;
        let v_max = parse_f64(path, l.no, &l.tokens[2])?;
        let peak = parse_f64(path, l.no, &l.tokens[3])?;
        if peak < 0.0 {
            return Err(CoreError::Validation(format!("bus {id}: load must be >= 0")));
        }
        if v_min > v_max {
            return Err(CoreError::Validation(format!(
                "bus {id}: v_min {v_min} exceeds v_max {v_max}"
            )));
        }
        buses.push(Bus {
            id,
            v_min,
            v_max,
            base_load_profile: shape.iter().map(|s| s * peak).collect(),
            has_mg: false,
            has_dg: false,
            has_pv: false,
        });
    }
    Ok(buses)
}

fn load_lines(path: &Path) -> Result<Vec<Line>, CoreError> {
    let mut lines = Vec::new();
    for l in data_lines(path)? {
        expect_tokens(path, &l, 5)?;
        let from = parse_usize(path, l.no, &l.tokens[0])?;
        let to = parse_usize(path, l.no, &l.tokens[1])?;
        let r = parse_f64(path, l.no, &l.tokens[2])?;
        let z = parse_f64(path, l.no, &l.tokens[3])?;
        let imax = parse_f64(path, l.no, &l.tokens[4])?;
        if !(z >= r && r >= 0.0) || z <= 0.0 {
            return Err(CoreError::Validation(format!(
                "line {from}-{to}: requires Z >= R >= 0 and Z > 0"
            )));
        }
        if imax <= 0.0 {
            return Err(CoreError::Validation(format!(
                "line {from}-{to}: current_max must be positive"
            )));
        }
        lines.push(Line {
            from,
            to,
            resistance_r: r,
            impedance_z: z,
            current_max: imax,
        });
    }
    Ok(lines)
}

fn load_disco_dgs(path: &Path) -> Result<Vec<DiscoDg>, CoreError> {
    let mut dgs = Vec::new();
    for l in data_lines(path)? {
        expect_tokens(path, &l, 8)?;
        let name = l.tokens[0].clone();
        let bus = parse_usize(path, l.no, &l.tokens[1])?;
        let nums: Vec<f64> = l.tokens[2..8]
            .iter()
            .map(|t| parse_f64(path, l.no, t))
            .collect::<Result<_, _>>()?;
        let unit = DgUnit {
            name,
            p_min: nums[0],
            p_max: nums[1],
            ramp_up: nums[2],
            ramp_down: nums[3],
            p_initial: nums[4],
            bid: nums[5],
        };
        unit.validate()?;
        dgs.push(DiscoDg { bus, unit });
    }
    Ok(dgs)
}

fn load_pvs(path: &Path, shape: &[f64]) -> Result<Vec<PvUnit>, CoreError> {
    let mut pvs = Vec::new();
    for l in data_lines(path)? {
        expect_tokens(path, &l, 3)?;
        let name = l.tokens[0].clone();
        let bus = parse_usize(path, l.no, &l.tokens[1])?;
        let peak = parse_f64(path, l.no, &l.tokens[2])?;
        pvs.push(PvUnit {
            name,
            bus,
            profile: shape.iter().map(|s| s * peak).collect(),
        });
    }
    Ok(pvs)
}

fn load_market(path: &Path, t: usize) -> Result<MarketData, CoreError> {
    let mut wem = None;
    let mut il_bid = None;
    let mut penalty = None;
    let mut retail = None;
    let mut lem_cap = None;
    let mut wem_cap = None;
    let mut il_cap = f64::INFINITY;
    for l in data_lines(path)? {
        expect_tokens(path, &l, 2)?;
        match l.tokens[0].as_str() {
            "lem_price_cap" => lem_cap = Some(parse_f64(path, l.no, &l.tokens[1])?),
            "wem_purchase_cap" => wem_cap = Some(parse_f64(path, l.no, &l.tokens[1])?),
            "disco_il_cap" => il_cap = parse_f64(path, l.no, &l.tokens[1])?,
            "wem" => wem = Some(fit_series("wem", parse_series(path, &l, 1)?, t)?),
            "il_bid" => il_bid = Some(fit_series("il_bid", parse_series(path, &l, 1)?, t)?),
            "penalty" => penalty = Some(fit_series("penalty", parse_series(path, &l, 1)?, t)?),
            "retail" => retail = Some(fit_series("retail", parse_series(path, &l, 1)?, t)?),
            other => {
                return Err(CoreError::Parse(format!(
                    "market line {}: unknown key '{other}'",
                    l.no
                )))
            }
        }
    }
    let wem = wem.ok_or_else(|| CoreError::Validation("market: missing wem series".into()))?;
    let il_bid =
        il_bid.ok_or_else(|| CoreError::Validation("market: missing il_bid series".into()))?;
    // Derived defaults: penalty 140% and retail 120% of the wholesale price.
    let penalty = penalty.unwrap_or_else(|| wem.iter().map(|p| 1.4 * p).collect());
    let retail = retail.unwrap_or_else(|| wem.iter().map(|p| 1.2 * p).collect());
    let market = MarketData {
        wem_price: wem,
        penalty_price: penalty,
        retail_price: retail,
        disco_il_bid: il_bid,
        lem_price_cap: lem_cap.unwrap_or(90.0),
        wem_purchase_cap: wem_cap
            .ok_or_else(|| CoreError::Validation("market: missing wem_purchase_cap".into()))?,
        disco_il_cap: il_cap,
    };
    for (tag, series) in [
        ("wem", &market.wem_price),
        ("penalty", &market.penalty_price),
        ("retail", &market.retail_price),
        ("il_bid", &market.disco_il_bid),
    ] {
        if series.iter().any(|&p| p < 0.0) {
            return Err(CoreError::Validation(format!("market: {tag} price < 0")));
        }
    }
    if market.lem_price_cap <= 0.0 || market.wem_purchase_cap <= 0.0 {
        return Err(CoreError::Validation("market: caps must be positive".into()));
    }
    Ok(market)
}

fn load_microgrids(path: &Path, t: usize, disco_il_bid: &[f64]) -> Result<Vec<Microgrid>, CoreError> {
    let lines = data_lines(path)?;
    let mut mgs: Vec<Microgrid> = Vec::new();
    let mut current: Option<MgDraft> = None;

    struct MgDraft {
        id: usize,
        bus: usize,
        exchange_max: f64,
        il_cap_fraction: f64,
        il_bid: Option<f64>,
        demand: Option<Vec<f64>>,
        pv: Option<Vec<f64>>,
        dg: Option<DgUnit>,
        storage: Option<StorageUnit>,
    }

    let finish = |d: MgDraft, t: usize, disco_il_bid: &[f64]| -> Result<Microgrid, CoreError> {
        let il_bid = match d.il_bid {
            Some(b) => vec![b; t],
            // 80% of the Disco-side interruption price by default.
            None => disco_il_bid.iter().map(|p| 0.8 * p).collect(),
        };
        let mg = Microgrid {
            id: d.id,
            attached_bus: d.bus,
            demand_profile: d
                .demand
                .ok_or_else(|| CoreError::Validation(format!("mg {}: missing demand", d.id)))?,
            pv_profile: d
                .pv
                .ok_or_else(|| CoreError::Validation(format!("mg {}: missing pv", d.id)))?,
            dg: d
                .dg
                .ok_or_else(|| CoreError::Validation(format!("mg {}: missing dg", d.id)))?,
            storage: d
                .storage
                .ok_or_else(|| CoreError::Validation(format!("mg {}: missing storage", d.id)))?,
            il_cap_fraction: d.il_cap_fraction,
            il_bid,
            exchange_max: d.exchange_max,
        };
        Ok(mg)
    };

    for l in &lines {
        match l.tokens[0].as_str() {
            "mg" => {
                if let Some(d) = current.take() {
                    mgs.push(finish(d, t, disco_il_bid)?);
                }
                expect_tokens(path, l, 5)?;
                current = Some(MgDraft {
                    id: parse_usize(path, l.no, &l.tokens[1])?,
                    bus: parse_usize(path, l.no, &l.tokens[2])?,
                    exchange_max: parse_f64(path, l.no, &l.tokens[3])?,
                    il_cap_fraction: parse_f64(path, l.no, &l.tokens[4])?,
                    il_bid: match l.tokens.get(5) {
                        Some(tok) => Some(parse_f64(path, l.no, tok)?),
                        None => None,
                    },
                    demand: None,
                    pv: None,
                    dg: None,
                    storage: None,
                });
            }
            key => {
                let d = current.as_mut().ok_or_else(|| {
                    CoreError::Parse(format!("microgrids line {}: data before first 'mg'", l.no))
                })?;
                match key {
                    "demand" => d.demand = Some(fit_series("mg demand", parse_series(path, l, 1)?, t)?),
                    "pv" => d.pv = Some(fit_series("mg pv", parse_series(path, l, 1)?, t)?),
                    "dg" => {
                        expect_tokens(path, l, 7)?;
                        let nums: Vec<f64> = l.tokens[1..7]
                            .iter()
                            .map(|tok| parse_f64(path, l.no, tok))
                            .collect::<Result<_, _>>()?;
                        d.dg = Some(DgUnit {
                            name: format!("mg{}_dg", d.id),
                            p_min: nums[0],
                            p_max: nums[1],
                            ramp_up: nums[2],
                            ramp_down: nums[3],
                            p_initial: nums[4],
                            bid: nums[5],
                        });
                    }
                    "storage" => {
                        expect_tokens(path, l, 7)?;
                        let nums: Vec<f64> = l.tokens[1..7]
                            .iter()
                            .map(|tok| parse_f64(path, l.no, tok))
                            .collect::<Result<_, _>>()?;
                        d.storage = Some(StorageUnit {
                            e_min: nums[0],
                            e_max: nums[1],
                            e_initial: nums[2],
                            p_rate_max: nums[3],
                            eta_ch: nums[4],
                            eta_dch: nums[5],
                        });
                    }
                    other => {
                        return Err(CoreError::Parse(format!(
                            "microgrids line {}: unknown key '{other}'",
                            l.no
                        )))
                    }
                }
            }
        }
    }
    if let Some(d) = current.take() {
        mgs.push(finish(d, t, disco_il_bid)?);
    }
    Ok(mgs)
}

/// Load and validate a full case from a dataset directory.
///
/// Expected files: `case.cfg`, `profiles.dat`, `buses.dat`, `lines.dat`,
/// `dg_units.dat`, `pv_units.dat`, `microgrids.dat`, `market.dat`.
pub fn load_case(dir: &Path) -> Result<CaseInput, CoreError> {
    let config = load_config(&dir.join("case.cfg"))?;
    let t = config.horizon_t;
    let profiles = load_profiles(&dir.join("profiles.dat"), t)?;
    let mut buses = load_buses(&dir.join("buses.dat"), &profiles.load_shape)?;
    let lines = load_lines(&dir.join("lines.dat"))?;
    let dgs = load_disco_dgs(&dir.join("dg_units.dat"))?;
    let pvs = load_pvs(&dir.join("pv_units.dat"), &profiles.pv_shape)?;
    let market = load_market(&dir.join("market.dat"), t)?;
    let microgrids = load_microgrids(&dir.join("microgrids.dat"), t, &market.disco_il_bid)?;

    // Resolve membership flags from the attachment sets.
    for b in buses.iter_mut() {
        b.has_dg = dgs.iter().any(|d| d.bus == b.id);
        b.has_pv = pvs.iter().any(|p| p.bus == b.id);
        b.has_mg = microgrids.iter().any(|m| m.attached_bus == b.id);
    }
    let network = NetworkModel::new(buses, lines, dgs, pvs)?;
    let case = CaseInput {
        network,
        microgrids,
        market,
        config,
    };
    validate::validate_case(&case)?;
    Ok(case)
}
