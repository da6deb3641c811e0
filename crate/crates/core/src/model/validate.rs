//! Cross-reference and topology validation for a loaded case.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::CoreError;

use super::types::{CaseInput, NetworkModel};

/// Confirms the line set forms a tree rooted at the first bus:
/// |lines| = |buses| - 1 and every bus reachable from the root.
pub fn validate_radial(network: &NetworkModel) -> Result<(), CoreError> {
    let n = network.buses.len();
    if n == 0 {
        return Err(CoreError::Validation("network has no buses".into()));
    }
    if network.lines.len() + 1 != n {
        // With full connectivity this count difference is exactly a cycle.
        if network.lines.len() >= n {
            return Err(CoreError::Validation(format!(
                "cycle detected: {} lines for {} buses",
                network.lines.len(),
                n
            )));
        }
        return Err(CoreError::Validation(format!(
            "disconnected network: {} lines for {} buses",
            network.lines.len(),
            n
        )));
    }
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for l in &network.lines {
        adj.entry(l.from).or_default().push(l.to);
        adj.entry(l.to).or_default().push(l.from);
    }
    let root = network.root_id();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([root]);
    seen.insert(root);
    while let Some(b) = queue.pop_front() {
        for &nb in adj.get(&b).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    if seen.len() != n {
        let missing = network
            .buses
            .iter()
            .find(|b| !seen.contains(&b.id))
            .map(|b| b.id)
            .unwrap_or(0);
        return Err(CoreError::Validation(format!(
            "disconnected bus {missing} (not reachable from bus {root})"
        )));
    }
    Ok(())
}

pub fn validate_case(case: &CaseInput) -> Result<(), CoreError> {
    let t = case.config.horizon_t;
    case.config.validate()?;
    let net = &case.network;

    for b in &net.buses {
        if b.base_load_profile.len() != t {
            return Err(CoreError::Validation(format!(
                "bus {}: load profile length {} != horizon {t}",
                b.id,
                b.base_load_profile.len()
            )));
        }
        if b.base_load_profile.iter().any(|&v| v < 0.0) {
            return Err(CoreError::Validation(format!("bus {}: negative load", b.id)));
        }
    }
    for l in &net.lines {
        for end in [l.from, l.to] {
            if net.bus_index(end).is_none() {
                return Err(CoreError::Reference(format!(
                    "line {}-{} references unknown bus {end}",
                    l.from, l.to
                )));
            }
        }
    }
    for d in &net.dgs {
        d.unit.validate()?;
        if net.bus_index(d.bus).is_none() {
            return Err(CoreError::Reference(format!(
                "DG {} references unknown bus {}",
                d.unit.name, d.bus
            )));
        }
    }
    for p in &net.pvs {
        if net.bus_index(p.bus).is_none() {
            return Err(CoreError::Reference(format!(
                "PV {} references unknown bus {}",
                p.name, p.bus
            )));
        }
        if p.profile.len() != t {
            return Err(CoreError::Validation(format!(
                "PV {}: profile length != horizon",
                p.name
            )));
        }
    }

    let mut mg_buses = HashSet::new();
    for mg in &case.microgrids {
        let bus = net.bus_index(mg.attached_bus).ok_or_else(|| {
            CoreError::Reference(format!(
                "mg {} references unknown bus {}",
                mg.id, mg.attached_bus
            ))
        })?;
        if !net.buses[bus].has_mg {
            return Err(CoreError::Validation(format!(
                "bus {} hosts mg {} but is not flagged has_mg",
                mg.attached_bus, mg.id
            )));
        }
        if !mg_buses.insert(mg.attached_bus) {
            return Err(CoreError::Validation(format!(
                "bus {} hosts more than one microgrid",
                mg.attached_bus
            )));
        }
        for (tag, series) in [("demand", &mg.demand_profile), ("pv", &mg.pv_profile), ("il_bid", &mg.il_bid)] {
            if series.len() != t {
                return Err(CoreError::Validation(format!(
                    "mg {}: {tag} profile length != horizon",
                    mg.id
                )));
            }
        }
        if mg.demand_profile.iter().any(|&v| v < 0.0) {
            return Err(CoreError::Validation(format!("mg {}: negative demand", mg.id)));
        }
        if !(0.0..=1.0).contains(&mg.il_cap_fraction) {
            return Err(CoreError::Validation(format!(
                "mg {}: il_cap_fraction outside [0, 1]",
                mg.id
            )));
        }
        if mg.exchange_max <= 0.0 {
            return Err(CoreError::Validation(format!(
                "mg {}: exchange_max must be positive",
                mg.id
            )));
        }
        mg.dg.validate()?;
        mg.storage.validate(&format!("mg {}", mg.id))?;
    }
    for (tag, series) in [
        ("wem", &case.market.wem_price),
        ("penalty", &case.market.penalty_price),
        ("retail", &case.market.retail_price),
        ("il_bid", &case.market.disco_il_bid),
    ] {
        if series.len() != t {
            return Err(CoreError::Validation(format!(
                "market: {tag} series length != horizon"
            )));
        }
    }
    validate_radial(net)
}
