//! KKT system of a lower-level LP: one stationarity row per primal variable,
//! one dual per constraint row, one complementarity pair per inequality.

use crate::error::CoreError;

use super::ll::LowerLevelLp;

/// Stationarity row of one primal variable:
/// cost + price (if any) + sum(nu_r E[r, k]) + sum(mu_r G[r, k]) = 0.
#[derive(Debug, Clone)]
pub struct StationarityRow {
    pub var: usize,
    pub cost: f64,
    /// `Some(t)`: the hour-t local price column participates with +1.
    pub price_hour: Option<usize>,
    /// (equality row index, coefficient).
    pub eq_terms: Vec<(usize, f64)>,
    /// (inequality row index, coefficient).
    pub ineq_terms: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct KktSystem {
    pub stationarity: Vec<StationarityRow>,
    /// One pair per inequality row: (slack of row r) * (mu_r) = 0.
    pub n_pairs: usize,
}

/// Derives the exact KKT system (no approximation) from the LP structure.
pub fn derive_kkt(lp: &LowerLevelLp) -> Result<KktSystem, CoreError> {
    let n = lp.vars.len();
    let mut stationarity: Vec<StationarityRow> = lp
        .vars
        .iter()
        .enumerate()
        .map(|(k, v)| StationarityRow {
            var: k,
            cost: v.cost,
            price_hour: v.price_hour,
            eq_terms: Vec::new(),
            ineq_terms: Vec::new(),
        })
        .collect();
    for (r, row) in lp.eq_rows.iter().enumerate() {
        for &(k, c) in &row.coeffs {
            stationarity[k].eq_terms.push((r, c));
        }
    }
    for (r, row) in lp.ineq_rows.iter().enumerate() {
        for &(k, c) in &row.coeffs {
            stationarity[k].ineq_terms.push((r, c));
        }
    }
    if let Some(s) = stationarity
        .iter()
        .find(|s| s.eq_terms.is_empty() && s.ineq_terms.is_empty())
    {
        return Err(CoreError::Model(format!(
            "variable {} has an empty column; its stationarity row would be degenerate",
            lp.vars[s.var].name
        )));
    }
    let _ = n;
    Ok(KktSystem {
        stationarity,
        n_pairs: lp.ineq_rows.len(),
    })
}
