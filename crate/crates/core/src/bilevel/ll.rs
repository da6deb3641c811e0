//! Lower-level microgrid LP: each microgrid minimizes its own operation cost
//! (energy bought from the Disco at the local price, own DG fuel, paid load
//! interruption) subject to balance, exchange/DG/IL/storage limits, and the
//! exchange-ramp definition.
//!
//! The LP is kept in explicit equality/inequality form (all variables free,
//! every bound written as a row) because the KKT derivation needs the full
//! constraint matrix and one dual per row.

use crate::error::CoreError;
use crate::milp::{solve_lp, MilpModel, ObjSense, SolveStatus, Sense};
use crate::model::{CaseConfig, Microgrid};

/// Variable families per hour, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlFamily {
    /// Power bought from the Disco (negative = sold back). Free sign.
    Exchange,
    Dg,
    Il,
    Charge,
    Discharge,
    Energy,
    /// Hour-to-hour change of the exchange. Free sign.
    ExchangeRamp,
}

pub const LL_FAMILIES: [LlFamily; 7] = [
    LlFamily::Exchange,
    LlFamily::Dg,
    LlFamily::Il,
    LlFamily::Charge,
    LlFamily::Discharge,
    LlFamily::Energy,
    LlFamily::ExchangeRamp,
];

#[derive(Debug, Clone)]
pub struct LlVar {
    pub name: String,
    pub family: LlFamily,
    pub hour: usize,
    /// Constant objective coefficient (DG bid, IL bid; zero elsewhere).
    pub cost: f64,
    /// `Some(t)`: the hour-t local price is added to the cost coefficient.
    pub price_hour: Option<usize>,
    /// Magnitude scale used for big-M sizing.
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlRowKind {
    Eq,
    /// Normalized to `coeffs . x <= rhs`.
    Le,
}

#[derive(Debug, Clone)]
pub struct LlRow {
    pub name: String,
    pub kind: LlRowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LowerLevelLp {
    pub mg_id: usize,
    pub horizon: usize,
    pub vars: Vec<LlVar>,
    pub eq_rows: Vec<LlRow>,
    pub ineq_rows: Vec<LlRow>,
}

impl LowerLevelLp {
    pub fn var(&self, family: LlFamily, hour: usize) -> usize {
        let f = LL_FAMILIES.iter().position(|&x| x == family).unwrap();
        (hour - 1) * LL_FAMILIES.len() + f
    }
}

/// Instantiates the microgrid LP over the full horizon.
pub fn build_ll_lp(mg: &Microgrid, config: &CaseConfig) -> Result<LowerLevelLp, CoreError> {
    let t_max = config.horizon_t;
    if mg.demand_profile.len() != t_max {
        return Err(CoreError::Model(format!(
            "mg {}: demand horizon {} does not match case horizon {t_max}",
            mg.id,
            mg.demand_profile.len()
        )));
    }
    let mut vars = Vec::with_capacity(7 * t_max);
    for t in 1..=t_max {
        for &family in &LL_FAMILIES {
            let (stem, cost, price_hour, magnitude) = match family {
                LlFamily::Exchange => ("pmg", 0.0, Some(t), mg.exchange_max),
                LlFamily::Dg => ("pdg", mg.dg.bid, None, mg.dg.p_max),
                LlFamily::Il => ("pil", mg.il_bid[t - 1], None, {
                    mg.il_cap_fraction * mg.demand_profile[t - 1]
                }),
                LlFamily::Charge => ("pch", 0.0, None, mg.storage.p_rate_max),
                LlFamily::Discharge => ("pdch", 0.0, None, mg.storage.p_rate_max),
                LlFamily::Energy => ("e", 0.0, None, mg.storage.e_max),
                LlFamily::ExchangeRamp => ("dmg", 0.0, None, 2.0 * mg.exchange_max),
            };
            vars.push(LlVar {
                name: format!("mg{}_{stem}_t{t}", mg.id),
                family,
                hour: t,
                cost,
                price_hour,
                magnitude,
            });
        }
    }

    let lp_stub = LowerLevelLp {
        mg_id: mg.id,
        horizon: t_max,
        vars,
        eq_rows: Vec::new(),
        ineq_rows: Vec::new(),
    };
    let v = |f, t| lp_stub.var(f, t);
    let mut eq_rows = Vec::new();
    let mut ineq_rows = Vec::new();
    let name = |stem: &str, t: usize| format!("mg{}_{stem}_t{t}", mg.id);

    for t in 1..=t_max {
        let demand = mg.demand_profile[t - 1];
        let pv = mg.pv_profile[t - 1];

        // Supply-demand balance: pmg + pdg + pv + pdch + pil = demand + pch.
        eq_rows.push(LlRow {
            name: name("bal", t),
            kind: LlRowKind::Eq,
            coeffs: vec![
                (v(LlFamily::Exchange, t), 1.0),
                (v(LlFamily::Dg, t), 1.0),
                (v(LlFamily::Discharge, t), 1.0),
                (v(LlFamily::Il, t), 1.0),
                (v(LlFamily::Charge, t), -1.0),
            ],
            rhs: demand - pv,
        });
        // Storage dynamics: e_t = e_{t-1} + eta_ch pch - pdch / eta_dch.
        let mut es = vec![
            (v(LlFamily::Energy, t), 1.0),
            (v(LlFamily::Charge, t), -mg.storage.eta_ch),
            (v(LlFamily::Discharge, t), 1.0 / mg.storage.eta_dch),
        ];
        let es_rhs = if t == 1 {
            mg.storage.e_initial
        } else {
            es.push((v(LlFamily::Energy, t - 1), -1.0));
            0.0
        };
        eq_rows.push(LlRow {
            name: name("es", t),
            kind: LlRowKind::Eq,
            coeffs: es,
            rhs: es_rhs,
        });
        // Ramp definition: dmg_t = pmg_t - pmg_{t-1}.
        let mut rd = vec![
            (v(LlFamily::ExchangeRamp, t), 1.0),
            (v(LlFamily::Exchange, t), -1.0),
        ];
        let rd_rhs = if t == 1 {
            -config.initial_exchange
        } else {
            rd.push((v(LlFamily::Exchange, t - 1), 1.0));
            0.0
        };
        eq_rows.push(LlRow {
            name: name("rampdef", t),
            kind: LlRowKind::Eq,
            coeffs: rd,
            rhs: rd_rhs,
        });

        let mut le = |stem: &str, coeffs: Vec<(usize, f64)>, rhs: f64| {
            ineq_rows.push(LlRow {
                name: name(stem, t),
                kind: LlRowKind::Le,
                coeffs,
                rhs,
            });
        };
        le("exch_hi", vec![(v(LlFamily::Exchange, t), 1.0)], mg.exchange_max);
        le("exch_lo", vec![(v(LlFamily::Exchange, t), -1.0)], mg.exchange_max);
        le("dg_hi", vec![(v(LlFamily::Dg, t), 1.0)], mg.dg.p_max);
        le("dg_lo", vec![(v(LlFamily::Dg, t), -1.0)], -mg.dg.p_min);
        if t == 1 {
            le("dg_rup", vec![(v(LlFamily::Dg, t), 1.0)], mg.dg.ramp_up + mg.dg.p_initial);
            le("dg_rdn", vec![(v(LlFamily::Dg, t), -1.0)], mg.dg.ramp_down - mg.dg.p_initial);
        } else {
            le(
                "dg_rup",
                vec![(v(LlFamily::Dg, t), 1.0), (v(LlFamily::Dg, t - 1), -1.0)],
                mg.dg.ramp_up,
            );
            le(
                "dg_rdn",
                vec![(v(LlFamily::Dg, t), -1.0), (v(LlFamily::Dg, t - 1), 1.0)],
                mg.dg.ramp_down,
            );
        }
        le("il_hi", vec![(v(LlFamily::Il, t), 1.0)], mg.il_cap_fraction * demand);
        le("il_lo", vec![(v(LlFamily::Il, t), -1.0)], 0.0);
        le("ch_hi", vec![(v(LlFamily::Charge, t), 1.0)], mg.storage.p_rate_max);
        le("ch_lo", vec![(v(LlFamily::Charge, t), -1.0)], 0.0);
        le("dch_hi", vec![(v(LlFamily::Discharge, t), 1.0)], mg.storage.p_rate_max);
        le("dch_lo", vec![(v(LlFamily::Discharge, t), -1.0)], 0.0);
        le("e_hi", vec![(v(LlFamily::Energy, t), 1.0)], mg.storage.e_max);
        le("e_lo", vec![(v(LlFamily::Energy, t), -1.0)], -mg.storage.e_min);
    }

    let lp = LowerLevelLp {
        eq_rows,
        ineq_rows,
        ..lp_stub
    };
    // Structural sanity: every variable must appear somewhere.
    let mut used = vec![false; lp.vars.len()];
    for r in lp.eq_rows.iter().chain(&lp.ineq_rows) {
        for &(k, _) in &r.coeffs {
            used[k] = true;
        }
    }
    if let Some(k) = used.iter().position(|&u| !u) {
        return Err(CoreError::Model(format!(
            "LL variable {} appears in no row",
            lp.vars[k].name
        )));
    }
    Ok(lp)
}

/// Direct LP solution of the lower level at fixed local prices.
#[derive(Debug, Clone)]
pub struct LlSolution {
    pub cost: f64,
    pub primal: Vec<f64>,
    /// One free dual per equality row (Lagrangian convention).
    pub nu: Vec<f64>,
    /// One nonnegative dual per inequality row.
    pub mu: Vec<f64>,
    /// Slack per inequality row (rhs - activity), nonnegative.
    pub slack: Vec<f64>,
}

impl LowerLevelLp {
    /// Cost coefficient of each variable at the given prices.
    pub fn costs_at(&self, prices: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|v| v.cost + v.price_hour.map_or(0.0, |t| prices[t - 1]))
            .collect()
    }

    /// Builds the LP as a standalone minimization model at fixed prices.
    pub fn to_milp(&self, prices: &[f64]) -> MilpModel {
        let costs = self.costs_at(prices);
        let mut m = MilpModel::new(format!("ll_mg{}", self.mg_id), ObjSense::Minimize);
        let cols: Vec<_> = self
            .vars
            .iter()
            .zip(&costs)
            .map(|(v, &c)| m.add_col(v.name.clone(), f64::NEG_INFINITY, f64::INFINITY, c))
            .collect();
        for r in self.eq_rows.iter().chain(&self.ineq_rows) {
            let coeffs: Vec<_> = r.coeffs.iter().map(|&(k, c)| (cols[k], c)).collect();
            let sense = match r.kind {
                LlRowKind::Eq => Sense::Eq,
                LlRowKind::Le => Sense::Le,
            };
            m.add_row(r.name.clone(), sense, r.rhs, &coeffs);
        }
        m
    }

    /// Solves the LP at fixed prices and extracts primal, duals, and slacks.
    pub fn solve_direct(&self, prices: &[f64]) -> Result<LlSolution, CoreError> {
        let m = self.to_milp(prices);
        let sol = solve_lp(&m);
        if sol.status != SolveStatus::Optimal {
            return Err(CoreError::Solver(format!(
                "mg {} lower-level LP ended {:?}",
                self.mg_id, sol.status
            )));
        }
        let duals = sol
            .duals
            .ok_or_else(|| CoreError::Solver("LP solve returned no duals".into()))?;
        let n_eq = self.eq_rows.len();
        // Solver rows were added equalities-first; its sign convention has
        // b . pi = objective, so the Lagrangian duals are the negatives.
        let nu: Vec<f64> = duals[..n_eq].iter().map(|&d| -d).collect();
        let mu: Vec<f64> = duals[n_eq..].iter().map(|&d| (-d).max(0.0)).collect();
        let slack: Vec<f64> = self
            .ineq_rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.rhs - sol.row_activity[n_eq + i])
            .collect();
        Ok(LlSolution {
            cost: sol.objective,
            primal: sol.values,
            nu,
            mu,
            slack,
        })
    }
}
