//! Single-level MILP assembly: first-stage market decisions, per-microgrid
//! KKT blocks with big-M complementarity, and per-scenario network operation,
//! all merged deterministically into one maximization model.

use std::fmt::Write as _;

use crate::error::CoreError;
use crate::flow::{emit_bus_balance, emit_flow_block, FlowBlock};
use crate::milp::{solve_lp_with_bounds, ColId, MilpModel, ObjSense, RowId, Sense, SolveStatus};
use crate::model::CaseInput;
use crate::scenario::ScenarioSet;

use super::duality::{strong_duality_expr, DualityObjectiveExpr};
use super::kkt::{derive_kkt, KktSystem};
use super::ll::{build_ll_lp, LowerLevelLp};

/// Per-microgrid compiled block: the LL LP, its KKT system, and the columns
/// holding its primal, dual, and complementarity variables.
#[derive(Debug, Clone)]
pub struct MgBlock {
    pub mg_id: usize,
    pub attached_bus: usize,
    pub lp: LowerLevelLp,
    pub kkt: KktSystem,
    pub duality: DualityObjectiveExpr,
    pub primal_cols: Vec<ColId>,
    pub nu_cols: Vec<ColId>,
    pub mu_cols: Vec<ColId>,
    pub u_cols: Vec<ColId>,
    /// RowIds of the copied inequality rows (for slack recovery).
    pub ineq_row_ids: Vec<RowId>,
    pub m_primal: Vec<f64>,
    pub m_dual: Vec<f64>,
}

/// Per-scenario operation block.
#[derive(Debug, Clone)]
pub struct ScenarioBlock {
    pub s: usize,
    pub probability: f64,
    /// Flow columns per hour (index t-1).
    pub flow: Vec<FlowBlock>,
    /// Disco DG dispatch, [dg index][t-1].
    pub dg_cols: Vec<Vec<ColId>>,
    /// Disco-side interruptible load, [bus index][t-1]; None where load is 0.
    pub il_cols: Vec<Vec<Option<ColId>>>,
}

#[derive(Debug, Clone)]
pub struct CompiledModel {
    pub milp: MilpModel,
    pub horizon: usize,
    /// Wholesale purchase per hour (first stage).
    pub p_e: Vec<ColId>,
    /// Local market price per hour (first stage).
    pub rho: Vec<ColId>,
    /// Ramp allowance per hour; empty when flexibility is disabled.
    pub delta_f: Vec<ColId>,
    pub mgs: Vec<MgBlock>,
    pub scenarios: Vec<ScenarioBlock>,
}

/// Compiles a case plus scenario set into the single-level MILP.
pub fn compile(case: &CaseInput, scen: &ScenarioSet) -> Result<CompiledModel, CoreError> {
    scen.validate()?;
    let t_max = case.config.horizon_t;
    for sc in &scen.scenarios {
        if sc.load_mult.len() != t_max || sc.pv_mult.len() != t_max {
            return Err(CoreError::Model(format!(
                "scenario {} multiplier length does not match horizon {t_max}",
                sc.id
            )));
        }
    }
    let market = &case.market;
    let flex = case.config.flexibility_enabled;
    let mut m = MilpModel::new("disco_schedule", ObjSense::Maximize);

    // --- First stage ------------------------------------------------------
    let p_e: Vec<ColId> = (1..=t_max)
        .map(|t| {
            m.add_col(
                format!("p_e_t{t}"),
                0.0,
                market.wem_purchase_cap,
                -market.wem_price[t - 1],
            )
        })
        .collect();
    let rho: Vec<ColId> = (1..=t_max)
        .map(|t| m.add_col(format!("rho_t{t}"), 0.0, market.lem_price_cap, 0.0))
        .collect();
    let delta_f: Vec<ColId> = if flex {
        (1..=t_max)
            .map(|t| {
                m.add_col(
                    format!("delta_f_t{t}"),
                    0.0,
                    f64::INFINITY,
                    -market.penalty_price[t - 1],
                )
            })
            .collect()
    } else {
        Vec::new()
    };

    // --- Microgrid KKT blocks --------------------------------------------
    let m_dual_default = {
        let mut worst = market.lem_price_cap;
        for mg in &case.microgrids {
            worst = worst.max(mg.dg.bid.abs());
            for &b in &mg.il_bid {
                worst = worst.max(b.abs());
            }
        }
        10.0 * worst
    };
    let mut mgs = Vec::with_capacity(case.microgrids.len());
    for mg in &case.microgrids {
        let lp = build_ll_lp(mg, &case.config)?;
        let kkt = derive_kkt(&lp)?;
        let duality = strong_duality_expr(&lp);

        let primal_cols: Vec<ColId> = lp
            .vars
            .iter()
            .map(|v| m.add_col(v.name.clone(), f64::NEG_INFINITY, f64::INFINITY, 0.0))
            .collect();
        let nu_cols: Vec<ColId> = lp
            .eq_rows
            .iter()
            .zip(&duality.nu_coeffs)
            .map(|(r, &c)| m.add_col(format!("nu_{}", r.name), f64::NEG_INFINITY, f64::INFINITY, c))
            .collect();
        let mu_cols: Vec<ColId> = lp
            .ineq_rows
            .iter()
            .zip(&duality.mu_coeffs)
            .map(|(r, &c)| m.add_col(format!("mu_{}", r.name), 0.0, f64::INFINITY, c))
            .collect();
        let u_cols: Vec<ColId> = lp
            .ineq_rows
            .iter()
            .map(|r| m.add_binary(format!("u_{}", r.name), 0.0))
            .collect();
        // Constant-cost primal terms of the duality expression.
        for &(k, c) in &duality.primal_coeffs {
            m.cols[primal_cols[k].0].obj += c;
        }

        // Primal feasibility, copied verbatim.
        for r in &lp.eq_rows {
            let coeffs: Vec<_> = r.coeffs.iter().map(|&(k, c)| (primal_cols[k], c)).collect();
            m.add_row(format!("pf_{}", r.name), Sense::Eq, r.rhs, &coeffs);
        }
        let mut ineq_row_ids = Vec::with_capacity(lp.ineq_rows.len());
        for r in &lp.ineq_rows {
            let coeffs: Vec<_> = r.coeffs.iter().map(|&(k, c)| (primal_cols[k], c)).collect();
            ineq_row_ids.push(m.add_row(format!("pf_{}", r.name), Sense::Le, r.rhs, &coeffs));
        }
        // Stationarity: price + nu.E + mu.G = -cost per variable.
        for st in &kkt.stationarity {
            let mut coeffs: Vec<(ColId, f64)> = Vec::new();
            if let Some(t) = st.price_hour {
                coeffs.push((rho[t - 1], 1.0));
            }
            for &(r, c) in &st.eq_terms {
                coeffs.push((nu_cols[r], c));
            }
            for &(r, c) in &st.ineq_terms {
                coeffs.push((mu_cols[r], c));
            }
            m.add_row(
                format!("stat_{}", lp.vars[st.var].name),
                Sense::Eq,
                -st.cost,
                &coeffs,
            );
        }
        // Complementarity big-Ms and the two disjunction rows per pair.
        let mut m_primal = Vec::with_capacity(lp.ineq_rows.len());
        let mut m_dual = Vec::with_capacity(lp.ineq_rows.len());
        for (r, row) in lp.ineq_rows.iter().enumerate() {
            let mp = case.config.big_m_primal.unwrap_or_else(|| {
                let mut scale = row.rhs.abs();
                for &(k, _) in &row.coeffs {
                    scale = scale.max(lp.vars[k].magnitude);
                }
                2.0 * scale.max(1.0)
            });
            let md = case.config.big_m_dual.unwrap_or(m_dual_default);
            // slack <= mp (1 - u): -g.x + mp u <= mp - h.
            let mut coeffs: Vec<(ColId, f64)> =
                row.coeffs.iter().map(|&(k, c)| (primal_cols[k], -c)).collect();
            coeffs.push((u_cols[r], mp));
            m.add_row(format!("csl_{}", row.name), Sense::Le, mp - row.rhs, &coeffs);
            m.add_row(
                format!("cdu_{}", row.name),
                Sense::Le,
                0.0,
                &[(mu_cols[r], 1.0), (u_cols[r], -md)],
            );
            m_primal.push(mp);
            m_dual.push(md);
        }

        mgs.push(MgBlock {
            mg_id: mg.id,
            attached_bus: mg.attached_bus,
            lp,
            kkt,
            duality,
            primal_cols,
            nu_cols,
            mu_cols,
            u_cols,
            ineq_row_ids,
            m_primal,
            m_dual,
        });
    }

    // --- Second stage: per-scenario network operation ---------------------
    let net = &case.network;
    let mut scenarios = Vec::with_capacity(scen.scenarios.len());
    for sc in &scen.scenarios {
        let s = sc.id;
        let pi = sc.probability;

        let dg_cols: Vec<Vec<ColId>> = net
            .dgs
            .iter()
            .map(|d| {
                (1..=t_max)
                    .map(|t| {
                        m.add_col(
                            format!("dg_{}_t{t}_s{s}", d.unit.name),
                            d.unit.p_min,
                            d.unit.p_max,
                            -pi * d.unit.bid,
                        )
                    })
                    .collect()
            })
            .collect();
        // DG ramp limits per hour (initial dispatch anchors t = 1).
        for (d, cols) in net.dgs.iter().zip(&dg_cols) {
            for t in 1..=t_max {
                let name = |dir: &str| format!("dgr{dir}_{}_t{t}_s{s}", d.unit.name);
                if t == 1 {
                    m.add_row(name("u"), Sense::Le, d.unit.ramp_up + d.unit.p_initial, &[(cols[0], 1.0)]);
                    m.add_row(name("d"), Sense::Le, d.unit.ramp_down - d.unit.p_initial, &[(cols[0], -1.0)]);
                } else {
                    m.add_row(
                        name("u"),
                        Sense::Le,
                        d.unit.ramp_up,
                        &[(cols[t - 1], 1.0), (cols[t - 2], -1.0)],
                    );
                    m.add_row(
                        name("d"),
                        Sense::Le,
                        d.unit.ramp_down,
                        &[(cols[t - 1], -1.0), (cols[t - 2], 1.0)],
                    );
                }
            }
        }

        // Interruptible load: paid at the IL bid and lost at the retail rate.
        let il_cols: Vec<Vec<Option<ColId>>> = net
            .buses
            .iter()
            .map(|b| {
                (1..=t_max)
                    .map(|t| {
                        let load = b.base_load_profile[t - 1] * sc.load_mult[t - 1];
                        if load <= 0.0 {
                            return None;
                        }
                        let cap = market.disco_il_cap.min(0.3 * load);
                        Some(m.add_col(
                            format!("il_{}_t{t}_s{s}", b.id),
                            0.0,
                            cap,
                            -pi * (market.disco_il_bid[t - 1] + market.retail_price[t - 1]),
                        ))
                    })
                    .collect()
            })
            .collect();

        let mut flow = Vec::with_capacity(t_max);
        for t in 1..=t_max {
            let block = emit_flow_block(&mut m, net, t, s, case.config.pwl_segments)?;
            for (bi, b) in net.buses.iter().enumerate() {
                let load = b.base_load_profile[t - 1] * sc.load_mult[t - 1];
                let pv_gen: f64 = net
                    .pvs
                    .iter()
                    .filter(|p| p.bus == b.id)
                    .map(|p| p.profile[t - 1] * sc.pv_mult[t - 1])
                    .sum();
                let mut injections: Vec<(ColId, f64)> = Vec::new();
                if b.id == net.root_id() {
                    injections.push((p_e[t - 1], 1.0));
                }
                for (di, d) in net.dgs.iter().enumerate() {
                    if d.bus == b.id {
                        injections.push((dg_cols[di][t - 1], 1.0));
                    }
                }
                if let Some(col) = il_cols[bi][t - 1] {
                    injections.push((col, 1.0));
                }
                for mgb in &mgs {
                    if mgb.attached_bus == b.id {
                        let k = mgb.lp.var(super::ll::LlFamily::Exchange, t);
                        injections.push((mgb.primal_cols[k], -1.0));
                    }
                }
                emit_bus_balance(&mut m, net, &block, b.id, &injections, load - pv_gen);
            }
            flow.push(block);
        }
        // Retail revenue on the served base load enters as a constant; the
        // interrupted part is subtracted through the IL columns above.
        let mut retail_const = 0.0;
        for t in 1..=t_max {
            let total: f64 = net
                .buses
                .iter()
                .map(|b| b.base_load_profile[t - 1] * sc.load_mult[t - 1])
                .sum();
            retail_const += market.retail_price[t - 1] * total;
        }
        m.obj_offset += pi * retail_const;

        scenarios.push(ScenarioBlock {
            s,
            probability: pi,
            flow,
            dg_cols,
            il_cols,
        });
    }

    // --- Flexibility coupling --------------------------------------------
    if flex {
        for t in 1..=t_max {
            if t == 1 {
                if let Some(p0) = case.config.initial_purchase {
                    m.add_row(
                        "flexp_up_t1".to_string(),
                        Sense::Le,
                        p0,
                        &[(p_e[0], 1.0), (delta_f[0], -1.0)],
                    );
                    m.add_row(
                        "flexp_dn_t1".to_string(),
                        Sense::Le,
                        -p0,
                        &[(p_e[0], -1.0), (delta_f[0], -1.0)],
                    );
                }
            } else {
                m.add_row(
                    format!("flexp_up_t{t}"),
                    Sense::Le,
                    0.0,
                    &[(p_e[t - 1], 1.0), (p_e[t - 2], -1.0), (delta_f[t - 1], -1.0)],
                );
                m.add_row(
                    format!("flexp_dn_t{t}"),
                    Sense::Le,
                    0.0,
                    &[(p_e[t - 1], -1.0), (p_e[t - 2], 1.0), (delta_f[t - 1], -1.0)],
                );
            }
            // Aggregate microgrid ramp within the same allowance.
            let mut up: Vec<(ColId, f64)> = Vec::new();
            for mgb in &mgs {
                let k = mgb.lp.var(super::ll::LlFamily::ExchangeRamp, t);
                up.push((mgb.primal_cols[k], 1.0));
            }
            if !up.is_empty() {
                let mut dn: Vec<(ColId, f64)> = up.iter().map(|&(c, v)| (c, -v)).collect();
                up.push((delta_f[t - 1], -1.0));
                dn.push((delta_f[t - 1], -1.0));
                m.add_row(format!("flexm_up_t{t}"), Sense::Le, 0.0, &up);
                m.add_row(format!("flexm_dn_t{t}"), Sense::Le, 0.0, &dn);
            }
        }
    }

    m.validate()?;
    Ok(CompiledModel {
        milp: m,
        horizon: t_max,
        p_e,
        rho,
        delta_f,
        mgs,
        scenarios,
    })
}

impl CompiledModel {
    /// Feasible-point construction for warm-starting the search: fix the
    /// local prices, solve each microgrid LP directly, read complementarity
    /// binaries off its slacks, then fill in the remaining (purely
    /// upper-level) variables by one LP solve with everything else pinned.
    pub fn incumbent_from_prices(&self, prices: &[f64]) -> Result<Option<Vec<f64>>, CoreError> {
        let n = self.milp.n_cols();
        let mut lo: Vec<f64> = self.milp.cols.iter().map(|c| c.lower).collect();
        let mut hi: Vec<f64> = self.milp.cols.iter().map(|c| c.upper).collect();
        let pin = |col: ColId, v: f64, lo: &mut Vec<f64>, hi: &mut Vec<f64>| {
            lo[col.0] = v;
            hi[col.0] = v;
        };
        for (t, &col) in self.rho.iter().enumerate() {
            pin(col, prices[t], &mut lo, &mut hi);
        }
        for mgb in &self.mgs {
            let sol = mgb.lp.solve_direct(prices)?;
            for (k, &col) in mgb.primal_cols.iter().enumerate() {
                pin(col, sol.primal[k], &mut lo, &mut hi);
            }
            for (r, &col) in mgb.nu_cols.iter().enumerate() {
                pin(col, sol.nu[r], &mut lo, &mut hi);
            }
            for (r, &col) in mgb.mu_cols.iter().enumerate() {
                pin(col, sol.mu[r], &mut lo, &mut hi);
            }
            for (r, &col) in mgb.u_cols.iter().enumerate() {
                let u = if sol.slack[r] <= 1e-7 { 1.0 } else { 0.0 };
                pin(col, u, &mut lo, &mut hi);
            }
        }
        let _ = n;
        let sol = solve_lp_with_bounds(&self.milp, &lo, &hi);
        if sol.status == SolveStatus::Optimal && self.milp.max_violation(&sol.values) <= 1e-6 {
            Ok(Some(sol.values))
        } else {
            Ok(None)
        }
    }

    /// Post-solve big-M audit: names of pairs whose slack or dual sits within
    /// `tol` of its big-M (a sign the disjunction may have been truncated).
    pub fn big_m_warnings(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let activities = self.milp.row_activities(values);
        for mgb in &self.mgs {
            for (r, row) in mgb.lp.ineq_rows.iter().enumerate() {
                let slack = row.rhs - activities[mgb.ineq_row_ids[r].0];
                let dual = values[mgb.mu_cols[r].0];
                if slack >= mgb.m_primal[r] - tol {
                    out.push(format!("pair {}: slack {slack} at big-M {}", row.name, mgb.m_primal[r]));
                }
                if dual >= mgb.m_dual[r] - tol {
                    out.push(format!("pair {}: dual {dual} at big-M {}", row.name, mgb.m_dual[r]));
                }
            }
        }
        out
    }

    /// Human-readable audit of the KKT blocks: one line per stationarity row
    /// and one per complementarity pair.
    pub fn audit_text(&self) -> String {
        let mut out = String::new();
        for mgb in &self.mgs {
            let _ = writeln!(out, "# microgrid {}", mgb.mg_id);
            for st in &mgb.kkt.stationarity {
                let mut line = format!("stationarity {}:", mgb.lp.vars[st.var].name);
                if let Some(t) = st.price_hour {
                    let _ = write!(line, " rho_t{t}");
                }
                if st.cost != 0.0 {
                    let _ = write!(line, " {:+}", st.cost);
                }
                for &(r, c) in &st.eq_terms {
                    let _ = write!(line, " {c:+}*nu[{}]", mgb.lp.eq_rows[r].name);
                }
                for &(r, c) in &st.ineq_terms {
                    let _ = write!(line, " {c:+}*mu[{}]", mgb.lp.ineq_rows[r].name);
                }
                let _ = writeln!(out, "{line} = 0");
            }
            for (r, row) in mgb.lp.ineq_rows.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "pair {}: slack<= {}*(1-u), mu<= {}*u",
                    row.name, mgb.m_primal[r], mgb.m_dual[r]
                );
            }
        }
        out
    }
}
