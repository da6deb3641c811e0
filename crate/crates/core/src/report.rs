//! Case orchestration and reporting: solve a case end to end, recompute the
//! profit and microgrid costs independently of the solver objective, derive
//! the purchased-power ramp profile, compare the with/without-flexibility
//! runs, and emit figure-ready CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::bilevel::{compile, CompiledModel, LlFamily};
use crate::error::CoreError;
use crate::milp::{solve_milp, MilpOptions, Solution, SolveStatus};
use crate::model::CaseInput;
use crate::scenario::ScenarioSet;

/// Hour-to-hour change of the wholesale purchase.
#[derive(Debug, Clone)]
pub struct RampProfile {
    /// ramp_t = P^E_t - P^E_{t-1}; entry 0 is defined only when the
    /// pre-horizon purchase is known and is 0.0 otherwise.
    pub ramps: Vec<f64>,
    /// Whether entry 0 carries a real ramp (pre-horizon purchase given).
    pub first_hour_defined: bool,
    pub max_up: f64,
    pub max_down: f64,
    /// Purchased ramp allowance per hour; empty when flexibility is off.
    pub delta_f: Vec<f64>,
}

impl RampProfile {
    fn from_series(purchased: &[f64], initial: Option<f64>, delta_f: Vec<f64>) -> Self {
        let t_max = purchased.len();
        let mut ramps = vec![0.0; t_max];
        if let Some(p0) = initial {
            ramps[0] = purchased[0] - p0;
        }
        for t in 1..t_max {
            ramps[t] = purchased[t] - purchased[t - 1];
        }
        let start = if initial.is_some() { 0 } else { 1 };
        let defined = &ramps[start.min(t_max)..];
        RampProfile {
            max_up: defined.iter().cloned().fold(0.0, f64::max),
            max_down: defined.iter().cloned().fold(0.0, f64::min),
            ramps,
            first_hour_defined: initial.is_some(),
            delta_f,
        }
    }
}

/// Per-scenario operation view.
#[derive(Debug, Clone)]
pub struct ScenarioView {
    pub s: usize,
    pub probability: f64,
    /// Disco-side DG dispatch summed over units, per hour.
    pub dg_series: Vec<f64>,
    /// Disco-side interrupted load summed over buses, per hour.
    pub il_series: Vec<f64>,
    /// MW summed over the horizon.
    pub dg_total: f64,
    pub il_total: f64,
    /// Worst bus-balance residual across the network.
    pub max_balance_residual: f64,
}

/// Per-microgrid operation view (the lower level is scenario-independent).
#[derive(Debug, Clone)]
pub struct MgView {
    pub mg_id: usize,
    /// Operation cost at the solved local prices.
    pub cost: f64,
    pub exchange: Vec<f64>,
    pub exchange_ramp: Vec<f64>,
    pub dg: Vec<f64>,
    pub il: Vec<f64>,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    pub energy: Vec<f64>,
    pub demand: Vec<f64>,
    pub pv: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub horizon: usize,
    pub flexibility_enabled: bool,
    pub status: SolveStatus,
    /// Solver objective (includes the constant retail term).
    pub objective: f64,
    /// Profit recomputed from primal values: retail + local-market revenue
    /// minus wholesale, DG, IL and ramp-penalty costs.
    pub profit: f64,
    pub purchased: Vec<f64>,
    pub total_purchase: f64,
    pub lem_price: Vec<f64>,
    pub ramp: RampProfile,
    pub penalty_cost: f64,
    pub mgs: Vec<MgView>,
    pub scenarios: Vec<ScenarioView>,
    /// Probability-weighted totals over scenarios.
    pub expected_dg_total: f64,
    pub expected_il_total: f64,
    pub modal_scenario: usize,
    pub nodes: u64,
    pub simplex_iterations: u64,
    pub warnings: Vec<String>,
}

/// How `run_case` obtains a solution for the compiled model.
pub enum SolveSource {
    /// Embedded branch-and-bound, optionally warm-started from a
    /// fixed-price heuristic.
    Embedded { options: MilpOptions, warm_start: bool },
    /// Pre-computed values imported from an external solver.
    External(Solution),
}

impl Default for SolveSource {
    fn default() -> Self {
        SolveSource::Embedded {
            options: MilpOptions::default(),
            warm_start: true,
        }
    }
}

/// Compile, solve, and report one case.
pub fn run_case(
    case: &CaseInput,
    scen: &ScenarioSet,
    source: SolveSource,
) -> Result<CaseReport, CoreError> {
    let cm = compile(case, scen).map_err(|e| stage("compile", e))?;
    let sol = match source {
        SolveSource::Embedded {
            mut options,
            warm_start,
        } => {
            if warm_start && options.incumbent_hint.is_none() {
                // Posting the price cap is feasible and usually close.
                let cap = vec![case.market.lem_price_cap; cm.horizon];
                options.incumbent_hint = cm
                    .incumbent_from_prices(&cap)
                    .map_err(|e| stage("warm start", e))?;
            }
            solve_milp(&cm.milp, &options)
        }
        SolveSource::External(sol) => sol,
    };
    build_report(case, scen, &cm, &sol)
}

fn stage(name: &str, e: CoreError) -> CoreError {
    CoreError::Solver(format!("{name}: {e}"))
}

/// Assemble the report from a solved model, asserting the cross-checks the
/// report is trusted for: profit recomputation within 1e-4 of the solver
/// objective, microgrid costs within 1e-4 of a direct re-solve, and ramp
/// allowances respected.
pub fn build_report(
    case: &CaseInput,
    scen: &ScenarioSet,
    cm: &CompiledModel,
    sol: &Solution,
) -> Result<CaseReport, CoreError> {
    match sol.status {
        SolveStatus::Optimal | SolveStatus::Limit => {}
        SolveStatus::Infeasible => {
            return Err(CoreError::Solver("case is infeasible".into()))
        }
        SolveStatus::Unbounded => {
            return Err(CoreError::Solver("case is unbounded".into()))
        }
    }
    let t_max = cm.horizon;
    let v = &sol.values;
    let market = &case.market;
    let mut warnings = sol.stats.warnings.clone();

    let purchased: Vec<f64> = cm.p_e.iter().map(|c| v[c.0]).collect();
    let lem_price: Vec<f64> = cm.rho.iter().map(|c| v[c.0]).collect();
    let delta_f: Vec<f64> = cm.delta_f.iter().map(|c| v[c.0]).collect();
    let flex = !cm.delta_f.is_empty();
    let ramp = RampProfile::from_series(&purchased, case.config.initial_purchase, delta_f);

    // Microgrid views with the cost cross-check.
    let mut mgs = Vec::with_capacity(cm.mgs.len());
    for (mgb, mg) in cm.mgs.iter().zip(&case.microgrids) {
        let primal: Vec<f64> = mgb.primal_cols.iter().map(|c| v[c.0]).collect();
        let costs = mgb.lp.costs_at(&lem_price);
        let cost: f64 = costs.iter().zip(&primal).map(|(c, x)| c * x).sum();
        if sol.status == SolveStatus::Optimal {
            let direct = mgb.lp.solve_direct(&lem_price)?;
            if (direct.cost - cost).abs() > 1e-4 {
                return Err(CoreError::Solver(format!(
                    "microgrid {} cost {cost} differs from its own optimum {} at the solved prices",
                    mgb.mg_id, direct.cost
                )));
            }
        }
        let series = |f: LlFamily| -> Vec<f64> {
            (1..=t_max).map(|t| primal[mgb.lp.var(f, t)]).collect()
        };
        mgs.push(MgView {
            mg_id: mgb.mg_id,
            cost,
            exchange: series(LlFamily::Exchange),
            exchange_ramp: series(LlFamily::ExchangeRamp),
            dg: series(LlFamily::Dg),
            il: series(LlFamily::Il),
            charge: series(LlFamily::Charge),
            discharge: series(LlFamily::Discharge),
            energy: series(LlFamily::Energy),
            demand: mg.demand_profile.clone(),
            pv: mg.pv_profile.clone(),
        });
    }

    // Scenario views and the balance-residual audit.
    let net = &case.network;
    let mut scenarios = Vec::with_capacity(cm.scenarios.len());
    let mut expected_dg_total = 0.0;
    let mut expected_il_total = 0.0;
    for sb in &cm.scenarios {
        let dg_series: Vec<f64> = (0..t_max)
            .map(|ti| sb.dg_cols.iter().map(|u| v[u[ti].0]).sum())
            .collect();
        let il_series: Vec<f64> = (0..t_max)
            .map(|ti| {
                sb.il_cols
                    .iter()
                    .filter_map(|b| b[ti].map(|c| v[c.0]))
                    .sum()
            })
            .collect();
        let mut resid = 0.0f64;
        for (r, row) in cm.milp.rows.iter().enumerate() {
            if row.name.starts_with("bal_") && row.name.ends_with(&format!("_s{}", sb.s)) {
                resid = resid.max((sol.row_activity[r] - row.rhs).abs());
            }
        }
        let dg_total: f64 = dg_series.iter().sum();
        let il_total: f64 = il_series.iter().sum();
        expected_dg_total += sb.probability * dg_total;
        expected_il_total += sb.probability * il_total;
        scenarios.push(ScenarioView {
            s: sb.s,
            probability: sb.probability,
            dg_series,
            il_series,
            dg_total,
            il_total,
            max_balance_residual: resid,
        });
    }

    // Independent profit recomputation: wholesale and penalty costs plus the
    // primal (bilinear) local-market revenue, then the per-scenario retail,
    // DG and IL terms.
    let mut profit = 0.0;
    for t in 0..t_max {
        profit -= market.wem_price[t] * purchased[t];
        for mgv in &mgs {
            profit += lem_price[t] * mgv.exchange[t];
        }
        if flex {
            profit -= market.penalty_price[t] * ramp.delta_f[t];
        }
    }
    let penalty_cost: f64 = if flex {
        (0..t_max)
            .map(|t| market.penalty_price[t] * ramp.delta_f[t])
            .sum()
    } else {
        0.0
    };
    for ((sv, sc), sb) in scenarios.iter().zip(&scen.scenarios).zip(&cm.scenarios) {
        let mut part = 0.0;
        for t in 0..t_max {
            let served: f64 = net
                .buses
                .iter()
                .map(|b| b.base_load_profile[t] * sc.load_mult[t])
                .sum::<f64>()
                - sv.il_series[t];
            part += market.retail_price[t] * served;
            part -= market.disco_il_bid[t] * sv.il_series[t];
            for (di, d) in net.dgs.iter().enumerate() {
                part -= d.unit.bid * v[sb.dg_cols[di][t].0];
            }
        }
        profit += sv.probability * part;
    }

    if sol.status == SolveStatus::Optimal && (profit - sol.objective).abs() > 1e-4 {
        return Err(CoreError::Solver(format!(
            "recomputed profit {profit} differs from solver objective {}",
            sol.objective
        )));
    }
    if flex {
        for t in 0..t_max {
            if t == 0 && !ramp.first_hour_defined {
                continue;
            }
            if ramp.ramps[t].abs() > ramp.delta_f[t] + 1e-6 {
                warnings.push(format!(
                    "purchased ramp {} exceeds allowance {} in hour {}",
                    ramp.ramps[t],
                    ramp.delta_f[t],
                    t + 1
                ));
            }
        }
    }
    warnings.extend(cm.big_m_warnings(v, 1e-6));

    Ok(CaseReport {
        horizon: t_max,
        flexibility_enabled: flex,
        status: sol.status,
        objective: sol.objective,
        profit,
        total_purchase: purchased.iter().sum(),
        purchased,
        lem_price,
        ramp,
        penalty_cost,
        mgs,
        scenarios,
        expected_dg_total,
        expected_il_total,
        modal_scenario: scen.modal_index(),
        nodes: sol.stats.nodes,
        simplex_iterations: sol.stats.simplex_iterations,
        warnings,
    })
}

/// Deltas between a baseline (no flexibility) and a flexibility run.
#[derive(Debug, Clone)]
pub struct CaseComparison {
    pub max_up: (f64, f64),
    pub max_down: (f64, f64),
    pub total_purchase: (f64, f64),
    pub profit: (f64, f64),
    /// profit_baseline - profit_flex: what the Disco forgoes by flattening
    /// its purchase profile.
    pub lost_revenue: f64,
    pub mg_costs: Vec<(usize, f64, f64)>,
    pub expected_il_total: (f64, f64),
    pub expected_dg_total: (f64, f64),
}

pub fn compare_cases(
    baseline: &CaseReport,
    flex: &CaseReport,
) -> Result<CaseComparison, CoreError> {
    if baseline.horizon != flex.horizon {
        return Err(CoreError::Validation(format!(
            "cannot compare horizons {} and {}",
            baseline.horizon, flex.horizon
        )));
    }
    let mut mg_costs = Vec::new();
    for (a, b) in baseline.mgs.iter().zip(&flex.mgs) {
        if a.mg_id != b.mg_id {
            return Err(CoreError::Validation(
                "cannot compare reports over different microgrid sets".into(),
            ));
        }
        mg_costs.push((a.mg_id, a.cost, b.cost));
    }
    Ok(CaseComparison {
        max_up: (baseline.ramp.max_up, flex.ramp.max_up),
        max_down: (baseline.ramp.max_down, flex.ramp.max_down),
        total_purchase: (baseline.total_purchase, flex.total_purchase),
        profit: (baseline.profit, flex.profit),
        lost_revenue: baseline.profit - flex.profit,
        mg_costs,
        expected_il_total: (baseline.expected_il_total, flex.expected_il_total),
        expected_dg_total: (baseline.expected_dg_total, flex.expected_dg_total),
    })
}

impl CaseComparison {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "metric, baseline, flex, delta");
        let mut line = |name: &str, a: f64, b: f64| {
            let _ = writeln!(out, "{name}, {a:.4}, {b:.4}, {:.4}", b - a);
        };
        line("max_ramp_up", self.max_up.0, self.max_up.1);
        line("max_ramp_down", self.max_down.0, self.max_down.1);
        line(
            "total_purchase",
            self.total_purchase.0,
            self.total_purchase.1,
        );
        line("profit", self.profit.0, self.profit.1);
        line(
            "expected_il_total",
            self.expected_il_total.0,
            self.expected_il_total.1,
        );
        line(
            "expected_dg_total",
            self.expected_dg_total.0,
            self.expected_dg_total.1,
        );
        for &(id, a, b) in &self.mg_costs {
            let _ = writeln!(out, "mg{id}_cost, {a:.4}, {b:.4}, {:.4}", b - a);
        }
        let _ = writeln!(out, "lost_revenue, , , {:.4}", self.lost_revenue);
        out
    }
}

fn csv_num(v: f64) -> String {
    format!("{:.6}", v)
}

/// One CSV per figure analogue, each with exactly `horizon` data rows:
/// purchased-power series, ramp series, microgrid exchange/ramp series,
/// demand-supply balance stacks (modal scenario), and the local price table.
pub fn emit_plot_data(report: &CaseReport, outdir: &Path) -> Result<Vec<String>, CoreError> {
    fs::create_dir_all(outdir)
        .map_err(|e| CoreError::Io(format!("creating {}: {e}", outdir.display())))?;
    let t_max = report.horizon;
    let modal = &report.scenarios[report.modal_scenario];
    let mut written = Vec::new();
    let mut emit = |name: &str, text: String| -> Result<(), CoreError> {
        let path = outdir.join(name);
        fs::write(&path, text)
            .map_err(|e| CoreError::Io(format!("writing {}: {e}", path.display())))?;
        written.push(name.to_string());
        Ok(())
    };

    let mut s = String::from("hour,purchased_mw\n");
    for t in 0..t_max {
        let _ = writeln!(s, "{},{}", t + 1, csv_num(report.purchased[t]));
    }
    emit("purchased_power.csv", s)?;

    let mut s = String::from("hour,ramp_mw,allowance_mw\n");
    for t in 0..t_max {
        let allowance = report.ramp.delta_f.get(t).copied().unwrap_or(f64::NAN);
        let ramp = if t == 0 && !report.ramp.first_hour_defined {
            f64::NAN
        } else {
            report.ramp.ramps[t]
        };
        let _ = writeln!(s, "{},{},{}", t + 1, csv_num_or_blank(ramp), csv_num_or_blank(allowance));
    }
    emit("purchase_ramp.csv", s)?;

    let mut s = String::from("hour");
    for mgv in &report.mgs {
        let _ = write!(s, ",mg{0}_exchange_mw,mg{0}_ramp_mw", mgv.mg_id);
    }
    s.push_str(",allowance_mw\n");
    for t in 0..t_max {
        let _ = write!(s, "{}", t + 1);
        for mgv in &report.mgs {
            let _ = write!(
                s,
                ",{},{}",
                csv_num(mgv.exchange[t]),
                csv_num(mgv.exchange_ramp[t])
            );
        }
        let allowance = report.ramp.delta_f.get(t).copied().unwrap_or(f64::NAN);
        let _ = writeln!(s, ",{}", csv_num_or_blank(allowance));
    }
    emit("mg_exchange.csv", s)?;

    // Demand-supply stacks: microgrid columns plus the Disco-side totals of
    // the modal scenario. Per microgrid: exchange + dg + discharge + il + pv
    // - charge - demand = residual.
    let mut s = String::from("hour");
    for mgv in &report.mgs {
        let _ = write!(
            s,
            ",mg{0}_exchange,mg{0}_dg,mg{0}_discharge,mg{0}_charge,mg{0}_il,mg{0}_pv,mg{0}_demand,mg{0}_residual",
            mgv.mg_id
        );
    }
    s.push_str(",disco_dg,disco_il\n");
    for t in 0..t_max {
        let _ = write!(s, "{}", t + 1);
        for mgv in &report.mgs {
            let residual = mgv.exchange[t] + mgv.dg[t] + mgv.discharge[t] + mgv.il[t]
                + mgv.pv[t]
                - mgv.charge[t]
                - mgv.demand[t];
            let _ = write!(
                s,
                ",{},{},{},{},{},{},{},{}",
                csv_num(mgv.exchange[t]),
                csv_num(mgv.dg[t]),
                csv_num(mgv.discharge[t]),
                csv_num(mgv.charge[t]),
                csv_num(mgv.il[t]),
                csv_num(mgv.pv[t]),
                csv_num(mgv.demand[t]),
                csv_num(residual)
            );
        }
        let _ = writeln!(
            s,
            ",{},{}",
            csv_num(modal.dg_series[t]),
            csv_num(modal.il_series[t])
        );
    }
    emit("balance.csv", s)?;

    let mut s = String::from("hour,lem_price\n");
    for t in 0..t_max {
        let _ = writeln!(s, "{},{}", t + 1, csv_num(report.lem_price[t]));
    }
    emit("lem_price.csv", s)?;

    Ok(written)
}

fn csv_num_or_blank(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        csv_num(v)
    }
}

impl CaseReport {
    /// Short human-readable summary for the CLI.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "status: {:?} ({} nodes, {} simplex iterations)",
            self.status, self.nodes, self.simplex_iterations
        );
        let _ = writeln!(out, "flexibility: {}", self.flexibility_enabled);
        let _ = writeln!(out, "profit: {:.4}", self.profit);
        let _ = writeln!(out, "total purchase: {:.4} MWh", self.total_purchase);
        let _ = writeln!(
            out,
            "purchase ramps: max up {:.4}, max down {:.4} MW/h",
            self.ramp.max_up, self.ramp.max_down
        );
        if self.flexibility_enabled {
            let _ = writeln!(out, "ramp penalty cost: {:.4}", self.penalty_cost);
        }
        for mgv in &self.mgs {
            let _ = writeln!(out, "mg{} cost: {:.4}", mgv.mg_id, mgv.cost);
        }
        let _ = writeln!(
            out,
            "expected disco DG: {:.4} MW, expected disco IL: {:.4} MW",
            self.expected_dg_total, self.expected_il_total
        );
        let _ = writeln!(out, "modal scenario: {}", self.modal_scenario + 1);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Bus, CaseConfig, CaseInput, DgUnit, MarketData, Microgrid, NetworkModel, StorageUnit,
    };

    fn toy_case(t: usize, flexibility: bool) -> CaseInput {
        let network = NetworkModel::new(
            vec![Bus {
                id: 1,
                v_min: 11.5,
                v_max: 13.5,
                base_load_profile: vec![0.0; t],
                has_mg: true,
                has_dg: false,
                has_pv: false,
            }],
            vec![],
            vec![],
            vec![],
        )
        .unwrap();
        let mg = Microgrid {
            id: 1,
            attached_bus: 1,
            demand_profile: vec![1.0; t],
            pv_profile: vec![0.0; t],
            dg: DgUnit {
                name: "mgdg".into(),
                p_min: 0.0,
                p_max: 0.5,
                ramp_up: 0.5,
                ramp_down: 0.5,
                p_initial: 0.0,
                bid: 35.0,
            },
            storage: StorageUnit {
                e_min: 0.0,
                e_max: 0.0,
                e_initial: 0.0,
                p_rate_max: 1.0,
                eta_ch: 1.0,
                eta_dch: 1.0,
            },
            il_cap_fraction: 0.0,
            il_bid: vec![28.0; t],
            exchange_max: 5.0,
        };
        CaseInput {
            network,
            microgrids: vec![mg],
            market: MarketData {
                wem_price: vec![20.0; t],
                penalty_price: vec![28.0; t],
                retail_price: vec![24.0; t],
                disco_il_bid: vec![30.0; t],
                lem_price_cap: 60.0,
                wem_purchase_cap: 10.0,
                disco_il_cap: 1.0,
            },
            config: CaseConfig {
                horizon_t: t,
                flexibility_enabled: flexibility,
                ..CaseConfig::default()
            },
        }
    }

    #[test]
    fn toy_case_report_cross_checks_hold() {
        let case = toy_case(1, false);
        let scen = ScenarioSet::deterministic(1);
        let report = run_case(&case, &scen, SolveSource::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        assert!((report.profit - 20.0).abs() < 1e-5, "profit {}", report.profit);
        assert!((report.lem_price[0] - 60.0).abs() < 1e-5);
        assert!((report.mgs[0].exchange[0] - 0.5).abs() < 1e-5);
        assert!(report.scenarios[0].max_balance_residual < 1e-6);
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    }

    #[test]
    fn zero_demand_case_reports_zero_everything() {
        let mut case = toy_case(1, false);
        case.microgrids[0].demand_profile = vec![0.0];
        let scen = ScenarioSet::deterministic(1);
        let report = run_case(&case, &scen, SolveSource::default()).unwrap();
        assert!(report.total_purchase.abs() < 1e-9);
        assert!(report.profit.abs() < 1e-6, "profit {}", report.profit);
    }

    #[test]
    fn identical_reports_compare_to_zero_deltas() {
        let case = toy_case(2, false);
        let scen = ScenarioSet::deterministic(2);
        let report = run_case(&case, &scen, SolveSource::default()).unwrap();
        let cmp = compare_cases(&report, &report).unwrap();
        assert_eq!(cmp.lost_revenue, 0.0);
        assert_eq!(cmp.profit.0, cmp.profit.1);
        assert_eq!(cmp.max_up.0, cmp.max_up.1);
    }

    #[test]
    fn flexibility_run_never_beats_baseline_and_flattens() {
        let mut flex_case = toy_case(2, true);
        flex_case.config.initial_purchase = Some(0.0);
        let mut base_case = flex_case.clone();
        base_case.config.flexibility_enabled = false;
        let scen = ScenarioSet::deterministic(2);
        let base = run_case(&base_case, &scen, SolveSource::default()).unwrap();
        let flex = run_case(&flex_case, &scen, SolveSource::default()).unwrap();
        let cmp = compare_cases(&base, &flex).unwrap();
        assert!(cmp.lost_revenue >= -1e-6, "lost revenue {}", cmp.lost_revenue);
        assert!(flex.ramp.max_up <= base.ramp.max_up + 1e-6);
    }

    #[test]
    fn plot_data_has_five_files_with_horizon_rows() {
        let case = toy_case(3, false);
        let scen = ScenarioSet::deterministic(3);
        let report = run_case(&case, &scen, SolveSource::default()).unwrap();
        let dir = std::env::temp_dir().join(format!("plots_{}", std::process::id()));
        let files = emit_plot_data(&report, &dir).unwrap();
        assert_eq!(files.len(), 5);
        for f in &files {
            let text = fs::read_to_string(dir.join(f)).unwrap();
            assert_eq!(text.lines().count(), 4, "{f} should have header + 3 rows");
        }
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn mismatched_horizons_refuse_to_compare() {
        let scen1 = ScenarioSet::deterministic(1);
        let scen2 = ScenarioSet::deterministic(2);
        let a = run_case(&toy_case(1, false), &scen1, SolveSource::default()).unwrap();
        let b = run_case(&toy_case(2, false), &scen2, SolveSource::default()).unwrap();
        assert!(compare_cases(&a, &b).is_err());
    }
}
