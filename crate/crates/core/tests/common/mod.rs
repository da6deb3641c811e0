#![allow(dead_code)] // each test binary uses a different slice of this module

//! Shared oracles for the integration suites: exhaustive vertex enumeration
//! for small LPs, subset enumeration for small binary programs, an analytic
//! price-grid oracle for the two-bus leader/follower instance, and a
//! generic KKT-as-MILP builder for lower-level blocks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use flexgrid_core::bilevel::{derive_kkt, LowerLevelLp};
use flexgrid_core::milp::{ColId, MilpModel, ObjSense, Sense};
use flexgrid_core::model::{
    Bus, CaseConfig, CaseInput, DgUnit, MarketData, Microgrid, NetworkModel, StorageUnit,
};

/// Single-bus case around one microgrid: no feeder and no utility-side
/// units. With `bus_load` zero the operator's profit comes entirely from the
/// local energy trade; a positive load absorbs forced microgrid exports
/// (must-run generation above demand), which keeps arbitrary instances
/// feasible.
pub fn single_bus_case(mg: Microgrid, wem: Vec<f64>, lem_cap: f64, bus_load: f64) -> CaseInput {
    let t = wem.len();
    let network = NetworkModel::new(
        vec![Bus {
            id: 1,
            v_min: 11.5,
            v_max: 13.5,
            base_load_profile: vec![bus_load; t],
            has_mg: true,
            has_dg: false,
            has_pv: false,
        }],
        vec![],
        vec![],
        vec![],
    )
    .unwrap();
    let penalty: Vec<f64> = wem.iter().map(|w| 1.4 * w).collect();
    let retail: Vec<f64> = wem.iter().map(|w| 1.2 * w).collect();
    CaseInput {
        network,
        microgrids: vec![mg],
        market: MarketData {
            wem_price: wem,
            penalty_price: penalty,
            retail_price: retail,
            disco_il_bid: vec![30.0; t],
            lem_price_cap: lem_cap,
            wem_purchase_cap: 20.0,
            disco_il_cap: 1.0,
        },
        config: CaseConfig {
            horizon_t: t,
            flexibility_enabled: false,
            ..CaseConfig::default()
        },
    }
}

pub fn no_storage() -> StorageUnit {
    StorageUnit {
        e_min: 0.0,
        e_max: 0.0,
        e_initial: 0.0,
        p_rate_max: 0.0,
        eta_ch: 1.0,
        eta_dch: 1.0,
    }
}

/// Microgrid matching [`TwoHourOracle`]: generator only, no storage, no
/// curtailment, ramps wide enough that the hours decouple.
pub fn oracle_microgrid(demand: &[f64], dg_cap: f64, dg_bid: f64) -> Microgrid {
    let t = demand.len();
    Microgrid {
        id: 1,
        attached_bus: 1,
        demand_profile: demand.to_vec(),
        pv_profile: vec![0.0; t],
        dg: DgUnit {
            name: "oracle_dg".into(),
            p_min: 0.0,
            p_max: dg_cap,
            ramp_up: dg_cap,
            ramp_down: dg_cap,
            p_initial: 0.0,
            bid: dg_bid,
        },
        storage: no_storage(),
        il_cap_fraction: 0.0,
        il_bid: vec![28.0; t],
        exchange_max: 5.0,
    }
}

/// A small LP in `max c.x s.t. G x <= h, lo <= x <= hi` form with all-finite
/// bounds (so the feasible set is a polytope and vertex enumeration is
/// complete).
pub struct DenseLp {
    pub c: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DenseLp {
    pub fn random(seed: u64) -> DenseLp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=5);
        let m = rng.gen_range(1..=5);
        let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..0.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.5..5.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        // Right-hand sides biased to keep most instances feasible while
        // leaving a few infeasible ones in the mix.
        let h: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..4.0)).collect();
        DenseLp { c, g, h, lo, hi }
    }

    pub fn to_model(&self) -> MilpModel {
        let mut m = MilpModel::new("dense", ObjSense::Maximize);
        let cols: Vec<ColId> = self
            .c
            .iter()
            .enumerate()
            .map(|(j, &cj)| m.add_col(format!("x{j}"), self.lo[j], self.hi[j], cj))
            .collect();
        for (i, row) in self.g.iter().enumerate() {
            let coeffs: Vec<(ColId, f64)> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (cols[j], v))
                .collect();
            m.add_row(format!("r{i}"), Sense::Le, self.h[i], &coeffs);
        }
        m
    }

    fn feasible(&self, x: &[f64], tol: f64) -> bool {
        for j in 0..x.len() {
            if x[j] < self.lo[j] - tol || x[j] > self.hi[j] + tol {
                return false;
            }
        }
        for (row, &rhs) in self.g.iter().zip(&self.h) {
            let lhs: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            if lhs > rhs + tol {
                return false;
            }
        }
        true
    }

    /// Maximum of `c.x` over all vertices (n-subsets of active constraints),
    /// or None when no vertex is feasible (empty polytope).
    pub fn vertex_enumeration_optimum(&self) -> Option<f64> {
        let n = self.c.len();
        // Constraint list: m rows, then lower and upper bound per variable.
        let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
        for (row, &rhs) in self.g.iter().zip(&self.h) {
            cons.push((row.clone(), rhs));
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = -1.0;
            cons.push((e.clone(), -self.lo[j]));
            e[j] = 1.0;
            cons.push((e, self.hi[j]));
        }
        let mut best: Option<f64> = None;
        let k = cons.len();
        let mut pick = vec![0usize; n];
        enumerate_subsets(k, n, &mut pick, 0, 0, &mut |subset| {
            let a: Vec<Vec<f64>> = subset.iter().map(|&i| cons[i].0.clone()).collect();
            let b: Vec<f64> = subset.iter().map(|&i| cons[i].1).collect();
            if let Some(x) = solve_square(&a, &b) {
                if self.feasible(&x, 1e-7) {
                    let obj: f64 = self.c.iter().zip(&x).map(|(a, b)| a * b).sum();
                    best = Some(best.map_or(obj, |v: f64| v.max(obj)));
                }
            }
        });
        best
    }
}

fn enumerate_subsets(
    k: usize,
    n: usize,
    pick: &mut Vec<usize>,
    depth: usize,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == n {
        f(pick);
        return;
    }
    for i in start..k {
        pick[depth] = i;
        enumerate_subsets(k, n, pick, depth + 1, i + 1, f);
    }
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c2 in col..=n {
                        let v = m[col][c2];
                        m[r][c2] -= f * v;
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Random small binary maximization problem plus its exhaustive optimum.
pub struct BinaryProblem {
    pub model: MilpModel,
    values: Vec<f64>,
    weights: Vec<Vec<f64>>,
    caps: Vec<f64>,
}

impl BinaryProblem {
    pub fn random(seed: u64) -> BinaryProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a2);
        let n = rng.gen_range(3..=12);
        let m = rng.gen_range(1..=3);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..8.0)).collect();
        let weights: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0.0..4.0)).collect())
            .collect();
        let caps: Vec<f64> = weights
            .iter()
            .map(|w| {
                let total: f64 = w.iter().sum();
                rng.gen_range(0.2..0.9) * total
            })
            .collect();
        let mut model = MilpModel::new("binary", ObjSense::Maximize);
        let cols: Vec<ColId> = values
            .iter()
            .enumerate()
            .map(|(j, &v)| model.add_binary(format!("b{j}"), v))
            .collect();
        for (i, w) in weights.iter().enumerate() {
            let coeffs: Vec<(ColId, f64)> = w
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (cols[j], v))
                .collect();
            model.add_row(format!("cap{i}"), Sense::Le, caps[i], &coeffs);
        }
        BinaryProblem {
            model,
            values,
            weights,
            caps,
        }
    }

    pub fn enumerate_optimum(&self) -> f64 {
        let n = self.values.len();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << n) {
            let ok = self.weights.iter().zip(&self.caps).all(|(w, &cap)| {
                let used: f64 = (0..n)
                    .filter(|&j| mask & (1 << j) != 0)
                    .map(|j| w[j])
                    .sum();
                used <= cap + 1e-12
            });
            if ok {
                let val: f64 = (0..n)
                    .filter(|&j| mask & (1 << j) != 0)
                    .map(|j| self.values[j])
                    .sum();
                best = best.max(val);
            }
        }
        best
    }
}

/// Standalone KKT-feasibility MILP of one lower-level LP at fixed prices,
/// minimizing the true LL cost over the KKT set. Any KKT point is LL-optimal,
/// so the optimum must match a direct LP solve.
pub fn kkt_milp_at_prices(lp: &LowerLevelLp, prices: &[f64]) -> MilpModel {
    let kkt = derive_kkt(lp).unwrap();
    let costs = lp.costs_at(prices);
    let mut m = MilpModel::new("kkt_check", ObjSense::Minimize);
    let x: Vec<ColId> = lp
        .vars
        .iter()
        .zip(&costs)
        .map(|(v, &c)| m.add_col(v.name.clone(), f64::NEG_INFINITY, f64::INFINITY, c))
        .collect();
    let nu: Vec<ColId> = lp
        .eq_rows
        .iter()
        .map(|r| m.add_col(format!("nu_{}", r.name), f64::NEG_INFINITY, f64::INFINITY, 0.0))
        .collect();
    let mu: Vec<ColId> = lp
        .ineq_rows
        .iter()
        .map(|r| m.add_col(format!("mu_{}", r.name), 0.0, f64::INFINITY, 0.0))
        .collect();
    let u: Vec<ColId> = lp
        .ineq_rows
        .iter()
        .map(|r| m.add_binary(format!("u_{}", r.name), 0.0))
        .collect();
    for r in &lp.eq_rows {
        let coeffs: Vec<_> = r.coeffs.iter().map(|&(k, c)| (x[k], c)).collect();
        m.add_row(format!("pf_{}", r.name), Sense::Eq, r.rhs, &coeffs);
    }
    for r in &lp.ineq_rows {
        let coeffs: Vec<_> = r.coeffs.iter().map(|&(k, c)| (x[k], c)).collect();
        m.add_row(format!("pf_{}", r.name), Sense::Le, r.rhs, &coeffs);
    }
    for (st, &c) in kkt.stationarity.iter().zip(&costs) {
        let mut coeffs: Vec<_> = st.eq_terms.iter().map(|&(r, v)| (nu[r], v)).collect();
        coeffs.extend(st.ineq_terms.iter().map(|&(r, v)| (mu[r], v)));
        m.add_row(format!("stat_{}", lp.vars[st.var].name), Sense::Eq, -c, &coeffs);
    }
    for (r, row) in lp.ineq_rows.iter().enumerate() {
        let mut scale = row.rhs.abs().max(1.0);
        for &(k, _) in &row.coeffs {
            scale = scale.max(lp.vars[k].magnitude);
        }
        let mp = 2.0 * scale;
        let md = 10.0 * costs.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let mut coeffs: Vec<_> = row.coeffs.iter().map(|&(k, c)| (x[k], -c)).collect();
        coeffs.push((u[r], mp));
        m.add_row(format!("csl_{}", row.name), Sense::Le, mp - row.rhs, &coeffs);
        m.add_row(
            format!("cdu_{}", row.name),
            Sense::Le,
            0.0,
            &[(mu[r], 1.0), (u[r], -md)],
        );
    }
    m
}

/// Analytic two-hour leader/follower oracle for an hourly-separable
/// microgrid (no storage, no curtailment, DG ramps at least its capacity):
/// the follower serves demand d from its generator (cost `bid`, cap `cap`)
/// and the grid (cost rho); among follower optima at rho == bid, the leader
/// keeps the grid share (its margin on sales is positive at any rho above
/// the wholesale price).
pub struct TwoHourOracle {
    pub demand: [f64; 2],
    pub dg_cap: f64,
    pub dg_bid: f64,
    pub wem: [f64; 2],
    pub price_cap: f64,
}

impl TwoHourOracle {
    /// Leader profit at posted prices (optimistic follower response).
    pub fn profit_at(&self, rho: [f64; 2]) -> f64 {
        let mut profit = 0.0;
        for t in 0..2 {
            let pdg = if rho[t] > self.dg_bid {
                self.dg_cap.min(self.demand[t])
            } else {
                0.0
            };
            let pmg = self.demand[t] - pdg;
            profit += (rho[t] - self.wem[t]) * pmg;
        }
        profit
    }

    /// Exhaustive grid search over [0, cap]^2 at the given resolution.
    pub fn grid_optimum(&self, step: f64) -> f64 {
        let n = (self.price_cap / step).round() as usize;
        let mut best = f64::NEG_INFINITY;
        // The two hours decouple, so scan each price axis independently.
        for t in 0..2 {
            let mut hour_best = f64::NEG_INFINITY;
            for i in 0..=n {
                let rho = i as f64 * step;
                let pdg = if rho > self.dg_bid {
                    self.dg_cap.min(self.demand[t])
                } else {
                    0.0
                };
                let pmg = self.demand[t] - pdg;
                hour_best = hour_best.max((rho - self.wem[t]) * pmg);
            }
            if t == 0 {
                best = hour_best;
            } else {
                best += hour_best;
            }
        }
        best
    }
}
