//! Bounded-variable primal simplex with a dense basis inverse.
//!
//! Works on the minimization form internally; `Maximize` models are negated
//! on the way in and restored on the way out. Deterministic pivoting: Dantzig
//! pricing with a Bland fallback once degenerate cycling is suspected.

use std::time::Instant;

use super::model::{MilpModel, ObjSense, Sense};
use super::solution::{SolveStats, SolveStatus, Solution};

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const REINVERT_EVERY: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    FreeZero,
}

struct Tableau {
    m: usize,
    /// Total variables: structural + one logical per row.
    n_total: usize,
    n_struct: usize,
    /// Column-wise sparse structural matrix.
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    binv: Vec<f64>,
    iterations: u64,
    warnings: Vec<String>,
}

enum StepOutcome {
    Pivoted,
    BoundFlip,
    Unbounded,
}

impl Tableau {
    fn new(model: &MilpModel, relax_integrality: bool) -> Self {
        let m = model.n_rows();
        let n_struct = model.n_cols();
        let n_total = n_struct + m;
        let sign = match model.obj_sense {
            ObjSense::Minimize => 1.0,
            ObjSense::Maximize => -1.0,
        };
        let mut cols = vec![Vec::new(); n_struct];
        for (r, row) in model.rows.iter().enumerate() {
            for &(c, v) in &row.coeffs {
                cols[c.0].push((r, v));
            }
        }
        let mut lower = Vec::with_capacity(n_total);
        let mut upper = Vec::with_capacity(n_total);
        let mut cost = Vec::with_capacity(n_total);
        for c in &model.cols {
            let _ = relax_integrality; // binaries already carry [0, 1] bounds
            lower.push(c.lower);
            upper.push(c.upper);
            cost.push(sign * c.obj);
        }
        for row in &model.rows {
            // a'x + s = rhs
            let (lo, hi) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
            cost.push(0.0);
        }
        let rhs: Vec<f64> = model.rows.iter().map(|r| r.rhs).collect();

        let mut state = vec![VarState::AtLower; n_total];
        let mut x = vec![0.0; n_total];
        for j in 0..n_struct {
            let (lo, hi) = (lower[j], upper[j]);
            if lo.is_finite() {
                state[j] = VarState::AtLower;
                x[j] = lo;
            } else if hi.is_finite() {
                state[j] = VarState::AtUpper;
                x[j] = hi;
            } else {
                state[j] = VarState::FreeZero;
                x[j] = 0.0;
            }
        }
        let mut basis = Vec::with_capacity(m);
        for r in 0..m {
            let s = n_struct + r;
            state[s] = VarState::Basic;
            basis.push(s);
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let mut t = Tableau {
            m,
            n_total,
            n_struct,
            cols,
            lower,
            upper,
            cost,
            rhs,
            basis,
            state,
            x,
            binv,
            iterations: 0,
            warnings: Vec::new(),
        };
        t.recompute_basic_values();
        t
    }

    fn col_entries(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n_struct {
            self.cols[j].clone()
        } else {
            vec![(j - self.n_struct, 1.0)]
        }
    }

    /// alpha = B^-1 a_j
    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut alpha = vec![0.0; self.m];
        for (r, v) in self.col_entries(j) {
            let row_off = r; // binv column index
            for i in 0..self.m {
                alpha[i] += self.binv[i * self.m + row_off] * v;
            }
        }
        alpha
    }

    /// pi = w' B^-1 for an arbitrary weight vector over basic positions.
    fn btran(&self, w: &[f64]) -> Vec<f64> {
        let mut pi = vec![0.0; self.m];
        for i in 0..self.m {
            let wi = w[i];
            if wi != 0.0 {
                for k in 0..self.m {
                    pi[k] += wi * self.binv[i * self.m + k];
                }
            }
        }
        pi
    }

    fn dot_col(&self, pi: &[f64], j: usize) -> f64 {
        if j < self.n_struct {
            self.cols[j].iter().map(|&(r, v)| pi[r] * v).sum()
        } else {
            pi[j - self.n_struct]
        }
    }

    fn recompute_basic_values(&mut self) {
        // x_B = B^-1 (b - A_N x_N)
        let mut resid = self.rhs.clone();
        for j in 0..self.n_total {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                for (r, v) in self.col_entries(j) {
                    resid[r] -= v * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            let mut s = 0.0;
            for k in 0..self.m {
                s += self.binv[i * self.m + k] * resid[k];
            }
            self.x[self.basis[i]] = s;
        }
    }

    fn reinvert(&mut self) -> Result<(), String> {
        let m = self.m;
        // Gauss-Jordan on [B | I].
        let mut b = vec![0.0; m * m];
        for (i, &j) in self.basis.iter().enumerate() {
            for (r, v) in self.col_entries(j) {
                b[r * m + i] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for r in 0..m {
            inv[r * m + r] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = b[col * m + col].abs();
            for r in col + 1..m {
                let v = b[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < PIVOT_TOL {
                return Err(format!("singular basis during reinversion (col {col})"));
            }
            if piv != col {
                for k in 0..m {
                    b.swap(col * m + k, piv * m + k);
                    inv.swap(col * m + k, piv * m + k);
                }
            }
            let d = b[col * m + col];
            for k in 0..m {
                b[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = b[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            b[r * m + k] -= f * b[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.recompute_basic_values();
        Ok(())
    }

    /// Ratio test and pivot for entering variable `j` moving in `dir` (+-1).
    /// Returns the outcome; updates state, values and the basis inverse.
    /// Requires a bound-feasible point. In Bland mode, ratio ties leave the
    /// blocker with the lowest variable index (required for the anti-cycling
    /// guarantee).
    fn step(&mut self, j: usize, dir: f64, bland: bool) -> StepOutcome {
        let alpha = self.ftran(j);
        // Blocking step length.
        let mut limit = f64::INFINITY;
        let mut blocker: Option<(usize, f64)> = None; // (basic position, bound reached)
        for i in 0..self.m {
            let a = dir * alpha[i];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let bj = self.basis[i];
            let xb = self.x[bj];
            // Movement of the basic variable is -a per unit step.
            let target = if a > 0.0 {
                // Basic variable decreases towards its lower bound.
                if self.lower[bj].is_finite() {
                    self.lower[bj]
                } else {
                    continue;
                }
            } else {
                // Basic variable increases towards its upper bound.
                if self.upper[bj].is_finite() {
                    self.upper[bj]
                } else {
                    continue;
                }
            };
            let ratio = ((xb - target) / a).max(0.0);
            let take = if ratio < limit - 1e-12 {
                true
            } else if bland && ratio <= limit + 1e-12 {
                blocker.map_or(true, |(bi, _)| self.basis[i] < self.basis[bi])
            } else {
                false
            };
            if take {
                limit = limit.min(ratio);
                blocker = Some((i, target));
            }
        }
        // Entering variable's own opposite bound.
        let own_range = if dir > 0.0 {
            self.upper[j] - self.x[j]
        } else {
            self.x[j] - self.lower[j]
        };
        if own_range < limit {
            // Bound flip, no basis change.
            if !own_range.is_finite() {
                return StepOutcome::Unbounded;
            }
            let delta = dir * own_range;
            for i in 0..self.m {
                self.x[self.basis[i]] -= delta * alpha[i];
            }
            self.x[j] += delta;
            self.state[j] = if dir > 0.0 {
                VarState::AtUpper
            } else {
                VarState::AtLower
            };
            return StepOutcome::BoundFlip;
        }
        let (pos, target) = match blocker {
            Some(b) => b,
            None => return StepOutcome::Unbounded,
        };
        if alpha[pos].abs() < PIVOT_TOL {
            self.warnings
                .push(format!("pivot magnitude {} below 1e-10", alpha[pos].abs()));
        }
        let delta = dir * limit;
        for i in 0..self.m {
            self.x[self.basis[i]] -= delta * alpha[i];
        }
        self.x[j] += delta;
        let leaving = self.basis[pos];
        self.x[leaving] = target;
        self.state[leaving] = if target == self.lower[leaving] {
            VarState::AtLower
        } else {
            VarState::AtUpper
        };
        self.basis[pos] = j;
        self.state[j] = VarState::Basic;
        // Elementary update of B^-1: row `pos` becomes the pivot row.
        let m = self.m;
        let piv = alpha[pos];
        for k in 0..m {
            self.binv[pos * m + k] /= piv;
        }
        for i in 0..m {
            if i != pos && alpha[i] != 0.0 {
                let f = alpha[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[pos * m + k];
                }
            }
        }
        StepOutcome::Pivoted
    }

    /// Pick an entering variable for the objective vector `cost` given its
    /// pricing vector `pi`. Returns (var, direction). Bland mode takes the
    /// lowest eligible index.
    fn price(&self, pi: &[f64], cost: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (j, dir, score)
        for j in 0..self.n_total {
            // A fixed variable (lower == upper) can never move; at both
            // bounds at once, any reduced-cost sign is optimal for it.
            if self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let (s, candidates): (f64, &[f64]) = match self.state[j] {
                VarState::Basic => continue,
                VarState::AtLower => (self.dot_col(pi, j), &[1.0]),
                VarState::AtUpper => (self.dot_col(pi, j), &[-1.0]),
                VarState::FreeZero => (self.dot_col(pi, j), &[1.0, -1.0]),
            };
            for &dir in candidates {
                // Reduced-cost rate along +-dir.
                let rate = dir * (cost[j] - s);
                if rate < -OPT_TOL {
                    if bland {
                        return Some((j, dir));
                    }
                    let score = -rate;
                    if best.map_or(true, |(_, _, b)| score > b) {
                        best = Some((j, dir, score));
                    }
                }
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    /// Bounded simplex over a fixed objective from a bound-feasible point.
    fn optimize(&mut self, cost: &[f64], iter_limit: u64) -> SolveStatus {
        let mut degenerate_streak = 0u32;
        let mut since_reinvert = 0u64;
        loop {
            if self.iterations >= iter_limit {
                self.warnings.push(format!(
                    "iteration limit reached (degenerate streak {degenerate_streak})"
                ));
                return SolveStatus::Limit;
            }
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let pi = self.btran(&cb);
            let bland = degenerate_streak > 60;
            let (j, dir) = match self.price(&pi, cost, bland) {
                Some(e) => e,
                None => return SolveStatus::Optimal,
            };
            let before = self.x[j];
            self.iterations += 1;
            since_reinvert += 1;
            match self.step(j, dir, bland) {
                StepOutcome::Unbounded => return SolveStatus::Unbounded,
                StepOutcome::Pivoted | StepOutcome::BoundFlip => {
                    if (self.x[j] - before).abs() < 1e-12 {
                        degenerate_streak += 1;
                    } else {
                        degenerate_streak = 0;
                    }
                }
            }
            if since_reinvert >= REINVERT_EVERY {
                since_reinvert = 0;
                if let Err(e) = self.reinvert() {
                    self.warnings.push(e);
                    return SolveStatus::Limit;
                }
            }
        }
    }

    /// Phase 1 by bound relaxation: every out-of-bounds basic has its bounds
    /// widened to the interval [violated bound, current value] and is priced
    /// with a +-1 auxiliary cost pushing it back. Each auxiliary optimum
    /// either lets some relaxed variable re-tighten (finite progress) or
    /// certifies infeasibility: at an auxiliary optimum with every relaxed
    /// variable still strictly outside its true range, any feasible point
    /// would price strictly better, a contradiction.
    fn run(&mut self, iter_limit: u64) -> SolveStatus {
        let mut relaxed: Vec<(usize, f64, f64)> = Vec::new();
        let mut aux_cost = vec![0.0; self.n_total];
        for i in 0..self.m {
            let j = self.basis[i];
            if self.x[j] > self.upper[j] + FEAS_TOL {
                relaxed.push((j, self.lower[j], self.upper[j]));
                aux_cost[j] = 1.0;
                self.lower[j] = self.upper[j];
                self.upper[j] = self.x[j];
            } else if self.x[j] < self.lower[j] - FEAS_TOL {
                relaxed.push((j, self.lower[j], self.upper[j]));
                aux_cost[j] = -1.0;
                self.upper[j] = self.lower[j];
                self.lower[j] = self.x[j];
            }
        }
        while !relaxed.is_empty() {
            match self.optimize(&aux_cost.clone(), iter_limit) {
                SolveStatus::Optimal => {}
                SolveStatus::Limit => return SolveStatus::Limit,
                SolveStatus::Unbounded | SolveStatus::Infeasible => {
                    // The auxiliary objective is bounded on its box; a ray
                    // here is numerical trouble.
                    self.warnings
                        .push("unbounded auxiliary ray; treating as infeasible".into());
                    return SolveStatus::Infeasible;
                }
            }
            let mut progressed = false;
            let mut still: Vec<(usize, f64, f64)> = Vec::new();
            for (j, lo, hi) in relaxed {
                if self.x[j] >= lo - FEAS_TOL && self.x[j] <= hi + FEAS_TOL {
                    self.lower[j] = lo;
                    self.upper[j] = hi;
                    aux_cost[j] = 0.0;
                    if self.state[j] != VarState::Basic {
                        // A nonbasic variable must rest at one of its
                        // restored bounds.
                        self.state[j] = if (self.x[j] - lo).abs() <= (self.x[j] - hi).abs() {
                            self.x[j] = lo;
                            VarState::AtLower
                        } else {
                            self.x[j] = hi;
                            VarState::AtUpper
                        };
                    }
                    progressed = true;
                } else {
                    still.push((j, lo, hi));
                }
            }
            relaxed = still;
            if !progressed {
                return SolveStatus::Infeasible;
            }
            self.recompute_basic_values();
        }
        let real_cost = self.cost.clone();
        self.optimize(&real_cost, iter_limit)
    }
}

/// Solve the LP relaxation of `model` (integrality ignored).
pub fn solve_lp(model: &MilpModel) -> Solution {
    let start = Instant::now();
    let mut t = Tableau::new(model, true);
    let iter_limit = 2000 + 200 * (t.m as u64 + t.n_total as u64);
    let status = t.run(iter_limit);
    // Final accuracy pass.
    if status == SolveStatus::Optimal && t.m > 0 {
        if let Err(e) = t.reinvert() {
            t.warnings.push(e);
        }
    }
    let values: Vec<f64> = t.x[..t.n_struct].to_vec();
    let sign = match model.obj_sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };
    let duals = if status == SolveStatus::Optimal {
        let cb: Vec<f64> = t.basis.iter().map(|&j| t.cost[j]).collect();
        let pi = t.btran(&cb);
        Some(pi.iter().map(|&p| sign * p).collect())
    } else {
        None
    };
    let objective = if status == SolveStatus::Optimal || status == SolveStatus::Limit {
        model.objective_value(&values)
    } else {
        f64::NAN
    };
    Solution {
        status,
        row_activity: model.row_activities(&values),
        objective,
        values,
        duals,
        stats: SolveStats {
            simplex_iterations: t.iterations,
            nodes: 0,
            wall: start.elapsed(),
            final_gap: 0.0,
            warnings: t.warnings,
        },
    }
}

/// Solve an LP with per-column bound overrides (used by branch-and-bound).
pub fn solve_lp_with_bounds(
    model: &MilpModel,
    lo_over: &[f64],
    hi_over: &[f64],
) -> Solution {
    let mut m = model.clone();
    for (i, c) in m.cols.iter_mut().enumerate() {
        c.lower = lo_over[i];
        c.upper = hi_over[i];
        c.binary = false;
    }
    solve_lp(&m)
}
