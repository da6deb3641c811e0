//! Best-bound branch-and-bound over binary columns.
//!
//! Branching rule: most-fractional binary, ties broken by lowest column
//! index. Node order: best bound, ties FIFO. General integers are not
//! supported.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::model::{MilpModel, ObjSense};
use super::simplex::{solve_lp, solve_lp_with_bounds};
use super::solution::{SolveStats, SolveStatus, Solution};

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub node_limit: u64,
    /// Optional feasible starting point (full column vector). Rejected if it
    /// violates the model beyond 1e-6.
    pub incumbent_hint: Option<Vec<f64>>,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            abs_gap: 1e-6,
            rel_gap: 0.0,
            node_limit: 200_000,
            incumbent_hint: None,
        }
    }
}

struct Node {
    /// Parent LP bound in minimization orientation (lower bound on children).
    bound: f64,
    seq: u64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; best bound = smallest minimization bound.
        other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal)
            .then(other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn solve_milp(model: &MilpModel, opts: &MilpOptions) -> Solution {
    let start = Instant::now();
    let binaries: Vec<usize> = model
        .cols
        .iter()
        .enumerate()
        .filter(|(_, c)| c.binary)
        .map(|(i, _)| i)
        .collect();
    if binaries.is_empty() {
        return solve_lp(model);
    }
    let min_sign = match model.obj_sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };
    // Everything below works with minimization-oriented objective values.
    let to_min = |obj: f64| min_sign * obj;

    let mut warnings: Vec<String> = Vec::new();
    let mut incumbent: Option<(f64, Vec<f64>)> = None; // (min-oriented obj, values)
    if let Some(hint) = &opts.incumbent_hint {
        if hint.len() == model.n_cols() && model.max_violation(hint) <= 1e-6 {
            incumbent = Some((to_min(model.objective_value(hint)), hint.clone()));
        } else {
            warnings.push("incumbent hint rejected: infeasible or wrong length".into());
        }
    }

    let base_lo: Vec<f64> = model.cols.iter().map(|c| c.lower).collect();
    let base_hi: Vec<f64> = model.cols.iter().map(|c| c.upper).collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        lo: base_lo,
        hi: base_hi,
    });
    let mut seq = 1u64;
    let mut nodes = 0u64;
    let mut iters = 0u64;
    let mut best_bound = f64::NEG_INFINITY;
    let mut hit_limit = false;
    let mut root_infeasible = true;
    let mut root_unbounded = false;

    while let Some(node) = heap.pop() {
        best_bound = node.bound.max(best_bound);
        if let Some((inc, _)) = &incumbent {
            let gap_ok = node.bound >= inc - opts.abs_gap
                || (opts.rel_gap > 0.0
                    && node.bound >= inc - opts.rel_gap * inc.abs().max(1.0));
            if gap_ok {
                continue;
            }
        }
        if nodes >= opts.node_limit {
            hit_limit = true;
            break;
        }
        nodes += 1;
        let lp = solve_lp_with_bounds(model, &node.lo, &node.hi);
        iters += lp.stats.simplex_iterations;
        match lp.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                if nodes == 1 {
                    root_unbounded = true;
                    break;
                }
                continue;
            }
            SolveStatus::Limit => {
                warnings.push(format!(
                    "node LP hit iteration limit; node dropped ({})",
                    lp.stats.warnings.join("; ")
                ));
                hit_limit = true;
                continue;
            }
            SolveStatus::Optimal => {}
        }
        root_infeasible = false;
        let node_obj = to_min(lp.objective);
        if let Some((inc, _)) = &incumbent {
            if node_obj >= inc - opts.abs_gap {
                continue;
            }
        }
        // Most-fractional binary, ties by lowest column index.
        let mut branch: Option<(usize, f64)> = None;
        for &b in &binaries {
            let v = lp.values[b];
            let frac = (v - v.round()).abs();
            if frac > INT_TOL {
                let score = (v - 0.5).abs();
                if branch.map_or(true, |(_, s)| score < s - 1e-12) {
                    branch = Some((b, score));
                }
            }
        }
        match branch {
            None => {
                // Integral: candidate incumbent.
                let mut vals = lp.values.clone();
                for &b in &binaries {
                    vals[b] = vals[b].round();
                }
                let obj = to_min(model.objective_value(&vals));
                if incumbent.as_ref().map_or(true, |(inc, _)| obj < *inc) {
                    incumbent = Some((obj, vals));
                }
            }
            Some((b, _)) => {
                for fix in [0.0, 1.0] {
                    let mut lo = node.lo.clone();
                    let mut hi = node.hi.clone();
                    lo[b] = fix;
                    hi[b] = fix;
                    heap.push(Node {
                        bound: node_obj,
                        seq,
                        lo,
                        hi,
                    });
                    seq += 1;
                }
            }
        }
    }

    if root_unbounded {
        return Solution {
            status: SolveStatus::Unbounded,
            values: Vec::new(),
            objective: f64::NAN,
            row_activity: Vec::new(),
            duals: None,
            stats: SolveStats {
                simplex_iterations: iters,
                nodes,
                wall: start.elapsed(),
                final_gap: f64::INFINITY,
                warnings,
            },
        };
    }

    match incumbent {
        Some((inc_min, values)) => {
            let gap = if heap.is_empty() && !hit_limit {
                0.0
            } else {
                (inc_min - best_bound).max(0.0)
            };
            let status = if gap <= opts.abs_gap && !hit_limit {
                SolveStatus::Optimal
            } else if hit_limit {
                SolveStatus::Limit
            } else {
                SolveStatus::Optimal
            };
            Solution {
                status,
                row_activity: model.row_activities(&values),
                objective: min_sign * inc_min,
                values,
                duals: None,
                stats: SolveStats {
                    simplex_iterations: iters,
                    nodes,
                    wall: start.elapsed(),
                    final_gap: gap,
                    warnings,
                },
            }
        }
        None => {
            if hit_limit || !root_infeasible {
                Solution {
                    status: SolveStatus::Limit,
                    values: Vec::new(),
                    objective: f64::NAN,
                    row_activity: Vec::new(),
                    duals: None,
                    stats: SolveStats {
                        simplex_iterations: iters,
                        nodes,
                        wall: start.elapsed(),
                        final_gap: f64::INFINITY,
                        warnings,
                    },
                }
            } else {
                let mut s = Solution::infeasible();
                s.stats.nodes = nodes;
                s.stats.simplex_iterations = iters;
                s.stats.wall = start.elapsed();
                s.stats.warnings = warnings;
                s
            }
        }
    }
}
