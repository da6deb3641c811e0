use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration / node / time budget exhausted; best incumbent reported.
    Limit,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub simplex_iterations: u64,
    pub nodes: u64,
    pub wall: Duration,
    /// Best-bound / incumbent gap at termination (absolute, minimization form).
    pub final_gap: f64,
    /// Diagnostics accumulated during the solve (big-M proximity, pivot
    /// instability reports).
    pub warnings: Vec<String>,
}

/// Result of an LP or MILP solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// One value per model column; meaningful when status is Optimal or Limit.
    pub values: Vec<f64>,
    pub objective: f64,
    pub row_activity: Vec<f64>,
    /// Row duals, oriented for the model's own objective sense. Present for
    /// plain LP solves; absent for branch-and-bound results.
    pub duals: Option<Vec<f64>>,
    pub stats: SolveStats,
}

impl Solution {
    pub fn infeasible() -> Self {
        Solution {
            status: SolveStatus::Infeasible,
            values: Vec::new(),
            objective: f64::NAN,
            row_activity: Vec::new(),
            duals: None,
            stats: SolveStats::default(),
        }
    }
}
