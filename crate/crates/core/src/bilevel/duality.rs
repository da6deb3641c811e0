//! Strong-duality rewrite of the bilinear exchange-revenue term.
//!
//! For the lower-level LP  min c.x  s.t.  E x = b (duals nu), G x <= h
//! (duals mu >= 0), stationarity gives c = -(E' nu + G' mu), so at optimality
//! c.x = -b.nu - h.mu. Splitting c into the price part (price_t on the
//! exchange variables) and the constant part (DG and IL bids) yields
//!
//!   sum_t price_t * exchange_t = -b.nu - h.mu - sum(constant-cost terms),
//!
//! which is linear in (primal, dual) variables and replaces the
//! price-times-quantity product in the upper-level objective.

use super::ll::LowerLevelLp;

#[derive(Debug, Clone)]
pub struct DualityObjectiveExpr {
    /// Coefficient per equality dual: -b_r.
    pub nu_coeffs: Vec<f64>,
    /// Coefficient per inequality dual: -h_r.
    pub mu_coeffs: Vec<f64>,
    /// (primal var index, coefficient -c_k) for constant-cost variables.
    pub primal_coeffs: Vec<(usize, f64)>,
}

pub fn strong_duality_expr(lp: &LowerLevelLp) -> DualityObjectiveExpr {
    DualityObjectiveExpr {
        nu_coeffs: lp.eq_rows.iter().map(|r| -r.rhs).collect(),
        mu_coeffs: lp.ineq_rows.iter().map(|r| -r.rhs).collect(),
        primal_coeffs: lp
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.cost != 0.0)
            .map(|(k, v)| (k, -v.cost))
            .collect(),
    }
}

impl DualityObjectiveExpr {
    /// Evaluates the expression at a concrete (primal, nu, mu) point.
    pub fn eval(&self, primal: &[f64], nu: &[f64], mu: &[f64]) -> f64 {
        let a: f64 = self.nu_coeffs.iter().zip(nu).map(|(c, v)| c * v).sum();
        let b: f64 = self.mu_coeffs.iter().zip(mu).map(|(c, v)| c * v).sum();
        let c: f64 = self.primal_coeffs.iter().map(|&(k, c)| c * primal[k]).sum();
        a + b + c
    }
}
