//! Piecewise-linear machinery for the quadratic terms x^2 in the flow block.
//!
//! `PwlApprox` holds K equal segments on [a, b]. The chord interpolant is
//! exact at the breakpoints and over-estimates x^2 by at most
//! (b - a)^2 / (4 K^2); the tangents at the breakpoints under-estimate by the
//! same bound. Constraint emission uses the tangents as a lower envelope and
//! the single [a, b] secant as the upper cap, so the linearized model is a
//! relaxation that always contains the true square.

use crate::error::CoreError;

#[derive(Debug, Clone)]
pub struct PwlApprox {
    pub breakpoints: Vec<f64>,
    /// Chord slope of each segment (x_k + x_{k+1}); strictly increasing.
    pub slopes: Vec<f64>,
}

impl PwlApprox {
    pub fn square(a: f64, b: f64, segments: usize) -> Result<Self, CoreError> {
        if !(a < b) {
            return Err(CoreError::Model(format!(
                "PWL interval [{a}, {b}] is empty"
            )));
        }
        if segments < 1 {
            return Err(CoreError::Model("PWL needs at least one segment".into()));
        }
        let k = segments;
        let h = (b - a) / k as f64;
        let breakpoints: Vec<f64> = (0..=k).map(|i| a + h * i as f64).collect();
        let slopes: Vec<f64> = (0..k)
            .map(|i| breakpoints[i] + breakpoints[i + 1])
            .collect();
        Ok(PwlApprox { breakpoints, slopes })
    }

    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn upper(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn segments(&self) -> usize {
        self.slopes.len()
    }

    /// Worst-case gap of both chord and tangent envelopes.
    pub fn error_bound(&self) -> f64 {
        let w = self.upper() - self.lower();
        let k = self.segments() as f64;
        w * w / (4.0 * k * k)
    }

    /// Chord-interpolant value at x (clamped to the interval).
    pub fn eval_chord(&self, x: f64) -> f64 {
        let x = x.clamp(self.lower(), self.upper());
        let mut seg = self.segments() - 1;
        for i in 0..self.segments() {
            if x <= self.breakpoints[i + 1] {
                seg = i;
                break;
            }
        }
        let x0 = self.breakpoints[seg];
        x0 * x0 + self.slopes[seg] * (x - x0)
    }

    /// Max over the breakpoint tangents at x: the lower envelope.
    pub fn eval_tangent_envelope(&self, x: f64) -> f64 {
        self.breakpoints
            .iter()
            .map(|&p| 2.0 * p * x - p * p)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Tangent rows: y >= 2 p x - p^2 for each breakpoint p, returned as
    /// (coeff_x, coeff_y, rhs) with the row read as
    /// coeff_x * x + coeff_y * y >= rhs.
    pub fn tangent_rows(&self) -> Vec<(f64, f64, f64)> {
        self.breakpoints
            .iter()
            .map(|&p| (-2.0 * p, 1.0, -p * p))
            .collect()
    }

    /// Secant cap over the whole interval: y <= (a + b) x - a b, returned as
    /// (coeff_x, coeff_y, rhs) with the row read as
    /// coeff_x * x + coeff_y * y <= rhs.
    pub fn secant_row(&self) -> (f64, f64, f64) {
        let (a, b) = (self.lower(), self.upper());
        (-(a + b), 1.0, -a * b)
    }
}
