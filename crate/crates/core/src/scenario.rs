//! Second-stage uncertainty: discretized load / PV distributions combined
//! into a scenario tree of joint realizations.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::error::CoreError;

const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdfKind {
    /// Normal distribution; PV use truncates representatives at zero.
    Normal { truncate_at_zero: bool },
    /// Clearness-index style Beta distribution; branch values are
    /// normalized so the expected multiplier is one.
    Irradiance,
}

/// Per-hour distribution parameters. `location`/`scale` read as mean/std for
/// the normal kind and alpha/beta for the irradiance kind.
#[derive(Debug, Clone)]
pub struct PdfSpec {
    pub kind: PdfKind,
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
}

/// One discretization branch: a probability and a representative value per
/// hour (the probability-weighted conditional mean of its interval).
#[derive(Debug, Clone)]
pub struct Branch {
    pub probability: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: usize,
    pub probability: f64,
    pub load_mult: Vec<f64>,
    pub pv_mult: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioSet {
    pub scenarios: Vec<Scenario>,
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// E[X | a < X < b] for X ~ N(mu, sigma).
fn normal_conditional_mean(mu: f64, sigma: f64, a: f64, b: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    let (za, zb) = ((a - mu) / sigma, (b - mu) / sigma);
    let mass = n.cdf(zb) - n.cdf(za);
    let phi_a = if za.is_finite() { std_normal_pdf(za) } else { 0.0 };
    let phi_b = if zb.is_finite() { std_normal_pdf(zb) } else { 0.0 };
    mu + sigma * (phi_a - phi_b) / mass
}

/// Beta quantile, Newton-polished to machine precision (the library inverse
/// is only accurate to roughly 1e-5, which is visible in the branch means).
fn beta_quantile(d: &Beta, q: f64) -> f64 {
    use statrs::distribution::Continuous;
    let mut x = d.inverse_cdf(q).clamp(1e-12, 1.0 - 1e-12);
    for _ in 0..30 {
        let f = d.pdf(x);
        if f <= 0.0 {
            break;
        }
        let step = (d.cdf(x) - q) / f;
        x = (x - step).clamp(1e-12, 1.0 - 1e-12);
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

/// E[X | a < X < b] for X ~ Beta(alpha, beta), via the alpha+1 identity.
fn beta_conditional_mean(alpha: f64, beta: f64, a: f64, b: f64) -> f64 {
    let d = Beta::new(alpha, beta).unwrap();
    let d1 = Beta::new(alpha + 1.0, beta).unwrap();
    let mass = d.cdf(b) - d.cdf(a);
    let mean = alpha / (alpha + beta);
    mean * (d1.cdf(b) - d1.cdf(a)) / mass
}

/// Discretize a distribution into `intervals` branches.
///
/// The normal 3-way split uses boundaries mu +- sigma; every other count
/// (and the irradiance kind) uses equal-probability quantile boundaries.
pub fn discretize(pdf: &PdfSpec, intervals: usize) -> Result<Vec<Branch>, CoreError> {
    if intervals < 1 {
        return Err(CoreError::Validation("intervals must be >= 1".into()));
    }
    if pdf.location.len() != pdf.scale.len() || pdf.location.is_empty() {
        return Err(CoreError::Validation(
            "pdf location/scale series must be non-empty and equal length".into(),
        ));
    }
    match pdf.kind {
        PdfKind::Normal { truncate_at_zero } => {
            if pdf.scale.iter().any(|&s| s <= 0.0) {
                return Err(CoreError::Validation("normal pdf requires scale > 0".into()));
            }
            let n = Normal::new(0.0, 1.0).unwrap();
            // Standardized interval boundaries, shared across hours.
            let z_bounds: Vec<f64> = if intervals == 1 {
                vec![f64::NEG_INFINITY, f64::INFINITY]
            } else if intervals == 3 {
                vec![f64::NEG_INFINITY, -1.0, 1.0, f64::INFINITY]
            } else {
                let mut zs = vec![f64::NEG_INFINITY];
                for i in 1..intervals {
                    zs.push(n.inverse_cdf(i as f64 / intervals as f64));
                }
                zs.push(f64::INFINITY);
                zs
            };
            let mut branches = Vec::with_capacity(intervals);
            for k in 0..intervals {
                let (za, zb) = (z_bounds[k], z_bounds[k + 1]);
                let prob = n.cdf(zb) - n.cdf(za);
                let values = pdf
                    .location
                    .iter()
                    .zip(&pdf.scale)
                    .map(|(&mu, &sigma)| {
                        let v = if intervals == 1 {
                            mu
                        } else {
                            normal_conditional_mean(mu, sigma, mu + za * sigma, mu + zb * sigma)
                        };
                        if truncate_at_zero {
                            v.max(0.0)
                        } else {
                            v
                        }
                    })
                    .collect();
                branches.push(Branch {
                    probability: prob,
                    values,
                });
            }
            Ok(branches)
        }
        PdfKind::Irradiance => {
            if pdf.location.iter().any(|&a| a <= 0.0) || pdf.scale.iter().any(|&b| b <= 0.0) {
                return Err(CoreError::Validation(
                    "irradiance pdf requires alpha, beta > 0".into(),
                ));
            }
            let prob = 1.0 / intervals as f64;
            let mut branches = Vec::with_capacity(intervals);
            for k in 0..intervals {
                let values = pdf
                    .location
                    .iter()
                    .zip(&pdf.scale)
                    .map(|(&alpha, &beta)| {
                        if intervals == 1 {
                            return 1.0;
                        }
                        let d = Beta::new(alpha, beta).unwrap();
                        let a = if k == 0 {
                            0.0
                        } else {
                            beta_quantile(&d, k as f64 * prob)
                        };
                        let b = if k == intervals - 1 {
                            1.0
                        } else {
                            beta_quantile(&d, (k + 1) as f64 * prob)
                        };
                        let mean = alpha / (alpha + beta);
                        beta_conditional_mean(alpha, beta, a, b) / mean
                    })
                    .collect();
                branches.push(Branch {
                    probability: prob,
                    values,
                });
            }
            Ok(branches)
        }
    }
}

/// Cross every load branch with every PV branch; probabilities multiply.
pub fn build_tree(load: &[Branch], pv: &[Branch]) -> Result<ScenarioSet, CoreError> {
    if load.is_empty() || pv.is_empty() {
        return Err(CoreError::Validation("branch lists must be non-empty".into()));
    }
    let mut scenarios = Vec::with_capacity(load.len() * pv.len());
    for (i, lb) in load.iter().enumerate() {
        for (j, pb) in pv.iter().enumerate() {
            scenarios.push(Scenario {
                id: i * pv.len() + j + 1,
                probability: lb.probability * pb.probability,
                load_mult: lb.values.clone(),
                pv_mult: pb.values.clone(),
            });
        }
    }
    let set = ScenarioSet { scenarios };
    set.validate()?;
    Ok(set)
}

impl ScenarioSet {
    /// Single certain scenario with unit multipliers.
    pub fn deterministic(t: usize) -> Self {
        ScenarioSet {
            scenarios: vec![Scenario {
                id: 1,
                probability: 1.0,
                load_mult: vec![1.0; t],
                pv_mult: vec![1.0; t],
            }],
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.scenarios.is_empty() {
            return Err(CoreError::Validation("scenario set is empty".into()));
        }
        let sum: f64 = self.scenarios.iter().map(|s| s.probability).sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(CoreError::Validation(format!(
                "scenario probabilities sum to {sum}, expected 1"
            )));
        }
        for s in &self.scenarios {
            if s.probability <= 0.0 {
                return Err(CoreError::Validation(format!(
                    "scenario {}: probability must be positive",
                    s.id
                )));
            }
            if s.load_mult.iter().chain(&s.pv_mult).any(|&m| m < 0.0) {
                return Err(CoreError::Validation(format!(
                    "scenario {}: multipliers must be >= 0",
                    s.id
                )));
            }
        }
        Ok(())
    }

    /// Replace probabilities with values from an input file (the canonical
    /// path for reproducing a published probability table).
    pub fn override_probabilities(&mut self, probs: &[f64]) -> Result<(), CoreError> {
        if probs.len() != self.scenarios.len() {
            return Err(CoreError::Validation(format!(
                "override has {} probabilities for {} scenarios",
                probs.len(),
                self.scenarios.len()
            )));
        }
        let old: Vec<f64> = self.scenarios.iter().map(|s| s.probability).collect();
        for (s, &p) in self.scenarios.iter_mut().zip(probs) {
            s.probability = p;
        }
        if let Err(e) = self.validate() {
            for (s, p) in self.scenarios.iter_mut().zip(old) {
                s.probability = p;
            }
            return Err(e);
        }
        Ok(())
    }

    /// Index of the most likely scenario (ties to the lowest id).
    pub fn modal_index(&self) -> usize {
        let mut best = 0;
        for (i, s) in self.scenarios.iter().enumerate() {
            if s.probability > self.scenarios[best].probability + PROB_TOL {
                best = i;
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let t = self.scenarios[0].load_mult.len();
        let mut out = String::from("scenario,probability,kind");
        for h in 1..=t {
            let _ = write!(out, ",t{h}");
        }
        out.push('\n');
        for s in &self.scenarios {
            for (kind, series) in [("load", &s.load_mult), ("pv", &s.pv_mult)] {
                let _ = write!(out, "{},{},{kind}", s.id, s.probability);
                for v in series {
                    let _ = write!(out, ",{v}");
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Read a scenario override file.
///
/// Blocks of three lines per scenario:
/// `scenario <id> <probability>`, `load_mult <T values>`, `pv_mult <T values>`
/// (single values broadcast over the horizon).
pub fn load_scenarios(path: &Path, t: usize) -> Result<ScenarioSet, CoreError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Io(format!("reading {}: {e}", path.display())))?;
    let mut scenarios: Vec<Scenario> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| CoreError::Parse(format!("scenarios line {}: {what}", no + 1));
        let series = |toks: &[&str]| -> Result<Vec<f64>, CoreError> {
            let mut v = Vec::new();
            for tok in toks {
                v.push(tok.parse().map_err(|_| bad("bad number"))?);
            }
            if v.len() == 1 {
                v = vec![v[0]; t];
            }
            if v.len() != t {
                return Err(bad("series length does not match horizon"));
            }
            Ok(v)
        };
        match toks[0] {
            "scenario" => {
                if toks.len() < 3 {
                    return Err(bad("expected: scenario <id> <probability>"));
                }
                scenarios.push(Scenario {
                    id: toks[1].parse().map_err(|_| bad("bad id"))?,
                    probability: toks[2].parse().map_err(|_| bad("bad probability"))?,
                    load_mult: Vec::new(),
                    pv_mult: Vec::new(),
                });
            }
            "load_mult" => {
                let s = scenarios.last_mut().ok_or_else(|| bad("series before scenario"))?;
                s.load_mult = series(&toks[1..])?;
            }
            "pv_mult" => {
                let s = scenarios.last_mut().ok_or_else(|| bad("series before scenario"))?;
                s.pv_mult = series(&toks[1..])?;
            }
            other => return Err(bad(&format!("unknown key '{other}'"))),
        }
    }
    for s in &scenarios {
        if s.load_mult.is_empty() || s.pv_mult.is_empty() {
            return Err(CoreError::Validation(format!(
                "scenario {}: missing load_mult or pv_mult",
                s.id
            )));
        }
    }
    let set = ScenarioSet { scenarios };
    set.validate()?;
    Ok(set)
}
