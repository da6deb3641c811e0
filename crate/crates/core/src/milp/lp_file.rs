//! Deterministic CPLEX-style LP file writer and `name value` solution reader.
//!
//! The writer emits one constraint per line in model order with shortest
//! round-trip float formatting, so identical models produce byte-identical
//! files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::model::{MilpModel, ObjSense, Sense};
use super::solution::{SolveStats, SolveStatus, Solution};
use crate::error::CoreError;

fn fmt_num(v: f64) -> String {
    // Shortest representation that round-trips the f64 exactly.
    format!("{}", v)
}

fn push_terms(out: &mut String, coeffs: &[(super::model::ColId, f64)], cols: &[super::model::Column]) {
    if coeffs.is_empty() {
        out.push_str(" 0 __zero");
        return;
    }
    for &(c, v) in coeffs {
        if v >= 0.0 {
            let _ = write!(out, " + {} {}", fmt_num(v), cols[c.0].name);
        } else {
            let _ = write!(out, " - {} {}", fmt_num(-v), cols[c.0].name);
        }
    }
}

pub fn write_lp_string(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    if model.obj_offset != 0.0 {
        let _ = writeln!(out, "\\ objective_offset: {}", fmt_num(model.obj_offset));
    }
    out.push_str(match model.obj_sense {
        ObjSense::Minimize => "Minimize\n",
        ObjSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let obj_terms: Vec<(super::model::ColId, f64)> = model
        .cols
        .iter()
        .enumerate()
        .filter(|(_, c)| c.obj != 0.0)
        .map(|(i, c)| (super::model::ColId(i), c.obj))
        .collect();
    push_terms(&mut out, &obj_terms, &model.cols);
    out.push('\n');
    out.push_str("Subject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", row.name);
        push_terms(&mut out, &row.coeffs, &model.cols);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {} {}", op, fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    let needs_zero_var = model.rows.iter().any(|r| r.coeffs.is_empty())
        || model.cols.iter().all(|c| c.obj == 0.0);
    if needs_zero_var {
        out.push_str(" __zero = 0\n");
    }
    for c in &model.cols {
        if c.binary {
            continue; // binary section carries the domain
        }
        match (c.lower.is_finite(), c.upper.is_finite()) {
            (true, true) if c.lower == c.upper => {
                let _ = writeln!(out, " {} = {}", c.name, fmt_num(c.lower));
            }
            (true, true) => {
                let _ = writeln!(
                    out,
                    " {} <= {} <= {}",
                    fmt_num(c.lower),
                    c.name,
                    fmt_num(c.upper)
                );
            }
            (true, false) => {
                let _ = writeln!(out, " {} >= {}", c.name, fmt_num(c.lower));
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", c.name, fmt_num(c.upper));
            }
            (false, false) => {
                let _ = writeln!(out, " {} free", c.name);
            }
        }
    }
    let binaries: Vec<&str> = model
        .cols
        .iter()
        .filter(|c| c.binary)
        .map(|c| c.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for b in binaries {
            let _ = writeln!(out, " {}", b);
        }
    }
    out.push_str("End\n");
    out
}

pub fn export_model(model: &MilpModel, path: &Path) -> Result<(), CoreError> {
    fs::write(path, write_lp_string(model))
        .map_err(|e| CoreError::Io(format!("writing {}: {e}", path.display())))
}

/// Read a `name value` solution file, map it onto the model's columns and
/// re-verify feasibility. Rows violated beyond 1e-5 reject the file.
pub fn import_solution(model: &MilpModel, path: &Path) -> Result<Solution, CoreError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CoreError::Io(format!("reading {}: {e}", path.display())))?;
    import_solution_str(model, &text)
}

pub fn import_solution_str(model: &MilpModel, text: &str) -> Result<Solution, CoreError> {
    let mut values = vec![f64::NAN; model.n_cols()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let name = parts.next().unwrap();
        if name == "__zero" {
            continue;
        }
        let value: f64 = parts
            .next()
            .ok_or_else(|| {
                CoreError::Parse(format!("solution line {}: missing value", lineno + 1))
            })?
            .parse()
            .map_err(|_| {
                CoreError::Parse(format!("solution line {}: bad number", lineno + 1))
            })?;
        let col = model.col_by_name(name).ok_or_else(|| {
            CoreError::Validation(format!("solution references unknown column '{name}'"))
        })?;
        values[col.0] = value;
    }
    if let Some(missing) = values.iter().position(|v| v.is_nan()) {
        return Err(CoreError::Validation(format!(
            "solution file is missing column '{}'",
            model.cols[missing].name
        )));
    }
    if let Some((row, viol)) = model.worst_violated_row(&values, 1e-5) {
        return Err(CoreError::Validation(format!(
            "imported solution violates row '{row}' by {viol:.3e}"
        )));
    }
    for (i, c) in model.cols.iter().enumerate() {
        let v = values[i];
        if v < c.lower - 1e-5 || v > c.upper + 1e-5 {
            return Err(CoreError::Validation(format!(
                "imported solution violates bounds of column '{}'",
                c.name
            )));
        }
    }
    Ok(Solution {
        status: SolveStatus::Optimal,
        objective: model.objective_value(&values),
        row_activity: model.row_activities(&values),
        values,
        duals: None,
        stats: SolveStats::default(),
    })
}
