//! Canonical sparse LP/MILP representation.

use std::collections::HashSet;

use crate::error::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub obj: f64,
    pub binary: bool,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    /// Sparse coefficients, sorted by column index, no duplicates.
    pub coeffs: Vec<(ColId, f64)>,
}

/// Sparse mixed-integer linear program in row-major form.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub name: String,
    pub obj_sense: ObjSense,
    /// Constant added to the objective value after the solve.
    pub obj_offset: f64,
    pub cols: Vec<Column>,
    pub rows: Vec<Row>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>, obj_sense: ObjSense) -> Self {
        MilpModel {
            name: name.into(),
            obj_sense,
            obj_offset: 0.0,
            cols: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_col(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        obj: f64,
    ) -> ColId {
        self.cols.push(Column {
            name: name.into(),
            lower,
            upper,
            obj,
            binary: false,
        });
        ColId(self.cols.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64) -> ColId {
        self.cols.push(Column {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            obj,
            binary: true,
        });
        ColId(self.cols.len() - 1)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: Sense,
        rhs: f64,
        coeffs: &[(ColId, f64)],
    ) -> RowId {
        let mut c: Vec<(ColId, f64)> = coeffs.iter().copied().filter(|&(_, v)| v != 0.0).collect();
        c.sort_by_key(|&(id, _)| id);
        self.rows.push(Row {
            name: name.into(),
            sense,
            rhs,
            coeffs: c,
        });
        RowId(self.rows.len() - 1)
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_binaries(&self) -> usize {
        self.cols.iter().filter(|c| c.binary).count()
    }

    pub fn col_by_name(&self, name: &str) -> Option<ColId> {
        self.cols.iter().position(|c| c.name == name).map(ColId)
    }

    /// Structural checks: bound consistency, binary domains, duplicate
    /// (row, col) entries, column references in range.
    pub fn validate(&self) -> Result<(), CoreError> {
        for (i, c) in self.cols.iter().enumerate() {
            if c.lower > c.upper {
                return Err(CoreError::Model(format!(
                    "column {} ({}) has lower bound {} > upper bound {}",
                    i, c.name, c.lower, c.upper
                )));
            }
            if c.binary && (c.lower != 0.0 || c.upper != 1.0) {
                return Err(CoreError::Model(format!(
                    "binary column {} ({}) must have bounds [0, 1]",
                    i, c.name
                )));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let mut seen = HashSet::new();
            for &(col, _) in &row.coeffs {
                if col.0 >= self.cols.len() {
                    return Err(CoreError::Model(format!(
                        "row {} ({}) references unknown column {}",
                        r, row.name, col.0
                    )));
                }
                if !seen.insert(col) {
                    return Err(CoreError::Model(format!(
                        "row {} ({}) has duplicate entry for column {}",
                        r, row.name, self.cols[col.0].name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Activity of every row at the given point.
    pub fn row_activities(&self, values: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.coeffs.iter().map(|&(c, v)| v * values[c.0]).sum())
            .collect()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        let lin: f64 = self
            .cols
            .iter()
            .enumerate()
            .map(|(i, c)| c.obj * values[i])
            .sum();
        lin + self.obj_offset
    }

    /// Largest feasibility violation (rows, bounds, integrality) at the point.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, act) in self.rows.iter().zip(self.row_activities(values)) {
            let v = match row.sense {
                Sense::Le => act - row.rhs,
                Sense::Ge => row.rhs - act,
                Sense::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (i, c) in self.cols.iter().enumerate() {
            worst = worst.max(c.lower - values[i]).max(values[i] - c.upper);
            if c.binary {
                worst = worst.max((values[i] - values[i].round()).abs());
            }
        }
        worst
    }

    /// Name of the worst-violated row, if any row is violated beyond `tol`.
    pub fn worst_violated_row(&self, values: &[f64], tol: f64) -> Option<(&str, f64)> {
        let mut worst: Option<(&str, f64)> = None;
        for (row, act) in self.rows.iter().zip(self.row_activities(values)) {
            let v = match row.sense {
                Sense::Le => act - row.rhs,
                Sense::Ge => row.rhs - act,
                Sense::Eq => (act - row.rhs).abs(),
            };
            if v > tol && worst.map_or(true, |(_, w)| v > w) {
                worst = Some((row.name.as_str(), v));
            }
        }
        worst
    }
}
