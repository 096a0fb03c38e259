//! Which model wins under each weighting of three task categories.
//!
//! Every point of a regular lattice on the 2-simplex is a category
//! weighting `(w_0, w_1, w_2)`. A model's score is `sum_c w_c m_c`, where
//! `m_c` is its mean accuracy over the tasks of category `c`, and its
//! variance is `sum_c w_c^2 Var[m_c]` with tasks treated as independent.
//! The best two models are compared with [`difference_se`]; the cell gets
//! the leader only if the gap is at least `z` standard errors.
//!
//! When the two best scores are exactly equal neither model can be named.
//! The pair is then compared with the third model: the cell is labelled
//! [`CellWinner::Tied`] if both clear `z` against it and
//! [`CellWinner::Indeterminate`] otherwise.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::normalize::NormalizationBounds;
use crate::table::EvalTable;
use crate::weighting::{binomial_variance, difference_se};

pub const DEFAULT_GRID_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub grid_step: f64,
    /// Threshold in standard errors.
    pub z: f64,
    /// Correlation assumed between any two models' scores.
    pub rho: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { grid_step: DEFAULT_GRID_STEP, z: 2.0, rho: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellWinner {
    Model(usize),
    /// Exactly tied leaders that together clear the third model.
    Tied(usize, usize),
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplexCell {
    /// Category weights, in the field's category order.
    pub weights: [f64; 3],
    pub winner: CellWinner,
    /// Gap between the leader and the runner-up in standard errors.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexField {
    pub categories: [String; 3],
    pub models: Vec<String>,
    pub grid_step: f64,
    pub z: f64,
    pub rho: f64,
    pub normalized: bool,
    pub cells: Vec<SimplexCell>,
}

impl SimplexField {
    /// Lattice divisions per edge.
    pub fn divisions(&self) -> usize {
        divisions(self.grid_step).expect("validated at construction")
    }

    pub fn winner_label(&self, w: CellWinner) -> String {
        match w {
            CellWinner::Model(i) => self.models[i].clone(),
            CellWinner::Tied(a, b) => format!("{}={}", self.models[a], self.models[b]),
            CellWinner::Indeterminate => "INDETERMINATE".to_string(),
        }
    }

    pub fn indeterminate_count(&self) -> usize {
        self.cells.iter().filter(|c| c.winner == CellWinner::Indeterminate).count()
    }

    /// Cell at the lattice point `(a, b, c) / divisions`.
    pub fn cell_at(&self, a: usize, b: usize) -> Option<&SimplexCell> {
        let n = self.divisions();
        if a + b > n {
            return None;
        }
        // Row `a` holds `n - a + 1` cells and starts after the previous rows.
        let start = a * (n + 1) - a * (a.saturating_sub(1)) / 2;
        self.cells.get(start + b)
    }

    /// Distinct single-model winners in order of first appearance.
    pub fn winners(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for c in &self.cells {
            if let CellWinner::Model(i) = c.winner {
                if !out.contains(&i) {
                    out.push(i);
                }
            }
        }
        out
    }

    /// CSV with a header naming the three categories, e.g.
    /// `w_natural,w_specialized,w_structured,winner,margin_se`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let [a, b, c] = &self.categories;
        let _ = writeln!(s, "w_{a},w_{b},w_{c},winner,margin_se");
        for cell in &self.cells {
            let [x, y, z] = cell.weights;
            let _ = writeln!(s, "{x},{y},{z},{},{:.6}", self.winner_label(cell.winner), cell.margin);
        }
        s
    }
}

fn divisions(h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step {h} outside (0, 1]")));
    }
    let n = (1.0 / h).round();
    if (n * h - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("grid step {h} does not divide 1")));
    }
    Ok(n as usize)
}

/// Number of lattice points for grid step `h`: `(n + 1)(n + 2) / 2`.
pub fn cell_count(h: f64) -> Result<usize> {
    let n = divisions(h)?;
    Ok((n + 1) * (n + 2) / 2)
}

/// Per model, the mean and the variance of the mean over each category.
fn category_moments(
    table: &EvalTable,
    categories: &[String; 3],
    bounds: Option<&NormalizationBounds>,
) -> Result<Vec<[(f64, f64); 3]>> {
    let tasks = table.tasks();
    if let Some(b) = bounds {
        b.check_tasks(tasks.len())?;
    }
    let members: Vec<Vec<usize>> = categories
        .iter()
        .map(|c| {
            let idx: Vec<usize> = (0..tasks.len()).filter(|&j| tasks[j].category == *c).collect();
            if idx.is_empty() {
                Err(Error::InvalidArgument(format!("category `{c}` has no tasks")))
            } else {
                Ok(idx)
            }
        })
        .collect::<Result<_>>()?;
    Ok((0..table.n_models())
        .map(|i| {
            let mut out = [(0.0, 0.0); 3];
            for (slot, idx) in out.iter_mut().zip(&members) {
                let n_c = idx.len() as f64;
                let (mut mean, mut var) = (0.0, 0.0);
                for &j in idx {
                    let n = table.size(j);
                    let p = table.count(i, j) as f64 / n as f64;
                    let (v, scale) = match bounds {
                        None => (p, 1.0),
                        Some(b) => (b.apply(j, p), b.high()[j] - b.low()[j]),
                    };
                    mean += v;
                    var += binomial_variance(p, n) / (scale * scale);
                }
                *slot = (mean / n_c, var / (n_c * n_c));
            }
            out
        })
        .collect())
}

/// Scans the category simplex of `table`. `categories` fixes the order of
/// the weight coordinates. With `bounds`, task accuracies are normalized
/// first and their variances rescaled accordingly.
pub fn simplex_scan(
    table: &EvalTable,
    categories: [&str; 3],
    options: &ScanOptions,
    bounds: Option<&NormalizationBounds>,
) -> Result<SimplexField> {
    let n = divisions(options.grid_step)?;
    if !(options.z >= 0.0 && options.z.is_finite()) {
        return Err(Error::InvalidArgument(format!("z = {} must be finite and non-negative", options.z)));
    }
    if !(-1.0..=1.0).contains(&options.rho) {
        return Err(Error::InvalidArgument(format!("rho = {} outside [-1, 1]", options.rho)));
    }
    let present = table.categories();
    if present.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "the simplex scan needs exactly 3 categories, table has {}",
            present.len()
        )));
    }
    if table.n_models() < 2 {
        return Err(Error::InvalidArgument("the simplex scan needs at least two models".into()));
    }
    let categories = categories.map(str::to_string);
    for c in &categories {
        if !present.contains(c) {
            return Err(Error::InvalidArgument(format!("unknown category `{c}`")));
        }
    }
    if categories[0] == categories[1] || categories[0] == categories[2] || categories[1] == categories[2] {
        return Err(Error::InvalidArgument("categories must be distinct".into()));
    }
    let moments = category_moments(table, &categories, bounds)?;
    let lattice: Vec<(usize, usize)> = (0..=n).flat_map(|a| (0..=n - a).map(move |b| (a, b))).collect();
    let cells = lattice
        .par_iter()
        .map(|&(a, b)| {
            let weights = [a as f64 / n as f64, b as f64 / n as f64, (n - a - b) as f64 / n as f64];
            evaluate_cell(&moments, weights, options.z, options.rho)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimplexField {
        categories,
        models: table.models().to_vec(),
        grid_step: options.grid_step,
        z: options.z,
        rho: options.rho,
        normalized: bounds.is_some(),
        cells,
    })
}

fn evaluate_cell(moments: &[[(f64, f64); 3]], weights: [f64; 3], z: f64, rho: f64) -> Result<SimplexCell> {
    let scored: Vec<(f64, f64)> = moments
        .iter()
        .map(|m| {
            let s = (0..3).map(|c| weights[c] * m[c].0).sum();
            let v = (0..3).map(|c| weights[c] * weights[c] * m[c].1).sum();
            (s, v)
        })
        .collect();
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].0.total_cmp(&scored[a].0));
    let gap = |a: usize, b: usize| -> Result<f64> {
        let d = scored[a].0 - scored[b].0;
        let se = difference_se(scored[a].1, scored[b].1, rho)?;
        Ok(if se > 0.0 {
            d / se
        } else if d > 0.0 {
            f64::INFINITY
        } else {
            0.0
        })
    };
    let (first, second) = (order[0], order[1]);
    if scored[first].0 > scored[second].0 {
        let margin = gap(first, second)?;
        let winner = if margin >= z { CellWinner::Model(first) } else { CellWinner::Indeterminate };
        return Ok(SimplexCell { weights, winner, margin });
    }
    // Exact tie for the lead.
    let Some(&third) = order.get(2) else {
        return Ok(SimplexCell { weights, winner: CellWinner::Indeterminate, margin: 0.0 });
    };
    if scored[third].0 == scored[first].0 {
        return Ok(SimplexCell { weights, winner: CellWinner::Indeterminate, margin: 0.0 });
    }
    let margin = gap(first, third)?.min(gap(second, third)?);
    let winner = if margin >= z { CellWinner::Tied(first, second) } else { CellWinner::Indeterminate };
    Ok(SimplexCell { weights, winner, margin })
}
