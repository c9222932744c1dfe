//! Explicit segregated limit.
//!
//! With a pivot `p`, let `w_j` be the harmonic extension of `φ_p - φ_j`
//! (`j ≠ p`). Then
//!
//! ```text
//! u_p = max(max_j w_j, 0),     u_j = u_p - w_j,
//! ```
//!
//! which is nonnegative, has `Π_i u_i = 0` at every node (the component
//! attaining the maximum vanishes, or `u_p` does) and does not depend on the
//! choice of pivot.

use std::sync::Arc;

use crate::elliptic::{solve_harmonic, LinearSettings};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::Grid;
use crate::problem::Problem;

#[derive(Debug, Clone)]
pub struct LimitResult {
    pub fields: Vec<ScalarField>,
    /// `w_j` for every `j ≠ pivot`, in ascending `j`.
    pub differences: Vec<ScalarField>,
    /// Zero-based pivot.
    pub pivot: usize,
}

impl LimitResult {
    pub fn m(&self) -> usize {
        self.fields.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fields[0].grid()
    }

    /// `w` paired with its component index.
    pub fn difference_for(&self, j: usize) -> Option<&ScalarField> {
        if j == self.pivot {
            return None;
        }
        let k = if j < self.pivot { j } else { j - 1 };
        self.differences.get(k)
    }
}

fn check_pivot(problem: &Problem, pivot: usize) -> Result<()> {
    if pivot >= problem.m() {
        return Err(Error::InvalidArgument(format!(
            "pivot {} out of range for {} components",
            pivot + 1,
            problem.m()
        )));
    }
    Ok(())
}

/// Harmonic extensions of `φ_p - φ_j`, `j ≠ p` ascending.
pub fn harmonic_differences(problem: &Problem, pivot: usize, linear: &LinearSettings) -> Result<Vec<ScalarField>> {
    check_pivot(problem, pivot)?;
    let phi_p = problem.boundary(pivot);
    (0..problem.m())
        .filter(|&j| j != pivot)
        .map(|j| {
            let data = phi_p.zip_map(problem.boundary(j), |a, b| a - b);
            solve_harmonic(problem.grid(), &data, linear).map(|(w, _)| w)
        })
        .collect()
}

/// Assembles the limit from the difference fields of pivot `pivot` among
/// `m = differences.len() + 1` components.
pub fn construct_limit(differences: Vec<ScalarField>, pivot: usize) -> Result<LimitResult> {
    let first = differences.first().ok_or_else(|| {
        Error::InvalidArgument("the limit needs at least two components".to_string())
    })?;
    if differences.iter().any(|w| !w.same_grid(first)) {
        return Err(Error::GridMismatch);
    }
    let m = differences.len() + 1;
    if pivot >= m {
        return Err(Error::InvalidArgument(format!("pivot {} out of range for {m} components", pivot + 1)));
    }
    let grid = Arc::clone(first.grid());
    let mut up = vec![0.0; grid.len()];
    for node in (0..grid.len()).filter(|&n| grid.in_domain(n)) {
        up[node] = differences.iter().map(|w| w.get(node)).fold(0.0, f64::max);
    }
    let up = ScalarField::from_raw(&grid, up);
    let mut fields = Vec::with_capacity(m);
    let mut rest = differences.iter();
    for j in 0..m {
        if j == pivot {
            fields.push(up.clone());
        } else {
            let w = rest.next().expect("one difference per non-pivot component");
            // exactly 0 where w attains the max, never negative
            fields.push(up.zip_map(w, |a, b| (a - b).max(0.0)));
        }
    }
    Ok(LimitResult { fields, differences, pivot })
}

/// `harmonic_differences` followed by `construct_limit`.
pub fn solve_limit(problem: &Problem, pivot: usize, linear: &LinearSettings) -> Result<LimitResult> {
    if problem.m() < 2 {
        return Err(Error::InvalidArgument("the limit needs at least two components".to_string()));
    }
    construct_limit(harmonic_differences(problem, pivot, linear)?, pivot)
}

/// `max_i ‖u_i^{(p)} - u_i^{(q)}‖_∞`.
pub fn pivot_equivalence_check(problem: &Problem, p: usize, q: usize, linear: &LinearSettings) -> Result<f64> {
    let a = solve_limit(problem, p, linear)?;
    let b = solve_limit(problem, q, linear)?;
    Ok(a.fields.iter().zip(&b.fields).map(|(x, y)| x.sup_distance(y)).fold(0.0, f64::max))
}
