//! Convergence of the ε-solutions to the explicit limit.

use std::fmt::Write;
use std::thread;

use crate::epsilon::{solve_epsilon, FixedPointSettings};
use crate::error::{Error, Result};
use crate::limit::LimitResult;
use crate::problem::Problem;

use super::norms::lp_distance;

/// Refit without the largest ε when the RMS log10 residual exceeds this.
pub const REFIT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct RateEntry {
    pub epsilon: f64,
    /// `‖u_i^ε - u_i‖_{L^{m+1}}` per component.
    pub lmp1: Vec<f64>,
    /// `‖u_i^ε - u_i‖_∞` per component.
    pub sup: Vec<f64>,
    pub sweeps: usize,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub entries: Vec<RateEntry>,
    /// Zero-based component whose distances are fitted.
    pub pivot: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// RMS residual of the fit in log10 units.
    pub fit_residual: Option<f64>,
    /// ε dropped from the fit as pre-asymptotic, if any.
    pub dropped: Option<f64>,
}

/// `count` values from `start` to `stop`, equally spaced in log scale.
pub fn geometric_ladder(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) || count == 0 {
        return Err(Error::InvalidArgument(format!(
            "ladder needs positive endpoints and count >= 1, got {start}, {stop}, {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = (start.log10(), stop.log10());
    Ok((0..count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64)).collect())
}

fn fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some((slope, intercept, rms))
}

fn run_one(problem: &Problem, epsilon: f64, limit: &LimitResult, settings: &FixedPointSettings) -> RateEntry {
    let m = problem.m();
    let p = (m + 1) as f64;
    match solve_epsilon(problem, epsilon, settings) {
        Ok(r) => RateEntry {
            epsilon,
            lmp1: r.fields.iter().zip(&limit.fields).map(|(a, b)| lp_distance(a, b, p)).collect(),
            sup: r.fields.iter().zip(&limit.fields).map(|(a, b)| a.sup_distance(b)).collect(),
            sweeps: r.sweeps,
            failure: None,
        },
        Err(e) => RateEntry { epsilon, lmp1: vec![f64::NAN; m], sup: vec![f64::NAN; m], sweeps: 0, failure: Some(e.to_string()) },
    }
}

/// Solves the ε-system for each ε (concurrently on `threads` workers) and
/// fits `log ‖u_p^ε - u_p‖_{L^{m+1}}` against `log ε` for the pivot `p` of
/// `limit`. Failed solves stay in the table with their message.
pub fn rate_study(
    problem: &Problem,
    epsilons: &[f64],
    limit: &LimitResult,
    settings: &FixedPointSettings,
    threads: usize,
) -> Result<RateTable> {
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon list".to_string()));
    }
    if epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("epsilon values must be positive and strictly decreasing".to_string()));
    }
    if limit.m() != problem.m() {
        return Err(Error::InvalidArgument("limit and problem have different component counts".to_string()));
    }
    let workers = threads.clamp(1, epsilons.len());
    let mut entries: Vec<Option<RateEntry>> = vec![None; epsilons.len()];
    if workers == 1 {
        for (slot, &e) in entries.iter_mut().zip(epsilons) {
            *slot = Some(run_one(problem, e, limit, settings));
        }
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    s.spawn(move || {
                        (w..epsilons.len())
                            .step_by(workers)
                            .map(|k| (k, run_one(problem, epsilons[k], limit, settings)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (k, entry) in h.join().expect("rate worker panicked") {
                    entries[k] = Some(entry);
                }
            }
        });
    }
    let entries: Vec<RateEntry> = entries.into_iter().map(|e| e.expect("every epsilon solved")).collect();

    let pivot = limit.pivot;
    let points: Vec<(f64, f64)> = entries
        .iter()
        .filter(|e| e.failure.is_none() && e.lmp1[pivot] > 0.0)
        .map(|e| (e.epsilon.log10(), e.lmp1[pivot].log10()))
        .collect();
    let mut dropped = None;
    let mut result = fit(&points);
    if let Some((_, _, rms)) = result {
        if rms > REFIT_THRESHOLD && points.len() >= 3 {
            dropped = entries.iter().find(|e| e.failure.is_none() && e.lmp1[pivot] > 0.0).map(|e| e.epsilon);
            result = fit(&points[1..]);
        }
    }
    Ok(RateTable {
        entries,
        pivot,
        slope: result.map(|r| r.0),
        intercept: result.map(|r| r.1),
        fit_residual: result.map(|r| r.2),
        dropped,
    })
}

impl RateTable {
    /// `epsilon,comp,lmp1_dist,sup_dist` rows followed by a
    /// `# slope=<s> fit_residual=<r>` footer.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,comp,lmp1_dist,sup_dist\n");
        for e in &self.entries {
            for (i, (l, u)) in e.lmp1.iter().zip(&e.sup).enumerate() {
                let _ = writeln!(s, "{:.16e},{},{:.16e},{:.16e}", e.epsilon, i + 1, l, u);
            }
        }
        let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"));
        let _ = write!(s, "# slope={} fit_residual={}", fmt(self.slope), fmt(self.fit_residual));
        if let Some(d) = self.dropped {
            let _ = write!(s, " dropped_epsilon={d:e}");
        }
        s.push('\n');
        for e in self.entries.iter().filter(|e| e.failure.is_some()) {
            let _ = writeln!(s, "# failed epsilon={:e}: {}", e.epsilon, e.failure.as_deref().unwrap_or(""));
        }
        s
    }
}
