//! Discrete norms and the Dirichlet energy.

use crate::field::ScalarField;

/// Discrete `L^p` norm over the closed domain, `(Σ w_n |u_n|^p)^{1/p}` with
/// node weights from [`Grid::quadrature_weight`](crate::geometry::Grid::quadrature_weight);
/// `p = ∞` gives the max norm.
pub fn norm_lp(u: &ScalarField, p: f64) -> f64 {
    assert!(p >= 1.0, "norm exponent must be at least 1");
    if p.is_infinite() {
        return u.max_abs();
    }
    let g = u.grid();
    let sum: f64 = (0..g.len())
        .filter(|&n| g.in_domain(n))
        .map(|n| g.quadrature_weight(n) * u.get(n).abs().powf(p))
        .sum();
    sum.powf(1.0 / p)
}

pub fn lp_distance(a: &ScalarField, b: &ScalarField, p: f64) -> f64 {
    norm_lp(&(a - b), p)
}

/// `Σ_i ∫ |∇u_i|²` with forward differences on every lattice edge inside the
/// closed domain. Each edge carries the cell volume, halved for edges running
/// between two boundary nodes.
pub fn discrete_energy(fields: &[ScalarField]) -> f64 {
    let Some(first) = fields.first() else { return 0.0 };
    let g = first.grid();
    let [hx, hy] = g.spacing();
    let vol = g.cell_volume();
    let mut total = 0.0;
    for u in fields {
        for node in (0..g.len()).filter(|&n| g.in_domain(n)) {
            for (next, axis) in g.neighbors(node) {
                if next < node || !g.in_domain(next) {
                    continue;
                }
                let h = if axis == 0 { hx } else { hy };
                let d = (u.get(next) - u.get(node)) / h;
                let both_boundary = g.dim() == 2 && g.interior_index(node).is_none() && g.interior_index(next).is_none();
                let w = if both_boundary { 0.5 * vol } else { vol };
                total += w * d * d;
            }
        }
    }
    total
}
