//! Segregation residuals and the Laplacian-as-measure diagnostic.

use crate::elliptic::apply_laplacian;
use crate::field::ScalarField;
use crate::problem::Problem;

use super::interfaces::InterfaceSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SegregationResidual {
    /// `max_x Π_i u_i(x)`.
    pub max_product: f64,
    /// `∫ A_i Π_j u_j^{α_j}` per component.
    pub reaction: Vec<f64>,
}

pub fn segregation_residual(fields: &[ScalarField], problem: &Problem) -> SegregationResidual {
    let g = problem.grid();
    let alpha = problem.exponents().values();
    let m = fields.len();
    let mut max_product = 0.0f64;
    let mut reaction = vec![0.0; m];
    for node in (0..g.len()).filter(|&n| g.in_domain(n)) {
        let plain: f64 = fields.iter().map(|f| f.get(node)).product();
        max_product = max_product.max(plain);
        let powered: f64 =
            fields.iter().zip(alpha).map(|(f, &a)| if a == 1.0 { f.get(node) } else { f.get(node).powf(a) }).product();
        let w = g.quadrature_weight(node);
        for (i, r) in reaction.iter_mut().enumerate() {
            *r += w * problem.coupling().at(i, node) * powered;
        }
    }
    SegregationResidual { max_product, reaction }
}

/// `h · Δ_h u` at interior nodes, zero elsewhere.
pub fn laplacian_measure(u: &ScalarField) -> ScalarField {
    apply_laplacian(u).scaled(u.grid().h())
}

/// Fraction of the positive part of `measure` carried by nodes within
/// `radius` of some interface element of `set`.
pub fn mass_near(measure: &ScalarField, set: &InterfaceSet, radius: f64) -> f64 {
    let g = measure.grid();
    let points: Vec<[f64; 2]> = set.pairs.iter().flat_map(|p| p.elements.iter().map(|e| e.point)).collect();
    let mut total = 0.0;
    let mut near = 0.0;
    for &node in g.interior_nodes() {
        let v = measure.get(node);
        if v <= 0.0 {
            continue;
        }
        total += v;
        let [x, y] = g.coord(node);
        if points.iter().any(|[px, py]| (px - x).hypot(py - y) <= radius) {
            near += v;
        }
    }
    if total == 0.0 {
        1.0
    } else {
        near / total
    }
}
