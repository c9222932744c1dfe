//! Boundary data `φ_i`, coupling weights `A_i` and exponents `α_i`, their
//! evaluation on a grid, and the two admissibility checks: partial
//! segregation of the boundary data (`Π φ_i = 0` on the boundary) and the
//! coupling inequality `0 < A_i ≤ Σ_{j≠i} A_j`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{BoundaryValues, ScalarField};
use crate::geometry::{BoundaryParam, BoundaryPoint, Domain, End, Grid, Side};

/// Parameter interval `[lo, hi)` (or `[lo, hi]` when `closed`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

impl Span {
    fn contains(&self, t: f64) -> bool {
        t >= self.lo && (t < self.hi || (self.closed && t <= self.hi))
    }
}

/// Where on the boundary a piece applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceRange {
    All,
    Endpoint(End),
    Side { side: Side, span: Option<Span> },
    /// Angular span; tested modulo 2π so spans may wrap past 2π.
    Theta(Span),
}

impl PieceRange {
    pub fn matches(&self, param: &BoundaryParam) -> bool {
        match (self, param) {
            (PieceRange::All, _) => true,
            (PieceRange::Endpoint(e), BoundaryParam::Endpoint(p)) => e == p,
            (PieceRange::Side { side, span }, BoundaryParam::Side { side: s, arclength }) => {
                side == s && span.is_none_or(|sp| sp.contains(*arclength))
            }
            (PieceRange::Theta(span), BoundaryParam::Angle(t)) => {
                [*t, t + TAU, t - TAU].into_iter().any(|v| span.contains(v))
            }
            _ => false,
        }
    }

    /// Whether the range kind makes sense on this domain.
    pub fn fits(&self, domain: &Domain) -> bool {
        matches!(
            (self, domain),
            (PieceRange::All, _)
                | (PieceRange::Endpoint(_), Domain::Interval { .. })
                | (PieceRange::Side { .. }, Domain::Rectangle { .. })
                | (PieceRange::Theta(_), Domain::Disk { .. })
        )
    }

    /// Parses `all`, `left`, `right`, `top [0, 1)`, `theta [0, 4*pi/3)`, ...
    pub fn parse(src: &str) -> Result<Self> {
        let src = src.trim();
        let (head, rest) = match src.find('[') {
            Some(k) => (src[..k].trim(), Some(src[k..].trim())),
            None => (src, None),
        };
        let span = rest.map(parse_span).transpose()?;
        let side = |s: Side| Ok(PieceRange::Side { side: s, span });
        match (head, span) {
            ("all", None) => Ok(PieceRange::All),
            ("left", None) => Ok(PieceRange::Endpoint(End::Left)),
            ("right", None) => Ok(PieceRange::Endpoint(End::Right)),
            ("left", Some(_)) => side(Side::Left),
            ("right", Some(_)) => side(Side::Right),
            ("top", _) => side(Side::Top),
            ("bottom", _) => side(Side::Bottom),
            ("theta", Some(sp)) => Ok(PieceRange::Theta(sp)),
            _ => Err(Error::Expression(format!("unrecognised boundary range `{src}`"))),
        }
    }

    /// `left`/`right` without a span name interval endpoints; on rectangles
    /// they mean the whole side.
    fn for_domain(self, domain: &Domain) -> Self {
        match (self, domain) {
            (PieceRange::Endpoint(End::Left), Domain::Rectangle { .. }) => {
                PieceRange::Side { side: Side::Left, span: None }
            }
            (PieceRange::Endpoint(End::Right), Domain::Rectangle { .. }) => {
                PieceRange::Side { side: Side::Right, span: None }
            }
            (r, _) => r,
        }
    }
}

fn parse_span(src: &str) -> Result<Span> {
    let bad = || Error::Expression(format!("bad span `{src}`, expected `[lo, hi)` or `[lo, hi]`"));
    let inner = src.strip_prefix('[').ok_or_else(bad)?;
    let (inner, closed) = if let Some(s) = inner.strip_suffix(')') {
        (s, false)
    } else if let Some(s) = inner.strip_suffix(']') {
        (s, true)
    } else {
        return Err(bad());
    };
    let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
    let (lo, hi) = (Expr::constant(lo)?, Expr::constant(hi)?);
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(bad());
    }
    Ok(Span { lo, hi, closed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub range: PieceRange,
    pub expr: Expr,
}

impl Piece {
    /// Parses `"<range>: <expression>"`.
    pub fn parse(src: &str) -> Result<Self> {
        let (range, expr) = src
            .split_once(':')
            .ok_or_else(|| Error::Expression(format!("piece `{src}` needs the form `<range>: <expression>`")))?;
        Ok(Piece { range: PieceRange::parse(range)?, expr: Expr::parse(expr)? })
    }
}

/// Piecewise boundary datum for one component; zero outside all pieces.
/// The first matching piece wins.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDatum {
    pub component: usize,
    pub pieces: Vec<Piece>,
}

impl BoundaryDatum {
    pub fn new(component: usize, pieces: Vec<Piece>) -> Self {
        BoundaryDatum { component, pieces }
    }

    pub fn parse(component: usize, pieces: &[&str]) -> Result<Self> {
        Ok(BoundaryDatum { component, pieces: pieces.iter().map(|p| Piece::parse(p)).collect::<Result<_>>()? })
    }

    pub fn zero(component: usize) -> Self {
        BoundaryDatum { component, pieces: Vec::new() }
    }
}

/// Value of `φ` at a boundary point. Non-disk domains see `theta` as the
/// polar angle of the point about the origin.
pub fn eval_boundary(datum: &BoundaryDatum, point: &BoundaryPoint, domain: &Domain) -> Result<f64> {
    let [x, y] = point.coord;
    let theta = match point.param {
        BoundaryParam::Angle(t) => t,
        _ => y.atan2(x).rem_euclid(TAU),
    };
    let piece = datum.pieces.iter().find(|p| p.range.for_domain(domain).matches(&point.param));
    let value = piece.map_or(0.0, |p| p.expr.eval(x, y, theta));
    if !value.is_finite() {
        return Err(Error::Expression(format!(
            "phi_{} is not finite at ({x}, {y})",
            datum.component
        )));
    }
    if value < 0.0 {
        return Err(Error::Config(vec![format!(
            "phi_{} = {value} is negative at boundary point ({x}, {y}); boundary data must be nonnegative",
            datum.component
        )]));
    }
    Ok(value)
}

/// Evaluates a datum at every boundary node of the grid.
pub fn evaluate_datum(datum: &BoundaryDatum, grid: &Grid) -> Result<BoundaryValues> {
    for p in &datum.pieces {
        if !p.range.for_domain(grid.domain()).fits(grid.domain()) {
            return Err(Error::Config(vec![format!(
                "phi_{}: range {:?} does not apply to domain {:?}",
                datum.component,
                p.range,
                grid.domain()
            )]));
        }
    }
    let values = grid
        .boundary_points()
        .iter()
        .map(|p| eval_boundary(datum, p, grid.domain()))
        .collect::<Result<Vec<_>>>()?;
    BoundaryValues::new(grid, values)
}

/// A boundary node where the product of all data exceeds the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct SegregationViolation {
    pub node: usize,
    pub coord: [f64; 2],
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SegregationReport {
    pub tol: f64,
    pub violations: Vec<SegregationViolation>,
}

impl SegregationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Default zero test for `Π φ_i`: `1e-12 · M^m`.
pub fn default_product_tol(values: &[BoundaryValues]) -> f64 {
    let m = values.len() as i32;
    let big = values.iter().map(BoundaryValues::max).fold(0.0, f64::max);
    1e-12 * big.powi(m)
}

/// Lists boundary nodes where `Π_i φ_i > tol` (default tolerance from
/// [`default_product_tol`]).
pub fn validate_partial_segregation(
    data: &[BoundaryDatum],
    grid: &Grid,
    tol: Option<f64>,
) -> Result<SegregationReport> {
    let values = data.iter().map(|d| evaluate_datum(d, grid)).collect::<Result<Vec<_>>>()?;
    Ok(segregation_report(&values, grid, tol))
}

pub fn segregation_report(values: &[BoundaryValues], grid: &Grid, tol: Option<f64>) -> SegregationReport {
    let tol = tol.unwrap_or_else(|| default_product_tol(values));
    let violations = grid
        .boundary_points()
        .iter()
        .enumerate()
        .filter_map(|(k, p)| {
            let product: f64 = values.iter().map(|v| v.values()[k]).product();
            (product > tol).then_some(SegregationViolation { node: p.node, coord: grid.coord(p.node), product })
        })
        .collect();
    SegregationReport { tol, violations }
}

/// Per-component coupling weight.
#[derive(Debug, Clone)]
pub enum Weight {
    Constant(f64),
    /// Nodal values over the whole grid.
    Field(ScalarField),
}

impl Weight {
    pub fn at(&self, node: usize) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Field(f) => f.get(node),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CouplingWeights {
    weights: Vec<Weight>,
}

impl CouplingWeights {
    pub fn new(weights: Vec<Weight>) -> Self {
        CouplingWeights { weights }
    }

    pub fn constants(values: &[f64]) -> Self {
        CouplingWeights { weights: values.iter().map(|&v| Weight::Constant(v)).collect() }
    }

    pub fn uniform(m: usize) -> Self {
        Self::constants(&vec![1.0; m])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> &Weight {
        &self.weights[i]
    }

    pub fn at(&self, i: usize, node: usize) -> f64 {
        self.weights[i].at(node)
    }

    /// All components share one weight function, so differences of
    /// components are harmonic.
    pub fn all_equal(&self) -> bool {
        let Some(first) = self.weights.first() else { return true };
        self.weights.iter().all(|w| match (first, w) {
            (Weight::Constant(a), Weight::Constant(b)) => a == b,
            (Weight::Field(a), Weight::Field(b)) => a.values() == b.values(),
            (Weight::Constant(a), Weight::Field(f)) | (Weight::Field(f), Weight::Constant(a)) => {
                f.domain_values().all(|v| v == *a)
            }
        })
    }

    pub fn all_one(&self) -> bool {
        self.weights.iter().all(|w| match w {
            Weight::Constant(c) => *c == 1.0,
            Weight::Field(f) => f.domain_values().all(|v| v == 1.0),
        })
    }

    /// Whether every weight is a constant (possibly different ones).
    pub fn all_constant(&self) -> bool {
        self.weights.iter().all(|w| matches!(w, Weight::Constant(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingIssue {
    NotPositive,
    ExceedsOthers,
}

impl fmt::Display for CouplingIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingIssue::NotPositive => "A_i must be positive",
            CouplingIssue::ExceedsOthers => "A_i must not exceed the sum of the other weights",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingViolation {
    /// Zero-based component index.
    pub component: usize,
    pub node: usize,
    pub value: f64,
    pub others: f64,
    pub issue: CouplingIssue,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CouplingReport {
    pub violations: Vec<CouplingViolation>,
}

impl CouplingReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `0 < A_i ≤ Σ_{j≠i} A_j` at every interior node.
pub fn validate_coupling(w: &CouplingWeights, grid: &Grid) -> CouplingReport {
    let mut violations = Vec::new();
    for &node in grid.interior_nodes() {
        let vals: Vec<f64> = (0..w.len()).map(|i| w.at(i, node)).collect();
        for (i, &a) in vals.iter().enumerate() {
            let others_exact: f64 = vals.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).sum();
            let issue = if !(a > 0.0) {
                Some(CouplingIssue::NotPositive)
            } else if a > others_exact {
                Some(CouplingIssue::ExceedsOthers)
            } else {
                None
            };
            if let Some(issue) = issue {
                violations.push(CouplingViolation { component: i, node, value: a, others: others_exact, issue });
            }
        }
    }
    CouplingReport { violations }
}

/// Exponents `α_i ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponents(Vec<f64>);

impl Exponents {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, a)) = values.iter().enumerate().find(|(_, a)| !(**a >= 1.0) || !a.is_finite()) {
            return Err(Error::Config(vec![format!("alpha_{} = {a} must be a finite number >= 1", i + 1)]));
        }
        Ok(Exponents(values))
    }

    pub fn ones(m: usize) -> Self {
        Exponents(vec![1.0; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn all_one(&self) -> bool {
        self.0.iter().all(|&a| a == 1.0)
    }
}

/// Everything the solvers need: grid, evaluated boundary data per component,
/// coupling weights and exponents.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: Arc<Grid>,
    boundary: Vec<BoundaryValues>,
    coupling: CouplingWeights,
    exponents: Exponents,
}

impl Problem {
    /// Evaluates the data on the grid. Structural checks only; the
    /// admissibility reports are separate (see [`Problem::segregation_report`]
    /// and [`Problem::coupling_report`]).
    pub fn new(
        grid: Arc<Grid>,
        data: &[BoundaryDatum],
        coupling: CouplingWeights,
        exponents: Exponents,
    ) -> Result<Self> {
        let boundary = data.iter().map(|d| evaluate_datum(d, &grid)).collect::<Result<Vec<_>>>()?;
        Self::from_values(grid, boundary, coupling, exponents)
    }

    pub fn from_values(
        grid: Arc<Grid>,
        boundary: Vec<BoundaryValues>,
        coupling: CouplingWeights,
        exponents: Exponents,
    ) -> Result<Self> {
        let m = boundary.len();
        let mut problems = Vec::new();
        if m == 0 {
            problems.push("at least one component is required".to_string());
        }
        if coupling.len() != m {
            problems.push(format!("{} coupling weights for {m} components", coupling.len()));
        }
        if exponents.values().len() != m {
            problems.push(format!("{} exponents for {m} components", exponents.values().len()));
        }
        for (i, b) in boundary.iter().enumerate() {
            if b.len() != grid.boundary_points().len() {
                problems.push(format!("phi_{} has the wrong number of boundary values", i + 1));
            } else if b.min() < 0.0 {
                problems.push(format!("phi_{} takes negative values", i + 1));
            }
        }
        for i in 0..coupling.len() {
            if let Weight::Field(f) = coupling.get(i) {
                if !f.same_grid(&ScalarField::zeros(&grid)) {
                    problems.push(format!("A_{} is tabulated on a different grid", i + 1));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        Ok(Problem { grid, boundary, coupling, exponents })
    }

    /// Same problem with every boundary datum scaled or replaced.
    pub fn with_boundary(&self, boundary: Vec<BoundaryValues>) -> Result<Self> {
        Self::from_values(Arc::clone(&self.grid), boundary, self.coupling.clone(), self.exponents.clone())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.boundary.len()
    }

    pub fn boundary(&self, i: usize) -> &BoundaryValues {
        &self.boundary[i]
    }

    pub fn boundaries(&self) -> &[BoundaryValues] {
        &self.boundary
    }

    pub fn coupling(&self) -> &CouplingWeights {
        &self.coupling
    }

    pub fn exponents(&self) -> &Exponents {
        &self.exponents
    }

    /// `M = max_i max_∂Ω φ_i`.
    pub fn max_boundary(&self) -> f64 {
        self.boundary.iter().map(BoundaryValues::max).fold(0.0, f64::max)
    }

    pub fn segregation_report(&self, tol: Option<f64>) -> SegregationReport {
        segregation_report(&self.boundary, &self.grid, tol)
    }

    pub fn coupling_report(&self) -> CouplingReport {
        validate_coupling(&self.coupling, &self.grid)
    }

    /// `φ_i - Σ_{j≠i} φ_j`, the data of the lower harmonic bound `H_i`.
    pub fn hat_boundary(&self, i: usize) -> BoundaryValues {
        let mut out = self.boundary[i].clone();
        for (j, b) in self.boundary.iter().enumerate() {
            if j != i {
                out = out.zip_map(b, |a, c| a - c);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_grid;
    use std::f64::consts::PI;

    fn disk(n: usize) -> Grid {
        build_grid(&Domain::Disk { center: [0.0, 0.0], radius: 1.0 }, n).unwrap()
    }

    fn square(n: usize) -> Grid {
        build_grid(&Domain::Rectangle { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 }, n).unwrap()
    }

    fn disk_triple() -> Vec<BoundaryDatum> {
        vec![
            BoundaryDatum::parse(1, &["theta [0, 4*pi/3): abs(sin(1.5*theta))"]).unwrap(),
            BoundaryDatum::parse(2, &["theta [2*pi/3, 2*pi): abs(sin(1.5*theta))"]).unwrap(),
            BoundaryDatum::parse(3, &["theta [4*pi/3, 8*pi/3): abs(sin(1.5*theta))"]).unwrap(),
        ]
    }

    fn square_quadruple() -> Vec<BoundaryDatum> {
        vec![
            BoundaryDatum::parse(1, &["top: 1 - x^2"]).unwrap(),
            BoundaryDatum::parse(2, &["right: 2*(1 - y^2)"]).unwrap(),
            BoundaryDatum::parse(3, &["bottom: 3*(1 - x^2)"]).unwrap(),
            BoundaryDatum::parse(4, &["left: 4*(1 - y^2)"]).unwrap(),
        ]
    }

    fn at_angle(theta: f64) -> BoundaryPoint {
        let param = BoundaryParam::Angle(theta);
        let domain = Domain::Disk { center: [0.0, 0.0], radius: 1.0 };
        BoundaryPoint { node: 0, coord: param.to_coord(&domain), param }
    }

    #[test]
    fn disk_phi1_values() {
        let domain = Domain::Disk { center: [0.0, 0.0], radius: 1.0 };
        let d = &disk_triple()[0];
        let v = eval_boundary(d, &at_angle(PI / 3.0), &domain).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(eval_boundary(d, &at_angle(1.5 * PI), &domain).unwrap(), 0.0);
    }

    #[test]
    fn wrapped_theta_range() {
        let domain = Domain::Disk { center: [0.0, 0.0], radius: 1.0 };
        let d = &disk_triple()[2];
        let v = eval_boundary(d, &at_angle(PI / 3.0), &domain).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(eval_boundary(d, &at_angle(PI), &domain).unwrap(), 0.0);
    }

    #[test]
    fn square_phi2_at_right_midpoint() {
        let domain = Domain::Rectangle { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 };
        let p = BoundaryPoint {
            node: 0,
            coord: [1.0, 0.0],
            param: BoundaryParam::Side { side: Side::Right, arclength: 1.0 },
        };
        assert_eq!(eval_boundary(&square_quadruple()[1], &p, &domain).unwrap(), 2.0);
        assert_eq!(eval_boundary(&square_quadruple()[0], &p, &domain).unwrap(), 0.0);
    }

    #[test]
    fn negative_data_rejected() {
        let g = square(5);
        let d = BoundaryDatum::parse(1, &["top: x"]).unwrap();
        assert!(matches!(evaluate_datum(&d, &g), Err(Error::Config(_))));
    }

    #[test]
    fn range_kind_must_fit_domain() {
        let g = square(5);
        let d = BoundaryDatum::parse(1, &["theta [0, 1): 1"]).unwrap();
        assert!(evaluate_datum(&d, &g).is_err());
    }

    #[test]
    fn segregation_shipped_examples_pass() {
        for n in [21, 64, 101] {
            let r = validate_partial_segregation(&disk_triple(), &disk(n), Some(1e-12)).unwrap();
            assert!(r.is_valid(), "n={n}: {:?}", r.violations.first());
        }
        let r = validate_partial_segregation(&square_quadruple(), &square(41), None).unwrap();
        assert!(r.is_valid());
    }

    #[test]
    fn segregation_scan_matches_support_argument() {
        // brute force: every boundary angle lies outside at least one support
        let g = disk(101);
        let supports = [(0.0, 4.0 * PI / 3.0), (2.0 * PI / 3.0, 2.0 * PI), (4.0 * PI / 3.0, 8.0 * PI / 3.0)];
        for p in g.boundary_points() {
            let BoundaryParam::Angle(t) = p.param else { unreachable!() };
            let outside = supports.iter().any(|&(lo, hi)| {
                let inside = |v: f64| v >= lo && v < hi;
                !(inside(t) || inside(t + TAU))
            });
            let zero_crossing = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0].iter().any(|z| (t - z).abs() < 1e-12);
            assert!(outside || zero_crossing, "theta {t}");
        }
    }

    #[test]
    fn full_overlap_reports_every_node() {
        let g = square(9);
        let data: Vec<_> = (1..=3).map(|i| BoundaryDatum::parse(i, &["all: 1"]).unwrap()).collect();
        let r = validate_partial_segregation(&data, &g, Some(1e-12)).unwrap();
        assert_eq!(r.violations.len(), g.boundary_points().len());
    }

    #[test]
    fn coupling_checks() {
        let g = square(5);
        assert!(validate_coupling(&CouplingWeights::constants(&[1.0, 1.0, 1.0]), &g).is_valid());
        let r = validate_coupling(&CouplingWeights::constants(&[1.0, 2.0]), &g);
        assert_eq!(r.violations.len(), g.interior_nodes().len());
        assert!(r.violations.iter().all(|v| v.component == 1 && v.issue == CouplingIssue::ExceedsOthers));
        assert!(validate_coupling(&CouplingWeights::constants(&[1.0, 1.0, 1.0, 3.0]), &g).is_valid());
        let r = validate_coupling(&CouplingWeights::constants(&[0.0, 1.0, 1.0]), &g);
        assert!(r.violations.iter().any(|v| v.issue == CouplingIssue::NotPositive));
    }

    #[test]
    fn exponents_at_least_one() {
        assert!(Exponents::new(vec![1.0, 2.5]).is_ok());
        assert!(Exponents::new(vec![0.5]).is_err());
        assert!(Exponents::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!(PieceRange::parse("all").unwrap(), PieceRange::All);
        assert_eq!(PieceRange::parse(" left ").unwrap(), PieceRange::Endpoint(End::Left));
        assert_eq!(
            PieceRange::parse("top [0, 1]").unwrap(),
            PieceRange::Side { side: Side::Top, span: Some(Span { lo: 0.0, hi: 1.0, closed: true }) }
        );
        assert!(PieceRange::parse("theta").is_err());
        assert!(PieceRange::parse("theta [1, 0)").is_err());
        assert!(PieceRange::parse("middle").is_err());
        assert!(Piece::parse("top 1 - x").is_err());
    }

    #[test]
    fn first_matching_piece_wins() {
        let g = build_grid(&Domain::Interval { a: 0.0, b: 1.0 }, 5).unwrap();
        let d = BoundaryDatum::parse(1, &["left: 2", "all: 7"]).unwrap();
        let v = evaluate_datum(&d, &g).unwrap();
        assert_eq!(v.values(), &[2.0, 7.0]);
    }
}
