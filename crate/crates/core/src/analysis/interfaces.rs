//! Zero sets `Z_i = {u_i < δ}`, the interfaces `Γ_{i,j}` between them, and
//! the free-boundary jump conditions.
//!
//! An interface element of the pair `(i, j)` is either an interior node lying
//! in both zero sets at which `u_i - u_j` changes sign, with both supports
//! reachable along the normal, or a lattice edge running from `Z_i \ Z_j` to
//! `Z_j \ Z_i`. Each element carries a point on the interface (the zero of
//! `u_i - u_j`, located by one linear step) and the unit normal
//! `∇(u_i - u_j) / |∇(u_i - u_j)|`, which points into `Z_j`.

use std::sync::Arc;

use crate::field::ScalarField;
use crate::geometry::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Node(usize),
    Edge(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceElement {
    pub kind: ElementKind,
    pub point: [f64; 2],
    pub normal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairInterface {
    /// Zero-based components, `i < j`.
    pub i: usize,
    pub j: usize,
    pub elements: Vec<InterfaceElement>,
    /// Both zero sets cover the whole closed domain.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct InterfaceSet {
    pub delta: f64,
    /// `zero[i][node]`: node lies in `Z_i`.
    pub zero: Vec<Vec<bool>>,
    pub pairs: Vec<PairInterface>,
    grid: Arc<Grid>,
}

impl InterfaceSet {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&PairInterface> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.pairs.iter().find(|p| p.i == i && p.j == j)
    }

    pub fn in_zero_set(&self, i: usize, node: usize) -> bool {
        self.zero[i][node]
    }

    /// Support `{u_i ≥ δ}` as a node mask.
    pub fn support(&self, i: usize) -> Vec<bool> {
        (0..self.grid.len()).map(|n| self.grid.in_domain(n) && !self.zero[i][n]).collect()
    }
}

/// Default zero-set threshold `max(10 · tol · M, h · M)`.
pub fn default_delta(grid: &Grid, linear_tol: f64, scale: f64) -> f64 {
    (10.0 * linear_tol * scale).max(grid.h() * scale)
}

/// Node gradient by central differences where both neighbours are in the
/// domain, one-sided otherwise.
fn gradient(u: &ScalarField, node: usize) -> [f64; 2] {
    let g = u.grid();
    let [hx, hy] = g.spacing();
    let nx = g.nx();
    let (i, j) = g.ij(node);
    let axis = |lo: Option<usize>, hi: Option<usize>, h: f64| {
        let lo = lo.filter(|&n| g.in_domain(n));
        let hi = hi.filter(|&n| g.in_domain(n));
        match (lo, hi) {
            (Some(a), Some(b)) => (u.get(b) - u.get(a)) / (2.0 * h),
            (Some(a), None) => (u.get(node) - u.get(a)) / h,
            (None, Some(b)) => (u.get(b) - u.get(node)) / h,
            (None, None) => 0.0,
        }
    };
    let gx = axis((i > 0).then(|| node - 1), (i + 1 < nx).then(|| node + 1), hx);
    let gy = if g.dim() == 2 {
        axis((j > 0).then(|| node - nx), (j + 1 < g.ny()).then(|| node + nx), hy)
    } else {
        0.0
    };
    [gx, gy]
}

fn unit(v: [f64; 2], fallback: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    if n > 0.0 && n.is_finite() {
        [v[0] / n, v[1] / n]
    } else {
        fallback
    }
}

/// `d` takes strictly opposite signs at `node` and a neighbour with
/// `|d(node)|` the smaller of the two, or vanishes at `node` between
/// neighbours of both strict signs.
fn crossing(d: &ScalarField, node: usize) -> bool {
    let g = d.grid();
    let v = d.get(node);
    let mut signs = [false; 2];
    for (q, _) in g.neighbors(node).filter(|&(q, _)| g.in_domain(q)) {
        let w = d.get(q);
        if v != 0.0 && v * w < 0.0 && v.abs() <= w.abs() {
            return true;
        }
        if w > 0.0 {
            signs[0] = true;
        } else if w < 0.0 {
            signs[1] = true;
        }
    }
    v == 0.0 && signs[0] && signs[1]
}

/// `u_i ≥ δ` somewhere along `+n` and `u_j ≥ δ` somewhere along `-n`,
/// both within `reach` of `p`.
fn flanked(ui: &ScalarField, uj: &ScalarField, p: [f64; 2], n: [f64; 2], delta: f64, reach: f64) -> bool {
    let step = 0.5 * ui.grid().h();
    let hits = |u: &ScalarField, dir: f64| {
        let mut s = step;
        while s <= reach {
            match sample(u, [p[0] + dir * s * n[0], p[1] + dir * s * n[1]]) {
                Some(v) if v >= delta => return true,
                Some(_) => s += step,
                None => return false,
            }
        }
        false
    };
    hits(ui, 1.0) && hits(uj, -1.0)
}

/// Zero sets and pairwise interfaces of `fields` at threshold `delta`.
pub fn extract_supports_and_interfaces(fields: &[ScalarField], delta: f64) -> InterfaceSet {
    assert!(delta > 0.0, "zero-set threshold must be positive");
    let grid = Arc::clone(fields[0].grid());
    let g = &grid;
    let m = fields.len();
    let zero: Vec<Vec<bool>> =
        fields.iter().map(|u| (0..g.len()).map(|n| g.in_domain(n) && u.get(n) < delta).collect()).collect();
    let h = g.h();
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let d = &fields[i] - &fields[j];
            let (zi, zj) = (&zero[i], &zero[j]);
            let mut elements = Vec::new();
            let mut both = 0usize;
            let mut in_domain = 0usize;
            for node in 0..g.len() {
                if !g.in_domain(node) {
                    continue;
                }
                in_domain += 1;
                if zi[node] && zj[node] {
                    both += 1;
                    if g.interior_index(node).is_some() && crossing(&d, node) {
                        let grad = gradient(&d, node);
                        let norm2 = grad[0] * grad[0] + grad[1] * grad[1];
                        let c = g.coord(node);
                        let mut shift = if norm2 > 0.0 { -d.get(node) / norm2 } else { 0.0 };
                        let len = shift.abs() * norm2.sqrt();
                        if len > h {
                            shift *= h / len;
                        }
                        let point = [c[0] + shift * grad[0], c[1] + shift * grad[1]];
                        let normal = unit(grad, [1.0, 0.0]);
                        let reach = (4.0 * h + 2.0 * delta / norm2.sqrt()).min(20.0 * h);
                        if flanked(&fields[i], &fields[j], point, normal, delta, reach) {
                            elements.push(InterfaceElement { kind: ElementKind::Node(node), point, normal });
                        }
                    }
                }
                for (next, _) in g.neighbors(node) {
                    if next < node || !g.in_domain(next) {
                        continue;
                    }
                    let forward = zi[node] && !zj[node] && zj[next] && !zi[next];
                    let backward = zj[node] && !zi[node] && zi[next] && !zj[next];
                    if !(forward || backward) {
                        continue;
                    }
                    let (da, db) = (d.get(node), d.get(next));
                    let t = if da != db { (da / (da - db)).clamp(0.0, 1.0) } else { 0.5 };
                    let (a, b) = (g.coord(node), g.coord(next));
                    let (ga, gb) = (gradient(&d, node), gradient(&d, next));
                    let grad = [(1.0 - t) * ga[0] + t * gb[0], (1.0 - t) * ga[1] + t * gb[1]];
                    let along = [b[0] - a[0], b[1] - a[1]];
                    let fallback = unit(if forward { along } else { [-along[0], -along[1]] }, [1.0, 0.0]);
                    elements.push(InterfaceElement {
                        kind: ElementKind::Edge(node, next),
                        point: [a[0] + t * along[0], a[1] + t * along[1]],
                        normal: unit(grad, fallback),
                    });
                }
            }
            pairs.push(PairInterface { i, j, elements, degenerate: both == in_domain });
        }
    }
    InterfaceSet { delta, zero, pairs, grid }
}

/// Linear (1D) or bilinear (2D) interpolation; `None` outside the lattice or
/// when a supporting node is exterior.
fn sample(u: &ScalarField, p: [f64; 2]) -> Option<f64> {
    let g = u.grid();
    let [hx, hy] = g.spacing();
    let [x0, y0] = g.origin();
    let locate = |v: f64, o: f64, h: f64, n: usize| -> Option<(usize, f64)> {
        let s = (v - o) / h;
        let eps = 1e-9;
        if s < -eps || s > (n - 1) as f64 + eps {
            return None;
        }
        let s = s.clamp(0.0, (n - 1) as f64);
        let k = (s.floor() as usize).min(n - 2);
        Some((k, s - k as f64))
    };
    let (i, fx) = locate(p[0], x0, hx, g.nx())?;
    if g.dim() == 1 {
        let (a, b) = (i, i + 1);
        if !g.in_domain(a) || !g.in_domain(b) {
            return None;
        }
        return Some((1.0 - fx) * u.get(a) + fx * u.get(b));
    }
    let (j, fy) = locate(p[1], y0, hy, g.ny())?;
    let corners = [g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)];
    if corners.iter().any(|&n| !g.in_domain(n)) {
        return None;
    }
    let v = corners.map(|n| u.get(n));
    Some((1.0 - fy) * ((1.0 - fx) * v[0] + fx * v[1]) + fy * ((1.0 - fx) * v[2] + fx * v[3]))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JumpSettings {
    /// Sampling offset along the normal; `h` in 1D and `2h` in 2D when unset.
    pub step: Option<f64>,
}

/// Residual statistics of the two jump identities for one pair.
///
/// With `n` the normal pointing into `Z_j`:
/// first identity `∂_n u_i|_{Z_j side} + ∂_n u_j|_{Z_i side} = 0`,
/// second identity `∂_n u_k|_{Z_j side} - ∂_n u_k|_{Z_i side} - ∂_n u_i|_{Z_j side} = 0`
/// for every `k ≠ i, j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JumpStats {
    pub i: usize,
    pub j: usize,
    pub checked: usize,
    /// Elements whose stencils leave the domain or do not sit in the proper
    /// zero sets.
    pub skipped: usize,
    pub first_max: f64,
    pub first_mean: f64,
    pub second_checked: usize,
    pub second_max: f64,
    pub second_mean: f64,
}

pub fn jump_condition_check(fields: &[ScalarField], set: &InterfaceSet, settings: &JumpSettings) -> Vec<JumpStats> {
    let g = set.grid();
    let t = settings.step.unwrap_or(if g.dim() == 1 { g.h() } else { 2.0 * g.h() });
    let delta = set.delta;
    set.pairs
        .iter()
        .map(|pair| {
            let (i, j) = (pair.i, pair.j);
            let mut st = JumpStats { i, j, ..Default::default() };
            let (mut sum1, mut sum2) = (0.0, 0.0);
            for e in &pair.elements {
                let at = |s: f64| [e.point[0] + s * e.normal[0], e.point[1] + s * e.normal[1]];
                let (j1, j2, i1, i2) = (at(t), at(2.0 * t), at(-t), at(-2.0 * t));
                let vals = |u: &ScalarField| -> Option<[f64; 4]> {
                    Some([sample(u, j1)?, sample(u, j2)?, sample(u, i1)?, sample(u, i2)?])
                };
                let (Some(ui), Some(uj)) = (vals(&fields[i]), vals(&fields[j])) else {
                    st.skipped += 1;
                    continue;
                };
                let proper = uj[0] < delta && uj[1] < delta && ui[2] < delta && ui[3] < delta;
                if !proper {
                    st.skipped += 1;
                    continue;
                }
                let di_on_j = (ui[1] - ui[0]) / t;
                let dj_on_i = (uj[2] - uj[3]) / t;
                let r1 = (di_on_j + dj_on_i).abs();
                st.checked += 1;
                sum1 += r1;
                st.first_max = st.first_max.max(r1);
                for (k, uk) in fields.iter().enumerate() {
                    if k == i || k == j {
                        continue;
                    }
                    let Some(v) = vals(uk) else { continue };
                    let r2 = ((v[1] - v[0]) / t - (v[2] - v[3]) / t - di_on_j).abs();
                    st.second_checked += 1;
                    sum2 += r2;
                    st.second_max = st.second_max.max(r2);
                }
            }
            if st.checked > 0 {
                st.first_mean = sum1 / st.checked as f64;
            }
            if st.second_checked > 0 {
                st.second_mean = sum2 / st.second_checked as f64;
            }
            st
        })
        .collect()
}

/// Positions in [`Grid::boundary_points`] where the pair's interface reaches
/// the boundary: boundary nodes in both zero sets next to an interface node,
/// and boundary endpoints of interface edges. Sorted, without duplicates.
pub fn boundary_contacts(set: &InterfaceSet, i: usize, j: usize) -> Vec<usize> {
    let g = set.grid();
    let Some(pair) = set.pair(i, j) else { return Vec::new() };
    let mut position = vec![usize::MAX; g.len()];
    for (k, p) in g.boundary_points().iter().enumerate() {
        position[p.node] = k;
    }
    let mut out = Vec::new();
    for e in &pair.elements {
        match e.kind {
            ElementKind::Node(n) => {
                for (q, _) in g.neighbors(n) {
                    if position[q] != usize::MAX && set.zero[pair.i][q] && set.zero[pair.j][q] {
                        out.push(position[q]);
                    }
                }
            }
            ElementKind::Edge(a, b) => {
                out.extend([a, b].into_iter().filter(|&q| position[q] != usize::MAX).map(|q| position[q]));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Point minimizing the largest distance to the given pairs' interfaces,
/// searched over the interface points themselves. Returns the point and that
/// distance, or `None` if some pair has no elements.
pub fn meeting_point(set: &InterfaceSet, pairs: &[(usize, usize)]) -> Option<([f64; 2], f64)> {
    let clouds: Vec<Vec<[f64; 2]>> = pairs
        .iter()
        .map(|&(i, j)| set.pair(i, j).map(|p| p.elements.iter().map(|e| e.point).collect()).unwrap_or_default())
        .collect();
    if clouds.iter().any(Vec::is_empty) {
        return None;
    }
    let dist = |p: [f64; 2], cloud: &[[f64; 2]]| {
        cloud.iter().map(|q| (p[0] - q[0]).hypot(p[1] - q[1])).fold(f64::INFINITY, f64::min)
    };
    clouds
        .iter()
        .flatten()
        .map(|&p| (p, clouds.iter().map(|c| dist(p, c)).fold(0.0, f64::max)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}
