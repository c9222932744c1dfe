//! Nodal scalar fields and Dirichlet data.

use std::ops::{Add, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, Grid, NodeClass};

/// One real value per grid node. Exterior nodes always hold 0.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ScalarField { grid: Arc::clone(grid), values: vec![0.0; grid.len()] }
    }

    /// Samples `f` at the coordinates of every interior and boundary node.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|node| if grid.in_domain(node) { f(grid.coord(node)) } else { 0.0 })
            .collect();
        ScalarField { grid: Arc::clone(grid), values }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {node}")));
        }
        let mut f = ScalarField { grid: Arc::clone(grid), values };
        for (v, class) in f.values.iter_mut().zip(grid.classes()) {
            if *class == NodeClass::Exterior {
                *v = 0.0;
            }
        }
        Ok(f)
    }

    pub(crate) fn from_raw(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid: Arc::clone(grid), values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_lattice(&other.grid)
    }

    /// Values over interior and boundary nodes.
    pub fn domain_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(self.grid.classes())
            .filter(|(_, c)| **c != NodeClass::Exterior)
            .map(|(v, _)| *v)
    }

    pub fn max(&self) -> f64 {
        self.domain_values().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.domain_values().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.domain_values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self - other|` over the closed domain.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        assert!(self.same_grid(other), "fields live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.grid.classes())
            .filter(|(_, c)| **c != NodeClass::Exterior)
            .fold(0.0, |m, ((a, b), _)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        let values = self
            .values
            .iter()
            .zip(self.grid.classes())
            .map(|(v, c)| if *c == NodeClass::Exterior { 0.0 } else { f(*v) })
            .collect();
        ScalarField { grid: Arc::clone(&self.grid), values }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert!(self.same_grid(other), "fields live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.classes())
            .map(|((a, b), c)| if *c == NodeClass::Exterior { 0.0 } else { f(*a, *b) })
            .collect();
        ScalarField { grid: Arc::clone(&self.grid), values }
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        self.map(|v| s * v)
    }

    /// Restriction to the boundary nodes, in boundary-point order.
    pub fn boundary_values(&self) -> BoundaryValues {
        BoundaryValues { values: self.grid.boundary_nodes().map(|n| self.values[n]).collect() }
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Dirichlet values, one per boundary node in [`Grid::boundary_points`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues {
    values: Vec<f64>,
}

impl BoundaryValues {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.boundary_points().len() {
            return Err(Error::InvalidArgument(format!(
                "{} boundary values for {} boundary nodes",
                values.len(),
                grid.boundary_points().len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite boundary value at position {k}")));
        }
        Ok(BoundaryValues { values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&BoundaryPoint) -> f64) -> Self {
        BoundaryValues { values: grid.boundary_points().iter().map(f).collect() }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        BoundaryValues { values: vec![c; grid.boundary_points().len()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn zip_map(&self, other: &BoundaryValues, f: impl Fn(f64, f64) -> f64) -> BoundaryValues {
        assert_eq!(self.values.len(), other.values.len());
        BoundaryValues { values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn scaled(&self, s: f64) -> BoundaryValues {
        BoundaryValues { values: self.values.iter().map(|v| s * v).collect() }
    }
}
