//! Discrete solutions, error measures, functionals, sampling and file output.

mod locate;
mod measures;
mod output;

use std::sync::Arc;

use crate::fespace::{Component, MixedSpace};
use crate::mesh::Mesh2D;

pub use locate::PointLocator;
pub use measures::{
    error_l2, error_linf_nodes, error_report, extrema, line_sample, mass_flow, pump_mean_velocity,
    significant_extrema,
    ErrorReport, ExtremumKind, Extremum, L2Error, PostprocError,
};
pub use output::{nodal_table, write_csv, write_vtk, Table};

/// A coefficient vector together with its space.
#[derive(Debug, Clone)]
pub struct Solution {
    coeffs: Vec<f64>,
    space: Arc<MixedSpace>,
    locator: PointLocator,
}

impl Solution {
    pub fn new(space: Arc<MixedSpace>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.n_dofs(), "coefficient vector does not match the space");
        let locator = PointLocator::new(space.mesh());
        Solution { coeffs, space, locator }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn space(&self) -> &Arc<MixedSpace> {
        &self.space
    }

    pub fn mesh(&self) -> &Mesh2D {
        self.space.mesh()
    }

    /// Scalar coefficients of one component.
    pub fn component(&self, c: Component) -> &[f64] {
        &self.coeffs[self.space.component_range(c)]
    }

    /// Value of `c` at reference point `r` of `cell`.
    pub fn eval_in_cell(&self, c: Component, cell: usize, r: [f64; 2]) -> f64 {
        let map = self.space.dof_map(c.variable());
        let el = map.element();
        let mut phi = [0.0; 6];
        el.values(r[0], r[1], &mut phi[..el.n_nodes()]);
        let coef = self.component(c);
        map.cell_dofs(cell).iter().zip(&phi).map(|(&d, &v)| coef[d] * v).sum()
    }

    /// Value at a physical point, or `None` outside the mesh.
    pub fn eval(&self, c: Component, p: [f64; 2]) -> Option<f64> {
        let (cell, r) = self.locator.locate(self.mesh(), p)?;
        Some(self.eval_in_cell(c, cell, r))
    }

    /// Value at a physical point, extrapolating from the nearest cell outside
    /// the mesh (curved boundaries of a finer mesh can stick out).
    pub fn eval_extrapolated(&self, c: Component, p: [f64; 2]) -> f64 {
        let (cell, r) = self.locator.locate_or_nearest(self.mesh(), p);
        self.eval_in_cell(c, cell, r)
    }

    /// Values at the mesh vertices; vertex DOFs come first for both degrees.
    pub fn vertex_values(&self, c: Component) -> &[f64] {
        &self.component(c)[..self.mesh().n_vertices()]
    }
}
