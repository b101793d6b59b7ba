//! Reference elements, quadrature and the DOF layout of the mixed space.

mod quadrature;
mod reference;

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use crate::mesh::Mesh2D;

pub use quadrature::{edge_quadrature, triangle_quadrature, QuadratureRule};
pub use reference::ReferenceElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeError {
    #[error("unsupported polynomial degree {0}, expected 1 or 2")]
    UnsupportedDegree(usize),
    #[error("degree_high ({high}) must be at least degree_low ({low})")]
    DegreeOrder { high: usize, low: usize },
    #[error("no quadrature rule of exactness degree {0}")]
    UnsupportedQuadrature(usize),
    #[error("unknown field '{0}'")]
    UnknownField(String),
}

/// The five unknowns in block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    HeatFlux,
    Temperature,
    Stress,
    Velocity,
    Pressure,
}

/// The nine scalar components in block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Sx,
    Sy,
    Theta,
    SigmaXX,
    SigmaXY,
    SigmaYY,
    Ux,
    Uy,
    P,
}

impl Variable {
    pub const ALL: [Variable; 5] = [
        Variable::HeatFlux,
        Variable::Temperature,
        Variable::Stress,
        Variable::Velocity,
        Variable::Pressure,
    ];

    pub fn components(self) -> &'static [Component] {
        use Component::*;
        match self {
            Variable::HeatFlux => &[Sx, Sy],
            Variable::Temperature => &[Theta],
            Variable::Stress => &[SigmaXX, SigmaXY, SigmaYY],
            Variable::Velocity => &[Ux, Uy],
            Variable::Pressure => &[P],
        }
    }

    pub fn n_components(self) -> usize {
        self.components().len()
    }

    /// Higher-order moments take the high degree.
    pub fn is_high_order(self) -> bool {
        matches!(self, Variable::HeatFlux | Variable::Stress)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::HeatFlux => "s",
            Variable::Temperature => "theta",
            Variable::Stress => "sigma",
            Variable::Velocity => "u",
            Variable::Pressure => "p",
        }
    }

    pub fn from_name(name: &str) -> Result<Variable, FeError> {
        Variable::ALL
            .into_iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| FeError::UnknownField(name.to_string()))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Component {
    pub const ALL: [Component; 9] = [
        Component::Sx,
        Component::Sy,
        Component::Theta,
        Component::SigmaXX,
        Component::SigmaXY,
        Component::SigmaYY,
        Component::Ux,
        Component::Uy,
        Component::P,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn variable(self) -> Variable {
        use Component::*;
        match self {
            Sx | Sy => Variable::HeatFlux,
            Theta => Variable::Temperature,
            SigmaXX | SigmaXY | SigmaYY => Variable::Stress,
            Ux | Uy => Variable::Velocity,
            P => Variable::Pressure,
        }
    }

    /// Names used in output files.
    pub fn name(self) -> &'static str {
        use Component::*;
        match self {
            Sx => "sx",
            Sy => "sy",
            Theta => "theta",
            SigmaXX => "sigmaxx",
            SigmaXY => "sigmaxy",
            SigmaYY => "sigmayy",
            Ux => "ux",
            Uy => "uy",
            P => "p",
        }
    }

    pub fn from_name(name: &str) -> Result<Component, FeError> {
        Component::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| FeError::UnknownField(name.to_string()))
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scalar Lagrange DOFs of one degree: vertices first, then (P2) edges.
#[derive(Debug, Clone)]
pub struct ScalarDofMap {
    element: ReferenceElement,
    n_dofs: usize,
    cell_dofs: Vec<usize>,
}

impl ScalarDofMap {
    pub fn new(mesh: &Mesh2D, degree: usize) -> Result<Self, FeError> {
        let element = ReferenceElement::new(degree)?;
        let k = element.n_nodes();
        let nv = mesh.n_vertices();
        let mut cell_dofs = Vec::with_capacity(k * mesh.n_cells());
        for (c, verts) in mesh.cells().iter().enumerate() {
            cell_dofs.extend_from_slice(verts);
            if degree == 2 {
                cell_dofs.extend(mesh.cell_edges()[c].iter().map(|e| nv + e));
            }
        }
        let n_dofs = if degree == 1 { nv } else { nv + mesh.n_edges() };
        Ok(ScalarDofMap { element, n_dofs, cell_dofs })
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_local(&self) -> usize {
        self.element.n_nodes()
    }

    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        let k = self.n_local();
        &self.cell_dofs[cell * k..(cell + 1) * k]
    }

    /// Coordinates of every scalar DOF (vertex or edge midpoint).
    pub fn dof_points(&self, mesh: &Mesh2D) -> Vec<[f64; 2]> {
        let mut pts = mesh.vertices().to_vec();
        if self.element.degree() == 2 {
            for e in mesh.edges() {
                let (a, b) = (mesh.vertices()[e[0]], mesh.vertices()[e[1]]);
                pts.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
            }
        }
        pts
    }
}

/// Global layout of the nine scalar components.
///
/// Each component owns a contiguous range; ranges follow [`Component::ALL`].
#[derive(Debug, Clone)]
pub struct MixedSpace {
    mesh: Arc<Mesh2D>,
    degree_high: usize,
    degree_low: usize,
    high: ScalarDofMap,
    low: Option<ScalarDofMap>,
    offsets: [usize; 10],
}

impl MixedSpace {
    pub fn new(mesh: Arc<Mesh2D>, degree_high: usize, degree_low: usize) -> Result<Self, FeError> {
        ReferenceElement::new(degree_high)?;
        ReferenceElement::new(degree_low)?;
        if degree_high < degree_low {
            return Err(FeError::DegreeOrder { high: degree_high, low: degree_low });
        }
        let high = ScalarDofMap::new(&mesh, degree_high)?;
        let low = if degree_low != degree_high { Some(ScalarDofMap::new(&mesh, degree_low)?) } else { None };
        let mut offsets = [0; 10];
        for (i, c) in Component::ALL.iter().enumerate() {
            let n = if c.variable().is_high_order() {
                high.n_dofs()
            } else {
                low.as_ref().unwrap_or(&high).n_dofs()
            };
            offsets[i + 1] = offsets[i] + n;
        }
        Ok(MixedSpace { mesh, degree_high, degree_low, high, low, offsets })
    }

    pub fn mesh(&self) -> &Arc<Mesh2D> {
        &self.mesh
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.degree_high, self.degree_low)
    }

    pub fn degree(&self, var: Variable) -> usize {
        if var.is_high_order() {
            self.degree_high
        } else {
            self.degree_low
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.offsets[9]
    }

    pub fn dof_map(&self, var: Variable) -> &ScalarDofMap {
        if var.is_high_order() {
            &self.high
        } else {
            self.low.as_ref().unwrap_or(&self.high)
        }
    }

    pub fn component_range(&self, c: Component) -> Range<usize> {
        self.offsets[c.index()]..self.offsets[c.index() + 1]
    }

    pub fn variable_range(&self, v: Variable) -> Range<usize> {
        let comps = v.components();
        self.component_range(comps[0]).start..self.component_range(comps[comps.len() - 1]).end
    }

    pub fn global_dof(&self, c: Component, scalar: usize) -> usize {
        self.offsets[c.index()] + scalar
    }

    /// Values and physical gradients of the scalar basis of `var` on `cell`.
    pub fn eval_basis(&self, var: Variable, cell: usize, xi: f64, eta: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let el = self.dof_map(var).element();
        let n = el.n_nodes();
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        el.values(xi, eta, &mut v);
        el.gradients(xi, eta, &mut g);
        let jit = self.mesh.cell_geometry(cell).inverse_jacobian_t;
        (v, g.iter().map(|r| map_gradient(&jit, r)).collect())
    }
}

/// Physical gradient from a reference gradient: `J^{-T} grad_ref`.
pub fn map_gradient(jit: &[[f64; 2]; 2], g: &[f64; 2]) -> [f64; 2] {
    [jit[0][0] * g[0] + jit[0][1] * g[1], jit[1][0] * g[0] + jit[1][1] * g[1]]
}

/// Reference coordinates of a physical point for the affine map of a cell.
pub fn reference_coords(p: [[f64; 2]; 3], x: [f64; 2]) -> [f64; 2] {
    let (a, b) = ([p[1][0] - p[0][0], p[1][1] - p[0][1]], [p[2][0] - p[0][0], p[2][1] - p[0][1]]);
    let det = a[0] * b[1] - a[1] * b[0];
    let r = [x[0] - p[0][0], x[1] - p[0][1]];
    [(r[0] * b[1] - r[1] * b[0]) / det, (a[0] * r[1] - a[1] * r[0]) / det]
}

/// Physical point of reference coordinates on a cell.
pub fn physical_point(p: [[f64; 2]; 3], xi: f64, eta: f64) -> [f64; 2] {
    [
        p[0][0] + xi * (p[1][0] - p[0][0]) + eta * (p[2][0] - p[0][0]),
        p[0][1] + xi * (p[1][1] - p[0][1]) + eta * (p[2][1] - p[0][1]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh2D;

    fn square() -> Arc<Mesh2D> {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let segs = [([0, 1], 1), ([1, 2], 2), ([2, 3], 3), ([3, 0], 4)];
        Arc::new(Mesh2D::new(v, vec![[0, 1, 2], [0, 2, 3]], &segs).unwrap())
    }

    #[test]
    fn dof_counts() {
        assert_eq!(MixedSpace::new(square(), 1, 1).unwrap().n_dofs(), 36);
        assert_eq!(MixedSpace::new(square(), 2, 2).unwrap().n_dofs(), 81);
        assert_eq!(MixedSpace::new(square(), 2, 1).unwrap().n_dofs(), 61);
        assert!(MixedSpace::new(square(), 1, 2).is_err());
        assert!(MixedSpace::new(square(), 3, 1).is_err());
    }

    #[test]
    fn ranges_partition_the_dofs() {
        let s = MixedSpace::new(square(), 2, 1).unwrap();
        let mut next = 0;
        for c in Component::ALL {
            let r = s.component_range(c);
            assert_eq!(r.start, next);
            next = r.end;
        }
        assert_eq!(next, s.n_dofs());
        assert_eq!(s.variable_range(Variable::Stress).len(), 27);
    }

    #[test]
    fn linear_field_has_constant_gradient() {
        let s = MixedSpace::new(square(), 1, 1).unwrap();
        let m = s.mesh().clone();
        for cell in 0..m.n_cells() {
            let (_, g) = s.eval_basis(Variable::Temperature, cell, 0.3, 0.2);
            let dofs = s.dof_map(Variable::Temperature).cell_dofs(cell);
            let mut grad = [0.0; 2];
            for (k, &d) in dofs.iter().enumerate() {
                let p = m.vertices()[d];
                let f = 2.0 * p[0] + 3.0 * p[1];
                grad[0] += f * g[k][0];
                grad[1] += f * g[k][1];
            }
            assert!((grad[0] - 2.0).abs() < 1e-14 && (grad[1] - 3.0).abs() < 1e-14);
        }
    }
}
