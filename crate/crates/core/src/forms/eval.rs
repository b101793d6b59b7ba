//! Basis tables at quadrature points of cells, boundary edges and interior edges.

use crate::fespace::{
    edge_quadrature, map_gradient, physical_point, reference_coords, triangle_quadrature, FeError,
    MixedSpace, QuadratureRule, ReferenceElement, Variable,
};
use crate::mesh::{EdgeFrame, Mesh2D, MeshError};

/// Scalar basis values and physical gradients, stored point-major (`q * n + a`).
#[derive(Debug, Clone, Default)]
pub struct BasisTable {
    pub n: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl BasisTable {
    pub fn value(&self, q: usize, a: usize) -> f64 {
        self.values[q * self.n + a]
    }

    pub fn grad(&self, q: usize, a: usize) -> [f64; 2] {
        self.grads[q * self.n + a]
    }
}

/// Precomputed reference values for both degrees on a fixed rule.
#[derive(Debug, Clone)]
struct RefTable {
    n: usize,
    values: Vec<f64>,
    grads: Vec<[f64; 2]>,
}

impl RefTable {
    fn new(el: &ReferenceElement, rule: &QuadratureRule) -> Self {
        let n = el.n_nodes();
        let mut values = vec![0.0; n * rule.len()];
        let mut grads = vec![[0.0; 2]; n * rule.len()];
        for (q, p) in rule.points.iter().enumerate() {
            el.values(p[0], p[1], &mut values[q * n..(q + 1) * n]);
            el.gradients(p[0], p[1], &mut grads[q * n..(q + 1) * n]);
        }
        RefTable { n, values, grads }
    }
}

/// Cell quadrature data, refilled in place for each cell.
#[derive(Debug, Clone)]
pub struct CellEval {
    rule: QuadratureRule,
    refs: [RefTable; 2],
    pub cell: usize,
    pub points: Vec<[f64; 2]>,
    /// Quadrature weight times `|det J|`.
    pub weights: Vec<f64>,
    tables: [BasisTable; 2],
    degrees: (usize, usize),
}

impl CellEval {
    pub fn new(space: &MixedSpace, quad_degree: usize) -> Result<Self, FeError> {
        let rule = triangle_quadrature(quad_degree)?;
        let refs = [
            RefTable::new(&ReferenceElement::new(1)?, &rule),
            RefTable::new(&ReferenceElement::new(2)?, &rule),
        ];
        let nq = rule.len();
        Ok(CellEval {
            rule,
            refs,
            cell: usize::MAX,
            points: vec![[0.0; 2]; nq],
            weights: vec![0.0; nq],
            tables: Default::default(),
            degrees: space.degrees(),
        })
    }

    pub fn n_points(&self) -> usize {
        self.rule.len()
    }

    pub fn reset(&mut self, mesh: &Mesh2D, cell: usize) {
        self.cell = cell;
        let g = mesh.cell_geometry(cell);
        let pts = mesh.cell_points(cell);
        for (q, p) in self.rule.points.iter().enumerate() {
            self.points[q] = physical_point(pts, p[0], p[1]);
            self.weights[q] = self.rule.weights[q] * g.det.abs();
        }
        let (hi, lo) = self.degrees;
        for d in [lo, hi] {
            let r = &self.refs[d - 1];
            let t = &mut self.tables[d - 1];
            t.n = r.n;
            t.values.clone_from(&r.values);
            t.grads.clear();
            t.grads.extend(r.grads.iter().map(|gr| map_gradient(&g.inverse_jacobian_t, gr)));
        }
    }

    pub fn basis(&self, degree: usize) -> &BasisTable {
        &self.tables[degree - 1]
    }
}

/// Trace bases of one degree on an edge: dofs on the edge and their values.
#[derive(Debug, Clone, Default)]
pub struct TraceTable {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl TraceTable {
    pub fn n(&self) -> usize {
        self.dofs.len()
    }

    pub fn value(&self, q: usize, a: usize) -> f64 {
        self.values[q * self.dofs.len() + a]
    }
}

/// Boundary-edge quadrature data with edge-local trace bases.
#[derive(Debug, Clone)]
pub struct BoundaryEval {
    rule: QuadratureRule,
    pub index: usize,
    pub cell: usize,
    pub tag: u32,
    pub frame: EdgeFrame,
    pub points: Vec<[f64; 2]>,
    /// Quadrature weight times edge length.
    pub weights: Vec<f64>,
    pub chi_tilde: f64,
    pub epsilon_w: f64,
    traces: [TraceTable; 2],
}

impl BoundaryEval {
    pub fn new(quad_degree: usize) -> Result<Self, FeError> {
        let rule = edge_quadrature(quad_degree)?;
        let nq = rule.len();
        Ok(BoundaryEval {
            rule,
            index: usize::MAX,
            cell: 0,
            tag: 0,
            frame: EdgeFrame { n: [0.0; 2], t: [0.0; 2], length: 0.0 },
            points: vec![[0.0; 2]; nq],
            weights: vec![0.0; nq],
            chi_tilde: 1.0,
            epsilon_w: 0.0,
            traces: Default::default(),
        })
    }

    pub fn n_points(&self) -> usize {
        self.rule.len()
    }

    pub fn reset(
        &mut self,
        mesh: &Mesh2D,
        index: usize,
        chi_tilde: f64,
        epsilon_w: f64,
    ) -> Result<(), MeshError> {
        let be = mesh.boundary_edges()[index];
        let [va, vb] = be.vertices;
        self.index = index;
        self.cell = be.cell;
        self.tag = be.tag;
        self.frame = mesh.edge_frame(va, vb, be.cell)?;
        self.chi_tilde = chi_tilde;
        self.epsilon_w = epsilon_w;
        let (pa, pb) = (mesh.vertices()[va], mesh.vertices()[vb]);
        let nq = self.rule.len();
        for q in 0..nq {
            let s = self.rule.points[q][0];
            self.points[q] = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            self.weights[q] = self.rule.weights[q] * self.frame.length;
        }
        let nv = mesh.n_vertices();
        let p1 = &mut self.traces[0];
        p1.dofs.clear();
        p1.dofs.extend([va, vb]);
        p1.values.clear();
        let p2_dofs = [va, vb, nv + be.edge];
        for q in 0..nq {
            let s = self.rule.points[q][0];
            p1.values.extend([1.0 - s, s]);
        }
        let p2 = &mut self.traces[1];
        p2.dofs.clear();
        p2.dofs.extend(p2_dofs);
        p2.values.clear();
        for q in 0..nq {
            let s = self.rule.points[q][0];
            p2.values.extend([(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)]);
        }
        Ok(())
    }

    pub fn trace(&self, degree: usize) -> &TraceTable {
        &self.traces[degree - 1]
    }
}

/// Normal-derivative jumps `[grad(phi) . n]` of one degree across an edge.
#[derive(Debug, Clone, Default)]
pub struct JumpTable {
    /// Union of the two cells' scalar dofs, left cell first.
    pub dofs: Vec<usize>,
    pub jumps: Vec<f64>,
}

impl JumpTable {
    pub fn n(&self) -> usize {
        self.dofs.len()
    }

    pub fn jump(&self, q: usize, a: usize) -> f64 {
        self.jumps[q * self.dofs.len() + a]
    }
}

/// Interior-edge quadrature data for jump terms.
#[derive(Debug, Clone)]
pub struct InteriorEval {
    rule: QuadratureRule,
    pub index: usize,
    pub n_plus: [f64; 2],
    pub weights: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    /// Mean of the two cell diameters.
    pub h_avg: f64,
    jumps: [JumpTable; 2],
    degrees: (usize, usize),
}

impl InteriorEval {
    pub fn new(space: &MixedSpace, quad_degree: usize) -> Result<Self, FeError> {
        let rule = edge_quadrature(quad_degree)?;
        let nq = rule.len();
        Ok(InteriorEval {
            rule,
            index: usize::MAX,
            n_plus: [0.0; 2],
            weights: vec![0.0; nq],
            points: vec![[0.0; 2]; nq],
            h_avg: 0.0,
            jumps: Default::default(),
            degrees: space.degrees(),
        })
    }

    pub fn n_points(&self) -> usize {
        self.rule.len()
    }

    pub fn reset(&mut self, space: &MixedSpace, index: usize) -> Result<(), MeshError> {
        let mesh = space.mesh();
        let ie = mesh.interior_edges()[index];
        let [va, vb] = ie.vertices;
        self.index = index;
        let frame = mesh.edge_frame(va, vb, ie.left)?;
        self.n_plus = frame.n;
        let n_minus = [-frame.n[0], -frame.n[1]];
        self.h_avg = 0.5 * (mesh.cell_geometry(ie.left).diameter + mesh.cell_geometry(ie.right).diameter);
        let (pa, pb) = (mesh.vertices()[va], mesh.vertices()[vb]);
        let nq = self.rule.len();
        for q in 0..nq {
            let s = self.rule.points[q][0];
            self.points[q] = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            self.weights[q] = self.rule.weights[q] * frame.length;
        }
        let (hi, lo) = self.degrees;
        let mut done = [false; 2];
        for d in [lo, hi] {
            if done[d - 1] {
                continue;
            }
            done[d - 1] = true;
            let map = space.dof_map(if d == hi { Variable::HeatFlux } else { Variable::Temperature });
            let el = *map.element();
            let k = el.n_nodes();
            let t = &mut self.jumps[d - 1];
            t.dofs.clear();
            t.dofs.extend_from_slice(map.cell_dofs(ie.left));
            let right = map.cell_dofs(ie.right);
            let mut right_pos = [0usize; 6];
            for (a, dof) in right.iter().enumerate() {
                right_pos[a] = match t.dofs.iter().position(|x| x == dof) {
                    Some(p) => p,
                    None => {
                        t.dofs.push(*dof);
                        t.dofs.len() - 1
                    }
                };
            }
            let m = t.dofs.len();
            t.jumps.clear();
            t.jumps.resize(nq * m, 0.0);
            let mut g = [[0.0; 2]; 6];
            for (cell, n, pos) in [
                (ie.left, frame.n, [0, 1, 2, 3, 4, 5]),
                (ie.right, n_minus, right_pos),
            ] {
                let pts = mesh.cell_points(cell);
                let jit = mesh.cell_geometry(cell).inverse_jacobian_t;
                for q in 0..nq {
                    let r = reference_coords(pts, self.points[q]);
                    el.gradients(r[0], r[1], &mut g[..k]);
                    for a in 0..k {
                        let gp = map_gradient(&jit, &g[a]);
                        t.jumps[q * m + pos[a]] += gp[0] * n[0] + gp[1] * n[1];
                    }
                }
            }
        }
        Ok(())
    }

    pub fn jump_table(&self, degree: usize) -> &JumpTable {
        &self.jumps[degree - 1]
    }
}
