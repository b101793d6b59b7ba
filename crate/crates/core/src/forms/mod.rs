//! Local bilinear and linear forms of the stabilized weak formulation.

mod data;
mod eval;
mod rhs;
mod terms;

pub use data::{BoundaryData, PhysicalParams, ScalarField, SourceData, StabilizationParams};
pub use eval::{BasisTable, BoundaryEval, CellEval, InteriorEval, JumpTable, TraceTable};
pub use rhs::{boundary_rhs, cell_rhs, LocalVectors};
pub use terms::{
    compound_placements, symmetrizing_sign, Domains, FormParams, FormTerm, JumpTerm, LocalMatrix,
    Placement, RegistryError, TermA, TermB, TermC, TermD, TermE, TermF, TermG, TermH, TermRegistry,
    SIGMA_UNITS,
};

use crate::mesh::EdgeFrame;
use crate::tensorops::Tensor2;

/// Normal and tangential parts of a heat flux: `(s_n, s_t)`.
pub fn project_vector(s: [f64; 2], f: &EdgeFrame) -> (f64, f64) {
    (s[0] * f.n[0] + s[1] * f.n[1], s[0] * f.t[0] + s[1] * f.t[1])
}

/// Boundary components of a symmetric stress: `(sigma_nn, sigma_nt, sigma_tt)`.
pub fn project_tensor(s: &Tensor2, f: &EdgeFrame) -> (f64, f64, f64) {
    let q = |a: [f64; 2], b: [f64; 2]| {
        a[0] * (s[0][0] * b[0] + s[0][1] * b[1]) + a[1] * (s[1][0] * b[0] + s[1][1] * b[1])
    };
    (q(f.n, f.n), q(f.n, f.t), q(f.t, f.t))
}
