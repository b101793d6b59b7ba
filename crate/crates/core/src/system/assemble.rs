//! Global assembly of the stabilized block operator and load vector.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use super::sparse::SparseMatrix;
use crate::exprlang::EvalError;
use crate::fespace::{FeError, MixedSpace, Variable};
use crate::forms::{
    boundary_rhs, cell_rhs, compound_placements, BoundaryData, BoundaryEval, CellEval, FormParams,
    FormTerm, InteriorEval, LocalMatrix, LocalVectors, PhysicalParams, Placement, RegistryError,
    SourceData, StabilizationParams, TermRegistry,
};
use crate::mesh::MeshError;

/// Exactness degree of the cell and edge rules.
pub const QUADRATURE_DEGREE: usize = 6;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("no boundary data for tag {0}")]
    MissingBoundaryData(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("evaluating boundary or source data: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Everything the weak form needs besides the space.
#[derive(Debug, Clone)]
pub struct FormData {
    pub physics: PhysicalParams,
    pub stabilization: StabilizationParams,
    pub boundary: BTreeMap<u32, BoundaryData>,
    pub sources: SourceData,
}

impl FormData {
    fn check(&self, space: &MixedSpace) -> Result<(), AssemblyError> {
        let p = &self.physics;
        if !(p.kn > 0.0 && p.kn.is_finite()) {
            return Err(AssemblyError::InvalidParameter(format!("kn must be positive, got {}", p.kn)));
        }
        for tag in space.mesh().tags() {
            let bc = self.boundary.get(&tag).ok_or(AssemblyError::MissingBoundaryData(tag))?;
            let chi = bc.chi_tilde.unwrap_or(p.chi_tilde);
            if !(chi > 0.0 && chi.is_finite()) {
                return Err(AssemblyError::InvalidParameter(format!("chi_tilde on tag {tag} must be positive")));
            }
            if !(bc.epsilon_w >= 0.0 && bc.epsilon_w.is_finite()) {
                return Err(AssemblyError::InvalidParameter(format!("epsilon_w on tag {tag} must be >= 0")));
            }
        }
        let s = &self.stabilization;
        for (name, d) in [("delta_theta", s.delta_theta), ("delta_u", s.delta_u), ("delta_p", s.delta_p)] {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(AssemblyError::InvalidParameter(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }

    fn boundary_coefficients(&self, tag: u32) -> (f64, f64) {
        let bc = &self.boundary[&tag];
        (bc.chi_tilde.unwrap_or(self.physics.chi_tilde), bc.epsilon_w)
    }

    /// Constant pressures are in the kernel when no wall prescribes pressure.
    pub fn pressure_is_free(&self) -> bool {
        self.boundary.values().all(|b| b.epsilon_w == 0.0)
    }

    fn form_params(&self) -> FormParams {
        FormParams { kn: self.physics.kn, stab: self.stabilization }
    }
}

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub space: Arc<MixedSpace>,
    /// Constant pressure lies in the kernel of the operator.
    pub pressure_nullspace: bool,
    /// CIP terms are part of the operator.
    pub stabilized: bool,
}

impl AssembledSystem {
    pub fn block_range(&self, v: Variable) -> Range<usize> {
        self.space.variable_range(v)
    }

    pub fn extract_block(&self, row: Variable, col: Variable) -> SparseMatrix {
        self.matrix.slice(self.block_range(row), self.block_range(col))
    }

    /// Pressure weights `c_a = integral of phi_a`, used to fix the mean pressure.
    pub fn pressure_weights(&self) -> Result<Vec<f64>, FeError> {
        let space = &self.space;
        let mesh = space.mesh();
        let map = space.dof_map(Variable::Pressure);
        let mut ce = CellEval::new(space, 2 * map.element().degree())?;
        let mut c = vec![0.0; map.n_dofs()];
        let deg = space.degree(Variable::Pressure);
        for cell in 0..mesh.n_cells() {
            ce.reset(mesh, cell);
            let t = ce.basis(deg);
            for (a, &d) in map.cell_dofs(cell).iter().enumerate() {
                c[d] += (0..ce.n_points()).map(|q| ce.weights[q] * t.value(q, a)).sum::<f64>();
            }
        }
        Ok(c)
    }
}

/// Where local indices of one variable map to on the current entity.
fn global_dofs(space: &MixedSpace, v: Variable, scalar: &[usize], out: &mut Vec<usize>) {
    out.clear();
    for &c in v.components() {
        let off = space.component_range(c).start;
        out.extend(scalar.iter().map(|&d| off + d));
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    Cell,
    Boundary,
    Interior,
}

/// Sorted scalar adjacency between the dofs of two degrees.
fn scalar_adjacency(space: &MixedSpace, dr: usize, dc: usize, kind: Kind) -> Vec<Vec<u32>> {
    let mesh = space.mesh();
    let var_of = |d: usize| if d == space.degrees().0 { Variable::HeatFlux } else { Variable::Temperature };
    let (mr, mc) = (space.dof_map(var_of(dr)), space.dof_map(var_of(dc)));
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); mr.n_dofs()];
    let nv = mesh.n_vertices();
    let trace = |d: usize, e: usize, v: [usize; 2]| -> Vec<usize> {
        if d == 1 {
            vec![v[0], v[1]]
        } else {
            vec![v[0], v[1], nv + e]
        }
    };
    match kind {
        Kind::Cell => {
            for cell in 0..mesh.n_cells() {
                let cols = mc.cell_dofs(cell);
                for &r in mr.cell_dofs(cell) {
                    adj[r].extend(cols.iter().map(|&c| c as u32));
                }
            }
        }
        Kind::Boundary => {
            for be in mesh.boundary_edges() {
                let cols = trace(dc, be.edge, be.vertices);
                for r in trace(dr, be.edge, be.vertices) {
                    adj[r].extend(cols.iter().map(|&c| c as u32));
                }
            }
        }
        Kind::Interior => {
            for ie in mesh.interior_edges() {
                let mut cols: Vec<usize> = mc.cell_dofs(ie.left).to_vec();
                cols.extend_from_slice(mc.cell_dofs(ie.right));
                let mut rows: Vec<usize> = mr.cell_dofs(ie.left).to_vec();
                rows.extend_from_slice(mr.cell_dofs(ie.right));
                for &r in &rows {
                    adj[r].extend(cols.iter().map(|&c| c as u32));
                }
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

fn merge_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i] <= b[j]);
        let v = if take_a { a[i] } else { b[j] };
        if take_a {
            i += 1;
        } else {
            j += 1;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}

/// Sparsity pattern covering the given placements, without structurally
/// empty blocks.
fn build_pattern(space: &MixedSpace, registry: &TermRegistry, placements: &[Placement]) -> Result<SparseMatrix, AssemblyError> {
    let mut kinds: BTreeMap<(Variable, Variable), Vec<Kind>> = BTreeMap::new();
    for pl in placements {
        let d = registry.get(pl.term)?.domains();
        let entry = kinds.entry((pl.row, pl.col)).or_default();
        for (on, k) in [(d.cells, Kind::Cell), (d.boundary, Kind::Boundary), (d.interior, Kind::Interior)] {
            if on && !entry.contains(&k) {
                entry.push(k);
            }
        }
    }
    let mut cache: HashMap<(usize, usize, Kind), Vec<Vec<u32>>> = HashMap::new();
    let mut blocks: BTreeMap<(Variable, Variable), Vec<Vec<u32>>> = BTreeMap::new();
    for (&(rv, cv), ks) in &kinds {
        let (dr, dc) = (space.degree(rv), space.degree(cv));
        let mut merged: Option<Vec<Vec<u32>>> = None;
        for &k in ks {
            let adj = cache.entry((dr, dc, k)).or_insert_with(|| scalar_adjacency(space, dr, dc, k));
            merged = Some(match merged {
                None => adj.clone(),
                Some(m) => m.iter().zip(adj.iter()).map(|(a, b)| merge_sorted(a, b)).collect(),
            });
        }
        if let Some(m) = merged {
            blocks.insert((rv, cv), m);
        }
    }
    drop(cache);
    let n = space.n_dofs();
    let mut rows = Vec::with_capacity(n);
    for rv in Variable::ALL {
        let nr = space.dof_map(rv).n_dofs();
        for _ in rv.components() {
            for a in 0..nr {
                let mut cols = Vec::new();
                for cv in Variable::ALL {
                    if let Some(adj) = blocks.get(&(rv, cv)) {
                        for &cc in cv.components() {
                            let off = space.component_range(cc).start as u32;
                            cols.extend(adj[a].iter().map(|&b| off + b));
                        }
                    }
                }
                rows.push(cols);
            }
        }
    }
    Ok(SparseMatrix::from_pattern(n, rows))
}

/// Scatter a local matrix through a placement.
fn scatter(m: &mut SparseMatrix, local: &LocalMatrix, rows: &[usize], cols: &[usize], pl: &Placement) {
    for (i, &gi) in rows.iter().enumerate() {
        for (j, &gj) in cols.iter().enumerate() {
            let v = local.get(i, j);
            if v == 0.0 {
                continue;
            }
            if pl.transpose {
                m.add(gj, gi, pl.sign * v);
            } else {
                m.add(gi, gj, pl.sign * v);
            }
        }
    }
}

/// Assemble the placements of the given terms into one matrix.
fn assemble_matrix(
    space: &MixedSpace,
    data: &FormData,
    registry: &TermRegistry,
    placements: &[Placement],
) -> Result<SparseMatrix, AssemblyError> {
    let mesh = space.mesh().clone();
    let (hi, lo) = space.degrees();
    let params = data.form_params();
    let mut matrix = build_pattern(space, registry, placements)?;

    // Group placements by term so each local matrix is computed once.
    let mut by_term: BTreeMap<&str, Vec<Placement>> = BTreeMap::new();
    for pl in placements {
        by_term.entry(pl.term).or_default().push(*pl);
    }
    let terms: Vec<(&dyn FormTerm, Vec<Placement>)> = by_term
        .into_iter()
        .map(|(name, pls)| Ok((registry.get(name)?, pls)))
        .collect::<Result<_, AssemblyError>>()?;

    let mut local = LocalMatrix::default();
    let (mut rows, mut cols) = (Vec::new(), Vec::new());
    let nv = mesh.n_vertices();

    if terms.iter().any(|(t, _)| t.domains().cells) {
        let mut ce = CellEval::new(space, QUADRATURE_DEGREE)?;
        for cell in 0..mesh.n_cells() {
            ce.reset(&mesh, cell);
            for (t, pls) in &terms {
                if !t.domains().cells {
                    continue;
                }
                t.cell(&params, &ce, hi, lo, &mut local);
                global_dofs(space, t.test(), space.dof_map(t.test()).cell_dofs(cell), &mut rows);
                global_dofs(space, t.trial(), space.dof_map(t.trial()).cell_dofs(cell), &mut cols);
                for pl in pls {
                    scatter(&mut matrix, &local, &rows, &cols, pl);
                }
            }
        }
    }

    if terms.iter().any(|(t, _)| t.domains().boundary) {
        let mut be = BoundaryEval::new(QUADRATURE_DEGREE)?;
        for (k, edge) in mesh.boundary_edges().iter().enumerate() {
            let (chi, eps) = data.boundary_coefficients(edge.tag);
            be.reset(&mesh, k, chi, eps)?;
            for (t, pls) in &terms {
                if !t.domains().boundary {
                    continue;
                }
                t.boundary(&params, &be, hi, lo, &mut local);
                let tr = |v: Variable| -> Vec<usize> {
                    let d = space.degree(v);
                    if d == 1 {
                        edge.vertices.to_vec()
                    } else {
                        vec![edge.vertices[0], edge.vertices[1], nv + edge.edge]
                    }
                };
                global_dofs(space, t.test(), &tr(t.test()), &mut rows);
                global_dofs(space, t.trial(), &tr(t.trial()), &mut cols);
                for pl in pls {
                    scatter(&mut matrix, &local, &rows, &cols, pl);
                }
            }
        }
    }

    if terms.iter().any(|(t, _)| t.domains().interior) {
        let mut ie = InteriorEval::new(space, QUADRATURE_DEGREE)?;
        for k in 0..mesh.interior_edges().len() {
            ie.reset(space, k)?;
            for (t, pls) in &terms {
                if !t.domains().interior {
                    continue;
                }
                t.interior(&params, &ie, hi, lo, &mut local);
                let dofs = &ie.jump_table(space.degree(t.test())).dofs;
                global_dofs(space, t.test(), dofs, &mut rows);
                global_dofs(space, t.trial(), dofs, &mut cols);
                for pl in pls {
                    scatter(&mut matrix, &local, &rows, &cols, pl);
                }
            }
        }
    }
    Ok(matrix)
}

/// Active placements: jump terms only when stabilization is on.
fn active_placements(data: &FormData) -> Vec<Placement> {
    compound_placements()
        .into_iter()
        .filter(|p| data.stabilization.enabled || !p.term.starts_with("j_"))
        .collect()
}

pub fn assemble_rhs(space: &MixedSpace, data: &FormData) -> Result<Vec<f64>, AssemblyError> {
    let mesh = space.mesh().clone();
    let (hi, lo) = space.degrees();
    let mut rhs = vec![0.0; space.n_dofs()];
    let mut lv = LocalVectors::default();
    let mut dofs = Vec::new();
    let mut add = |rhs: &mut Vec<f64>, lv: &LocalVectors, v: Variable, scalar: &[usize]| {
        let part = lv.get(v);
        if part.is_empty() {
            return;
        }
        global_dofs(space, v, scalar, &mut dofs);
        for (&g, &x) in dofs.iter().zip(part) {
            rhs[g] += x;
        }
    };
    let mut ce = CellEval::new(space, QUADRATURE_DEGREE)?;
    for cell in 0..mesh.n_cells() {
        ce.reset(&mesh, cell);
        cell_rhs(&ce, &data.sources, hi, lo, &mut lv)?;
        for v in [Variable::Temperature, Variable::Velocity, Variable::Pressure] {
            add(&mut rhs, &lv, v, space.dof_map(v).cell_dofs(cell));
        }
    }
    let mut be = BoundaryEval::new(QUADRATURE_DEGREE)?;
    for (k, edge) in mesh.boundary_edges().iter().enumerate() {
        let (chi, eps) = data.boundary_coefficients(edge.tag);
        be.reset(&mesh, k, chi, eps)?;
        boundary_rhs(&be, &data.boundary[&edge.tag], hi, lo, &mut lv)?;
        for v in [Variable::HeatFlux, Variable::Stress, Variable::Pressure] {
            let scalar: Vec<usize> = be.trace(space.degree(v)).dofs.clone();
            add(&mut rhs, &lv, v, &scalar);
        }
    }
    Ok(rhs)
}

/// Assemble the full stabilized system.
pub fn assemble(space: &Arc<MixedSpace>, data: &FormData) -> Result<AssembledSystem, AssemblyError> {
    assemble_with(space, data, &TermRegistry::builtin())
}

/// Assemble with a caller-provided term registry.
pub fn assemble_with(
    space: &Arc<MixedSpace>,
    data: &FormData,
    registry: &TermRegistry,
) -> Result<AssembledSystem, AssemblyError> {
    data.check(space)?;
    let matrix = assemble_matrix(space, data, registry, &active_placements(data))?;
    let rhs = assemble_rhs(space, data)?;
    Ok(AssembledSystem {
        matrix,
        rhs,
        space: space.clone(),
        pressure_nullspace: data.pressure_is_free(),
        stabilized: data.stabilization.enabled,
    })
}

/// One term alone, placed at its own (test, trial) block with sign +1.
pub fn assemble_term(space: &Arc<MixedSpace>, data: &FormData, term: &str) -> Result<SparseMatrix, AssemblyError> {
    data.check(space)?;
    let registry = TermRegistry::builtin();
    let t = registry.get(term)?;
    let pl = Placement { term: t.name(), row: t.test(), col: t.trial(), sign: 1.0, transpose: false };
    assemble_matrix(space, data, &registry, &[pl])
}
