//! Sparse direct solvers behind a name-keyed registry, plus the solve driver
//! with iterative refinement and the residual contract.

use std::collections::BTreeMap;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Mat, Side};
use thiserror::Error;

use super::assemble::AssembledSystem;
use super::sparse::SparseMatrix;
use crate::fespace::Variable;
use crate::forms::symmetrizing_sign;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("matrix is singular or nearly so (condition estimate {estimate:.3e})")]
    Singular { estimate: f64 },
    #[error("relative residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("unknown solver '{0}'")]
    UnknownSolver(String),
    #[error("a solver named '{0}' is already registered")]
    DuplicateSolver(String),
}

/// Cap the worker threads used inside the factorizations; 1 runs serially.
pub fn set_threads(n: usize) {
    let par = if n <= 1 { faer::Par::Seq } else { faer::Par::rayon(n) };
    faer::set_global_parallelism(par);
}

/// A factorization that solves with the original (unsigned) matrix.
pub trait Factorization {
    fn solve_in_place(&self, rhs: &mut [f64]);

    /// Number of diagonal entries that were perturbed to factorize.
    fn perturbed_pivots(&self) -> usize {
        0
    }
}

pub trait LinearSolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// Factorize `a`. `row_signs` turn `a` into a symmetric matrix when
    /// multiplied from the left; solvers that do not need it may ignore it.
    fn factorize(
        &self,
        a: &SparseMatrix,
        row_signs: &[f64],
        equilibrate: bool,
    ) -> Result<Box<dyn Factorization>, SolveError>;
}

/// Symmetric scaling `1 / sqrt(|d_ii|)`, or 1 where the diagonal vanishes.
fn equilibration(a: &SparseMatrix, enabled: bool) -> Vec<f64> {
    (0..a.n_rows())
        .map(|i| {
            let d = a.get(i, i).abs();
            if enabled && d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

/// Supernodal Bunch-Kaufman `L B L^T` of the sign-symmetrized matrix.
///
/// Pivoting is restricted to supernodes, so rows with a vanishing diagonal
/// (unstabilized saddle-point blocks) get `perturbation * max|a_ij|` added
/// to it. Iterative refinement against the unperturbed matrix removes the
/// perturbation from the solution.
pub struct SymmetricLblt {
    pub perturbation: f64,
}

impl Default for SymmetricLblt {
    fn default() -> Self {
        SymmetricLblt { perturbation: 1e-12 }
    }
}

struct LbltFactor {
    symbolic: SymbolicCholesky<u32>,
    l_values: Vec<f64>,
    subdiag: Vec<f64>,
    perm_fwd: Vec<u32>,
    perm_inv: Vec<u32>,
    /// Applied to the right-hand side: row sign times scaling.
    left: Vec<f64>,
    scale: Vec<f64>,
    perturbed: usize,
}

impl LinearSolver for SymmetricLblt {
    fn name(&self) -> &'static str {
        "lblt"
    }

    fn factorize(
        &self,
        a: &SparseMatrix,
        row_signs: &[f64],
        equilibrate: bool,
    ) -> Result<Box<dyn Factorization>, SolveError> {
        let n = a.n_rows();
        let scale = equilibration(a, equilibrate);
        let mut m = a.with_full_diagonal();
        for i in 0..n {
            for k in m.row_range(i) {
                let j = m.col_idx()[k] as usize;
                m.values_mut()[k] *= row_signs[i] * scale[i] * scale[j];
            }
        }
        let amax = m.values().iter().fold(0.0f64, |x, v| x.max(v.abs()));
        let mut perturbed = 0;
        for i in 0..n {
            let k = m.position(i, i).expect("diagonal present");
            if m.values()[k] == 0.0 {
                // Same sign as a stabilizing term of that row.
                m.values_mut()[k] = row_signs[i] * self.perturbation * amax;
                perturbed += 1;
            }
        }
        // The signed matrix is symmetric, so its rows read as columns.
        let sym = SymbolicSparseColMatRef::new_checked(n, n, m.row_ptr(), None, m.col_idx());
        let mat = SparseColMatRef::new(sym, m.values());
        let symbolic = factorize_symbolic_cholesky(
            sym,
            Side::Lower,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams::default(),
        )
        .map_err(|e| SolveError::Factorization(format!("{e:?}")))?;
        let mut l_values = vec![0.0f64; symbolic.len_val()];
        let mut subdiag = vec![0.0f64; n];
        let mut perm_fwd = vec![0u32; n];
        let mut perm_inv = vec![0u32; n];
        let par = faer::get_global_parallelism();
        let req = symbolic.factorize_numeric_intranode_lblt_scratch::<f64>(par, Default::default());
        let mut mem = MemBuffer::new(req);
        symbolic.factorize_numeric_intranode_lblt(
            &mut l_values,
            &mut subdiag,
            &mut perm_fwd,
            &mut perm_inv,
            mat,
            Side::Lower,
            par,
            MemStack::new(&mut mem),
            Default::default(),
        );
        drop(m);
        let left = (0..n).map(|i| row_signs[i] * scale[i]).collect();
        Ok(Box::new(LbltFactor { symbolic, l_values, subdiag, perm_fwd, perm_inv, left, scale, perturbed }))
    }
}

impl Factorization for LbltFactor {
    fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut m = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i] * self.left[i]);
        let par = faer::get_global_parallelism();
        let lblt = faer::sparse::linalg::cholesky::IntranodeLbltRef::new(
            &self.symbolic,
            &self.l_values,
            &self.subdiag,
            faer::perm::PermRef::new_checked(&self.perm_fwd, &self.perm_inv, n),
        );
        let req = self.symbolic.solve_in_place_scratch::<f64>(1, par);
        let mut mem = MemBuffer::new(req);
        lblt.solve_in_place_with_conj(Conj::No, m.as_mut(), par, MemStack::new(&mut mem));
        for (i, r) in rhs.iter_mut().enumerate() {
            *r = m[(i, 0)] * self.scale[i];
        }
    }

    fn perturbed_pivots(&self) -> usize {
        self.perturbed
    }
}

/// General sparse LU with partial pivoting.
pub struct SparseLu;

struct LuFactor {
    lu: faer::sparse::linalg::solvers::Lu<u32, f64>,
    scale: Vec<f64>,
}

impl LinearSolver for SparseLu {
    fn name(&self) -> &'static str {
        "lu"
    }

    fn factorize(
        &self,
        a: &SparseMatrix,
        _row_signs: &[f64],
        equilibrate: bool,
    ) -> Result<Box<dyn Factorization>, SolveError> {
        let n = a.n_rows();
        let scale = equilibration(a, equilibrate);
        let mut values = a.values().to_vec();
        for i in 0..n {
            for k in a.row_range(i) {
                values[k] *= scale[i] * scale[a.col_idx()[k] as usize];
            }
        }
        // CSR of A is CSC of A^T; factor that and solve with the transpose.
        let sym = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let at = SparseColMatRef::new(sym, &values);
        let lu = at.sp_lu().map_err(|e| SolveError::Factorization(format!("{e:?}")))?;
        Ok(Box::new(LuFactor { lu, scale }))
    }
}

impl Factorization for LuFactor {
    fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut m = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i] * self.scale[i]);
        self.lu.solve_transpose_in_place_with_conj(Conj::No, m.as_mut());
        for (i, r) in rhs.iter_mut().enumerate() {
            *r = m[(i, 0)] * self.scale[i];
        }
    }
}

/// Name-keyed solver strategies.
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn LinearSolver>>,
}

impl SolverRegistry {
    pub fn builtin() -> Self {
        let mut r = SolverRegistry { solvers: BTreeMap::new() };
        r.register(Box::new(SymmetricLblt::default())).expect("unique");
        r.register(Box::new(SparseLu)).expect("unique");
        r
    }

    pub fn register(&mut self, s: Box<dyn LinearSolver>) -> Result<(), SolveError> {
        if self.solvers.contains_key(s.name()) {
            return Err(SolveError::DuplicateSolver(s.name().to_string()));
        }
        self.solvers.insert(s.name(), s);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&dyn LinearSolver, SolveError> {
        self.solvers.get(name).map(|s| s.as_ref()).ok_or_else(|| SolveError::UnknownSolver(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.solvers.keys().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub solver: String,
    pub equilibrate: bool,
    pub tolerance: f64,
    pub max_refinement: usize,
    pub pressure_level: PressureLevel,
    /// Condition estimates above this are reported as singular.
    pub condition_limit: f64,
}

/// Treatment of the constant-pressure kernel of impermeable configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureLevel {
    /// Fix the mean pressure if all walls are impermeable and the operator is
    /// stabilized; then constants are the whole kernel. Unstabilized
    /// operators are left as they are.
    Auto,
    /// Fix the mean pressure whenever all walls are impermeable.
    Mean,
    /// Never add a constraint.
    Free,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: "lblt".into(),
            equilibrate: false,
            tolerance: 1e-10,
            max_refinement: 10,
            pressure_level: PressureLevel::Auto,
            condition_limit: 1e10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solver: String,
    pub residual: f64,
    pub refinement_steps: usize,
    pub condition_estimate: f64,
    pub pressure_fixed: bool,
    pub perturbed_pivots: usize,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Max norm; any NaN makes it infinite.
fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

/// Deterministic vector with entries in (-1, 1).
fn probe_vector(n: usize) -> Vec<f64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

/// Lower bound of the condition number by a few steps of inverse iteration
/// from a fixed pseudo-random start. Near-null directions are amplified
/// geometrically, so they dominate after two or three steps.
fn condition_estimate(a: &SparseMatrix, factor: &dyn Factorization, steps: usize) -> f64 {
    let mut v = probe_vector(a.n_rows());
    let mut growth: f64 = 0.0;
    for _ in 0..steps {
        let nv = norm_inf(&v);
        let mut y = v.clone();
        factor.solve_in_place(&mut y);
        let ny = norm_inf(&y);
        if !ny.is_finite() {
            return f64::INFINITY;
        }
        if ny == 0.0 {
            break;
        }
        growth = growth.max(ny / nv);
        v = y.iter().map(|x| x / ny).collect();
    }
    a.norm_inf() * growth
}

/// Append a mean-value constraint: `[[A, c], [c^T, 0]]`.
fn augment(a: &SparseMatrix, c_rows: std::ops::Range<usize>, c: &[f64]) -> SparseMatrix {
    let n = a.n_rows();
    let mut rows = Vec::with_capacity(n + 1);
    let mut vals = Vec::with_capacity(a.nnz() + 2 * c.len());
    for i in 0..n {
        let (cols, v) = a.row(i);
        let mut r = cols.to_vec();
        vals.extend_from_slice(v);
        if c_rows.contains(&i) {
            r.push(n as u32);
            vals.push(c[i - c_rows.start]);
        }
        rows.push(r);
    }
    rows.push(c_rows.clone().map(|i| i as u32).collect());
    vals.extend_from_slice(c);
    let mut m = SparseMatrix::from_pattern(n + 1, rows);
    m.values_mut().copy_from_slice(&vals);
    m
}

/// Solve the assembled system with iterative refinement.
///
/// The returned residual is `||A x - b|| / ||b||` on the assembled system.
pub fn solve(system: &AssembledSystem, opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport), SolveError> {
    solve_with(system, opts, &SolverRegistry::builtin())
}

pub fn solve_with(
    system: &AssembledSystem,
    opts: &SolveOptions,
    registry: &SolverRegistry,
) -> Result<(Vec<f64>, SolveReport), SolveError> {
    let solver = registry.get(&opts.solver)?;
    let space = &system.space;
    let n = system.matrix.n_rows();
    let mut signs = vec![0.0; n];
    for v in Variable::ALL {
        for i in space.variable_range(v) {
            signs[i] = symmetrizing_sign(v);
        }
    }
    let fix = system.pressure_nullspace
        && match opts.pressure_level {
            PressureLevel::Auto => system.stabilized,
            PressureLevel::Mean => true,
            PressureLevel::Free => false,
        };
    let (op, rhs_full) = if fix {
        let c = system.pressure_weights().map_err(|e| SolveError::Factorization(e.to_string()))?;
        let m = augment(&system.matrix, space.variable_range(Variable::Pressure), &c);
        // The constraint row must carry the pressure rows' sign to stay symmetric.
        signs.push(symmetrizing_sign(Variable::Pressure));
        let mut b = system.rhs.clone();
        b.push(0.0);
        (m, b)
    } else {
        (system.matrix.clone(), system.rhs.clone())
    };
    let nn = op.n_rows();

    let factor = solver.factorize(&op, &signs, opts.equilibrate)?;

    let estimate = condition_estimate(&op, factor.as_ref(), 3);
    if !estimate.is_finite() || estimate > opts.condition_limit {
        return Err(SolveError::Singular { estimate });
    }

    let bnorm = norm2(&system.rhs);
    let report = |residual, steps| SolveReport {
        solver: solver.name().to_string(),
        residual,
        refinement_steps: steps,
        condition_estimate: estimate,
        pressure_fixed: fix,
        perturbed_pivots: factor.perturbed_pivots(),
    };
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], report(0.0, 0)));
    }

    // Residual of the operator actually factorized, including the constraint row.
    let residual = |x: &[f64]| {
        let mut r = vec![0.0; nn];
        op.matvec(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&rhs_full) {
            *ri = bi - *ri;
        }
        r
    };
    let mut x = rhs_full.clone();
    factor.solve_in_place(&mut x);
    let mut r = residual(&x);
    let mut rel = norm2(&r) / bnorm;
    let mut steps = 0;
    while rel.is_finite() && rel > 0.01 * opts.tolerance && steps < opts.max_refinement {
        let mut dx = r.clone();
        factor.solve_in_place(&mut dx);
        let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let r_trial = residual(&trial);
        let rel_trial = norm2(&r_trial) / bnorm;
        steps += 1;
        if !(rel_trial < 0.9 * rel) {
            if rel_trial < rel {
                x = trial;
            }
            break;
        }
        x = trial;
        r = r_trial;
        rel = rel_trial;
    }
    if !rel.is_finite() {
        return Err(SolveError::Singular { estimate });
    }
    x.truncate(n);
    // The contract is checked on the assembled system itself.
    let mut ax = vec![0.0; n];
    system.matrix.matvec(&x, &mut ax);
    let true_res = ax.iter().zip(&system.rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / bnorm;
    if !(true_res <= opts.tolerance) {
        return Err(SolveError::Residual { residual: true_res, tolerance: opts.tolerance });
    }
    Ok((x, report(true_res, steps)))
}
