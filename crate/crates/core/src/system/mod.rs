//! Global sparse assembly and linear solves.

mod assemble;
mod solver;
mod sparse;

pub use assemble::{
    assemble, assemble_rhs, assemble_term, assemble_with, AssembledSystem, AssemblyError, FormData,
    QUADRATURE_DEGREE,
};
pub use solver::{
    set_threads, solve, solve_with, Factorization, LinearSolver, PressureLevel, SolveError, SolveOptions, SolveReport,
    SolverRegistry, SparseLu, SymmetricLblt,
};
pub use sparse::SparseMatrix;
