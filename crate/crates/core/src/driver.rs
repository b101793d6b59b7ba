//! End-to-end runs: build, assemble, solve, and the multi-solve studies.

use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::cases::{CaseError, MeshSource, ProblemSpec};
use crate::fespace::{Component, FeError, MixedSpace};
use crate::postproc::{error_report, mass_flow, ErrorReport, PostprocError, Solution, Table};
use crate::system::{assemble, AssemblyError, SolveError, SolveOptions, SolveReport};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Postproc(#[from] PostprocError),
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error("invalid problem: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub solution: Solution,
    pub report: SolveReport,
    /// Seconds spent building mesh and space, assembling, and solving.
    pub t_setup: f64,
    pub t_assemble: f64,
    pub t_solve: f64,
}

/// Assemble and solve on an existing space.
pub fn run_on(space: &Arc<MixedSpace>, spec: &ProblemSpec, opts: &SolveOptions) -> Result<RunOutput, RunError> {
    let t0 = Instant::now();
    let system = assemble(space, &spec.form)?;
    let t_assemble = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (x, report) = crate::system::solve(&system, opts)?;
    let t_solve = t1.elapsed().as_secs_f64();
    Ok(RunOutput { solution: Solution::new(space.clone(), x), report, t_setup: 0.0, t_assemble, t_solve })
}

pub fn run(spec: &ProblemSpec, opts: &SolveOptions) -> Result<RunOutput, RunError> {
    let t0 = Instant::now();
    let space = spec.build_space()?;
    let v = crate::cases::validate(spec, Some(space.mesh()));
    if !v.is_ok() {
        return Err(RunError::Invalid(v.errors.join("; ")));
    }
    let t_setup = t0.elapsed().as_secs_f64();
    let mut out = run_on(&space, spec, opts)?;
    out.t_setup = t_setup;
    Ok(out)
}

/// Errors of a mesh series against the finest solve.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    /// Maximum cell diameter of each coarse mesh.
    pub h: Vec<f64>,
    pub errors: Vec<ErrorReport>,
}

/// Least-squares slope of `log y` over `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

impl ConvergenceStudy {
    pub fn l2_slope(&self, c: Component) -> f64 {
        fit_slope(&self.h, &self.errors.iter().map(|e| e.l2_of(c)).collect::<Vec<_>>())
    }

    pub fn linf_slope(&self, c: Component) -> f64 {
        fit_slope(&self.h, &self.errors.iter().map(|e| e.linf_of(c)).collect::<Vec<_>>())
    }

    /// Columns `h, <field>_L_2, <field>_l_inf` for every component.
    pub fn table(&self) -> Table {
        let mut headers = vec!["h".to_string()];
        for c in Component::ALL {
            headers.push(format!("{}_L_2", c.name()));
            headers.push(format!("{}_l_inf", c.name()));
        }
        let mut t = Table::new(headers);
        for (h, e) in self.h.iter().zip(&self.errors) {
            let mut row = vec![*h];
            for c in Component::ALL {
                row.push(e.l2_of(c));
                row.push(e.linf_of(c));
            }
            t.push(row);
        }
        t
    }
}

/// Solve on meshes of target sizes `hs` and on `h_ref`, and measure the
/// errors of each against the reference solve.
pub fn convergence(spec: &ProblemSpec, hs: &[f64], h_ref: f64, opts: &SolveOptions) -> Result<ConvergenceStudy, RunError> {
    let coarse: Vec<MeshSource> = hs.iter().map(|&h| spec.mesh.with_h(h)).collect();
    convergence_on(spec, &coarse, &spec.mesh.with_h(h_ref), opts)
}

/// Like [`convergence`] with explicit meshes.
pub fn convergence_on(
    spec: &ProblemSpec,
    coarse: &[MeshSource],
    reference: &MeshSource,
    opts: &SolveOptions,
) -> Result<ConvergenceStudy, RunError> {
    let mut fine = spec.clone();
    fine.mesh = reference.clone();
    let reference = run(&fine, opts)?.solution;
    let mut study = ConvergenceStudy { h: Vec::new(), errors: Vec::new() };
    for mesh in coarse {
        let mut c = spec.clone();
        c.mesh = mesh.clone();
        let sol = run(&c, opts)?.solution;
        study.h.push(sol.mesh().h_max());
        study.errors.push(error_report(&sol, &reference)?);
    }
    Ok(study)
}

/// Mass flow through boundary `tag` for each Knudsen number, reusing one mesh.
pub fn kn_sweep(spec: &ProblemSpec, kns: &[f64], tag: u32, opts: &SolveOptions) -> Result<Vec<(f64, f64)>, RunError> {
    let space = spec.build_space()?;
    let mut out = Vec::with_capacity(kns.len());
    for &kn in kns {
        let mut s = spec.clone();
        s.set_kn(kn);
        let sol = run_on(&space, &s, opts)?.solution;
        out.push((kn, mass_flow(&sol, tag)?));
    }
    Ok(out)
}
