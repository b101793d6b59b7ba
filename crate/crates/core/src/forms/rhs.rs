//! Linear functionals: boundary data and volume sources.

use super::eval::{BoundaryEval, CellEval};
use super::terms::SIGMA_UNITS;
use super::{BoundaryData, SourceData};
use crate::exprlang::EvalError;
use crate::fespace::Variable;

/// Local load vectors, one per variable, indexed like the local matrices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalVectors {
    pub parts: [Vec<f64>; 5],
}

impl LocalVectors {
    pub fn get(&self, v: Variable) -> &[f64] {
        &self.parts[v as usize]
    }

    fn reset(&mut self, v: Variable, len: usize) -> &mut Vec<f64> {
        let p = &mut self.parts[v as usize];
        p.clear();
        p.resize(len, 0.0);
        p
    }

    fn clear(&mut self) {
        for p in &mut self.parts {
            p.clear();
        }
    }
}

/// Volume loads: energy source against theta, body force against u and the
/// mass source against p.
pub fn cell_rhs(
    ce: &CellEval,
    src: &SourceData,
    _hi: usize,
    lo: usize,
    out: &mut LocalVectors,
) -> Result<(), EvalError> {
    out.clear();
    let t = ce.basis(lo);
    let n = t.n;
    let zero_mass = src.m_dot.is_zero();
    let zero_heat = zero_mass && src.r.is_zero();
    let zero_force = src.b[0].is_zero() && src.b[1].is_zero();
    out.reset(Variable::Temperature, n);
    out.reset(Variable::Velocity, 2 * n);
    out.reset(Variable::Pressure, n);
    for q in 0..ce.n_points() {
        let (w, x) = (ce.weights[q], ce.points[q]);
        let m = if zero_mass { 0.0 } else { src.m_dot.eval(x)? };
        let heat = if zero_heat { 0.0 } else { src.r.eval(x)? - m };
        let b = if zero_force { [0.0; 2] } else { [src.b[0].eval(x)?, src.b[1].eval(x)?] };
        for a in 0..n {
            let va = w * t.value(q, a);
            out.parts[Variable::Temperature as usize][a] += heat * va;
            out.parts[Variable::Velocity as usize][a] += b[0] * va;
            out.parts[Variable::Velocity as usize][n + a] += b[1] * va;
            out.parts[Variable::Pressure as usize][a] += m * va;
        }
    }
    Ok(())
}

/// Boundary loads on one edge: wall temperature against s, wall velocity
/// and pressure against sigma and p.
pub fn boundary_rhs(
    be: &BoundaryEval,
    data: &BoundaryData,
    hi: usize,
    lo: usize,
    out: &mut LocalVectors,
) -> Result<(), EvalError> {
    out.clear();
    let (th, tl) = (be.trace(hi), be.trace(lo));
    let (nh, nl) = (th.n(), tl.n());
    let (nn, tt) = (be.frame.n, be.frame.t);
    let proj: Vec<(f64, f64)> = SIGMA_UNITS
        .iter()
        .map(|s| {
            let sn = [s[0][0] * nn[0] + s[0][1] * nn[1], s[1][0] * nn[0] + s[1][1] * nn[1]];
            (sn[0] * nn[0] + sn[1] * nn[1], sn[0] * tt[0] + sn[1] * tt[1])
        })
        .collect();
    out.reset(Variable::HeatFlux, 2 * nh);
    out.reset(Variable::Stress, 3 * nh);
    out.reset(Variable::Pressure, nl);
    let ec = be.epsilon_w * be.chi_tilde;
    for q in 0..be.n_points() {
        let (w, x) = (be.weights[q], be.points[q]);
        let theta = data.theta_w.eval(x)?;
        let ut = data.u_t_w.eval(x)?;
        let un = data.u_n_w.eval(x)?;
        let pw = if ec == 0.0 { 0.0 } else { data.p_w.eval(x)? };
        let normal_drive = un - ec * pw;
        for a in 0..nh {
            let va = w * th.value(q, a);
            for i in 0..2 {
                out.parts[Variable::HeatFlux as usize][i * nh + a] -= theta * nn[i] * va;
            }
            for (c, (unit_nn, unit_nt)) in proj.iter().enumerate() {
                out.parts[Variable::Stress as usize][c * nh + a] -= (ut * unit_nt + normal_drive * unit_nn) * va;
            }
        }
        for a in 0..nl {
            out.parts[Variable::Pressure as usize][a] -= normal_drive * w * tl.value(q, a);
        }
    }
    Ok(())
}
