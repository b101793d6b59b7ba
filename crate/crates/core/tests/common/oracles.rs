//! Independent checks reused by the unit suites and the acceptance run.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use r13fem::fespace::{Component, MixedSpace, Variable};
use r13fem::forms::{CellEval, StabilizationParams};
use r13fem::mesh::generate_rectangle;
use r13fem::system::{assemble, assemble_term, solve, FormData, PressureLevel, SolveError, SolveOptions, SparseMatrix};
use r13fem::tensorops::{inner2d, stf3d2, sym2};

use super::{mesh_200, quadratic_form, rectangle_data};

/// Scalar dof values of `f` for every listed component, zero elsewhere.
pub fn interpolate(space: &MixedSpace, fields: &[(Component, &dyn Fn([f64; 2]) -> f64)]) -> Vec<f64> {
    let mut x = vec![0.0; space.n_dofs()];
    for (c, f) in fields {
        let map = space.dof_map(c.variable());
        for (i, p) in map.dof_points(space.mesh()).iter().enumerate() {
            x[space.global_dof(*c, i)] = f(*p);
        }
    }
    x
}

/// The displayed block system, one entry per occurrence of a sub-matrix:
/// (term, row block, column block, sign, transposed).
pub fn layout() -> Vec<(&'static str, Variable, Variable, f64, bool)> {
    use Variable::*;
    vec![
        ("a", HeatFlux, HeatFlux, 1.0, false),
        ("b", HeatFlux, Temperature, -1.0, true),
        ("c", HeatFlux, Stress, -1.0, true),
        ("b", Temperature, HeatFlux, 1.0, false),
        ("j_theta", Temperature, Temperature, 1.0, false),
        ("c", Stress, HeatFlux, 1.0, false),
        ("d", Stress, Stress, 1.0, false),
        ("e", Stress, Velocity, -1.0, true),
        ("f", Stress, Pressure, 1.0, true),
        ("e", Velocity, Stress, 1.0, false),
        ("j_u", Velocity, Velocity, 1.0, false),
        ("g", Velocity, Pressure, 1.0, false),
        ("f", Pressure, Stress, 1.0, false),
        ("g", Pressure, Velocity, -1.0, true),
        ("h", Pressure, Pressure, 1.0, false),
        ("j_p", Pressure, Pressure, 1.0, false),
    ]
}

fn compose(space: &Arc<MixedSpace>, data: &FormData) -> HashMap<(usize, usize), f64> {
    let mut out: HashMap<(usize, usize), f64> = HashMap::new();
    let mut cache: HashMap<&str, SparseMatrix> = HashMap::new();
    for (name, row, col, sign, transposed) in layout() {
        if name.starts_with("j_") && !data.stabilization.enabled {
            continue;
        }
        let m = cache.entry(name).or_insert_with(|| assemble_term(space, data, name).unwrap());
        let (rr, cr) = (space.variable_range(row), space.variable_range(col));
        for i in 0..m.n_rows() {
            let (cols, vals) = m.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (gi, gj) = if transposed { (j as usize, i) } else { (i, j as usize) };
                if rr.contains(&gi) && cr.contains(&gj) {
                    *out.entry((gi, gj)).or_default() += sign * v;
                }
            }
        }
    }
    out
}

/// Largest entry of the full matrix minus the blocks placed by hand.
pub fn block_deviation(hi: usize, lo: usize, stab: StabilizationParams) -> f64 {
    let mesh = Arc::new(generate_rectangle(2.0, 1.0, 0.4).unwrap());
    let space = Arc::new(MixedSpace::new(mesh, hi, lo).unwrap());
    let data = rectangle_data(0.6, [1.0, 0.5, 2.0, 1.3], [0.0, 1e-3, 2.0, 10.0], stab);
    let full = assemble(&space, &data).unwrap().matrix;
    let mut composed = compose(&space, &data);
    let mut worst: f64 = 0.0;
    for i in 0..full.n_rows() {
        let (cols, vals) = full.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let c = composed.remove(&(i, j as usize)).unwrap_or(0.0);
            worst = worst.max((v - c).abs());
        }
    }
    composed.values().fold(worst, |w, v| w.max(v.abs()))
}

/// Largest relative gap of `int stf(grad s):grad r` against
/// `int sym grad s : sym grad r - 1/3 int div s div r` over random P2 fields.
pub fn stf_identity_gap(samples: usize, seed: u64) -> f64 {
    let sp = MixedSpace::new(Arc::new(mesh_200()), 2, 2).unwrap();
    let mesh = sp.mesh();
    let map = sp.dof_map(Variable::HeatFlux);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ce = CellEval::new(&sp, 4).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s: Vec<[f64; 2]> = (0..map.n_dofs()).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let r: Vec<[f64; 2]> = (0..map.n_dofs()).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for cell in 0..mesh.n_cells() {
            ce.reset(mesh, cell);
            let t = ce.basis(2);
            for q in 0..ce.n_points() {
                let (mut gs, mut gr) = ([[0.0; 2]; 2], [[0.0; 2]; 2]);
                for (a, &d) in map.cell_dofs(cell).iter().enumerate() {
                    let g = t.grad(q, a);
                    for i in 0..2 {
                        for j in 0..2 {
                            gs[i][j] += s[d][i] * g[j];
                            gr[i][j] += r[d][i] * g[j];
                        }
                    }
                }
                let w = ce.weights[q];
                lhs += w * inner2d(&stf3d2(&gs), &gr);
                let (ds, dr) = (gs[0][0] + gs[1][1], gr[0][0] + gr[1][1]);
                rhs += w * (inner2d(&sym2(&gs), &sym2(&gr)) - ds * dr / 3.0);
            }
        }
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    worst
}

/// Largest jump energy of linear theta, u and p interpolants, over P1 and
/// P2 and the three jump terms. The fields are of unit size on [0, 2] x [0, 1].
pub fn cip_linear_energy() -> f64 {
    let data = rectangle_data(1.0, [1.0; 4], [0.0; 4], StabilizationParams::new(1.0, 1.0, 1.0));
    let mut worst: f64 = 0.0;
    for deg in [1, 2] {
        let sp = Arc::new(MixedSpace::new(Arc::new(mesh_200()), deg, deg).unwrap());
        let x = interpolate(
            &sp,
            &[
                (Component::Theta, &|p| 0.2 + 0.3 * p[0] - 0.4 * p[1]),
                (Component::Ux, &|p| -0.25 * p[0] + 0.5 * p[1]),
                (Component::Uy, &|p| 0.4 * p[0] + 0.1),
                (Component::P, &|p| 0.3 * p[1] - 0.45 * p[0]),
            ],
        );
        for name in ["j_theta", "j_u", "j_p"] {
            let m = assemble_term(&sp, &data, name).unwrap();
            worst = worst.max(quadratic_form(&m, &x).abs());
        }
    }
    worst
}

/// P1 equal order without stabilization and with impermeable walls.
pub fn unstabilized_closed_box(level: PressureLevel) -> Result<f64, SolveError> {
    let mesh = Arc::new(generate_rectangle(2.0, 1.0, 0.2).unwrap());
    let space = Arc::new(MixedSpace::new(mesh, 1, 1).unwrap());
    let mut data = rectangle_data(0.1, [1.0; 4], [0.0; 4], StabilizationParams::off());
    data.boundary.get_mut(&2).unwrap().theta_w = 2.0.into();
    let sys = assemble(&space, &data).unwrap();
    solve(&sys, &SolveOptions { pressure_level: level, ..Default::default() }).map(|(_, r)| r.residual)
}
