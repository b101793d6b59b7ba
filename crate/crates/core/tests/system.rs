mod common;

use std::sync::Arc;

use r13fem::cases::{CaseOptions, CaseRegistry};
use r13fem::fespace::{MixedSpace, Variable};
use r13fem::forms::StabilizationParams;
use r13fem::mesh::generate_rectangle;
use r13fem::system::{
    assemble, solve, solve_with, LinearSolver, PressureLevel, SolveError, SolveOptions,
    SolverRegistry, SparseMatrix, SymmetricLblt,
};

use common::oracles::{block_deviation, unstabilized_closed_box};
use common::rectangle_data;

fn check_blocks(hi: usize, lo: usize, stab: StabilizationParams) {
    let worst = block_deviation(hi, lo, stab);
    assert!(worst <= 1e-12, "({hi},{lo}) max deviation {worst:e}");
}

#[test]
fn blocks_compose_to_the_full_matrix() {
    check_blocks(1, 1, StabilizationParams::new(1.0, 1.0, 0.1));
    check_blocks(2, 2, StabilizationParams::new(1.0, 1.0, 0.01));
    check_blocks(2, 1, StabilizationParams::off());
}

#[test]
fn row_signs_make_the_operator_symmetric() {
    let mesh = Arc::new(generate_rectangle(2.0, 1.0, 0.4).unwrap());
    let space = Arc::new(MixedSpace::new(mesh, 2, 1).unwrap());
    let data = rectangle_data(0.6, [1.0; 4], [0.0, 1e-3, 2.0, 10.0], StabilizationParams::new(1.0, 1.0, 0.1));
    let sys = assemble(&space, &data).unwrap();
    let sign = |i: usize| {
        let v = Variable::ALL.into_iter().find(|v| space.variable_range(*v).contains(&i)).unwrap();
        match v {
            Variable::HeatFlux | Variable::Velocity => 1.0,
            _ => -1.0,
        }
    };
    let m = &sys.matrix;
    for i in 0..m.n_rows() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let j = j as usize;
            assert!((sign(i) * v - sign(j) * m.get(j, i)).abs() < 1e-13);
        }
    }
}

fn ring(h: f64, degrees: (usize, usize), stab: StabilizationParams) -> r13fem::cases::ProblemSpec {
    let opts = CaseOptions { h: Some(h), degrees: Some(degrees), stabilization: Some(stab), ..Default::default() };
    CaseRegistry::builtin().get("ring").unwrap().build(&opts).unwrap()
}

#[test]
fn lu_and_lblt_agree() {
    let spec = ring(0.4, (1, 1), StabilizationParams::new(1.0, 1.0, 0.01));
    let space = spec.build_space().unwrap();
    let sys = assemble(&space, &spec.form).unwrap();
    let (x1, r1) = solve(&sys, &SolveOptions::default()).unwrap();
    let (x2, r2) = solve(&sys, &SolveOptions { solver: "lu".into(), ..Default::default() }).unwrap();
    assert!(r1.residual <= 1e-10 && r2.residual <= 1e-10);
    let scale = x1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = x1.iter().zip(&x2).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff <= 1e-8 * scale, "{diff:e}");
}

#[test]
fn equilibration_does_not_change_the_solution() {
    let spec = ring(0.4, (2, 1), StabilizationParams::off());
    let space = spec.build_space().unwrap();
    let sys = assemble(&space, &spec.form).unwrap();
    let (x1, _) = solve(&sys, &SolveOptions::default()).unwrap();
    let (x2, r) = solve(&sys, &SolveOptions { equilibrate: true, ..Default::default() }).unwrap();
    assert!(r.residual <= 1e-10);
    let diff = x1.iter().zip(&x2).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff < 1e-8);
}

#[test]
fn registry_rejects_duplicates_and_unknown_names() {
    let mut reg = SolverRegistry::builtin();
    let names: Vec<_> = reg.names().collect();
    assert_eq!(names, vec!["lblt", "lu"]);
    assert!(matches!(reg.register(Box::new(SymmetricLblt::default())), Err(SolveError::DuplicateSolver(_))));
    assert!(matches!(reg.get("cg"), Err(SolveError::UnknownSolver(_))));
    assert_eq!(reg.get("lu").unwrap().name(), "lu");
}

struct Renamed(SymmetricLblt);

impl LinearSolver for Renamed {
    fn name(&self) -> &'static str {
        "custom"
    }

    fn factorize(
        &self,
        a: &SparseMatrix,
        row_signs: &[f64],
        equilibrate: bool,
    ) -> Result<Box<dyn r13fem::system::Factorization>, SolveError> {
        self.0.factorize(a, row_signs, equilibrate)
    }
}

#[test]
fn custom_solvers_can_be_registered() {
    let spec = ring(0.4, (1, 1), StabilizationParams::new(1.0, 1.0, 0.01));
    let space = spec.build_space().unwrap();
    let sys = assemble(&space, &spec.form).unwrap();
    let mut reg = SolverRegistry::builtin();
    reg.register(Box::new(Renamed(SymmetricLblt::default()))).unwrap();
    let (_, rep) = solve_with(&sys, &SolveOptions { solver: "custom".into(), ..Default::default() }, &reg).unwrap();
    assert_eq!(rep.solver, "custom");
}

#[test]
fn unstabilized_equal_order_is_rejected() {
    for level in [PressureLevel::Auto, PressureLevel::Free, PressureLevel::Mean] {
        match unstabilized_closed_box(level) {
            Err(SolveError::Singular { .. } | SolveError::Residual { .. }) => {}
            other => panic!("{level:?}: {other:?}"),
        }
    }
}

#[test]
fn closed_stabilized_box_fixes_the_mean_pressure() {
    let mesh = Arc::new(generate_rectangle(2.0, 1.0, 0.2).unwrap());
    let space = Arc::new(MixedSpace::new(mesh, 1, 1).unwrap());
    let mut data = rectangle_data(0.1, [1.0; 4], [0.0; 4], StabilizationParams::new(1.0, 1.0, 0.1));
    data.boundary.get_mut(&2).unwrap().theta_w = 2.0.into();
    let sys = assemble(&space, &data).unwrap();
    assert!(sys.pressure_nullspace);
    let (x, rep) = solve(&sys, &SolveOptions::default()).unwrap();
    assert!(rep.pressure_fixed && rep.residual <= 1e-10);
    let c = sys.pressure_weights().unwrap();
    let mean: f64 = space.variable_range(Variable::Pressure).zip(&c).map(|(i, w)| x[i] * w).sum();
    assert!(mean.abs() < 1e-10);
    let free = solve(&sys, &SolveOptions { pressure_level: PressureLevel::Free, ..Default::default() });
    assert!(free.is_err());
}

#[test]
fn zero_rhs_gives_zero_solution() {
    let spec = ring(0.5, (1, 1), StabilizationParams::new(1.0, 1.0, 0.01));
    let space = spec.build_space().unwrap();
    let mut sys = assemble(&space, &spec.form).unwrap();
    sys.rhs.iter_mut().for_each(|v| *v = 0.0);
    let (x, rep) = solve(&sys, &SolveOptions::default()).unwrap();
    assert!(x.iter().all(|v| *v == 0.0) && rep.residual == 0.0);
}
