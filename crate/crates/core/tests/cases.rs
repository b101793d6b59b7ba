use r13fem::cases::*;
use r13fem::driver::run;
use r13fem::fespace::{reference_coords, Component};
use r13fem::forms::StabilizationParams;
use r13fem::postproc::Solution;
use r13fem::system::SolveOptions;

/// Boundary L2 distance between the total pressure p + sigma_nn and p_w on `tag`.
fn total_pressure_gap(sol: &Solution, spec: &ProblemSpec, tag: u32) -> f64 {
    let m = sol.mesh();
    let p_w = &spec.form.boundary[&tag].p_w;
    let gauss = [(0.5 - 0.5 * 0.6f64.sqrt(), 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + 0.5 * 0.6f64.sqrt(), 5.0 / 18.0)];
    let mut sum = 0.0;
    for e in m.boundary_edges().iter().filter(|e| e.tag == tag) {
        let [a, b] = e.vertices;
        let f = m.edge_frame(a, b, e.cell).unwrap();
        let (pa, pb) = (m.vertices()[a], m.vertices()[b]);
        for (s, w) in gauss {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let r = reference_coords(m.cell_points(e.cell), x);
            let v = |c| sol.eval_in_cell(c, e.cell, r);
            let [nx, ny] = f.n;
            let snn = nx * nx * v(Component::SigmaXX) + 2.0 * nx * ny * v(Component::SigmaXY) + ny * ny * v(Component::SigmaYY);
            let d = v(Component::P) + snn - p_w.eval(x).unwrap();
            sum += w * f.length * d * d;
        }
    }
    sum.sqrt()
}

#[test]
fn larger_epsilon_pulls_total_pressure_toward_the_wall_value() {
    let opts = CaseOptions {
        h: Some(0.2),
        degrees: Some((1, 1)),
        stabilization: Some(StabilizationParams::new(1.0, 1.0, 0.1)),
        ..Default::default()
    };
    let base = RingFlow.build(&opts).unwrap();
    let gaps: Vec<f64> = [10.0, 100.0, 1000.0]
        .into_iter()
        .map(|eps| {
            let mut spec = base.clone();
            spec.form.boundary.get_mut(&2).unwrap().epsilon_w = eps;
            let sol = run(&spec, &SolveOptions::default()).unwrap().solution;
            total_pressure_gap(&sol, &spec, 2)
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn inadmissible_parameters_are_errors() {
    let mut spec = Channel.build(&CaseOptions::default()).unwrap();
    spec.set_kn(0.0);
    let v = validate(&spec, None);
    assert!(v.errors.iter().any(|e| e.contains("Kn")), "{v:?}");

    let mut spec = RingFlow.build(&CaseOptions::default()).unwrap();
    spec.form.boundary.get_mut(&1).unwrap().epsilon_w = -1.0;
    let v = validate(&spec, None);
    assert!(v.errors.iter().any(|e| e.contains("tag 1")), "{v:?}");

    let opts = CaseOptions { stabilization: Some(StabilizationParams::new(1.0, 0.0, 0.1)), ..Default::default() };
    assert!(!validate(&Channel.build(&opts).unwrap(), None).is_ok());
    let opts = CaseOptions { degrees: Some((1, 2)), ..Default::default() };
    assert!(!validate(&Channel.build(&opts).unwrap(), None).is_ok());
}

#[test]
fn equal_order_without_stabilization_warns_but_validates() {
    let opts = CaseOptions {
        h: Some(0.5),
        stabilization: Some(StabilizationParams::off()),
        ..Default::default()
    };
    let spec = RingFlow.build(&opts).unwrap();
    let v = validate(&spec, None);
    assert!(v.is_ok());
    assert_eq!(v.warnings.len(), 1);
}

#[test]
fn mesh_tags_need_boundary_data() {
    let mut spec = Channel.build(&CaseOptions { h: Some(0.5), ..Default::default() }).unwrap();
    let mesh = spec.mesh.load().unwrap();
    assert!(validate(&spec, Some(&mesh)).is_ok());
    spec.form.boundary.remove(&3);
    let v = validate(&spec, Some(&mesh));
    assert_eq!(v.errors, vec!["mesh tag 3 has no boundary data".to_string()]);
}

#[test]
fn builtin_cases_match_their_meshes() {
    let reg = CaseRegistry::builtin();
    let names: Vec<_> = reg.names().collect();
    assert_eq!(names, ["channel", "knudsen-pump", "ring", "thermal-edge"]);
    for name in names {
        let opts = match name {
            "ring" | "channel" => CaseOptions { h: Some(0.5), ..Default::default() },
            "knudsen-pump" => CaseOptions { level: Some(4), ..Default::default() },
            _ => CaseOptions::default(),
        };
        let spec = reg.get(name).unwrap().build(&opts).unwrap();
        let mesh = spec.mesh.load().unwrap();
        let v = validate(&spec, Some(&mesh));
        assert!(v.is_ok() && v.warnings.is_empty(), "{name}: {v:?}");
    }
}

#[test]
fn unknown_levels_list_the_available_ones() {
    let err = KnudsenPump.build(&CaseOptions { level: Some(12), ..Default::default() }).unwrap_err();
    match err {
        CaseError::UnknownLevel { level, available, .. } => {
            assert_eq!(level, 12);
            assert_eq!(available, PUMP_LEVELS.to_vec());
        }
        e => panic!("{e}"),
    }
    assert!(ThermalEdge.build(&CaseOptions { level: Some(2), ..Default::default() }).is_err());
}

#[test]
fn options_override_case_defaults() {
    let opts = CaseOptions { kn: Some(0.5), h: Some(0.3), degrees: Some((2, 1)), ..Default::default() };
    let spec = Channel.build(&opts).unwrap();
    assert_eq!(spec.kn(), 0.5);
    assert_eq!((spec.degree_high, spec.degree_low), (2, 1));
    assert_eq!(spec.mesh, MeshSource::Rectangle { width: 4.0, height: 1.0, h: 0.3 });
    assert_eq!(spec.mesh.with_h(0.1), MeshSource::Rectangle { width: 4.0, height: 1.0, h: 0.1 });
}

#[test]
fn pump_repeats_wall_temperatures_on_the_outer_wall() {
    let spec = KnudsenPump.build(&CaseOptions::default()).unwrap();
    for tag in 1..=4 {
        for p in [[1.3, 0.5], [-0.2, -1.1]] {
            let a = spec.form.boundary[&tag].theta_w.eval(p).unwrap();
            let b = spec.form.boundary[&(tag + 4)].theta_w.eval(p).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(spec.form.boundary[&tag].epsilon_w, 0.0);
    }
    assert!((spec.form.boundary[&2].theta_w.eval([1.0, 0.5]).unwrap() - 1.5).abs() < 1e-15);
}

struct Couette;

impl Case for Couette {
    fn name(&self) -> &'static str {
        "couette"
    }

    fn description(&self) -> &'static str {
        "test case"
    }

    fn build(&self, opts: &CaseOptions) -> Result<ProblemSpec, CaseError> {
        let mut spec = Channel.build(opts)?;
        spec.name = self.name().into();
        Ok(spec)
    }
}

#[test]
fn registry_accepts_new_cases_once() {
    let mut reg = CaseRegistry::builtin();
    reg.register(Box::new(Couette)).unwrap();
    assert_eq!(reg.get("couette").unwrap().build(&CaseOptions::default()).unwrap().name, "couette");
    assert!(matches!(reg.register(Box::new(Couette)), Err(CaseError::DuplicateCase(_))));
    assert!(matches!(reg.get("nope"), Err(CaseError::UnknownCase(_))));
    assert_eq!(CaseRegistry::empty().names().count(), 0);
}
