//! Built-in problem definitions and their validation.
//!
//! Each case is a [`Case`] strategy registered by name in a [`CaseRegistry`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::exprlang;
use crate::fespace::{FeError, MixedSpace};
use crate::forms::{BoundaryData, PhysicalParams, ScalarField, SourceData, StabilizationParams};
use crate::mesh::{generate_annulus, generate_rectangle, read_gmsh, Mesh2D, MeshError};
use crate::system::FormData;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown case '{0}'")]
    UnknownCase(String),
    #[error("a case named '{0}' is already registered")]
    DuplicateCase(String),
    #[error("case '{case}' has no mesh level {level}; available: {available:?}")]
    UnknownLevel { case: String, level: usize, available: Vec<usize> },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fe(#[from] FeError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Rectangle { width: f64, height: f64, h: f64 },
    Annulus { r_inner: f64, r_outer: f64, h: f64 },
    Gmsh(PathBuf),
}

impl MeshSource {
    pub fn load(&self) -> Result<Mesh2D, MeshError> {
        match self {
            MeshSource::Rectangle { width, height, h } => generate_rectangle(*width, *height, *h),
            MeshSource::Annulus { r_inner, r_outer, h } => generate_annulus(*r_inner, *r_outer, *h),
            MeshSource::Gmsh(path) => read_gmsh(path),
        }
    }

    /// Same geometry at a different target size; files are returned unchanged.
    pub fn with_h(&self, new_h: f64) -> MeshSource {
        match self.clone() {
            MeshSource::Rectangle { width, height, .. } => MeshSource::Rectangle { width, height, h: new_h },
            MeshSource::Annulus { r_inner, r_outer, .. } => MeshSource::Annulus { r_inner, r_outer, h: new_h },
            g @ MeshSource::Gmsh(_) => g,
        }
    }
}

/// Directory holding the shipped MSH fixtures.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub mesh: MeshSource,
    pub degree_high: usize,
    pub degree_low: usize,
    pub form: FormData,
}

impl ProblemSpec {
    pub fn build_space(&self) -> Result<Arc<MixedSpace>, CaseError> {
        let mesh = Arc::new(self.mesh.load()?);
        Ok(Arc::new(MixedSpace::new(mesh, self.degree_high, self.degree_low)?))
    }

    pub fn kn(&self) -> f64 {
        self.form.physics.kn
    }

    pub fn set_kn(&mut self, kn: f64) {
        self.form.physics.kn = kn;
    }
}

/// Knobs shared by all cases; `None` keeps the case default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CaseOptions {
    pub kn: Option<f64>,
    /// Target cell size for generated meshes.
    pub h: Option<f64>,
    /// Fixture level for file-based meshes.
    pub level: Option<usize>,
    pub degrees: Option<(usize, usize)>,
    pub stabilization: Option<StabilizationParams>,
}

pub trait Case: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn build(&self, opts: &CaseOptions) -> Result<ProblemSpec, CaseError>;
}

fn apply_common(mut spec: ProblemSpec, opts: &CaseOptions) -> ProblemSpec {
    if let Some(kn) = opts.kn {
        spec.form.physics.kn = kn;
    }
    if let Some((hi, lo)) = opts.degrees {
        spec.degree_high = hi;
        spec.degree_low = lo;
    }
    if let Some(st) = opts.stabilization {
        spec.form.stabilization = st;
    }
    spec
}

fn expr(text: &str) -> ScalarField {
    ScalarField::Expr(exprlang::parse(text).expect("built-in expression parses"))
}

/// Flow through the gap between two coaxial cylinders.
pub struct RingFlow;

pub const RING_R1: f64 = 0.5;
pub const RING_R2: f64 = 2.0;

impl Case for RingFlow {
    fn name(&self) -> &'static str {
        "ring"
    }

    fn description(&self) -> &'static str {
        "annulus R1=0.5, R2=2 with inflow/outflow on the outer circle, Kn=1"
    }

    fn build(&self, opts: &CaseOptions) -> Result<ProblemSpec, CaseError> {
        let h = opts.h.unwrap_or(0.1);
        // Unit outward normal of the outer circle from the exact geometry.
        let nx = |x: f64, y: f64| x / x.hypot(y);
        let ny = |x: f64, y: f64| y / x.hypot(y);
        let mut boundary = BTreeMap::new();
        boundary.insert(1, BoundaryData::wall(1.0).with_epsilon(1e-3));
        boundary.insert(
            2,
            BoundaryData {
                theta_w: ScalarField::Const(2.0),
                u_t_w: ScalarField::native("-n_y", move |x, y| -ny(x, y)),
                u_n_w: ScalarField::native("n_x", nx),
                p_w: ScalarField::native("-0.27*n_x", move |x, y| -0.27 * nx(x, y)),
                epsilon_w: 1e3,
                chi_tilde: None,
            },
        );
        let spec = ProblemSpec {
            name: self.name().into(),
            mesh: MeshSource::Annulus { r_inner: RING_R1, r_outer: RING_R2, h },
            degree_high: 2,
            degree_low: 2,
            form: FormData {
                physics: PhysicalParams { kn: 1.0, chi_tilde: 1.0 },
                stabilization: StabilizationParams::new(1.0, 1.0, 0.01),
                boundary,
                sources: SourceData::default(),
            },
        };
        Ok(apply_common(spec, opts))
    }
}

/// Force-driven channel flow used for the Knudsen paradox.
pub struct Channel;

/// Target size giving about 10.7k triangles on the 4 x 1 channel.
pub const CHANNEL_H: f64 = 0.0273;
pub const CHANNEL_KN_GRID: [f64; 7] = [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 0.25, 0.5, 1.0, 2.0];

impl Case for Channel {
    fn name(&self) -> &'static str {
        "channel"
    }

    fn description(&self) -> &'static str {
        "4 x 1 channel driven by the body force b = (1, 0)"
    }

    fn build(&self, opts: &CaseOptions) -> Result<ProblemSpec, CaseError> {
        let h = opts.h.unwrap_or(CHANNEL_H);
        let mut boundary = BTreeMap::new();
        for tag in [1, 3] {
            boundary.insert(tag, BoundaryData::wall(1.0).with_epsilon(1e-3));
        }
        for tag in [2, 4] {
            boundary.insert(tag, BoundaryData::wall(1.0).with_epsilon(1e3));
        }
        let sources = SourceData { b: [ScalarField::Const(1.0), ScalarField::zero()], ..SourceData::default() };
        let spec = ProblemSpec {
            name: self.name().into(),
            mesh: MeshSource::Rectangle { width: 4.0, height: 1.0, h },
            degree_high: 1,
            degree_low: 1,
            form: FormData {
                physics: PhysicalParams { kn: 0.25, chi_tilde: 1.0 },
                stabilization: StabilizationParams::new(1.0, 1.0, 0.1),
                boundary,
                sources,
            },
        };
        Ok(apply_common(spec, opts))
    }
}

/// Wall temperature profiles of the racetrack, tags 1 to 4; tags 5 to 8 reuse them.
pub const PUMP_THETA: [&str; 4] = [
    "1/2*2/pi*atan2(y, x-1) + 1",
    "0.5*x + 1",
    "-1/2*2/pi*atan2(y, -1-x) + 1",
    "-0.5*x + 1",
];

/// Fixture levels of the racetrack: `1/h`.
pub const PUMP_LEVELS: [usize; 4] = [4, 8, 16, 32];

/// Thermal transpiration in a racetrack-shaped channel.
pub struct KnudsenPump;

impl Case for KnudsenPump {
    fn name(&self) -> &'static str {
        "knudsen-pump"
    }

    fn description(&self) -> &'static str {
        "racetrack L=1, R1=1/2, R2=2 with piecewise linear wall temperature, Kn=0.1"
    }

    fn build(&self, opts: &CaseOptions) -> Result<ProblemSpec, CaseError> {
        let level = opts.level.unwrap_or(16);
        if !PUMP_LEVELS.contains(&level) {
            return Err(CaseError::UnknownLevel {
                case: self.name().into(),
                level,
                available: PUMP_LEVELS.to_vec(),
            });
        }
        let mut boundary = BTreeMap::new();
        for (i, text) in PUMP_THETA.iter().enumerate() {
            let tag = i as u32 + 1;
            boundary.insert(tag, BoundaryData::wall(expr(text)));
            boundary.insert(tag + 4, BoundaryData::wall(expr(text)));
        }
        let spec = ProblemSpec {
            name: self.name().into(),
            mesh: MeshSource::Gmsh(fixture_dir().join(format!("racetrack_h{level}.msh"))),
            degree_high: 1,
            degree_low: 1,
            form: FormData {
                physics: PhysicalParams { kn: 0.1, chi_tilde: 1.0 },
                stabilization: StabilizationParams::new(1.0, 1.0, 0.1),
                boundary,
                sources: SourceData::default(),
            },
        };
        Ok(apply_common(spec, opts))
    }
}

/// Refinement levels `s` of the chamber fixture.
pub const EDGE_LEVELS: [usize; 2] = [0, 1];

/// Hot beam inside a cold square chamber.
pub struct ThermalEdge;

impl Case for ThermalEdge {
    fn name(&self) -> &'static str {
        "thermal-edge"
    }

    fn description(&self) -> &'static str {
        "chamber [0,8]^2 with hot beam [1,3]^2, Kn=0.001"
    }

    fn build(&self, opts: &CaseOptions) -> Result<ProblemSpec, CaseError> {
        let level = opts.level.unwrap_or(0);
        if !EDGE_LEVELS.contains(&level) {
            return Err(CaseError::UnknownLevel {
                case: self.name().into(),
                level,
                available: EDGE_LEVELS.to_vec(),
            });
        }
        let mut boundary = BTreeMap::new();
        boundary.insert(1, BoundaryData::wall(0.0));
        boundary.insert(2, BoundaryData::wall(1.0));
        let spec = ProblemSpec {
            name: self.name().into(),
            mesh: MeshSource::Gmsh(fixture_dir().join(format!("chamber_s{level}.msh"))),
            degree_high: 1,
            degree_low: 1,
            form: FormData {
                physics: PhysicalParams { kn: 0.001, chi_tilde: 1.0 },
                stabilization: StabilizationParams::new(1.0, 1.0, 0.1),
                boundary,
                sources: SourceData::default(),
            },
        };
        Ok(apply_common(spec, opts))
    }
}

pub struct CaseRegistry {
    cases: BTreeMap<&'static str, Box<dyn Case>>,
}

impl CaseRegistry {
    pub fn empty() -> Self {
        CaseRegistry { cases: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        for c in [
            Box::new(RingFlow) as Box<dyn Case>,
            Box::new(Channel),
            Box::new(KnudsenPump),
            Box::new(ThermalEdge),
        ] {
            r.register(c).expect("unique names");
        }
        r
    }

    pub fn register(&mut self, case: Box<dyn Case>) -> Result<(), CaseError> {
        if self.cases.contains_key(case.name()) {
            return Err(CaseError::DuplicateCase(case.name().into()));
        }
        self.cases.insert(case.name(), case);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&dyn Case, CaseError> {
        self.cases.get(name).map(|c| c.as_ref()).ok_or_else(|| CaseError::UnknownCase(name.into()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.cases.keys().copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check parameter admissibility. Mesh tags are checked when `mesh` is given.
pub fn validate(spec: &ProblemSpec, mesh: Option<&Mesh2D>) -> Validation {
    let mut v = Validation::default();
    let f = &spec.form;
    let positive = |x: f64| x > 0.0 && x.is_finite();
    if !positive(f.physics.kn) {
        v.errors.push(format!("Kn must be positive, got {}", f.physics.kn));
    }
    if !positive(f.physics.chi_tilde) {
        v.errors.push(format!("chi_tilde must be positive, got {}", f.physics.chi_tilde));
    }
    for (tag, bc) in &f.boundary {
        if !(bc.epsilon_w >= 0.0 && bc.epsilon_w.is_finite()) {
            v.errors.push(format!("epsilon_w on tag {tag} must be >= 0, got {}", bc.epsilon_w));
        }
        if let Some(chi) = bc.chi_tilde {
            if !positive(chi) {
                v.errors.push(format!("chi_tilde on tag {tag} must be positive, got {chi}"));
            }
        }
    }
    let st = &f.stabilization;
    if st.enabled {
        for (name, d) in [("delta_theta", st.delta_theta), ("delta_u", st.delta_u), ("delta_p", st.delta_p)] {
            if !positive(d) {
                v.errors.push(format!("{name} must be positive when stabilization is enabled, got {d}"));
            }
        }
    } else if spec.degree_high == spec.degree_low {
        v.warnings.push("equal-order elements without stabilization; the system is likely singular".into());
    }
    for (name, d) in [("degree_high", spec.degree_high), ("degree_low", spec.degree_low)] {
        if !(1..=2).contains(&d) {
            v.errors.push(format!("{name} must be 1 or 2, got {d}"));
        }
    }
    if spec.degree_high < spec.degree_low {
        v.errors.push("degree_high must be >= degree_low".into());
    }
    if let Some(mesh) = mesh {
        for tag in mesh.tags() {
            if !f.boundary.contains_key(&tag) {
                v.errors.push(format!("mesh tag {tag} has no boundary data"));
            }
        }
    }
    v
}
