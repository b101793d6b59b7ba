//! TOML run configuration.
//!
//! A config either starts from a built-in case (`case = "ring"`) and
//! overrides parts of it, or describes a problem from scratch. Sections:
//! `[mesh]`, `[elements]`, `[physics]`, `[stabilization]`, `[sources]`,
//! `[bc.<tag>]`, `[output]`, `[solver]`, `[convergence]`, `[sweep]` and
//! `[[sample]]`. Mesh paths are relative to the config file; output paths
//! are relative to the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::cases::{CaseOptions, CaseRegistry, MeshSource, ProblemSpec, CHANNEL_KN_GRID};
use crate::exprlang;
use crate::fespace::Component;
use crate::forms::{BoundaryData, PhysicalParams, ScalarField, SourceData, StabilizationParams};
use crate::system::{FormData, PressureLevel, SolveOptions};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawField {
    Num(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    case: Option<String>,
    level: Option<usize>,
    mesh: Option<RawMesh>,
    elements: Option<RawElements>,
    physics: Option<RawPhysics>,
    stabilization: Option<RawStabilization>,
    sources: Option<RawSources>,
    #[serde(default)]
    bc: BTreeMap<String, RawBc>,
    output: Option<RawOutput>,
    solver: Option<RawSolver>,
    convergence: Option<RawConvergence>,
    sweep: Option<RawSweep>,
    #[serde(default)]
    sample: Vec<RawSample>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    builtin: Option<String>,
    width: Option<f64>,
    height: Option<f64>,
    r_inner: Option<f64>,
    r_outer: Option<f64>,
    h: Option<f64>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElements {
    degree_high: Option<usize>,
    degree_low: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    kn: Option<f64>,
    chi_tilde: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStabilization {
    enabled: Option<bool>,
    delta_theta: Option<f64>,
    delta_u: Option<f64>,
    delta_p: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSources {
    m_dot: Option<RawField>,
    r: Option<RawField>,
    b_x: Option<RawField>,
    b_y: Option<RawField>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBc {
    theta_w: Option<RawField>,
    u_t_w: Option<RawField>,
    u_n_w: Option<RawField>,
    p_w: Option<RawField>,
    epsilon_w: Option<RawField>,
    chi_tilde: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    vtk: Option<PathBuf>,
    csv: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    name: Option<String>,
    equilibrate: Option<bool>,
    tolerance: Option<f64>,
    max_refinement: Option<usize>,
    condition_limit: Option<f64>,
    pressure_level: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConvergence {
    h: Option<Vec<f64>>,
    h_ref: Option<f64>,
    meshes: Option<Vec<PathBuf>>,
    reference: Option<PathBuf>,
    csv: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    kn: Option<Vec<f64>>,
    tag: Option<u32>,
    csv: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    p0: [f64; 2],
    p1: [f64; 2],
    n: Option<usize>,
    components: Vec<String>,
    csv: Option<PathBuf>,
}

/// Where files go. Relative paths are taken against `dir` when it is set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputPaths {
    pub dir: Option<PathBuf>,
    pub vtk: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl OutputPaths {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub coarse: Vec<MeshSource>,
    pub reference: MeshSource,
    pub csv: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub kn: Vec<f64>,
    pub tag: u32,
    pub csv: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub p0: [f64; 2],
    pub p1: [f64; 2],
    pub n: usize,
    pub components: Vec<Component>,
    pub csv: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ProblemSpec,
    pub solve: SolveOptions,
    pub output: OutputPaths,
    pub convergence: Option<ConvergenceConfig>,
    pub sweep: SweepConfig,
    pub samples: Vec<SampleConfig>,
}

impl RunConfig {
    pub fn set_kn(&mut self, kn: f64) {
        self.spec.set_kn(kn);
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_str(&src, &base)
}

/// Parse config text; mesh paths are resolved against `base_dir`.
pub fn parse_str(src: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(src, s.start)).unwrap_or((0, 0));
        ConfigError::Syntax { line, column, message: e.message().to_string() }
    })?;
    Builder { src, base_dir }.build(raw)
}

/// 1-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Line of `key` inside `[section]`, by a plain scan of the text.
fn find_line(src: &str, section: &str, key: &str) -> Option<usize> {
    let norm = |s: &str| s.chars().filter(|c| !c.is_whitespace() && *c != '"' && *c != '\'').collect::<String>();
    let mut current = String::new();
    let mut header_line = None;
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = norm(t.trim_start_matches('[').trim_end_matches(']'));
            if current == section {
                header_line = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if norm(k) == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header_line
}

struct Builder<'a> {
    src: &'a str,
    base_dir: &'a Path,
}

impl Builder<'_> {
    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        let at = match (section.is_empty(), key.is_empty()) {
            (true, _) => key.to_string(),
            (false, true) => format!("[{section}]"),
            (false, false) => format!("[{section}] {key}"),
        };
        let location = match find_line(self.src, section, key) {
            Some(l) => format!("line {l}, {at}"),
            None => at,
        };
        ConfigError::Invalid { location, message: message.into() }
    }

    fn field(&self, section: &str, key: &str, f: &RawField) -> Result<ScalarField, ConfigError> {
        match f {
            RawField::Num(v) => Ok(ScalarField::Const(*v)),
            RawField::Text(t) => exprlang::parse(t)
                .map(ScalarField::Expr)
                .map_err(|e| self.err(section, key, format!("bad expression '{t}': {e}"))),
        }
    }

    fn constant(&self, section: &str, key: &str, f: &RawField) -> Result<f64, ConfigError> {
        let field = self.field(section, key, f)?;
        let a = field.eval([0.0, 0.0]).map_err(|e| self.err(section, key, e.to_string()))?;
        let b = field.eval([0.7, -1.3]).map_err(|e| self.err(section, key, e.to_string()))?;
        if a != b {
            return Err(self.err(section, key, "must be a constant"));
        }
        Ok(a)
    }

    fn build(&self, raw: RawConfig) -> Result<RunConfig, ConfigError> {
        let mut spec = match &raw.case {
            Some(name) => {
                let reg = CaseRegistry::builtin();
                let case = reg.get(name).map_err(|e| self.err("", "case", e.to_string()))?;
                let opts = CaseOptions { level: raw.level, ..Default::default() };
                case.build(&opts).map_err(|e| self.err("", "level", e.to_string()))?
            }
            None => {
                if raw.level.is_some() {
                    return Err(self.err("", "level", "only meaningful together with 'case'"));
                }
                let mesh = raw.mesh.as_ref().ok_or_else(|| self.err("mesh", "", "section required without 'case'"))?;
                ProblemSpec {
                    name: "custom".into(),
                    mesh: self.mesh(mesh, None)?,
                    degree_high: 1,
                    degree_low: 1,
                    form: FormData {
                        physics: PhysicalParams { kn: f64::NAN, chi_tilde: 1.0 },
                        stabilization: StabilizationParams::new(1.0, 1.0, 0.1),
                        boundary: BTreeMap::new(),
                        sources: SourceData::default(),
                    },
                }
            }
        };
        if raw.case.is_some() {
            if let Some(m) = &raw.mesh {
                spec.mesh = self.mesh(m, Some(&spec.mesh))?;
            }
        }
        if let Some(e) = &raw.elements {
            spec.degree_high = e.degree_high.unwrap_or(spec.degree_high);
            spec.degree_low = e.degree_low.unwrap_or(spec.degree_low);
        }
        let form = &mut spec.form;
        if let Some(p) = &raw.physics {
            form.physics.kn = p.kn.unwrap_or(form.physics.kn);
            form.physics.chi_tilde = p.chi_tilde.unwrap_or(form.physics.chi_tilde);
        }
        if form.physics.kn.is_nan() {
            return Err(self.err("physics", "kn", "required without 'case'"));
        }
        if let Some(s) = &raw.stabilization {
            let st = &mut form.stabilization;
            st.enabled = s.enabled.unwrap_or(st.enabled);
            st.delta_theta = s.delta_theta.unwrap_or(st.delta_theta);
            st.delta_u = s.delta_u.unwrap_or(st.delta_u);
            st.delta_p = s.delta_p.unwrap_or(st.delta_p);
        }
        if let Some(s) = &raw.sources {
            let src = &mut form.sources;
            for (key, f, slot) in [
                ("m_dot", &s.m_dot, &mut src.m_dot),
                ("r", &s.r, &mut src.r),
                ("b_x", &s.b_x, &mut src.b[0]),
            ] {
                if let Some(f) = f {
                    *slot = self.field("sources", key, f)?;
                }
            }
            if let Some(f) = &s.b_y {
                src.b[1] = self.field("sources", "b_y", f)?;
            }
        }
        for (key, bc) in &raw.bc {
            let section = format!("bc.{key}");
            let tag: u32 = key
                .parse()
                .ok()
                .filter(|t| *t > 0)
                .ok_or_else(|| self.err(&section, "", "boundary tag must be a positive integer"))?;
            let entry = match form.boundary.remove(&tag) {
                Some(existing) => existing,
                None => {
                    let theta = bc.theta_w.as_ref().ok_or_else(|| self.err(&section, "theta_w", "required for a new tag"))?;
                    BoundaryData::wall(self.field(&section, "theta_w", theta)?)
                }
            };
            let mut entry = entry;
            if let Some(f) = &bc.theta_w {
                entry.theta_w = self.field(&section, "theta_w", f)?;
            }
            if let Some(f) = &bc.u_t_w {
                entry.u_t_w = self.field(&section, "u_t_w", f)?;
            }
            if let Some(f) = &bc.u_n_w {
                entry.u_n_w = self.field(&section, "u_n_w", f)?;
            }
            if let Some(f) = &bc.p_w {
                entry.p_w = self.field(&section, "p_w", f)?;
            }
            if let Some(f) = &bc.epsilon_w {
                entry.epsilon_w = self.constant(&section, "epsilon_w", f)?;
            }
            if bc.chi_tilde.is_some() {
                entry.chi_tilde = bc.chi_tilde;
            }
            form.boundary.insert(tag, entry);
        }

        let v = crate::cases::validate(&spec, None);
        if let Some(first) = v.errors.first() {
            return Err(ConfigError::Invalid { location: "problem".into(), message: first.clone() });
        }

        let output = raw.output.map_or_else(OutputPaths::default, |o| OutputPaths { dir: o.dir, vtk: o.vtk, csv: o.csv });
        let solve = self.solver(raw.solver.unwrap_or_default())?;
        let convergence = match raw.convergence {
            Some(c) => Some(self.convergence(c, &spec.mesh)?),
            None => None,
        };
        let sweep = raw.sweep.unwrap_or_default();
        let sweep = SweepConfig {
            kn: sweep.kn.unwrap_or_else(|| CHANNEL_KN_GRID.to_vec()),
            tag: sweep.tag.unwrap_or(2),
            csv: sweep.csv.unwrap_or_else(|| "kn_sweep.csv".into()),
        };
        if let Some(kn) = sweep.kn.iter().find(|k| !(**k > 0.0)) {
            return Err(self.err("sweep", "kn", format!("Knudsen numbers must be positive, got {kn}")));
        }
        let mut samples = Vec::new();
        for (i, s) in raw.sample.into_iter().enumerate() {
            let components = s
                .components
                .iter()
                .map(|c| Component::from_name(c).map_err(|e| self.err("sample", "components", e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let n = s.n.unwrap_or(201);
            if n < 2 {
                return Err(self.err("sample", "n", "need at least two samples"));
            }
            samples.push(SampleConfig {
                p0: s.p0,
                p1: s.p1,
                n,
                components,
                csv: s.csv.unwrap_or_else(|| format!("sample_{i}.csv").into()),
            });
        }
        Ok(RunConfig { spec, solve, output, convergence, sweep, samples })
    }

    fn mesh(&self, m: &RawMesh, base: Option<&MeshSource>) -> Result<MeshSource, ConfigError> {
        if let Some(path) = &m.path {
            if m.builtin.is_some() {
                return Err(self.err("mesh", "path", "give either 'path' or 'builtin', not both"));
            }
            return Ok(MeshSource::Gmsh(self.base_dir.join(path)));
        }
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| self.err("mesh", key, "required"));
        match m.builtin.as_deref() {
            Some("rectangle") => Ok(MeshSource::Rectangle {
                width: need(m.width, "width")?,
                height: need(m.height, "height")?,
                h: need(m.h, "h")?,
            }),
            Some("annulus") => Ok(MeshSource::Annulus {
                r_inner: need(m.r_inner, "r_inner")?,
                r_outer: need(m.r_outer, "r_outer")?,
                h: need(m.h, "h")?,
            }),
            Some(other) => Err(self.err("mesh", "builtin", format!("unknown generator '{other}' (rectangle, annulus)"))),
            None => match (base, m.h) {
                (Some(b), Some(h)) => Ok(b.with_h(h)),
                (Some(b), None) => Ok(b.clone()),
                (None, _) => Err(self.err("mesh", "builtin", "give 'builtin' or 'path'")),
            },
        }
    }

    fn solver(&self, s: RawSolver) -> Result<SolveOptions, ConfigError> {
        let mut o = SolveOptions::default();
        if let Some(name) = s.name {
            o.solver = name;
        }
        o.equilibrate = s.equilibrate.unwrap_or(o.equilibrate);
        o.tolerance = s.tolerance.unwrap_or(o.tolerance);
        o.max_refinement = s.max_refinement.unwrap_or(o.max_refinement);
        o.condition_limit = s.condition_limit.unwrap_or(o.condition_limit);
        if let Some(level) = s.pressure_level {
            o.pressure_level = match level.as_str() {
                "auto" => PressureLevel::Auto,
                "mean" => PressureLevel::Mean,
                "free" => PressureLevel::Free,
                _ => return Err(self.err("solver", "pressure_level", format!("'{level}' is not auto, mean or free"))),
            };
        }
        Ok(o)
    }

    fn convergence(&self, c: RawConvergence, mesh: &MeshSource) -> Result<ConvergenceConfig, ConfigError> {
        let csv = c.csv.unwrap_or_else(|| "errors.csv".into());
        match (c.h, c.meshes) {
            (Some(_), Some(_)) => Err(self.err("convergence", "meshes", "give either 'h' or 'meshes', not both")),
            (Some(hs), None) => {
                if matches!(mesh, MeshSource::Gmsh(_)) {
                    return Err(self.err("convergence", "h", "a file mesh cannot be regenerated; use 'meshes'"));
                }
                let h_ref = c.h_ref.ok_or_else(|| self.err("convergence", "h_ref", "required with 'h'"))?;
                if hs.is_empty() || hs.iter().any(|h| !(*h > h_ref)) {
                    return Err(self.err("convergence", "h", "need at least one size, each larger than h_ref"));
                }
                Ok(ConvergenceConfig {
                    coarse: hs.iter().map(|&h| mesh.with_h(h)).collect(),
                    reference: mesh.with_h(h_ref),
                    csv,
                })
            }
            (None, Some(paths)) => {
                let reference = c.reference.ok_or_else(|| self.err("convergence", "reference", "required with 'meshes'"))?;
                Ok(ConvergenceConfig {
                    coarse: paths.iter().map(|p| MeshSource::Gmsh(self.base_dir.join(p))).collect(),
                    reference: MeshSource::Gmsh(self.base_dir.join(reference)),
                    csv,
                })
            }
            (None, None) => Err(self.err("convergence", "h", "give 'h' with 'h_ref', or 'meshes' with 'reference'")),
        }
    }
}
