use thiserror::Error;

use super::Solution;
use crate::fespace::{edge_quadrature, physical_point, triangle_quadrature, Component, FeError};

#[derive(Debug, Error)]
pub enum PostprocError {
    #[error("no boundary edges carry tag {0}")]
    UnknownTag(u32),
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Relative L2 error. `normalized` is false when the reference vanished at
/// every vertex and the absolute error is returned instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Error {
    pub value: f64,
    pub normalized: bool,
}

const ERROR_QUADRATURE: usize = 6;

fn node_max(sol: &Solution, reference: &dyn Fn([f64; 2]) -> f64) -> f64 {
    sol.mesh().vertices().iter().fold(0.0, |m, &p| m.max(reference(p).abs()))
}

/// `||f_ex - f_h||_L2 / max_nodes |f_ex|`, integrated with the cell rule of
/// the solution's mesh.
pub fn error_l2(sol: &Solution, c: Component, reference: &dyn Fn([f64; 2]) -> f64) -> Result<L2Error, FeError> {
    let rule = triangle_quadrature(ERROR_QUADRATURE)?;
    let mesh = sol.mesh();
    let mut acc = 0.0;
    for cell in 0..mesh.n_cells() {
        let pts = mesh.cell_points(cell);
        let det = mesh.cell_geometry(cell).det.abs();
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            let x = physical_point(pts, q[0], q[1]);
            let d = reference(x) - sol.eval_in_cell(c, cell, *q);
            acc += w * det * d * d;
        }
    }
    let abs = acc.sqrt();
    let norm = node_max(sol, reference);
    Ok(if norm > 0.0 { L2Error { value: abs / norm, normalized: true } } else { L2Error { value: abs, normalized: false } })
}

/// `max_nodes |f_ex - f_h| / max_nodes |f_ex|` over mesh vertices.
pub fn error_linf_nodes(sol: &Solution, c: Component, reference: &dyn Fn([f64; 2]) -> f64) -> f64 {
    let vals = sol.vertex_values(c);
    let mut err: f64 = 0.0;
    for (p, v) in sol.mesh().vertices().iter().zip(vals) {
        err = err.max((reference(*p) - v).abs());
    }
    let norm = node_max(sol, reference);
    if norm > 0.0 {
        err / norm
    } else {
        err
    }
}

/// Per-component errors of `sol` against a (finer) reference solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub l2: [f64; 9],
    pub linf: [f64; 9],
}

impl ErrorReport {
    pub fn l2_of(&self, c: Component) -> f64 {
        self.l2[c.index()]
    }

    pub fn linf_of(&self, c: Component) -> f64 {
        self.linf[c.index()]
    }
}

pub fn error_report(sol: &Solution, reference: &Solution) -> Result<ErrorReport, FeError> {
    let mut rep = ErrorReport { l2: [0.0; 9], linf: [0.0; 9] };
    for c in Component::ALL {
        let f = |p: [f64; 2]| reference.eval_extrapolated(c, p);
        rep.l2[c.index()] = error_l2(sol, c, &f)?.value;
        rep.linf[c.index()] = error_linf_nodes(sol, c, &f);
    }
    Ok(rep)
}

/// `integral of u . n` over the boundary edges with `tag`.
pub fn mass_flow(sol: &Solution, tag: u32) -> Result<f64, PostprocError> {
    let mesh = sol.mesh();
    let rule = edge_quadrature(ERROR_QUADRATURE)?;
    let mut total = 0.0;
    let mut found = false;
    for be in mesh.boundary_edges().iter().filter(|e| e.tag == tag) {
        found = true;
        let [a, b] = be.vertices;
        let frame = mesh.edge_frame(a, b, be.cell)?;
        let pts = mesh.cell_points(be.cell);
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = [pa[0] + s[0] * (pb[0] - pa[0]), pa[1] + s[0] * (pb[1] - pa[1])];
            let r = crate::fespace::reference_coords(pts, x);
            let ux = sol.eval_in_cell(Component::Ux, be.cell, r);
            let uy = sol.eval_in_cell(Component::Uy, be.cell, r);
            total += w * frame.length * (ux * frame.n[0] + uy * frame.n[1]);
        }
    }
    if !found {
        return Err(PostprocError::UnknownTag(tag));
    }
    Ok(total)
}

/// `n` equidistant samples of `c` on the segment `p0 -> p1` as
/// `(arc length, value)`. Points outside the mesh are extrapolated.
pub fn line_sample(
    sol: &Solution,
    p0: [f64; 2],
    p1: [f64; 2],
    n: usize,
    c: Component,
) -> Result<Vec<(f64, f64)>, PostprocError> {
    if n < 2 {
        return Err(PostprocError::TooFewSamples(n));
    }
    let len = (p1[0] - p0[0]).hypot(p1[1] - p0[1]);
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let p = [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])];
            (t * len, sol.eval_extrapolated(c, p))
        })
        .collect())
}

/// `(3/2) integral_{-2}^{-1/2} |u_x(0, y)| dy` by the composite trapezoid rule.
pub fn pump_mean_velocity(sol: &Solution, n: usize) -> Result<f64, PostprocError> {
    let samples = line_sample(sol, [0.0, -2.0], [0.0, -0.5], n, Component::Ux)?;
    let integral: f64 = samples.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.abs() + w[1].1.abs())).sum();
    Ok(1.5 * integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub position: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Local extrema of a sampled profile, in order of position. Endpoints are
/// always reported; on a plateau the first sample stands for it.
pub fn extrema(table: &[(f64, f64)]) -> Vec<Extremum> {
    let n = table.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    if n == 1 {
        return vec![Extremum { position: table[0].0, value: table[0].1, kind: ExtremumKind::Max }];
    }
    let mk = |i: usize, kind| Extremum { position: table[i].0, value: table[i].1, kind };
    // Direction of the first non-flat step decides the kind of the start point.
    let first_step = table.windows(2).map(|w| w[1].1 - w[0].1).find(|d| *d != 0.0).unwrap_or(0.0);
    out.push(mk(0, if first_step > 0.0 { ExtremumKind::Min } else { ExtremumKind::Max }));
    let mut last_dir = first_step.signum();
    let mut plateau_start = 0;
    for i in 1..n {
        let d = table[i].1 - table[i - 1].1;
        if d == 0.0 {
            continue;
        }
        let dir = d.signum();
        if dir != last_dir && i - 1 > 0 && plateau_start > 0 {
            let kind = if last_dir > 0.0 { ExtremumKind::Max } else { ExtremumKind::Min };
            out.push(mk(plateau_start, kind));
        }
        last_dir = dir;
        plateau_start = i;
    }
    let last_kind = if last_dir > 0.0 { ExtremumKind::Max } else { ExtremumKind::Min };
    if out.last().is_none_or(|e| e.position != table[n - 1].0) {
        out.push(mk(n - 1, last_kind));
    }
    out
}

/// Extrema of a sampled profile that stand out by at least `min_swing`:
/// each reported extremum differs by `min_swing` or more from the extrema
/// next to it, so ripples smaller than that are skipped. A trailing rise or
/// fall shorter than `min_swing` is not reported.
pub fn significant_extrema(table: &[(f64, f64)], min_swing: f64) -> Vec<Extremum> {
    let mut out = Vec::new();
    if table.is_empty() {
        return out;
    }
    let mk = |i: usize, kind| Extremum { position: table[i].0, value: table[i].1, kind };
    let (mut hi, mut lo) = (0, 0);
    // 0 until the first swing is seen, then +1 while rising, -1 while falling.
    let mut dir = 0;
    for (i, &(_, v)) in table.iter().enumerate().skip(1) {
        match dir {
            0 => {
                if v > table[hi].1 {
                    hi = i;
                }
                if v < table[lo].1 {
                    lo = i;
                }
                if table[hi].1 - table[lo].1 >= min_swing {
                    if hi > lo {
                        out.push(mk(lo, ExtremumKind::Min));
                        dir = 1;
                    } else {
                        out.push(mk(hi, ExtremumKind::Max));
                        dir = -1;
                    }
                }
            }
            1 => {
                if v > table[hi].1 {
                    hi = i;
                } else if table[hi].1 - v >= min_swing {
                    out.push(mk(hi, ExtremumKind::Max));
                    lo = i;
                    dir = -1;
                }
            }
            _ => {
                if v < table[lo].1 {
                    lo = i;
                } else if v - table[lo].1 >= min_swing {
                    out.push(mk(lo, ExtremumKind::Min));
                    hi = i;
                    dir = 1;
                }
            }
        }
    }
    match dir {
        1 => out.push(mk(hi, ExtremumKind::Max)),
        -1 => out.push(mk(lo, ExtremumKind::Min)),
        _ => {}
    }
    out
}
