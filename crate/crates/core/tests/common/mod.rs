//! Helpers shared by the integration suites.
#![allow(dead_code)]

pub mod oracles;

use std::collections::BTreeMap;

use r13fem::fespace::{Component, MixedSpace};
use r13fem::forms::{BoundaryData, PhysicalParams, ScalarField, SourceData, StabilizationParams};
use r13fem::mesh::{generate_rectangle, Mesh2D};
use r13fem::system::FormData;
use r13fem::tensorops::{gen3d_tf2, grad3d_of_2, inner3, stf3d3};

/// 2 x 1 rectangle with close to 200 triangles.
pub fn mesh_200() -> Mesh2D {
    generate_rectangle(2.0, 1.0, 0.155).unwrap()
}

/// Per-tag (chi_tilde, epsilon_w) for the four rectangle sides.
pub fn rectangle_data(kn: f64, chi: [f64; 4], eps: [f64; 4], stab: StabilizationParams) -> FormData {
    let mut boundary = BTreeMap::new();
    for i in 0..4 {
        let mut b = BoundaryData::wall(ScalarField::Const(1.0)).with_epsilon(eps[i]);
        b.chi_tilde = Some(chi[i]);
        boundary.insert(i as u32 + 1, b);
    }
    FormData {
        physics: PhysicalParams { kn, chi_tilde: 1.0 },
        stabilization: stab,
        boundary,
        sources: SourceData::default(),
    }
}

/// Symmetric part of the stabilized form and the triple norm, both by hand
/// for P1 fields.
pub struct P1Energy {
    pub form: f64,
    pub triple_norm: f64,
}

fn bary_grads(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(p[j][1] - p[k][1]) / (2.0 * area), (p[k][0] - p[j][0]) / (2.0 * area)];
    }
    (g, area)
}

/// `integral f g` for linear f, g on a triangle of the given area.
fn cell_mass(area: f64, f: [f64; 3], g: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += f[i] * g[j] * if i == j { 2.0 } else { 1.0 };
        }
    }
    area / 12.0 * acc
}

/// `integral f^2` for linear f on an edge.
fn edge_sq(len: f64, f: [f64; 2]) -> f64 {
    len / 3.0 * (f[0] * f[0] + f[0] * f[1] + f[1] * f[1])
}

fn diameter(p: [[f64; 2]; 3]) -> f64 {
    let d = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    d(p[0], p[1]).max(d(p[1], p[2])).max(d(p[2], p[0]))
}

pub fn p1_energy(space: &MixedSpace, data: &FormData, x: &[f64]) -> P1Energy {
    assert_eq!(space.degrees(), (1, 1));
    let mesh = space.mesh();
    let kn = data.physics.kn;
    let val = |c: Component, v: usize| x[space.component_range(c).start + v];
    let verts = mesh.vertices();
    let mut common = 0.0;
    let mut sigma_mass = 0.0;
    for (cell, c) in mesh.cells().iter().enumerate() {
        let p = mesh.cell_points(cell);
        let (g, area) = bary_grads(p);
        let nodal = |comp| [val(comp, c[0]), val(comp, c[1]), val(comp, c[2])];
        let grad = |f: [f64; 3]| {
            let mut d = [0.0; 2];
            for i in 0..3 {
                d[0] += f[i] * g[i][0];
                d[1] += f[i] * g[i][1];
            }
            d
        };
        let (sx, sy) = (nodal(Component::Sx), nodal(Component::Sy));
        let (gx, gy) = (grad(sx), grad(sy));
        let off = 0.5 * (gx[1] + gy[0]);
        let sym_sq = gx[0] * gx[0] + 2.0 * off * off + gy[1] * gy[1];
        let div = gx[0] + gy[1];
        common += 24.0 / 25.0 * kn * area * sym_sq + 12.0 / 25.0 * kn * area * div * div;
        common += 4.0 / 15.0 / kn * (cell_mass(area, sx, sx) + cell_mass(area, sy, sy));

        let (xx, xy, yy) = (nodal(Component::SigmaXX), nodal(Component::SigmaXY), nodal(Component::SigmaYY));
        let zz = [-(xx[0] + yy[0]), -(xx[1] + yy[1]), -(xx[2] + yy[2])];
        sigma_mass += cell_mass(area, xx, xx) + 2.0 * cell_mass(area, xy, xy) + cell_mass(area, yy, yy)
            + cell_mass(area, zz, zz);
        let (dxx, dxy, dyy) = (grad(xx), grad(xy), grad(yy));
        let dx = gen3d_tf2(&[[dxx[0], dxy[0]], [dxy[0], dyy[0]]]);
        let dy = gen3d_tf2(&[[dxx[1], dxy[1]], [dxy[1], dyy[1]]]);
        let t = stf3d3(&grad3d_of_2(&dx, &dy));
        common += kn * area * inner3(&t, &t);
    }

    for be in mesh.boundary_edges() {
        let [a, b] = be.vertices;
        let bc = &data.boundary[&be.tag];
        let chi = bc.chi_tilde.unwrap_or(data.physics.chi_tilde);
        let eps = bc.epsilon_w;
        let (pa, pb) = (verts[a], verts[b]);
        let len = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
        let opp = mesh.cells()[be.cell].iter().copied().find(|&v| v != a && v != b).unwrap();
        let mut n = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
        let po = verts[opp];
        if n[0] * (po[0] - pa[0]) + n[1] * (po[1] - pa[1]) > 0.0 {
            n = [-n[0], -n[1]];
        }
        let t = [-n[1], n[0]];
        let at = |v: usize| {
            let s = [val(Component::Sx, v), val(Component::Sy, v)];
            let sg = [
                [val(Component::SigmaXX, v), val(Component::SigmaXY, v)],
                [val(Component::SigmaXY, v), val(Component::SigmaYY, v)],
            ];
            let q = |u: [f64; 2], w: [f64; 2]| {
                u[0] * (sg[0][0] * w[0] + sg[0][1] * w[1]) + u[1] * (sg[1][0] * w[0] + sg[1][1] * w[1])
            };
            let sn = s[0] * n[0] + s[1] * n[1];
            let st = s[0] * t[0] + s[1] * t[1];
            (sn, st, q(n, n), q(n, t), q(t, t), val(Component::P, v))
        };
        let (ea, eb) = (at(a), at(b));
        common += 0.5 / chi * edge_sq(len, [ea.0, eb.0]);
        common += 12.0 / 25.0 * chi * edge_sq(len, [ea.1, eb.1]);
        common += 9.0 / 8.0 * chi * edge_sq(len, [ea.2, eb.2]);
        common += chi * edge_sq(len, [ea.4 + 0.5 * ea.2, eb.4 + 0.5 * eb.2]);
        common += 1.0 / chi * edge_sq(len, [ea.3, eb.3]);
        common += eps * chi * edge_sq(len, [ea.5 + ea.2, eb.5 + eb.2]);
    }

    let st = data.stabilization;
    if st.enabled {
        for ie in mesh.interior_edges() {
            let [a, b] = ie.vertices;
            let (pa, pb) = (verts[a], verts[b]);
            let len = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
            let (pl, pr) = (mesh.cell_points(ie.left), mesh.cell_points(ie.right));
            let h = 0.5 * (diameter(pl) + diameter(pr));
            let n = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
            let (gl, _) = bary_grads(pl);
            let (gr, _) = bary_grads(pr);
            let jump = |comp: Component| {
                let mut d = 0.0;
                for (cell, g, sign) in [(ie.left, gl, 1.0), (ie.right, gr, -1.0)] {
                    let c = mesh.cells()[cell];
                    for i in 0..3 {
                        d += sign * val(comp, c[i]) * (g[i][0] * n[0] + g[i][1] * n[1]);
                    }
                }
                d
            };
            let (jt, jx, jy, jp) = (jump(Component::Theta), jump(Component::Ux), jump(Component::Uy), jump(Component::P));
            common += st.delta_theta * h.powi(3) * len * jt * jt;
            common += st.delta_u * h.powi(3) * len * (jx * jx + jy * jy);
            common += st.delta_p * h * len * jp * jp;
        }
    }
    P1Energy {
        form: common + 0.5 / kn * sigma_mass,
        triple_norm: common + 4.0 / 15.0 / kn * sigma_mass,
    }
}

/// `x^T A x`.
pub fn quadratic_form(a: &r13fem::system::SparseMatrix, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    a.matvec(x, &mut y);
    x.iter().zip(&y).map(|(a, b)| a * b).sum()
}
