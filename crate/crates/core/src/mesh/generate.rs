use std::f64::consts::PI;

use super::{Mesh2D, MeshError, Point};

/// Structured rectangle `[0, width] x [0, height]` with alternating diagonals.
///
/// Tags: 1 bottom, 2 right, 3 top, 4 left.
pub fn generate_rectangle(width: f64, height: f64, target_h: f64) -> Result<Mesh2D, MeshError> {
    if !(width > 0.0 && height > 0.0 && target_h > 0.0) {
        return Err(MeshError::InvalidGeometry(format!(
            "rectangle needs positive sizes, got {width} x {height}, h = {target_h}"
        )));
    }
    let nx = (width / target_h).ceil().max(1.0) as usize;
    let ny = (height / target_h).ceil().max(1.0) as usize;
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.push([a, b, c]);
                cells.push([a, c, d]);
            } else {
                cells.push([a, b, d]);
                cells.push([b, c, d]);
            }
        }
    }
    let mut segs = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        segs.push(([id(i, 0), id(i + 1, 0)], 1));
        segs.push(([id(i + 1, ny), id(i, ny)], 3));
    }
    for j in 0..ny {
        segs.push(([id(nx, j), id(nx, j + 1)], 2));
        segs.push(([id(0, j + 1), id(0, j)], 4));
    }
    Mesh2D::new(vertices, cells, &segs)
}

/// Ring between two concentric circles centred at the origin.
///
/// Vertices sit on concentric circles with equal radial spacing; each circle
/// gets enough points that the arc spacing matches the radial one, and
/// neighbouring circles are stitched together. Tag 1 is the inner circle,
/// tag 2 the outer one.
pub fn generate_annulus(r_inner: f64, r_outer: f64, target_h: f64) -> Result<Mesh2D, MeshError> {
    if !(r_inner > 0.0 && r_outer > r_inner && target_h > 0.0) {
        return Err(MeshError::InvalidGeometry(format!(
            "annulus needs 0 < r_inner < r_outer and h > 0, got {r_inner}, {r_outer}, {target_h}"
        )));
    }
    let layers = ((r_outer - r_inner) / target_h).ceil().max(1.0) as usize;
    let dr = (r_outer - r_inner) / layers as f64;

    let mut vertices: Vec<Point> = Vec::new();
    let mut rings: Vec<(usize, usize, f64)> = Vec::new();
    for k in 0..=layers {
        let r = if k == layers { r_outer } else { r_inner + k as f64 * dr };
        let n = ((2.0 * PI * r / dr).ceil() as usize).max(6);
        let offset = if k % 2 == 1 { 0.5 } else { 0.0 };
        let start = vertices.len();
        for i in 0..n {
            let phi = 2.0 * PI * (i as f64 + offset) / n as f64;
            vertices.push([r * phi.cos(), r * phi.sin()]);
        }
        rings.push((start, n, offset));
    }

    let mut cells = Vec::new();
    for k in 0..layers {
        let (sa, na, oa) = rings[k];
        let (sb, nb, ob) = rings[k + 1];
        let a = |i: usize| sa + i % na;
        let b = |j: usize| sb + j % nb;
        // Stitch from the pair of points nearest angle zero; the outer ring may
        // start half a step ahead, so compare normalized angles.
        let (mut i, mut j) = (0usize, 0usize);
        while i < na || j < nb {
            let next_a = (i as f64 + 1.0 + oa) / na as f64;
            let next_b = (j as f64 + 1.0 + ob) / nb as f64;
            if j >= nb || (i < na && next_a <= next_b) {
                cells.push([a(i), a(i + 1), b(j)]);
                i += 1;
            } else {
                cells.push([a(i), b(j + 1), b(j)]);
                j += 1;
            }
        }
    }

    let mut segs = Vec::new();
    let (s0, n0, _) = rings[0];
    for i in 0..n0 {
        segs.push(([s0 + i, s0 + (i + 1) % n0], 1));
    }
    let (s1, n1, _) = rings[layers];
    for i in 0..n1 {
        segs.push(([s1 + i, s1 + (i + 1) % n1], 2));
    }
    Mesh2D::new(vertices, cells, &segs)
}
