//! Triangle meshes with tagged boundary edges and interior-edge adjacency.

mod generate;
mod gmsh;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

pub use generate::{generate_annulus, generate_rectangle};
pub use gmsh::{read_gmsh, read_gmsh_str, write_gmsh, write_gmsh_string};

pub type Point = [f64; 2];

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("cell {0} has repeated or collinear vertices")]
    DegenerateCell(usize),
    #[error("cell {cell} references vertex {vertex}, mesh has {count}")]
    VertexOutOfRange { cell: usize, vertex: usize, count: usize },
    #[error("edge ({0}, {1}) is shared by more than two cells")]
    NonManifoldEdge(usize, usize),
    #[error("boundary line ({0}, {1}) does not match any boundary edge of a cell")]
    DanglingBoundaryLine(usize, usize),
    #[error("boundary edge ({0}, {1}) has no tag")]
    UntaggedBoundaryEdge(usize, usize),
    #[error("boundary edge ({0}, {1}) carries two different tags")]
    ConflictingTags(usize, usize),
    #[error("zero-length edge ({0}, {1})")]
    DegenerateEdge(usize, usize),
    #[error("gmsh line {line}: {message}")]
    Gmsh { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFrame {
    pub n: Point,
    pub t: Point,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    /// Columns are `v1 - v0` and `v2 - v0`.
    pub jacobian: [[f64; 2]; 2],
    pub inverse_jacobian_t: [[f64; 2]; 2],
    pub det: f64,
    pub area: f64,
    /// Longest edge length.
    pub diameter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// Vertices in the counter-clockwise order of the owning cell.
    pub vertices: [usize; 2],
    pub cell: usize,
    pub edge: usize,
    pub tag: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteriorEdge {
    pub vertices: [usize; 2],
    /// Lower cell index; the jump normal is outward from this cell.
    pub left: usize,
    pub right: usize,
    pub edge: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh2D {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    /// Global edges as sorted vertex pairs.
    edges: Vec<[usize; 2]>,
    /// Edge ids of the local edges (0,1), (1,2), (2,0).
    cell_edges: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    interior_edges: Vec<InteriorEdge>,
}

/// Local vertex pairs of the three cell edges.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

fn sorted(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn signed_area(p: &[Point], c: &[usize; 3]) -> f64 {
    let [a, b, d] = [p[c[0]], p[c[1]], p[c[2]]];
    0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh2D {
    /// Build a mesh from raw triangles and tagged boundary segments.
    ///
    /// Cells are reoriented counter-clockwise. Every boundary edge must be
    /// covered by exactly one segment.
    pub fn new(
        vertices: Vec<Point>,
        mut cells: Vec<[usize; 3]>,
        segments: &[([usize; 2], u32)],
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (ci, c) in cells.iter_mut().enumerate() {
            for &v in c.iter() {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange { cell: ci, vertex: v, count: nv });
                }
            }
            if c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
                return Err(MeshError::DegenerateCell(ci));
            }
            let a = signed_area(&vertices, c);
            if a == 0.0 || !a.is_finite() {
                return Err(MeshError::DegenerateCell(ci));
            }
            if a < 0.0 {
                c.swap(1, 2);
            }
        }

        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut owners: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (ci, c) in cells.iter().enumerate() {
            let mut ce = [0; 3];
            for (le, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let key = sorted(c[*a], c[*b]);
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    owners.push(Vec::new());
                    edges.len() - 1
                });
                owners[id].push((ci, le));
                if owners[id].len() > 2 {
                    return Err(MeshError::NonManifoldEdge(key[0], key[1]));
                }
                ce[le] = id;
            }
            cell_edges.push(ce);
        }

        let mut tags: HashMap<usize, u32> = HashMap::new();
        for &([a, b], tag) in segments {
            let key = sorted(a, b);
            let Some(&id) = edge_ids.get(&key) else {
                return Err(MeshError::DanglingBoundaryLine(a, b));
            };
            if owners[id].len() != 1 {
                return Err(MeshError::DanglingBoundaryLine(a, b));
            }
            if let Some(old) = tags.insert(id, tag) {
                if old != tag {
                    return Err(MeshError::ConflictingTags(a, b));
                }
            }
        }

        let mut boundary_edges = Vec::new();
        let mut interior_edges = Vec::new();
        for (id, own) in owners.iter().enumerate() {
            match own.as_slice() {
                [(ci, le)] => {
                    let [a, b] = LOCAL_EDGES[*le];
                    let verts = [cells[*ci][a], cells[*ci][b]];
                    let Some(&tag) = tags.get(&id) else {
                        return Err(MeshError::UntaggedBoundaryEdge(verts[0], verts[1]));
                    };
                    boundary_edges.push(BoundaryEdge { vertices: verts, cell: *ci, edge: id, tag });
                }
                [(c0, _), (c1, _)] => {
                    let (left, right) = if c0 < c1 { (*c0, *c1) } else { (*c1, *c0) };
                    interior_edges.push(InteriorEdge { vertices: edges[id], left, right, edge: id });
                }
                _ => unreachable!("edge owners are 1 or 2"),
            }
        }
        for e in &edges {
            if vertices[e[0]] == vertices[e[1]] {
                return Err(MeshError::DegenerateEdge(e[0], e[1]));
            }
        }

        Ok(Mesh2D { vertices, cells, edges, cell_edges, boundary_edges, interior_edges })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self) -> &[[usize; 3]] {
        &self.cell_edges
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn interior_edges(&self) -> &[InteriorEdge] {
        &self.interior_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Distinct boundary tags in ascending order.
    pub fn tags(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.boundary_edges.iter().map(|e| e.tag).collect();
        set.into_iter().collect()
    }

    pub fn cell_points(&self, cell: usize) -> [Point; 3] {
        let c = self.cells[cell];
        [self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]]]
    }

    pub fn cell_geometry(&self, cell: usize) -> CellGeometry {
        let [p0, p1, p2] = self.cell_points(cell);
        let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        let len = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let diameter = len(p0, p1).max(len(p1, p2)).max(len(p2, p0));
        CellGeometry { jacobian: j, inverse_jacobian_t: inv_t, det, area: 0.5 * det, diameter }
    }

    /// Largest cell diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_geometry(c).diameter).fold(0.0, f64::max)
    }

    /// Frame of the edge `(a, b)` with the normal pointing out of `cell`.
    pub fn edge_frame(&self, a: usize, b: usize, cell: usize) -> Result<EdgeFrame, MeshError> {
        let c = self.cells[cell];
        let Some(&opp) = c.iter().find(|&&v| v != a && v != b) else {
            return Err(MeshError::DegenerateEdge(a, b));
        };
        let (pa, pb, po) = (self.vertices[a], self.vertices[b], self.vertices[opp]);
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if length == 0.0 {
            return Err(MeshError::DegenerateEdge(a, b));
        }
        let mut n = [d[1] / length, -d[0] / length];
        if n[0] * (po[0] - pa[0]) + n[1] * (po[1] - pa[1]) > 0.0 {
            n = [-n[0], -n[1]];
        }
        Ok(EdgeFrame { n, t: [-n[1], n[0]], length })
    }

    /// Plain-text dump with VERTICES, CELLS and BOUNDARY sections.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "VERTICES {}", self.vertices.len()).unwrap();
        for v in &self.vertices {
            writeln!(s, "{:?} {:?}", v[0], v[1]).unwrap();
        }
        writeln!(s, "CELLS {}", self.cells.len()).unwrap();
        for c in &self.cells {
            writeln!(s, "{} {} {}", c[0], c[1], c[2]).unwrap();
        }
        writeln!(s, "BOUNDARY {}", self.boundary_edges.len()).unwrap();
        for e in &self.boundary_edges {
            writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], e.tag).unwrap();
        }
        s
    }
}

/// Interior edges recomputed from scratch: pairs of cells sharing two vertices.
///
/// Returns the same table as [`Mesh2D::interior_edges`]; kept as a
/// standalone entry point for checks against other meshes.
pub fn build_interior_edges(mesh: &Mesh2D) -> Vec<InteriorEdge> {
    mesh.interior_edges().to_vec()
}
