use crate::fespace::reference_coords;
use crate::mesh::Mesh2D;

/// Uniform bucket grid over the mesh bounding box.
#[derive(Debug, Clone)]
pub struct PointLocator {
    origin: [f64; 2],
    cell_size: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

const INSIDE_TOL: f64 = 1e-12;

fn min_barycentric(r: [f64; 2]) -> f64 {
    r[0].min(r[1]).min(1.0 - r[0] - r[1])
}

impl PointLocator {
    pub fn new(mesh: &Mesh2D) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in mesh.vertices() {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let side = (mesh.n_cells() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let cell_size = [
            ((hi[0] - lo[0]) / side as f64).max(f64::MIN_POSITIVE),
            ((hi[1] - lo[1]) / side as f64).max(f64::MIN_POSITIVE),
        ];
        let mut loc = PointLocator { origin: lo, cell_size, dims, buckets: vec![Vec::new(); side * side] };
        for c in 0..mesh.n_cells() {
            let p = mesh.cell_points(c);
            let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for q in p {
                for k in 0..2 {
                    a[k] = a[k].min(q[k]);
                    b[k] = b[k].max(q[k]);
                }
            }
            let (i0, j0) = loc.bucket(a);
            let (i1, j1) = loc.bucket(b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * dims[0] + i].push(c as u32);
                }
            }
        }
        loc
    }

    fn bucket(&self, p: [f64; 2]) -> (usize, usize) {
        let f = |k: usize| {
            let t = ((p[k] - self.origin[k]) / self.cell_size[k]).floor();
            (t.max(0.0) as usize).min(self.dims[k] - 1)
        };
        (f(0), f(1))
    }

    /// Cell containing `p` and its reference coordinates.
    pub fn locate(&self, mesh: &Mesh2D, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let (i, j) = self.bucket(p);
        let mut best: Option<(usize, [f64; 2], f64)> = None;
        for &c in &self.buckets[j * self.dims[0] + i] {
            let r = reference_coords(mesh.cell_points(c as usize), p);
            let m = min_barycentric(r);
            if m >= -INSIDE_TOL && best.is_none_or(|b| m > b.2) {
                best = Some((c as usize, r, m));
            }
        }
        best.map(|(c, r, _)| (c, r))
    }

    /// Like [`locate`](Self::locate), but points outside the mesh are
    /// assigned to the cell they are least outside of, evaluated by
    /// extrapolation of that cell's polynomial.
    pub fn locate_or_nearest(&self, mesh: &Mesh2D, p: [f64; 2]) -> (usize, [f64; 2]) {
        if let Some(hit) = self.locate(mesh, p) {
            return hit;
        }
        let mut best = (0, [0.0; 2], f64::NEG_INFINITY);
        for c in 0..mesh.n_cells() {
            let pts = mesh.cell_points(c);
            let r = reference_coords(pts, p);
            // Scale by the cell size so large cells do not win by default.
            let m = min_barycentric(r) * mesh.cell_geometry(c).diameter;
            if m > best.2 {
                best = (c, r, m);
            }
        }
        (best.0, best.1)
    }
}
