//! Lagrange P1 and P2 shape functions on the unit triangle.
//!
//! Node order: the three vertices, then for P2 the midpoints of the local
//! edges (0,1), (1,2), (2,0).

use super::FeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceElement {
    degree: usize,
}

impl ReferenceElement {
    pub fn new(degree: usize) -> Result<Self, FeError> {
        match degree {
            1 | 2 => Ok(ReferenceElement { degree }),
            d => Err(FeError::UnsupportedDegree(d)),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_nodes(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            6
        }
    }

    pub fn nodes(&self) -> &'static [[f64; 2]] {
        const P2: [[f64; 2]; 6] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
        &P2[..self.n_nodes()]
    }

    /// Shape function values at `(xi, eta)`.
    pub fn values(&self, xi: f64, eta: f64, out: &mut [f64]) {
        let l = [1.0 - xi - eta, xi, eta];
        if self.degree == 1 {
            out[..3].copy_from_slice(&l);
        } else {
            for i in 0..3 {
                out[i] = l[i] * (2.0 * l[i] - 1.0);
            }
            out[3] = 4.0 * l[0] * l[1];
            out[4] = 4.0 * l[1] * l[2];
            out[5] = 4.0 * l[2] * l[0];
        }
    }

    /// Reference gradients `(d/dxi, d/deta)` at `(xi, eta)`.
    pub fn gradients(&self, xi: f64, eta: f64, out: &mut [[f64; 2]]) {
        const DL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        if self.degree == 1 {
            out[..3].copy_from_slice(&DL);
            return;
        }
        let l = [1.0 - xi - eta, xi, eta];
        for i in 0..3 {
            let f = 4.0 * l[i] - 1.0;
            out[i] = [f * DL[i][0], f * DL[i][1]];
        }
        for (k, (i, j)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
            out[3 + k] = [
                4.0 * (DL[i][0] * l[j] + l[i] * DL[j][0]),
                4.0 * (DL[i][1] * l[j] + l[i] * DL[j][1]),
            ];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_and_partition_of_unity() {
        for d in [1, 2] {
            let e = ReferenceElement::new(d).unwrap();
            let n = e.n_nodes();
            let mut v = vec![0.0; n];
            for (j, p) in e.nodes().iter().enumerate() {
                e.values(p[0], p[1], &mut v);
                for (i, vi) in v.iter().enumerate() {
                    assert_eq!(*vi, if i == j { 1.0 } else { 0.0 });
                }
            }
            let mut g = vec![[0.0; 2]; n];
            e.values(0.2, 0.3, &mut v);
            e.gradients(0.2, 0.3, &mut g);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!(g.iter().map(|x| x[0]).sum::<f64>().abs() < 1e-14);
            assert!(g.iter().map(|x| x[1]).sum::<f64>().abs() < 1e-14);
        }
        assert!(ReferenceElement::new(3).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let e = ReferenceElement::new(2).unwrap();
        let (x, y, h) = (0.21, 0.37, 1e-6);
        let mut g = [[0.0; 2]; 6];
        e.gradients(x, y, &mut g);
        let (mut a, mut b) = ([0.0; 6], [0.0; 6]);
        e.values(x + h, y, &mut a);
        e.values(x - h, y, &mut b);
        for i in 0..6 {
            assert!(((a[i] - b[i]) / (2.0 * h) - g[i][0]).abs() < 1e-8);
        }
        e.values(x, y + h, &mut a);
        e.values(x, y - h, &mut b);
        for i in 0..6 {
            assert!(((a[i] - b[i]) / (2.0 * h) - g[i][1]).abs() < 1e-8);
        }
    }
}
