//! Symmetric triangle rules up to degree 6 and Gauss-Legendre edge rules.

use super::FeError;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Reference coordinates: `(xi, eta)` on the unit triangle, `[s, 0]` on the
    /// unit edge.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Orbit of barycentric `(a, b, b)` permutations.
fn orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 2]>, wts: &mut Vec<f64>) {
    let b = 0.5 * (1.0 - a);
    for p in [[a, b], [b, a], [b, b]] {
        pts.push(p);
        wts.push(0.5 * w);
    }
}

/// Orbit of barycentric `(a, b, c)` permutations, all distinct.
fn orbit6(a: f64, b: f64, w: f64, pts: &mut Vec<[f64; 2]>, wts: &mut Vec<f64>) {
    let c = 1.0 - a - b;
    for p in [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]] {
        pts.push(p);
        wts.push(0.5 * w);
    }
}

/// Rule on the unit triangle exact for polynomials of total degree `degree`.
pub fn triangle_quadrature(degree: usize) -> Result<QuadratureRule, FeError> {
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    let exact = match degree {
        0 | 1 => {
            pts.push([1.0 / 3.0, 1.0 / 3.0]);
            wts.push(0.5);
            1
        }
        2 => {
            orbit3(2.0 / 3.0, 1.0 / 3.0, &mut pts, &mut wts);
            2
        }
        3 | 4 => {
            orbit3(0.108_103_018_168_070, 0.223_381_589_678_011, &mut pts, &mut wts);
            orbit3(0.816_847_572_980_459, 0.109_951_743_655_322, &mut pts, &mut wts);
            4
        }
        5 => {
            pts.push([1.0 / 3.0, 1.0 / 3.0]);
            wts.push(0.5 * 0.225);
            orbit3(0.059_715_871_789_770, 0.132_394_152_788_506, &mut pts, &mut wts);
            orbit3(0.797_426_985_353_087, 0.125_939_180_544_827, &mut pts, &mut wts);
            5
        }
        6 => {
            orbit3(0.501_426_509_658_179, 0.116_786_275_726_379, &mut pts, &mut wts);
            orbit3(0.873_821_971_016_996, 0.050_844_906_370_207, &mut pts, &mut wts);
            orbit6(
                0.053_145_049_844_817,
                0.310_352_451_033_784,
                0.082_851_075_618_374,
                &mut pts,
                &mut wts,
            );
            6
        }
        d => return Err(FeError::UnsupportedQuadrature(d)),
    };
    Ok(QuadratureRule { points: pts, weights: wts, degree: exact })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss-Legendre rule on `[0, 1]` exact to `degree`.
pub fn edge_quadrature(degree: usize) -> Result<QuadratureRule, FeError> {
    if degree > 19 {
        return Err(FeError::UnsupportedQuadrature(degree));
    }
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    Ok(QuadratureRule {
        points: order.iter().map(|&i| [0.5 * (x[i] + 1.0), 0.0]).collect(),
        weights: order.iter().map(|&i| 0.5 * w[i]).collect(),
        degree: 2 * n - 1,
    })
}
