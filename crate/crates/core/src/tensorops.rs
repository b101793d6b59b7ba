//! Symmetric trace-free tensor calculus on small dense arrays.
//!
//! Planar fields are lifted to three dimensions before any trace-free
//! projection, so traces are always taken with d = 3. Rank-3 tensors are
//! stored densely as `[[[f64; 3]; 3]; 3]`.

pub type Tensor2 = [[f64; 2]; 2];
pub type Tensor3x3 = [[f64; 3]; 3];
pub type Tensor3 = [[[f64; 3]; 3]; 3];

pub const ZERO3: Tensor3 = [[[0.0; 3]; 3]; 3];

/// Symmetric part minus a third of the trace times the 2x2 identity.
///
/// This is the in-plane block of the 3D trace-free part of the zero-padded
/// lift of `a`.
pub fn stf3d2(a: &Tensor2) -> Tensor2 {
    let tr = (a[0][0] + a[1][1]) / 3.0;
    let off = 0.5 * (a[0][1] + a[1][0]);
    [[a[0][0] - tr, off], [off, a[1][1] - tr]]
}

/// Embed a planar tensor in 3D with zz = -(xx + yy), giving a trace-free result.
pub fn gen3d_tf2(a: &Tensor2) -> Tensor3x3 {
    [
        [a[0][0], a[0][1], 0.0],
        [a[1][0], a[1][1], 0.0],
        [0.0, 0.0, -a[0][0] - a[1][1]],
    ]
}

/// Gradient of a lifted tensor field from its x and y derivatives.
///
/// Convention: `g[i][j][k] = d_k A_ij`, the derivative index is last and the
/// z slab (`k = 2`) is zero.
pub fn grad3d_of_2(dx: &Tensor3x3, dy: &Tensor3x3) -> Tensor3 {
    let mut g = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            g[i][j][0] = dx[i][j];
            g[i][j][1] = dy[i][j];
        }
    }
    g
}

/// Average over all six index transpositions.
pub fn sym3d3(b: &Tensor3) -> Tensor3 {
    let mut s = ZERO3;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                s[i][j][k] = (b[i][j][k] + b[i][k][j] + b[j][i][k] + b[j][k][i] + b[k][i][j]
                    + b[k][j][i])
                    / 6.0;
            }
        }
    }
    s
}

/// Symmetric trace-free part of a rank-3 tensor.
pub fn stf3d3(b: &Tensor3) -> Tensor3 {
    let s = sym3d3(b);
    // For a symmetric tensor the three traces coincide up to index placement.
    let mut tr = [0.0; 3];
    for (i, t) in tr.iter_mut().enumerate() {
        *t = (0..3).map(|l| s[i][l][l]).sum();
    }
    let mut out = s;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut corr = 0.0;
                if j == k {
                    corr += tr[i];
                }
                if i == k {
                    corr += tr[j];
                }
                if i == j {
                    corr += tr[k];
                }
                out[i][j][k] -= corr / 5.0;
            }
        }
    }
    out
}

pub fn inner2(a: &Tensor3x3, b: &Tensor3x3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += a[i][j] * b[i][j];
        }
    }
    acc
}

pub fn inner3(a: &Tensor3, b: &Tensor3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                acc += a[i][j][k] * b[i][j][k];
            }
        }
    }
    acc
}

pub fn sym2(a: &Tensor2) -> Tensor2 {
    let off = 0.5 * (a[0][1] + a[1][0]);
    [[a[0][0], off], [off, a[1][1]]]
}

pub fn skew2(a: &Tensor2) -> Tensor2 {
    let off = 0.5 * (a[0][1] - a[1][0]);
    [[0.0, off], [-off, 0.0]]
}

pub fn inner2d(a: &Tensor2, b: &Tensor2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}
