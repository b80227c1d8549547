//! Small dense linear algebra for intrinsic dimension at most two.
//!
//! Chart Hessians, metrics and second fundamental forms are `m x m` with
//! `m <= 2`; everything here is closed form.

/// Largest supported ambient dimension.
pub const MAX_AMBIENT: usize = 4;
/// Largest supported intrinsic dimension.
pub const MAX_INTRINSIC: usize = 2;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Symmetric matrix of order 1 or 2. Entries outside the leading
/// `dim x dim` block are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym {
    pub dim: usize,
    pub a: [[f64; 2]; 2],
}

/// Eigen decomposition of a [`Sym`]; eigenvalues ascending, eigenvectors as
/// columns `vectors[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub dim: usize,
    pub values: [f64; 2],
    pub vectors: [[f64; 2]; 2],
}

impl Sym {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "unsupported order {dim}");
        Sym {
            dim,
            a: [[0.0; 2]; 2],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
        self.a[j][i] = v;
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.a.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// `self - t * other`
    pub fn minus_scaled(&self, t: f64, other: &Sym) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.a[i][j] -= t * other.a[i][j];
            }
        }
        out
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.a[0][0],
            _ => self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0],
        }
    }

    /// Frobenius norm of the leading block.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.a[i][j] * self.a[i][j];
            }
        }
        s.sqrt()
    }

    /// Quadratic form `v^T A v`.
    pub fn quad(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += v[i] * self.a[i][j] * v[j];
            }
        }
        s
    }

    pub fn eigen(&self) -> SymEigen {
        if self.dim == 1 {
            return SymEigen {
                dim: 1,
                values: [self.a[0][0], 0.0],
                vectors: [[1.0, 0.0], [0.0, 1.0]],
            };
        }
        let (a, b, c) = (self.a[0][0], 0.5 * (self.a[0][1] + self.a[1][0]), self.a[1][1]);
        let mean = 0.5 * (a + c);
        let half_diff = 0.5 * (a - c);
        let r = half_diff.hypot(b);
        if r == 0.0 {
            return SymEigen {
                dim: 2,
                values: [a, c],
                vectors: [[1.0, 0.0], [0.0, 1.0]],
            };
        }
        // (cos phi, sin phi) belongs to the larger eigenvalue.
        let phi = 0.5 * (2.0 * b).atan2(a - c);
        let (s, co) = phi.sin_cos();
        let det = a * c - b * b;
        // The larger-magnitude root is computed directly, the other one from
        // the determinant to avoid cancellation.
        let (lo, hi) = if mean >= 0.0 {
            let big = mean + r;
            (det / big, big)
        } else {
            let big = mean - r;
            (big, det / big)
        };
        SymEigen {
            dim: 2,
            values: [lo, hi],
            vectors: [[-s, co], [co, s]],
        }
    }
}

impl SymEigen {
    pub fn values(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k][..self.dim]
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_abs(&self) -> f64 {
        self.values().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// Index of the eigenvalue of smallest magnitude.
    pub fn kernel_index(&self) -> usize {
        (0..self.dim)
            .min_by(|&i, &j| self.values[i].abs().total_cmp(&self.values[j].abs()))
            .unwrap_or(0)
    }

    /// Number of negative eigenvalues.
    pub fn negative_count(&self) -> usize {
        self.values().iter().filter(|v| **v < 0.0).count()
    }

    /// Pseudo-inverse applied to `rhs`, dropping eigen-directions whose
    /// eigenvalue is below `cutoff` in magnitude.
    pub fn pinv_apply(&self, rhs: &[f64], cutoff: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for k in 0..self.dim {
            let lambda = self.values[k];
            if lambda.abs() <= cutoff {
                continue;
            }
            let v = self.vector(k);
            let coeff = dot(v, &rhs[..self.dim]) / lambda;
            for i in 0..self.dim {
                out[i] += coeff * v[i];
            }
        }
        out
    }
}

/// Generalized symmetric eigenproblem `h v = kappa g v` with `g` positive
/// definite. Returns eigenvalues ascending and `g`-orthonormal eigenvectors.
///
/// Reduces to a standard problem through the Cholesky factor of `g`, which
/// keeps the result symmetric.
pub fn generalized_eigen(h: &Sym, g: &Sym) -> Option<SymEigen> {
    match g.dim {
        1 => {
            let g00 = g.a[0][0];
            if g00 <= 0.0 {
                return None;
            }
            Some(SymEigen {
                dim: 1,
                values: [h.a[0][0] / g00, 0.0],
                vectors: [[1.0 / g00.sqrt(), 0.0], [0.0, 1.0]],
            })
        }
        _ => {
            let l11 = g.a[0][0].sqrt();
            if !(l11 > 0.0) {
                return None;
            }
            let l21 = g.a[1][0] / l11;
            let l22sq = g.a[1][1] - l21 * l21;
            if !(l22sq > 0.0) {
                return None;
            }
            let l22 = l22sq.sqrt();
            // A = L^-1 h L^-T
            let inv = [[1.0 / l11, 0.0], [-l21 / (l11 * l22), 1.0 / l22]];
            let mut a = Sym::zeros(2);
            for i in 0..2 {
                for j in i..2 {
                    let mut s = 0.0;
                    for k in 0..2 {
                        for l in 0..2 {
                            s += inv[i][k] * h.a[k][l] * inv[j][l];
                        }
                    }
                    a.set(i, j, s);
                }
            }
            let eig = a.eigen();
            // v = L^-T w
            let mut vectors = [[0.0; 2]; 2];
            for (k, w) in eig.vectors.iter().enumerate() {
                vectors[k] = [inv[0][0] * w[0] + inv[1][0] * w[1], inv[1][1] * w[1]];
            }
            Some(SymEigen {
                dim: 2,
                values: eig.values,
                vectors,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym2(a: f64, b: f64, c: f64) -> Sym {
        let mut s = Sym::zeros(2);
        s.set(0, 0, a);
        s.set(0, 1, b);
        s.set(1, 1, c);
        s
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        for &(a, b, c) in &[(2.0, 1.0, 3.0), (1.0, 0.0, -4.0), (5.0, -2.0, 5.0), (1e-9, 3.0, 1e-9)] {
            let m = sym2(a, b, c);
            let e = m.eigen();
            assert!(e.values[0] <= e.values[1]);
            for k in 0..2 {
                let v = e.vector(k);
                let av = [a * v[0] + b * v[1], b * v[0] + c * v[1]];
                assert!((av[0] - e.values[k] * v[0]).abs() < 1e-12 * (1.0 + e.max_abs()));
                assert!((av[1] - e.values[k] * v[1]).abs() < 1e-12 * (1.0 + e.max_abs()));
            }
        }
    }

    #[test]
    fn small_eigenvalue_keeps_relative_accuracy() {
        // eigenvalues 1e8 and 1e-8
        let m = sym2(1e8, 0.0, 1e-8);
        let rotated = {
            let (s, c) = 0.3_f64.sin_cos();
            let r = [[c, -s], [s, c]];
            let d = [1e8, 1e-8];
            let mut out = Sym::zeros(2);
            for i in 0..2 {
                for j in i..2 {
                    out.set(i, j, r[i][0] * d[0] * r[j][0] + r[i][1] * d[1] * r[j][1]);
                }
            }
            out
        };
        assert!((m.eigen().values[0] - 1e-8).abs() < 1e-20);
        let e = rotated.eigen();
        assert!((e.values[1] - 1e8).abs() < 1e-6);
    }

    #[test]
    fn generalized_eigen_matches_det_roots() {
        let g = sym2(4.0, 1.0, 2.0);
        let h = sym2(1.0, 0.5, -3.0);
        let e = generalized_eigen(&h, &g).unwrap();
        for k in 0..2 {
            let kappa = e.values[k];
            assert!(h.minus_scaled(kappa, &g).det().abs() < 1e-12);
            // g-orthonormal
            let v = e.vector(k);
            assert!((g.quad(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pinv_drops_null_directions() {
        let m = sym2(2.0, 0.0, 0.0);
        let x = m.eigen().pinv_apply(&[4.0, 7.0], 1e-12);
        assert_eq!(x, [2.0, 0.0]);
    }
}
