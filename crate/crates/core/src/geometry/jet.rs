use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Sym, MAX_AMBIENT, MAX_INTRINSIC};
use serde::Serialize;

/// Position and exact chart derivatives up to second order at one chart
/// point. `d1(i)` is the ambient vector `d pos / d x_i`, `d2(i, j)` the
/// ambient vector `d^2 pos / d x_i d x_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    m: usize,
    n: usize,
    x: [f64; MAX_INTRINSIC],
    pos: [f64; MAX_AMBIENT],
    d1: [[f64; MAX_AMBIENT]; MAX_INTRINSIC],
    d2: [[[f64; MAX_AMBIENT]; MAX_INTRINSIC]; MAX_INTRINSIC],
}

fn pad(v: &[f64]) -> [f64; MAX_AMBIENT] {
    let mut out = [0.0; MAX_AMBIENT];
    out[..v.len()].copy_from_slice(v);
    out
}

impl Jet2 {
    /// Jet of a curve at chart parameter `s`.
    pub fn curve(s: f64, pos: &[f64], d1: &[f64], d2: &[f64]) -> Self {
        let n = pos.len();
        debug_assert!(n <= MAX_AMBIENT && d1.len() == n && d2.len() == n);
        let mut jet = Jet2 {
            m: 1,
            n,
            x: [s, 0.0],
            pos: pad(pos),
            d1: [[0.0; MAX_AMBIENT]; MAX_INTRINSIC],
            d2: [[[0.0; MAX_AMBIENT]; MAX_INTRINSIC]; MAX_INTRINSIC],
        };
        jet.d1[0] = pad(d1);
        jet.d2[0][0] = pad(d2);
        jet
    }

    /// Jet of a surface at chart point `x`; `d2 = [xx, xy, yy]`.
    pub fn surface(x: [f64; 2], pos: &[f64], d1: [&[f64]; 2], d2: [&[f64]; 3]) -> Self {
        let n = pos.len();
        debug_assert!(n <= MAX_AMBIENT);
        let mut jet = Jet2 {
            m: 2,
            n,
            x,
            pos: pad(pos),
            d1: [pad(d1[0]), pad(d1[1])],
            d2: [[[0.0; MAX_AMBIENT]; MAX_INTRINSIC]; MAX_INTRINSIC],
        };
        jet.d2[0][0] = pad(d2[0]);
        jet.d2[0][1] = pad(d2[1]);
        jet.d2[1][0] = pad(d2[1]);
        jet.d2[1][1] = pad(d2[2]);
        jet
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> &[f64] {
        &self.x[..self.m]
    }

    pub fn pos(&self) -> &[f64] {
        &self.pos[..self.n]
    }

    pub fn d1(&self, i: usize) -> &[f64] {
        &self.d1[i][..self.n]
    }

    pub fn d2(&self, i: usize, j: usize) -> &[f64] {
        &self.d2[i][j][..self.n]
    }

    pub(crate) fn set_x(&mut self, x: &[f64]) {
        self.x[..self.m].copy_from_slice(x);
    }

    /// Applies the diagonal affine chart change `x = scale * x' + offset`.
    pub(crate) fn rescaled(&self, x_new: &[f64], scale: &[f64]) -> Self {
        let mut out = *self;
        out.set_x(x_new);
        for i in 0..self.m {
            for k in 0..self.n {
                out.d1[i][k] = self.d1[i][k] * scale[i];
            }
            for j in 0..self.m {
                for k in 0..self.n {
                    out.d2[i][j][k] = self.d2[i][j][k] * scale[i] * scale[j];
                }
            }
        }
        out
    }

    /// First fundamental form `g_ij = <d1_i, d1_j>`.
    pub fn metric(&self) -> Sym {
        let mut g = Sym::zeros(self.m);
        for i in 0..self.m {
            for j in i..self.m {
                g.set(i, j, dot(self.d1(i), self.d1(j)));
            }
        }
        g
    }

    /// Second fundamental form in direction `normal`: `h_ij = <normal, d2_ij>`.
    pub fn second_form(&self, normal: &[f64]) -> Sym {
        let mut h = Sym::zeros(self.m);
        for i in 0..self.m {
            for j in i..self.m {
                h.set(i, j, dot(normal, self.d2(i, j)));
            }
        }
        h
    }

    /// Frobenius norm of the first-derivative block.
    pub fn speed(&self) -> f64 {
        (0..self.m).map(|i| dot(self.d1(i), self.d1(i))).sum::<f64>().sqrt()
    }
}

/// Metric and second fundamental form at `jet` for the unit normal `normal`.
pub fn metric_and_form(jet: &Jet2, normal: &[f64]) -> Result<(Sym, Sym)> {
    if normal.len() != jet.n() {
        return Err(Error::InvalidInput(format!(
            "normal has length {}, ambient dimension is {}",
            normal.len(),
            jet.n()
        )));
    }
    let g = jet.metric();
    let smallest = g.eigen().values[0];
    if smallest < 1e-10 {
        return Err(Error::DegenerateMetric(smallest));
    }
    Ok((g, jet.second_form(normal)))
}

/// Orthonormal basis of the normal space at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalFrame {
    #[serde(skip)]
    pub base: Jet2,
    pub vectors: Vec<Vec<f64>>,
}

impl NormalFrame {
    /// The unit normal `cos(angle) e_1 + sin(angle) e_2` (codimension >= 2),
    /// or `e_1` in codimension one.
    pub fn direction(&self, angle: f64) -> Vec<f64> {
        if self.vectors.len() == 1 {
            return self.vectors[0].clone();
        }
        let (s, c) = angle.sin_cos();
        self.vectors[0]
            .iter()
            .zip(&self.vectors[1])
            .map(|(a, b)| c * a + s * b)
            .collect()
    }
}

/// Orthonormalizes the tangent columns, then greedily completes with the
/// ambient coordinate axis of largest residual (lowest index on ties). In
/// codimension one the normal is oriented so that `det[d1 | n] > 0`.
pub fn normal_frame(jet: &Jet2) -> Result<NormalFrame> {
    let (m, n) = (jet.m(), jet.n());
    let smallest = jet.metric().eigen().values[0];
    if smallest < 1e-10 {
        return Err(Error::DegenerateMetric(smallest));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..m {
        let mut v = jet.d1(i).to_vec();
        orthogonalize(&mut v, &basis);
        let len = norm(&v);
        v.iter_mut().for_each(|c| *c /= len);
        basis.push(v);
    }
    let mut normals = Vec::with_capacity(n - m);
    while basis.len() < n {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for axis in 0..n {
            let mut v = vec![0.0; n];
            v[axis] = 1.0;
            orthogonalize(&mut v, &basis);
            let len = norm(&v);
            if best.as_ref().is_none_or(|(l, _)| len > *l + 1e-12) {
                best = Some((len, v));
            }
        }
        let (len, mut v) = best.expect("ambient dimension is positive");
        v.iter_mut().for_each(|c| *c /= len);
        // second pass for accuracy
        orthogonalize(&mut v, &basis);
        let len = norm(&v);
        v.iter_mut().for_each(|c| *c /= len);
        basis.push(v.clone());
        normals.push(v);
    }
    if normals.len() == 1 {
        let mut cols: Vec<&[f64]> = (0..m).map(|i| jet.d1(i)).collect();
        cols.push(&normals[0]);
        if determinant(&cols) < 0.0 {
            normals[0].iter_mut().for_each(|c| *c = -*c);
        }
    }
    Ok(NormalFrame {
        base: *jet,
        vectors: normals,
    })
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

/// Determinant of the square matrix with the given columns (order <= 4).
fn determinant(cols: &[&[f64]]) -> f64 {
    let n = cols.len();
    let mut a: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        if a[pivot][k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_permutation() {
        let c0 = [0.0, 1.0, 0.0];
        let c1 = [1.0, 0.0, 0.0];
        let c2 = [0.0, 0.0, 2.0];
        assert_eq!(determinant(&[&c0, &c1, &c2]), -2.0);
    }

    #[test]
    fn degenerate_tangent_is_rejected() {
        let jet = Jet2::curve(0.0, &[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]);
        assert!(matches!(normal_frame(&jet), Err(Error::DegenerateMetric(_))));
        assert!(matches!(
            metric_and_form(&jet, &[1.0, 0.0]),
            Err(Error::DegenerateMetric(_))
        ));
    }
}
