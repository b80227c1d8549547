use super::CensusKind;
use crate::error::{Error, Result};
use crate::geometry::{ImmersionSpec, Jet2};
use crate::linalg::{dot, norm, Sym};

/// A smooth function on the manifold evaluated through chart jets.
pub(crate) trait Objective: Sync {
    /// Value, chart gradient and chart Hessian.
    fn eval(&self, jet: &Jet2) -> (f64, [f64; 2], Sym);
    /// Natural size of the gradient at `jet`; tolerances are relative to it.
    fn grad_scale(&self, jet: &Jet2) -> f64;
    /// Reference magnitude for the degeneracy margin.
    fn hessian_scale(&self, jet: &Jet2) -> f64;
    fn kind(&self) -> CensusKind;
    fn query(&self) -> &[f64];
}

/// `x -> |pos(x) - y|^2`
pub(crate) struct SquaredDistance {
    pub y: Vec<f64>,
    pub length: f64,
}

impl Objective for SquaredDistance {
    fn eval(&self, jet: &Jet2) -> (f64, [f64; 2], Sym) {
        let m = jet.m();
        let r: Vec<f64> = jet.pos().iter().zip(&self.y).map(|(p, y)| p - y).collect();
        let mut grad = [0.0; 2];
        let mut hess = Sym::zeros(m);
        for i in 0..m {
            grad[i] = 2.0 * dot(jet.d1(i), &r);
            for j in i..m {
                hess.set(i, j, 2.0 * (dot(jet.d1(i), jet.d1(j)) + dot(jet.d2(i, j), &r)));
            }
        }
        (dot(&r, &r), grad, hess)
    }

    fn grad_scale(&self, jet: &Jet2) -> f64 {
        let dist = crate::linalg::distance(jet.pos(), &self.y);
        2.0 * jet.speed() * (dist + self.length)
    }

    fn hessian_scale(&self, jet: &Jet2) -> f64 {
        2.0 * jet.metric().eigen().max_abs()
    }

    fn kind(&self) -> CensusKind {
        CensusKind::Distance
    }

    fn query(&self) -> &[f64] {
        &self.y
    }
}

/// `x -> <pos(x), dir>`
pub(crate) struct Height {
    pub dir: Vec<f64>,
    pub length: f64,
}

impl Objective for Height {
    fn eval(&self, jet: &Jet2) -> (f64, [f64; 2], Sym) {
        let m = jet.m();
        let mut grad = [0.0; 2];
        for (i, g) in grad.iter_mut().enumerate().take(m) {
            *g = dot(jet.d1(i), &self.dir);
        }
        (dot(jet.pos(), &self.dir), grad, jet.second_form(&self.dir))
    }

    fn grad_scale(&self, jet: &Jet2) -> f64 {
        jet.speed()
    }

    fn hessian_scale(&self, jet: &Jet2) -> f64 {
        jet.metric().eigen().max_abs() / self.length
    }

    fn kind(&self) -> CensusKind {
        CensusKind::Height
    }

    fn query(&self) -> &[f64] {
        &self.dir
    }
}

/// Value, gradient and Hessian of the squared distance in the primary chart.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceJet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Sym,
}

/// `d_y` at primary-chart point `x`:
/// `grad_i = 2 <d1_i, pos - y>`, `hess_ij = 2 (<d1_i, d1_j> + <d2_ij, pos - y>)`.
pub fn sq_dist_jet(spec: &ImmersionSpec, x: &[f64], y: &[f64]) -> Result<DistanceJet> {
    if y.len() != spec.n() {
        return Err(Error::InvalidInput(format!(
            "query point has dimension {}, ambient dimension is {}",
            y.len(),
            spec.n()
        )));
    }
    let jet = spec.jet(x)?;
    let obj = SquaredDistance {
        y: y.to_vec(),
        length: spec.diameter(),
    };
    let (value, grad, hessian) = obj.eval(&jet);
    Ok(DistanceJet {
        value,
        gradient: grad[..spec.m()].to_vec(),
        hessian,
    })
}

pub(crate) fn unit_direction(spec: &ImmersionSpec, dir: &[f64]) -> Result<Vec<f64>> {
    if dir.len() != spec.n() {
        return Err(Error::InvalidInput(format!(
            "direction has dimension {}, ambient dimension is {}",
            dir.len(),
            spec.n()
        )));
    }
    let len = norm(dir);
    if (len - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("direction must be unit length, |n| = {len}")));
    }
    Ok(dir.to_vec())
}
