//! Focal points on normal lines.
//!
//! On the line `y(t) = p + t n` the Hessian of `d_y^2` at `p` is
//! `2 (g - t h(n))`, so `p` is degenerate exactly where `t = 1/kappa` for a
//! generalized eigenvalue `kappa` of `(h, g)`. Eigenvalue zero puts the focal
//! point at infinity.

mod regularity;

pub use regularity::{regularity, ConditionReport, RegularityCertificate, Verdict};
pub(crate) use regularity::{certify, static_conditions};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::geometry::{chart_grid, metric_and_form, normal_frame, ImmersionSpec, Jet2};
use crate::linalg::{dot, generalized_eigen, norm};
use serde::Serialize;
use std::f64::consts::PI;

/// Relative gap below which generalized eigenvalues count as one focal point.
pub const CLUSTER_TOL: f64 = 1e-7;

/// Compactified line parameter in `[0, pi)`: `t = tan(u)`, `u = pi/2` is the
/// point at infinity and `u` in `(pi/2, pi)` is the negative half-line.
pub fn u_of_t(t: f64) -> f64 {
    if t.is_infinite() {
        return PI / 2.0;
    }
    t.atan().rem_euclid(PI)
}

pub fn t_of_u(u: f64) -> f64 {
    let u = u.rem_euclid(PI);
    if u == PI / 2.0 {
        f64::INFINITY
    } else {
        u.tan()
    }
}

/// The normal line through a base point along a unit normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalLine {
    pub chart: usize,
    pub x: Vec<f64>,
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
}

impl NormalLine {
    /// Normal at primary-chart point `x`; in codimension two the direction
    /// is `cos(angle) e_1 + sin(angle) e_2` in the deterministic normal frame.
    pub fn from_frame(spec: &ImmersionSpec, x: &[f64], angle: f64) -> Result<Self> {
        let jet = spec.jet(x)?;
        let frame = normal_frame(&jet)?;
        Self::build(spec, 0, &jet, frame.direction(angle))
    }

    /// Normal at `x` in chart `chart` along an explicit unit normal `n`.
    pub fn new(spec: &ImmersionSpec, chart: usize, x: &[f64], n: &[f64]) -> Result<Self> {
        if chart >= spec.charts().len() {
            return Err(Error::InvalidInput(format!("no chart {chart}")));
        }
        let jet = spec.chart(chart).jet(x)?;
        Self::build(spec, chart, &jet, n.to_vec())
    }

    fn build(spec: &ImmersionSpec, chart: usize, jet: &Jet2, n: Vec<f64>) -> Result<Self> {
        if n.len() != spec.n() {
            return Err(Error::InvalidInput(format!(
                "normal has dimension {}, ambient dimension is {}",
                n.len(),
                spec.n()
            )));
        }
        if (norm(&n) - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput("normal direction must be unit length".into()));
        }
        for i in 0..spec.m() {
            let d = jet.d1(i);
            if dot(d, &n).abs() > 1e-10 * norm(d) {
                return Err(Error::InvalidInput("direction is not normal to the tangent space".into()));
            }
        }
        Ok(NormalLine {
            chart,
            x: jet.x().to_vec(),
            base: jet.pos().to_vec(),
            direction: n,
        })
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.base.iter().zip(&self.direction).map(|(p, n)| p + t * n).collect()
    }

    pub fn jet(&self, spec: &ImmersionSpec) -> Result<Jet2> {
        spec.chart(self.chart).jet(&self.x)
    }

    /// Base point as a Newton seed.
    pub(crate) fn seed(&self) -> (usize, [f64; 2]) {
        let mut x = [0.0; 2];
        x[..self.x.len()].copy_from_slice(&self.x);
        (self.chart, x)
    }
}

/// One finite focal point on a normal line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalPoint {
    pub t: f64,
    pub u: f64,
    pub nu: usize,
    /// `j` for `r_j` on the positive half-line, `-j` for `r_{-j}`.
    pub index: i64,
    /// Position on the compactified normal: `r_j` has `j`, `r_{-j}` has
    /// `m + 1 - j`.
    pub cyclic_index: usize,
    pub kappa: f64,
}

/// All focal points on a normal line, in walk order (increasing `u`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalSet {
    pub points: Vec<FocalPoint>,
    /// Multiplicity of the focal point at infinity.
    pub at_infinity: usize,
    pub kappas: Vec<f64>,
}

impl FocalSet {
    pub fn by_cyclic(&self, c: usize) -> Option<&FocalPoint> {
        self.points.iter().find(|f| f.cyclic_index == c)
    }

    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|f| f.nu).sum::<usize>() + self.at_infinity
    }

    /// Multiplicity-weighted number of focal parameters strictly between 0
    /// and `t`, i.e. the Morse index of the base point for `d_{y(t)}^2`.
    pub fn count_between(&self, t: f64) -> usize {
        self.points
            .iter()
            .filter(|f| if t > 0.0 { f.t > 0.0 && f.t < t } else { f.t < 0.0 && f.t > t })
            .map(|f| f.nu)
            .sum()
    }
}

/// Focal points of the primary-chart point `x` along the unit normal `n`.
pub fn focal_points(spec: &ImmersionSpec, x: &[f64], n: &[f64]) -> Result<FocalSet> {
    let line = NormalLine::new(spec, 0, x, n)?;
    focal_set(spec, &line)
}

pub fn focal_set(spec: &ImmersionSpec, line: &NormalLine) -> Result<FocalSet> {
    let jet = line.jet(spec)?;
    let (g, h) = metric_and_form(&jet, &line.direction)?;
    let eig = generalized_eigen(&h, &g).ok_or_else(|| Error::DegenerateMetric(g.det()))?;
    Ok(from_kappas(eig.values(), spec.m(), 1e-9 / spec.diameter()))
}

fn from_kappas(kappas: &[f64], m: usize, zero_tol: f64) -> FocalSet {
    let mut sorted = kappas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut at_infinity = 0;
    for k in &sorted {
        if k.abs() <= zero_tol {
            at_infinity += 1;
            continue;
        }
        match clusters.last_mut() {
            Some((c, nu)) if (k - *c).abs() <= CLUSTER_TOL * k.abs().max(c.abs()) && k.signum() == c.signum() => {
                *c = (*c * *nu as f64 + k) / (*nu as f64 + 1.0);
                *nu += 1;
            }
            _ => clusters.push((*k, 1)),
        }
    }
    let mut positive: Vec<(f64, usize)> = clusters.iter().copied().filter(|(k, _)| *k > 0.0).collect();
    let mut negative: Vec<(f64, usize)> = clusters.iter().copied().filter(|(k, _)| *k < 0.0).collect();
    // outward from the base point: largest curvature first
    positive.sort_by(|a, b| b.0.total_cmp(&a.0));
    negative.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points = Vec::new();
    let mut j = 1;
    for (k, nu) in positive {
        points.push(FocalPoint {
            t: 1.0 / k,
            u: u_of_t(1.0 / k),
            nu,
            index: j as i64,
            cyclic_index: j,
            kappa: k,
        });
        j += nu;
    }
    let mut j = 1;
    for (k, nu) in negative {
        points.push(FocalPoint {
            t: 1.0 / k,
            u: u_of_t(1.0 / k),
            nu,
            index: -(j as i64),
            cyclic_index: m + 1 - j,
            kappa: k,
        });
        j += nu;
    }
    points.sort_by(|a, b| a.u.total_cmp(&b.u));
    FocalSet {
        points,
        at_infinity,
        kappas: sorted,
    }
}

/// One sample of the focal set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudPoint {
    pub pos: Vec<f64>,
    pub nu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalCloud {
    pub points: Vec<CloudPoint>,
    /// Samples dropped because of a degenerate metric.
    pub skipped: usize,
}

/// Focal points over a `samples_per_axis^m` grid of the primary chart, with
/// `directions` normal directions per point in codimension two (antipodal
/// directions give the same focal points, so angles cover `[0, pi)`).
pub fn focal_cloud(spec: &ImmersionSpec, samples_per_axis: usize, directions: usize, mode: ExecMode) -> Result<FocalCloud> {
    if samples_per_axis == 0 || directions == 0 {
        return Err(Error::InvalidInput("sampling densities must be positive".into()));
    }
    let grid = chart_grid(spec.primary(), samples_per_axis);
    let angles: Vec<f64> = if spec.codim() == 1 {
        vec![0.0]
    } else {
        (0..directions).map(|k| k as f64 * PI / directions as f64).collect()
    };
    let per_point = exec::map(mode, &grid, |x| -> Option<Vec<CloudPoint>> {
        let x = &x[..spec.m()];
        let jet = spec.jet(x).ok()?;
        let frame = normal_frame(&jet).ok()?;
        let mut out = Vec::new();
        for a in &angles {
            let line = NormalLine::build(spec, 0, &jet, frame.direction(*a)).ok()?;
            let set = focal_set(spec, &line).ok()?;
            out.extend(set.points.iter().map(|f| CloudPoint {
                pos: line.point_at(f.t),
                nu: f.nu,
            }));
        }
        Some(out)
    });
    let mut points = Vec::new();
    let mut skipped = 0;
    for p in per_point {
        match p {
            Some(v) => points.extend(v),
            None => skipped += 1,
        }
    }
    Ok(FocalCloud { points, skipped })
}
