//! Immersions with exact 2-jets.

mod builtins;
mod chart;
mod jet;
mod manifest;

pub use builtins::{
    builtin, circle2d, circle3d, ellipse2d, ellipse3d, ellipsoid, graph2d, sphere, torus,
    BUILTIN_NAMES,
};
pub use chart::{Axis, Chart, JetFn, LocateFn};
pub use jet::{metric_and_form, normal_frame, Jet2, NormalFrame};
pub use manifest::Manifest;

use crate::error::{Error, Result};
use crate::linalg::{distance, dot};

/// A parametrized immersion `M^m -> R^n`.
///
/// The first chart is the primary one: base points and [`ImmersionSpec::jet`]
/// refer to it. Further charts only exist where one periodic chart cannot
/// cover the manifold (the poles of the sphere and ellipsoid); they take part
/// in critical point searches and every point has a single canonical chart.
#[derive(Debug, Clone)]
pub struct ImmersionSpec {
    name: String,
    params: Vec<f64>,
    m: usize,
    n: usize,
    charts: Vec<Chart>,
    betti: Vec<usize>,
    closed: bool,
    diameter: f64,
    center: Vec<f64>,
}

impl ImmersionSpec {
    pub fn new(
        name: impl Into<String>,
        params: Vec<f64>,
        n: usize,
        charts: Vec<Chart>,
        betti: Vec<usize>,
        closed: bool,
    ) -> Result<Self> {
        let name = name.into();
        let m = charts
            .first()
            .map(Chart::dim)
            .ok_or_else(|| Error::BadParams(format!("{name}: no chart")))?;
        if !(1..=2).contains(&m) || !(2..=4).contains(&n) || m >= n {
            return Err(Error::BadParams(format!(
                "{name}: unsupported dimensions m={m}, n={n}"
            )));
        }
        for chart in &charts {
            if chart.dim() != m {
                return Err(Error::BadParams(format!("{name}: chart dimensions differ")));
            }
            if chart.axes().iter().any(|a| !(a.length() > 0.0)) {
                return Err(Error::BadParams(format!("{name}: empty chart axis")));
            }
        }
        let mut spec = ImmersionSpec {
            name,
            params,
            m,
            n,
            charts,
            betti: Vec::new(),
            closed,
            diameter: 0.0,
            center: vec![0.0; n],
        };
        spec.set_betti(betti)?;
        spec.measure()?;
        Ok(spec)
    }

    /// Replaces the Betti metadata after checking its shape.
    pub fn set_betti(&mut self, betti: Vec<usize>) -> Result<()> {
        if betti.len() != self.m + 1 {
            return Err(Error::BadParams(format!(
                "{}: expected {} Betti numbers, got {}",
                self.name,
                self.m + 1,
                betti.len()
            )));
        }
        if betti[0] < 1 {
            return Err(Error::BadParams(format!("{}: beta_0 must be >= 1", self.name)));
        }
        if self.closed && (0..=self.m).any(|i| betti[i] != betti[self.m - i]) {
            return Err(Error::BadParams(format!(
                "{}: Betti numbers {betti:?} violate Poincare duality",
                self.name
            )));
        }
        self.betti = betti;
        Ok(())
    }

    fn measure(&mut self) -> Result<()> {
        let samples = chart_grid(&self.charts[0], if self.m == 1 { 256 } else { 48 });
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        for x in &samples {
            let jet = self.charts[0].jet(&x[..self.m])?;
            for (k, p) in jet.pos().iter().enumerate() {
                lo[k] = lo[k].min(*p);
                hi[k] = hi[k].max(*p);
            }
        }
        self.diameter = distance(&lo, &hi);
        self.center = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        if !(self.diameter > 0.0) {
            return Err(Error::BadParams(format!("{}: zero diameter", self.name)));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Intrinsic dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn codim(&self) -> usize {
        self.n - self.m
    }

    pub fn betti(&self) -> &[usize] {
        &self.betti
    }

    /// Total Betti number.
    pub fn beta(&self) -> usize {
        self.betti.iter().sum()
    }

    pub fn euler(&self) -> i64 {
        self.betti
            .iter()
            .enumerate()
            .map(|(i, b)| if i % 2 == 0 { *b as i64 } else { -(*b as i64) })
            .sum()
    }

    /// Indices `0 < i < m` with vanishing Betti number.
    pub fn trivial_indices(&self) -> Vec<usize> {
        (1..self.m).filter(|&i| self.betti[i] == 0).collect()
    }

    /// Compact without boundary; Morse counting statements apply.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, k: usize) -> &Chart {
        &self.charts[k]
    }

    pub fn primary(&self) -> &Chart {
        &self.charts[0]
    }

    /// Exact jet at `x` in the primary chart.
    pub fn jet(&self, x: &[f64]) -> Result<Jet2> {
        self.charts[0].jet(x)
    }

    /// Canonical `(chart, coordinates)` for the point at `x` in chart `k`.
    pub fn canonicalize(&self, k: usize, x: &[f64]) -> Result<(usize, [f64; 2])> {
        let chart = &self.charts[k];
        if self.charts.len() == 1 {
            return Ok((k, chart.wrap(x)));
        }
        let pos = chart.jet(x)?;
        for (idx, c) in self.charts.iter().enumerate() {
            if let Some(loc) = c.locate(pos.pos()) {
                let xc = c.wrap(&loc[..self.m]);
                if c.contains(&xc[..self.m]) && c.in_core(&xc[..self.m]) {
                    return Ok((idx, xc));
                }
            }
        }
        Ok((k, chart.wrap(x)))
    }

    /// Same immersion under the diagonal affine chart change
    /// `x = scale * x' + offset` applied to every chart.
    pub fn reparametrized(&self, scale: &[f64], offset: &[f64]) -> Result<Self> {
        if scale.len() != self.m || offset.len() != self.m || scale.contains(&0.0) {
            return Err(Error::BadParams("reparametrization needs m nonzero scales".into()));
        }
        let mut out = self.clone();
        out.charts = self
            .charts
            .iter()
            .map(|c| c.reparametrized(scale, offset))
            .collect();
        Ok(out)
    }

    /// Checks the immersion, periodicity and jet-exactness properties on a
    /// grid of `per_axis^m` points of every chart.
    pub fn audit(&self, per_axis: usize) -> Result<AuditReport> {
        let mut report = AuditReport::default();
        for chart in &self.charts {
            for x in chart_grid(chart, per_axis) {
                let x = &x[..self.m];
                let jet = chart.jet(x)?;
                let g = jet.metric();
                let sv = g.eigen().values[0].max(0.0).sqrt();
                report.min_singular_value = report.min_singular_value.min(sv);
                let frame = normal_frame(&jet)?;
                for v in &frame.vectors {
                    for i in 0..self.m {
                        report.max_frame_defect = report.max_frame_defect.max(dot(v, jet.d1(i)).abs());
                    }
                }
                report.max_fd_error = report.max_fd_error.max(fd_error(chart, x, 1e-5)?);
                for (i, axis) in chart.axes().iter().enumerate() {
                    if axis.periodic {
                        let mut shifted = [x[0], x.get(1).copied().unwrap_or(0.0)];
                        shifted[i] += axis.length();
                        let other = chart.raw_eval(&shifted[..self.m]);
                        report.max_periodicity_defect =
                            report.max_periodicity_defect.max(jet_difference(&jet, &other));
                    }
                }
                report.points += 1;
            }
        }
        Ok(report)
    }
}

/// Result of [`ImmersionSpec::audit`].
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub points: usize,
    pub min_singular_value: f64,
    pub max_frame_defect: f64,
    pub max_fd_error: f64,
    pub max_periodicity_defect: f64,
}

impl Default for AuditReport {
    fn default() -> Self {
        AuditReport {
            points: 0,
            min_singular_value: f64::INFINITY,
            max_frame_defect: 0.0,
            max_fd_error: 0.0,
            max_periodicity_defect: 0.0,
        }
    }
}

/// Uniform grid of cell centres on a chart domain.
pub fn chart_grid(chart: &Chart, per_axis: usize) -> Vec<[f64; 2]> {
    let axes = chart.axes();
    let coord = |a: &Axis, k: usize| a.lo + (k as f64 + 0.5) * a.length() / per_axis as f64;
    match axes.len() {
        1 => (0..per_axis).map(|k| [coord(&axes[0], k), 0.0]).collect(),
        _ => {
            let mut out = Vec::with_capacity(per_axis * per_axis);
            for i in 0..per_axis {
                for j in 0..per_axis {
                    out.push([coord(&axes[0], i), coord(&axes[1], j)]);
                }
            }
            out
        }
    }
}

/// Largest relative disagreement between the exact first/second derivatives
/// and central differences of the position/first derivatives.
pub fn fd_error(chart: &Chart, x: &[f64], step: f64) -> Result<f64> {
    let jet = chart.jet(x)?;
    let m = x.len();
    let scale = jet.speed().max(1e-300);
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let mut xp = [x[0], x.get(1).copied().unwrap_or(0.0)];
        let mut xm = xp;
        xp[i] += step;
        xm[i] -= step;
        let (jp, jm) = match (chart.jet(&xp[..m]), chart.jet(&xm[..m])) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        let d2_scale = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| crate::linalg::norm(jet.d2(a, b)))
            .fold(scale, f64::max);
        for k in 0..jet.n() {
            let fd1 = (jp.pos()[k] - jm.pos()[k]) / (2.0 * step);
            worst = worst.max((fd1 - jet.d1(i)[k]).abs() / scale);
            for j in 0..m {
                let fd2 = (jp.d1(j)[k] - jm.d1(j)[k]) / (2.0 * step);
                worst = worst.max((fd2 - jet.d2(i, j)[k]).abs() / d2_scale);
            }
        }
    }
    Ok(worst)
}

fn jet_difference(a: &Jet2, b: &Jet2) -> f64 {
    let mut worst: f64 = 0.0;
    let m = a.m();
    for k in 0..a.n() {
        worst = worst.max((a.pos()[k] - b.pos()[k]).abs());
        for i in 0..m {
            worst = worst.max((a.d1(i)[k] - b.d1(i)[k]).abs());
            for j in 0..m {
                worst = worst.max((a.d2(i, j)[k] - b.d2(i, j)[k]).abs());
            }
        }
    }
    worst
}
