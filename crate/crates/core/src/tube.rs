//! Tubes over closed space curves.
//!
//! The tube of radius `r` is parametrized by `(s, theta)` as
//! `c(s) + r (cos(theta) e1(s) + sin(theta) e2(s))`. The normal frame
//! `(e1, e2)` is rotation-minimizing, transported by double reflection on a
//! fine grid, closed up by spreading the holonomy angle uniformly, and
//! interpolated componentwise by periodic cubic splines. The spline
//! derivatives are exact, so the tube's jets are exact for the splined
//! frame.

use crate::error::{Error, Result};
use crate::focal::{focal_set, NormalLine};
use crate::geometry::{normal_frame, Axis, Chart, ImmersionSpec, Jet2, JetFn};
use crate::linalg::{dot, norm};
use crate::morse::{find_critical_points, Census, SolverConfig};
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Frame transport grid size.
const FRAME_GRID: usize = 2048;
/// Chart distance within which a tube critical point is paired to the
/// prediction from a child critical point.
const PAIR_TOL: f64 = 1e-5;

/// Periodic cubic spline through `values` on a uniform grid over one period.
#[derive(Debug, Clone)]
struct PeriodicSpline {
    lo: f64,
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl PeriodicSpline {
    fn new(lo: f64, period: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        let h = period / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|k| 6.0 * (y[(k + 1) % n] - 2.0 * y[k] + y[(k + n - 1) % n]) / (h * h))
            .collect();
        // cyclic system M_{k-1} + 4 M_k + M_{k+1} = rhs_k; Gauss-Seidel
        // contracts by at least one half per sweep
        let mut m = vec![0.0; n];
        for _ in 0..200 {
            let mut change: f64 = 0.0;
            for k in 0..n {
                let new = (rhs[k] - m[(k + n - 1) % n] - m[(k + 1) % n]) / 4.0;
                change = change.max((new - m[k]).abs());
                m[k] = new;
            }
            let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
            if change <= 1e-17 * scale {
                break;
            }
        }
        PeriodicSpline { lo, h, y, m }
    }

    /// Value, first and second derivative at `s`.
    fn eval(&self, s: f64) -> [f64; 3] {
        let n = self.y.len();
        let pos = (s - self.lo) / self.h;
        let cell = pos.floor();
        let tau = pos - cell;
        let k = (cell as i64).rem_euclid(n as i64) as usize;
        let k1 = (k + 1) % n;
        let (a, b, h) = (1.0 - tau, tau, self.h);
        let (yk, yk1, mk, mk1) = (self.y[k], self.y[k1], self.m[k], self.m[k1]);
        let value = a * yk + b * yk1 + ((a * a * a - a) * mk + (b * b * b - b) * mk1) * h * h / 6.0;
        let d1 = (yk1 - yk) / h - (3.0 * a * a - 1.0) / 6.0 * h * mk + (3.0 * b * b - 1.0) / 6.0 * h * mk1;
        let d2 = a * mk + b * mk1;
        [value, d1, d2]
    }
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn reflect(v: &[f64; 3], axis: &[f64; 3], c: f64) -> [f64; 3] {
    let k = 2.0 / c * dot(axis, v);
    [v[0] - k * axis[0], v[1] - k * axis[1], v[2] - k * axis[2]]
}

/// Rotation of `v` by `angle` about the unit axis `t` (Rodrigues).
fn rotate(v: &[f64; 3], t: &[f64], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let txv = cross(t, v);
    let tv = dot(t, v);
    [0, 1, 2].map(|i| v[i] * c + txv[i] * s + t[i] * tv * (1.0 - c))
}

/// Smallest radius of curvature `|c'|^3 / |c' x c''|`: dense sampling, then
/// golden-section refinement around the smallest sample.
pub fn min_curvature_radius(child: &ImmersionSpec, samples: usize) -> Result<f64> {
    let axis = child.primary().axes()[0];
    let radius = |s: f64| -> f64 {
        let j = child.primary().raw_eval(&[s]);
        let bend = norm(&cross(j.d1(0), j.d2(0, 0)));
        if bend > 0.0 {
            norm(j.d1(0)).powi(3) / bend
        } else {
            f64::INFINITY
        }
    };
    let h = axis.length() / samples as f64;
    let (mut best_s, mut best) = (axis.lo, f64::INFINITY);
    for k in 0..samples {
        let s = axis.lo + k as f64 * h;
        let r = radius(s);
        if r < best {
            (best_s, best) = (s, r);
        }
    }
    if !best.is_finite() {
        return Ok(best);
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best_s - h, best_s + h);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (radius(c), radius(d));
    for _ in 0..80 {
        if fc < fd {
            (b, d, fd) = (d, c, fc);
            c = b - g * (b - a);
            fc = radius(c);
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + g * (b - a);
            fd = radius(d);
        }
    }
    Ok(best.min(fc).min(fd))
}

/// Closed-up rotation-minimizing frame `e1` on the transport grid and the
/// holonomy angle that was spread along the curve.
fn transported_frame(child: &ImmersionSpec) -> Result<(Vec<[f64; 3]>, f64)> {
    let axis = child.primary().axes()[0];
    let n = FRAME_GRID;
    let h = axis.length() / n as f64;
    let mut pos = Vec::with_capacity(n + 1);
    let mut tan = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let j = child.primary().raw_eval(&[axis.lo + k as f64 * h]);
        let d = j.d1(0);
        let len = norm(d);
        pos.push([j.pos()[0], j.pos()[1], j.pos()[2]]);
        tan.push([d[0] / len, d[1] / len, d[2] / len]);
    }
    let start = normal_frame(&child.jet(&[axis.lo])?)?.vectors[0].clone();
    let mut frame = vec![[start[0], start[1], start[2]]];
    for k in 0..n {
        let v1 = [0, 1, 2].map(|i| pos[k + 1][i] - pos[k][i]);
        let c1 = dot(&v1, &v1);
        if c1 == 0.0 {
            return Err(Error::FrameFailure(format!("repeated grid point at step {k}")));
        }
        let r_l = reflect(&frame[k], &v1, c1);
        let t_l = reflect(&tan[k], &v1, c1);
        let v2 = [0, 1, 2].map(|i| tan[k + 1][i] - t_l[i]);
        let c2 = dot(&v2, &v2);
        let next = if c2 > 0.0 { reflect(&r_l, &v2, c2) } else { r_l };
        frame.push(next);
    }
    let end = frame[n];
    let t0 = &tan[0];
    let defect = (norm(&end) - 1.0).abs().max(dot(&end, t0).abs());
    if defect > 1e-6 {
        return Err(Error::FrameFailure(format!("transported frame drifted by {defect:e}")));
    }
    let e2 = cross(t0, &frame[0]);
    let alpha = dot(&end, &e2).atan2(dot(&end, &frame[0]));
    let closed: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let v = rotate(&frame[k], &tan[k], -alpha * k as f64 / n as f64);
            // remove the residual tangential part and renormalize
            let along = dot(&v, &tan[k]);
            let w = [0, 1, 2].map(|i| v[i] - along * tan[k][i]);
            let len = norm(&w);
            w.map(|c| c / len)
        })
        .collect();
    Ok((closed, alpha))
}

/// Tube of radius `r` over a closed curve in `R^3`.
pub fn tube_spec(child: &ImmersionSpec, r: f64) -> Result<ImmersionSpec> {
    if child.m() != 1 || child.n() != 3 || !child.is_closed() {
        return Err(Error::BadParams(format!(
            "tubes are built over closed curves in R^3, got {} (m = {}, n = {})",
            child.name(),
            child.m(),
            child.n()
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::BadParams(format!("tube radius must be positive, got {r}")));
    }
    let bound = min_curvature_radius(child, 4096)?;
    if r >= bound {
        return Err(Error::RadiusTooLarge { r, bound });
    }
    let axis = child.primary().axes()[0];
    let (e1, _) = transported_frame(child)?;
    let n = e1.len();
    let h = axis.length() / n as f64;
    let e2: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let j = child.primary().raw_eval(&[axis.lo + k as f64 * h]);
            let d = j.d1(0);
            let len = norm(d);
            cross(&[d[0] / len, d[1] / len, d[2] / len], &e1[k])
        })
        .collect();
    let spline = |frame: &[[f64; 3]], c: usize| PeriodicSpline::new(axis.lo, axis.length(), frame.iter().map(|v| v[c]).collect());
    let splines: Arc<[PeriodicSpline; 6]> = Arc::new([
        spline(&e1, 0),
        spline(&e1, 1),
        spline(&e1, 2),
        spline(&e2, 0),
        spline(&e2, 1),
        spline(&e2, 2),
    ]);
    let core = child.primary().clone();
    let eval: JetFn = Arc::new(move |x: &[f64]| {
        let (s, theta) = (x[0], x[1]);
        let c = core.raw_eval(&[s]);
        let f: Vec<[f64; 3]> = splines.iter().map(|sp| sp.eval(s)).collect();
        let (st, ct) = theta.sin_cos();
        let mut pos = [0.0; 3];
        let mut ds = [0.0; 3];
        let mut dt = [0.0; 3];
        let mut dss = [0.0; 3];
        let mut dst = [0.0; 3];
        let mut dtt = [0.0; 3];
        for i in 0..3 {
            let (a, b) = (f[i], f[i + 3]);
            pos[i] = c.pos()[i] + r * (ct * a[0] + st * b[0]);
            ds[i] = c.d1(0)[i] + r * (ct * a[1] + st * b[1]);
            dss[i] = c.d2(0, 0)[i] + r * (ct * a[2] + st * b[2]);
            dt[i] = r * (-st * a[0] + ct * b[0]);
            dst[i] = r * (-st * a[1] + ct * b[1]);
            dtt[i] = -r * (ct * a[0] + st * b[0]);
        }
        Jet2::surface([s, theta], &pos, [&ds, &dt], [&dss, &dst, &dtt])
    });
    let chart = Chart::new(vec![Axis::periodic(axis.lo, axis.hi), Axis::periodic(0.0, TAU)], eval);
    let mut params = vec![r];
    params.extend_from_slice(child.params());
    let doubled: Vec<usize> = {
        let b = child.betti();
        // S^1 x S^1
        vec![b[0], b[0] + b[1], b[1]]
    };
    ImmersionSpec::new("tube", params, 3, vec![chart], doubled, true)
}

/// One tube critical point matched to a child critical point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubeHit {
    pub x: Vec<f64>,
    pub mu: usize,
    /// Index predicted by counting tube focal points between the tube point
    /// and the query point.
    pub predicted_mu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubePair {
    pub child_x: f64,
    pub child_mu: usize,
    /// The tube point on the side facing the query point.
    pub near: TubeHit,
    pub far: TubeHit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub y: Vec<f64>,
    pub r: f64,
    pub child: Census,
    pub tube: Census,
    pub child_excess: i64,
    pub tube_excess: i64,
    pub count_doubled: bool,
    pub excess_doubled: bool,
    pub index_theorem_ok: bool,
    pub pairs: Vec<TubePair>,
    pub passed: bool,
}

/// Checks that every normal of the curve through `y` yields exactly two
/// normals of the tube through `y`.
pub fn verify_doubling(child: &ImmersionSpec, r: f64, y: &[f64], cfg: &SolverConfig) -> Result<DoublingReport> {
    let tube = tube_spec(child, r)?;
    verify_doubling_with(child, &tube, r, y, cfg)
}

/// [`verify_doubling`] with a prebuilt tube (construction dominates the cost
/// for many queries).
pub fn verify_doubling_with(
    child: &ImmersionSpec,
    tube: &ImmersionSpec,
    r: f64,
    y: &[f64],
    cfg: &SolverConfig,
) -> Result<DoublingReport> {
    let child_census = find_critical_points(child, y, cfg)?;
    let dist = child_census
        .points
        .iter()
        .map(|p| p.value.max(0.0).sqrt())
        .fold(f64::INFINITY, f64::min);
    if dist <= r {
        return Err(Error::OnManifold { distance: dist, radius: r });
    }
    let tube_census = find_critical_points(tube, y, cfg)?;
    let chart = tube.primary();
    let (e1, e2) = (frame_at(tube, r, 0.0)?, frame_at(tube, r, PI / 2.0)?);
    let mut used = vec![false; tube_census.count()];
    let mut pairs = Vec::new();
    for p in &child_census.points {
        let s = p.x[0];
        let w: Vec<f64> = y.iter().zip(&p.pos).map(|(a, b)| a - b).collect();
        let (a, b) = (e1(s)?, e2(s)?);
        let theta_near = dot(&w, &b).atan2(dot(&w, &a)).rem_euclid(TAU);
        let theta_far = (theta_near + PI).rem_euclid(TAU);
        let mut hit = |theta: f64| -> Result<TubeHit> {
            let target = [s, theta];
            let found = tube_census
                .points
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, q)| (i, chart.distance(&q.x, &target)))
                .filter(|(_, d)| *d <= PAIR_TOL)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((i, _)) = found else {
                return Err(Error::PairingFailure(format!(
                    "no tube critical point near (s, theta) = ({s:.9}, {theta:.9})"
                )));
            };
            used[i] = true;
            let q = &tube_census.points[i];
            Ok(TubeHit {
                x: q.x.clone(),
                mu: q.mu,
                predicted_mu: predicted_index(tube, &q.x, y)?,
            })
        };
        let near = hit(theta_near)?;
        let far = hit(theta_far)?;
        pairs.push(TubePair {
            child_x: s,
            child_mu: p.mu,
            near,
            far,
        });
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(Error::PairingFailure(format!(
            "tube critical point at {:?} has no partner on the curve",
            tube_census.points[i].x
        )));
    }
    let child_excess = child_census.excess(child);
    let tube_excess = tube_census.excess(tube);
    let count_doubled = tube_census.count() == 2 * child_census.count();
    let excess_doubled = tube_excess >= 2 * child_excess;
    let index_theorem_ok = pairs.iter().all(|p| p.near.mu == p.near.predicted_mu && p.far.mu == p.far.predicted_mu);
    Ok(DoublingReport {
        y: y.to_vec(),
        r,
        passed: count_doubled && excess_doubled && index_theorem_ok,
        child: child_census,
        tube: tube_census,
        child_excess,
        tube_excess,
        count_doubled,
        excess_doubled,
        index_theorem_ok,
        pairs,
    })
}

/// The frame vector at angle `theta`, recovered from the tube chart.
fn frame_at(tube: &ImmersionSpec, r: f64, theta: f64) -> Result<impl Fn(f64) -> Result<Vec<f64>> + '_> {
    Ok(move |s: f64| -> Result<Vec<f64>> {
        let on_tube = tube.jet(&[s, theta])?;
        let opposite = tube.jet(&[s, (theta + PI).rem_euclid(TAU)])?;
        Ok(on_tube
            .pos()
            .iter()
            .zip(opposite.pos())
            .map(|(a, b)| (a - b) / (2.0 * r))
            .collect())
    })
}

/// Number of tube focal points between the tube point `x` and `y`.
fn predicted_index(tube: &ImmersionSpec, x: &[f64], y: &[f64]) -> Result<usize> {
    let jet = tube.jet(x)?;
    let frame = normal_frame(&jet)?;
    let n = &frame.vectors[0];
    let t = dot(n, &y.iter().zip(jet.pos()).map(|(a, b)| a - b).collect::<Vec<_>>());
    let line = NormalLine::new(tube, 0, x, n)?;
    let focal = focal_set(tube, &line)?;
    Ok(focal.count_between(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circle3d, ellipse3d, torus};
    use crate::linalg::distance;

    #[test]
    fn spline_reproduces_trigonometric_data() {
        let n = 256;
        let y: Vec<f64> = (0..n).map(|k| (k as f64 * TAU / n as f64).sin()).collect();
        let sp = PeriodicSpline::new(0.0, TAU, y);
        for s in [0.1, 1.0, 3.3, 6.0] {
            let [v, d1, d2] = sp.eval(s);
            assert!((v - s.sin()).abs() < 1e-8);
            assert!((d1 - s.cos()).abs() < 1e-6);
            assert!((d2 + s.sin()).abs() < 1e-3);
        }
    }

    #[test]
    fn tube_of_circle_is_the_torus() {
        let t = tube_spec(&circle3d(2.0).unwrap(), 1.0).unwrap();
        let reference = torus(2.0, 1.0).unwrap();
        for (s, th) in [(0.0, 0.0), (1.0, 2.0), (4.0, 5.5)] {
            let p = t.jet(&[s, th]).unwrap();
            // same point on the standard chart with v = -theta
            let q = reference.jet(&[s, (-th).rem_euclid(TAU)]).unwrap();
            assert!(distance(p.pos(), q.pos()) < 1e-9, "{:?} vs {:?}", p.pos(), q.pos());
        }
        assert_eq!(t.betti(), &[1, 2, 1]);
    }

    #[test]
    fn ellipse_radius_bound() {
        let e = ellipse3d(2.0, 1.0).unwrap();
        assert!(tube_spec(&e, 0.3).is_ok());
        assert!(matches!(tube_spec(&e, 0.6), Err(Error::RadiusTooLarge { .. })));
        let bound = min_curvature_radius(&e, 4096).unwrap();
        assert!((bound - 0.5).abs() < 1e-12, "{bound}");
    }

    #[test]
    fn tube_jets_are_exact() {
        let t = tube_spec(&ellipse3d(2.0, 1.0).unwrap(), 0.3).unwrap();
        let report = t.audit(20).unwrap();
        assert!(report.max_fd_error < 1e-6, "{report:?}");
        assert!(report.max_periodicity_defect < 1e-12, "{report:?}");
    }

    #[test]
    fn doubling_on_the_circle() {
        let c = circle3d(2.0).unwrap();
        let report = verify_doubling(&c, 0.5, &[1.0, 0.0, 0.0], &SolverConfig::default()).unwrap();
        assert_eq!(report.child.count(), 2);
        assert_eq!(report.tube.count(), 4);
        assert_eq!(report.child_excess, 0);
        assert_eq!(report.tube_excess, 0);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn query_on_the_curve_is_rejected() {
        let e = ellipse3d(2.0, 1.0).unwrap();
        assert!(matches!(
            verify_doubling(&e, 0.3, &[2.0, 0.0, 0.0], &SolverConfig::default()),
            Err(Error::OnManifold { .. })
        ));
    }
}
