//! Regularity certificates for normal lines.
//!
//! The count of distinct focal points is checked exactly. The other three
//! conditions are along-the-line proxies: fold (A2) tests by a third
//! derivative along the Hessian kernel, and a square-root law for the
//! separation of a colliding birth/death pair.

use super::{focal_set, FocalSet, NormalLine};
use crate::error::{Error, Result};
use crate::geometry::{Chart, ImmersionSpec};
use crate::morse::{Census, Objective, SquaredDistance};
use crate::walk::{self, EventKind, WalkConfig, WalkSample};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: u8,
    pub name: String,
    pub verdict: Verdict,
    /// Worst measured margin, when something was measured.
    pub margin: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl ConditionReport {
    fn new(condition: u8, name: &str, tolerance: f64) -> Self {
        ConditionReport {
            condition,
            name: name.into(),
            verdict: Verdict::Pass,
            margin: None,
            tolerance,
            detail: String::new(),
        }
    }

    fn note(&mut self, verdict: Verdict, margin: Option<f64>, detail: String) {
        self.verdict = self.verdict.combine(verdict);
        if let Some(m) = margin {
            self.margin = Some(self.margin.map_or(m, |old: f64| old.min(m)));
        }
        if verdict != Verdict::Pass {
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&detail);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityCertificate {
    /// Conditions 1 to 4: no singular focal points on the line, transversal
    /// crossings, fold singularities at crossings, `m` distinct focal points.
    pub conditions: Vec<ConditionReport>,
    pub overall: Verdict,
}

impl RegularityCertificate {
    pub fn has_failure(&self) -> bool {
        self.conditions.iter().any(|c| c.verdict == Verdict::Fail)
    }

    pub fn summary(&self) -> String {
        self.conditions
            .iter()
            .filter(|c| c.verdict != Verdict::Pass)
            .map(|c| format!("condition {} ({}) {:?}: {}", c.condition, c.name, c.verdict, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Certificate of the normal `line`, walking it once to find the crossings.
pub fn regularity(spec: &ImmersionSpec, line: &NormalLine, cfg: &WalkConfig) -> Result<RegularityCertificate> {
    let focal = focal_set(spec, line)?;
    let (c1, c4) = static_conditions(spec, line, &focal, cfg)?;
    if c1.verdict == Verdict::Fail || c4.verdict == Verdict::Fail {
        let skipped = Err("not walked, a static condition failed".to_string());
        return Ok(certify(spec, line, c1, c4, skipped, cfg));
    }
    let scan = walk::scan(spec, line, &focal, cfg);
    let scan_ref = scan.as_ref().map_err(|e| e.to_string());
    Ok(certify(spec, line, c1, c4, scan_ref, cfg))
}

/// Conditions that need no walk: the focal-point count (exact) and the
/// behaviour of the census at each focal point.
pub(crate) fn static_conditions(
    spec: &ImmersionSpec,
    line: &NormalLine,
    focal: &FocalSet,
    cfg: &WalkConfig,
) -> Result<(ConditionReport, ConditionReport)> {
    let m = spec.m();
    let mut c4 = ConditionReport::new(4, "m distinct focal points", cfg.match_tol);
    let simple = focal.points.iter().all(|f| f.nu == 1);
    let mut gap = f64::INFINITY;
    for (i, a) in focal.points.iter().enumerate() {
        for b in &focal.points[i + 1..] {
            gap = gap.min((a.u - b.u).abs());
        }
    }
    // distance to infinity counts too: a focal value there is also a failure
    for a in &focal.points {
        gap = gap.min((a.u - std::f64::consts::FRAC_PI_2).abs());
    }
    let separation = gap.is_finite().then_some(gap);
    if focal.at_infinity > 0 {
        c4.note(Verdict::Fail, separation, format!("{} focal value(s) at infinity", focal.at_infinity));
    } else if !simple || focal.points.len() != m {
        let nus: Vec<usize> = focal.points.iter().map(|f| f.nu).collect();
        c4.note(
            Verdict::Fail,
            separation,
            format!("{} distinct focal points with multiplicities {nus:?}, need {m} simple ones", focal.points.len()),
        );
    } else if gap <= cfg.match_tol {
        c4.note(Verdict::Fail, separation, format!("focal points only {gap:e} apart in u from each other or from infinity"));
    } else {
        c4.note(Verdict::Pass, separation, String::new());
    }

    let mut c1 = ConditionReport::new(1, "no singular focal points on the line", cfg.a2_tolerance);
    let far = cfg.far_factor * spec.diameter();
    for f in &focal.points {
        if f.t.abs() > far {
            c1.note(Verdict::Inconclusive, None, format!("r_{} lies beyond the far zone", f.cyclic_index));
            continue;
        }
        let sample = match walk::census_at(spec, line, f.u, cfg, &[]) {
            Ok(s) => s,
            Err(Error::NonMorsePoint(msg)) => {
                c1.note(
                    Verdict::Fail,
                    Some(0.0),
                    format!("critical set at r_{} is not isolated ({msg})", f.cyclic_index),
                );
                continue;
            }
            Err(e) => return Err(e),
        };
        let (kc, xc) = spec.canonicalize(line.chart, &line.x)?;
        let y = line.point_at(f.t);
        let margin = third_derivative_margin(spec, spec.chart(kc), &xc[..m], &y);
        let others = other_degenerate(&sample.census, spec, kc, &xc[..m], cfg);
        match margin {
            Some(mg) if mg >= cfg.a2_tolerance && others == 0 => c1.note(Verdict::Pass, Some(mg), String::new()),
            Some(mg) if others > 0 => c1.note(
                Verdict::Inconclusive,
                Some(mg),
                format!("{others} further degenerate point(s) at r_{}", f.cyclic_index),
            ),
            Some(mg) => c1.note(
                Verdict::Inconclusive,
                Some(mg),
                format!("third derivative at r_{} is {mg:e}, below tolerance", f.cyclic_index),
            ),
            None => c1.note(Verdict::Inconclusive, None, format!("no kernel test possible at r_{}", f.cyclic_index)),
        }
    }
    Ok((c1, c4))
}

fn other_degenerate(census: &Census, spec: &ImmersionSpec, chart: usize, x: &[f64], cfg: &WalkConfig) -> usize {
    let radius = cfg.solver.dedup_radius * spec.chart(chart).min_extent();
    census
        .points
        .iter()
        .filter(|p| p.degeneracy_margin < cfg.solver.degeneracy_threshold)
        .filter(|p| !(p.chart == chart && spec.chart(chart).distance(&p.x, x) <= radius))
        .count()
}

/// `|D^3 d_y(x)[v, v, v]| * diameter / 2` for the unit-speed kernel
/// direction `v` of the Hessian at `x`, by central differences of the exact
/// Hessian.
pub(crate) fn third_derivative_margin(spec: &ImmersionSpec, chart: &Chart, x: &[f64], y: &[f64]) -> Option<f64> {
    let m = chart.dim();
    let obj = SquaredDistance {
        y: y.to_vec(),
        length: spec.diameter(),
    };
    let jet = chart.jet(x).ok()?;
    let (_, _, hess) = obj.eval(&jet);
    let eig = hess.eigen();
    let v = eig.vector(eig.kernel_index());
    let speed = jet.metric().quad(v).sqrt();
    let mut step = 1e-4 * spec.diameter() / speed;
    for _ in 0..20 {
        let plus: Vec<f64> = (0..m).map(|i| x[i] + step * v[i]).collect();
        let minus: Vec<f64> = (0..m).map(|i| x[i] - step * v[i]).collect();
        if chart.contains(&plus) && chart.contains(&minus) {
            let hp = obj.eval(&chart.jet(&plus).ok()?).2;
            let hm = obj.eval(&chart.jet(&minus).ok()?).2;
            let d3 = (hp.quad(v) - hm.quad(v)) / (2.0 * step) / speed.powi(3);
            return Some(d3.abs() * spec.diameter() / 2.0);
        }
        step *= 0.5;
    }
    None
}

/// Chart midpoint of two points, the short way round on periodic axes.
fn chart_midpoint(chart: &Chart, a: &[f64], b: &[f64]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (i, axis) in chart.axes().iter().enumerate() {
        let mut d = b[i] - a[i];
        if axis.periodic {
            let p = axis.length();
            d -= p * (d / p).round();
        }
        out[i] = a[i] + 0.5 * d;
    }
    chart.wrap(&out[..chart.dim()])
}

/// Closest pair of critical points with indices `(k, k - 1)`.
fn colliding_pair(census: &Census, k: usize) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, p) in census.points.iter().enumerate() {
        for (j, q) in census.points.iter().enumerate() {
            if p.mu == k && q.mu + 1 == k {
                let d = crate::linalg::distance(&p.pos, &q.pos);
                if best.is_none_or(|b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
    }
    best
}

/// Completes the certificate from the walk's birth/death events.
pub(crate) fn certify(
    spec: &ImmersionSpec,
    line: &NormalLine,
    c1: ConditionReport,
    c4: ConditionReport,
    scan: std::result::Result<&walk::Scan, String>,
    cfg: &WalkConfig,
) -> RegularityCertificate {
    let mut c2 = ConditionReport::new(2, "transversal crossings", cfg.sqrt_law.1 - cfg.sqrt_law.0);
    let mut c3 = ConditionReport::new(3, "fold singularities at crossings", cfg.a2_tolerance);
    match scan {
        Err(e) => {
            c2.note(Verdict::Inconclusive, None, format!("walk failed: {e}"));
            c3.note(Verdict::Inconclusive, None, format!("walk failed: {e}"));
        }
        Ok(scan) => {
            let crossings: Vec<&walk::WalkEvent> = scan
                .events
                .iter()
                .filter(|e| matches!(e.kind, EventKind::Birth | EventKind::Death))
                .collect();
            for e in &crossings {
                let Some(bracket) = e.bracket.as_deref() else { continue };
                let birth = e.kind == EventKind::Birth;
                let big: &WalkSample = if birth { &bracket.1 } else { &bracket.0 };
                let k = e.indices.0;
                transversality(spec, line, cfg, scan, e, big, k, &mut c2);
                fold_at_crossing(spec, line, cfg, e.u, big, k, &mut c3);
            }
        }
    }
    let conditions = vec![c1, c2, c3, c4];
    let overall = conditions.iter().fold(Verdict::Pass, |v, c| v.combine(c.verdict));
    RegularityCertificate { conditions, overall }
}

#[allow(clippy::too_many_arguments)]
fn transversality(
    spec: &ImmersionSpec,
    line: &NormalLine,
    cfg: &WalkConfig,
    scan: &walk::Scan,
    event: &walk::WalkEvent,
    big: &WalkSample,
    k: usize,
    report: &mut ConditionReport,
) {
    const DELTA: f64 = 1e-4;
    let side = if event.kind == EventKind::Birth { 1.0 } else { -1.0 };
    let crowded = scan
        .events
        .iter()
        .any(|o| !std::ptr::eq(o, event) && (o.u - event.u).abs() < 8.0 * DELTA);
    if crowded {
        report.note(Verdict::Inconclusive, None, format!("another event within {:e} of u = {:.6}", 8.0 * DELTA, event.u));
        return;
    }
    let seeds: Vec<(usize, [f64; 2])> = big
        .census
        .points
        .iter()
        .map(|p| {
            let mut x = [0.0; 2];
            x[..p.x.len()].copy_from_slice(&p.x);
            (p.chart, x)
        })
        .collect();
    let mut seps = Vec::new();
    for d in [DELTA, 4.0 * DELTA] {
        match walk::census_at(spec, line, event.u + side * d, cfg, &seeds) {
            Ok(s) => match colliding_pair(&s.census, k) {
                Some((_, _, sep)) => seps.push(sep),
                None => break,
            },
            Err(_) => break,
        }
    }
    if seps.len() < 2 || seps[0] <= 0.0 {
        report.note(Verdict::Inconclusive, None, format!("colliding pair not tracked near u = {:.6}", event.u));
        return;
    }
    let exponent = (seps[1] / seps[0]).ln() / 4f64.ln();
    let (lo, hi) = cfg.sqrt_law;
    let margin = (exponent - lo).min(hi - exponent);
    if (lo..=hi).contains(&exponent) {
        report.note(Verdict::Pass, Some(margin), String::new());
    } else {
        report.note(
            Verdict::Inconclusive,
            Some(margin),
            format!("collision exponent {exponent:.3} at u = {:.6} outside [{lo}, {hi}]", event.u),
        );
    }
}

fn fold_at_crossing(
    spec: &ImmersionSpec,
    line: &NormalLine,
    cfg: &WalkConfig,
    u: f64,
    big: &WalkSample,
    k: usize,
    report: &mut ConditionReport,
) {
    let Some((i, j, _)) = colliding_pair(&big.census, k) else {
        report.note(Verdict::Inconclusive, None, format!("colliding pair not found at u = {u:.6}"));
        return;
    };
    let (p, q) = (&big.census.points[i], &big.census.points[j]);
    if p.chart != q.chart {
        report.note(Verdict::Inconclusive, None, format!("colliding pair split across charts at u = {u:.6}"));
        return;
    }
    let t = super::t_of_u(u);
    if !t.is_finite() || t.abs() > cfg.far_factor * spec.diameter() {
        report.note(Verdict::Inconclusive, None, "crossing in the far zone".into());
        return;
    }
    let chart = spec.chart(p.chart);
    let mid = chart_midpoint(chart, &p.x, &q.x);
    let y = line.point_at(t);
    let others = big
        .census
        .points
        .iter()
        .enumerate()
        .filter(|(n, c)| *n != i && *n != j && c.degeneracy_margin < cfg.solver.degeneracy_threshold)
        .count();
    match third_derivative_margin(spec, chart, &mid[..spec.m()], &y) {
        Some(mg) if others > 0 => report.note(
            Verdict::Inconclusive,
            Some(mg),
            format!("{others} further degenerate point(s) at u = {u:.6}"),
        ),
        Some(mg) if mg >= cfg.a2_tolerance => report.note(Verdict::Pass, Some(mg), String::new()),
        Some(mg) => report.note(
            Verdict::Inconclusive,
            Some(mg),
            format!("third derivative {mg:e} at u = {u:.6} below tolerance"),
        ),
        None => report.note(Verdict::Inconclusive, None, format!("no kernel test possible at u = {u:.6}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circle2d, ellipse2d, sphere};
    use std::f64::consts::PI;

    #[test]
    fn sphere_fails() {
        let s = sphere(1.0).unwrap();
        let line = NormalLine::from_frame(&s, &[0.3, 1.0], 0.0).unwrap();
        let cert = regularity(&s, &line, &WalkConfig::default()).unwrap();
        assert_eq!(cert.overall, Verdict::Fail);
        assert_eq!(cert.conditions[3].verdict, Verdict::Fail);
    }

    #[test]
    fn circle_center_is_a_continuum() {
        let c = circle2d(1.0).unwrap();
        let line = NormalLine::from_frame(&c, &[0.0], 0.0).unwrap();
        let cert = regularity(&c, &line, &WalkConfig::default()).unwrap();
        assert_eq!(cert.conditions[3].verdict, Verdict::Pass);
        assert_eq!(cert.conditions[0].verdict, Verdict::Fail);
    }

    #[test]
    fn ellipse_generic_normal_passes() {
        let e = ellipse2d(2.0, 1.0).unwrap();
        let line = NormalLine::from_frame(&e, &[PI / 4.0], 0.0).unwrap();
        let cert = regularity(&e, &line, &WalkConfig::default()).unwrap();
        assert_eq!(cert.overall, Verdict::Pass, "{}", cert.summary());
        assert!(cert.conditions.iter().all(|c| c.margin.is_some()), "{:?}", cert.conditions);
    }

    #[test]
    fn ellipse_vertex_is_not_a_fold() {
        // the centre of curvature of a vertex is a cusp of the evolute
        let e = ellipse2d(2.0, 1.0).unwrap();
        let line = NormalLine::from_frame(&e, &[0.0], 0.0).unwrap();
        let focal = focal_set(&e, &line).unwrap();
        let (c1, _) = static_conditions(&e, &line, &focal, &WalkConfig::default()).unwrap();
        assert_eq!(c1.verdict, Verdict::Inconclusive);
    }
}
