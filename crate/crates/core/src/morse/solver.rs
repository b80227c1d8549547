use super::objective::unit_direction;
use super::{Census, CriticalPoint, Height, Objective, SolverConfig, SquaredDistance};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{chart_grid, Chart, ImmersionSpec};
use crate::linalg::norm;

/// Census of the critical points of `|pos - y|^2`.
pub fn find_critical_points(spec: &ImmersionSpec, y: &[f64], cfg: &SolverConfig) -> Result<Census> {
    find_critical_points_seeded(spec, y, cfg, &[])
}

/// Like [`find_critical_points`] with extra Newton seeds `(chart, x)` on top
/// of the grid.
pub fn find_critical_points_seeded(
    spec: &ImmersionSpec,
    y: &[f64],
    cfg: &SolverConfig,
    extra: &[(usize, [f64; 2])],
) -> Result<Census> {
    if y.len() != spec.n() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "query point must have {} finite coordinates, got {y:?}",
            spec.n()
        )));
    }
    let obj = SquaredDistance {
        y: y.to_vec(),
        length: spec.diameter(),
    };
    solve(spec, &obj, cfg, extra)
}

/// Census of the critical points of the height function `x -> <pos(x), n>`.
/// Indices are those of the height function itself; the far end of the
/// normal line at `+infinity` carries the complementary indices `m - mu`.
pub fn linear_census(spec: &ImmersionSpec, n: &[f64], cfg: &SolverConfig) -> Result<Census> {
    linear_census_seeded(spec, n, cfg, &[])
}

pub(crate) fn linear_census_seeded(
    spec: &ImmersionSpec,
    n: &[f64],
    cfg: &SolverConfig,
    extra: &[(usize, [f64; 2])],
) -> Result<Census> {
    let dir = unit_direction(spec, n)?;
    let obj = Height {
        dir,
        length: spec.diameter(),
    };
    solve(spec, &obj, cfg, extra)
}

fn solve<O: Objective>(spec: &ImmersionSpec, obj: &O, cfg: &SolverConfig, extra: &[(usize, [f64; 2])]) -> Result<Census> {
    let mut per_axis = cfg.seeds_for(spec.m());
    let mut attempt = 0;
    loop {
        let mut seeds: Vec<(usize, [f64; 2])> = Vec::new();
        for (k, chart) in spec.charts().iter().enumerate() {
            seeds.extend(chart_grid(chart, per_axis).into_iter().map(|x| (k, x)));
        }
        seeds.extend_from_slice(extra);
        let found = exec::map(cfg.exec, &seeds, |(k, x)| {
            settle(spec, obj, cfg, *k, *x, |c, x| newton(c, obj, x, cfg))
        });
        let census = assemble(spec, obj, cfg, found.into_iter().flatten().collect())?;
        let complete = !spec.is_closed() || !census.morse_ok || census.satisfies_morse_counting(spec);
        if complete || attempt >= cfg.retries {
            return Ok(census);
        }
        per_axis *= 2;
        attempt += 1;
    }
}

/// Turns a converged chart point into a canonical critical point, refining
/// again with `refine` if the canonical chart differs.
pub(super) fn settle<O, F>(
    spec: &ImmersionSpec,
    obj: &O,
    cfg: &SolverConfig,
    k: usize,
    x: [f64; 2],
    refine: F,
) -> Option<CriticalPoint>
where
    O: Objective,
    F: Fn(&Chart, [f64; 2]) -> Option<[f64; 2]>,
{
    let x = refine(spec.chart(k), x)?;
    let (kc, xc) = spec.canonicalize(k, &x[..spec.m()]).ok()?;
    let (k, x) = if kc == k {
        (k, xc)
    } else {
        match refine(spec.chart(kc), xc) {
            Some(xr) => (kc, xr),
            None => (k, x),
        }
    };
    evaluate(spec.chart(k), obj, cfg, k, x)
}

pub(super) fn evaluate<O: Objective>(chart: &Chart, obj: &O, cfg: &SolverConfig, k: usize, x: [f64; 2]) -> Option<CriticalPoint> {
    let m = chart.dim();
    let jet = chart.jet(&x[..m]).ok()?;
    let (value, grad, hess) = obj.eval(&jet);
    let grad_norm = norm(&grad[..m]);
    if grad_norm > cfg.newton_tol * obj.grad_scale(&jet) {
        return None;
    }
    let eig = hess.eigen();
    let margin = eig.min_abs() / eig.max_abs().max(obj.hessian_scale(&jet));
    Some(CriticalPoint {
        chart: k,
        x: x[..m].to_vec(),
        pos: jet.pos().to_vec(),
        value,
        mu: eig.negative_count(),
        degeneracy_margin: margin,
        grad_norm,
    })
}

/// Damped Newton on the gradient with a pseudo-inverse Hessian. Steps are
/// capped at a quarter of the shortest chart extent and halved until the
/// gradient norm decreases. After reaching tolerance a few more steps polish
/// the point while they still help.
pub(super) fn newton<O: Objective>(chart: &Chart, obj: &O, start: [f64; 2], cfg: &SolverConfig) -> Option<[f64; 2]> {
    const POLISH_STEPS: usize = 3;
    let m = chart.dim();
    let max_step = 0.25 * chart.min_extent();
    let mut x = start;
    let mut jet = chart.jet(&x[..m]).ok()?;
    let (_, mut grad, mut hess) = obj.eval(&jet);
    let mut gn = norm(&grad[..m]);
    let mut polished = 0;
    for _ in 0..cfg.max_newton_iters {
        if gn <= cfg.newton_tol * obj.grad_scale(&jet) {
            if polished >= POLISH_STEPS {
                break;
            }
            polished += 1;
        }
        if gn == 0.0 {
            break;
        }
        let eig = hess.eigen();
        let cutoff = 1e-14 * eig.max_abs().max(obj.hessian_scale(&jet));
        let mut step = eig.pinv_apply(&grad, cutoff);
        let len = norm(&step[..m]);
        if len == 0.0 || !len.is_finite() {
            break;
        }
        let scale = if len > max_step { -max_step / len } else { -1.0 };
        step.iter_mut().for_each(|s| *s *= scale);
        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..40 {
            let mut xn = x;
            for i in 0..m {
                xn[i] += alpha * step[i];
            }
            if chart.contains(&xn[..m]) {
                if let Ok(jn) = chart.jet(&xn[..m]) {
                    let (_, gnew, hnew) = obj.eval(&jn);
                    let gnn = norm(&gnew[..m]);
                    if gnn < gn {
                        x = chart.wrap(&xn[..m]);
                        jet = jn;
                        grad = gnew;
                        hess = hnew;
                        gn = gnn;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (gn <= cfg.newton_tol * obj.grad_scale(&jet)).then_some(x)
}

/// Canonical ordering, identification of duplicates and detection of
/// non-isolated critical sets.
pub(super) fn assemble<O: Objective>(
    spec: &ImmersionSpec,
    obj: &O,
    cfg: &SolverConfig,
    mut found: Vec<CriticalPoint>,
) -> Result<Census> {
    found.sort_by(|a, b| {
        a.chart
            .cmp(&b.chart)
            .then_with(|| a.x[0].total_cmp(&b.x[0]))
            .then_with(|| a.x.get(1).unwrap_or(&0.0).total_cmp(b.x.get(1).unwrap_or(&0.0)))
    });
    let thr = cfg.degeneracy_threshold;
    let ambient_radius = 1e-9 * spec.diameter();
    let mut kept: Vec<CriticalPoint> = Vec::new();
    for p in found {
        let degenerate = p.degeneracy_margin < thr;
        let same = kept.iter_mut().find(|q| {
            let compatible = q.mu == p.mu || degenerate || q.degeneracy_margin < thr;
            if !compatible {
                return false;
            }
            if q.chart == p.chart {
                let chart = spec.chart(p.chart);
                chart.distance(&q.x, &p.x) <= cfg.dedup_radius * chart.min_extent()
            } else {
                crate::linalg::distance(&q.pos, &p.pos) <= ambient_radius
            }
        });
        match same {
            Some(q) => {
                if p.grad_norm < q.grad_norm && p.chart == q.chart {
                    *q = p;
                }
            }
            None => {
                kept.push(p);
                // a continuum yields thousands of points; stop as soon as it is certain
                if kept.iter().filter(|q| q.degeneracy_margin < thr).count() >= cfg.continuum_points.max(1) * 4 {
                    break;
                }
            }
        }
    }
    kept.sort_by(|a, b| {
        a.chart
            .cmp(&b.chart)
            .then_with(|| a.x[0].total_cmp(&b.x[0]))
            .then_with(|| a.x.get(1).unwrap_or(&0.0).total_cmp(b.x.get(1).unwrap_or(&0.0)))
    });
    let degenerate = kept.iter().filter(|p| p.degeneracy_margin < thr).count();
    if degenerate >= cfg.continuum_points {
        return Err(Error::NonMorsePoint(format!(
            "{degenerate} distinct degenerate critical points for query {:?}: the critical set is not isolated",
            obj.query()
        )));
    }
    Ok(Census::from_points(obj.kind(), obj.query().to_vec(), spec.m(), kept, thr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circle2d, ellipse2d, ellipsoid, sphere, torus};
    use std::f64::consts::PI;

    #[test]
    fn circle_off_center() {
        let c = circle2d(1.0).unwrap();
        let census = find_critical_points(&c, &[0.5, 0.0], &SolverConfig::default()).unwrap();
        assert_eq!(census.count(), 2);
        assert!(census.morse_ok);
        assert!(census.points[0].x[0].abs() < 1e-12);
        assert_eq!(census.points[0].mu, 0);
        assert!((census.points[1].x[0] - PI).abs() < 1e-12);
        assert_eq!(census.points[1].mu, 1);
    }

    #[test]
    fn ellipse_through_center() {
        let e = ellipse2d(2.0, 1.0).unwrap();
        let census = find_critical_points(&e, &[0.0, 0.0], &SolverConfig::default()).unwrap();
        assert_eq!(census.count(), 4);
        assert_eq!(census.counts, vec![2, 2]);
    }

    #[test]
    fn ellipsoid_through_center() {
        let e = ellipsoid(3.0, 2.0, 1.0).unwrap();
        let census = find_critical_points(&e, &[0.0; 3], &SolverConfig::default()).unwrap();
        assert_eq!(census.counts, vec![2, 2, 2]);
    }

    #[test]
    fn sphere_center_and_circle_center_are_not_morse() {
        let s = sphere(1.0).unwrap();
        assert!(matches!(
            find_critical_points(&s, &[0.0; 3], &SolverConfig::default()),
            Err(Error::NonMorsePoint(_))
        ));
        let c = circle2d(1.0).unwrap();
        assert!(matches!(
            find_critical_points(&c, &[0.0; 2], &SolverConfig::default()),
            Err(Error::NonMorsePoint(_))
        ));
    }

    #[test]
    fn height_functions() {
        let c = circle2d(1.0).unwrap();
        let census = linear_census(&c, &[1.0, 0.0], &SolverConfig::default()).unwrap();
        assert_eq!(census.count(), 2);
        // x = 0 is the maximum of the height
        assert_eq!(census.points[0].mu, 1);
        assert_eq!(census.points[1].mu, 0);
        let e = ellipsoid(3.0, 2.0, 1.0).unwrap();
        assert_eq!(linear_census(&e, &[0.0, 0.0, 1.0], &SolverConfig::default()).unwrap().count(), 2);
        let t = torus(2.0, 1.0).unwrap();
        let n = [0.6, 0.0, 0.8];
        let census = linear_census(&t, &n, &SolverConfig::default()).unwrap();
        assert_eq!(census.index_multiset(), vec![0, 1, 1, 2]);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let t = torus(2.0, 1.0).unwrap();
        let y = [2.2, 0.3, 0.1];
        let par = find_critical_points(&t, &y, &SolverConfig::default()).unwrap();
        let seq = find_critical_points(&t, &y, &SolverConfig::default().sequential()).unwrap();
        assert_eq!(par, seq);
    }
}
