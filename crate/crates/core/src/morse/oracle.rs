//! Derivative-free census used to cross-check the Newton solver.
//!
//! Local minima of `|grad|^2` on a dense cell-centre grid are refined by
//! compass search, which uses neither the Hessian nor Newton steps. The
//! indices, canonical charts and duplicate handling are shared with the
//! solver.

use super::solver::{assemble, settle};
use super::{Census, Objective, SolverConfig, SquaredDistance};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{Chart, ImmersionSpec};
use crate::linalg::dot;

/// Relative gradient tolerance accepted for oracle points; compass search
/// stalls earlier than Newton on ill-conditioned Hessians.
const ORACLE_TOL: f64 = 1e-8;

pub fn brute_force_census(spec: &ImmersionSpec, y: &[f64], grid_density: usize) -> Result<Census> {
    if grid_density < 200 {
        return Err(Error::InvalidInput(format!(
            "oracle grid density must be at least 200 per axis, got {grid_density}"
        )));
    }
    if y.len() != spec.n() {
        return Err(Error::InvalidInput(format!(
            "query point has dimension {}, ambient dimension is {}",
            y.len(),
            spec.n()
        )));
    }
    let obj = SquaredDistance {
        y: y.to_vec(),
        length: spec.diameter(),
    };
    let cfg = SolverConfig {
        newton_tol: ORACLE_TOL,
        ..SolverConfig::default()
    };
    let mut candidates = Vec::new();
    for (k, chart) in spec.charts().iter().enumerate() {
        candidates.extend(grid_minima(chart, &obj, grid_density).into_iter().map(|x| (k, x)));
    }
    let found = exec::map(cfg.exec, &candidates, |(k, x)| {
        settle(spec, &obj, &cfg, *k, *x, |c, x| compass(c, &obj, x, &cfg))
    });
    assemble(spec, &obj, &cfg, found.into_iter().flatten().collect())
}

fn grad_sq<O: Objective>(chart: &Chart, obj: &O, x: &[f64]) -> Option<f64> {
    let m = chart.dim();
    let jet = chart.jet(&x[..m]).ok()?;
    let (_, g, _) = obj.eval(&jet);
    Some(dot(&g[..m], &g[..m]))
}

/// Grid nodes whose `|grad|^2` does not exceed any neighbour's.
fn grid_minima<O: Objective>(chart: &Chart, obj: &O, density: usize) -> Vec<[f64; 2]> {
    let axes = chart.axes();
    let m = chart.dim();
    let counts: Vec<usize> = (0..2).map(|i| if i < m { density } else { 1 }).collect();
    let coord = |i: usize, k: usize| axes[i].lo + (k as f64 + 0.5) * axes[i].length() / density as f64;
    let rows: Vec<usize> = (0..counts[0]).collect();
    let values: Vec<Vec<f64>> = exec::map(Default::default(), &rows, |&a| {
        (0..counts[1])
            .map(|b| {
                let x = if m == 1 { [coord(0, a), 0.0] } else { [coord(0, a), coord(1, b)] };
                grad_sq(chart, obj, &x[..m]).unwrap_or(f64::INFINITY)
            })
            .collect()
    });
    let neighbour = |i: usize, k: usize, d: isize| -> Option<usize> {
        let n = counts[i] as isize;
        let j = k as isize + d;
        if (0..n).contains(&j) {
            Some(j as usize)
        } else if i < m && axes[i].periodic {
            Some(j.rem_euclid(n) as usize)
        } else {
            None
        }
    };
    let mut out = Vec::new();
    for a in 0..counts[0] {
        for b in 0..counts[1] {
            let v = values[a][b];
            let mut is_min = v.is_finite();
            'scan: for da in -1..=1isize {
                for db in -1..=1isize {
                    if (da, db) == (0, 0) || (m == 1 && db != 0) {
                        continue;
                    }
                    let (Some(na), Some(nb)) = (neighbour(0, a, da), neighbour(1, b, db)) else {
                        continue;
                    };
                    if values[na][nb] < v {
                        is_min = false;
                        break 'scan;
                    }
                }
            }
            if is_min {
                out.push(if m == 1 { [coord(0, a), 0.0] } else { [coord(0, a), coord(1, b)] });
            }
        }
    }
    out
}

/// Pattern search on `|grad|^2` over the axis and diagonal directions,
/// halving the step when no direction improves.
fn compass<O: Objective>(chart: &Chart, obj: &O, start: [f64; 2], cfg: &SolverConfig) -> Option<[f64; 2]> {
    let m = chart.dim();
    let directions: &[[f64; 2]] = if m == 1 {
        &[[1.0, 0.0], [-1.0, 0.0]]
    } else {
        &[
            [1.0, 0.0],
            [-1.0, 0.0],
            [0.0, 1.0],
            [0.0, -1.0],
            [1.0, 1.0],
            [-1.0, -1.0],
            [1.0, -1.0],
            [-1.0, 1.0],
        ]
    };
    let tolerance = |x: &[f64]| -> Option<f64> {
        let jet = chart.jet(&x[..m]).ok()?;
        Some(cfg.newton_tol * obj.grad_scale(&jet))
    };
    let mut x = start;
    let mut f = grad_sq(chart, obj, &x[..m])?;
    if f.sqrt() <= 1e-3 * tolerance(&x)? {
        return Some(x);
    }
    let mut h = 0.01 * chart.min_extent();
    let floor = 1e-15 * chart.min_extent();
    for _ in 0..20_000 {
        if h < floor {
            break;
        }
        let mut improved = false;
        for d in directions {
            let mut xn = x;
            for i in 0..m {
                xn[i] += h * d[i];
            }
            if !chart.contains(&xn[..m]) {
                continue;
            }
            if let Some(fnew) = grad_sq(chart, obj, &xn[..m]) {
                if fnew < f {
                    x = chart.wrap(&xn[..m]);
                    f = fnew;
                    improved = true;
                    break;
                }
            }
        }
        if improved {
            h *= 1.5;
        } else {
            h *= 0.5;
        }
    }
    (f.sqrt() <= tolerance(&x)?).then_some(x)
}
