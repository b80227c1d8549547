//! Closed-form example immersions.

use super::{Axis, Chart, ImmersionSpec, Jet2, JetFn, LocateFn};
use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Names accepted by [`builtin`]; `tube` needs a child manifest and is
/// built through [`super::Manifest`].
pub const BUILTIN_NAMES: &[&str] = &[
    "circle2d",
    "ellipse2d",
    "circle3d",
    "ellipse3d",
    "sphere",
    "ellipsoid",
    "torus",
    "graph2d",
    "tube",
];

/// Width of the excluded band around the poles of the polar charts.
const POLE_BAND: f64 = 0.05;
/// Polar angle below which a point is handed to the companion chart.
const POLE_HANDOFF: f64 = 0.35;

pub fn builtin(name: &str, params: &[f64]) -> Result<ImmersionSpec> {
    let want = |k: usize| -> Result<()> {
        if params.len() == k {
            Ok(())
        } else {
            Err(Error::BadParams(format!(
                "{name} takes {k} parameter(s), got {}",
                params.len()
            )))
        }
    };
    match name {
        "circle2d" => {
            want(1)?;
            circle2d(params[0])
        }
        "ellipse2d" => {
            want(2)?;
            ellipse2d(params[0], params[1])
        }
        "circle3d" => {
            want(1)?;
            circle3d(params[0])
        }
        "ellipse3d" => {
            want(2)?;
            ellipse3d(params[0], params[1])
        }
        "sphere" => {
            want(1)?;
            sphere(params[0])
        }
        "ellipsoid" => {
            want(3)?;
            ellipsoid(params[0], params[1], params[2])
        }
        "torus" => {
            want(2)?;
            torus(params[0], params[1])
        }
        "graph2d" => {
            want(2)?;
            graph2d(params[0], params[1])
        }
        "tube" => Err(Error::BadParams(
            "tube needs a child manifest: {\"name\": \"tube\", \"child\": {...}, \"r\": ...}".into(),
        )),
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

fn positive(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite() && *v > 0.0) {
        Ok(())
    } else {
        Err(Error::BadParams(format!(
            "{name}: parameters must be positive, got {values:?}"
        )))
    }
}

fn planar_ellipse(a: f64, b: f64, ambient: usize) -> JetFn {
    Arc::new(move |x: &[f64]| {
        let (s, c) = x[0].sin_cos();
        let mut pos = [a * c, b * s, 0.0];
        let mut d1 = [-a * s, b * c, 0.0];
        let mut d2 = [-a * c, -b * s, 0.0];
        if ambient == 2 {
            return Jet2::curve(x[0], &pos[..2], &d1[..2], &d2[..2]);
        }
        pos[2] = 0.0;
        d1[2] = 0.0;
        d2[2] = 0.0;
        Jet2::curve(x[0], &pos, &d1, &d2)
    })
}

fn curve_spec(name: &str, params: Vec<f64>, a: f64, b: f64, ambient: usize) -> Result<ImmersionSpec> {
    let chart = Chart::new(vec![Axis::periodic(0.0, TAU)], planar_ellipse(a, b, ambient));
    ImmersionSpec::new(name, params, ambient, vec![chart], vec![1, 1], true)
}

/// Circle of radius `r` in the plane, `(r cos s, r sin s)`.
pub fn circle2d(r: f64) -> Result<ImmersionSpec> {
    positive("circle2d", &[r])?;
    curve_spec("circle2d", vec![r], r, r, 2)
}

/// Ellipse `(a cos s, b sin s)` in the plane.
pub fn ellipse2d(a: f64, b: f64) -> Result<ImmersionSpec> {
    positive("ellipse2d", &[a, b])?;
    curve_spec("ellipse2d", vec![a, b], a, b, 2)
}

/// Circle of radius `r` in the plane `z = 0` of `R^3`.
pub fn circle3d(r: f64) -> Result<ImmersionSpec> {
    positive("circle3d", &[r])?;
    curve_spec("circle3d", vec![r], r, r, 3)
}

/// Ellipse `(a cos s, b sin s, 0)` in `R^3`.
pub fn ellipse3d(a: f64, b: f64) -> Result<ImmersionSpec> {
    positive("ellipse3d", &[a, b])?;
    curve_spec("ellipse3d", vec![a, b], a, b, 3)
}

/// Polar chart `(phi, theta)` of the ellipsoid with semi-axes `semi`, whose
/// polar axis is the ambient coordinate `perm[2]`: coordinate `perm[0]` is
/// `A sin(theta) cos(phi)`, `perm[1]` is `B sin(theta) sin(phi)` and
/// `perm[2]` is `C cos(theta)` with `(A, B, C) = semi[perm]`.
fn polar_chart(semi: [f64; 3], perm: [usize; 3]) -> Chart {
    let (ka, kb, kc) = (semi[perm[0]], semi[perm[1]], semi[perm[2]]);
    let eval: JetFn = Arc::new(move |x: &[f64]| {
        let (sp, cp) = x[0].sin_cos();
        let (st, ct) = x[1].sin_cos();
        let local = |u: [f64; 3]| {
            let mut out = [0.0; 3];
            out[perm[0]] = u[0];
            out[perm[1]] = u[1];
            out[perm[2]] = u[2];
            out
        };
        let pos = local([ka * st * cp, kb * st * sp, kc * ct]);
        let d_phi = local([-ka * st * sp, kb * st * cp, 0.0]);
        let d_theta = local([ka * ct * cp, kb * ct * sp, -kc * st]);
        let d_pp = local([-ka * st * cp, -kb * st * sp, 0.0]);
        let d_pt = local([-ka * ct * sp, kb * ct * cp, 0.0]);
        let d_tt = local([-ka * st * cp, -kb * st * sp, -kc * ct]);
        Jet2::surface([x[0], x[1]], &pos, [&d_phi, &d_theta], [&d_pp, &d_pt, &d_tt])
    });
    let locate: LocateFn = Arc::new(move |p: &[f64]| {
        let theta = (p[perm[2]] / kc).clamp(-1.0, 1.0).acos();
        let phi = (p[perm[1]] / kb).atan2(p[perm[0]] / ka).rem_euclid(TAU);
        [phi, theta]
    });
    Chart::new(
        vec![Axis::periodic(0.0, TAU), Axis::bounded(POLE_BAND, PI - POLE_BAND)],
        eval,
    )
    .with_locate(locate)
}

fn polar_spec(name: &str, params: Vec<f64>, semi: [f64; 3]) -> Result<ImmersionSpec> {
    let primary = polar_chart(semi, [0, 1, 2]).with_core(vec![
        Axis::periodic(0.0, TAU),
        Axis::bounded(POLE_HANDOFF, PI - POLE_HANDOFF),
    ]);
    // polar axis along x; an even permutation keeps the orientation
    let companion = polar_chart(semi, [1, 2, 0]);
    ImmersionSpec::new(name, params, 3, vec![primary, companion], vec![1, 0, 1], true)
}

/// Round sphere of radius `r`; chart `(phi, theta)` with pole bands, plus a
/// companion chart with polar axis along `x`.
pub fn sphere(r: f64) -> Result<ImmersionSpec> {
    positive("sphere", &[r])?;
    polar_spec("sphere", vec![r], [r, r, r])
}

/// Ellipsoid with semi-axes `a, b, c` along `x, y, z`.
pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<ImmersionSpec> {
    positive("ellipsoid", &[a, b, c])?;
    polar_spec("ellipsoid", vec![a, b, c], [a, b, c])
}

/// Torus of revolution about the `z` axis, chart `(u, v)`:
/// `((R + r cos v) cos u, (R + r cos v) sin u, r sin v)`.
pub fn torus(big_r: f64, r: f64) -> Result<ImmersionSpec> {
    positive("torus", &[big_r, r])?;
    if r >= big_r {
        return Err(Error::BadParams(format!(
            "torus: tube radius {r} must be below the core radius {big_r}"
        )));
    }
    let eval: JetFn = Arc::new(move |x: &[f64]| {
        let (su, cu) = x[0].sin_cos();
        let (sv, cv) = x[1].sin_cos();
        let w = big_r + r * cv;
        let pos = [w * cu, w * su, r * sv];
        let du = [-w * su, w * cu, 0.0];
        let dv = [-r * sv * cu, -r * sv * su, r * cv];
        let duu = [-w * cu, -w * su, 0.0];
        let duv = [r * sv * su, -r * sv * cu, 0.0];
        let dvv = [-r * cv * cu, -r * cv * su, -r * sv];
        Jet2::surface([x[0], x[1]], &pos, [&du, &dv], [&duu, &duv, &dvv])
    });
    let chart = Chart::new(vec![Axis::periodic(0.0, TAU), Axis::periodic(0.0, TAU)], eval);
    ImmersionSpec::new("torus", vec![big_r, r], 3, vec![chart], vec![1, 2, 1], true)
}

/// Graph of `z = (a x^2 + b y^2) / 2` over `[-1, 1]^2`. A disc with
/// boundary: useful for local differential checks, excluded from the Morse
/// counting statements.
pub fn graph2d(a: f64, b: f64) -> Result<ImmersionSpec> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::BadParams("graph2d: parameters must be finite".into()));
    }
    let eval: JetFn = Arc::new(move |x: &[f64]| {
        let (u, v) = (x[0], x[1]);
        let pos = [u, v, 0.5 * (a * u * u + b * v * v)];
        Jet2::surface(
            [u, v],
            &pos,
            [&[1.0, 0.0, a * u], &[0.0, 1.0, b * v]],
            [&[0.0, 0.0, a], &[0.0; 3], &[0.0, 0.0, b]],
        )
    });
    let chart = Chart::new(vec![Axis::bounded(-1.0, 1.0), Axis::bounded(-1.0, 1.0)], eval);
    ImmersionSpec::new("graph2d", vec![a, b], 3, vec![chart], vec![1, 0, 0], false)
}
