use super::Jet2;
use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Closed-form jet of a chart; receives wrapped chart coordinates.
pub type JetFn = Arc<dyn Fn(&[f64]) -> Jet2 + Send + Sync>;
/// Inverse of a chart near the immersed image: ambient point to chart
/// coordinates (unwrapped, possibly outside the domain).
pub type LocateFn = Arc<dyn Fn(&[f64]) -> [f64; 2] + Send + Sync>;

/// One coordinate axis of a rectangular chart domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn periodic(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            periodic: true,
        }
    }

    pub fn bounded(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn wrap(&self, v: f64) -> f64 {
        if self.periodic {
            let p = self.length();
            let w = (v - self.lo).rem_euclid(p) + self.lo;
            // rem_euclid can round up to exactly the period
            if w >= self.hi {
                self.lo
            } else {
                w
            }
        } else {
            v
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.periodic || (v >= self.lo && v <= self.hi)
    }

    /// Distance along this axis, taking the short way round on periodic axes.
    pub fn distance(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        if self.periodic {
            let p = self.length();
            let d = d.rem_euclid(p);
            d.min(p - d)
        } else {
            d
        }
    }
}

/// A rectangular chart with a closed-form jet.
///
/// `core` is the sub-box in which this chart is the canonical representation
/// of a point (see [`super::ImmersionSpec::canonicalize`]); `locate` maps
/// ambient points back into the chart and is required only for specs with
/// several charts.
#[derive(Clone)]
pub struct Chart {
    axes: Vec<Axis>,
    core: Vec<Axis>,
    eval: JetFn,
    locate: Option<LocateFn>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("axes", &self.axes)
            .field("core", &self.core)
            .field("locate", &self.locate.is_some())
            .finish()
    }
}

impl Chart {
    pub fn new(axes: Vec<Axis>, eval: JetFn) -> Self {
        Chart {
            core: axes.clone(),
            axes,
            eval,
            locate: None,
        }
    }

    pub fn with_core(mut self, core: Vec<Axis>) -> Self {
        self.core = core;
        self
    }

    pub fn with_locate(mut self, locate: LocateFn) -> Self {
        self.locate = Some(locate);
        self
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn wrap(&self, x: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (i, axis) in self.axes.iter().enumerate() {
            out[i] = axis.wrap(x[i]);
        }
        out
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.axes.iter().zip(x).all(|(a, v)| a.contains(*v))
    }

    pub fn in_core(&self, x: &[f64]) -> bool {
        self.core
            .iter()
            .zip(x)
            .all(|(a, v)| a.periodic || (*v >= a.lo && *v <= a.hi))
    }

    /// Exact jet at `x`, wrapping periodic axes.
    pub fn jet(&self, x: &[f64]) -> Result<Jet2> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "chart point has {} coordinates, chart has {}",
                x.len(),
                self.dim()
            )));
        }
        for (axis, (a, v)) in self.axes.iter().zip(x).enumerate() {
            if !v.is_finite() || !a.contains(*v) {
                return Err(Error::OutOfChart {
                    axis,
                    value: *v,
                    lo: a.lo,
                    hi: a.hi,
                });
            }
        }
        let w = self.wrap(x);
        Ok((self.eval)(&w[..self.dim()]))
    }

    /// Closed form evaluated without wrapping or domain checks.
    pub(crate) fn raw_eval(&self, x: &[f64]) -> Jet2 {
        (self.eval)(x)
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.axes
            .iter()
            .enumerate()
            .map(|(i, ax)| ax.distance(a[i], b[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Length of the shortest axis (period for periodic axes).
    pub fn min_extent(&self) -> f64 {
        self.axes
            .iter()
            .map(Axis::length)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn locate(&self, pos: &[f64]) -> Option<[f64; 2]> {
        self.locate.as_ref().map(|f| f(pos))
    }

    /// Same chart composed with `x = scale * x' + offset`.
    pub fn reparametrized(&self, scale: &[f64], offset: &[f64]) -> Chart {
        let map_axis = |i: usize, a: &Axis| {
            let (p, q) = ((a.lo - offset[i]) / scale[i], (a.hi - offset[i]) / scale[i]);
            Axis {
                lo: p.min(q),
                hi: p.max(q),
                periodic: a.periodic,
            }
        };
        let axes = self.axes.iter().enumerate().map(|(i, a)| map_axis(i, a)).collect();
        let core = self.core.iter().enumerate().map(|(i, a)| map_axis(i, a)).collect();
        let inner = self.eval.clone();
        let (s, o) = (scale.to_vec(), offset.to_vec());
        let dim = self.dim();
        let outer = self.axes.clone();
        let eval: JetFn = Arc::new(move |xp: &[f64]| {
            let mut x = [0.0; 2];
            for i in 0..dim {
                x[i] = outer[i].wrap(s[i] * xp[i] + o[i]);
            }
            inner(&x[..dim]).rescaled(xp, &s)
        });
        let locate = self.locate.clone().map(|f| {
            let (s, o) = (scale.to_vec(), offset.to_vec());
            Arc::new(move |p: &[f64]| {
                let x = f(p);
                let mut out = [0.0; 2];
                for i in 0..dim {
                    out[i] = (x[i] - o[i]) / s[i];
                }
                out
            }) as LocateFn
        });
        Chart {
            axes,
            core,
            eval,
            locate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn periodic_distance_wraps() {
        let a = Axis::periodic(0.0, TAU);
        assert!((a.distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((a.wrap(-0.5) - (TAU - 0.5)).abs() < 1e-12);
        assert!(a.wrap(TAU) < TAU);
        let b = Axis::bounded(0.0, 1.0);
        assert_eq!(b.distance(0.1, 0.9), 0.8);
        assert!(!b.contains(1.5));
    }
}
