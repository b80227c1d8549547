//! Squared-distance functions and their critical points.
//!
//! A point `y` lies on the normal at `p` exactly when `p` is a critical point
//! of `d_y(x) = |x - y|^2`, so the census of critical points of `d_y` is the
//! set of concurrent normals through `y`. Height functions `x -> <x, n>`
//! describe the same census for `y` at infinity in direction `n`.

mod objective;
mod oracle;
mod solver;

pub use objective::{sq_dist_jet, DistanceJet};
pub use oracle::brute_force_census;
pub use solver::{find_critical_points, find_critical_points_seeded, linear_census};
pub(crate) use solver::linear_census_seeded;

pub(crate) use objective::{Height, Objective, SquaredDistance};

use crate::exec::ExecMode;
use crate::geometry::ImmersionSpec;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

/// Knobs of the multi-start Newton census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Seed grid density per chart axis; `None` picks 48 for curves and 16
    /// for surfaces.
    pub seeds_per_axis: Option<usize>,
    /// Relative gradient-norm tolerance.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Identification radius as a fraction of the shortest chart extent.
    pub dedup_radius: f64,
    /// Relative Hessian margin below which a critical point is degenerate.
    pub degeneracy_threshold: f64,
    /// This many distinct degenerate critical points are read as a
    /// non-isolated critical set.
    pub continuum_points: usize,
    /// Seed-density doublings tried when a Morse census fails the Euler or
    /// Betti checks.
    pub retries: usize,
    pub exec: ExecMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seeds_per_axis: None,
            newton_tol: 1e-10,
            max_newton_iters: 60,
            dedup_radius: 1e-4,
            degeneracy_threshold: 1e-7,
            continuum_points: 3,
            retries: 2,
            exec: ExecMode::Parallel,
        }
    }
}

impl SolverConfig {
    pub fn seeds_for(&self, m: usize) -> usize {
        self.seeds_per_axis.unwrap_or(if m == 1 { 48 } else { 16 })
    }

    pub fn sequential(mut self) -> Self {
        self.exec = ExecMode::Sequential;
        self
    }
}

/// What the census is of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensusKind {
    /// Squared distance to the query point.
    Distance,
    /// Height function along the query direction.
    Height,
}

/// One critical point, i.e. one normal through the query point.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    /// Canonical chart of the point.
    pub chart: usize,
    pub x: Vec<f64>,
    pub pos: Vec<f64>,
    pub value: f64,
    /// Morse index: number of negative chart-Hessian eigenvalues.
    pub mu: usize,
    /// Smallest absolute Hessian eigenvalue over the reference scale.
    pub degeneracy_margin: f64,
    pub grad_norm: f64,
}

impl Serialize for CriticalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CriticalPoint", 6)?;
        st.serialize_field("chart", &self.chart)?;
        st.serialize_field("x", &self.x)?;
        st.serialize_field("pos", &self.pos)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("mu", &self.mu)?;
        st.serialize_field("margin", &self.degeneracy_margin)?;
        st.end()
    }
}

/// All critical points found for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Census {
    pub kind: CensusKind,
    /// Query point (distance) or direction (height).
    pub y: Vec<f64>,
    /// Canonically ordered by chart, then chart coordinates.
    pub points: Vec<CriticalPoint>,
    /// `counts[i]` is the number of critical points of index `i`.
    pub counts: Vec<usize>,
    /// All points nondegenerate.
    pub morse_ok: bool,
}

impl Census {
    pub(crate) fn from_points(kind: CensusKind, y: Vec<f64>, m: usize, points: Vec<CriticalPoint>, threshold: f64) -> Self {
        let mut counts = vec![0; m + 1];
        for p in &points {
            counts[p.mu.min(m)] += 1;
        }
        let morse_ok = points.iter().all(|p| p.degeneracy_margin >= threshold);
        Census {
            kind,
            y,
            points,
            counts,
            morse_ok,
        }
    }

    /// Same points with every index `mu` replaced by `m - mu`.
    pub fn flipped(&self, m: usize, threshold: f64) -> Census {
        let points = self
            .points
            .iter()
            .map(|p| CriticalPoint {
                mu: m - p.mu.min(m),
                ..p.clone()
            })
            .collect();
        Census::from_points(self.kind, self.y.clone(), m, points, threshold)
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// `sum (-1)^mu` over the critical points.
    pub fn euler_sum(&self) -> i64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 0 { *c as i64 } else { -(*c as i64) })
            .sum()
    }

    /// Sorted list of Morse indices.
    pub fn index_multiset(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.points.iter().map(|p| p.mu).collect();
        v.sort_unstable();
        v
    }

    /// Euler characteristic and Morse lower bounds `c_i >= beta_i`.
    pub fn satisfies_morse_counting(&self, spec: &ImmersionSpec) -> bool {
        self.euler_sum() == spec.euler()
            && self.counts.iter().zip(spec.betti()).all(|(c, b)| c >= b)
    }

    /// Number of normals beyond the total Betti number (may be negative only
    /// for incomplete censuses).
    pub fn excess(&self, spec: &ImmersionSpec) -> i64 {
        self.count() as i64 - spec.beta() as i64
    }

    /// Closest critical point to `(chart, x)` within chart distance `radius`.
    pub fn find_near(&self, spec: &ImmersionSpec, chart: usize, x: &[f64], radius: f64) -> Option<&CriticalPoint> {
        let c = spec.chart(chart);
        self.points
            .iter()
            .filter(|p| p.chart == chart)
            .map(|p| (c.distance(&p.x, x), p))
            .filter(|(d, _)| *d <= radius)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, p)| p)
    }
}

impl Serialize for Census {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Census", 6)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("y", &self.y)?;
        st.serialize_field("count", &self.count())?;
        st.serialize_field("counts_by_index", &self.counts)?;
        st.serialize_field("morse_ok", &self.morse_ok)?;
        st.serialize_field("points", &self.points)?;
        st.end()
    }
}
