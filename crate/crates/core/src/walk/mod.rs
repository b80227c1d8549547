//! Walking a compactified normal line.
//!
//! The line `y = p + t n` is parametrized by `u = atan(t)` in `[0, pi)`, so
//! `u` runs from the base point out through the positive half-line, crosses
//! the point at infinity at `u = pi/2` and comes back along the negative
//! half-line. The census signature (index histogram plus the index of the
//! base point) is piecewise constant in `u`; its jumps are located by
//! bisection and classified as births, deaths and index exchanges.

mod lemma;
mod theorem;

pub use lemma::{verify_lemma, LemmaEntry, LemmaReport, LemmaVerdict};
pub use theorem::{excess_report, verify_theorem, ExcessReport, PartOutcome, SegmentSearch, Witness};

use crate::error::{Error, Result};
use crate::exec;
use crate::focal::{self, t_of_u, FocalSet, NormalLine, RegularityCertificate};
use crate::geometry::ImmersionSpec;
use crate::morse::{find_critical_points_seeded, linear_census_seeded, Census, SolverConfig};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub solver: SolverConfig,
    /// Uniform samples on the `u` circle before refinement.
    pub initial_samples: usize,
    /// Bracket width at which bisection stops.
    pub event_tol: f64,
    /// Distance in `u` within which an index exchange is matched to a focal
    /// point.
    pub match_tol: f64,
    /// First witness-search density per localizing segment.
    pub witness_samples: usize,
    /// Densest witness search before giving up.
    pub max_witness_samples: usize,
    /// Beyond `|t| > far_factor * diameter` the census is the height census.
    pub far_factor: f64,
    /// Tolerance of the third-derivative test for fold singularities.
    pub a2_tolerance: f64,
    /// Accepted range of the collision exponent of a birth/death pair.
    pub sqrt_law: (f64, f64),
    /// Walk normals whose certificate has a failed condition.
    pub force: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            solver: SolverConfig::default(),
            initial_samples: 256,
            event_tol: 1e-8,
            match_tol: 1e-5,
            witness_samples: 64,
            max_witness_samples: 1024,
            far_factor: 1e6,
            a2_tolerance: 1e-6,
            sqrt_law: (0.35, 0.65),
            force: false,
        }
    }
}

impl WalkConfig {
    pub fn forced(mut self) -> Self {
        self.force = true;
        self
    }
}

/// Piecewise-constant data tracked along the walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub counts: Vec<usize>,
    /// Index of the base point.
    pub mu_p: Option<usize>,
}

/// Census at one parameter of the walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSample {
    pub u: f64,
    pub t: f64,
    pub census: Census,
    pub mu_p: Option<usize>,
}

impl WalkSample {
    pub fn signature(&self) -> Signature {
        Signature {
            counts: self.census.counts.clone(),
            mu_p: self.mu_p,
        }
    }

    pub fn count(&self) -> usize {
        self.census.count()
    }

    /// Query point; `None` in the far zone where the census is a height
    /// census.
    pub fn query(&self, line: &NormalLine) -> Option<Vec<f64>> {
        self.t.is_finite().then(|| line.point_at(self.t))
    }
}

impl Serialize for WalkSample {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("WalkSample", 5)?;
        st.serialize_field("u", &self.u)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("count", &self.census.count())?;
        st.serialize_field("counts_by_index", &self.census.counts)?;
        st.serialize_field("mu_p", &self.mu_p)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Birth,
    Death,
    IndexExchange,
    InfinityCrossing,
}

/// A jump of the census signature along the walk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkEvent {
    pub u: f64,
    /// Width of the final bisection bracket.
    pub width: f64,
    pub kind: EventKind,
    /// Colliding index pair `(k, k - 1)`; for an infinity crossing the base
    /// point index before and after.
    pub indices: (usize, usize),
    /// Cyclic index of the matching focal point of an index exchange.
    pub focal_match: Option<usize>,
    pub count_before: usize,
    pub count_after: usize,
    #[serde(skip)]
    pub(crate) bracket: Option<Box<(WalkSample, WalkSample)>>,
}

impl WalkEvent {
    pub fn count_change(&self) -> i64 {
        self.count_after as i64 - self.count_before as i64
    }
}

/// Samples and located events of one pass over the compactified line.
#[derive(Debug, Clone)]
pub(crate) struct Scan {
    pub samples: Vec<WalkSample>,
    pub events: Vec<WalkEvent>,
    pub infinity_consistent: bool,
}

/// Full walk along one normal.
#[derive(Debug, Clone, Serialize)]
pub struct WalkReport {
    pub normal: NormalLine,
    pub focal: FocalSet,
    pub regularity: RegularityCertificate,
    pub forced: bool,
    pub samples: Vec<WalkSample>,
    pub events: Vec<WalkEvent>,
    /// Direct censuses on both sides of infinity match the height census
    /// and are related by `mu -> m - mu`.
    pub infinity_consistent: bool,
    /// Index exchanges that break the base point's index ladder.
    pub ladder_violations: Vec<String>,
    pub max_count: usize,
}

/// Parameter offset from `pi/2` of the height-census samples.
fn far_offset(spec: &ImmersionSpec, cfg: &WalkConfig) -> f64 {
    1.0 / (2.0 * cfg.far_factor * spec.diameter())
}

/// Newton seeds that keep the base point and its near-degenerate partners
/// in every census along the line.
pub(crate) fn base_seeds(spec: &ImmersionSpec, line: &NormalLine) -> Vec<(usize, [f64; 2])> {
    let (chart, x) = line.seed();
    let mut seeds = vec![(chart, x)];
    let extent = spec.chart(chart).min_extent();
    let m = spec.m();
    for axis in 0..m {
        for s in [1e-1, 1e-2, 1e-3, 1e-4] {
            for sign in [-1.0, 1.0] {
                let mut xs = x;
                xs[axis] += sign * s * extent;
                if spec.chart(chart).contains(&xs[..m]) {
                    seeds.push((chart, spec.chart(chart).wrap(&xs[..m])));
                }
            }
        }
    }
    seeds
}

/// Census at parameter `u` of the compactified line, with `extra` Newton
/// seeds on top of the base-point seeds.
pub(crate) fn census_at(
    spec: &ImmersionSpec,
    line: &NormalLine,
    u: f64,
    cfg: &WalkConfig,
    extra: &[(usize, [f64; 2])],
) -> Result<WalkSample> {
    let u = u.rem_euclid(PI);
    let t = t_of_u(u);
    let mut seeds = base_seeds(spec, line);
    seeds.extend_from_slice(extra);
    let census = if t.abs() > cfg.far_factor * spec.diameter() {
        let lin = linear_census_seeded(spec, &line.direction, &cfg.solver, &seeds)?;
        if t > 0.0 {
            lin.flipped(spec.m(), cfg.solver.degeneracy_threshold)
        } else {
            lin
        }
    } else {
        find_critical_points_seeded(spec, &line.point_at(t), &cfg.solver, &seeds)?
    };
    let (kc, xc) = spec.canonicalize(line.chart, &line.x)?;
    let radius = cfg.solver.dedup_radius * spec.chart(kc).min_extent();
    let mu_p = census.find_near(spec, kc, &xc[..spec.m()], radius).map(|p| p.mu);
    Ok(WalkSample { u, t, census, mu_p })
}

fn seeds_of(samples: &[&WalkSample]) -> Vec<(usize, [f64; 2])> {
    let mut out = Vec::new();
    for s in samples {
        for p in &s.census.points {
            let mut x = [0.0; 2];
            x[..p.x.len()].copy_from_slice(&p.x);
            out.push((p.chart, x));
        }
    }
    out
}

/// Census at a grid parameter, nudged off isolated non-Morse parameters.
fn robust_sample(spec: &ImmersionSpec, line: &NormalLine, u: f64, cfg: &WalkConfig) -> Result<WalkSample> {
    let mut last = None;
    for k in 0..4 {
        match census_at(spec, line, u + k as f64 * 1e-7, cfg, &[]) {
            Ok(s) if s.census.morse_ok => return Ok(s),
            Ok(s) => last = Some(Ok(s)),
            Err(e @ Error::NonMorsePoint(_)) => last = Some(Err(e)),
            Err(e) => return Err(e),
        }
    }
    last.expect("at least one attempt")
}

/// Sample parameters: uniform grid, focal neighbourhoods, and the two
/// layers on each side of infinity (direct census, then height census).
fn sample_parameters(spec: &ImmersionSpec, focal: &FocalSet, cfg: &WalkConfig) -> Vec<f64> {
    let n = cfg.initial_samples.max(4);
    let eps = far_offset(spec, cfg);
    let mut us: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) * PI / n as f64).collect();
    for f in &focal.points {
        for d in [1e-5, 1e-4, 1e-3, 1e-2] {
            us.push(f.u - d);
            us.push(f.u + d);
        }
    }
    us.retain(|u| *u > 0.0 && *u < PI && (u - PI / 2.0).abs() > 2.0 * eps);
    us.extend([PI / 2.0 - 2.0 * eps, PI / 2.0 - eps, PI / 2.0 + eps, PI / 2.0 + 2.0 * eps]);
    us.sort_by(f64::total_cmp);
    us.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    us
}

pub(crate) fn scan(spec: &ImmersionSpec, line: &NormalLine, focal: &FocalSet, cfg: &WalkConfig) -> Result<Scan> {
    let us = sample_parameters(spec, focal, cfg);
    let samples: Vec<WalkSample> = exec::map(cfg.solver.exec, &us, |u| robust_sample(spec, line, *u, cfg))
        .into_iter()
        .collect::<Result<_>>()?;
    let eps = far_offset(spec, cfg);
    let m = spec.m();
    let mut events = Vec::new();
    let mut infinity_consistent = true;
    for i in 0..samples.len() {
        let a = &samples[i];
        let (b, wrap) = if i + 1 < samples.len() {
            (samples[i + 1].clone(), false)
        } else {
            let mut first = samples[0].clone();
            first.u += PI;
            (first, true)
        };
        let near_inf = |u: f64| (u - PI / 2.0).abs() < 2.5 * eps;
        if near_inf(a.u) && near_inf(b.u) && !wrap {
            let crossing = a.u < PI / 2.0 && b.u > PI / 2.0;
            if crossing {
                let flipped: Vec<usize> = a.census.index_multiset().iter().map(|mu| m - mu).rev().collect();
                if flipped != b.census.index_multiset() {
                    infinity_consistent = false;
                }
                events.push(WalkEvent {
                    u: PI / 2.0,
                    width: b.u - a.u,
                    kind: EventKind::InfinityCrossing,
                    indices: (a.mu_p.unwrap_or(0), b.mu_p.unwrap_or(0)),
                    focal_match: None,
                    count_before: a.count(),
                    count_after: b.count(),
                    bracket: None,
                });
            } else if a.signature() != b.signature() {
                // direct and height censuses disagree inside the far zone
                infinity_consistent = false;
            }
            continue;
        }
        if a.signature() != b.signature() {
            events.extend(refine(spec, line, focal, cfg, a.clone(), b, 0)?);
        }
    }
    events.sort_by(|a, b| a.u.total_cmp(&b.u));
    Ok(Scan {
        samples,
        events,
        infinity_consistent,
    })
}

/// Bisects `[a.u, b.u]` until the bracket is below the event tolerance or
/// the midpoint census is degenerate, splitting when a third signature
/// appears.
fn refine(
    spec: &ImmersionSpec,
    line: &NormalLine,
    focal: &FocalSet,
    cfg: &WalkConfig,
    mut a: WalkSample,
    mut b: WalkSample,
    depth: usize,
) -> Result<Vec<WalkEvent>> {
    let (sa, sb) = (a.signature(), b.signature());
    while b.u - a.u > cfg.event_tol {
        let mid = 0.5 * (a.u + b.u);
        let seeds = seeds_of(&[&a, &b]);
        let s = match census_at(spec, line, mid, cfg, &seeds) {
            Ok(s) if s.census.morse_ok => s,
            Ok(_) | Err(Error::NonMorsePoint(_)) => break,
            Err(e) => return Err(e),
        };
        let sm = s.signature();
        let u_mid = s.u + if mid >= PI { PI } else { 0.0 };
        let s = WalkSample { u: u_mid, ..s };
        if sm == sa {
            a = s;
        } else if sm == sb {
            b = s;
        } else {
            if depth >= 16 {
                return Err(Error::UnresolvedEvent {
                    u: mid,
                    detail: "nested signature changes do not separate".into(),
                });
            }
            let mut out = refine(spec, line, focal, cfg, a, s.clone(), depth + 1)?;
            out.extend(refine(spec, line, focal, cfg, s, b, depth + 1)?);
            return Ok(out);
        }
    }
    classify(spec, focal, cfg, a, b).map(|e| vec![e])
}

fn classify(spec: &ImmersionSpec, focal: &FocalSet, cfg: &WalkConfig, a: WalkSample, b: WalkSample) -> Result<WalkEvent> {
    let u = (0.5 * (a.u + b.u)).rem_euclid(PI);
    let width = b.u - a.u;
    let (ca, cb) = (&a.census.counts, &b.census.counts);
    let diff: Vec<i64> = ca.iter().zip(cb).map(|(x, y)| *y as i64 - *x as i64).collect();
    let changed: Vec<usize> = (0..diff.len()).filter(|&i| diff[i] != 0).collect();
    let unresolved = |detail: String| Error::UnresolvedEvent { u, detail };
    let base = |kind, indices, focal_match| WalkEvent {
        u,
        width,
        kind,
        indices,
        focal_match,
        count_before: a.count(),
        count_after: b.count(),
        bracket: None,
    };
    if changed.is_empty() {
        let (Some(pa), Some(pb)) = (a.mu_p, b.mu_p) else {
            return Err(unresolved("base point missing from a census".into()));
        };
        let step = pa.abs_diff(pb);
        let matched = focal
            .points
            .iter()
            .filter(|f| f.u.rem_euclid(PI).abs_diff_u(u) <= cfg.match_tol.max(width))
            .min_by(|x, y| x.u.abs_diff_u(u).total_cmp(&y.u.abs_diff_u(u)));
        if let Some(f) = matched {
            if f.nu != step {
                return Err(unresolved(format!(
                    "base index jumps by {step} at a focal point of multiplicity {}",
                    f.nu
                )));
            }
        } else if step != 1 {
            return Err(unresolved(format!("base index jumps by {step} away from focal points")));
        }
        return Ok(base(EventKind::IndexExchange, (pa.max(pb), pa.min(pb)), matched.map(|f| f.cyclic_index)));
    }
    if a.mu_p != b.mu_p {
        return Err(unresolved("count change coincides with a base index change".into()));
    }
    if changed.len() == 2 && changed[1] == changed[0] + 1 && diff[changed[0]] == diff[changed[1]] && diff[changed[0]].abs() == 1 {
        let kind = if diff[changed[0]] > 0 { EventKind::Birth } else { EventKind::Death };
        let mut e = base(kind, (changed[1], changed[0]), None);
        e.bracket = Some(Box::new((a, b)));
        let _ = spec;
        return Ok(e);
    }
    Err(unresolved(format!("compound census change {ca:?} -> {cb:?}")))
}

trait CircleDistance {
    fn abs_diff_u(self, other: f64) -> f64;
}

impl CircleDistance for f64 {
    /// Distance on the `u` circle of length `pi`.
    fn abs_diff_u(self, other: f64) -> f64 {
        let d = (self - other).rem_euclid(PI);
        d.min(PI - d)
    }
}

/// Walks the normal, certifying it first unless `cfg.force` is set.
pub fn walk(spec: &ImmersionSpec, line: &NormalLine, cfg: &WalkConfig) -> Result<WalkReport> {
    let focal = focal::focal_set(spec, line)?;
    let (c1, c4) = focal::static_conditions(spec, line, &focal, cfg)?;
    if !cfg.force {
        for c in [&c1, &c4] {
            if c.verdict == focal::Verdict::Fail {
                return Err(Error::RegularityRequired(c.detail.clone()));
            }
        }
    }
    let scan = scan(spec, line, &focal, cfg)?;
    let regularity = focal::certify(spec, line, c1, c4, Ok(&scan), cfg);
    if !cfg.force && regularity.has_failure() {
        return Err(Error::RegularityRequired(regularity.summary()));
    }
    let ladder_violations = ladder(spec, &scan.events);
    let max_count = scan.samples.iter().map(|s| s.count()).max().unwrap_or(0);
    Ok(WalkReport {
        normal: line.clone(),
        focal,
        regularity,
        forced: cfg.force,
        samples: scan.samples,
        events: scan.events,
        infinity_consistent: scan.infinity_consistent,
        ladder_violations,
        max_count,
    })
}

/// After an exchange at the focal point with cyclic index `c`, the base
/// point has index `c` on the positive half-line and `m - c` on the
/// negative one.
fn ladder(spec: &ImmersionSpec, events: &[WalkEvent]) -> Vec<String> {
    let m = spec.m();
    let mut out = Vec::new();
    for e in events.iter().filter(|e| e.kind == EventKind::IndexExchange) {
        let Some(c) = e.focal_match else {
            out.push(format!("index exchange at u = {:.9} matches no focal point", e.u));
            continue;
        };
        let (hi, lo) = e.indices;
        let expected = if e.u < PI / 2.0 { (c, c - 1) } else { (m + 1 - c, m - c) };
        if (hi, lo) != expected && (hi - lo) == 1 {
            out.push(format!(
                "exchange at r_{c} (u = {:.9}) moves the base index between {lo} and {hi}, expected {} and {}",
                e.u, expected.1, expected.0
            ));
        }
    }
    out
}
