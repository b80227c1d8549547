use super::{census_at, WalkConfig, WalkSample};
use crate::error::{Error, Result};
use crate::exec;
use crate::focal::{self, NormalLine, Verdict};
use crate::geometry::ImmersionSpec;
use serde::Serialize;

/// Offsets in `u` at which the neighbourhood of a focal point is probed.
pub const LEMMA_RADII: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LemmaVerdict {
    /// Extra points of index `k` and `k - 1` on both sides at every probed
    /// radius up to `radius`.
    Holds { radius: f64 },
    /// Every probed census has exactly `beta` points: the two extra points
    /// never appear (a taut normal, outside the lemma's hypotheses).
    BoundaryTight,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub delta: f64,
    pub counts_before: Vec<usize>,
    pub counts_after: Vec<usize>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaEntry {
    pub cyclic_index: usize,
    pub index: i64,
    pub t: f64,
    pub u: f64,
    /// The lemma's `k`: extra points of index `k` and `k - 1` are expected.
    pub k: usize,
    pub checks: Vec<LemmaCheck>,
    pub verdict: LemmaVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub entries: Vec<LemmaEntry>,
    #[serde(skip)]
    pub(crate) samples: Vec<WalkSample>,
}

impl LemmaReport {
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| matches!(e.verdict, LemmaVerdict::Holds { .. }))
    }
}

/// Probes the census on both sides of every focal point `r_{+-k}` for the
/// extra critical points of index `k` and `k - 1`.
pub fn verify_lemma(spec: &ImmersionSpec, line: &NormalLine, cfg: &WalkConfig) -> Result<LemmaReport> {
    let focal = focal::focal_set(spec, line)?;
    if !cfg.force {
        let (c1, c4) = focal::static_conditions(spec, line, &focal, cfg)?;
        for c in [c1, c4] {
            if c.verdict == Verdict::Fail {
                return Err(Error::RegularityRequired(c.detail));
            }
        }
    }
    let mut probes = Vec::new();
    for (fi, f) in focal.points.iter().enumerate() {
        for (di, d) in LEMMA_RADII.iter().enumerate() {
            probes.push((fi, di, f.u - d));
            probes.push((fi, di, f.u + d));
        }
    }
    let samples: Vec<WalkSample> = exec::map(cfg.solver.exec, &probes, |(_, _, u)| census_at(spec, line, *u, cfg, &[]))
        .into_iter()
        .collect::<Result<_>>()?;
    let beta = spec.betti();
    let mut entries = Vec::new();
    for (fi, f) in focal.points.iter().enumerate() {
        let k = f.index.unsigned_abs() as usize;
        let extra = |counts: &[usize]| k >= 1 && counts[k] > beta[k] && counts[k - 1] > beta[k - 1];
        let mut checks = Vec::new();
        let mut tight = true;
        for (di, d) in LEMMA_RADII.iter().enumerate() {
            let pos = probes.iter().position(|p| p.0 == fi && p.1 == di).expect("probe exists");
            let (before, after) = (&samples[pos], &samples[pos + 1]);
            tight &= before.count() == spec.beta() && after.count() == spec.beta();
            checks.push(LemmaCheck {
                delta: *d,
                counts_before: before.census.counts.clone(),
                counts_after: after.census.counts.clone(),
                holds: extra(&before.census.counts) && extra(&after.census.counts),
            });
        }
        // largest radius such that the claim holds there and at every smaller radius
        let mut radius = None;
        for c in checks.iter().rev() {
            if !c.holds {
                break;
            }
            radius = Some(c.delta);
        }
        let verdict = match radius {
            Some(r) => LemmaVerdict::Holds { radius: r },
            None if tight => LemmaVerdict::BoundaryTight,
            None => LemmaVerdict::Violated,
        };
        entries.push(LemmaEntry {
            cyclic_index: f.cyclic_index,
            index: f.index,
            t: f.t,
            u: f.u,
            k,
            checks,
            verdict,
        });
    }
    Ok(LemmaReport { entries, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{circle2d, ellipse2d};
    use std::f64::consts::PI;

    #[test]
    fn circle_is_boundary_tight() {
        let c = circle2d(1.0).unwrap();
        let line = NormalLine::from_frame(&c, &[0.0], 0.0).unwrap();
        assert!(verify_lemma(&c, &line, &WalkConfig::default()).is_err());
        let report = verify_lemma(&c, &line, &WalkConfig::default().forced()).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].verdict, LemmaVerdict::BoundaryTight);
    }

    #[test]
    fn ellipse_lemma_holds() {
        let e = ellipse2d(2.0, 1.0).unwrap();
        let line = NormalLine::from_frame(&e, &[PI / 4.0], 0.0).unwrap();
        let report = verify_lemma(&e, &line, &WalkConfig::default()).unwrap();
        assert!(report.all_hold(), "{:?}", report.entries);
    }
}
