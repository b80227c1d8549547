use super::{census_at, verify_lemma, walk, LemmaReport, WalkConfig, WalkReport, WalkSample};
use crate::error::{Error, Result};
use crate::exec;
use crate::focal::NormalLine;
use crate::geometry::ImmersionSpec;
use crate::morse::Census;
use serde::Serialize;
use std::f64::consts::PI;

/// A query point on the normal with many concurrent normals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub u: f64,
    pub t: f64,
    pub y: Vec<f64>,
    pub count: usize,
    pub excess: i64,
    pub census: Census,
}

impl Witness {
    fn from_sample(spec: &ImmersionSpec, line: &NormalLine, s: &WalkSample) -> Option<Self> {
        let y = s.query(line)?;
        Some(Witness {
            u: s.u,
            t: s.t,
            y,
            count: s.count(),
            excess: s.census.excess(spec),
            census: s.census.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PartOutcome {
    Pass { witness: Box<Witness> },
    Fail { max_count: usize, required: usize, detail: String },
    NotApplicable { reason: String },
}

impl PartOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, PartOutcome::Pass { .. })
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, PartOutcome::Fail { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            PartOutcome::Pass { .. } => "PASS",
            PartOutcome::Fail { .. } => "FAIL",
            PartOutcome::NotApplicable { .. } => "N/A",
        }
    }
}

/// Excess-4 search on the segment between two consecutive focal points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSearch {
    pub from: usize,
    pub to: usize,
    /// Parameter range in `u`, the upper end possibly beyond `pi` when the
    /// segment passes through infinity.
    pub u_range: (f64, f64),
    pub samples: usize,
    pub max_count: usize,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcessReport {
    pub walk: WalkReport,
    pub lemma: LemmaReport,
    pub part1: PartOutcome,
    pub part2: PartOutcome,
    pub trivial_index: Option<usize>,
    pub segments: Vec<SegmentSearch>,
}

impl ExcessReport {
    pub fn passed(&self) -> bool {
        !self.part1.is_fail() && !self.part2.is_fail()
    }
}

/// Like [`excess_report`], but a missing witness is an error.
pub fn verify_theorem(spec: &ImmersionSpec, line: &NormalLine, cfg: &WalkConfig) -> Result<ExcessReport> {
    let report = excess_report(spec, line, cfg)?;
    for (name, part) in [("part 1", &report.part1), ("part 2", &report.part2)] {
        if let PartOutcome::Fail { detail, .. } = part {
            return Err(Error::WitnessNotFound(format!("{name}: {detail}")));
        }
    }
    Ok(report)
}

/// Walks the normal, checks the lemma and searches witnesses for both parts
/// of the excess statement.
pub fn excess_report(spec: &ImmersionSpec, line: &NormalLine, cfg: &WalkConfig) -> Result<ExcessReport> {
    let walk = walk(spec, line, cfg)?;
    let lemma = verify_lemma(spec, line, cfg)?;
    let beta = spec.beta();

    let candidates = walk.samples.iter().chain(&lemma.samples);
    let part1 = match best(candidates.filter(|s| s.t.is_finite() && s.census.morse_ok)) {
        Some(s) if s.count() >= beta + 2 => PartOutcome::Pass {
            witness: Box::new(Witness::from_sample(spec, line, s).expect("finite sample")),
        },
        best_sample => PartOutcome::Fail {
            max_count: best_sample.map_or(0, |s| s.count()),
            required: beta + 2,
            detail: format!(
                "largest census along the normal has {} points, need {}",
                best_sample.map_or(0, |s| s.count()),
                beta + 2
            ),
        },
    };

    let trivial_index = spec.trivial_indices().first().copied();
    let (part2, segments) = match trivial_index {
        None => (
            PartOutcome::NotApplicable {
                reason: "no Betti number vanishes strictly between 0 and m".into(),
            },
            Vec::new(),
        ),
        Some(i) => part_two(spec, line, cfg, &walk, i)?,
    };
    Ok(ExcessReport {
        walk,
        lemma,
        part1,
        part2,
        trivial_index,
        segments,
    })
}

/// Largest census, earliest in `u` on ties.
fn best<'a>(samples: impl Iterator<Item = &'a WalkSample>) -> Option<&'a WalkSample> {
    samples.fold(None, |acc: Option<&WalkSample>, s| match acc {
        Some(a) if a.count() > s.count() || (a.count() == s.count() && a.u <= s.u) => Some(a),
        _ => Some(s),
    })
}

fn part_two(
    spec: &ImmersionSpec,
    line: &NormalLine,
    cfg: &WalkConfig,
    walk: &WalkReport,
    i: usize,
) -> Result<(PartOutcome, Vec<SegmentSearch>)> {
    let m = spec.m();
    let required = spec.beta() + 4;
    let mut pairs = vec![(i, i + 1)];
    if (m - i, m - i + 1) != (i, i + 1) {
        pairs.push((m - i, m - i + 1));
    }
    let mut segments = Vec::new();
    for (from, to) in pairs {
        let (Some(a), Some(b)) = (walk.focal.by_cyclic(from), walk.focal.by_cyclic(to)) else {
            return Ok((
                PartOutcome::Fail {
                    max_count: 0,
                    required,
                    detail: format!("focal points r_{from} and r_{to} are not both present"),
                },
                segments,
            ));
        };
        let lo = a.u;
        let hi = if b.u > a.u { b.u } else { b.u + PI };
        segments.push(search_segment(spec, line, cfg, walk, (from, to), (lo, hi), required)?);
    }
    let outcome = if let Some(missing) = segments.iter().find(|s| s.witness.is_none()) {
        PartOutcome::Fail {
            max_count: missing.max_count,
            required,
            detail: format!(
                "no census with {required} points on [r_{}, r_{}] after {} samples (largest {})",
                missing.from, missing.to, missing.samples, missing.max_count
            ),
        }
    } else {
        let w = segments
            .iter()
            .filter_map(|s| s.witness.as_ref())
            .max_by(|a, b| a.count.cmp(&b.count).then(b.u.total_cmp(&a.u)))
            .expect("every segment has a witness");
        PartOutcome::Pass {
            witness: Box::new(w.clone()),
        }
    };
    Ok((outcome, segments))
}

fn search_segment(
    spec: &ImmersionSpec,
    line: &NormalLine,
    cfg: &WalkConfig,
    walk: &WalkReport,
    (from, to): (usize, usize),
    (lo, hi): (f64, f64),
    required: usize,
) -> Result<SegmentSearch> {
    let inside = |u: f64| {
        let v = if u < lo { u + PI } else { u };
        v > lo && v < hi
    };
    let usable = |s: &&WalkSample| s.t.is_finite() && s.census.morse_ok;
    let mut max_count = 0;
    let mut used = 0;
    let from_walk = best(walk.samples.iter().filter(|s| inside(s.u)).filter(usable));
    if let Some(s) = from_walk {
        max_count = s.count();
        used = walk.samples.iter().filter(|s| inside(s.u)).count();
        if s.count() >= required {
            return Ok(SegmentSearch {
                from,
                to,
                u_range: (lo, hi),
                samples: used,
                max_count,
                witness: Witness::from_sample(spec, line, s),
            });
        }
    }
    let mut n = cfg.witness_samples.max(1);
    while n <= cfg.max_witness_samples.max(n) {
        let us: Vec<f64> = (0..n).map(|k| lo + (k as f64 + 0.5) * (hi - lo) / n as f64).collect();
        let samples: Vec<WalkSample> = exec::map(cfg.solver.exec, &us, |u| census_at(spec, line, *u, cfg, &[]))
            .into_iter()
            .filter_map(|r| r.ok())
            .collect();
        used += us.len();
        if let Some(s) = best(samples.iter().filter(usable)) {
            max_count = max_count.max(s.count());
            if s.count() >= required {
                return Ok(SegmentSearch {
                    from,
                    to,
                    u_range: (lo, hi),
                    samples: used,
                    max_count,
                    witness: Witness::from_sample(spec, line, s),
                });
            }
        }
        if n >= cfg.max_witness_samples {
            break;
        }
        n *= 2;
    }
    Ok(SegmentSearch {
        from,
        to,
        u_range: (lo, hi),
        samples: used,
        max_count,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ellipse2d;

    #[test]
    fn ellipse_part_one() {
        let e = ellipse2d(2.0, 1.0).unwrap();
        let line = NormalLine::from_frame(&e, &[PI / 4.0], 0.0).unwrap();
        let report = verify_theorem(&e, &line, &WalkConfig::default()).unwrap();
        match &report.part1 {
            PartOutcome::Pass { witness } => {
                assert_eq!(witness.count, 4);
                assert_eq!(witness.excess, 2);
            }
            other => panic!("part 1: {other:?}"),
        }
        assert!(matches!(report.part2, PartOutcome::NotApplicable { .. }));
    }
}
