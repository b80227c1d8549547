//! CSV and SVG writers.

use crate::error::{Error, Result};
use crate::focal::{focal_points, FocalCloud};
use crate::geometry::{normal_frame, ImmersionSpec};
use crate::morse::Census;
use std::fmt::Write as _;
use std::io::Write;

const AMBIENT_NAMES: [&str; 4] = ["px", "py", "pz", "pw"];

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// One row per critical point: chart, chart coordinates, ambient position,
/// value, index and degeneracy margin.
pub fn write_census_csv<W: Write>(census: &Census, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let m = census.points.first().map_or(0, |p| p.x.len());
    let n = census.y.len();
    let mut header = vec!["chart".to_string()];
    header.extend((0..m).map(|i| format!("x{i}")));
    header.extend(AMBIENT_NAMES[..n].iter().map(|s| s.to_string()));
    header.extend(["value", "mu", "margin"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    for p in &census.points {
        let mut row = vec![p.chart.to_string()];
        row.extend(p.x.iter().map(f64::to_string));
        row.extend(p.pos.iter().map(f64::to_string));
        row.push(p.value.to_string());
        row.push(p.mu.to_string());
        row.push(p.degeneracy_margin.to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

/// Focal point cloud: ambient coordinates and multiplicity.
pub fn write_focal_csv<W: Write>(cloud: &FocalCloud, n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = AMBIENT_NAMES[..n].to_vec();
    header.push("nu");
    w.write_record(&header).map_err(csv_error)?;
    for p in &cloud.points {
        let mut row: Vec<String> = p.pos.iter().map(f64::to_string).collect();
        row.push(p.nu.to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

/// SVG of a closed planar curve with its evolute. Evolute samples with a
/// focal point far outside the curve's bounding region break the polyline.
pub fn planar_svg(spec: &ImmersionSpec, samples: usize) -> Result<String> {
    if spec.m() != 1 || spec.n() != 2 {
        return Err(Error::InvalidInput(format!(
            "SVG export needs a planar curve, {} has m = {}, n = {}",
            spec.name(),
            spec.m(),
            spec.n()
        )));
    }
    let axis = spec.primary().axes()[0];
    let reach = 10.0 * spec.diameter();
    let mut curve = Vec::with_capacity(samples);
    let mut evolute: Vec<Option<[f64; 2]>> = Vec::with_capacity(samples);
    for k in 0..samples {
        let s = axis.lo + (k as f64 + 0.5) * axis.length() / samples as f64;
        let jet = spec.jet(&[s])?;
        let p = [jet.pos()[0], jet.pos()[1]];
        curve.push(p);
        let n = normal_frame(&jet)?.vectors[0].clone();
        let focal = focal_points(spec, &[s], &n)?;
        evolute.push(focal.points.first().and_then(|f| {
            let q = [p[0] + f.t * n[0], p[1] + f.t * n[1]];
            (f.t.abs() < reach).then_some(q)
        }));
    }

    let all = curve.iter().chain(evolute.iter().flatten());
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in all {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let (x0, y0) = (lo[0] - pad, lo[1] - pad);
    let (w, h) = (hi[0] - lo[0] + 2.0 * pad, hi[1] - lo[1] + 2.0 * pad);
    let stroke = 0.004 * w.max(h);
    // flip y so the picture has the usual orientation
    let fmt = |p: &[f64; 2]| format!("{:.6},{:.6}", p[0], -p[1]);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        x0,
        -(y0 + h),
        w,
        h
    );
    let points: Vec<String> = curve.iter().map(fmt).collect();
    let _ = writeln!(
        svg,
        r#"  <polygon id="curve" fill="none" stroke="black" stroke-width="{stroke:.6}" points="{}"/>"#,
        points.join(" ")
    );
    let mut runs: Vec<Vec<String>> = vec![Vec::new()];
    for q in &evolute {
        match q {
            Some(q) => runs.last_mut().expect("non-empty").push(fmt(q)),
            None if !runs.last().expect("non-empty").is_empty() => runs.push(Vec::new()),
            None => {}
        }
    }
    // the evolute of a closed curve closes up when no sample was dropped
    if evolute.iter().all(Option::is_some) {
        if let (Some(first), Some(run)) = (evolute.first().copied().flatten(), runs.last_mut()) {
            run.push(fmt(&first));
        }
    }
    for (i, run) in runs.iter().filter(|r| r.len() > 1).enumerate() {
        let _ = writeln!(
            svg,
            r#"  <polyline id="evolute-{i}" fill="none" stroke="crimson" stroke-width="{stroke:.6}" points="{}"/>"#,
            run.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focal::focal_cloud;
    use crate::geometry::{ellipse2d, sphere};
    use crate::morse::{find_critical_points, SolverConfig};
    use crate::ExecMode;

    #[test]
    fn census_csv_has_one_row_per_point() {
        let e = ellipse2d(2.0, 1.0).unwrap();
        let c = find_critical_points(&e, &[0.3, 0.2], &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_census_csv(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "chart,x0,px,py,value,mu,margin");
        assert_eq!(lines.len(), 1 + c.count());
    }

    #[test]
    fn focal_csv_columns_follow_dimension() {
        let s = sphere(1.0).unwrap();
        let cloud = focal_cloud(&s, 4, 1, ExecMode::Sequential).unwrap();
        let mut buf = Vec::new();
        write_focal_csv(&cloud, 3, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("px,py,pz,nu\n"));
        assert!(text.lines().skip(1).all(|l| l.ends_with(",2")));
    }

    #[test]
    fn ellipse_svg_has_curve_and_evolute() {
        let e = ellipse2d(2.0, 1.0).unwrap();
        let svg = planar_svg(&e, 200).unwrap();
        assert!(svg.contains(r#"id="curve""#));
        assert!(svg.contains(r#"id="evolute-0""#));
        assert!(planar_svg(&sphere(1.0).unwrap(), 10).is_err());
    }
}
