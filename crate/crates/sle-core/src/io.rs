//! Serialization: columnar binary paths, CSV tables, and SVG rendering.

use std::io::Read as _;
use std::path::Path;

use crate::bessel::RealPath;
use crate::driver::{BrownianPath, TimeGrid};
use crate::excursion::ExcursionRecord;
use crate::geometry::{BubbleRecord, DoublePointRecord, HullReport};
use crate::loewner::TracePolyline;
use crate::{Error, Result};

const PATH_MAGIC: &[u8; 8] = b"SLEPATH1";

/// Columnar binary path: magic, then seed / n_steps / t_end as 64-bit
/// little-endian fields, then the n_steps + 1 values as f64.
pub fn write_brownian_binary(path: &BrownianPath, out: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + 8 * path.values().len());
    buf.extend_from_slice(PATH_MAGIC);
    buf.extend_from_slice(&path.seed().to_le_bytes());
    buf.extend_from_slice(&(path.grid().n_steps() as u64).to_le_bytes());
    buf.extend_from_slice(&path.grid().t_end().to_le_bytes());
    for v in path.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(out, buf).map_err(Error::from)
}

pub fn read_brownian_binary(file: &Path) -> Result<BrownianPath> {
    let mut f = std::fs::File::open(file)?;
    let mut head = [0u8; 32];
    f.read_exact(&mut head)?;
    if &head[..8] != PATH_MAGIC {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "bad path file magic",
        )));
    }
    let seed = u64::from_le_bytes(head[8..16].try_into().unwrap());
    let n_steps = u64::from_le_bytes(head[16..24].try_into().unwrap()) as usize;
    let t_end = f64::from_le_bytes(head[24..32].try_into().unwrap());
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;
    if payload.len() != 8 * (n_steps + 1) {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "path file payload length mismatch",
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let grid = TimeGrid::new(t_end, n_steps)?;
    Ok(BrownianPath::from_values(grid, values, seed))
}

fn fmt_f64(x: f64) -> String {
    // shortest round-trippable decimal, so CSVs are byte-stable
    format!("{x}")
}

pub fn brownian_to_csv(path: &BrownianPath) -> String {
    let mut s = String::from("t,value\n");
    for (k, v) in path.values().iter().enumerate() {
        s.push_str(&format!("{},{}\n", fmt_f64(path.grid().time(k)), fmt_f64(*v)));
    }
    s
}

pub fn real_path_to_csv(path: &RealPath) -> String {
    let mut s = String::from("t,value,absorbed\n");
    for (k, v) in path.values().iter().enumerate() {
        let absorbed = path.absorbed_at().map_or(false, |a| path.grid().time(k) >= a);
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(path.grid().time(k)),
            fmt_f64(*v),
            absorbed as u8
        ));
    }
    s
}

pub fn trace_to_csv(poly: &TracePolyline) -> String {
    let mut s = String::from("t,re,im\n");
    for (t, p) in poly.times.iter().zip(&poly.points) {
        s.push_str(&format!("{},{},{}\n", fmt_f64(*t), fmt_f64(p.re), fmt_f64(p.im)));
    }
    s
}

pub fn excursions_to_csv(records: &[ExcursionRecord], grid: &TimeGrid) -> String {
    let mut s = String::from("start_t,end_t,duration,max_height,complete\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(grid.time(r.start_idx)),
            fmt_f64(grid.time(r.end_idx)),
            fmt_f64(r.duration),
            fmt_f64(r.max_height),
            r.complete as u8
        ));
    }
    s
}

pub fn hull_reports_to_csv(reports: &[HullReport]) -> String {
    let mut s = String::from(
        "excursion_start,duration,base_left,base_right,base_length,double_point_found\n",
    );
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(r.excursion_start),
            fmt_f64(r.duration),
            fmt_f64(r.base_left),
            fmt_f64(r.base_right),
            fmt_f64(r.base_length),
            r.double_point_found as u8
        ));
    }
    s
}

pub fn double_points_to_csv(records: &[DoublePointRecord]) -> String {
    let mut s = String::from("t1,t2,re,im,gap\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.t1),
            fmt_f64(r.t2),
            fmt_f64(r.re),
            fmt_f64(r.im),
            fmt_f64(r.gap)
        ));
    }
    s
}

/// SVG rendering options.
#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    /// Real-axis segment to highlight (hull base), if any.
    pub hull_base: Option<(f64, f64)>,
    /// Bubbles drawn as shaded closed loops on top of the trace.
    pub bubbles: Vec<BubbleRecord>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { width: 800.0, height: 500.0, margin: 30.0, hull_base: None, bubbles: Vec::new() }
    }
}

/// Trace polyline scaled into the viewport, upper half-plane upward, with the
/// real axis, optional hull-base highlight, and shaded bubbles.
pub fn trace_to_svg(poly: &TracePolyline, opts: &SvgOptions) -> String {
    let mut re_min = f64::INFINITY;
    let mut re_max = f64::NEG_INFINITY;
    let mut im_max: f64 = 0.0;
    let extend = |lo: &mut f64, hi: &mut f64, top: &mut f64, re: f64, im: f64| {
        *lo = lo.min(re);
        *hi = hi.max(re);
        *top = top.max(im);
    };
    for p in &poly.points {
        extend(&mut re_min, &mut re_max, &mut im_max, p.re, p.im);
    }
    if let Some((a, b)) = opts.hull_base {
        extend(&mut re_min, &mut re_max, &mut im_max, a, 0.0);
        extend(&mut re_min, &mut re_max, &mut im_max, b, 0.0);
    }
    if !re_min.is_finite() {
        re_min = -1.0;
        re_max = 1.0;
    }
    if re_max - re_min < 1e-9 {
        re_min -= 0.5;
        re_max += 0.5;
    }
    if im_max < 1e-9 {
        im_max = 1.0;
    }
    let sx = (opts.width - 2.0 * opts.margin) / (re_max - re_min);
    let sy = (opts.height - 2.0 * opts.margin) / im_max;
    let s = sx.min(sy);
    let to_xy = |re: f64, im: f64| -> (f64, f64) {
        (opts.margin + (re - re_min) * s, opts.height - opts.margin - im * s)
    };
    let path_points = |res: &[f64], ims: &[f64]| -> String {
        res.iter()
            .zip(ims)
            .map(|(&re, &im)| {
                let (x, y) = to_xy(re, im);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = opts.width,
        h = opts.height
    );
    // real axis
    let (ax0, ay) = to_xy(re_min, 0.0);
    let (ax1, _) = to_xy(re_max, 0.0);
    svg.push_str(&format!(
        "  <line x1=\"{ax0:.2}\" y1=\"{ay:.2}\" x2=\"{ax1:.2}\" y2=\"{ay:.2}\" stroke=\"#888\" stroke-width=\"1\"/>\n"
    ));
    for b in &opts.bubbles {
        svg.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"#f4a261\" fill-opacity=\"0.45\" stroke=\"none\"/>\n",
            path_points(&b.loop_re, &b.loop_im)
        ));
    }
    let res: Vec<f64> = poly.points.iter().map(|p| p.re).collect();
    let ims: Vec<f64> = poly.points.iter().map(|p| p.im).collect();
    svg.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#2a4d8f\" stroke-width=\"1.2\"/>\n",
        path_points(&res, &ims)
    ));
    if let Some((a, b)) = opts.hull_base {
        let (bx0, by) = to_xy(a.min(b), 0.0);
        let (bx1, _) = to_xy(a.max(b), 0.0);
        svg.push_str(&format!(
            "  <line x1=\"{bx0:.2}\" y1=\"{by:.2}\" x2=\"{bx1:.2}\" y2=\"{by:.2}\" stroke=\"#d62828\" stroke-width=\"4\" stroke-linecap=\"round\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn binary_roundtrip() {
        let grid = TimeGrid::new(1.5, 1_000).unwrap();
        let path = BrownianPath::sample(42, grid);
        let dir = std::env::temp_dir().join("sle_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("path.bin");
        write_brownian_binary(&path, &file).unwrap();
        let back = read_brownian_binary(&file).unwrap();
        assert_eq!(back.seed(), path.seed());
        assert_eq!(back.grid(), path.grid());
        assert_eq!(back.values(), path.values());
        std::fs::remove_file(&file).unwrap();
    }

    #[test]
    fn binary_rejects_garbage() {
        let dir = std::env::temp_dir().join("sle_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("garbage.bin");
        std::fs::write(&file, b"not a path file").unwrap();
        assert!(read_brownian_binary(&file).is_err());
        std::fs::remove_file(&file).unwrap();
    }

    #[test]
    fn csv_headers_and_shape() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let path = BrownianPath::sample(1, grid);
        let csv = brownian_to_csv(&path);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,value");
        assert_eq!(lines.len(), 6);
        // byte-identical across calls
        assert_eq!(csv, brownian_to_csv(&path));
    }

    #[test]
    fn trace_csv_roundtrip_precision() {
        let poly = TracePolyline {
            times: vec![0.0, 0.1],
            points: vec![Complex64::new(0.0, 0.0), Complex64::new(0.1234567890123456, 2.0)],
            kappa: 2.0,
            seed: 0,
        };
        let csv = trace_to_csv(&poly);
        let line = csv.lines().nth(2).unwrap();
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(re, 0.1234567890123456);
    }

    #[test]
    fn svg_contains_expected_elements() {
        let poly = TracePolyline {
            times: vec![0.0, 0.5, 1.0],
            points: vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.4, 0.8),
                Complex64::new(-0.3, 1.2),
            ],
            kappa: 6.0,
            seed: 7,
        };
        let opts = SvgOptions {
            hull_base: Some((-0.2, 0.3)),
            bubbles: vec![BubbleRecord {
                loop_re: vec![0.0, 0.1, 0.05, 0.0],
                loop_im: vec![0.5, 0.6, 0.7, 0.5],
                area: 0.01,
            }],
            ..SvgOptions::default()
        };
        let svg = trace_to_svg(&poly, &opts);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("<polygon"));
        assert!(svg.matches("<line").count() >= 2, "axis and hull base lines");
        assert!(svg.ends_with("</svg>\n"));
    }
}
