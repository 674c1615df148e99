//! Report artifacts: JSON with a config echo, CSV tables with embedded
//! metadata, and dependency-free SVG plots. All output is deterministic for
//! a fixed config and seed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// JSON envelope: version string, resolved config echo, report payload.
#[derive(Debug, Serialize)]
pub struct Artifact<T: Serialize> {
    pub version: &'static str,
    pub config: BTreeMap<String, String>,
    pub report: T,
}

pub fn write_json<T: Serialize>(
    path: &Path,
    config: &BTreeMap<String, String>,
    report: T,
) -> Result<()> {
    let artifact = Artifact {
        version: crate::VERSION,
        config: config.clone(),
        report,
    };
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &artifact)
        .map_err(|e| crate::Error::Config(format!("json serialization failed: {e}")))?;
    file.write_all(b"\n")?;
    Ok(())
}

/// CSV with `# key=value` metadata lines (version first), then a header row.
pub fn write_csv(
    path: &Path,
    config: &BTreeMap<String, String>,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# version={}\n", crate::VERSION));
    for (k, v) in config {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Fixed-precision float formatting shared by all CSV writers; full
/// round-trip precision, deterministic text.
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v:.17e}")
    }
}

/// Minimal SVG scatter overlay: true points as circles, reconstructed points
/// as crosses, disk boundary as a reference circle.
pub fn zero_overlay_svg(
    true_pts: &[(f64, f64)],
    reconstructed: &[(f64, f64)],
    disk_radius: f64,
    title: &str,
) -> String {
    let size = 420.0;
    let pad = 30.0;
    let extent = disk_radius * 1.25;
    let scale = (size - 2.0 * pad) / (2.0 * extent);
    let map = |x: f64, y: f64| -> (f64, f64) {
        (size / 2.0 + x * scale, size / 2.0 - y * scale)
    };
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size:.0}\" height=\"{size:.0}\" viewBox=\"0 0 {size:.0} {size:.0}\">\n"
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"18\" font-size=\"12\" font-family=\"monospace\">{}</text>\n",
        pad, title
    ));
    let (cx, cy) = map(0.0, 0.0);
    s.push_str(&format!(
        "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n",
        disk_radius * scale
    ));
    for &(x, y) in true_pts {
        let (px, py) = map(x, y);
        s.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"4\" fill=\"none\" stroke=\"#246\"/>\n"
        ));
    }
    for &(x, y) in reconstructed {
        let (px, py) = map(x, y);
        s.push_str(&format!(
            "<path d=\"M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}\" stroke=\"#c33\" stroke-width=\"1.5\"/>\n",
            px - 4.0, py - 4.0, px + 4.0, py + 4.0, px - 4.0, py + 4.0, px + 4.0, py - 4.0
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Log-log polyline plot of (x, y) series with labeled axes.
pub fn loglog_svg(series: &[(String, Vec<(f64, f64)>)], x_label: &str, y_label: &str) -> String {
    let w = 480.0;
    let h = 360.0;
    let pad = 50.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (_, pts) in series {
        for &(x, y) in pts {
            if x > 0.0 && y > 0.0 {
                xs.push(x.log10());
                ys.push(y.log10());
            }
        }
    }
    if xs.is_empty() {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\"/>\n".into();
    }
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = (
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let xspan = (x1 - x0).max(1e-12);
    let yspan = (y1 - y0).max(1e-12);
    let map = |x: f64, y: f64| -> (f64, f64) {
        (
            pad + (x.log10() - x0) / xspan * (w - 2.0 * pad),
            h - pad - (y.log10() - y0) / yspan * (h - 2.0 * pad),
        )
    };
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n"
    );
    s.push_str(&format!(
        "<rect x=\"{pad}\" y=\"{pad}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\"/>\n",
        w - 2.0 * pad,
        h - 2.0 * pad
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" font-family=\"monospace\">{}</text>\n",
        w / 2.0 - 30.0,
        h - 12.0,
        x_label
    ));
    s.push_str(&format!(
        "<text x=\"12\" y=\"{:.1}\" font-size=\"11\" font-family=\"monospace\" transform=\"rotate(-90 12 {:.1})\">{}</text>\n",
        h / 2.0,
        h / 2.0,
        y_label
    ));
    let colors = ["#246", "#c33", "#383", "#a5a", "#b82"];
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        let mut d = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            if x <= 0.0 || y <= 0.0 {
                continue;
            }
            let (px, py) = map(x, y);
            d.push_str(&format!("{}{px:.2} {py:.2} ", if j == 0 { "M " } else { "L " }));
            s.push_str(&format!(
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{color}\"/>\n"
            ));
        }
        s.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\"/>\n",
            d.trim_end()
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" font-family=\"monospace\" fill=\"{color}\">{}</text>\n",
            w - pad - 120.0,
            pad + 16.0 * (i as f64 + 1.0),
            name
        ));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_embeds_version_and_config() {
        let dir = std::env::temp_dir().join(format!("gaflab-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let mut cfg = BTreeMap::new();
        cfg.insert("family".to_string(), "gef".to_string());
        write_csv(&path, &cfg, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&format!("# version={}\n# family=gef\na,b\n1,2\n", crate::VERSION)));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn fmt_f64_round_trips() {
        for v in [0.1, -3.25e-14, 7.0, 123456.789] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
    }

    #[test]
    fn svg_outputs_are_well_formed() {
        let svg = zero_overlay_svg(&[(0.1, 0.2)], &[(0.12, 0.18)], 1.0, "trial 0");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        let plot = loglog_svg(
            &[("var".to_string(), vec![(1.0, 0.5), (2.0, 0.12)])],
            "L",
            "Var",
        );
        assert!(plot.contains("path"));
    }
}
