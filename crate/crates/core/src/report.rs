//! CSV tables and SVG plots.

use std::fmt::Write as _;

use crate::embedding::{Embedding, Spectrum};

/// One row of the round-trip table.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripLine {
    pub dim: usize,
    pub captured_energy: f64,
    pub spectrum_fraction: f64,
    pub mean_error: f64,
    pub max_error: f64,
    /// Mean and max contour Hausdorff distance, for shape sequences.
    pub hausdorff: Option<(f64, f64)>,
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is utf-8")
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// `eigenvalue,cum_energy`, one row per eigenvalue.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["eigenvalue", "cum_energy"]).unwrap();
    for (l, c) in spectrum.eigenvalues.iter().zip(spectrum.energy_fraction()) {
        w.write_record([real(*l), real(c)]).unwrap();
    }
    finish(w)
}

/// Per-component spectrum next to the energy actually captured by the
/// development's first `component` coordinates.
pub fn embedding_csv(e: &Embedding) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["component", "eigenvalue", "cum_energy", "captured_energy"]).unwrap();
    let dz = e.increments();
    let mut acc = 0.0;
    for (i, (l, c)) in e.spectrum.eigenvalues.iter().zip(e.spectrum.energy_fraction()).enumerate() {
        let captured = if i < e.dim() {
            acc += dz.column(i).norm_squared();
            if e.tangent_energy > 0.0 {
                real(acc / e.tangent_energy)
            } else {
                real(0.0)
            }
        } else {
            String::new()
        };
        w.write_record([(i + 1).to_string(), real(*l), real(c), captured]).unwrap();
    }
    finish(w)
}

pub fn roundtrip_csv(lines: &[RoundtripLine]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dim",
        "captured_energy",
        "spectrum_fraction",
        "mean_error",
        "max_error",
        "hausdorff_mean",
        "hausdorff_max",
    ])
    .unwrap();
    for r in lines {
        let (hm, hx) = r.hausdorff.map_or((String::new(), String::new()), |(a, b)| (real(a), real(b)));
        w.write_record([
            r.dim.to_string(),
            real(r.captured_energy),
            real(r.spectrum_fraction),
            real(r.mean_error),
            real(r.max_error),
            hm,
            hx,
        ])
        .unwrap();
    }
    finish(w)
}

/// Fixed-width text table for the terminal.
pub fn roundtrip_table(lines: &[RoundtripLine]) -> String {
    let mut out = format!(
        "{:>4} {:>14} {:>12} {:>12} {:>12} {:>12}\n",
        "L", "captured", "mean_err", "max_err", "haus_mean", "haus_max"
    );
    for r in lines {
        let (hm, hx) = r
            .hausdorff
            .map_or(("-".to_string(), "-".to_string()), |(a, b)| (format!("{a:.4e}"), format!("{b:.4e}")));
        writeln!(
            out,
            "{:>4} {:>14.10} {:>12.4e} {:>12.4e} {:>12} {:>12}",
            r.dim, r.captured_energy, r.mean_error, r.max_error, hm, hx
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone)]
pub struct Series {
    pub points: Vec<[f64; 2]>,
    pub stroke: &'static str,
    pub dashed: bool,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
    /// Use one scale for both axes (shape outlines).
    pub equal_aspect: bool,
}

const PANEL: f64 = 320.0;
const MARGIN: f64 = 24.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Side-by-side panels, each autoscaled to its data.
pub fn render_svg(panels: &[Panel]) -> String {
    let width = PANEL * panels.len().max(1) as f64;
    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{}\" viewBox=\"0 0 {width} {}\">\n",
        PANEL + MARGIN,
        PANEL + MARGIN
    );
    for (k, panel) in panels.iter().enumerate() {
        let all = panel.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in all {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let (mut sx, mut sy) = ((x1 - x0).max(1e-300), (y1 - y0).max(1e-300));
        if panel.equal_aspect {
            let s = sx.max(sy);
            (sx, sy) = (s, s);
        }
        let inner = PANEL - 2.0 * MARGIN;
        let left = k as f64 * PANEL + MARGIN;
        writeln!(
            out,
            "  <g class=\"panel\">\n    <rect x=\"{}\" y=\"{}\" width=\"{inner}\" height=\"{inner}\" fill=\"none\" stroke=\"#bbb\"/>\n    <text x=\"{left}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            left,
            MARGIN + 8.0,
            MARGIN,
            escape(&panel.title)
        )
        .unwrap();
        for s in &panel.series {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|p| {
                    let x = left + (p[0] - x0) / sx * inner;
                    let y = MARGIN + 8.0 + inner - (p[1] - y0) / sy * inner;
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            writeln!(
                out,
                "    <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>",
                s.stroke,
                if s.dashed { " stroke-dasharray=\"4 3\"" } else { "" },
                pts.join(" ")
            )
            .unwrap();
        }
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// The development projected to its first two coordinates (or `t ↦ z₁`
/// when one-dimensional).
pub fn development_panel(e: &Embedding) -> Panel {
    let points = (0..e.len())
        .map(|t| {
            if e.dim() >= 2 {
                [e.z[(t, 0)], e.z[(t, 1)]]
            } else {
                [t as f64, e.z[(t, 0)]]
            }
        })
        .collect();
    Panel {
        title: format!("development, L = {}", e.dim()),
        series: vec![Series {
            points,
            stroke: "#1f77b4",
            dashed: false,
        }],
        equal_aspect: e.dim() >= 2,
    }
}

pub fn error_panel(lines: &[RoundtripLine]) -> Panel {
    Panel {
        title: "mean reconstruction error vs L".into(),
        series: vec![Series {
            points: lines.iter().map(|r| [r.dim as f64, r.mean_error]).collect(),
            stroke: "#d62728",
            dashed: false,
        }],
        equal_aspect: false,
    }
}

/// Original (solid) against reconstruction (dashed).
pub fn overlay_panel(title: &str, original: Vec<[f64; 2]>, reconstructed: Vec<[f64; 2]>) -> Panel {
    Panel {
        title: title.into(),
        series: vec![
            Series {
                points: original,
                stroke: "#333",
                dashed: false,
            },
            Series {
                points: reconstructed,
                stroke: "#2ca02c",
                dashed: true,
            },
        ],
        equal_aspect: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_csv_format() {
        let s = Spectrum {
            eigenvalues: vec![3.0, 1.0],
            total: 4.0,
        };
        let text = spectrum_csv(&s);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("eigenvalue,cum_energy"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row, vec![3.0, 0.75]);
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn svg_is_well_formed() {
        let panels = vec![
            Panel {
                title: "a < b & c".into(),
                series: vec![Series {
                    points: vec![[0.0, 0.0], [1.0, 2.0]],
                    stroke: "#000",
                    dashed: false,
                }],
                equal_aspect: false,
            },
            overlay_panel("o", vec![[0.0, 0.0], [1.0, 1.0]], vec![[0.0, 0.1], [1.0, 0.9]]),
            Panel {
                title: "empty".into(),
                series: vec![],
                equal_aspect: true,
            },
        ];
        let svg = render_svg(&panels);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let groups: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("g")).collect();
        assert_eq!(groups.len(), 3);
        let polylines = |g: &roxmltree::Node| g.children().filter(|n| n.has_tag_name("polyline")).count();
        assert_eq!(polylines(&groups[0]), 1);
        assert_eq!(polylines(&groups[1]), 2);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn table_and_csv_rows() {
        let lines = vec![
            RoundtripLine {
                dim: 1,
                captured_energy: 0.5,
                spectrum_fraction: 0.5,
                mean_error: 0.1,
                max_error: 0.2,
                hausdorff: None,
            },
            RoundtripLine {
                dim: 2,
                captured_energy: 1.0,
                spectrum_fraction: 1.0,
                mean_error: 0.0,
                max_error: 0.0,
                hausdorff: Some((0.01, 0.02)),
            },
        ];
        assert_eq!(roundtrip_table(&lines).lines().count(), 3);
        let csv = roundtrip_csv(&lines);
        assert!(csv.starts_with("dim,captured_energy,"));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 7);
    }
}
