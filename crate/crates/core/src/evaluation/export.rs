//! Report serialization: CSV curves, JSON reports, and self-contained SVG
//! line plots.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::metrics::RocCurve;
use crate::evaluation::protocol::EvalReport;
use crate::evaluation::unlinkability::UnlinkabilityReport;

/// Writes `threshold,far,frr` rows.
pub fn write_roc_csv<W: Write>(curve: &RocCurve, mut out: W) -> Result<()> {
    writeln!(out, "threshold,far,frr")?;
    for p in curve.points() {
        writeln!(out, "{},{},{}", p.threshold, p.far, p.frr)?;
    }
    Ok(())
}

/// Writes `rank,cmc` rows (ranks 1-based).
pub fn write_cmc_csv<W: Write>(cmc: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "rank,cmc")?;
    for (k, v) in cmc.iter().enumerate() {
        writeln!(out, "{},{}", k + 1, v)?;
    }
    Ok(())
}

/// Writes `score,mated_density,nonmated_density,d_link` rows.
pub fn write_unlinkability_csv<W: Write>(report: &UnlinkabilityReport, mut out: W) -> Result<()> {
    writeln!(out, "score,mated_density,nonmated_density,d_link")?;
    for i in 0..report.bin_centers.len() {
        writeln!(
            out,
            "{},{},{},{}",
            report.bin_centers[i],
            report.mated_density[i],
            report.nonmated_density[i],
            report.d_link[i]
        )?;
    }
    Ok(())
}

/// Serializes an evaluation report as pretty JSON.
pub fn report_to_json(report: &EvalReport) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map_err(|e| Error::Protocol(format!("report serialization failed: {e}")))
}

pub fn write_report_json(report: &EvalReport, path: &Path) -> Result<()> {
    std::fs::write(path, report_to_json(report)?)?;
    Ok(())
}

/// One named series of an SVG line plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Renders a minimal self-contained SVG line plot with axes, tick labels,
/// and a legend.
pub fn render_svg_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series<'_>],
) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const ML: f64 = 64.0; // margins
    const MR: f64 = 24.0;
    const MT: f64 = 40.0;
    const MB: f64 = 52.0;
    let plot_w = W - ML - MR;
    let plot_h = H - MT - MB;

    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if !x_lo.is_finite() || x_hi <= x_lo {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    if !y_lo.is_finite() || y_hi <= y_lo {
        y_lo = 0.0;
        y_hi = 1.0;
    }

    let sx = |x: f64| ML + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| MT + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    ));

    // axes
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MT + plot_h,
        ML + plot_w,
        MT + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        MT + plot_h
    ));

    // ticks
    for i in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let px = sx(fx);
        svg.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
            MT + plot_h,
            MT + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>\n",
            MT + plot_h + 18.0,
            fx
        ));
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let py = sy(fy);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{ML}\" y2=\"{py}\" stroke=\"black\"/>\n",
            ML - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>\n",
            ML - 8.0,
            py + 4.0,
            fy
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        ML + plot_w / 2.0,
        H - 12.0,
        xml_escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        MT + plot_h / 2.0,
        MT + plot_h / 2.0,
        xml_escape(y_label)
    ));

    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            pts.join(" "),
            s.color
        ));
        let ly = MT + 8.0 + i as f64 * 16.0;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            ML + plot_w - 130.0,
            ML + plot_w - 106.0,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            ML + plot_w - 100.0,
            ly + 4.0,
            xml_escape(s.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// SVG of a FAR/FRR curve pair.
pub fn roc_svg(curve: &RocCurve, title: &str) -> String {
    let far: Vec<(f64, f64)> = curve.points().iter().map(|p| (p.threshold, p.far)).collect();
    let frr: Vec<(f64, f64)> = curve.points().iter().map(|p| (p.threshold, p.frr)).collect();
    render_svg_plot(
        title,
        "threshold",
        "error rate",
        &[
            Series {
                label: "FAR",
                color: "#c0392b",
                points: far,
            },
            Series {
                label: "FRR",
                color: "#2980b9",
                points: frr,
            },
        ],
    )
}

/// SVG of a CMC curve.
pub fn cmc_svg(cmc: &[f64], title: &str) -> String {
    let pts: Vec<(f64, f64)> = cmc
        .iter()
        .enumerate()
        .map(|(k, &v)| ((k + 1) as f64, v))
        .collect();
    render_svg_plot(
        title,
        "rank",
        "identification rate",
        &[Series {
            label: "CMC",
            color: "#27ae60",
            points: pts,
        }],
    )
}

/// SVG of the mated/non-mated densities and the score-wise linkability.
pub fn unlinkability_svg(report: &UnlinkabilityReport, title: &str) -> String {
    let mated: Vec<(f64, f64)> = report
        .bin_centers
        .iter()
        .zip(&report.mated_density)
        .map(|(&x, &y)| (x, y))
        .collect();
    let nonmated: Vec<(f64, f64)> = report
        .bin_centers
        .iter()
        .zip(&report.nonmated_density)
        .map(|(&x, &y)| (x, y))
        .collect();
    let d: Vec<(f64, f64)> = report
        .bin_centers
        .iter()
        .zip(&report.d_link)
        .map(|(&x, &y)| (x, y))
        .collect();
    render_svg_plot(
        title,
        "score",
        "density / linkability",
        &[
            Series {
                label: "mated",
                color: "#2980b9",
                points: mated,
            },
            Series {
                label: "non-mated",
                color: "#c0392b",
                points: nonmated,
            },
            Series {
                label: "D(s)",
                color: "#8e44ad",
                points: d,
            },
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::metrics::{far_frr_curve, ScoreSet};

    fn sample_curve() -> RocCurve {
        far_frr_curve(
            &ScoreSet {
                genuine: vec![0.1, 0.2, 0.3],
                imposter: vec![0.6, 0.7, 0.8],
            },
            21,
        )
        .unwrap()
    }

    #[test]
    fn roc_csv_has_header_and_rows() {
        let mut out = Vec::new();
        write_roc_csv(&sample_curve(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "threshold,far,frr");
        assert_eq!(lines.len(), 22);
        assert_eq!(lines[1], "0,0,1");
    }

    #[test]
    fn cmc_csv_is_one_based() {
        let mut out = Vec::new();
        write_cmc_csv(&[0.9, 1.0], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("1,0.9"));
        assert!(text.contains("2,1"));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = roc_svg(&sample_curve(), "curves & more");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("curves &amp; more"));
    }

    #[test]
    fn empty_series_render_without_panic() {
        let svg = render_svg_plot("t", "x", "y", &[]);
        assert!(svg.contains("</svg>"));
    }
}
