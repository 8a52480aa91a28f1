use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use super::{AuditRow, DynregRow, Mode, ReplicationCell};
use crate::error::{Error, Result};

/// Column order of the audit-row CSV.
pub const CSV_HEADER: [&str; 12] = [
    "label",
    "mode",
    "alpha",
    "n_tests",
    "n_skipped",
    "pct_significant",
    "pct_p05",
    "pct_p01",
    "pct_p005",
    "median_tau",
    "abs_tau_y_median",
    "tau_l_median",
];

const CELL_HEADER: [&str; 6] = ["measure", "predictor", "tau", "p", "n", "stars"];

const DYNREG_HEADER: [&str; 10] = [
    "measure",
    "block",
    "order",
    "beta",
    "se",
    "z",
    "p",
    "n",
    "bridged_years",
    "error",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
    SvgBar,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg_bar" | "svg" => Ok(ReportFormat::SvgBar),
            other => Err(Error::input(format!(
                "unknown report format {other:?} (expected csv, json or svg_bar)"
            ))),
        }
    }
}

/// Anything [`emit_report`] can render.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Rows(&'a [AuditRow]),
    Cells(&'a [ReplicationCell]),
    Dynreg(&'a [DynregRow]),
}

impl Report<'_> {
    fn is_empty(&self) -> bool {
        match self {
            Report::Rows(r) => r.is_empty(),
            Report::Cells(c) => c.is_empty(),
            Report::Dynreg(d) => d.is_empty(),
        }
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Renders a report. CSV and JSON field order is fixed; SVG is only
/// available for audit rows.
pub fn emit_report<W: Write>(report: Report<'_>, format: ReportFormat, mut out: W) -> Result<()> {
    if report.is_empty() {
        return Err(Error::input("nothing to report"));
    }
    match format {
        ReportFormat::Csv => write_csv(report, out),
        ReportFormat::Json => {
            match report {
                Report::Rows(r) => serde_json::to_writer_pretty(&mut out, r)?,
                Report::Cells(c) => serde_json::to_writer_pretty(&mut out, c)?,
                Report::Dynreg(d) => serde_json::to_writer_pretty(&mut out, d)?,
            }
            out.write_all(b"\n")?;
            Ok(())
        }
        ReportFormat::SvgBar => match report {
            Report::Rows(rows) => Ok(out.write_all(svg_bars(rows).as_bytes())?),
            _ => Err(Error::input("svg_bar output needs audit rows")),
        },
    }
}

fn write_csv<W: Write>(report: Report<'_>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match report {
        Report::Rows(rows) => {
            w.write_record(CSV_HEADER)?;
            for r in rows {
                let (ty, tl) = r
                    .diagnostics
                    .as_ref()
                    .map(|d| (num(d.abs_tau_y_median), num(d.tau_l_median)))
                    .unwrap_or_default();
                w.write_record([
                    r.label.clone(),
                    r.mode.to_string(),
                    num(r.alpha),
                    r.n_tests.to_string(),
                    r.n_skipped.to_string(),
                    num(r.pct_significant),
                    num(r.pct_at[0]),
                    num(r.pct_at[1]),
                    num(r.pct_at[2]),
                    num(r.median_tau),
                    ty,
                    tl,
                ])?;
            }
        }
        Report::Cells(cells) => {
            w.write_record(CELL_HEADER)?;
            for c in cells {
                w.write_record([
                    c.measure.clone(),
                    c.predictor.clone(),
                    num(c.tau),
                    num(c.p),
                    c.n.to_string(),
                    c.stars.as_str().to_string(),
                ])?;
            }
        }
        Report::Dynreg(rows) => {
            w.write_record(DYNREG_HEADER)?;
            for r in rows {
                w.write_record([
                    r.measure.clone(),
                    r.block.as_str().to_string(),
                    r.order.clone().unwrap_or_default(),
                    opt(r.beta),
                    opt(r.se),
                    opt(r.z),
                    opt(r.p),
                    r.n.to_string(),
                    r.bridged_years.to_string(),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const BAR_W: f64 = 36.0;
const GAP: f64 = 14.0;
const PLOT_H: f64 = 220.0;
const TOP: f64 = 40.0;
const LEFT: f64 = 50.0;
const LABEL_H: f64 = 110.0;

/// One panel per mode (raw first), one bar per label, heights are
/// `pct_significant` on a 0-100% axis with a dashed line at alpha.
fn svg_bars(rows: &[AuditRow]) -> String {
    let modes: Vec<Mode> = [Mode::Raw, Mode::OlsResidual]
        .into_iter()
        .filter(|m| rows.iter().any(|r| r.mode == *m))
        .collect();
    let panels: Vec<Vec<&AuditRow>> = modes
        .iter()
        .map(|m| rows.iter().filter(|r| r.mode == *m).collect())
        .collect();
    let widths: Vec<f64> = panels
        .iter()
        .map(|p| LEFT + p.len() as f64 * (BAR_W + GAP) + GAP)
        .collect();
    let total_w: f64 = widths.iter().sum::<f64>() + 20.0;
    let total_h = TOP + PLOT_H + LABEL_H;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let mut x0 = 10.0;
    for (k, (mode, panel)) in modes.iter().zip(&panels).enumerate() {
        let tag = (b'a' + k as u8) as char;
        let _ = writeln!(s, r#"<g class="panel" data-mode="{mode}">"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" font-size="13" font-weight="bold">({tag}) {mode}</text>"#,
            x0 + LEFT
        );
        let base = TOP + PLOT_H;
        for tick in [0, 25, 50, 75, 100] {
            let y = base - PLOT_H * f64::from(tick) / 100.0;
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{tick}%</text>"##,
                x0 + LEFT,
                x0 + widths[k],
                x0 + LEFT - 4.0,
                y + 4.0
            );
        }
        for (i, row) in panel.iter().enumerate() {
            let h = PLOT_H * row.pct_significant.clamp(0.0, 1.0);
            let bx = x0 + LEFT + GAP + i as f64 * (BAR_W + GAP);
            let _ = writeln!(
                s,
                r##"<rect class="bar" x="{bx}" y="{}" width="{BAR_W}" height="{h}" fill="#4a6fa5"><title>{}: {:.1}%</title></rect>"##,
                base - h,
                escape(&row.label),
                100.0 * row.pct_significant
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end" transform="rotate(-45 {} {})">{}</text>"#,
                bx + BAR_W / 2.0,
                base + 14.0,
                bx + BAR_W / 2.0,
                base + 14.0,
                escape(&row.label)
            );
        }
        if let Some(alpha) = panel.first().map(|r| r.alpha) {
            let y = base - PLOT_H * alpha;
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#c33" stroke-dasharray="4 3"/>"##,
                x0 + LEFT,
                x0 + widths[k]
            );
        }
        let _ = writeln!(s, "</g>");
        x0 += widths[k];
    }
    s.push_str("</svg>\n");
    s
}
