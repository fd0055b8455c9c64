//! CSV tables and static SVG line plots.
//!
//! Every number is written with a fixed format, so equal inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mfrate_core::ExtReal;

use crate::error::{HarnessError, Result};

/// Header of every [`RateReport`] CSV.
pub const RATE_HEADER: [&str; 7] = ["instance", "n", "measured", "rate", "gap", "bound", "pass"];
/// Header of the identity suite CSV.
pub const IDENTITY_HEADER: [&str; 5] = ["identity", "instances", "max_deviation", "tolerance", "pass"];

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.12e}")
    }
}

pub fn fmt_ext(x: ExtReal) -> String {
    match x {
        ExtReal::Finite(v) => fmt_f64(v),
        ExtReal::Infinite => "inf".into(),
    }
}

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// One comparison of a measured decay against a rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub instance: String,
    pub n: u64,
    pub measured: ExtReal,
    pub rate: ExtReal,
    pub gap: ExtReal,
    pub bound: f64,
    pub pass: bool,
}

impl RateRow {
    /// The gap is `|measured − rate|` and the row passes iff `gap ≤ bound`.
    pub fn new(instance: impl Into<String>, n: u64, measured: ExtReal, rate: ExtReal, bound: f64) -> Self {
        let gap = measured.gap(rate);
        RateRow {
            instance: instance.into(),
            n,
            measured,
            rate,
            gap,
            bound,
            pass: gap <= ExtReal::Finite(bound),
        }
    }
}

/// Rows plus any whole-report condition (such as a monotone trend).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    /// Failed whole-report conditions, described.
    pub failures: Vec<String>,
}

impl RateReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&RATE_HEADER);
        for r in &self.rows {
            t.push(vec![
                r.instance.clone(),
                r.n.to_string(),
                fmt_ext(r.measured),
                fmt_ext(r.rate),
                fmt_ext(r.gap),
                fmt_f64(r.bound),
                r.pass.to_string(),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#555555"];

impl Plot {
    pub fn to_svg(&self) -> String {
        let tx = |v: f64| if self.log_x { v.log10() } else { v };
        let ty = |v: f64| if self.log_y { v.log10() } else { v };
        let usable = |(x, y): &(f64, f64)| {
            let (a, b) = (tx(*x), ty(*y));
            a.is_finite() && b.is_finite()
        };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().filter(|p| usable(p)).map(|(x, y)| (tx(*x), ty(*y))))
            .collect();
        let range = |vals: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = range(&mut pts.iter().map(|p| p.0));
        let (y0, y1) = range(&mut pts.iter().map(|p| p.1));
        let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let tick = |v: f64, log: bool| if log { format!("{:.3e}", 10f64.powf(v)) } else { format!("{v:.3e}") };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(s, r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#);
        let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{left}" y="{}" text-anchor="start">{}</text>"#, bottom + 16.0, tick(x0, self.log_x));
        let _ = writeln!(s, r#"<text x="{right}" y="{}" text-anchor="end">{}</text>"#, bottom + 16.0, tick(x1, self.log_x));
        let _ = writeln!(s, r#"<text x="{}" y="{bottom}" text-anchor="end">{}</text>"#, left - 4.0, tick(y0, self.log_y));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 4.0, top + 4.0, tick(y1, self.log_y));
        let scale = |label: &str, log: bool| if log { format!("{label} (log)") } else { label.to_string() };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(&scale(&self.x_label, self.log_x)));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            HEIGHT / 2.0,
            escape(&scale(&self.y_label, self.log_y))
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let coords: Vec<String> = series
                .points
                .iter()
                .filter(|p| usable(p))
                .map(|(x, y)| format!("{:.2},{:.2}", px(tx(*x)), py(ty(*y))))
                .collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, coords.join(" "));
            let ly = top + 16.0 * i as f64;
            let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, right - 120.0, right - 100.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, right - 95.0, ly + 4.0, escape(&series.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    #[default]
    Both,
}

/// Writes `<stem>.csv` and, when a plot is given, `<stem>.svg` into `dir`.
pub fn emit_reports(dir: &Path, stem: &str, table: &Table, plot: Option<&Plot>, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let mut write = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
        Ok(())
    };
    if format != Format::Svg {
        write(format!("{stem}.csv"), table.to_csv())?;
    }
    if let (Some(plot), true) = (plot, format != Format::Csv) {
        write(format!("{stem}.svg"), plot.to_svg())?;
    }
    Ok(written)
}
