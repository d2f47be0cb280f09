//! CSV tables, polar SVG plots and atomic file output.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::amplitudes::{AmplitudeRow, OrderTable};
use crate::error::Result;

pub const AMPLITUDE_HEADER: &str = "k,theta0_deg,side,theta_deg,re_f,im_f,abs_f2";
pub const ORDER_HEADER: &str = "n,sin_theta_n,re_r,im_r,re_t,im_t";

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn amplitude_csv<'a>(rows: impl IntoIterator<Item = &'a AmplitudeRow>) -> String {
    let mut s = String::from(AMPLITUDE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.k,
            z(r.theta0.to_degrees()),
            r.side.as_str(),
            z(r.theta.to_degrees()),
            z(r.f.re),
            z(r.f.im),
            r.abs_f2()
        );
    }
    s
}

pub fn order_csv(table: &OrderTable) -> String {
    let mut s = String::from(ORDER_HEADER);
    s.push('\n');
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.n, z(r.sin_theta), z(r.r.re), z(r.r.im), z(r.t.re), z(r.t.im));
    }
    s
}

/// Maps `-0.0` to `0.0`.
fn z(x: f64) -> f64 {
    x + 0.0
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One closed curve of `|f(θ)|` per series, normalized to the largest value
/// over all series.
pub fn polar_svg(series: &[(String, Vec<AmplitudeRow>)]) -> String {
    const SIZE: f64 = 480.0;
    const C: f64 = SIZE / 2.0;
    const R: f64 = 200.0;
    let peak = series.iter().flat_map(|(_, rows)| rows.iter().map(|r| r.f.norm())).fold(0.0, f64::max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{}" viewBox="0 0 {SIZE} {}">"#,
        SIZE + 20.0 * series.len() as f64,
        SIZE + 20.0 * series.len() as f64
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(s, r##"<circle cx="{C}" cy="{C}" r="{:.3}" fill="none" stroke="#cccccc"/>"##, R * frac);
    }
    let _ = writeln!(s, r##"<line x1="{}" y1="{C}" x2="{}" y2="{C}" stroke="#cccccc"/>"##, C - R, C + R);
    let _ = writeln!(s, r##"<line x1="{C}" y1="{}" x2="{C}" y2="{}" stroke="#cccccc"/>"##, C - R, C + R);
    let _ = writeln!(s, r#"<text x="8" y="16" font-family="sans-serif" font-size="12">max |f| = {peak:.6e}</text>"#);
    for (idx, (label, rows)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut sorted: Vec<&AmplitudeRow> = rows.iter().collect();
        sorted.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        let pts: Vec<String> = sorted
            .iter()
            .map(|r| {
                let rho = if peak > 0.0 { R * r.f.norm() / peak } else { 0.0 };
                format!("{:.3},{:.3}", C + rho * r.theta.cos(), C - rho * r.theta.sin())
            })
            .collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="8" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            SIZE + 14.0 + 20.0 * idx as f64,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
