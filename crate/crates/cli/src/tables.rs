//! Small CSV and SVG helpers shared by the subcommands.
//!
//! Report CSVs round to two decimals for reading; the JSON twins keep
//! full precision and are the inputs for any downstream computation.

use anyhow::{bail, Result};
use uturn_core::stats::BlandAltman;

pub fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

pub fn fmt_opt2(x: Option<f64>) -> String {
    x.map(fmt2).unwrap_or_default()
}

/// Quotes a field only when it would break the row.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_row(fields: &[String]) -> String {
    let mut line = fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// Splits CSV text into `(line_number, fields)` rows after checking that
/// the header matches `expected` exactly (whitespace-insensitive per field).
pub fn csv_rows<'a>(
    text: &'a str,
    expected: &[&str],
    what: &str,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        bail!("{what}: empty file");
    };
    let got: Vec<&str> = header.split(',').map(str::trim).collect();
    if got != expected {
        bail!("{what}: expected header {:?}, got {:?}", expected.join(","), header.trim());
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != expected.len() {
            bail!(
                "{what} line {}: expected {} fields, got {}",
                idx + 1,
                expected.len(),
                fields.len()
            );
        }
        rows.push((idx + 1, fields));
    }
    Ok(rows)
}

/// Like [`csv_rows`], but locates `wanted` columns by header name instead
/// of demanding an exact layout: extra columns are ignored and order does
/// not matter. Rows come back projected onto `wanted`, in `wanted` order,
/// so wide tables (such as the detector's per-test results) feed commands
/// that only need a few columns.
pub fn csv_columns<'a>(
    text: &'a str,
    wanted: &[&str],
    what: &str,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        bail!("{what}: empty file");
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let positions: Vec<usize> = wanted
        .iter()
        .map(|w| {
            names.iter().position(|n| n == w).ok_or_else(|| {
                anyhow::anyhow!("{what}: header {:?} has no {w:?} column", header.trim())
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            bail!(
                "{what} line {}: expected {} fields, got {}",
                idx + 1,
                names.len(),
                fields.len()
            );
        }
        rows.push((idx + 1, positions.iter().map(|&p| fields[p]).collect()));
    }
    Ok(rows)
}

pub fn parse_f64(value: &str, what: &str, line: usize) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| anyhow::anyhow!("{what} line {line}: expected a number, got {value:?}"))?;
    if !v.is_finite() {
        bail!("{what} line {line}: non-finite value {value:?}");
    }
    Ok(v)
}

pub fn parse_u32(value: &str, what: &str, line: usize) -> Result<u32> {
    value
        .parse()
        .map_err(|_| anyhow::anyhow!("{what} line {line}: expected an integer, got {value:?}"))
}

pub fn parse_bool01(value: &str, what: &str, line: usize) -> Result<bool> {
    match value {
        "0" | "false" => Ok(false),
        "1" | "true" => Ok(true),
        _ => bail!("{what} line {line}: expected 0/1 or true/false, got {value:?}"),
    }
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 48.0;

struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        // Degenerate ranges still need a visible axis.
        let (lo, hi) = if hi - lo > 1e-12 { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        Scale { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

fn pad(lo: f64, hi: f64, frac: f64) -> (f64, f64) {
    let span = (hi - lo).max(1e-9);
    (lo - frac * span, hi + frac * span)
}

/// Bland-Altman scatter: pair means on x, differences on y, a solid bias
/// line and dashed limits of agreement. Plain SVG, no external assets.
pub fn bland_altman_svg(
    points: &[(f64, f64)],
    ba: &BlandAltman,
    x_label: &str,
    y_label: &str,
) -> String {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fold = |init: f64, f: fn(f64, f64) -> f64, vs: &[f64]| vs.iter().fold(init, |a, &b| f(a, b));
    let (x_lo, x_hi) = pad(
        fold(f64::INFINITY, f64::min, &xs),
        fold(f64::NEG_INFINITY, f64::max, &xs),
        0.05,
    );
    let (y_lo, y_hi) = pad(
        fold(ba.loa_lower.min(0.0), f64::min, &ys),
        fold(ba.loa_upper.max(0.0), f64::max, &ys),
        0.10,
    );
    let sx = Scale::new(x_lo, x_hi, MARGIN_L, SVG_W - MARGIN_R);
    let sy = Scale::new(y_lo, y_hi, SVG_H - MARGIN_B, MARGIN_T);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    let x0 = MARGIN_L;
    let x1 = SVG_W - MARGIN_R;
    let y0 = SVG_H - MARGIN_B;
    svg.push_str(&format!(
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{x0}\" y1=\"{}\" x2=\"{x0}\" y2=\"{y0}\" stroke=\"black\"/>\n",
        MARGIN_T
    ));
    for t in sx.ticks(5) {
        let px = sx.map(t);
        svg.push_str(&format!(
            "  <line x1=\"{px:.1}\" y1=\"{y0}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{px:.1}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            y0 + 18.0,
            fmt2(t)
        ));
    }
    for t in sy.ticks(5) {
        let py = sy.map(t);
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{py:.1}\" x2=\"{x0}\" y2=\"{py:.1}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            x0 - 8.0,
            py + 4.0,
            fmt2(t)
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        SVG_H - 10.0,
        x_label
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (MARGIN_T + y0) / 2.0,
        (MARGIN_T + y0) / 2.0,
        y_label
    ));

    // Bias and limits of agreement.
    for (value, dash) in [(ba.bias, ""), (ba.loa_lower, " stroke-dasharray=\"6 4\""), (ba.loa_upper, " stroke-dasharray=\"6 4\"")] {
        let py = sy.map(value);
        svg.push_str(&format!(
            "  <line x1=\"{x0}\" y1=\"{py:.1}\" x2=\"{x1}\" y2=\"{py:.1}\" stroke=\"crimson\"{dash}/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"crimson\" text-anchor=\"end\">{}</text>\n",
            x1 - 4.0,
            py - 4.0,
            fmt2(value)
        ));
    }

    for &(x, y) in points {
        svg.push_str(&format!(
            "  <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n",
            sx.map(x),
            sy.map(y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_mismatch_is_an_error() {
        let err = csv_rows("id,x\np1,1\n", &["id", "a", "b"], "pairs").unwrap_err();
        assert!(err.to_string().contains("expected header"));
    }

    #[test]
    fn rows_carry_line_numbers() {
        let rows = csv_rows("id,a,b\n\np1, 1.0 ,2.0\n", &["id", "a", "b"], "pairs").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].0, 3);
        assert_eq!(rows[0].1, vec!["p1", "1.0", "2.0"]);
    }

    #[test]
    fn ragged_row_is_an_error() {
        let err = csv_rows("id,a,b\np1,1.0\n", &["id", "a", "b"], "pairs").unwrap_err();
        assert!(err.to_string().contains("expected 3 fields"));
    }

    #[test]
    fn columns_are_found_by_name_in_wide_tables() {
        let text = "session_id,participant_id,day,n_turns,turn_speed_median\n\
                    s1,p1,3,6,1.9\n\
                    s2,p2,4,0,\n";
        let rows =
            csv_columns(text, &["participant_id", "day", "turn_speed_median"], "tests").unwrap();
        assert_eq!(rows[0].1, vec!["p1", "3", "1.9"]);
        assert_eq!(rows[1].1, vec!["p2", "4", ""]);
    }

    #[test]
    fn missing_column_names_the_gap() {
        let err = csv_columns("id,a\np1,1\n", &["id", "value"], "aggregates").unwrap_err();
        assert!(err.to_string().contains("no \"value\" column"), "{err}");
    }

    #[test]
    fn projected_rows_still_reject_ragged_lines() {
        let err = csv_columns("id,a,b\np1,1\n", &["id"], "pairs").unwrap_err();
        assert!(err.to_string().contains("expected 3 fields"));
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn svg_contains_points_and_limit_lines() {
        let ba = BlandAltman { n: 3, bias: 0.1, sd: 0.05, loa_lower: 0.002, loa_upper: 0.198 };
        let svg = bland_altman_svg(
            &[(1.0, 0.1), (1.5, 0.05), (2.0, 0.15)],
            &ba,
            "mean turn speed (rad/s)",
            "difference (rad/s)",
        );
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert!(svg.contains("mean turn speed"));
    }

    #[test]
    fn rounding_is_two_decimals() {
        assert_eq!(fmt2(0.415), "0.41");
        assert_eq!(fmt2(3.14159), "3.14");
        assert_eq!(fmt_opt2(None), "");
    }
}
