//! Result export: versioned JSON, CSV of the index-value matrix, and an SVG
//! validity plot of the observed curve against all replicate curves.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::bootstrap::BootstrapResult;
use crate::error::{Error, Result};

/// Write the full result as JSON. Reading it back with `read_result_json`
/// reproduces every field bit-exactly.
pub fn write_result_json(result: &BootstrapResult, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(result)
        .map_err(|e| Error::numeric(format!("result serialization failed: {}", e)))?;
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_result_json(path: &Path) -> Result<BootstrapResult> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// CSV of the index-value matrix: header `row,k=...`, one row per replicate
/// plus a final `observed` row.
pub fn write_value_matrix_csv(result: &BootstrapResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("row");
    for k in &result.k_values {
        let _ = write!(out, ",k={}", k);
    }
    out.push('\n');
    for (i, row) in result.replicates.iter().enumerate() {
        let _ = write!(out, "replicate{}", i + 1);
        for v in row {
            let _ = write!(out, ",{}", v);
        }
        out.push('\n');
    }
    out.push_str("observed");
    for k in &result.k_values {
        let _ = write!(out, ",{}", result.observed[k]);
    }
    out.push('\n');
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Validity plot: index value against k, one muted polyline per replicate
/// and the observed curve highlighted, with k-axis ticks at each candidate k.
pub fn write_validity_plot_svg(result: &BootstrapResult, path: &Path) -> Result<()> {
    let svg = validity_plot_svg(result)?;
    fs::write(path, svg).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn validity_plot_svg(result: &BootstrapResult) -> Result<String> {
    let ks = &result.k_values;
    if ks.is_empty() {
        return Err(Error::config("empty K"));
    }
    let mut values: Vec<f64> = ks.iter().map(|k| result.observed[k]).collect();
    for row in &result.replicates {
        values.extend_from_slice(row);
    }
    let finite: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::numeric("no finite index values to plot"));
    }
    let vmin = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = if vmax > vmin { 0.05 * (vmax - vmin) } else { 0.5 };
    let (lo, hi) = (vmin - pad, vmax + pad);

    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const ML: f64 = 60.0;
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 50.0;
    let kmin = *ks.iter().min().unwrap() as f64;
    let kmax = *ks.iter().max().unwrap() as f64;
    let kspan = if kmax > kmin { kmax - kmin } else { 1.0 };
    let x = |k: f64| ML + (k - kmin) / kspan * (W - ML - MR);
    let y = |v: f64| {
        let v = v.clamp(lo, hi);
        H - MB - (v - lo) / (hi - lo) * (H - MT - MB)
    };

    let polyline = |row: &[f64], style: &str| -> String {
        let points: Vec<String> = ks
            .iter()
            .zip(row)
            .map(|(&k, &v)| format!("{:.2},{:.2}", x(k as f64), y(v)))
            .collect();
        format!("<polyline fill=\"none\" {} points=\"{}\"/>\n", style, points.join(" "))
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    );
    let _ = write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    );
    for &k in ks {
        let xi = x(k as f64);
        let _ = write!(
            svg,
            "<line x1=\"{xi:.2}\" y1=\"{0}\" x2=\"{xi:.2}\" y2=\"{1}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 5.0
        );
        let _ = write!(
            svg,
            "<text x=\"{xi:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{k}</text>\n",
            H - MB + 20.0
        );
    }
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let yi = y(v);
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{yi:.2}\" text-anchor=\"end\" font-size=\"11\">{v:.3}</text>\n",
            ML - 6.0
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">k</text>\n",
        (ML + W - MR) / 2.0,
        H - 10.0
    );
    for row in &result.replicates {
        svg.push_str(&polyline(row, "stroke=\"#b0b0b0\" stroke-width=\"1\""));
    }
    let observed: Vec<f64> = ks.iter().map(|k| result.observed[k]).collect();
    svg.push_str(&polyline(&observed, "stroke=\"#c02020\" stroke-width=\"2.5\""));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Human-readable summary: per-k p-values, aggregate p-values in each mode,
/// calibrated profile, and the selected k.
pub fn summary_text(result: &BootstrapResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "bootstrap replicates: m = {}", result.m);
    let _ = writeln!(out, "{:>4} {:>12} {:>12} {:>12} {:>12}", "k", "observed", "EV", "SV", "calibrated");
    for &k in &result.k_values {
        let cal = result
            .calibrated
            .get(&k)
            .map(|c| format!("{:12.4}", c))
            .unwrap_or_else(|| format!("{:>12}", "-"));
        let ev = result.ev.get(&k).map(|v| format!("{:12.4}", v)).unwrap_or_else(|| format!("{:>12}", "-"));
        let sv = result.sv.get(&k).map(|v| format!("{:12.4}", v)).unwrap_or_else(|| format!("{:>12}", "-"));
        let _ = writeln!(out, "{:>4} {:>12.4} {} {} {}", k, result.observed[&k], ev, sv, cal);
    }
    let _ = writeln!(out, "per-k p-values:");
    for &k in &result.k_values {
        let _ = writeln!(out, "  k = {:>2}: p = {:.6}", k, result.per_k_p[&k]);
    }
    let _ = writeln!(out, "aggregate p (mean rank):  {:.6}", result.aggregate_p);
    let _ = writeln!(out, "aggregate p (mean raw):   {:.6}", result.aggregate_p_mean_raw);
    let _ = writeln!(out, "aggregate p (bonferroni): {:.6}", result.aggregate_p_bonferroni);
    let _ = writeln!(out, "selected k: {}", result.k_hat);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn toy_result() -> BootstrapResult {
        let k_values = vec![2, 3, 4];
        let observed: BTreeMap<usize, f64> = [(2, 0.7), (3, 0.6), (4, 0.55)].into();
        let replicates = vec![
            vec![0.40, 0.35, 0.30],
            vec![0.45, 0.41, 0.37],
            vec![0.42, 0.38, 0.33],
        ];
        let per_k_p: BTreeMap<usize, f64> = [(2, 0.25), (3, 0.25), (4, 0.25)].into();
        BootstrapResult {
            schema_version: crate::bootstrap::RESULT_SCHEMA_VERSION,
            k_values: k_values.clone(),
            observed,
            replicates,
            per_k_p,
            aggregate_p: 0.25,
            aggregate_p_mean_raw: 0.25,
            aggregate_p_bonferroni: 0.75,
            calibrated: [(2, 2.0), (3, 1.5), (4, 1.0)].into(),
            k_hat: 2,
            ev: [(2, 0.42), (3, 0.38), (4, 0.33)].into(),
            sv: [(2, 0.02), (3, 0.02), (4, 0.02)].into(),
            m: 3,
            seed: 7,
            config_echo: None,
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let result = toy_result();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("result.json");
        write_result_json(&result, &path).unwrap();
        let back = read_result_json(&path).unwrap();
        assert_eq!(
            serde_json::to_string(&result).unwrap(),
            serde_json::to_string(&back).unwrap()
        );
        for &k in &result.k_values {
            assert_eq!(result.observed[&k].to_bits(), back.observed[&k].to_bits());
            assert_eq!(result.calibrated[&k].to_bits(), back.calibrated[&k].to_bits());
        }
    }

    #[test]
    fn svg_has_one_polyline_per_curve_and_k_ticks() {
        let result = toy_result();
        let svg = validity_plot_svg(&result).unwrap();
        let polylines = svg.matches("<polyline").count();
        assert_eq!(polylines, result.m + 1);
        for k in &result.k_values {
            assert!(svg.contains(&format!(">{}</text>", k)));
        }
    }

    #[test]
    fn csv_has_header_and_observed_row() {
        let result = toy_result();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("values.csv");
        write_value_matrix_csv(&result, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "row,k=2,k=3,k=4");
        assert_eq!(text.lines().count(), result.m + 2);
        assert!(text.lines().last().unwrap().starts_with("observed,"));
    }
}
