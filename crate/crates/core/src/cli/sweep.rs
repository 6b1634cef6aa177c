//! Parameter sweeps and their CSV/JSON/SVG output.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Scenario, SweepSection, SweepVar};
use crate::antenna::AntennaSpec;
use crate::geometry::IlluminatedGrid;
use crate::linkbudget::{evaluate, ru_diagnostics, LinkBudgetResult, Mode, RuDiagnostics};
use crate::units::watts_to_dbm;
use crate::Result;

/// Fixed CSV header.
pub const CSV_HEADER: &str = "sweep_var,value,r1_m,r2_m,theta_i_deg,theta_r_deg,Si_m2,S_m2,M,\
PR_exact_dBm,PR_closed_dBm,snr_exact_dB,snr_closed_dB,regime";

/// Extra columns appended with `--diagnostics`.
pub const DIAGNOSTIC_HEADER: &str =
    "rx_gain_max_over_min,r1_over_max_r1n,r2_over_max_r2n,max_gs_i_ratio,max_gs_r_ratio";

/// One sweep point. Missing values mean the model failed at that point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub sweep_var: &'static str,
    pub value: f64,
    pub r1_m: Option<f64>,
    pub r2_m: Option<f64>,
    pub theta_i_deg: Option<f64>,
    pub theta_r_deg: Option<f64>,
    #[serde(rename = "Si_m2")]
    pub si_m2: Option<f64>,
    #[serde(rename = "S_m2")]
    pub s_m2: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "PR_exact_dBm")]
    pub pr_exact_dbm: Option<f64>,
    #[serde(rename = "PR_closed_dBm")]
    pub pr_closed_dbm: Option<f64>,
    #[serde(rename = "snr_exact_dB")]
    pub snr_exact_db: Option<f64>,
    #[serde(rename = "snr_closed_dB")]
    pub snr_closed_db: Option<f64>,
    pub regime: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<RuDiagnostics>,
    #[serde(skip)]
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(var: SweepVar, value: f64, error: String) -> Self {
        Self {
            sweep_var: var.as_str(),
            value,
            r1_m: None,
            r2_m: None,
            theta_i_deg: None,
            theta_r_deg: None,
            si_m2: None,
            s_m2: None,
            m: None,
            pr_exact_dbm: None,
            pr_closed_dbm: None,
            snr_exact_db: None,
            snr_closed_db: None,
            regime: None,
            diagnostics: None,
            error: Some(error),
        }
    }
}

/// Evaluates the scenario at one swept value.
pub fn evaluate_point(
    sc: &Scenario,
    var: SweepVar,
    value: f64,
    diagnostics: bool,
) -> Result<(LinkBudgetResult, Option<RuDiagnostics>)> {
    let mut g = sc.geometry;
    let mut rx = sc.rx;
    match var {
        SweepVar::R1h => g.r_1h = value,
        SweepVar::Ys => g.y_s = value,
        SweepVar::Dr => rx = AntennaSpec::new(value, sc.rx.efficiency)?,
    }
    let r = evaluate(&g, &sc.ris, &sc.radio, &sc.tx, &rx, sc.mode, &sc.options)?;
    let d = if diagnostics {
        let grid = IlluminatedGrid::new(&g, &sc.ris, &sc.radio, &sc.tx, &rx)?;
        ru_diagnostics(&grid).ok()
    } else {
        None
    };
    Ok((r, d))
}

fn record(sc: &Scenario, var: SweepVar, value: f64, diagnostics: bool) -> SweepRecord {
    let (r, d) = match evaluate_point(sc, var, value, diagnostics) {
        Ok(v) => v,
        Err(e) => {
            log::warn!("{} = {value}: {e}", var.as_str());
            return SweepRecord::failed(var, value, e.to_string());
        }
    };
    let closed = match sc.mode {
        Mode::Small => r.p_small,
        Mode::Large => r.p_large,
        Mode::Exact | Mode::Auto => r.p_closed(),
    };
    let n0 = sc.radio.noise_power().dbm;
    let pr_exact = r.p_exact.map(watts_to_dbm);
    let pr_closed = closed.map(watts_to_dbm);
    SweepRecord {
        sweep_var: var.as_str(),
        value,
        r1_m: Some(r.r1),
        r2_m: Some(r.r2),
        theta_i_deg: Some(r.theta_i.to_degrees()),
        theta_r_deg: Some(r.theta_r.to_degrees()),
        si_m2: Some(r.s_i),
        s_m2: Some(r.s),
        m: Some(r.m),
        pr_exact_dbm: pr_exact,
        pr_closed_dbm: pr_closed,
        snr_exact_db: pr_exact.map(|p| p - n0),
        snr_closed_db: pr_closed.map(|p| p - n0),
        regime: Some(r.regime.as_str()),
        diagnostics: d,
        error: None,
    }
}

/// Evaluates every sweep point in parallel; records come back in grid order.
pub fn run_sweep(sc: &Scenario, sweep: &SweepSection, diagnostics: bool) -> Vec<SweepRecord> {
    sweep
        .values()
        .par_iter()
        .map(|&v| record(sc, sweep.variable, v, diagnostics))
        .collect()
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn to_csv(records: &[SweepRecord], diagnostics: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    if diagnostics {
        out.push(',');
        out.push_str(DIAGNOSTIC_HEADER);
    }
    out.push('\n');
    for r in records {
        let cells = [
            r.sweep_var.to_string(),
            num(Some(r.value)),
            num(r.r1_m),
            num(r.r2_m),
            num(r.theta_i_deg),
            num(r.theta_r_deg),
            num(r.si_m2),
            num(r.s_m2),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            num(r.pr_exact_dbm),
            num(r.pr_closed_dbm),
            num(r.snr_exact_db),
            num(r.snr_closed_db),
            r.regime.unwrap_or_default().to_string(),
        ];
        out.push_str(&cells.join(","));
        if diagnostics {
            let d = r.diagnostics;
            let extra = [
                num(d.map(|d| d.rx_gain_ratio)),
                num(d.map(|d| d.r1_ratio)),
                num(d.map(|d| d.r2_ratio)),
                num(d.map(|d| d.gs_i_ratio)),
                num(d.map(|d| d.gs_r_ratio)),
            ];
            out.push(',');
            out.push_str(&extra.join(","));
        }
        out.push('\n');
    }
    out
}

pub fn to_json(records: &[SweepRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

/// Name, color and points of one plotted curve.
type Series = (&'static str, &'static str, Vec<(f64, f64)>);

/// SNR curves as a minimal SVG line plot.
pub fn to_svg(records: &[SweepRecord]) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let series: [Series; 2] = [
        (
            "exact",
            "#1f77b4",
            records
                .iter()
                .filter_map(|r| Some((r.value, r.snr_exact_db?)))
                .collect(),
        ),
        (
            "closed form",
            "#d62728",
            records
                .iter()
                .filter_map(|r| Some((r.value, r.snr_closed_db?)))
                .collect(),
        ),
    ];
    let pts = series
        .iter()
        .flat_map(|s| s.2.iter())
        .filter(|p| p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let var = records.first().map(|r| r.sweep_var).unwrap_or("value");
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{var}</text>"#,
        w / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">SNR (dB)</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">{x:.3}</text>"#,
            sx(x),
            h - pad + 15.0
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.1}</text>"#,
            pad - 4.0,
            sy(y) + 4.0
        );
    }
    for (k, (name, color, data)) in series.iter().enumerate() {
        let path: Vec<String> = data
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = pad + 15.0 + 15.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{name}</text>"#,
            w - pad - 80.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
