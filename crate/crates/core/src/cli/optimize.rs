//! Placement reports: the analytic optimum for the scenario's regime,
//! optionally checked against the numeric oracle.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Scenario, SweepVar};
use crate::geometry::{LinkGeometry, Regime};
use crate::linkbudget::Mode;
use crate::placement::{
    area_ratio_range, solve_large_solution, solve_numeric, solve_small, PlacementSolution,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub mode: Mode,
    pub r_1h: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementReport {
    pub y_s: f64,
    pub analytic: PlacementSolution,
    pub oracle: Option<OracleResult>,
    /// `|analytic - oracle|` in meters.
    pub gap_m: Option<f64>,
    /// The gap as a fraction of `r_h`.
    pub gap_fraction: Option<f64>,
}

/// Regime assumed for the analytic solution.
///
/// `AUTO` and `EXACT` pick the large-RIS solution when the RIS covers the
/// footprint everywhere in the domain and the small-RIS one otherwise.
pub fn analytic_regime(sc: &Scenario, g: &LinkGeometry) -> Regime {
    match sc.mode {
        Mode::Small => Regime::SmallRis,
        Mode::Large => Regime::LargeRis,
        Mode::Auto | Mode::Exact => {
            match area_ratio_range(g, &sc.ris, &sc.radio, &sc.tx, sc.domain) {
                Some((lo, _)) if lo >= 1.0 => Regime::LargeRis,
                _ => Regime::SmallRis,
            }
        }
    }
}

pub fn optimize_at(sc: &Scenario, g: &LinkGeometry, oracle: bool) -> Result<PlacementReport> {
    let mut analytic = match analytic_regime(sc, g) {
        Regime::LargeRis => solve_large_solution(g, &sc.ris, &sc.radio, &sc.tx, &sc.rx, sc.domain)?,
        _ => {
            let mut s = solve_small(g, &sc.ris, &sc.radio, &sc.tx, &sc.rx, sc.domain)?;
            s.regime_violation = s
                .area_ratio
                .is_none_or(|(_, hi)| hi > sc.options.small_ratio);
            s
        }
    };
    if analytic.regime_violation {
        log::warn!(
            "y_s = {}: the {} assumption does not hold over the whole domain",
            g.y_s,
            analytic.regime
        );
    }
    let oracle = if oracle {
        let m = solve_numeric(
            g,
            &sc.ris,
            &sc.radio,
            &sc.tx,
            &sc.rx,
            sc.oracle_mode,
            sc.domain,
            &sc.oracle,
        )?;
        analytic.oracle_r_1h = Some(m.argmax);
        Some(OracleResult {
            mode: sc.oracle_mode,
            r_1h: m.argmax,
            snr_db: m.value,
        })
    } else {
        None
    };
    let gap = oracle.as_ref().map(|o| (analytic.r_1h - o.r_1h).abs());
    Ok(PlacementReport {
        y_s: g.y_s,
        gap_fraction: gap.map(|d| d / g.r_h),
        gap_m: gap,
        analytic,
        oracle,
    })
}

/// One report per `y_s` of a `y_s` sweep, or a single report otherwise.
/// Failed points are reported as errors in place.
pub fn optimize(sc: &Scenario, oracle: bool) -> Vec<std::result::Result<PlacementReport, String>> {
    let ys: Vec<f64> = match &sc.sweep {
        Some(s) if s.variable == SweepVar::Ys => s.values(),
        _ => vec![sc.geometry.y_s],
    };
    ys.par_iter()
        .map(|&y| optimize_at(sc, &sc.geometry.with_ys(y), oracle).map_err(|e| e.to_string()))
        .collect()
}
