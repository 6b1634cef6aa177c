//! Built-in reference anchors checked by `risplace validate`.

use serde::Serialize;

use crate::antenna::{
    fnbw_with_factor, hpbw, noise_power, pattern_energies_with_null, AntennaSpec, RadioConfig,
    FNBW_FACTOR,
};
use crate::geometry::{illuminated_footprint, LinkGeometry, RisSpec};
use crate::placement::{discriminant_sweep, solve_large, solve_small, StationaryKind};
use crate::units::to_db;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Anchor {
    pub name: &'static str,
    pub expected: f64,
    pub actual: f64,
    /// Allowed deviation; relative when `relative` is set.
    pub tolerance: f64,
    pub relative: bool,
    pub passed: bool,
}

impl Anchor {
    fn absolute(name: &'static str, expected: f64, actual: f64, tolerance: f64) -> Self {
        Self {
            name,
            expected,
            actual,
            tolerance,
            relative: false,
            passed: (actual - expected).abs() <= tolerance,
        }
    }

    fn relative(name: &'static str, expected: f64, actual: f64, tolerance: f64) -> Self {
        Self {
            name,
            expected,
            actual,
            tolerance,
            relative: true,
            passed: (actual - expected).abs() <= tolerance * expected.abs(),
        }
    }

    pub fn line(&self) -> String {
        let tol = if self.relative {
            format!("+/-{}%", self.tolerance * 100.0)
        } else {
            format!("+/-{}", self.tolerance)
        };
        format!(
            "{} {:<32} expected={:<10} actual={:<22.10} tolerance={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.actual,
            tol
        )
    }
}

/// The reference dish with `D / lambda = 3.94` at unit wavelength.
fn reference_dish() -> AntennaSpec {
    AntennaSpec {
        diameter_m: 3.94,
        efficiency: 0.7,
    }
}

fn ref_tx() -> AntennaSpec {
    AntennaSpec {
        diameter_m: 0.15,
        efficiency: 0.7,
    }
}

/// Smallest (`largest = false`) or largest FNBW footprint area over `r_1h`
/// in `[lo, hi]`.
fn footprint_extreme(g: &LinkGeometry, bw: f64, lo: f64, hi: f64, largest: bool) -> Result<f64> {
    let n = 3000;
    let mut best = if largest { 0.0 } else { f64::INFINITY };
    for k in 0..=n {
        let r = lo + (hi - lo) * k as f64 / n as f64;
        let a = illuminated_footprint(&g.with_r1h(r), bw)?.area;
        best = if largest { best.max(a) } else { best.min(a) };
    }
    Ok(best)
}

/// SNR gap between the global maximum and the mid-span minimum of the
/// small-RIS closed form.
pub fn small_ris_spread(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
) -> Result<f64> {
    let s = solve_small(g, ris, cfg, tx, rx, (0.0, g.r_h))?;
    let min = s
        .stationary
        .iter()
        .filter(|p| p.kind == StationaryKind::LocalMin)
        .map(|p| p.snr_db)
        .fold(f64::NAN, f64::min);
    Ok(s.snr_db - min)
}

/// Evaluates every anchor with the given first-null factor (1.22 nominal).
pub fn anchors(fnbw_factor: f64) -> Result<Vec<Anchor>> {
    let cfg = RadioConfig::default();
    let lambda = cfg.wavelength();
    let dish = reference_dish();
    let tx = ref_tx();
    let rx3 = AntennaSpec {
        diameter_m: 0.03,
        efficiency: 0.7,
    };
    let mut out = Vec::new();

    let null = fnbw_with_factor(&dish, 1.0, fnbw_factor)?;
    let (main, total) = pattern_energies_with_null(&dish, 1.0, null)?;
    let hp_ref = hpbw(&dish, 1.0)?;
    out.push(Anchor::absolute(
        "main_lobe_fraction_3.94",
        0.97,
        main / total,
        0.005,
    ));
    out.push(Anchor::absolute("kappa_3.94", 0.97, hp_ref / main, 0.005));
    out.push(Anchor::absolute("mu_3.94", 0.94, hp_ref / total, 0.005));
    out.push(Anchor::absolute(
        "hpbw_3.94_deg",
        15.0,
        hp_ref.to_degrees(),
        0.1,
    ));
    out.push(Anchor::absolute(
        "fnbw_3.94_deg",
        36.1,
        null.to_degrees(),
        0.05,
    ));

    let bw = fnbw_with_factor(&tx, lambda, fnbw_factor)?;
    out.push(Anchor::absolute(
        "fnbw_tx_15cm_deg",
        2.00,
        bw.to_degrees(),
        0.01,
    ));
    out.push(Anchor::absolute(
        "hpbw_tx_15cm_deg",
        1.25,
        hpbw(&tx, lambda)?.to_degrees(),
        0.05,
    ));
    out.push(Anchor::absolute(
        "max_gain_tx_15cm_dbi",
        45.3,
        to_db(tx.max_gain(lambda)),
        0.05,
    ));
    out.push(Anchor::absolute(
        "noise_power_dbm",
        -70.99,
        noise_power(&cfg).dbm,
        0.005,
    ));

    let short_link = LinkGeometry::new(30.0, 0.0, 5.0, 6.0, 3.0, 12.0)?;
    out.push(Anchor::relative(
        "min_si_ys5_m2",
        0.09,
        footprint_extreme(&short_link, bw, 0.0, 30.0, false)?,
        0.1,
    ));
    let short_far = short_link.with_ys(15.0);
    out.push(Anchor::relative(
        "min_si_ys15_m2",
        0.69,
        footprint_extreme(&short_far, bw, 0.0, 30.0, false)?,
        0.1,
    ));
    let long_wall10 = LinkGeometry::new(80.0, 0.0, 10.0, 6.0, 3.0, 12.0)?;
    out.push(Anchor::relative(
        "si_r1h0_ys10_m2",
        0.15,
        illuminated_footprint(&long_wall10, bw)?.area,
        0.1,
    ));
    let mid_link = LinkGeometry::new(20.0, 0.0, 10.0, 6.0, 3.0, 12.0)?;
    out.push(Anchor::relative(
        "max_si_rh20_m2",
        7.97,
        footprint_extreme(&mid_link, bw, 0.0, 40.0, true)?,
        0.1,
    ));

    let ris = RisSpec::square_with_area(0.012, lambda, 0.9)?;
    let long_link = LinkGeometry::new(80.0, 0.0, 5.0, 6.0, 3.0, 12.0)?;
    out.push(Anchor::absolute(
        "snr_spread_rh80_db",
        12.5,
        small_ris_spread(&long_link, &ris, &cfg, &tx, &rx3)?,
        1.0,
    ));

    let ys: Vec<f64> = (0..=3900).map(|k| 1.0 + k as f64 * 0.01).collect();
    let d = discriminant_sweep(&long_link, &ys)?;
    let flips = d
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .count();
    out.push(Anchor::absolute(
        "discriminant_sign_changes",
        1.0,
        flips as f64,
        0.0,
    ));

    let r = solve_large(&LinkGeometry::new(20.0, 0.0, 10.0, 6.0, 3.0, 12.0)?)?;
    out.push(Anchor::absolute("large_ris_optimum_m", 27.24, r, 0.005));
    Ok(out)
}

/// Anchors at the nominal first-null factor.
pub fn default_anchors() -> Result<Vec<Anchor>> {
    anchors(FNBW_FACTOR)
}
