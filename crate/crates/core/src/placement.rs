//! SNR-maximizing horizontal RIS placement: the small-RIS cubic, the
//! large-RIS quadratic and a numeric grid + golden-section oracle.

use serde::{Deserialize, Serialize};

use crate::antenna::{fnbw, AntennaSpec, RadioConfig};
use crate::geometry::{
    illuminated_footprint, IlluminatedGrid, LinkGeometry, Regime, RisSpec, DEFAULT_SMALL_RATIO,
};
use crate::linkbudget::{exact_received_power_grid, large_ris_power, small_ris_power, snr, Mode};
use crate::numerics::{cubic_discriminant, scalar_maximize, solve_cubic, solve_quadratic, Maximum};
use crate::{Error, Result};

/// Default oracle grid size.
pub const DEFAULT_GRID: usize = 500;

/// Default oracle refinement tolerance (m).
pub const DEFAULT_REFINE_TOL: f64 = 1e-6;

/// Coefficients `(a, b, c, d)` of the small-RIS stationarity cubic in `r_1h`.
pub fn small_ris_cubic(g: &LinkGeometry) -> (f64, f64, f64, f64) {
    let dt2 = (g.h_s - g.h_t).powi(2);
    let dr2 = (g.h_s - g.h_r).powi(2);
    let ys2 = g.y_s * g.y_s;
    let rh = g.r_h;
    (
        6.0,
        -9.0 * rh,
        3.0 * (2.0 * ys2 + rh * rh + dt2 + dr2),
        -3.0 * rh * (ys2 + dt2),
    )
}

/// Coefficients `(a, b, c)` of the large-RIS stationarity quadratic in `r_1h`.
pub fn large_ris_quadratic(g: &LinkGeometry) -> (f64, f64, f64) {
    let dt2 = (g.h_s - g.h_t).powi(2);
    let dr2 = (g.h_s - g.h_r).powi(2);
    let rh = g.r_h;
    (rh, dt2 - rh * rh - dr2, -rh * (g.y_s * g.y_s + dt2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    LocalMax,
    LocalMin,
    Inflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub r_1h: f64,
    pub kind: StationaryKind,
    pub snr_db: f64,
    pub in_domain: bool,
}

/// Shape of the SNR-vs-`r_1h` curve implied by the stationary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Landscape {
    /// One interior maximum.
    Unimodal,
    /// Two maxima separated by a minimum.
    Bimodal,
    /// Optimum on a domain endpoint.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementSolution {
    pub r_1h: f64,
    pub snr_db: f64,
    pub stationary: Vec<StationaryPoint>,
    /// Cubic discriminant; small-RIS solutions only.
    pub discriminant: Option<f64>,
    pub regime: Regime,
    pub landscape: Landscape,
    /// Set when the optimum is a domain endpoint rather than a root.
    pub at_boundary: bool,
    pub domain: (f64, f64),
    /// Regime implied by the footprint differs from the one assumed.
    pub regime_violation: bool,
    /// Range `(min, max)` of `S_s / S_i` over the domain.
    pub area_ratio: Option<(f64, f64)>,
    pub oracle_r_1h: Option<f64>,
}

/// Default placement domain `[0, 2 r_h]`.
pub fn default_domain(g: &LinkGeometry) -> (f64, f64) {
    (0.0, 2.0 * g.r_h)
}

fn check_domain(domain: (f64, f64)) -> Result<()> {
    if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
        return Err(Error::invalid("domain", "need finite lo < hi"));
    }
    Ok(())
}

/// Small-RIS closed-form SNR in dB at `r_1h`, `-inf` where undefined.
pub fn small_snr_db(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
    r_1h: f64,
) -> f64 {
    small_ris_power(&g.with_r1h(r_1h), ris, cfg, tx, rx)
        .map(|p| snr(p, cfg).db)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Large-RIS closed-form SNR in dB at `r_1h`, `-inf` where undefined.
pub fn large_snr_db(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
    r_1h: f64,
) -> f64 {
    large_ris_power(&g.with_r1h(r_1h), ris, cfg, tx, rx)
        .map(|p| snr(p.expanded, cfg).db)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Exact co-phased SNR in dB at `r_1h`, `-inf` where nothing is lit.
pub fn exact_snr_db(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
    r_1h: f64,
) -> f64 {
    IlluminatedGrid::new(&g.with_r1h(r_1h), ris, cfg, tx, rx)
        .and_then(|grid| exact_received_power_grid(&grid, cfg))
        .map(|p| snr(p, cfg).db)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Classifies a stationary point of `f` by the sign of central differences
/// on either side.
pub fn classify<F: Fn(f64) -> f64>(f: F, x: f64, step: f64) -> StationaryKind {
    let left = f(x) - f(x - step);
    let right = f(x + step) - f(x);
    if left > 0.0 && right < 0.0 {
        StationaryKind::LocalMax
    } else if left < 0.0 && right > 0.0 {
        StationaryKind::LocalMin
    } else {
        StationaryKind::Inflection
    }
}

/// Optimal placement under the small-RIS closed form.
///
/// Real roots of the cubic are classified numerically; the optimum is the
/// best of the in-domain roots and the two endpoints, ties going to the
/// smaller `r_1h`.
pub fn solve_small(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
    domain: (f64, f64),
) -> Result<PlacementSolution> {
    g.validate()?;
    check_domain(domain)?;
    let (a, b, c, d) = small_ris_cubic(g);
    let roots = solve_cubic(a, b, c, d)?;
    let f = |r: f64| small_snr_db(g, ris, cfg, tx, rx, r);
    let step = 1e-4 * g.r_h;
    let stationary: Vec<StationaryPoint> = roots
        .roots
        .iter()
        .map(|&r| StationaryPoint {
            r_1h: r,
            kind: classify(f, r, step),
            snr_db: f(r),
            in_domain: r >= domain.0 && r <= domain.1,
        })
        .collect();
    let mut best = (domain.0, f(domain.0), true);
    let mut candidates: Vec<(f64, f64, bool)> = stationary
        .iter()
        .filter(|s| s.in_domain)
        .map(|s| (s.r_1h, s.snr_db, false))
        .collect();
    candidates.push((domain.1, f(domain.1), true));
    for cand in candidates {
        if cand.1 > best.1 || (cand.1 == best.1 && cand.0 < best.0) {
            best = cand;
        }
    }
    if best.2 {
        log::warn!(
            "small-RIS optimum lies on the domain boundary at r_1h = {}",
            best.0
        );
    }
    let maxima = stationary
        .iter()
        .filter(|s| s.in_domain && s.kind == StationaryKind::LocalMax)
        .count();
    let landscape = if best.2 {
        Landscape::Boundary
    } else if maxima >= 2 {
        Landscape::Bimodal
    } else {
        Landscape::Unimodal
    };
    let ratio = area_ratio_range(g, ris, cfg, tx, domain);
    let regime_violation = ratio.is_none_or(|(_, hi)| hi > DEFAULT_SMALL_RATIO);
    Ok(PlacementSolution {
        r_1h: best.0,
        snr_db: best.1,
        stationary,
        discriminant: Some(roots.discriminant),
        regime: Regime::SmallRis,
        landscape,
        at_boundary: best.2,
        domain,
        regime_violation,
        area_ratio: ratio,
        oracle_r_1h: None,
    })
}

/// Range of `S_s / S_i` over the domain, from a scan of the FNBW footprint.
pub fn area_ratio_range(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    domain: (f64, f64),
) -> Option<(f64, f64)> {
    let bw = fnbw(tx, cfg.wavelength()).ok()?;
    let n = 200;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..=n {
        let r = domain.0 + (domain.1 - domain.0) * k as f64 / n as f64;
        let ratio = ris.area() / illuminated_footprint(&g.with_r1h(r), bw).ok()?.area;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Some((lo, hi))
}

/// Large-RIS closed-form optimum: the larger root of the stationarity
/// quadratic.
pub fn solve_large(g: &LinkGeometry) -> Result<f64> {
    g.validate()?;
    let (a, b, c) = large_ris_quadratic(g);
    let roots = solve_quadratic(a, b, c)?;
    roots
        .last()
        .copied()
        .ok_or_else(|| Error::Numeric("large-RIS quadratic has no real root".into()))
}

/// [`solve_large`] wrapped as a full solution with the SNR at the optimum.
pub fn solve_large_solution(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
    domain: (f64, f64),
) -> Result<PlacementSolution> {
    check_domain(domain)?;
    let (a, b, c) = large_ris_quadratic(g);
    let f = |r: f64| large_snr_db(g, ris, cfg, tx, rx, r);
    let step = 1e-4 * g.r_h;
    let stationary: Vec<StationaryPoint> = solve_quadratic(a, b, c)?
        .into_iter()
        .map(|r| StationaryPoint {
            r_1h: r,
            kind: classify(f, r, step),
            snr_db: f(r),
            in_domain: r >= domain.0 && r <= domain.1,
        })
        .collect();
    let r = solve_large(g)?;
    let at_boundary = !(r >= domain.0 && r <= domain.1);
    let r_1h = r.clamp(domain.0, domain.1);
    let ratio = area_ratio_range(g, ris, cfg, tx, domain);
    Ok(PlacementSolution {
        r_1h,
        snr_db: f(r_1h),
        stationary,
        discriminant: None,
        regime: Regime::LargeRis,
        landscape: if at_boundary {
            Landscape::Boundary
        } else {
            Landscape::Unimodal
        },
        at_boundary,
        domain,
        regime_violation: ratio.is_none_or(|(lo, _)| lo < 1.0),
        area_ratio: ratio,
        oracle_r_1h: None,
    })
}

/// Oracle settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub grid: usize,
    pub refine_tol: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            refine_tol: DEFAULT_REFINE_TOL,
        }
    }
}

/// Numeric argmax of the SNR chosen by `mode` over `domain`.
///
/// `AUTO` is treated as `EXACT`. Points where the evaluator fails count as
/// `-inf` and are skipped.
#[allow(clippy::too_many_arguments)]
pub fn solve_numeric(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
    mode: Mode,
    domain: (f64, f64),
    oracle: &OracleSpec,
) -> Result<Maximum> {
    g.validate()?;
    check_domain(domain)?;
    let m = match mode {
        Mode::Small => scalar_maximize(
            |r| small_snr_db(g, ris, cfg, tx, rx, r),
            domain.0,
            domain.1,
            oracle.grid,
            oracle.refine_tol,
        )?,
        Mode::Large => scalar_maximize(
            |r| large_snr_db(g, ris, cfg, tx, rx, r),
            domain.0,
            domain.1,
            oracle.grid,
            oracle.refine_tol,
        )?,
        Mode::Exact | Mode::Auto => scalar_maximize(
            |r| exact_snr_db(g, ris, cfg, tx, rx, r),
            domain.0,
            domain.1,
            oracle.grid,
            oracle.refine_tol,
        )?,
    };
    if m.value == f64::NEG_INFINITY {
        return Err(Error::EmptyIllumination);
    }
    Ok(m)
}

/// Cubic discriminant at each `y_s`.
pub fn discriminant_sweep(g: &LinkGeometry, ys: &[f64]) -> Result<Vec<(f64, f64)>> {
    if ys.is_empty() {
        return Err(Error::invalid("y_s", "sweep needs at least one value"));
    }
    Ok(ys
        .iter()
        .map(|&y| {
            let (a, b, c, d) = small_ris_cubic(&g.with_ys(y));
            (y, cubic_discriminant(a, b, c, d))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::CubicRoots;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tx() -> AntennaSpec {
        AntennaSpec::new(0.15, 0.7).unwrap()
    }

    fn rx(d: f64) -> AntennaSpec {
        AntennaSpec::new(d, 0.7).unwrap()
    }

    fn cfg() -> RadioConfig {
        RadioConfig::default()
    }

    fn small_ris() -> RisSpec {
        RisSpec::square_with_area(0.012, cfg().wavelength(), 0.9).unwrap()
    }

    #[test]
    fn cubic_coefficients() {
        let g = LinkGeometry::new(80.0, 0.0, 5.0, 6.0, 3.0, 12.0).unwrap();
        let (a, b, c, d) = small_ris_cubic(&g);
        assert_eq!(a, 6.0);
        assert_eq!(b, -720.0);
        assert_eq!(c, 3.0 * (50.0 + 6400.0 + 36.0 + 81.0));
        assert_eq!(d, -240.0 * (25.0 + 36.0));
    }

    #[test]
    fn symmetric_heights_root_at_midspan() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let h = rng.gen_range(0.0..15.0);
            let g = LinkGeometry::new(
                rng.gen_range(1.0..200.0),
                0.0,
                rng.gen_range(0.1..50.0),
                h,
                h,
                12.0,
            )
            .unwrap();
            let (a, b, c, d) = small_ris_cubic(&g);
            let x = 0.5 * g.r_h;
            assert!(CubicRoots::relative_residual(a, b, c, d, x) < 1e-14);
            let roots = solve_cubic(a, b, c, d).unwrap();
            assert!(roots.roots.iter().any(|r| (r - x).abs() <= 1e-9 * g.r_h));
        }
    }

    #[test]
    fn cubic_has_positive_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let g = LinkGeometry::new(
                rng.gen_range(1.0..200.0),
                0.0,
                rng.gen_range(0.1..50.0),
                rng.gen_range(0.0..15.0),
                rng.gen_range(0.0..15.0),
                12.0,
            )
            .unwrap();
            let (a, b, c, d) = small_ris_cubic(&g);
            assert!(a > 0.0 && d < 0.0);
            assert!(solve_cubic(a, b, c, d)
                .unwrap()
                .roots
                .iter()
                .any(|&r| r > 0.0));
        }
    }

    #[test]
    fn large_quadratic_reference_value() {
        let g = LinkGeometry::new(20.0, 0.0, 10.0, 6.0, 3.0, 12.0).unwrap();
        let r = solve_large(&g).unwrap();
        assert!((r - 27.24224619778453).abs() < 1e-10);
        let (a, b, c) = large_ris_quadratic(&g);
        let v = (a * r + b) * r + c;
        let scale = (a * r * r).abs() + (b * r).abs() + c.abs();
        assert!(v.abs() / scale < 1e-12);
    }

    #[test]
    fn large_symmetric_heights_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let h = rng.gen_range(0.0..15.0);
            let (rh, ys) = (rng.gen_range(1.0..100.0), rng.gen_range(0.5..40.0));
            let g = LinkGeometry::new(rh, 0.0, ys, h, h, 12.0).unwrap();
            let want = 0.5 * (rh + (rh * rh + 4.0 * (ys * ys + (12.0 - h).powi(2))).sqrt());
            let got = solve_large(&g).unwrap();
            assert!((got - want).abs() <= 1e-12 * want);
            assert!(got > 0.5 * rh);
        }
    }

    #[test]
    fn small_two_maxima_tx_side_wins() {
        let g = LinkGeometry::new(30.0, 0.0, 5.0, 6.0, 3.0, 12.0).unwrap();
        let s = solve_small(&g, &small_ris(), &cfg(), &tx(), &rx(0.03), (0.0, 30.0)).unwrap();
        assert!(s.discriminant.unwrap() > 0.0);
        let kinds: Vec<_> = s.stationary.iter().map(|p| p.kind).collect();
        assert_eq!(
            kinds,
            vec![
                StationaryKind::LocalMax,
                StationaryKind::LocalMin,
                StationaryKind::LocalMax
            ]
        );
        assert_eq!(s.landscape, Landscape::Bimodal);
        assert!(s.r_1h < 15.0);
        assert!(!s.at_boundary);
    }

    #[test]
    fn small_large_ys_single_root() {
        let g = LinkGeometry::new(80.0, 0.0, 40.0, 6.0, 3.0, 12.0).unwrap();
        let s = solve_small(&g, &small_ris(), &cfg(), &tx(), &rx(0.03), (0.0, 160.0)).unwrap();
        assert!(s.discriminant.unwrap() < 0.0);
        assert_eq!(s.stationary.len(), 1);
        assert_eq!(s.stationary[0].kind, StationaryKind::LocalMax);
        assert!((s.r_1h - 40.0).abs() < 8.0);
    }

    #[test]
    fn symmetric_heights_tie_goes_left() {
        let g = LinkGeometry::new(30.0, 0.0, 5.0, 3.0, 3.0, 12.0).unwrap();
        let s = solve_small(&g, &small_ris(), &cfg(), &tx(), &rx(0.03), (0.0, 30.0)).unwrap();
        let maxima: Vec<_> = s
            .stationary
            .iter()
            .filter(|p| p.kind == StationaryKind::LocalMax)
            .collect();
        assert_eq!(maxima.len(), 2);
        assert!((maxima[0].r_1h + maxima[1].r_1h - 30.0).abs() < 1e-9 * 30.0);
        assert!((maxima[0].snr_db - maxima[1].snr_db).abs() < 1e-9);
        assert!(s.r_1h < 15.0);
    }

    #[test]
    fn boundary_optimum_is_flagged() {
        let g = LinkGeometry::new(30.0, 0.0, 5.0, 6.0, 3.0, 12.0).unwrap();
        let s = solve_small(&g, &small_ris(), &cfg(), &tx(), &rx(0.03), (10.0, 14.0)).unwrap();
        assert!(s.at_boundary);
        assert_eq!(s.landscape, Landscape::Boundary);
    }

    #[test]
    fn numeric_matches_small_solution() {
        let g = LinkGeometry::new(30.0, 0.0, 15.0, 6.0, 3.0, 12.0).unwrap();
        let (ris, c) = (small_ris(), cfg());
        let s = solve_small(&g, &ris, &c, &tx(), &rx(0.03), (0.0, 30.0)).unwrap();
        let n = solve_numeric(
            &g,
            &ris,
            &c,
            &tx(),
            &rx(0.03),
            Mode::Small,
            (0.0, 30.0),
            &OracleSpec::default(),
        )
        .unwrap();
        assert!((n.argmax - s.r_1h).abs() < 1e-4);
        assert!(s.snr_db >= n.value - 0.05);
    }

    #[test]
    fn numeric_matches_large_closed_form_curve() {
        let g = LinkGeometry::new(20.0, 0.0, 10.0, 6.0, 3.0, 12.0).unwrap();
        let c = cfg();
        let ris = RisSpec::half_wavelength(c.wavelength(), 8000, 8000, 0.9).unwrap();
        let n = solve_numeric(
            &g,
            &ris,
            &c,
            &tx(),
            &rx(0.01),
            Mode::Large,
            (0.0, 40.0),
            &OracleSpec::default(),
        )
        .unwrap();
        let r = solve_large(&g).unwrap();
        // the closed form drops the cos(phi/2 + theta_i) correction
        assert!((n.argmax - r).abs() < 0.05 * g.r_h, "{} vs {r}", n.argmax);
    }

    #[test]
    fn discriminant_flips_once() {
        let g = LinkGeometry::new(80.0, 0.0, 1.0, 6.0, 3.0, 12.0).unwrap();
        let ys: Vec<f64> = (0..=3900).map(|k| 1.0 + k as f64 * 0.01).collect();
        let d = discriminant_sweep(&g, &ys).unwrap();
        let flips = d
            .windows(2)
            .filter(|w| w[0].1.signum() != w[1].1.signum())
            .count();
        assert_eq!(flips, 1);
        assert!(d[0].1 > 0.0 && d.last().unwrap().1 < 0.0);
        let far = discriminant_sweep(&g, &[1e4]).unwrap();
        assert!(far[0].1 < 0.0);
        let sym = LinkGeometry::new(80.0, 0.0, 1.0, 3.0, 3.0, 12.0).unwrap();
        assert!(discriminant_sweep(&sym, &[1.0]).unwrap()[0].1 > 0.0);
        assert!(discriminant_sweep(&g, &[]).is_err());
    }

    #[test]
    fn numeric_oracle_self_test() {
        let m = scalar_maximize(
            |x| -(x - 3.3).powi(2),
            0.0,
            10.0,
            DEFAULT_GRID,
            DEFAULT_REFINE_TOL,
        )
        .unwrap();
        assert!((m.argmax - 3.3).abs() < DEFAULT_REFINE_TOL);
    }
}
