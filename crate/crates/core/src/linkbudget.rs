//! Received power and SNR: the exact co-phased sum over illuminated RUs and
//! the small- and large-RIS closed forms.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{hpbw, ru_gain, AntennaSpec, RadioConfig};
use crate::geometry::{
    effective_area, illuminated_footprint, link_vectors, IlluminatedGrid, LinkGeometry, Regime,
    RisSpec, RuSample, DEFAULT_SMALL_RATIO,
};
use crate::numerics::NeumaierSum;
use crate::units::{to_db, watts_to_dbm};
use crate::{Error, Result};

/// Default limit on the number of RUs summed by the exact path.
pub const DEFAULT_RU_CAP: usize = 5_000_000;

// Fixed chunk length of the parallel reduction over a sample slice.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Exact,
    Small,
    Large,
    Auto,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Exact => "EXACT",
            Mode::Small => "SMALL",
            Mode::Large => "LARGE",
            Mode::Auto => "AUTO",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EXACT" => Ok(Mode::Exact),
            "SMALL" => Ok(Mode::Small),
            "LARGE" => Ok(Mode::Large),
            "AUTO" => Ok(Mode::Auto),
            _ => Err(Error::invalid(
                "mode",
                format!("expected EXACT, SMALL, LARGE or AUTO, got `{s}`"),
            )),
        }
    }
}

/// `(lambda / 4 pi)^4 P_t Gamma^2`.
fn power_prefactor(cfg: &RadioConfig, ris: &RisSpec) -> f64 {
    (cfg.wavelength() / (4.0 * PI)).powi(4) * cfg.tx_power_w * ris.gamma * ris.gamma
}

/// Co-phased received power over explicit RU samples.
pub fn exact_received_power(samples: &[RuSample], cfg: &RadioConfig, ris: &RisSpec) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyIllumination);
    }
    let partials: Vec<NeumaierSum> = samples
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(RuSample::amplitude).collect())
        .collect();
    let mut total = NeumaierSum::new();
    for p in &partials {
        total.merge(p);
    }
    let s = total.value();
    Ok(power_prefactor(cfg, ris) * s * s)
}

/// Co-phased received power summed row by row over an illuminated grid.
///
/// Each row is summed sequentially and the row sums are merged in row order,
/// so the value does not depend on the number of worker threads.
pub fn exact_received_power_grid(grid: &IlluminatedGrid, cfg: &RadioConfig) -> Result<f64> {
    if grid.active_count() == 0 {
        return Err(Error::EmptyIllumination);
    }
    let partials = grid.map_rows(|g, row| {
        (row.start..row.end)
            .map(|i| g.amplitude(i, row.row))
            .collect::<NeumaierSum>()
    });
    let mut total = NeumaierSum::new();
    for p in &partials {
        total.merge(p);
    }
    let s = total.value();
    Ok(power_prefactor(cfg, &grid.ris) * s * s)
}

/// Received power for arbitrary reflection phases `theta_n`.
///
/// Each RU contributes `a_n exp(-j (theta_n + 2 pi (r1n + r2n) / lambda))`.
pub fn phased_received_power(
    samples: &[RuSample],
    phases: &[f64],
    cfg: &RadioConfig,
    ris: &RisSpec,
) -> Result<f64> {
    if phases.len() != samples.len() {
        return Err(Error::LengthMismatch {
            expected: samples.len(),
            found: phases.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::EmptyIllumination);
    }
    let lambda = cfg.wavelength();
    let partials: Vec<(NeumaierSum, NeumaierSum)> = samples
        .par_chunks(CHUNK)
        .zip(phases.par_chunks(CHUNK))
        .map(|(s, p)| {
            let mut re = NeumaierSum::new();
            let mut im = NeumaierSum::new();
            for (sample, theta) in s.iter().zip(p) {
                let path = (TAU * (sample.r1n + sample.r2n) / lambda).rem_euclid(TAU);
                let arg = -(theta + path);
                let a = sample.amplitude();
                re.add(a * arg.cos());
                im.add(a * arg.sin());
            }
            (re, im)
        })
        .collect();
    let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
    for (r, i) in &partials {
        re.merge(r);
        im.merge(i);
    }
    let (re, im) = (re.value(), im.value());
    Ok(power_prefactor(cfg, ris) * (re * re + im * im))
}

/// Small-RIS closed form: the whole RIS reflects with boresight gains.
pub fn small_ris_power(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
) -> Result<f64> {
    let lambda = cfg.wavelength();
    let v = link_vectors(g);
    let gs = ru_gain(v.theta_i)? * ru_gain(v.theta_r)?;
    let s_s = ris.area();
    Ok(
        power_prefactor(cfg, ris) * s_s * s_s * tx.max_gain(lambda) * rx.max_gain(lambda) * gs
            / (ris.ru_area().powi(2) * v.r1 * v.r1 * v.r2 * v.r2),
    )
}

/// Large-RIS closed form evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeRisPower {
    /// Area of the HPBW footprint.
    pub s_hpbw: f64,
    /// Power from `S_HPBW` computed through the footprint ellipse.
    pub from_footprint: f64,
    /// Power from the expanded trigonometric expression.
    pub expanded: f64,
}

pub fn large_ris_power(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
) -> Result<LargeRisPower> {
    let lambda = cfg.wavelength();
    let v = link_vectors(g);
    let bw = hpbw(tx, lambda)?;
    let half = 0.5 * bw;
    if v.theta_i + half >= 0.5 * PI {
        return Err(Error::Domain {
            what: "HPBW edge reaches grazing incidence",
            value: v.theta_i + half,
        });
    }
    let s_hpbw = illuminated_footprint(g, bw)?.area;
    let gains =
        tx.max_gain(lambda) * rx.max_gain(lambda) * ru_gain(v.theta_i)? * ru_gain(v.theta_r)?;
    let base = power_prefactor(cfg, ris) * gains / ris.ru_area().powi(2);
    let from_footprint = base * s_hpbw * s_hpbw / (v.r1 * v.r1 * v.r2 * v.r2);
    let ratio = v.r1 / v.r2;
    let shape = PI * PI * half.sin().powi(4) / (half + v.theta_i).cos().powi(4)
        * (1.0 - v.theta_i.sin().powi(2) / half.cos().powi(2));
    let expanded = base * ratio * ratio * shape;
    Ok(LargeRisPower {
        s_hpbw,
        from_footprint,
        expanded,
    })
}

/// Linear SNR and its dB value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snr {
    pub linear: f64,
    pub db: f64,
}

pub fn snr(p_r: f64, cfg: &RadioConfig) -> Snr {
    let linear = p_r / cfg.noise_power().watts;
    Snr {
        linear,
        db: to_db(linear),
    }
}

/// Settings for [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// `S_s / S_i` at or below which the RIS counts as small.
    pub small_ratio: f64,
    /// Largest active-RU count the exact path will sum.
    pub ru_cap: usize,
    /// Skip the exact sum unless the mode needs it.
    pub closed_form_only: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            small_ratio: DEFAULT_SMALL_RATIO,
            ru_cap: DEFAULT_RU_CAP,
            closed_form_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkBudgetResult {
    /// Received power of the selected path (W).
    pub p_r: f64,
    pub snr: Snr,
    /// Path that produced `p_r`.
    pub mode_used: Mode,
    pub regime: Regime,
    /// Active RU count.
    pub m: usize,
    pub s_i: f64,
    pub s_s: f64,
    /// `min(S_i, S_s)`.
    pub s: f64,
    pub r1: f64,
    pub r2: f64,
    pub theta_i: f64,
    pub theta_r: f64,
    pub p_exact: Option<f64>,
    pub p_small: Option<f64>,
    pub p_large: Option<f64>,
    pub warnings: Vec<String>,
}

impl LinkBudgetResult {
    pub fn p_r_dbm(&self) -> f64 {
        watts_to_dbm(self.p_r)
    }

    /// The closed form matching the regime: small for `SMALL_RIS` and
    /// `INTERMEDIATE`, large for `LARGE_RIS`.
    pub fn p_closed(&self) -> Option<f64> {
        match self.regime {
            Regime::LargeRis => self.p_large,
            _ => self.p_small,
        }
    }
}

/// Evaluates the link at `g` and dispatches on `mode`.
///
/// `AUTO` picks `SMALL` for `SMALL_RIS`, `LARGE` for `LARGE_RIS` and `EXACT`
/// otherwise. The exact value is attached whenever the active-RU count is
/// within the cap; above it the exact path falls back to the regime's closed
/// form with a warning.
pub fn evaluate(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
    mode: Mode,
    opts: &EvalOptions,
) -> Result<LinkBudgetResult> {
    g.validate()?;
    ris.validate()?;
    cfg.validate()?;
    let lambda = cfg.wavelength();
    let mut warnings = Vec::new();
    if !ris.is_half_wavelength(lambda) {
        warnings.push(format!(
            "RU spacing {:.4e} x {:.4e} m differs from lambda/2 = {:.4e} m; mutual coupling is not modeled",
            ris.d_x,
            ris.d_y,
            0.5 * lambda
        ));
    }
    if !tx.is_electrically_large(lambda) || !rx.is_electrically_large(lambda) {
        warnings.push(
            "dish diameter below 10 wavelengths; the pattern model is indicative only".into(),
        );
    }

    let grid = IlluminatedGrid::new(g, ris, cfg, tx, rx)?;
    let v = link_vectors(g);
    let s_i = grid.ellipse.area;
    let s_s = ris.area();
    let (s, regime) = effective_area(s_i, s_s, opts.small_ratio);
    let m = grid.active_count();

    let p_small = small_ris_power(g, ris, cfg, tx, rx).ok();
    let p_large = match large_ris_power(g, ris, cfg, tx, rx) {
        Ok(l) => Some(l.from_footprint),
        Err(e) => {
            warnings.push(format!("large-RIS closed form unavailable: {e}"));
            None
        }
    };

    let target = match mode {
        Mode::Auto => match regime {
            Regime::SmallRis => Mode::Small,
            Regime::LargeRis => Mode::Large,
            Regime::Intermediate => Mode::Exact,
        },
        other => other,
    };

    let want_exact = target == Mode::Exact || !opts.closed_form_only;
    let p_exact = if want_exact && m > opts.ru_cap {
        warnings.push(format!(
            "{m} active RUs exceed the cap of {}; exact sum skipped",
            opts.ru_cap
        ));
        None
    } else if want_exact {
        match exact_received_power_grid(&grid, cfg) {
            Ok(p) => Some(p),
            Err(e) if target == Mode::Exact => return Err(e),
            Err(_) => None,
        }
    } else {
        None
    };

    let (mode_used, p_r) = match target {
        Mode::Exact => match p_exact {
            Some(p) => (Mode::Exact, p),
            None => {
                let (fallback, p) = if regime == Regime::LargeRis {
                    (Mode::Large, p_large)
                } else {
                    (Mode::Small, p_small)
                };
                warnings.push(format!("falling back to the {fallback} closed form"));
                (
                    fallback,
                    p.ok_or(Error::Numeric("no closed form available".into()))?,
                )
            }
        },
        Mode::Small => (
            Mode::Small,
            match p_small {
                Some(p) => p,
                None => small_ris_power(g, ris, cfg, tx, rx)?,
            },
        ),
        Mode::Large => (
            Mode::Large,
            large_ris_power(g, ris, cfg, tx, rx)?.from_footprint,
        ),
        Mode::Auto => unreachable!("AUTO is resolved above"),
    };

    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(LinkBudgetResult {
        p_r,
        snr: snr(p_r, cfg),
        mode_used,
        regime,
        m,
        s_i,
        s_s,
        s,
        r1: v.r1,
        r2: v.r2,
        theta_i: v.theta_i,
        theta_r: v.theta_r,
        p_exact,
        p_small,
        p_large,
        warnings,
    })
}

/// Spread of per-RU quantities across the illuminated region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuDiagnostics {
    /// `max G_rn / min G_rn`.
    pub rx_gain_ratio: f64,
    /// `r_1 / max r_1n`.
    pub r1_ratio: f64,
    /// `r_2 / max r_2n`.
    pub r2_ratio: f64,
    /// `max G_s(theta_in) / G_s(theta_i)`.
    pub gs_i_ratio: f64,
    /// `max G_s(theta_rn) / G_s(theta_r)`.
    pub gs_r_ratio: f64,
}

pub fn ru_diagnostics(grid: &IlluminatedGrid) -> Result<RuDiagnostics> {
    if grid.active_count() == 0 {
        return Err(Error::EmptyIllumination);
    }
    #[derive(Clone, Copy)]
    struct Acc {
        g_min: f64,
        g_max: f64,
        r1_max: f64,
        r2_max: f64,
        cos_i_max: f64,
        cos_r_max: f64,
    }
    let init = Acc {
        g_min: f64::INFINITY,
        g_max: 0.0,
        r1_max: 0.0,
        r2_max: 0.0,
        cos_i_max: 0.0,
        cos_r_max: 0.0,
    };
    let rows = grid.map_rows(|g, row| {
        let mut a = init;
        for i in row.start..row.end {
            let s = g.sample(i, row.row);
            a.g_min = a.g_min.min(s.g_rn);
            a.g_max = a.g_max.max(s.g_rn);
            a.r1_max = a.r1_max.max(s.r1n);
            a.r2_max = a.r2_max.max(s.r2n);
            a.cos_i_max = a.cos_i_max.max(s.theta_in.cos());
            a.cos_r_max = a.cos_r_max.max(s.theta_rn.cos());
        }
        a
    });
    let a = rows.iter().fold(init, |x, y| Acc {
        g_min: x.g_min.min(y.g_min),
        g_max: x.g_max.max(y.g_max),
        r1_max: x.r1_max.max(y.r1_max),
        r2_max: x.r2_max.max(y.r2_max),
        cos_i_max: x.cos_i_max.max(y.cos_i_max),
        cos_r_max: x.cos_r_max.max(y.cos_r_max),
    });
    let v = link_vectors(&grid.geometry);
    Ok(RuDiagnostics {
        rx_gain_ratio: a.g_max / a.g_min,
        r1_ratio: v.r1 / a.r1_max,
        r2_ratio: v.r2 / a.r2_max,
        gs_i_ratio: a.cos_i_max / v.theta_i.cos(),
        gs_r_ratio: a.cos_r_max / v.theta_r.cos(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::enumerate_rus;
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

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_ru_matches_hand_formula() {
        let c = cfg();
        let l = c.wavelength();
        let ris = RisSpec::half_wavelength(l, 1, 1, 0.9).unwrap();
        let g = LinkGeometry::new(30.0, 10.0, 15.0, 6.0, 3.0, 12.0).unwrap();
        let s = enumerate_rus(&g, &ris, &c, &tx(), &rx(0.03)).unwrap();
        assert_eq!(s.len(), 1);
        let u = s[0];
        let want = (l / (4.0 * PI)).powi(4)
            * 0.81
            * u.g_tn
            * u.g_rn
            * 16.0
            * u.theta_in.cos()
            * u.theta_rn.cos()
            / (u.r1n * u.r1n * u.r2n * u.r2n);
        let got = exact_received_power(&s, &c, &ris).unwrap();
        assert!(rel(got, want) < 1e-12);
    }

    #[test]
    fn scaling_in_power_and_gamma() {
        let c = cfg();
        let g = LinkGeometry::new(30.0, 10.0, 15.0, 6.0, 3.0, 12.0).unwrap();
        let ris = small_ris();
        let s = enumerate_rus(&g, &ris, &c, &tx(), &rx(0.03)).unwrap();
        let base = exact_received_power(&s, &c, &ris).unwrap();
        let c2 = RadioConfig {
            tx_power_w: 2.0,
            ..c
        };
        let ris_half = RisSpec { gamma: 0.45, ..ris };
        assert!(rel(exact_received_power(&s, &c2, &ris).unwrap(), 2.0 * base) < 1e-12);
        assert!(
            rel(
                exact_received_power(&s, &c, &ris_half).unwrap(),
                0.25 * base
            ) < 1e-12
        );
        let ps = small_ris_power(&g, &ris, &c, &tx(), &rx(0.03)).unwrap();
        assert!(
            rel(
                small_ris_power(&g, &ris, &c2, &tx(), &rx(0.03)).unwrap(),
                2.0 * ps
            ) < 1e-12
        );
        assert!(
            rel(
                small_ris_power(&g, &ris_half, &c, &tx(), &rx(0.03)).unwrap(),
                0.25 * ps
            ) < 1e-12
        );
        let pl = large_ris_power(&g, &ris, &c, &tx(), &rx(0.03))
            .unwrap()
            .from_footprint;
        assert!(
            rel(
                large_ris_power(&g, &ris, &c2, &tx(), &rx(0.03))
                    .unwrap()
                    .from_footprint,
                2.0 * pl
            ) < 1e-12
        );
        assert!(
            rel(
                large_ris_power(&g, &ris_half, &c, &tx(), &rx(0.03))
                    .unwrap()
                    .from_footprint,
                0.25 * pl
            ) < 1e-12
        );
    }

    #[test]
    fn grid_and_slice_sums_agree() {
        let c = cfg();
        let g = LinkGeometry::new(30.0, 4.0, 5.0, 6.0, 3.0, 12.0).unwrap();
        let ris = small_ris();
        let grid = IlluminatedGrid::new(&g, &ris, &c, &tx(), &rx(0.03)).unwrap();
        let a = exact_received_power_grid(&grid, &c).unwrap();
        let mut s = grid.samples();
        let b = exact_received_power(&s, &c, &ris).unwrap();
        s.reverse();
        let r = exact_received_power(&s, &c, &ris).unwrap();
        assert!(rel(a, b) < 1e-13 && rel(b, r) < 1e-13);
    }

    #[test]
    fn optimal_phases_reproduce_exact() {
        let c = cfg();
        let g = LinkGeometry::new(20.0, 12.0, 10.0, 6.0, 3.0, 12.0).unwrap();
        let ris = RisSpec::half_wavelength(c.wavelength(), 50, 50, 0.9).unwrap();
        let s = enumerate_rus(&g, &ris, &c, &tx(), &rx(0.01)).unwrap();
        let phases: Vec<f64> = s.iter().map(|u| u.phase).collect();
        let exact = exact_received_power(&s, &c, &ris).unwrap();
        assert!(rel(phased_received_power(&s, &phases, &c, &ris).unwrap(), exact) < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let random: Vec<f64> = s.iter().map(|_| rng.gen_range(0.0..TAU)).collect();
        assert!(phased_received_power(&s, &random, &c, &ris).unwrap() < exact);
        assert!(matches!(
            phased_received_power(&s, &phases[1..], &c, &ris),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn destructive_pair_cancels() {
        let c = cfg();
        let l = c.wavelength();
        let ris = RisSpec::half_wavelength(l, 1, 1, 0.9).unwrap();
        let g = LinkGeometry::new(30.0, 10.0, 15.0, 6.0, 3.0, 12.0).unwrap();
        let u = enumerate_rus(&g, &ris, &c, &tx(), &rx(0.03)).unwrap()[0];
        let pair = [u, u];
        let p = phased_received_power(&pair, &[u.phase, u.phase + PI], &c, &ris).unwrap();
        assert!(p < 1e-20 * exact_received_power(&pair, &c, &ris).unwrap());
    }

    #[test]
    fn small_form_is_mirror_symmetric() {
        let c = cfg();
        let ris = small_ris();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let mut d = |lo: u32, hi: u32| rng.gen_range(lo * 64..hi * 64) as f64 / 64.0;
            let g =
                LinkGeometry::new(d(10, 80), d(0, 80), d(1, 30), d(1, 10), d(1, 10), 12.0).unwrap();
            let (a, b) = (rx(0.03), tx());
            let p = small_ris_power(&g, &ris, &c, &b, &a).unwrap();
            let q = small_ris_power(&g.mirrored(), &ris, &c, &a, &b).unwrap();
            assert!(rel(p, q) < 1e-14);
        }
    }

    #[test]
    fn exact_sum_invariant_under_relabeling() {
        let c = cfg();
        // equal dishes keep the FNBW footprint, and with it the RU set, unchanged
        let d = AntennaSpec::new(0.15, 0.7).unwrap();
        let g = LinkGeometry::new(24.0, 9.0, 8.0, 6.0, 3.0, 12.0).unwrap();
        let ris = RisSpec::half_wavelength(c.wavelength(), 41, 41, 0.9).unwrap();
        let a = enumerate_rus(&g, &ris, &c, &d, &d).unwrap();
        let b = enumerate_rus(&g.mirrored(), &ris, &c, &d, &d).unwrap();
        assert_eq!(a.len(), ris.ru_count());
        assert_eq!(b.len(), ris.ru_count());
        let pa = exact_received_power(&a, &c, &ris).unwrap();
        let pb = exact_received_power(&b, &c, &ris).unwrap();
        assert!(rel(pa, pb) < 1e-12);
    }

    #[test]
    fn large_forms_agree() {
        let c = cfg();
        let ris = RisSpec::half_wavelength(c.wavelength(), 100, 100, 0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut checked = 0;
        while checked < 1000 {
            let g = LinkGeometry::new(
                rng.gen_range(5.0..100.0),
                rng.gen_range(0.0..150.0),
                rng.gen_range(0.5..40.0),
                rng.gen_range(0.0..15.0),
                rng.gen_range(0.0..15.0),
                rng.gen_range(0.0..20.0),
            )
            .unwrap();
            let Ok(l) = large_ris_power(&g, &ris, &c, &tx(), &rx(0.01)) else {
                continue;
            };
            assert!(rel(l.expanded, l.from_footprint) < 1e-9);
            checked += 1;
        }
    }

    #[test]
    fn large_form_at_normal_incidence() {
        let c = cfg();
        let l = c.wavelength();
        let ris = RisSpec::half_wavelength(l, 100, 100, 0.9).unwrap();
        let g = LinkGeometry::new(20.0, 0.0, 10.0, 12.0, 3.0, 12.0).unwrap();
        let p = large_ris_power(&g, &ris, &c, &tx(), &rx(0.01)).unwrap();
        let v = link_vectors(&g);
        let half = 0.5 * hpbw(&tx(), l).unwrap();
        let want = power_prefactor(&c, &ris)
            * tx().max_gain(l)
            * rx(0.01).max_gain(l)
            * 16.0
            * v.theta_r.cos()
            / ris.ru_area().powi(2)
            * (v.r1 / v.r2).powi(2)
            * PI
            * PI
            * half.tan().powi(4);
        assert!(rel(p.expanded, want) < 1e-12);
    }

    #[test]
    fn snr_definition() {
        let c = cfg();
        let n0 = c.noise_power().watts;
        assert!((snr(n0, &c).db).abs() < 1e-12);
        assert!((snr(100.0 * n0, &c).db - 20.0).abs() < 1e-12);
        assert!((snr(n0, &c).linear - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_form_converges_as_ris_shrinks() {
        let c = cfg();
        let l = c.wavelength();
        let g = LinkGeometry::new(30.0, 15.0, 15.0, 6.0, 3.0, 12.0).unwrap();
        let mut prev = f64::INFINITY;
        let mut last_ratio = 1.0;
        for n in [60, 40, 25, 15, 8, 4] {
            let ris = RisSpec::half_wavelength(l, n, n, 0.9).unwrap();
            let r = evaluate(
                &g,
                &ris,
                &c,
                &tx(),
                &rx(0.03),
                Mode::Exact,
                &EvalOptions::default(),
            )
            .unwrap();
            let ratio = r.s_s / r.s_i;
            assert!(ratio < last_ratio);
            last_ratio = ratio;
            let err = rel(r.p_small.unwrap(), r.p_exact.unwrap());
            if ratio <= 0.1 {
                assert!(err < prev, "n = {n}: {err} !< {prev}");
                prev = err;
            }
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn auto_dispatch() {
        let c = cfg();
        let l = c.wavelength();
        let o = EvalOptions::default();
        // small RIS far inside the footprint
        let g = LinkGeometry::new(30.0, 15.0, 15.0, 6.0, 3.0, 12.0).unwrap();
        let r = evaluate(&g, &small_ris(), &c, &tx(), &rx(0.03), Mode::Auto, &o).unwrap();
        assert_eq!((r.regime, r.mode_used), (Regime::SmallRis, Mode::Small));
        assert!(r.p_exact.is_some());
        assert_eq!(r.p_r, r.p_small.unwrap());
        // S_s / S_i = 0.31 at r_1h = 0
        let g = LinkGeometry::new(80.0, 0.0, 10.0, 6.0, 3.0, 12.0).unwrap();
        let ris = RisSpec::square_with_area(0.046, l, 0.9).unwrap();
        let r = evaluate(&g, &ris, &c, &tx(), &rx(0.03), Mode::Auto, &o).unwrap();
        assert_eq!((r.regime, r.mode_used), (Regime::Intermediate, Mode::Exact));
        assert_eq!(Some(r.p_r), r.p_exact);
        // RIS much larger than the footprint
        let g = LinkGeometry::new(20.0, 5.0, 10.0, 6.0, 3.0, 12.0).unwrap();
        let ris = RisSpec::half_wavelength(l, 1500, 1500, 0.9).unwrap();
        let r = evaluate(&g, &ris, &c, &tx(), &rx(0.01), Mode::Auto, &o).unwrap();
        assert_eq!((r.regime, r.mode_used), (Regime::LargeRis, Mode::Large));
        assert!((r.m as f64 - r.s_i / ris.ru_area()).abs() / (r.m as f64) < 0.01);
    }

    #[test]
    fn cap_fallback_and_spacing_warning() {
        let c = cfg();
        let g = LinkGeometry::new(30.0, 15.0, 15.0, 6.0, 3.0, 12.0).unwrap();
        let o = EvalOptions {
            ru_cap: 10,
            ..EvalOptions::default()
        };
        let r = evaluate(&g, &small_ris(), &c, &tx(), &rx(0.03), Mode::Exact, &o).unwrap();
        assert_eq!(r.mode_used, Mode::Small);
        assert!(r.p_exact.is_none());
        assert!(r.warnings.iter().any(|w| w.contains("cap")));
        let wide = RisSpec::new(2e-3, 2e-3, 50, 50, 0.9).unwrap();
        let r = evaluate(
            &g,
            &wide,
            &c,
            &tx(),
            &rx(0.03),
            Mode::Small,
            &EvalOptions::default(),
        )
        .unwrap();
        assert!(r.warnings.iter().any(|w| w.contains("lambda/2")));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("auto".parse::<Mode>().unwrap(), Mode::Auto);
        assert_eq!("EXACT".parse::<Mode>().unwrap(), Mode::Exact);
        assert!("fast".parse::<Mode>().is_err());
    }
}
