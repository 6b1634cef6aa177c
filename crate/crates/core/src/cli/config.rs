//! TOML scenario files.
//!
//! Every section and field is optional; omitted values fall back to the
//! reference scenario (140 GHz, 1 W, 2 GHz, 10 dB noise figure, 15 cm TX dish,
//! 3 cm RX dish, aperture efficiency 0.7, a 0.012 m^2 half-wavelength RIS with
//! Gamma = 0.9 at 12 m height).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaSpec, RadioConfig};
use crate::geometry::{LinkGeometry, RisSpec, DEFAULT_SMALL_RATIO};
use crate::linkbudget::{EvalOptions, Mode, DEFAULT_RU_CAP};
use crate::placement::{OracleSpec, DEFAULT_GRID, DEFAULT_REFINE_TOL};
use crate::Error;

/// A config problem tied to a dotted field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }

    fn from_model(section: &str, err: Error) -> Self {
        match err {
            Error::InvalidParameter { field, reason } => {
                Self::new(format!("{section}.{field}"), reason)
            }
            other => Self::new(section, other.to_string()),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVar {
    #[serde(rename = "r_1h")]
    R1h,
    #[serde(rename = "y_s")]
    Ys,
    #[serde(rename = "D_r")]
    Dr,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::R1h => "r_1h",
            SweepVar::Ys => "y_s",
            SweepVar::Dr => "D_r",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSection {
    pub frequency_hz: f64,
    pub tx_power_w: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for RadioSection {
    fn default() -> Self {
        let r = RadioConfig::default();
        Self {
            frequency_hz: r.frequency_hz,
            tx_power_w: r.tx_power_w,
            bandwidth_hz: r.bandwidth_hz,
            noise_figure_db: r.noise_figure_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSection {
    pub diameter_m: f64,
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
}

fn default_efficiency() -> f64 {
    0.7
}

fn default_tx() -> AntennaSection {
    AntennaSection {
        diameter_m: 0.15,
        efficiency: 0.7,
    }
}

fn default_rx() -> AntennaSection {
    AntennaSection {
        diameter_m: 0.03,
        efficiency: 0.7,
    }
}

/// RIS layout: either `area_m2` (square, half-wavelength pitch) or explicit
/// `n_x`/`n_y` with optional pitch (default half wavelength).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RisSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_y: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_y: Option<f64>,
    pub gamma: f64,
}

impl Default for RisSection {
    fn default() -> Self {
        Self {
            area_m2: None,
            n_x: None,
            n_y: None,
            d_x: None,
            d_y: None,
            gamma: 0.9,
        }
    }
}

const DEFAULT_RIS_AREA: f64 = 0.012;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub r_h: f64,
    pub y_s: f64,
    pub h_t: f64,
    pub h_r: f64,
    pub h_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_1h: Option<f64>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            r_h: 30.0,
            y_s: 5.0,
            h_t: 6.0,
            h_r: 3.0,
            h_s: 12.0,
            r_1h: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVar,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSection {
    /// Grid values; the last one is exactly `to`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.to
                } else {
                    self.from + (self.to - self.from) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementSection {
    /// `[lo, hi]` for `r_1h`; defaults to `[0, 2 r_h]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    pub oracle_grid: usize,
    pub refine_tol: f64,
    /// Evaluator used by the numeric oracle.
    pub oracle_mode: Mode,
}

impl Default for PlacementSection {
    fn default() -> Self {
        Self {
            domain: None,
            oracle_grid: DEFAULT_GRID,
            refine_tol: DEFAULT_REFINE_TOL,
            oracle_mode: Mode::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub regime_threshold: f64,
    pub ru_cap: usize,
    pub radio: RadioSection,
    #[serde(default = "default_tx")]
    pub tx: AntennaSection,
    #[serde(default = "default_rx")]
    pub rx: AntennaSection,
    pub ris: RisSection,
    pub geometry: GeometrySection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub placement: PlacementSection,
    pub output: OutputSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Auto,
            regime_threshold: DEFAULT_SMALL_RATIO,
            ru_cap: DEFAULT_RU_CAP,
            radio: RadioSection::default(),
            tx: default_tx(),
            rx: default_rx(),
            ris: RisSection::default(),
            geometry: GeometrySection::default(),
            sweep: None,
            placement: PlacementSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// A validated scenario in model types.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub radio: RadioConfig,
    pub tx: AntennaSpec,
    pub rx: AntennaSpec,
    pub ris: RisSpec,
    /// `r_1h` is `r_h / 2` when the config leaves it out.
    pub geometry: LinkGeometry,
    pub r_1h_given: bool,
    pub mode: Mode,
    pub options: EvalOptions,
    pub sweep: Option<SweepSection>,
    pub domain: (f64, f64),
    pub oracle: OracleSpec,
    pub oracle_mode: Mode,
    pub output: OutputSection,
}

/// `section.key (line n)` for the byte offset `pos`, or just the line.
fn key_at(text: &str, pos: usize) -> String {
    let pos = pos.min(text.len());
    let line_no = text[..pos].matches('\n').count() + 1;
    let mut section = None;
    let mut key = None;
    for (k, raw) in text.lines().enumerate().take(line_no) {
        let l = raw.trim();
        if l.starts_with('[') {
            section = Some(l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            key = None;
        } else if k + 1 == line_no {
            key = l.split_once('=').map(|(k, _)| k.trim().to_string());
        }
    }
    match (section, key) {
        (Some(s), Some(k)) => format!("{s}.{k} (line {line_no})"),
        (None, Some(k)) => format!("{k} (line {line_no})"),
        (Some(s), None) => format!("{s} (line {line_no})"),
        (None, None) => format!("line {line_no}"),
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map_or_else(|| "file".into(), |s| key_at(text, s.start));
            ConfigError::new(field, e.message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new("file", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        let radio = RadioConfig {
            frequency_hz: self.radio.frequency_hz,
            tx_power_w: self.radio.tx_power_w,
            bandwidth_hz: self.radio.bandwidth_hz,
            noise_figure_db: self.radio.noise_figure_db,
        };
        radio
            .validate()
            .map_err(|e| ConfigError::from_model("radio", e))?;
        let lambda = radio.wavelength();
        let tx = AntennaSpec::new(self.tx.diameter_m, self.tx.efficiency)
            .map_err(|e| ConfigError::from_model("tx", e))?;
        let rx = AntennaSpec::new(self.rx.diameter_m, self.rx.efficiency)
            .map_err(|e| ConfigError::from_model("rx", e))?;
        let ris = self.resolve_ris(lambda)?;

        let geo = &self.geometry;
        let r_1h = geo.r_1h.unwrap_or(0.5 * geo.r_h);
        let geometry = LinkGeometry::new(geo.r_h, r_1h, geo.y_s, geo.h_t, geo.h_r, geo.h_s)
            .map_err(|e| ConfigError::from_model("geometry", e))?;

        if !(self.regime_threshold > 0.0 && self.regime_threshold < 1.0) {
            return Err(ConfigError::new("regime_threshold", "must lie in (0, 1)"));
        }
        if self.ru_cap == 0 {
            return Err(ConfigError::new("ru_cap", "must be >= 1"));
        }

        if let Some(s) = &self.sweep {
            if s.steps < 2 {
                return Err(ConfigError::new("sweep.steps", "must be >= 2"));
            }
            if !(s.from < s.to) || !s.from.is_finite() || !s.to.is_finite() {
                return Err(ConfigError::new("sweep.from", "need finite from < to"));
            }
            match s.variable {
                SweepVar::Ys if s.from <= 0.0 => {
                    return Err(ConfigError::new("sweep.from", "y_s must stay > 0"))
                }
                SweepVar::Dr if s.from <= 0.0 => {
                    return Err(ConfigError::new("sweep.from", "D_r must stay > 0"))
                }
                SweepVar::Ys | SweepVar::Dr if geo.r_1h.is_none() => {
                    return Err(ConfigError::new(
                        "geometry.r_1h",
                        "required when sweeping y_s or D_r",
                    ))
                }
                _ => {}
            }
        }

        let domain = match self.placement.domain {
            Some([lo, hi]) => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(ConfigError::new("placement.domain", "need finite lo < hi"));
                }
                (lo, hi)
            }
            None => (0.0, 2.0 * geo.r_h),
        };
        if self.placement.oracle_grid < 3 {
            return Err(ConfigError::new("placement.oracle_grid", "must be >= 3"));
        }
        if !(self.placement.refine_tol > 0.0) {
            return Err(ConfigError::new("placement.refine_tol", "must be > 0"));
        }

        Ok(Scenario {
            radio,
            tx,
            rx,
            ris,
            geometry,
            r_1h_given: geo.r_1h.is_some(),
            mode: self.mode,
            options: EvalOptions {
                small_ratio: self.regime_threshold,
                ru_cap: self.ru_cap,
                closed_form_only: false,
            },
            sweep: self.sweep.clone(),
            domain,
            oracle: OracleSpec {
                grid: self.placement.oracle_grid,
                refine_tol: self.placement.refine_tol,
            },
            oracle_mode: self.placement.oracle_mode,
            output: self.output.clone(),
        })
    }

    fn resolve_ris(&self, lambda: f64) -> Result<RisSpec, ConfigError> {
        let r = &self.ris;
        let d_x = r.d_x.unwrap_or(0.5 * lambda);
        let d_y = r.d_y.unwrap_or(0.5 * lambda);
        let wrap = |e| ConfigError::from_model("ris", e);
        match (r.area_m2, r.n_x, r.n_y) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(ConfigError::new(
                "ris.area_m2",
                "give either area_m2 or n_x/n_y, not both",
            )),
            (None, Some(n_x), Some(n_y)) => RisSpec::new(d_x, d_y, n_x, n_y, r.gamma).map_err(wrap),
            (None, Some(_), None) => Err(ConfigError::new("ris.n_y", "required with n_x")),
            (None, None, Some(_)) => Err(ConfigError::new("ris.n_x", "required with n_y")),
            (area, None, None) => {
                let area = area.unwrap_or(DEFAULT_RIS_AREA);
                if !(area > 0.0 && area.is_finite()) {
                    return Err(ConfigError::new("ris.area_m2", "must be finite and > 0"));
                }
                let n_x = ((area.sqrt() / d_x).round() as usize).max(1);
                let n_y = ((area.sqrt() / d_y).round() as usize).max(1);
                RisSpec::new(d_x, d_y, n_x, n_y, r.gamma).map_err(wrap)
            }
        }
    }
}
