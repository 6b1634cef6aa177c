//! Parabolic dish patterns and the reflection-unit element pattern.
//!
//! The dish field pattern is the uniformly illuminated circular aperture
//! `E(phi) = (2 lambda / (pi D)) J1(pi D sin(phi) / lambda) / sin(phi)`,
//! defined on `[0, pi/2)` with no back lobe. Gains follow as
//! `G(phi) = e (pi D / lambda)^2 E(phi)^2`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::numerics::{bisect_root, integrate, jinc, QuadratureSpec};
use crate::units::{dbm_to_watts, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// `1.22 lambda / D` locates the first null (`J1(3.83) = 0`).
pub const FNBW_FACTOR: f64 = 1.22;

/// HPBW at or below this (15 degrees) counts as a pencil beam.
pub const PENCIL_BEAM_LIMIT: f64 = PI / 12.0;

/// Thermal noise density, dBm/Hz.
const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

// Below this angle the pattern is replaced by its limit at boresight.
const BORESIGHT_LIMIT: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub frequency_hz: f64,
    pub tx_power_w: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 140e9,
            tx_power_w: 1.0,
            bandwidth_hz: 2e9,
            noise_figure_db: 10.0,
        }
    }
}

impl RadioConfig {
    pub fn new(
        frequency_hz: f64,
        tx_power_w: f64,
        bandwidth_hz: f64,
        noise_figure_db: f64,
    ) -> Result<Self> {
        let cfg = Self {
            frequency_hz,
            tx_power_w,
            bandwidth_hz,
            noise_figure_db,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        positive("frequency_hz", self.frequency_hz)?;
        positive("tx_power_w", self.tx_power_w)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        if !self.noise_figure_db.is_finite() {
            return Err(Error::invalid("noise_figure_db", "must be finite"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn noise_power(&self) -> NoisePower {
        noise_power(self)
    }
}

/// Dish diameter and aperture efficiency of one end of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaSpec {
    pub diameter_m: f64,
    pub efficiency: f64,
}

impl AntennaSpec {
    pub fn new(diameter_m: f64, efficiency: f64) -> Result<Self> {
        let spec = Self {
            diameter_m,
            efficiency,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        positive("diameter_m", self.diameter_m)?;
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid("efficiency", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// `D / lambda`.
    pub fn aperture_ratio(&self, lambda: f64) -> f64 {
        self.diameter_m / lambda
    }

    /// Boresight gain `e (pi D / lambda)^2`.
    pub fn max_gain(&self, lambda: f64) -> f64 {
        let k = PI * self.diameter_m / lambda;
        self.efficiency * k * k
    }

    /// The pattern model assumes `D >> lambda`; below ten wavelengths it is
    /// only indicative.
    pub fn is_electrically_large(&self, lambda: f64) -> bool {
        self.aperture_ratio(lambda) >= 10.0
    }

    pub fn is_pencil_beam(&self, lambda: f64) -> Result<bool> {
        Ok(hpbw(self, lambda)? <= PENCIL_BEAM_LIMIT)
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn check_angle(phi: f64) -> Result<()> {
    if (0.0..FRAC_PI_2).contains(&phi) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "pattern angle must lie in [0, pi/2)",
            value: phi,
        })
    }
}

/// Normalized field `E(phi)` from `sin(phi)` and `D / lambda`.
#[inline]
pub(crate) fn field_from_sin(sin_phi: f64, aperture_ratio: f64) -> f64 {
    if sin_phi.abs() < BORESIGHT_LIMIT {
        return 1.0;
    }
    jinc(PI * aperture_ratio * sin_phi)
}

/// Field pattern `E(phi)`; `E(0) = 1`.
pub fn dish_field(phi: f64, diameter_m: f64, lambda: f64) -> Result<f64> {
    check_angle(phi)?;
    Ok(field_from_sin(phi.sin(), diameter_m / lambda))
}

/// Gain `G(phi) = 4 e (J1(pi D sin(phi) / lambda) / sin(phi))^2`.
pub fn dish_gain(phi: f64, spec: &AntennaSpec, lambda: f64) -> Result<f64> {
    check_angle(phi)?;
    let e = field_from_sin(phi.sin(), spec.aperture_ratio(lambda));
    Ok(spec.max_gain(lambda) * e * e)
}

/// First-null beamwidth `2 asin(1.22 lambda / D)`.
pub fn fnbw(spec: &AntennaSpec, lambda: f64) -> Result<f64> {
    fnbw_with_factor(spec, lambda, FNBW_FACTOR)
}

/// [`fnbw`] with an explicit null factor in place of 1.22.
pub fn fnbw_with_factor(spec: &AntennaSpec, lambda: f64, factor: f64) -> Result<f64> {
    let ratio = factor * lambda / spec.diameter_m;
    if ratio > 1.0 {
        return Err(Error::NoNull { ratio });
    }
    Ok(2.0 * ratio.asin())
}

/// Half-power beamwidth: twice the angle where `E^2 = 1/2`.
pub fn hpbw(spec: &AntennaSpec, lambda: f64) -> Result<f64> {
    let half_null = 0.5 * fnbw(spec, lambda)?;
    let ratio = spec.aperture_ratio(lambda);
    let g = |phi: f64| {
        let e = field_from_sin(phi.sin(), ratio);
        e * e - 0.5
    };
    let half = bisect_root(g, 0.0, half_null.min(FRAC_PI_2 * (1.0 - 1e-12)), 1e-12)?;
    Ok(2.0 * half)
}

/// Energy of `E^2` over `[-upper, upper]`, integrated lobe by lobe.
fn pattern_energy(aperture_ratio: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |phi: f64| {
        let e = field_from_sin(phi.sin(), aperture_ratio);
        e * e
    };
    // breakpoints at sin(phi) = k / (D/lambda): one oscillation per panel
    let mut edges = vec![0.0];
    let mut k = 1.0;
    loop {
        let s = k / aperture_ratio;
        if s >= 1.0 {
            break;
        }
        let phi = s.asin();
        if phi >= upper {
            break;
        }
        edges.push(phi);
        k += 1.0;
    }
    edges.push(upper);
    let mut total = 0.0;
    for w in edges.windows(2) {
        if w[1] > w[0] {
            total += integrate(f, w[0], w[1], spec)?;
        }
    }
    Ok(2.0 * total)
}

/// Main-lobe and total pattern energies, `(P_main, P_tot)`.
pub fn pattern_energies(spec: &AntennaSpec, lambda: f64) -> Result<(f64, f64)> {
    pattern_energies_with_null(spec, lambda, fnbw(spec, lambda)?)
}

/// As [`pattern_energies`] with an explicit first-null beamwidth.
pub fn pattern_energies_with_null(
    spec: &AntennaSpec,
    lambda: f64,
    null_beamwidth: f64,
) -> Result<(f64, f64)> {
    let q = QuadratureSpec::default();
    let ratio = spec.aperture_ratio(lambda);
    let main = pattern_energy(ratio, 0.5 * null_beamwidth, &q)?;
    let total = pattern_energy(ratio, FRAC_PI_2, &q)?;
    Ok((main, total))
}

/// Fraction of the pattern energy inside the first-null beamwidth.
pub fn main_lobe_energy_fraction(spec: &AntennaSpec, lambda: f64) -> Result<f64> {
    let (main, total) = pattern_energies(spec, lambda)?;
    Ok(main / total)
}

/// Energy captured by a unit step over the HPBW, relative to the main lobe
/// (`kappa`) and to the whole pattern (`mu`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepFractions {
    pub kappa: f64,
    pub mu: f64,
}

pub fn step_energy_fractions(spec: &AntennaSpec, lambda: f64) -> Result<StepFractions> {
    let (main, total) = pattern_energies(spec, lambda)?;
    let hp = hpbw(spec, lambda)?;
    Ok(StepFractions {
        kappa: hp / main,
        mu: hp / total,
    })
}

/// Reflection-unit gain `4 cos(theta)`.
pub fn ru_gain(theta: f64) -> Result<f64> {
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(Error::Domain {
            what: "RU angle must lie in [0, pi/2)",
            value: theta,
        });
    }
    Ok(4.0 * theta.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisePower {
    pub dbm: f64,
    pub watts: f64,
}

/// `N0 = -174 + 10 log10(W) + F` in dBm.
pub fn noise_power(cfg: &RadioConfig) -> NoisePower {
    let dbm = THERMAL_NOISE_DBM_HZ + 10.0 * cfg.bandwidth_hz.log10() + cfg.noise_figure_db;
    NoisePower {
        dbm,
        watts: dbm_to_watts(dbm),
    }
}
