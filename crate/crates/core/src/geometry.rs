//! Link geometry, the elliptic beam footprint on the RIS plane and the set of
//! illuminated reflection units (RUs).
//!
//! Global coordinates: TX at `(0, 0, h_t)`, RX at `(r_h, 0, h_r)` and the RIS
//! center at `(r_1h, y_s, h_s)`. The RIS lies in the vertical plane
//! `y = y_s`; its RU grid runs along global `x` (columns) and `z` (rows).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{field_from_sin, fnbw, AntennaSpec, RadioConfig};
use crate::{Error, Result};

/// Default `S_s / S_i` ratio at or below which the RIS counts as small.
pub const DEFAULT_SMALL_RATIO: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// TX-RX horizontal distance.
    pub r_h: f64,
    /// TX-RIS horizontal distance.
    pub r_1h: f64,
    /// Lateral offset of the RIS plane.
    pub y_s: f64,
    pub h_t: f64,
    pub h_r: f64,
    pub h_s: f64,
}

impl LinkGeometry {
    pub fn new(r_h: f64, r_1h: f64, y_s: f64, h_t: f64, h_r: f64, h_s: f64) -> Result<Self> {
        let g = Self {
            r_h,
            r_1h,
            y_s,
            h_t,
            h_r,
            h_s,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_h > 0.0 && self.r_h.is_finite()) {
            return Err(Error::invalid("r_h", "must be finite and > 0"));
        }
        if !(self.y_s > 0.0 && self.y_s.is_finite()) {
            return Err(Error::invalid("y_s", "must be finite and > 0"));
        }
        if !self.r_1h.is_finite() {
            return Err(Error::invalid("r_1h", "must be finite"));
        }
        for (field, h) in [("h_t", self.h_t), ("h_r", self.h_r), ("h_s", self.h_s)] {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(Error::invalid(field, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn with_r1h(&self, r_1h: f64) -> Self {
        Self { r_1h, ..*self }
    }

    pub fn with_ys(&self, y_s: f64) -> Self {
        Self { y_s, ..*self }
    }

    /// The same link seen from the RX: TX and RX swap roles and `r_1h`
    /// becomes `r_h - r_1h`.
    pub fn mirrored(&self) -> Self {
        Self {
            r_1h: self.r_h - self.r_1h,
            h_t: self.h_r,
            h_r: self.h_t,
            ..*self
        }
    }

    pub fn tx_position(&self) -> [f64; 3] {
        [0.0, 0.0, self.h_t]
    }

    pub fn rx_position(&self) -> [f64; 3] {
        [self.r_h, 0.0, self.h_r]
    }

    pub fn ris_center(&self) -> [f64; 3] {
        [self.r_1h, self.y_s, self.h_s]
    }
}

/// Distances and angles to the RIS center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkVectors {
    pub r1: f64,
    pub r2: f64,
    pub theta_i: f64,
    pub theta_r: f64,
}

pub fn link_vectors(g: &LinkGeometry) -> LinkVectors {
    let dt = g.h_s - g.h_t;
    let dr = g.h_s - g.h_r;
    let x2 = g.r_h - g.r_1h;
    let ys2 = g.y_s * g.y_s;
    let in_plane_1 = (g.r_1h * g.r_1h + dt * dt).sqrt();
    let in_plane_2 = (x2 * x2 + dr * dr).sqrt();
    LinkVectors {
        r1: (g.r_1h * g.r_1h + ys2 + dt * dt).sqrt(),
        r2: (x2 * x2 + ys2 + dr * dr).sqrt(),
        theta_i: (in_plane_1 / g.y_s).atan(),
        theta_r: (in_plane_2 / g.y_s).atan(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisSpec {
    pub d_x: f64,
    pub d_y: f64,
    pub n_x: usize,
    pub n_y: usize,
    /// Amplitude reflection coefficient.
    pub gamma: f64,
}

impl RisSpec {
    pub fn new(d_x: f64, d_y: f64, n_x: usize, n_y: usize, gamma: f64) -> Result<Self> {
        let spec = Self {
            d_x,
            d_y,
            n_x,
            n_y,
            gamma,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `n_x x n_y` RUs at half-wavelength pitch.
    pub fn half_wavelength(lambda: f64, n_x: usize, n_y: usize, gamma: f64) -> Result<Self> {
        Self::new(0.5 * lambda, 0.5 * lambda, n_x, n_y, gamma)
    }

    /// Square half-wavelength RIS whose area is closest to `area`.
    pub fn square_with_area(area: f64, lambda: f64, gamma: f64) -> Result<Self> {
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::invalid("area", "must be finite and > 0"));
        }
        let n = ((area.sqrt() / (0.5 * lambda)).round() as usize).max(1);
        Self::half_wavelength(lambda, n, n, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, d) in [("d_x", self.d_x), ("d_y", self.d_y)] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::invalid(field, "must be finite and > 0"));
            }
        }
        if self.n_x < 1 || self.n_y < 1 {
            return Err(Error::invalid("n_x/n_y", "at least one RU per side"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid("gamma", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Total area `S_s`.
    pub fn area(&self) -> f64 {
        self.n_x as f64 * self.n_y as f64 * self.d_x * self.d_y
    }

    pub fn ru_area(&self) -> f64 {
        self.d_x * self.d_y
    }

    pub fn ru_count(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn width(&self) -> f64 {
        self.n_x as f64 * self.d_x
    }

    pub fn height(&self) -> f64 {
        self.n_y as f64 * self.d_y
    }

    pub fn is_half_wavelength(&self, lambda: f64) -> bool {
        let h = 0.5 * lambda;
        (self.d_x - h).abs() <= 1e-9 * h && (self.d_y - h).abs() <= 1e-9 * h
    }
}

/// Beam footprint on the RIS plane.
///
/// `center` and `axis` are RIS-plane coordinates `(x, z)`; `axis` is the unit
/// direction of the `alpha` semi-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FootprintEllipse {
    pub alpha: f64,
    pub beta: f64,
    pub eccentricity: f64,
    pub area: f64,
    pub beamwidth: f64,
    pub center: [f64; 2],
    pub axis: [f64; 2],
}

/// Footprint of a cone of full angle `beamwidth` whose axis meets the plane
/// at distance `r1` and incidence `theta_i`.
pub fn footprint(r1: f64, theta_i: f64, beamwidth: f64) -> Result<FootprintEllipse> {
    let half = 0.5 * beamwidth;
    if !(r1 > 0.0) || !(beamwidth > 0.0) || theta_i < 0.0 {
        return Err(Error::Domain {
            what: "footprint needs r1 > 0, beamwidth > 0 and theta_i >= 0",
            value: r1.min(beamwidth).min(theta_i),
        });
    }
    let eccentricity = theta_i.sin() / half.cos();
    if theta_i + half >= FRAC_PI_2 || eccentricity >= 1.0 {
        return Err(Error::FootprintUnbounded {
            theta_i,
            half_beamwidth: half,
        });
    }
    let alpha = half.sin() / (theta_i + half).cos() * r1;
    let beta = alpha * (1.0 - eccentricity * eccentricity).sqrt();
    Ok(FootprintEllipse {
        alpha,
        beta,
        eccentricity,
        area: PI * alpha * beta,
        beamwidth,
        center: [0.0, 0.0],
        axis: [1.0, 0.0],
    })
}

/// Footprint of a TX beam aimed at the RIS center, placed on the plane.
pub fn illuminated_footprint(g: &LinkGeometry, beamwidth: f64) -> Result<FootprintEllipse> {
    let v = link_vectors(g);
    let mut e = footprint(v.r1, v.theta_i, beamwidth)?;
    e.center = [g.r_1h, g.h_s];
    let (px, pz) = (g.r_1h, g.h_s - g.h_t);
    let n = px.hypot(pz);
    e.axis = if n > 0.0 {
        [px / n, pz / n]
    } else {
        [1.0, 0.0]
    };
    Ok(e)
}

impl FootprintEllipse {
    /// `(a / alpha)^2 + (b / beta)^2` for a plane point; `<= 1` means inside.
    #[inline]
    pub fn normalized_radius2(&self, x: f64, z: f64) -> f64 {
        let (dx, dz) = (x - self.center[0], z - self.center[1]);
        let a = dx * self.axis[0] + dz * self.axis[1];
        let b = -dx * self.axis[1] + dz * self.axis[0];
        (a / self.alpha).powi(2) + (b / self.beta).powi(2)
    }

    #[inline]
    pub fn contains(&self, x: f64, z: f64) -> bool {
        self.normalized_radius2(x, z) <= 1.0
    }

    /// Half extents of the bounding box along plane `x` and `z`.
    pub fn half_extents(&self) -> (f64, f64) {
        let [ux, uz] = self.axis;
        let (a2, b2) = (self.alpha * self.alpha, self.beta * self.beta);
        (
            (a2 * ux * ux + b2 * uz * uz).sqrt(),
            (a2 * uz * uz + b2 * ux * ux).sqrt(),
        )
    }

    /// Plane `x` interval covered by the ellipse at height `z`.
    pub fn chord(&self, z: f64) -> Option<(f64, f64)> {
        let [ux, uz] = self.axis;
        let s = z - self.center[1];
        let (ia, ib) = (
            1.0 / (self.alpha * self.alpha),
            1.0 / (self.beta * self.beta),
        );
        let qa = ux * ux * ia + uz * uz * ib;
        let qb = 2.0 * s * ux * uz * (ia - ib);
        let qc = s * s * (uz * uz * ia + ux * ux * ib) - 1.0;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let t0 = (-qb - root) / (2.0 * qa);
        let t1 = (-qb + root) / (2.0 * qa);
        Some((self.center[0] + t0, self.center[0] + t1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "SMALL_RIS")]
    SmallRis,
    #[serde(rename = "INTERMEDIATE")]
    Intermediate,
    #[serde(rename = "LARGE_RIS")]
    LargeRis,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SmallRis => "SMALL_RIS",
            Regime::Intermediate => "INTERMEDIATE",
            Regime::LargeRis => "LARGE_RIS",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `S = min(S_i, S_s)` and the regime implied by `S_s / S_i`.
pub fn effective_area(s_i: f64, s_s: f64, small_ratio: f64) -> (f64, Regime) {
    let regime = if s_s >= s_i {
        Regime::LargeRis
    } else if s_s / s_i <= small_ratio {
        Regime::SmallRis
    } else {
        Regime::Intermediate
    };
    (s_i.min(s_s), regime)
}

/// One illuminated RU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuSample {
    /// Column (along `x`) and row (along `z`) on the RIS grid.
    pub index: (usize, usize),
    pub position: [f64; 3],
    pub r1n: f64,
    pub r2n: f64,
    pub theta_in: f64,
    pub theta_rn: f64,
    pub g_tn: f64,
    pub g_rn: f64,
    /// Co-phasing reflection phase in `[0, 2 pi)`.
    pub phase: f64,
}

impl RuSample {
    /// `sqrt(G_t G_r G_s(theta_i) G_s(theta_r)) / (r1 r2)`.
    #[inline]
    pub fn amplitude(&self) -> f64 {
        let gs_i = 4.0 * self.theta_in.cos();
        let gs_r = 4.0 * self.theta_rn.cos();
        (self.g_tn * self.g_rn * gs_i * gs_r).sqrt() / (self.r1n * self.r2n)
    }
}

/// Contiguous run of active RUs in one grid row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RowSpan {
    pub row: usize,
    /// First active column.
    pub start: usize,
    /// One past the last active column.
    pub end: usize,
}

impl RowSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// The RUs of a RIS lit by the TX first-null beam, evaluated lazily.
///
/// An RU is active when its center lies inside both the RIS rectangle and
/// the FNBW footprint ellipse.
#[derive(Debug, Clone)]
pub struct IlluminatedGrid {
    pub geometry: LinkGeometry,
    pub ris: RisSpec,
    pub ellipse: FootprintEllipse,
    pub lambda: f64,
    rows: Vec<RowSpan>,
    tx: [f64; 3],
    rx: [f64; 3],
    tx_boresight: [f64; 3],
    rx_boresight: [f64; 3],
    tx_max: f64,
    rx_max: f64,
    tx_ratio: f64,
    rx_ratio: f64,
}

impl IlluminatedGrid {
    pub fn new(
        g: &LinkGeometry,
        ris: &RisSpec,
        cfg: &RadioConfig,
        tx: &AntennaSpec,
        rx: &AntennaSpec,
    ) -> Result<Self> {
        g.validate()?;
        ris.validate()?;
        let lambda = cfg.wavelength();
        let ellipse = illuminated_footprint(g, fnbw(tx, lambda)?)?;
        let rows = active_rows(g, ris, &ellipse);
        let center = g.ris_center();
        let (txp, rxp) = (g.tx_position(), g.rx_position());
        Ok(Self {
            geometry: *g,
            ris: *ris,
            ellipse,
            lambda,
            rows,
            tx: txp,
            rx: rxp,
            tx_boresight: unit(sub(center, txp)),
            rx_boresight: unit(sub(center, rxp)),
            tx_max: tx.max_gain(lambda),
            rx_max: rx.max_gain(lambda),
            tx_ratio: tx.aperture_ratio(lambda),
            rx_ratio: rx.aperture_ratio(lambda),
        })
    }

    pub fn rows(&self) -> &[RowSpan] {
        &self.rows
    }

    /// Number of active RUs `M`.
    pub fn active_count(&self) -> usize {
        self.rows.iter().map(RowSpan::len).sum()
    }

    /// Global position of the center of RU `(i, j)`.
    #[inline]
    pub fn ru_position(&self, i: usize, j: usize) -> [f64; 3] {
        ru_position(&self.geometry, &self.ris, i, j)
    }

    /// Full per-RU quantities for RU `(i, j)`; `(i, j)` need not be active.
    pub fn sample(&self, i: usize, j: usize) -> RuSample {
        let p = self.ru_position(i, j);
        let to_tx = sub(p, self.tx);
        let to_rx = sub(p, self.rx);
        let r1n = norm(to_tx);
        let r2n = norm(to_rx);
        let y = self.geometry.y_s;
        let phase = (-TAU * (r1n + r2n) / self.lambda).rem_euclid(TAU);
        RuSample {
            index: (i, j),
            position: p,
            r1n,
            r2n,
            theta_in: (y / r1n).clamp(-1.0, 1.0).acos(),
            theta_rn: (y / r2n).clamp(-1.0, 1.0).acos(),
            g_tn: self.off_axis_gain(self.tx_boresight, to_tx, r1n, self.tx_max, self.tx_ratio),
            g_rn: self.off_axis_gain(self.rx_boresight, to_rx, r2n, self.rx_max, self.rx_ratio),
            phase,
        }
    }

    /// Amplitude of RU `(i, j)` without building the full sample.
    #[inline]
    pub fn amplitude(&self, i: usize, j: usize) -> f64 {
        let p = self.ru_position(i, j);
        let to_tx = sub(p, self.tx);
        let to_rx = sub(p, self.rx);
        let r1n = norm(to_tx);
        let r2n = norm(to_rx);
        let gt = self.off_axis_gain(self.tx_boresight, to_tx, r1n, self.tx_max, self.tx_ratio);
        let gr = self.off_axis_gain(self.rx_boresight, to_rx, r2n, self.rx_max, self.rx_ratio);
        let y = self.geometry.y_s;
        // G_s(theta) = 4 cos(theta) with cos(theta) = y_s / r
        let gs = 16.0 * (y / r1n) * (y / r2n);
        (gt * gr * gs).sqrt() / (r1n * r2n)
    }

    #[inline]
    fn off_axis_gain(
        &self,
        boresight: [f64; 3],
        ray: [f64; 3],
        len: f64,
        gmax: f64,
        ratio: f64,
    ) -> f64 {
        if dot(boresight, ray) <= 0.0 {
            return 0.0;
        }
        let sin_phi = (norm(cross(boresight, ray)) / len).min(1.0);
        let e = field_from_sin(sin_phi, ratio);
        gmax * e * e
    }

    /// Applies `f` to every row span in parallel and returns the results in
    /// row order.
    pub fn map_rows<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&Self, &RowSpan) -> T + Sync + Send,
    {
        self.rows.par_iter().map(|row| f(self, row)).collect()
    }

    /// All active RUs in row-major order.
    pub fn samples(&self) -> Vec<RuSample> {
        self.map_rows(|grid, row| {
            (row.start..row.end)
                .map(|i| grid.sample(i, row.row))
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
    }
}

/// Active RUs of the link, row-major.
pub fn enumerate_rus(
    g: &LinkGeometry,
    ris: &RisSpec,
    cfg: &RadioConfig,
    tx: &AntennaSpec,
    rx: &AntennaSpec,
) -> Result<Vec<RuSample>> {
    let grid = IlluminatedGrid::new(g, ris, cfg, tx, rx)?;
    if grid.active_count() == 0 {
        return Err(Error::EmptyIllumination);
    }
    Ok(grid.samples())
}

#[inline]
fn ru_position(g: &LinkGeometry, ris: &RisSpec, i: usize, j: usize) -> [f64; 3] {
    let x = g.r_1h + (i as f64 - 0.5 * (ris.n_x as f64 - 1.0)) * ris.d_x;
    let z = g.h_s + (j as f64 - 0.5 * (ris.n_y as f64 - 1.0)) * ris.d_y;
    [x, g.y_s, z]
}

fn active_rows(g: &LinkGeometry, ris: &RisSpec, e: &FootprintEllipse) -> Vec<RowSpan> {
    let (_, hz) = e.half_extents();
    let col0 = g.r_1h - 0.5 * (ris.n_x as f64 - 1.0) * ris.d_x;
    let row0 = g.h_s - 0.5 * (ris.n_y as f64 - 1.0) * ris.d_y;
    let to_index = |v: f64, origin: f64, pitch: f64| (v - origin) / pitch;
    let j_lo = to_index(e.center[1] - hz, row0, ris.d_y).floor() - 1.0;
    let j_hi = to_index(e.center[1] + hz, row0, ris.d_y).ceil() + 1.0;
    let j_lo = j_lo.max(0.0) as usize;
    let j_hi = j_hi.min(ris.n_y as f64 - 1.0);
    if j_hi < 0.0 {
        return Vec::new();
    }
    let j_hi = j_hi as usize;
    let inside = |i: usize, j: usize| {
        let p = ru_position(g, ris, i, j);
        e.contains(p[0], p[2])
    };
    let mut rows = Vec::new();
    for j in j_lo..=j_hi {
        let z = row0 + j as f64 * ris.d_y;
        let Some((x0, x1)) = e.chord(z) else { continue };
        let lo = to_index(x0, col0, ris.d_x).floor() - 1.0;
        let hi = to_index(x1, col0, ris.d_x).ceil() + 1.0;
        if hi < 0.0 || lo > ris.n_x as f64 - 1.0 {
            continue;
        }
        let mut start = lo.max(0.0) as usize;
        let mut last = hi.min(ris.n_x as f64 - 1.0) as usize;
        while start <= last && !inside(start, j) {
            start += 1;
        }
        while last > start && !inside(last, j) {
            last -= 1;
        }
        if start <= last && inside(start, j) {
            rows.push(RowSpan {
                row: j,
                start,
                end: last + 1,
            });
        }
    }
    rows
}

#[inline]
fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}
