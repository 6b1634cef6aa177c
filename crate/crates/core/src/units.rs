//! Decibel conversions. Everything inside the crate is SI linear; dB only
//! appears at the reporting boundary.

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[inline]
pub fn to_db(power_ratio: f64) -> f64 {
    10.0 * power_ratio.log10()
}

#[inline]
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    to_db(watts) + 30.0
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    from_db(dbm - 30.0)
}
