//! Decibel and density conversions used throughout the crate.

/// Bits in one binary megabyte (2^20 bytes).
pub const MEBIBYTE_BITS: f64 = 8.0 * 1_048_576.0;
/// Bits in one decimal megabyte (10^6 bytes).
pub const MEGABYTE_BITS: f64 = 8.0e6;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    db_to_linear(dbw)
}

pub fn watts_to_dbw(w: f64) -> f64 {
    linear_to_db(w)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Nodes per km² to nodes per m².
pub fn per_km2(density: f64) -> f64 {
    density / 1e6
}
