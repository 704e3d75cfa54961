//! Physical quantities with mandatory units.
//!
//! Every dimensional config value is written as `<number> <unit>` and stored
//! in one canonical unit per kind, which is also the unit the serializer
//! writes back. Keeping storage and output units identical makes the text
//! form round-trip bit for bit.

use uavcpn::units::{
    db_to_linear, dbm_to_watts, dbw_to_watts, watts_to_dbw, MEBIBYTE_BITS, MEGABYTE_BITS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Stored in W.
    Power,
    /// Stored in dBW.
    PowerDbw,
    /// Linear power factor in (0, 1]; `dB` values are read as a loss.
    Attenuation,
    /// Decibel offsets and step sizes.
    Decibel,
    Density,
    Data,
    Time,
    Length,
    Frequency,
    Energy,
    Mass,
    Acceleration,
    MassDensity,
    Area,
    Speed,
    /// Dimensionless; a unit is rejected.
    Scalar,
}

impl Kind {
    pub fn canonical_unit(self) -> Option<&'static str> {
        Some(match self {
            Kind::Power => "W",
            Kind::PowerDbw => "dBW",
            Kind::Attenuation => "linear",
            Kind::Decibel => "dB",
            Kind::Density => "per_m2",
            Kind::Data => "bits",
            Kind::Time => "s",
            Kind::Length => "m",
            Kind::Frequency => "Hz",
            Kind::Energy => "J",
            Kind::Mass => "kg",
            Kind::Acceleration => "m/s2",
            Kind::MassDensity => "kg/m3",
            Kind::Area => "m2",
            Kind::Speed => "m/s",
            Kind::Scalar => return None,
        })
    }

    pub fn units(self) -> &'static [&'static str] {
        match self {
            Kind::Power | Kind::PowerDbw => &["W", "mW", "dBW", "dBm"],
            Kind::Attenuation => &["linear", "dB"],
            Kind::Decibel => &["dB"],
            Kind::Density => &["per_m2", "per_km2"],
            Kind::Data => &["bits", "B", "kB", "MB", "MiB"],
            Kind::Time => &["s", "ms", "us"],
            Kind::Length => &["m", "km"],
            Kind::Frequency => &["Hz", "kHz", "MHz", "GHz"],
            Kind::Energy => &["J", "kJ", "Wh"],
            Kind::Mass => &["kg", "g"],
            Kind::Acceleration => &["m/s2"],
            Kind::MassDensity => &["kg/m3"],
            Kind::Area => &["m2", "cm2"],
            Kind::Speed => &["m/s", "km/h"],
            Kind::Scalar => &[],
        }
    }

    /// Converts `x` given in `unit` to the canonical unit.
    pub fn to_canonical(self, x: f64, unit: &str) -> Option<f64> {
        let v = match (self, unit) {
            (Kind::Power, "W") => x,
            (Kind::Power, "mW") => x / 1e3,
            (Kind::Power, "dBW") => dbw_to_watts(x),
            (Kind::Power, "dBm") => dbm_to_watts(x),
            (Kind::PowerDbw, "dBW") => x,
            (Kind::PowerDbw, "dBm") => x - 30.0,
            (Kind::PowerDbw, "W") => watts_to_dbw(x),
            (Kind::PowerDbw, "mW") => watts_to_dbw(x / 1e3),
            (Kind::Attenuation, "linear") => x,
            (Kind::Attenuation, "dB") => db_to_linear(-x.abs()),
            (Kind::Decibel, "dB") => x,
            (Kind::Density, "per_m2") => x,
            (Kind::Density, "per_km2") => x / 1e6,
            (Kind::Data, "bits") => x,
            (Kind::Data, "B") => x * 8.0,
            (Kind::Data, "kB") => x * 8e3,
            (Kind::Data, "MB") => x * MEGABYTE_BITS,
            (Kind::Data, "MiB") => x * MEBIBYTE_BITS,
            (Kind::Time, "s") => x,
            (Kind::Time, "ms") => x / 1e3,
            (Kind::Time, "us") => x / 1e6,
            (Kind::Length, "m") => x,
            (Kind::Length, "km") => x * 1e3,
            (Kind::Frequency, "Hz") => x,
            (Kind::Frequency, "kHz") => x * 1e3,
            (Kind::Frequency, "MHz") => x * 1e6,
            (Kind::Frequency, "GHz") => x * 1e9,
            (Kind::Energy, "J") => x,
            (Kind::Energy, "kJ") => x * 1e3,
            (Kind::Energy, "Wh") => x * 3600.0,
            (Kind::Mass, "kg") => x,
            (Kind::Mass, "g") => x / 1e3,
            (Kind::Acceleration, "m/s2") => x,
            (Kind::MassDensity, "kg/m3") => x,
            (Kind::Area, "m2") => x,
            (Kind::Area, "cm2") => x / 1e4,
            (Kind::Speed, "m/s") => x,
            (Kind::Speed, "km/h") => x / 3.6,
            _ => return None,
        };
        Some(v)
    }
}

pub fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(v)
}

/// Parses `"<n1>, <n2>, ... <unit>"` (a single number is a list of one).
pub fn parse_quantities(raw: &str, kind: Kind) -> Result<Vec<f64>, String> {
    let (numbers, unit) = split_unit(raw, kind)?;
    let mut out = Vec::new();
    for part in numbers.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err("empty list element".into());
        }
        let x = parse_number(part)?;
        let v = match unit {
            Some(u) => kind
                .to_canonical(x, u)
                .ok_or_else(|| format!("unit `{u}` is not one of {}", kind.units().join(", ")))?,
            None => x,
        };
        if !v.is_finite() {
            return Err(format!("`{part}` overflows"));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn parse_quantity(raw: &str, kind: Kind) -> Result<f64, String> {
    let v = parse_quantities(raw, kind)?;
    match v.as_slice() {
        [x] => Ok(*x),
        _ => Err(format!("expected one value, found {}", v.len())),
    }
}

fn split_unit(raw: &str, kind: Kind) -> Result<(&str, Option<&str>), String> {
    let raw = raw.trim();
    let last = raw
        .rsplit(|c: char| c.is_whitespace() || c == ',')
        .next()
        .unwrap_or("");
    let looks_numeric = parse_number(last).is_ok() || last.is_empty();
    match (kind.canonical_unit(), looks_numeric) {
        (None, true) => Ok((raw, None)),
        (None, false) => Err(format!(
            "`{last}`: this key is dimensionless and takes no unit"
        )),
        (Some(_), true) => Err(format!("missing unit (one of {})", kind.units().join(", "))),
        (Some(_), false) => {
            let numbers = raw[..raw.len() - last.len()].trim_end();
            if numbers.is_empty() {
                return Err(format!("`{raw}` has a unit but no value"));
            }
            if !kind.units().contains(&last) {
                return Err(format!(
                    "unit `{last}` is not one of {}",
                    kind.units().join(", ")
                ));
            }
            Ok((numbers, Some(last)))
        }
    }
}

/// Shortest text that parses back to exactly `x`.
pub fn format_number(x: f64) -> String {
    format!("{x:?}")
}

pub fn format_quantities(values: &[f64], kind: Kind) -> String {
    let numbers: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
    match kind.canonical_unit() {
        Some(u) => format!("{} {u}", numbers.join(", ")),
        None => numbers.join(", "),
    }
}
