//! Unit suffixes accepted by the config reader.

use crate::constants::{ATOMIC_DIPOLE, TWO_PI};

/// How ordinary-frequency rates (Hz, MHz, ...) become angular frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyConvention {
    /// `ω = 2π·f`.
    #[default]
    Angular,
    /// The numeric value in Hz is used as rad/s unchanged.
    Ordinary,
}

impl FrequencyConvention {
    pub fn to_angular(self, hz: f64) -> f64 {
        match self {
            Self::Angular => TWO_PI * hz,
            Self::Ordinary => hz,
        }
    }

    pub fn from_angular(self, rad_per_s: f64) -> f64 {
        match self {
            Self::Angular => rad_per_s / TWO_PI,
            Self::Ordinary => rad_per_s,
        }
    }

    /// Shorthand for `to_angular(mhz * 1e6)`.
    pub fn mhz(self, mhz: f64) -> f64 {
        self.to_angular(mhz * 1e6)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Angular => "angular",
            Self::Ordinary => "ordinary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "angular" => Some(Self::Angular),
            "ordinary" => Some(Self::Ordinary),
            _ => None,
        }
    }
}

/// Physical dimension of a config key; selects the accepted suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Length,
    Density,
    Power,
    /// Rabi/decay/dephasing/detuning rates; stored in rad/s.
    Rate,
    /// Carrier, offset and bandwidth frequencies; stored in Hz.
    Frequency,
    Time,
    Dipole,
    Field,
    Gain,
    Temperature,
    Angle,
    Fraction,
    Dimensionless,
    Resistance,
}

impl Quantity {
    /// Suffix written by the serializer; converting with it is the identity.
    pub fn canonical_suffix(self) -> &'static str {
        match self {
            Quantity::Length => "m",
            Quantity::Density => "m^-3",
            Quantity::Power => "W",
            Quantity::Rate => "rad/s",
            Quantity::Frequency => "Hz",
            Quantity::Time => "s",
            Quantity::Dipole => "C*m",
            Quantity::Field => "V/m",
            Quantity::Gain | Quantity::Fraction | Quantity::Dimensionless => "",
            Quantity::Temperature => "K",
            Quantity::Angle => "rad",
            Quantity::Resistance => "Ohm",
        }
    }
}

/// Converts `value unit` to SI (rad/s for rates). `None` when the suffix is
/// not valid for `quantity`.
pub fn to_si(quantity: Quantity, value: f64, unit: &str, convention: FrequencyConvention) -> Option<f64> {
    let scaled = |k: f64| Some(value * k);
    match quantity {
        Quantity::Length => match unit {
            "" | "m" => scaled(1.0),
            "cm" => scaled(1e-2),
            "mm" => scaled(1e-3),
            "um" | "µm" | "μm" => scaled(1e-6),
            "nm" => scaled(1e-9),
            _ => None,
        },
        Quantity::Density => match unit {
            "" | "m^-3" | "m-3" | "/m3" => scaled(1.0),
            "cm^-3" | "cm-3" | "/cm3" => scaled(1e6),
            _ => None,
        },
        Quantity::Power => match unit {
            "" | "W" => scaled(1.0),
            "mW" => scaled(1e-3),
            "uW" | "µW" | "μW" => scaled(1e-6),
            "nW" => scaled(1e-9),
            "dBm" => Some(1e-3 * 10f64.powf(value / 10.0)),
            "dBW" => Some(10f64.powf(value / 10.0)),
            _ => None,
        },
        Quantity::Rate => match unit {
            "" | "rad/s" => scaled(1.0),
            "krad/s" => scaled(1e3),
            "Mrad/s" => scaled(1e6),
            "Hz" => Some(convention.to_angular(value)),
            "kHz" => Some(convention.to_angular(value * 1e3)),
            "MHz" => Some(convention.to_angular(value * 1e6)),
            "GHz" => Some(convention.to_angular(value * 1e9)),
            _ => None,
        },
        Quantity::Frequency => match unit {
            "" | "Hz" => scaled(1.0),
            "kHz" => scaled(1e3),
            "MHz" => scaled(1e6),
            "GHz" => scaled(1e9),
            _ => None,
        },
        Quantity::Time => match unit {
            "" | "s" => scaled(1.0),
            "ms" => scaled(1e-3),
            "us" | "µs" | "μs" => scaled(1e-6),
            "ns" => scaled(1e-9),
            _ => None,
        },
        Quantity::Dipole => match unit {
            "" | "C*m" | "Cm" | "C·m" => scaled(1.0),
            "qa0" | "ea0" => scaled(ATOMIC_DIPOLE),
            _ => None,
        },
        Quantity::Field => match unit {
            "" | "V/m" => scaled(1.0),
            "mV/m" => scaled(1e-3),
            "uV/m" | "µV/m" | "μV/m" => scaled(1e-6),
            "dBV/m" => Some(10f64.powf(value / 20.0)),
            _ => None,
        },
        Quantity::Gain => match unit {
            "" => scaled(1.0),
            "dB" => Some(10f64.powf(value / 10.0)),
            _ => None,
        },
        Quantity::Temperature => match unit {
            "" | "K" => scaled(1.0),
            _ => None,
        },
        Quantity::Angle => match unit {
            "" | "rad" => scaled(1.0),
            "deg" => Some(value.to_radians()),
            _ => None,
        },
        Quantity::Fraction => match unit {
            "" => scaled(1.0),
            "%" => scaled(1e-2),
            _ => None,
        },
        Quantity::Dimensionless => match unit {
            "" => scaled(1.0),
            _ => None,
        },
        Quantity::Resistance => match unit {
            "" | "Ohm" | "ohm" | "Ω" => scaled(1.0),
            _ => None,
        },
    }
}

/// Linear power ratio to dB.
pub fn db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// dB to linear power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Field amplitude in V/m to dBV/m.
pub fn dbv_per_m(volts_per_m: f64) -> f64 {
    20.0 * volts_per_m.log10()
}

pub fn from_dbv_per_m(dbv: f64) -> f64 {
    10f64.powf(dbv / 20.0)
}
