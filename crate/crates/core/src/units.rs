//! Interface-boundary unit conversions. Everything internal is SI; mbar,
//! Torr, μT and °C exist only here and in config keys.

use crate::error::{Error, Result};

/// Pa per Torr: 101325/760, exact by definition.
pub const PA_PER_TORR: f64 = 101_325.0 / 760.0;

/// Pa per mbar, exact.
pub const PA_PER_MBAR: f64 = 100.0;

/// Pressure units accepted at the interface boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureUnit {
    Mbar,
    Torr,
    Pa,
}

impl PressureUnit {
    pub fn pa_per_unit(self) -> f64 {
        match self {
            PressureUnit::Mbar => PA_PER_MBAR,
            PressureUnit::Torr => PA_PER_TORR,
            PressureUnit::Pa => 1.0,
        }
    }

    /// Parse a unit tag. Unknown tags are a configuration error.
    pub fn parse(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "mbar" => Ok(PressureUnit::Mbar),
            "torr" => Ok(PressureUnit::Torr),
            "pa" => Ok(PressureUnit::Pa),
            other => Err(Error::config(format!(
                "unknown pressure unit `{other}` (expected one of: mbar, torr, pa)"
            ))),
        }
    }
}

/// Exact linear pressure conversion; 1013.25 mbar ↔ 760 Torr ↔ 101325 Pa.
pub fn convert_pressure(value: f64, from: PressureUnit, to: PressureUnit) -> Result<f64> {
    if !(value > 0.0) {
        return Err(Error::domain(format!(
            "pressure must be positive, got {value}"
        )));
    }
    Ok(value * from.pa_per_unit() / to.pa_per_unit())
}

/// Convert a linear frequency-shift coefficient (Hz per pressure unit) to Hz/mbar.
pub fn shift_coeff_to_hz_per_mbar(value: f64, per: PressureUnit) -> f64 {
    // Hz per X × (X per mbar)
    value * PA_PER_MBAR / per.pa_per_unit()
}

pub fn celsius_to_kelvin(t_c: f64) -> f64 {
    t_c + 273.15
}

pub fn microtesla_to_tesla(b_ut: f64) -> f64 {
    b_ut * 1e-6
}

pub fn pa_to_mbar(p_pa: f64) -> f64 {
    p_pa / PA_PER_MBAR
}

pub fn mbar_to_pa(p_mbar: f64) -> f64 {
    p_mbar * PA_PER_MBAR
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn torr_definition() {
        assert_eq!(
            convert_pressure(760.0, PressureUnit::Torr, PressureUnit::Pa).unwrap(),
            101_325.0
        );
    }

    #[test]
    fn mbar_definition() {
        assert_eq!(
            convert_pressure(33.0, PressureUnit::Mbar, PressureUnit::Pa).unwrap(),
            3300.0
        );
    }

    #[test]
    fn mbar_torr_chain() {
        let torr = convert_pressure(1013.25, PressureUnit::Mbar, PressureUnit::Torr).unwrap();
        assert!((torr - 760.0).abs() < 1e-9);
    }

    #[test]
    fn argon_shift_coefficient_in_mbar() {
        // unit-ratio oracle: -51 Hz/Torr × (101325/760 Pa/Torr)^-1 × 100 Pa/mbar
        let per_mbar = shift_coeff_to_hz_per_mbar(-51.0, PressureUnit::Torr);
        let oracle = -51.0 * 760.0 * 100.0 / 101_325.0;
        assert!((per_mbar - oracle).abs() < 1e-12);
        assert!((per_mbar - (-38.25)).abs() < 0.05, "got {per_mbar}");
    }

    #[test]
    fn nonpositive_pressure_rejected() {
        assert!(convert_pressure(0.0, PressureUnit::Pa, PressureUnit::Pa).is_err());
        assert!(convert_pressure(-1.0, PressureUnit::Mbar, PressureUnit::Pa).is_err());
    }

    #[test]
    fn unknown_unit_tag_rejected() {
        assert!(PressureUnit::parse("bar").is_err());
        assert!(PressureUnit::parse("Torr").is_ok());
    }

    proptest! {
        // Round trip through any unit chain of length ≤ 4 stays within 1e-12 relative.
        #[test]
        fn pressure_chain_round_trips(
            value in 1e-6f64..1e9,
            chain in proptest::collection::vec(0usize..3, 1..=4)
        ) {
            let units = [PressureUnit::Mbar, PressureUnit::Torr, PressureUnit::Pa];
            let mut x = value;
            let mut current = PressureUnit::Pa;
            for &i in &chain {
                x = convert_pressure(x, current, units[i]).unwrap();
                current = units[i];
            }
            x = convert_pressure(x, current, PressureUnit::Pa).unwrap();
            prop_assert!((x - value).abs() <= 1e-12 * value);
        }
    }
}
