//! Kinetic-theory support for the collisional relaxation term.

use crate::constants::K_B;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Reduced mass m₁m₂/(m₁+m₂) of a colliding pair (kg).
pub fn reduced_mass(m1_kg: f64, m2_kg: f64) -> Result<f64> {
    if !(m1_kg > 0.0) || !(m2_kg > 0.0) {
        return Err(Error::domain(format!(
            "masses must be positive, got {m1_kg} and {m2_kg}"
        )));
    }
    Ok(m1_kg * m2_kg / (m1_kg + m2_kg))
}

/// Maxwell–Boltzmann mean relative speed √(8k_BT/πμ) (m/s).
pub fn mean_relative_speed(temperature_k: f64, mu_kg: f64) -> Result<f64> {
    if !(temperature_k > 0.0) {
        return Err(Error::domain(format!(
            "temperature must be positive, got {temperature_k}"
        )));
    }
    if !(mu_kg > 0.0) {
        return Err(Error::domain(format!(
            "reduced mass must be positive, got {mu_kg}"
        )));
    }
    Ok((8.0 * K_B * temperature_k / (PI * mu_kg)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::amu_to_kg;
    use proptest::prelude::*;

    #[test]
    fn equal_mass_symmetry() {
        let m = amu_to_kg(87.0);
        assert_eq!(reduced_mass(m, m).unwrap(), m / 2.0);
    }

    #[test]
    fn rb_xe_pair() {
        // direct arithmetic oracle: 87·131.29/(87+131.29) u
        let mu = reduced_mass(amu_to_kg(87.0), amu_to_kg(131.29)).unwrap();
        let oracle = amu_to_kg(87.0 * 131.29 / (87.0 + 131.29));
        assert!((mu - oracle).abs() / oracle < 1e-14);
        assert!((mu / amu_to_kg(1.0) - 52.3).abs() < 0.1);
    }

    #[test]
    fn rb_he_pair() {
        let mu = reduced_mass(amu_to_kg(87.0), amu_to_kg(4.0026)).unwrap();
        assert!((mu / amu_to_kg(1.0) - 3.827).abs() < 0.01);
    }

    #[test]
    fn speed_scales_as_sqrt_t() {
        let mu = amu_to_kg(52.3);
        let v1 = mean_relative_speed(100.0, mu).unwrap();
        let v4 = mean_relative_speed(400.0, mu).unwrap();
        assert!((v4 / v1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rb_xe_speed_at_294k() {
        // closed-form kinetic-theory formula evaluated independently
        let mu = reduced_mass(amu_to_kg(86.909180531), amu_to_kg(131.293)).unwrap();
        let v = mean_relative_speed(294.0, mu).unwrap();
        assert!((v - 345.0).abs() < 2.0, "got {v}");
    }

    #[test]
    fn rb_ar_speed_at_307k() {
        let mu = reduced_mass(amu_to_kg(86.909180531), amu_to_kg(39.948)).unwrap();
        let v = mean_relative_speed(307.0, mu).unwrap();
        assert!((v - 487.0).abs() < 2.0, "got {v}");
    }

    #[test]
    fn nonpositive_inputs_rejected() {
        assert!(reduced_mass(0.0, 1.0).is_err());
        assert!(reduced_mass(1.0, -1.0).is_err());
        assert!(mean_relative_speed(0.0, 1.0).is_err());
        assert!(mean_relative_speed(300.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn reduced_mass_symmetric_and_below_min(a in 1e-30f64..1e-20, b in 1e-30f64..1e-20) {
            let ab = reduced_mass(a, b).unwrap();
            let ba = reduced_mass(b, a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab < a.min(b));
        }

        #[test]
        fn speed_monotone_in_t_and_mu(
            t in 1.0f64..2000.0,
            mu in 1e-27f64..1e-24,
            dt in 1.0f64..100.0,
            dmu in 1e-28f64..1e-25,
        ) {
            let v = mean_relative_speed(t, mu).unwrap();
            prop_assert!(mean_relative_speed(t + dt, mu).unwrap() > v);
            prop_assert!(mean_relative_speed(t, mu + dmu).unwrap() < v);
        }
    }
}
