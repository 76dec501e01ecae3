//! Physical constants (CODATA 2018) and the fixed reference table of the
//! relaxation model. Internal units are SI; the only deliberate exceptions
//! are the cm-based quantities of the diffusion/collision formula, which is
//! conventionally written with D₀ in cm²/s, σ₂ in cm² and Loschmidt's
//! constant in cm⁻³.

/// Planck constant (J·s, exact).
pub const H: f64 = 6.626_070_15e-34;

/// Boltzmann constant (J/K, exact).
pub const K_B: f64 = 1.380_649e-23;

/// Bohr magneton (J/T).
pub const MU_B: f64 = 9.274_010_078_3e-24;

/// Nuclear magneton (J/T).
pub const MU_N: f64 = 5.050_783_746_1e-27;

/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS_KG: f64 = 1.660_539_066_60e-27;

/// Loschmidt constant (cm⁻³): ideal-gas number density at 273.15 K, 101.325 kPa.
pub const LOSCHMIDT_CM3: f64 = 2.686_780_111e19;

/// Reference pressure of the relaxation model: exactly 1013 mbar, in Pa.
pub const P0_PA: f64 = 101_300.0;

/// Reference pressure of the relaxation model in mbar.
pub const P0_MBAR: f64 = 1013.0;

/// Convert an atomic mass in u to kg.
pub fn amu_to_kg(mass_u: f64) -> f64 {
    mass_u * ATOMIC_MASS_KG
}
