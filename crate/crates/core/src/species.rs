//! Domain records: the atom, the buffer gas, the vapor cell and the
//! experimental conditions. All records are immutable after construction
//! and safe to share across worker threads.

use crate::constants::amu_to_kg;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Ground-state alkali atom treated as a Λ-system with Breit–Rabi Zeeman
/// structure (J = 1/2 ground state).
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpec {
    pub name: String,
    /// Free-atom ground-state hyperfine splitting (Hz).
    pub nu12_free_hz: f64,
    /// Nuclear spin I (non-negative multiple of 1/2).
    pub nuclear_spin: f64,
    /// Electronic g-factor of the J = 1/2 ground state.
    pub g_j: f64,
    /// Nuclear g-factor in nuclear-magneton units, with the Zeeman term
    /// +g_I·μ_N·m_F·B/h. Negative for ⁸⁷Rb in this convention, which makes
    /// the 0–0 clock shift positive.
    pub g_i: f64,
    /// Atomic mass (kg).
    pub mass_kg: f64,
    /// Excited-state population decay rate γ_e (s⁻¹).
    pub gamma_e: f64,
    /// Fraction of excited decay returning to the lower ground level |1⟩.
    pub branching_lower: f64,
}

impl AtomSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        nu12_free_hz: f64,
        nuclear_spin: f64,
        g_j: f64,
        g_i: f64,
        mass_kg: f64,
        gamma_e: f64,
        branching_lower: f64,
    ) -> Result<Self> {
        if !(nu12_free_hz > 0.0) {
            return Err(Error::domain(format!(
                "nu12_free_hz must be positive, got {nu12_free_hz}"
            )));
        }
        if !(gamma_e > 0.0) {
            return Err(Error::domain(format!(
                "gamma_e must be positive, got {gamma_e}"
            )));
        }
        if !(mass_kg > 0.0) {
            return Err(Error::domain(format!(
                "mass_kg must be positive, got {mass_kg}"
            )));
        }
        if !(0.0..=1.0).contains(&branching_lower) {
            return Err(Error::domain(format!(
                "branching_lower must lie in [0, 1], got {branching_lower}"
            )));
        }
        let twice_spin = 2.0 * nuclear_spin;
        if nuclear_spin < 0.0 || (twice_spin - twice_spin.round()).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "nuclear_spin must be a non-negative multiple of 1/2, got {nuclear_spin}"
            )));
        }
        Ok(AtomSpec {
            name: name.into(),
            nu12_free_hz,
            nuclear_spin,
            g_j,
            g_i,
            mass_kg,
            gamma_e,
            branching_lower,
        })
    }

    /// Built-in ⁸⁷Rb on the D1 line. The splitting is the standard
    /// literature value; γ_e = 2π·5.75 MHz; branching defaults to 50/50.
    pub fn rb87() -> Self {
        AtomSpec {
            name: "rb87".into(),
            nu12_free_hz: 6_834_682_610.9,
            nuclear_spin: 1.5,
            g_j: 2.002_331_13,
            g_i: -1.827_235,
            mass_kg: amu_to_kg(86.909_180_531),
            gamma_e: 2.0 * PI * 5.75e6,
            branching_lower: 0.5,
        }
    }
}

/// Buffer-gas constants. Mass (and the reference temperature for D₀) ship
/// with the built-in table; D₀, σ₂ and the pressure-shift coefficient are
/// measurement inputs and stay `None` unless supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferGasSpec {
    pub name: String,
    pub mass_kg: f64,
    /// Diffusion constant of the alkali in this gas at p₀ and `t0_k` (cm²/s).
    pub d0_cm2_s: Option<f64>,
    /// Ground-state decoherence cross section (cm²).
    pub sigma2_cm2: Option<f64>,
    /// Linear pressure shift of the 0–0 line (Hz/mbar); may be negative.
    pub shift_coeff_hz_per_mbar: Option<f64>,
    /// Reference temperature for `d0_cm2_s` (K).
    pub t0_k: f64,
}

impl BufferGasSpec {
    pub fn new(name: impl Into<String>, mass_kg: f64) -> Result<Self> {
        if !(mass_kg > 0.0) {
            return Err(Error::domain(format!(
                "gas mass must be positive, got {mass_kg}"
            )));
        }
        Ok(BufferGasSpec {
            name: name.into(),
            mass_kg,
            d0_cm2_s: None,
            sigma2_cm2: None,
            shift_coeff_hz_per_mbar: None,
            t0_k: 273.15,
        })
    }

    /// Built-in noble-gas masses. Transport and shift constants are not
    /// shipped as truth; supply them from config.
    pub fn builtin(name: &str) -> Option<Self> {
        let mass_u = match name.to_ascii_lowercase().as_str() {
            "he" | "helium" => 4.002_602,
            "ne" | "neon" => 20.1797,
            "ar" | "argon" => 39.948,
            "xe" | "xenon" => 131.293,
            _ => return None,
        };
        Some(BufferGasSpec {
            name: name.to_ascii_lowercase(),
            mass_kg: amu_to_kg(mass_u),
            d0_cm2_s: None,
            sigma2_cm2: None,
            shift_coeff_hz_per_mbar: None,
            t0_k: 273.15,
        })
    }

    pub fn with_d0(mut self, d0_cm2_s: f64) -> Result<Self> {
        if d0_cm2_s < 0.0 {
            return Err(Error::domain(format!(
                "d0_cm2_s must be non-negative, got {d0_cm2_s}"
            )));
        }
        self.d0_cm2_s = Some(d0_cm2_s);
        Ok(self)
    }

    pub fn with_sigma2(mut self, sigma2_cm2: f64) -> Result<Self> {
        if sigma2_cm2 < 0.0 {
            return Err(Error::domain(format!(
                "sigma2_cm2 must be non-negative, got {sigma2_cm2}"
            )));
        }
        self.sigma2_cm2 = Some(sigma2_cm2);
        Ok(self)
    }

    pub fn with_shift_coeff(mut self, hz_per_mbar: f64) -> Self {
        self.shift_coeff_hz_per_mbar = Some(hz_per_mbar);
        self
    }

    pub fn with_t0(mut self, t0_k: f64) -> Result<Self> {
        if !(t0_k > 0.0) {
            return Err(Error::domain(format!(
                "t0_k must be positive, got {t0_k}"
            )));
        }
        self.t0_k = t0_k;
        Ok(self)
    }

    pub fn require_d0(&self) -> Result<f64> {
        self.d0_cm2_s.ok_or_else(|| Error::InsufficientGasData {
            gas: self.name.clone(),
            field: "d0_cm2_s",
        })
    }

    pub fn require_sigma2(&self) -> Result<f64> {
        self.sigma2_cm2.ok_or_else(|| Error::InsufficientGasData {
            gas: self.name.clone(),
            field: "sigma2_cm2",
        })
    }
}

/// Cylindrical vapor cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub length_m: f64,
    pub radius_m: f64,
}

impl CellGeometry {
    pub fn new(length_m: f64, radius_m: f64) -> Result<Self> {
        if !(length_m > 0.0) || !(radius_m > 0.0) {
            return Err(Error::domain(format!(
                "cell dimensions must be positive, got length {length_m} m, radius {radius_m} m"
            )));
        }
        Ok(CellGeometry { length_m, radius_m })
    }
}

/// Cell contents and environment for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConditions {
    pub pressure_pa: f64,
    pub temperature_k: f64,
    /// Axial magnetic field (T).
    pub b_field_t: f64,
    pub cell: CellGeometry,
}

impl ExperimentConditions {
    pub fn new(pressure_pa: f64, temperature_k: f64, b_field_t: f64, cell: CellGeometry) -> Result<Self> {
        if !(pressure_pa > 0.0) {
            return Err(Error::domain(format!(
                "pressure must be positive, got {pressure_pa} Pa"
            )));
        }
        if !(temperature_k > 0.0) {
            return Err(Error::domain(format!(
                "temperature must be positive, got {temperature_k} K"
            )));
        }
        if b_field_t < 0.0 {
            return Err(Error::domain(format!(
                "b_field must be non-negative, got {b_field_t} T"
            )));
        }
        Ok(ExperimentConditions {
            pressure_pa,
            temperature_k,
            b_field_t,
            cell,
        })
    }

    pub fn pressure_mbar(&self) -> f64 {
        crate::units::pa_to_mbar(self.pressure_pa)
    }
}
