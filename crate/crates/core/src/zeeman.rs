//! Ground-state Zeeman structure of a J = 1/2 atom from the exact
//! Breit–Rabi expression,
//!
//! ```text
//! E(F = I ± 1/2, m)/h = −Δ/(2(2I+1)) + g_I·μ_N·m·B/h ± (Δ/2)·√(1 + 4mx/(2I+1) + x²)
//! x = (g_J·μ_B − g_I·μ_N)·B/(h·Δ)
//! ```
//!
//! with energies in Hz relative to the zero-field hyperfine centroid (the
//! (2F+1)-weighted mean of the two manifolds), so the shifts of all 2(2I+1)
//! sublevels sum to zero at every field. The stretched states
//! m = ±(I+1/2) are evaluated with their exactly linear closed form. The
//! first-order-insensitive 0–0 transition picks up only the quadratic
//! (clock) shift Δ·(√(1+x²)−1).

use crate::constants::{H, MU_B, MU_N};
use crate::error::{Error, Result};
use crate::species::AtomSpec;

/// One ground-state Zeeman sublevel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanLevel {
    /// Total angular momentum F (twice the value is an integer; for I = 3/2
    /// the manifolds are F = 1 and F = 2).
    pub f: f64,
    /// Magnetic quantum number m_F.
    pub m_f: f64,
    /// Energy shift from the zero-field hyperfine centroid (Hz).
    pub energy_shift_hz: f64,
}

/// Minimum separation-to-linewidth ratio for the 0–0 line to count as
/// isolated from its first-order-shifted neighbours.
pub const ISOLATION_RATIO_MIN: f64 = 10.0;

fn validate_spin(atom: &AtomSpec) -> Result<f64> {
    let i = atom.nuclear_spin;
    if i < 0.5 {
        return Err(Error::UnsupportedLevelStructure(format!(
            "nuclear spin {i} has no hyperfine doublet; need I ≥ 1/2 with a J = 1/2 ground state"
        )));
    }
    Ok(i)
}

/// Dimensionless field parameter x = (g_J·μ_B − g_I·μ_N)·B/(h·Δ).
fn field_parameter(atom: &AtomSpec, b_field_t: f64) -> f64 {
    (atom.g_j * MU_B - atom.g_i * MU_N) * b_field_t / (H * atom.nu12_free_hz)
}

/// All (F, m_F) ground-sublevel shifts at the given axial field.
pub fn breit_rabi_levels(atom: &AtomSpec, b_field_t: f64) -> Result<Vec<ZeemanLevel>> {
    if b_field_t < 0.0 {
        return Err(Error::domain(format!(
            "b_field must be non-negative, got {b_field_t} T"
        )));
    }
    let i = validate_spin(atom)?;
    let delta = atom.nu12_free_hz;
    let two_i1 = 2.0 * i + 1.0;
    let x = field_parameter(atom, b_field_t);
    let nuclear_hz_per_m = atom.g_i * MU_N * b_field_t / H;

    let f_up = i + 0.5;
    let f_dn = i - 0.5;
    let mut levels = Vec::with_capacity((2.0 * two_i1) as usize);

    let mut m = -f_dn;
    while m <= f_dn + 0.25 {
        let base = -delta / (2.0 * two_i1) + nuclear_hz_per_m * m;
        let root = (1.0 + 4.0 * m * x / two_i1 + x * x).sqrt();
        levels.push(ZeemanLevel {
            f: f_dn,
            m_f: m,
            energy_shift_hz: base - 0.5 * delta * root,
        });
        m += 1.0;
    }
    let mut m = -f_up;
    while m <= f_up + 0.25 {
        let shift = if (m.abs() - f_up).abs() < 0.25 {
            // stretched states: exactly linear in B
            let sign = m.signum();
            delta * i / two_i1
                + sign * (atom.g_j * MU_B + 2.0 * i * atom.g_i * MU_N) * b_field_t / (2.0 * H)
        } else {
            let base = -delta / (2.0 * two_i1) + nuclear_hz_per_m * m;
            base + 0.5 * delta * (1.0 + 4.0 * m * x / two_i1 + x * x).sqrt()
        };
        levels.push(ZeemanLevel {
            f: f_up,
            m_f: m,
            energy_shift_hz: shift,
        });
        m += 1.0;
    }
    Ok(levels)
}

fn level(levels: &[ZeemanLevel], f: f64, m_f: f64) -> f64 {
    levels
        .iter()
        .find(|l| (l.f - f).abs() < 0.25 && (l.m_f - m_f).abs() < 0.25)
        .map(|l| l.energy_shift_hz)
        .expect("requested (F, m_F) sublevel exists")
}

/// 0–0 transition frequency ν₀₀(B) = E(F=I+1/2, 0) − E(F=I−1/2, 0) (Hz).
pub fn zero_zero_frequency(atom: &AtomSpec, b_field_t: f64) -> Result<f64> {
    let i = validate_spin(atom)?;
    let levels = breit_rabi_levels(atom, b_field_t)?;
    Ok(level(&levels, i + 0.5, 0.0) - level(&levels, i - 0.5, 0.0))
}

/// Second-order (clock) shift ν₀₀(B) − ν₀₀(0) of the 0–0 transition (Hz).
/// Positive and quadratic in B for ⁸⁷Rb.
pub fn clock_shift(atom: &AtomSpec, b_field_t: f64) -> Result<f64> {
    Ok(zero_zero_frequency(atom, b_field_t)? - atom.nu12_free_hz)
}

/// Whether the 0–0 line is far enough from its m_F ≠ 0 neighbours.
#[derive(Debug, Clone, Copy)]
pub struct IsolationReport {
    /// min over m ≠ 0 of |ν(F↓,m)↔(F↑,m) − ν₀₀| (Hz).
    pub min_separation_hz: f64,
    /// Γ₁₂/π (Hz).
    pub linewidth_hz: f64,
    pub ratio: f64,
    pub isolated: bool,
}

/// Compare the nearest Δm_F = 0 neighbour transition against the
/// dark-resonance linewidth Γ₁₂/π.
pub fn isolation_check(atom: &AtomSpec, b_field_t: f64, gamma12: f64) -> Result<IsolationReport> {
    if !(gamma12 > 0.0) {
        return Err(Error::domain(format!(
            "gamma12 must be positive, got {gamma12}"
        )));
    }
    let i = validate_spin(atom)?;
    let levels = breit_rabi_levels(atom, b_field_t)?;
    let nu00 = level(&levels, i + 0.5, 0.0) - level(&levels, i - 0.5, 0.0);
    let f_dn = i - 0.5;
    let mut min_sep = f64::INFINITY;
    let mut m = -f_dn;
    while m <= f_dn + 0.25 {
        if m.abs() > 0.25 {
            let nu_m = level(&levels, i + 0.5, m) - level(&levels, i - 0.5, m);
            min_sep = min_sep.min((nu_m - nu00).abs());
        }
        m += 1.0;
    }
    let linewidth_hz = gamma12 / std::f64::consts::PI;
    let ratio = min_sep / linewidth_hz;
    Ok(IsolationReport {
        min_separation_hz: min_sep,
        linewidth_hz,
        ratio,
        isolated: ratio > ISOLATION_RATIO_MIN,
    })
}
