//! Ground-state coherence relaxation: diffusion of the alkali atoms to the
//! cell walls plus collisional decoherence by the buffer gas,
//!
//! ```text
//! Γ₁₂ = A·D₀·(p₀/p)·(T/T₀)^{3/2}  +  N₀·v̄_r·σ₂·(p/p₀)
//! ```
//!
//! A is the lowest diffusion mode of a cylindrical cell, D₀ the diffusion
//! constant at the reference pressure p₀ = 1013 mbar and temperature T₀,
//! N₀ Loschmidt's constant and v̄_r the mean relative speed of the colliding
//! pair. The dark-resonance linewidth in the hyperfine-frequency domain is
//! FWHM = Γ₁₂/π; in the scan (pulse-repetition) domain it is Γ₁₂/(π·m).

use crate::constants::{LOSCHMIDT_CM3, P0_PA};
use crate::error::{Error, Result};
use crate::kinetics::{mean_relative_speed, reduced_mass};
use crate::species::{AtomSpec, BufferGasSpec, CellGeometry, ExperimentConditions};
use std::f64::consts::PI;

/// First zero of the zeroth-order Bessel function J₀, fixing the lowest
/// radial diffusion mode of a cylinder.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404_826;

/// Both relaxation terms and their derived linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationBreakdown {
    /// Wall-diffusion contribution (s⁻¹).
    pub diffusion_rate: f64,
    /// Buffer-gas collision contribution (s⁻¹).
    pub collision_rate: f64,
    /// Γ₁₂ = diffusion + collision (s⁻¹).
    pub total: f64,
    /// Linewidth in the hyperfine-frequency domain: Γ₁₂/π (Hz).
    pub fwhm_hf_hz: f64,
}

impl RelaxationBreakdown {
    pub fn from_rates(diffusion_rate: f64, collision_rate: f64) -> Self {
        let total = diffusion_rate + collision_rate;
        RelaxationBreakdown {
            diffusion_rate,
            collision_rate,
            total,
            fwhm_hf_hz: total / PI,
        }
    }

    /// Linewidth as seen on the pulse-repetition axis when the resonance is
    /// the m-th subharmonic.
    pub fn fwhm_scan_hz(&self, subharmonic: u32) -> f64 {
        self.fwhm_hf_hz / subharmonic as f64
    }
}

/// Geometry factor A = (π/L)² + (x₁/R)² of the lowest cylindrical diffusion
/// mode, in cm⁻².
pub fn geometry_factor(cell: &CellGeometry) -> f64 {
    let l_cm = cell.length_m * 100.0;
    let r_cm = cell.radius_m * 100.0;
    (PI / l_cm).powi(2) + (BESSEL_J0_FIRST_ZERO / r_cm).powi(2)
}

/// Wall-relaxation rate A·D₀·(p₀/p)·(T/T₀)^{3/2} (s⁻¹).
///
/// The (T/T₀)^{3/2} factor is standard gas-kinetic scaling of the diffusion
/// constant; at T = T₀ the rate reduces exactly to A·D₀·p₀/p. Pass
/// `temp_scaling = false` to pin D₀ at its reference value.
pub fn diffusion_rate_with(
    cell: &CellGeometry,
    gas: &BufferGasSpec,
    cond: &ExperimentConditions,
    temp_scaling: bool,
) -> Result<f64> {
    let d0 = gas.require_d0()?;
    let a = geometry_factor(cell);
    let scale = if temp_scaling {
        (cond.temperature_k / gas.t0_k).powf(1.5)
    } else {
        1.0
    };
    Ok(a * d0 * (P0_PA / cond.pressure_pa) * scale)
}

pub fn diffusion_rate(
    cell: &CellGeometry,
    gas: &BufferGasSpec,
    cond: &ExperimentConditions,
) -> Result<f64> {
    diffusion_rate_with(cell, gas, cond, true)
}

/// Collisional decoherence rate N₀·v̄_r·σ₂·(p/p₀) (s⁻¹).
pub fn collision_rate(
    gas: &BufferGasSpec,
    cond: &ExperimentConditions,
    atom: &AtomSpec,
) -> Result<f64> {
    let sigma2 = gas.require_sigma2()?;
    let mu = reduced_mass(atom.mass_kg, gas.mass_kg)?;
    let v_cm_s = mean_relative_speed(cond.temperature_k, mu)? * 100.0;
    Ok(LOSCHMIDT_CM3 * v_cm_s * sigma2 * (cond.pressure_pa / P0_PA))
}

/// Full Γ₁₂ breakdown. Requires both gas constants; use the single-term
/// rates when only one is available.
pub fn gamma12(
    cell: &CellGeometry,
    gas: &BufferGasSpec,
    cond: &ExperimentConditions,
    atom: &AtomSpec,
) -> Result<RelaxationBreakdown> {
    let diff = diffusion_rate(cell, gas, cond)?;
    let coll = collision_rate(gas, cond, atom)?;
    Ok(RelaxationBreakdown::from_rates(diff, coll))
}

/// The analytic minimizer of Γ₁₂ over pressure, and the breakdown there.
#[derive(Debug, Clone, Copy)]
pub struct OptimalPressure {
    pub pressure_pa: f64,
    pub breakdown: RelaxationBreakdown,
}

/// p* = p₀·√(A·D₀·s / (N₀·v̄_r·σ₂)) with s the diffusion temperature scaling;
/// at p* the two terms of Γ₁₂ are equal and Γ₁₂(p*) = 2·√(A·D₀·s·N₀·v̄_r·σ₂).
pub fn optimal_pressure(
    cell: &CellGeometry,
    gas: &BufferGasSpec,
    atom: &AtomSpec,
    temperature_k: f64,
) -> Result<OptimalPressure> {
    let d0 = gas.require_d0()?;
    let sigma2 = gas.require_sigma2()?;
    if d0 == 0.0 || sigma2 == 0.0 {
        return Err(Error::NoInteriorMinimum(format!(
            "gas `{}` has d0_cm2_s = {d0}, sigma2_cm2 = {sigma2}; both must be positive",
            gas.name
        )));
    }
    if !(temperature_k > 0.0) {
        return Err(Error::domain(format!(
            "temperature must be positive, got {temperature_k}"
        )));
    }
    let a = geometry_factor(cell);
    let scale = (temperature_k / gas.t0_k).powf(1.5);
    let mu = reduced_mass(atom.mass_kg, gas.mass_kg)?;
    let v_cm_s = mean_relative_speed(temperature_k, mu)? * 100.0;
    // Γ(p) = c_d·p₀/p + c_c·p/p₀ minimized at p/p₀ = √(c_d/c_c)
    let c_d = a * d0 * scale;
    let c_c = LOSCHMIDT_CM3 * v_cm_s * sigma2;
    let pressure_pa = P0_PA * (c_d / c_c).sqrt();
    let term = (c_d * c_c).sqrt();
    Ok(OptimalPressure {
        pressure_pa,
        breakdown: RelaxationBreakdown::from_rates(term, term),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper_cell() -> CellGeometry {
        CellGeometry::new(0.05, 0.01).unwrap()
    }

    fn xe_with_sigma2() -> BufferGasSpec {
        BufferGasSpec::builtin("xe")
            .unwrap()
            .with_sigma2(1.1e-18)
            .unwrap()
    }

    fn ar_configured() -> BufferGasSpec {
        BufferGasSpec::builtin("ar")
            .unwrap()
            .with_d0(0.23)
            .unwrap()
            .with_sigma2(3.7e-22)
            .unwrap()
    }

    fn conditions(p_mbar: f64, t_k: f64) -> ExperimentConditions {
        ExperimentConditions::new(p_mbar * 100.0, t_k, 0.0, paper_cell()).unwrap()
    }

    #[test]
    fn geometry_factor_paper_cell() {
        // (π/5)² + (2.404826/1)² evaluated directly
        let a = geometry_factor(&paper_cell());
        let oracle = (PI / 5.0).powi(2) + (BESSEL_J0_FIRST_ZERO / 1.0).powi(2);
        assert_relative_eq!(a, oracle, max_relative = 1e-15);
        assert!((a - 6.18).abs() < 0.01, "got {a}");
    }

    #[test]
    fn geometry_factor_scales_inverse_square() {
        let a1 = geometry_factor(&paper_cell());
        let a2 = geometry_factor(&CellGeometry::new(0.10, 0.02).unwrap());
        assert_relative_eq!(a2, a1 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn geometry_factor_vanishes_for_huge_cell() {
        let a = geometry_factor(&CellGeometry::new(1e6, 1e6).unwrap());
        assert!(a < 1e-14);
    }

    #[test]
    fn diffusion_rate_argon_33mbar() {
        // arithmetic oracle on the first term at T = T0
        let gas = ar_configured();
        let cond = conditions(33.0, 273.15);
        let rate = diffusion_rate(&paper_cell(), &gas, &cond).unwrap();
        let oracle = geometry_factor(&paper_cell()) * 0.23 * (1013.0 / 33.0);
        assert_relative_eq!(rate, oracle, max_relative = 1e-12);
        assert!((rate - 44.0).abs() < 1.0, "got {rate}");
    }

    #[test]
    fn diffusion_rate_inverse_in_pressure() {
        let gas = ar_configured();
        let r1 = diffusion_rate(&paper_cell(), &gas, &conditions(40.0, 273.15)).unwrap();
        let r2 = diffusion_rate(&paper_cell(), &gas, &conditions(20.0, 273.15)).unwrap();
        assert_relative_eq!(r2, 2.0 * r1, max_relative = 1e-12);
        let tiny = diffusion_rate(&paper_cell(), &gas, &conditions(1e12, 273.15)).unwrap();
        assert!(tiny < 1e-7);
    }

    #[test]
    fn diffusion_rate_missing_d0() {
        let gas = xe_with_sigma2();
        let err = diffusion_rate(&paper_cell(), &gas, &conditions(53.3, 294.0)).unwrap_err();
        assert!(err.to_string().contains("d0_cm2_s"));
    }

    #[test]
    fn collision_rate_xenon() {
        let gas = xe_with_sigma2();
        let atom = AtomSpec::rb87();
        let rate = collision_rate(&gas, &conditions(53.3, 294.0), &atom).unwrap();
        assert!((rate - 5.3e4).abs() / 5.3e4 < 0.03, "got {rate}");
    }

    #[test]
    fn collision_rate_linear_in_sigma2_and_pressure() {
        let atom = AtomSpec::rb87();
        let gas = xe_with_sigma2();
        let gas2 = BufferGasSpec::builtin("xe")
            .unwrap()
            .with_sigma2(2.2e-18)
            .unwrap();
        let cond = conditions(53.3, 294.0);
        let r = collision_rate(&gas, &cond, &atom).unwrap();
        let r2 = collision_rate(&gas2, &cond, &atom).unwrap();
        assert_relative_eq!(r2, 2.0 * r, max_relative = 1e-12);
        let low = collision_rate(&gas, &conditions(1e-15, 294.0), &atom).unwrap();
        assert!(low < 1e-9);
    }

    #[test]
    fn collision_rate_symmetric_in_species_masses() {
        // only the reduced mass enters
        let atom = AtomSpec::rb87();
        let mut swapped_atom = atom.clone();
        let gas = xe_with_sigma2();
        let mut swapped_gas = gas.clone();
        swapped_atom.mass_kg = gas.mass_kg;
        swapped_gas.mass_kg = atom.mass_kg;
        let cond = conditions(53.3, 294.0);
        let r = collision_rate(&gas, &cond, &atom).unwrap();
        let r_swapped = collision_rate(&swapped_gas, &cond, &swapped_atom).unwrap();
        assert_relative_eq!(r, r_swapped, max_relative = 1e-15);
    }

    #[test]
    fn xenon_linewidth_matches_measured_16_7_khz() {
        let gas = xe_with_sigma2();
        let atom = AtomSpec::rb87();
        let cond = conditions(53.3, 294.0);
        let coll = collision_rate(&gas, &cond, &atom).unwrap();
        let breakdown = RelaxationBreakdown::from_rates(0.0, coll);
        assert!(
            (breakdown.fwhm_hf_hz - 16.7e3).abs() / 16.7e3 < 0.10,
            "got {} Hz",
            breakdown.fwhm_hf_hz
        );
    }

    #[test]
    fn gamma12_is_additive() {
        let gas = ar_configured();
        let atom = AtomSpec::rb87();
        let cond = conditions(33.0, 307.0);
        let b = gamma12(&paper_cell(), &gas, &cond, &atom).unwrap();
        assert_eq!(b.total, b.diffusion_rate + b.collision_rate);
        assert_eq!(b.fwhm_hf_hz, b.total / PI);
        let diff = diffusion_rate(&paper_cell(), &gas, &cond).unwrap();
        assert_eq!(b.diffusion_rate, diff);
    }

    #[test]
    fn diffusion_only_when_sigma2_zero() {
        let gas = BufferGasSpec::builtin("ar")
            .unwrap()
            .with_d0(0.23)
            .unwrap()
            .with_sigma2(0.0)
            .unwrap();
        let atom = AtomSpec::rb87();
        let cond = conditions(33.0, 273.15);
        let b = gamma12(&paper_cell(), &gas, &cond, &atom).unwrap();
        assert_eq!(b.collision_rate, 0.0);
        assert_eq!(b.total, b.diffusion_rate);
    }

    #[test]
    fn optimal_pressure_balances_terms() {
        let gas = ar_configured();
        let atom = AtomSpec::rb87();
        let opt = optimal_pressure(&paper_cell(), &gas, &atom, 294.0).unwrap();
        assert_relative_eq!(
            opt.breakdown.diffusion_rate,
            opt.breakdown.collision_rate,
            max_relative = 1e-10
        );
        // cross-check against the explicitly evaluated terms at p*
        let cond = ExperimentConditions::new(opt.pressure_pa, 294.0, 0.0, paper_cell()).unwrap();
        let diff = diffusion_rate(&paper_cell(), &gas, &cond).unwrap();
        let coll = collision_rate(&gas, &cond, &atom).unwrap();
        assert_relative_eq!(diff, coll, max_relative = 1e-10);
        assert_relative_eq!(opt.breakdown.total, diff + coll, max_relative = 1e-10);
    }

    #[test]
    fn optimal_pressure_minimum_linewidth_in_expected_range() {
        // With the argon config constants the smallest achievable linewidth
        // lands in the tens of hertz.
        let gas = ar_configured();
        let atom = AtomSpec::rb87();
        let opt = optimal_pressure(&paper_cell(), &gas, &atom, 294.0).unwrap();
        assert!(
            opt.breakdown.fwhm_hf_hz > 10.0 && opt.breakdown.fwhm_hf_hz < 60.0,
            "got {} Hz",
            opt.breakdown.fwhm_hf_hz
        );
    }

    #[test]
    fn optimal_pressure_scaling_in_sigma2() {
        let gas = ar_configured();
        let gas4 = BufferGasSpec::builtin("ar")
            .unwrap()
            .with_d0(0.23)
            .unwrap()
            .with_sigma2(4.0 * 3.7e-22)
            .unwrap();
        let atom = AtomSpec::rb87();
        let p1 = optimal_pressure(&paper_cell(), &gas, &atom, 294.0).unwrap();
        let p4 = optimal_pressure(&paper_cell(), &gas4, &atom, 294.0).unwrap();
        assert_relative_eq!(p4.pressure_pa, p1.pressure_pa / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn optimal_pressure_agrees_with_sweep() {
        // brute-force sweep oracle, 1e4 log-spaced points
        let gas = ar_configured();
        let atom = AtomSpec::rb87();
        let opt = optimal_pressure(&paper_cell(), &gas, &atom, 294.0).unwrap();
        let n = 10_000;
        let (lo, hi) = (1.0f64, 1e6f64); // Pa
        let mut best = (f64::INFINITY, 0.0);
        let mut prev_grid_p = lo;
        let mut grid_step_at_best = 0.0;
        for i in 0..n {
            let p = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            let cond = ExperimentConditions::new(p, 294.0, 0.0, paper_cell()).unwrap();
            let g = gamma12(&paper_cell(), &gas, &cond, &atom).unwrap().total;
            if g < best.0 {
                best = (g, p);
                grid_step_at_best = p - prev_grid_p;
            }
            prev_grid_p = p;
        }
        assert!(
            (best.1 - opt.pressure_pa).abs() <= grid_step_at_best.abs().max(best.1 * 1e-3),
            "sweep minimum {} Pa vs analytic {} Pa",
            best.1,
            opt.pressure_pa
        );
        assert!(best.0 >= opt.breakdown.total * (1.0 - 1e-9));
    }

    #[test]
    fn gamma12_is_convex_in_pressure() {
        let gas = ar_configured();
        let atom = AtomSpec::rb87();
        let mut values = Vec::new();
        for i in 0..200 {
            let p = 10.0 * 1.05f64.powi(i);
            let cond = ExperimentConditions::new(p, 294.0, 0.0, paper_cell()).unwrap();
            values.push(gamma12(&paper_cell(), &gas, &cond, &atom).unwrap().total);
        }
        // log-spaced grid: verify every interior point lies below the chord.
        for w in values.windows(3) {
            // convexity in p on a geometric grid: chord endpoints at p/r, p·r
            // with r constant; midpoint value must be below the chord at p.
            let (a, b, c) = (w[0], w[1], w[2]);
            let r = 1.05f64;
            let lambda = (r - 1.0) / (r * r - 1.0) * r; // weight of left endpoint at p
            let chord = lambda * a + (1.0 - lambda) * c;
            assert!(b <= chord * (1.0 + 1e-12));
        }
    }

    #[test]
    fn optimal_pressure_requires_both_constants() {
        let atom = AtomSpec::rb87();
        let no_sigma = BufferGasSpec::builtin("ar").unwrap().with_d0(0.23).unwrap();
        assert!(optimal_pressure(&paper_cell(), &no_sigma, &atom, 294.0).is_err());
        let zero_sigma = BufferGasSpec::builtin("ar")
            .unwrap()
            .with_d0(0.23)
            .unwrap()
            .with_sigma2(0.0)
            .unwrap();
        assert!(matches!(
            optimal_pressure(&paper_cell(), &zero_sigma, &atom, 294.0),
            Err(Error::NoInteriorMinimum(_))
        ));
    }
}
