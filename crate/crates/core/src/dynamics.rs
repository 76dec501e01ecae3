//! Stroboscopic Λ-system engine.
//!
//! One period of the drive is modelled as an impulsive unitary kick (the
//! pulse, ~3000× shorter than the period) followed by dissipative free
//! evolution in the frame co-rotating at m·ν_p. The observed steady state
//! is the unique fixed point of that period map, and the fluorescence per
//! period is the decayed excited population of the post-kick state.
//!
//! Basis ordering: |1⟩ = lower ground level (F=1, m_F=0),
//! |2⟩ = upper ground level (F=2, m_F=0), |e⟩ = excited state.

use crate::error::{Error, Result};
use crate::pulses::PulseTrainSpec;
use crate::relaxation;
use crate::species::{AtomSpec, BufferGasSpec, ExperimentConditions};
use crate::spectrum::{ScanDomain, ScanResult, ScanSample};
use crate::zeeman;
use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

type C64 = Complex64;
type M3 = Matrix3<C64>;

/// Hermiticity residual allowed on a stored density matrix.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Unit-trace residual allowed on a stored density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue allowed on a stored density matrix.
pub const POSITIVITY_TOL: f64 = -1e-10;

/// 3×3 density matrix over (|1⟩, |2⟩, |e⟩); Hermitian, unit trace,
/// positive semidefinite within the stated tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix3 {
    m: M3,
}

fn hermitize(m: &M3) -> M3 {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

impl DensityMatrix3 {
    /// Equal ground-level mixture with no coherences.
    pub fn ground_equilibrium() -> Self {
        let mut m = M3::zeros();
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        DensityMatrix3 { m }
    }

    /// Projector onto the normalized superposition a₁|1⟩ + a₂|2⟩ + a_e|e⟩.
    pub fn pure_state(a1: C64, a2: C64, ae: C64) -> Result<Self> {
        let norm2 = a1.norm_sqr() + a2.norm_sqr() + ae.norm_sqr();
        if norm2 <= 0.0 {
            return Err(Error::domain("pure state amplitudes are all zero"));
        }
        let inv = 1.0 / norm2.sqrt();
        let v = [a1 * inv, a2 * inv, ae * inv];
        let mut m = M3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                m[(r, c)] = v[r] * v[c].conj();
            }
        }
        Ok(DensityMatrix3 { m })
    }

    /// The non-coupled superposition (θ₂|1⟩ − θ₁e^{iφ}|2⟩)/√(θ₁²+θ₂²) for
    /// the given kick parameters.
    pub fn dark_state(area1_rad: f64, area2_rad: f64, phase_rad: f64) -> Result<Self> {
        let theta = area1_rad.hypot(area2_rad);
        if theta <= 0.0 {
            return Err(Error::domain(
                "dark state undefined for zero pulse areas",
            ));
        }
        let phase = C64::from_polar(1.0, phase_rad);
        Self::pure_state(
            C64::new(area2_rad, 0.0),
            -phase * C64::new(area1_rad, 0.0),
            C64::new(0.0, 0.0),
        )
    }

    /// Validating constructor for externally assembled matrices.
    pub fn from_matrix(m: M3) -> Result<Self> {
        let herm_residual = (m - m.adjoint()).norm();
        if herm_residual > HERMITICITY_TOL {
            return Err(Error::domain(format!(
                "density matrix is not Hermitian (residual {herm_residual:.3e})"
            )));
        }
        let m = hermitize(&m);
        let trace = m.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::domain(format!(
                "density matrix trace {trace} differs from 1 beyond {TRACE_TOL:.0e}"
            )));
        }
        let candidate = DensityMatrix3 { m };
        let min_eig = candidate.min_eigenvalue();
        if min_eig < POSITIVITY_TOL {
            return Err(Error::domain(format!(
                "density matrix has eigenvalue {min_eig:.3e} below {POSITIVITY_TOL:.0e}"
            )));
        }
        Ok(candidate)
    }

    pub fn matrix(&self) -> &M3 {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn population(&self, level: usize) -> f64 {
        self.m[(level, level)].re
    }

    pub fn excited_population(&self) -> f64 {
        self.population(2)
    }

    /// Ground-state hyperfine coherence ρ₁₂.
    pub fn ground_coherence(&self) -> C64 {
        self.m[(0, 1)]
    }

    /// Smallest eigenvalue of the Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let eigen = self.m.symmetric_eigen();
        let mut min = f64::INFINITY;
        for &e in eigen.eigenvalues.iter() {
            min = min.min(e);
        }
        min
    }

    /// All eigenvalues ≥ −tol, decided without an eigensolve: a Hermitian
    /// matrix shifted by tol·I is PSD iff its characteristic-polynomial
    /// coefficients (trace, sum of principal 2-minors, determinant) are all
    /// non-negative.
    pub fn is_positive_within(&self, tol: f64) -> bool {
        let b = self.m + M3::identity() * C64::new(tol, 0.0);
        let d = [b[(0, 0)].re, b[(1, 1)].re, b[(2, 2)].re];
        let trace = d[0] + d[1] + d[2];
        let minors = d[0] * d[1] - b[(0, 1)].norm_sqr()
            + d[0] * d[2] - b[(0, 2)].norm_sqr()
            + d[1] * d[2] - b[(1, 2)].norm_sqr();
        let det = b.determinant().re;
        trace >= 0.0 && minors >= 0.0 && det >= 0.0
    }

    /// Max-norm distance between the stored matrices.
    pub fn distance(&self, other: &DensityMatrix3) -> f64 {
        (self.m - other.m).camax()
    }
}

/// Unitary of one impulsive two-arm kick. The bright superposition
/// (θ₁|1⟩ + θ₂e^{iφ}|2⟩)/Θ rotates towards |e⟩ by the total area
/// Θ = √(θ₁²+θ₂²); the orthogonal dark superposition is untouched.
fn kick_unitary(area1: f64, area2: f64, phase: f64) -> M3 {
    let theta = area1.hypot(area2);
    if theta == 0.0 {
        return M3::identity();
    }
    let b1 = C64::new(area1 / theta, 0.0);
    let b2 = C64::from_polar(area2 / theta, phase);
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let cm1 = C64::new(c - 1.0, 0.0);
    let mis = C64::new(0.0, -s);
    let mut u = M3::identity();
    u[(0, 0)] += cm1 * b1 * b1.conj();
    u[(0, 1)] += cm1 * b1 * b2.conj();
    u[(1, 0)] += cm1 * b2 * b1.conj();
    u[(1, 1)] += cm1 * b2 * b2.conj();
    u[(2, 2)] += cm1;
    u[(0, 2)] = mis * b1;
    u[(1, 2)] = mis * b2;
    u[(2, 0)] = mis * b1.conj();
    u[(2, 1)] = mis * b2.conj();
    u
}

fn apply_kick(u: &M3, rho: &M3) -> M3 {
    u * rho * u.adjoint()
}

/// Entrywise factors of the interpulse relaxation map.
#[derive(Debug, Clone, Copy)]
struct RelaxMap {
    /// e^{−γT}
    excited_survival: f64,
    /// e^{−γT/2}
    optical_survival: f64,
    /// e^{−Γ₁T}
    ground_diff_survival: f64,
    /// (2β−1)·γ·(e^{−Γ₁T} − e^{−γT})/(γ − Γ₁)
    asymmetry_feed: f64,
    /// e^{−Γ₁₂T}·e^{−i·2πδT}
    coherence_factor: C64,
}

impl RelaxMap {
    fn new(period_s: f64, atom: &AtomSpec, gamma12: f64, gamma1: f64, detuning_hz: f64) -> Self {
        let gamma = atom.gamma_e;
        let t = period_s;
        let excited_survival = (-gamma * t).exp();
        let ground_diff_survival = (-gamma1 * t).exp();
        // ∫₀ᵀ e^{−Γ₁(T−s)}e^{−γs}ds · γ, degenerate limit handled explicitly
        let feed_kernel = if (gamma - gamma1).abs() < 1e-9 * gamma.max(1.0) {
            gamma * t * excited_survival
        } else {
            gamma * (ground_diff_survival - excited_survival) / (gamma - gamma1)
        };
        RelaxMap {
            excited_survival,
            optical_survival: (-gamma * t / 2.0).exp(),
            ground_diff_survival,
            asymmetry_feed: (2.0 * atom.branching_lower - 1.0) * feed_kernel,
            coherence_factor: C64::from_polar(1.0, -TAU * detuning_hz * t)
                * (-gamma12 * t).exp(),
        }
    }

    /// Linear in every entry; preserves the trace exactly by construction.
    fn apply(&self, rho: &M3) -> M3 {
        let ee = rho[(2, 2)];
        let g = rho[(0, 0)] + rho[(1, 1)];
        let w = rho[(0, 0)] - rho[(1, 1)];
        let decayed = ee * (1.0 - self.excited_survival);

        let g_new = g + decayed;
        let w_new = w * self.ground_diff_survival + ee * self.asymmetry_feed;

        let mut out = M3::zeros();
        out[(0, 0)] = (g_new + w_new) * 0.5;
        out[(1, 1)] = (g_new - w_new) * 0.5;
        out[(2, 2)] = ee * self.excited_survival;
        out[(0, 1)] = rho[(0, 1)] * self.coherence_factor;
        out[(1, 0)] = rho[(1, 0)] * self.coherence_factor.conj();
        out[(0, 2)] = rho[(0, 2)] * self.optical_survival;
        out[(2, 0)] = rho[(2, 0)] * self.optical_survival;
        out[(1, 2)] = rho[(1, 2)] * self.optical_survival;
        out[(2, 1)] = rho[(2, 1)] * self.optical_survival;
        out
    }
}

/// Apply one impulsive kick to the state.
pub fn pulse_kick(
    rho: &DensityMatrix3,
    area1_rad: f64,
    area2_rad: f64,
    phase_rad: f64,
) -> DensityMatrix3 {
    let u = kick_unitary(area1_rad, area2_rad, phase_rad);
    let m = hermitize(&apply_kick(&u, &rho.m));
    debug_assert!((m.trace().re - rho.trace()).abs() < TRACE_TOL);
    let out = DensityMatrix3 { m };
    debug_assert!(out.is_positive_within(-POSITIVITY_TOL));
    out
}

/// Free evolution for one period in the co-rotating frame: excited decay
/// with branching, optical-coherence decay at γ_e/2, ground-coherence decay
/// at Γ₁₂ with phase rotation e^{−i2πδT}, and ground populations relaxing
/// toward an equal mixture at Γ₁.
pub fn interpulse_evolve_with(
    rho: &DensityMatrix3,
    period_s: f64,
    atom: &AtomSpec,
    gamma12: f64,
    gamma1: f64,
    detuning_hz: f64,
) -> DensityMatrix3 {
    let map = RelaxMap::new(period_s, atom, gamma12, gamma1, detuning_hz);
    let m = hermitize(&map.apply(&rho.m));
    debug_assert!((m.trace().re - rho.trace()).abs() < TRACE_TOL);
    let out = DensityMatrix3 { m };
    debug_assert!(out.is_positive_within(-POSITIVITY_TOL));
    out
}

/// [`interpulse_evolve_with`] with the default Γ₁ = Γ₁₂.
pub fn interpulse_evolve(
    rho: &DensityMatrix3,
    period_s: f64,
    atom: &AtomSpec,
    gamma12: f64,
    detuning_hz: f64,
) -> DensityMatrix3 {
    interpulse_evolve_with(rho, period_s, atom, gamma12, gamma12, detuning_hz)
}

/// One full period map M = relax ∘ kick acting on a raw matrix.
struct PeriodMap {
    u: M3,
    relax: RelaxMap,
}

impl PeriodMap {
    fn new(pulse: &PulseTrainSpec, atom: &AtomSpec, gamma12: f64, gamma1: f64, detuning_hz: f64) -> Self {
        PeriodMap {
            u: kick_unitary(pulse.area1_rad, pulse.area2_rad, 0.0),
            relax: RelaxMap::new(pulse.period_s(), atom, gamma12, gamma1, detuning_hz),
        }
    }

    fn apply(&self, rho: &M3) -> M3 {
        self.relax.apply(&apply_kick(&self.u, rho))
    }
}

/// Steady state of the period map: vectorize the 9×9 linear map, replace
/// one redundant row of (M − I) with the unit-trace constraint and solve.
pub fn steady_state(
    pulse: &PulseTrainSpec,
    atom: &AtomSpec,
    gamma12: f64,
    detuning_hz: f64,
) -> Result<DensityMatrix3> {
    steady_state_with(pulse, atom, gamma12, gamma12, detuning_hz)
}

/// [`steady_state`] with an explicit ground-population relaxation rate Γ₁.
pub fn steady_state_with(
    pulse: &PulseTrainSpec,
    atom: &AtomSpec,
    gamma12: f64,
    gamma1: f64,
    detuning_hz: f64,
) -> Result<DensityMatrix3> {
    if gamma12 < 0.0 {
        return Err(Error::domain(format!(
            "gamma12 must be non-negative, got {gamma12}"
        )));
    }
    if gamma12 == 0.0 {
        return Err(Error::NonUniqueSteadyState(
            "gamma12 = 0 leaves the ground coherence undamped".into(),
        ));
    }
    let map = PeriodMap::new(pulse, atom, gamma12, gamma1, detuning_hz);

    // columns of the vectorized map: M(E_rc) for each basis matrix
    let mut a = SMatrix::<C64, 9, 9>::zeros();
    for col in 0..9 {
        let mut basis = M3::zeros();
        basis[(col / 3, col % 3)] = C64::new(1.0, 0.0);
        let image = map.apply(&basis);
        for row in 0..9 {
            a[(row, col)] = image[(row / 3, row % 3)];
        }
    }
    a -= SMatrix::<C64, 9, 9>::identity();
    // trace preservation makes the rows of (M − I) linearly dependent;
    // overwrite the first row with the trace functional and pin it to 1.
    for col in 0..9 {
        a[(0, col)] = if col % 4 == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
    }
    let mut b = SVector::<C64, 9>::zeros();
    b[0] = C64::new(1.0, 0.0);

    let solution = a
        .full_piv_lu()
        .solve(&b)
        .ok_or_else(|| Error::NonUniqueSteadyState("singular period map".into()))?;

    let mut m = M3::zeros();
    for k in 0..9 {
        m[(k / 3, k % 3)] = solution[k];
    }
    let m = hermitize(&m);
    let trace = m.trace().re;
    let m = m * C64::new(1.0 / trace, 0.0);
    let rho = DensityMatrix3 { m };
    if rho.min_eigenvalue() < POSITIVITY_TOL {
        return Err(Error::domain(format!(
            "steady-state solve produced eigenvalue {:.3e} below tolerance",
            rho.min_eigenvalue()
        )));
    }
    Ok(rho)
}

/// Iterative fallback: repeatedly apply the period map from `initial` until
/// successive states agree within `tol` (max-norm). Returns the state and
/// the number of periods applied.
pub fn steady_state_iterated(
    pulse: &PulseTrainSpec,
    atom: &AtomSpec,
    gamma12: f64,
    detuning_hz: f64,
    initial: &DensityMatrix3,
    tol: f64,
    max_periods: usize,
) -> (DensityMatrix3, usize) {
    let map = PeriodMap::new(pulse, atom, gamma12, gamma12, detuning_hz);
    let mut rho = initial.m;
    for k in 0..max_periods {
        let next = hermitize(&map.apply(&rho));
        let delta = (next - rho).camax();
        rho = next;
        if delta < tol {
            return (DensityMatrix3 { m: rho }, k + 1);
        }
    }
    (DensityMatrix3 { m: rho }, max_periods)
}

/// Photons per period (arbitrary units): the kick is applied to the
/// pre-pulse steady state and the excited population is integrated over one
/// period of free decay, γ_e·∫ρ_ee(t)dt = ρ_ee(0⁺)·(1 − e^{−γ_e·T}).
pub fn fluorescence(rho_ss: &DensityMatrix3, pulse: &PulseTrainSpec, atom: &AtomSpec) -> f64 {
    let post = pulse_kick(rho_ss, pulse.area1_rad, pulse.area2_rad, 0.0);
    let gamma_t = atom.gamma_e * pulse.period_s();
    (post.excited_population() * (1.0 - (-gamma_t).exp())).max(0.0)
}

/// Scan grid in the chosen domain. `center_hz = None` centres the grid on
/// the (shifted) resonance.
#[derive(Debug, Clone, Copy)]
pub struct ScanGrid {
    pub center_hz: Option<f64>,
    pub span_hz: f64,
    pub points: usize,
    pub domain: ScanDomain,
    /// Constant offset added to the recorded ν_p to obtain the physical
    /// ν_p (frequency-reference correction). Zero by default.
    pub frequency_offset_hz: f64,
}

impl ScanGrid {
    pub fn centered(span_hz: f64, points: usize, domain: ScanDomain) -> Self {
        ScanGrid {
            center_hz: None,
            span_hz,
            points,
            domain,
            frequency_offset_hz: 0.0,
        }
    }
}

/// Noise request for a simulated scan.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    /// Gaussian std as a fraction of the noiseless peak excursion.
    pub rel_sigma: f64,
    pub seed: u64,
}

fn scan_setup(
    pulse: &PulseTrainSpec,
    atom: &AtomSpec,
    gas: &BufferGasSpec,
    cond: &ExperimentConditions,
    grid: &ScanGrid,
) -> Result<(Vec<f64>, f64, f64, f64)> {
    if grid.points < 3 {
        return Err(Error::config(format!(
            "scan.points must be ≥ 3, got {}",
            grid.points
        )));
    }
    if !(grid.span_hz > 0.0) {
        return Err(Error::config(format!(
            "scan.span_hz must be positive, got {}",
            grid.span_hz
        )));
    }

    // Γ₁₂ from the relaxation model; a gas without D₀ contributes no
    // diffusion term (the heavy-gas regime) and is logged as such.
    let collision = relaxation::collision_rate(gas, cond, atom)?;
    let diffusion = match gas.d0_cm2_s {
        Some(_) => relaxation::diffusion_rate(&cond.cell, gas, cond)?,
        None => {
            log::info!(
                "gas `{}` has no d0_cm2_s; treating wall diffusion as zero",
                gas.name
            );
            0.0
        }
    };
    let gamma12 = diffusion + collision;

    // effective resonance: free splitting + linear pressure shift + clock shift
    let pressure_shift = gas.shift_coeff_hz_per_mbar.unwrap_or_else(|| {
        log::info!("gas `{}` has no shift_coeff_hz_per_mbar; assuming 0", gas.name);
        0.0
    }) * cond.pressure_mbar();
    let clock = zeeman::clock_shift(atom, cond.b_field_t)?;
    let nu12_eff = atom.nu12_free_hz + pressure_shift + clock;

    let m = pulse.subharmonic as f64;
    let default_center = match grid.domain {
        ScanDomain::PulseRep => nu12_eff / m - grid.frequency_offset_hz,
        ScanDomain::Hyperfine => nu12_eff - m * grid.frequency_offset_hz,
    };
    let center = grid.center_hz.unwrap_or(default_center);
    let n = grid.points;
    let xs: Vec<f64> = (0..n)
        .map(|i| center - grid.span_hz / 2.0 + grid.span_hz * i as f64 / (n - 1) as f64)
        .collect();
    Ok((xs, gamma12, nu12_eff, m))
}

fn eval_point(
    x: f64,
    pulse: &PulseTrainSpec,
    atom: &AtomSpec,
    grid: &ScanGrid,
    gamma12: f64,
    nu12_eff: f64,
    m: f64,
) -> Result<f64> {
    let nu_p_phys = match grid.domain {
        ScanDomain::PulseRep => x + grid.frequency_offset_hz,
        ScanDomain::Hyperfine => x / m + grid.frequency_offset_hz,
    };
    let detuning = nu12_eff - m * nu_p_phys;
    let point_pulse = PulseTrainSpec {
        rep_freq_hz: nu_p_phys,
        ..pulse.clone()
    };
    let rho = steady_state(&point_pulse, atom, gamma12, detuning)?;
    Ok(fluorescence(&rho, &point_pulse, atom))
}

fn assemble_scan(
    xs: Vec<f64>,
    mut signals: Vec<f64>,
    pulse: &PulseTrainSpec,
    gas: &BufferGasSpec,
    cond: &ExperimentConditions,
    grid: &ScanGrid,
    gamma12: f64,
    noise: Option<NoiseSpec>,
) -> Result<ScanResult> {
    let mut meta = BTreeMap::new();
    meta.insert("gas".into(), gas.name.clone());
    meta.insert("pressure_mbar".into(), format!("{}", cond.pressure_mbar()));
    meta.insert("temperature_k".into(), format!("{}", cond.temperature_k));
    meta.insert("b_field_ut".into(), format!("{}", cond.b_field_t * 1e6));
    meta.insert("gamma12_s".into(), format!("{gamma12}"));
    meta.insert("area1_rad".into(), format!("{}", pulse.area1_rad));
    meta.insert("area2_rad".into(), format!("{}", pulse.area2_rad));

    let mut sigma = None;
    let mut seed = None;
    if let Some(noise_spec) = noise {
        let (std, clamped) =
            crate::noise::add_seeded_noise(&mut signals, noise_spec.rel_sigma, noise_spec.seed);
        sigma = Some(std);
        seed = Some(noise_spec.seed);
        meta.insert("noise_rel_sigma".into(), format!("{}", noise_spec.rel_sigma));
        meta.insert("noise_clamped".into(), format!("{clamped}"));
    }

    let samples = xs
        .into_iter()
        .zip(signals)
        .map(|(x, y)| ScanSample {
            scan_freq_hz: x,
            signal: y,
            sigma,
        })
        .collect();
    ScanResult::new(samples, grid.domain, pulse.subharmonic, seed, meta)
}

/// Simulate a fluorescence spectrum over the grid. Points are independent
/// pure computations; with the `parallel` feature they are evaluated on the
/// rayon pool, and the assembled output is bit-identical to the sequential
/// path for any worker count.
pub fn scan_spectrum(
    pulse: &PulseTrainSpec,
    atom: &AtomSpec,
    gas: &BufferGasSpec,
    cond: &ExperimentConditions,
    grid: &ScanGrid,
    noise: Option<NoiseSpec>,
) -> Result<ScanResult> {
    let (xs, gamma12, nu12_eff, m) = scan_setup(pulse, atom, gas, cond, grid)?;

    #[cfg(feature = "parallel")]
    let signals: Result<Vec<f64>> = xs
        .par_iter()
        .map(|&x| eval_point(x, pulse, atom, grid, gamma12, nu12_eff, m))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let signals: Result<Vec<f64>> = xs
        .iter()
        .map(|&x| eval_point(x, pulse, atom, grid, gamma12, nu12_eff, m))
        .collect();

    assemble_scan(xs, signals?, pulse, gas, cond, grid, gamma12, noise)
}

/// Always-sequential evaluation of the same pipeline; reference path for
/// the determinism contract and the benchmark baseline.
pub fn scan_spectrum_sequential(
    pulse: &PulseTrainSpec,
    atom: &AtomSpec,
    gas: &BufferGasSpec,
    cond: &ExperimentConditions,
    grid: &ScanGrid,
    noise: Option<NoiseSpec>,
) -> Result<ScanResult> {
    let (xs, gamma12, nu12_eff, m) = scan_setup(pulse, atom, gas, cond, grid)?;
    let signals: Result<Vec<f64>> = xs
        .iter()
        .map(|&x| eval_point(x, pulse, atom, grid, gamma12, nu12_eff, m))
        .collect();
    assemble_scan(xs, signals?, pulse, gas, cond, grid, gamma12, noise)
}
