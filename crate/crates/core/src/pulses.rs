//! Mode-locked pulse-train diagnostics: envelope shapes, transform-limited
//! spectral width, excess bandwidth against a measured width, and the
//! background-free SHG intensity autocorrelation.
//!
//! The dynamics engine consumes only the pulse areas and the repetition
//! frequency; the shape enters these diagnostics alone.

use crate::error::{Error, Result};
use std::f64::consts::{LN_2, PI};

/// 2·arcsech(1/√2) = 2·ln(1+√2): sech²(SECH_FWHM_ARG·t/τ) has intensity
/// FWHM exactly τ.
pub const SECH_FWHM_ARG: f64 = 1.762_747_174_039_086;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    Gaussian,
    Sech,
}

impl PulseShape {
    /// Intensity FWHM × spectral intensity FWHM at the transform limit.
    pub fn time_bandwidth_product(self) -> f64 {
        match self {
            // 2 ln2 / π
            PulseShape::Gaussian => 2.0 * LN_2 / PI,
            // (2 arcsech(1/√2))² / π²
            PulseShape::Sech => SECH_FWHM_ARG * SECH_FWHM_ARG / (PI * PI),
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(PulseShape::Gaussian),
            "sech" => Ok(PulseShape::Sech),
            other => Err(Error::config(format!(
                "unknown pulse shape `{other}` (expected gaussian or sech)"
            ))),
        }
    }
}

/// The pulse train driving both Λ arms.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrainSpec {
    /// Repetition frequency ν_p (Hz).
    pub rep_freq_hz: f64,
    /// Intensity FWHM τ of one pulse (s).
    pub duration_fwhm_s: f64,
    pub shape: PulseShape,
    /// Pulse area on the |1⟩↔|e⟩ arm (rad).
    pub area1_rad: f64,
    /// Pulse area on the |2⟩↔|e⟩ arm (rad).
    pub area2_rad: f64,
    /// Subharmonic order m: resonance at ν₁₂ = m·ν_p.
    pub subharmonic: u32,
    /// Measured spectral width, if available (Hz).
    pub spectral_fwhm_hz: Option<f64>,
}

impl PulseTrainSpec {
    pub fn new(
        rep_freq_hz: f64,
        duration_fwhm_s: f64,
        shape: PulseShape,
        area1_rad: f64,
        area2_rad: f64,
        subharmonic: u32,
    ) -> Result<Self> {
        if !(rep_freq_hz > 0.0) {
            return Err(Error::domain(format!(
                "rep_freq_hz must be positive, got {rep_freq_hz}"
            )));
        }
        if !(duration_fwhm_s > 0.0) {
            return Err(Error::domain(format!(
                "duration_fwhm_s must be positive, got {duration_fwhm_s}"
            )));
        }
        if duration_fwhm_s >= 1.0 / rep_freq_hz {
            return Err(Error::domain(format!(
                "pulse duration {duration_fwhm_s} s is not shorter than the period {} s",
                1.0 / rep_freq_hz
            )));
        }
        if subharmonic < 1 {
            return Err(Error::domain("subharmonic order m must be ≥ 1"));
        }
        for (label, a) in [("area1_rad", area1_rad), ("area2_rad", area2_rad)] {
            if !(0.0..=PI).contains(&a) {
                return Err(Error::domain(format!(
                    "{label} must lie in [0, π], got {a}"
                )));
            }
        }
        Ok(PulseTrainSpec {
            rep_freq_hz,
            duration_fwhm_s,
            shape,
            area1_rad,
            area2_rad,
            subharmonic,
            spectral_fwhm_hz: None,
        })
    }

    pub fn with_measured_spectral_fwhm(mut self, fwhm_hz: f64) -> Self {
        self.spectral_fwhm_hz = Some(fwhm_hz);
        self
    }

    pub fn period_s(&self) -> f64 {
        1.0 / self.rep_freq_hz
    }
}

/// Unit-peak intensity envelope of one pulse; FWHM equals the spec duration
/// exactly for both shapes.
pub fn intensity_envelope(spec: &PulseTrainSpec, t_s: f64) -> f64 {
    let u = t_s / spec.duration_fwhm_s;
    match spec.shape {
        PulseShape::Gaussian => (-4.0 * LN_2 * u * u).exp(),
        PulseShape::Sech => {
            let s = 1.0 / (SECH_FWHM_ARG * u).cosh();
            s * s
        }
    }
}

/// Transform-limited spectral intensity FWHM (Hz).
pub fn fourier_limit_fwhm(spec: &PulseTrainSpec) -> f64 {
    spec.shape.time_bandwidth_product() / spec.duration_fwhm_s
}

/// Measured width minus the transform limit.
#[derive(Debug, Clone, Copy)]
pub struct ExcessBandwidth {
    pub excess_hz: f64,
    /// Set when the measured width falls below the transform limit.
    pub unphysical: bool,
}

pub fn excess_bandwidth(spec: &PulseTrainSpec) -> Result<ExcessBandwidth> {
    let measured = spec.spectral_fwhm_hz.ok_or(Error::NoMeasuredWidth)?;
    let excess = measured - fourier_limit_fwhm(spec);
    if excess < 0.0 {
        log::warn!(
            "measured spectral width {measured} Hz is below the transform limit; \
             flagging as unphysical input"
        );
    }
    Ok(ExcessBandwidth {
        excess_hz: excess,
        unphysical: excess < 0.0,
    })
}

/// Background-free intensity autocorrelation ∫I(t)I(t−d)dt, normalized to 1
/// at zero delay. Even in the delay by construction.
pub fn autocorrelation(spec: &PulseTrainSpec, delay_s: f64) -> f64 {
    let d = delay_s.abs();
    overlap_integral(spec, d) / overlap_integral(spec, 0.0)
}

/// Simpson quadrature of I(t)I(t−d) over a window that covers both
/// envelopes to far below f64 precision.
fn overlap_integral(spec: &PulseTrainSpec, d: f64) -> f64 {
    let tau = spec.duration_fwhm_s;
    let half_width = 12.0 * tau + 0.5 * d;
    let center = 0.5 * d;
    let n = 4096; // even
    let h = 2.0 * half_width / n as f64;
    let f = |t: f64| intensity_envelope(spec, t) * intensity_envelope(spec, t - d);
    let mut sum = f(center - half_width) + f(center + half_width);
    for k in 1..n {
        let t = center - half_width + k as f64 * h;
        sum += f(t) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rustfft::FftPlanner;

    fn spec(shape: PulseShape) -> PulseTrainSpec {
        PulseTrainSpec::new(525.7e6, 15e-12, shape, 0.1, 0.1, 13).unwrap()
    }

    /// Bisection for the positive x where f(x) = level, given f decreasing.
    fn falling_crossing(f: impl Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn envelope_peak_and_half_points() {
        for shape in [PulseShape::Gaussian, PulseShape::Sech] {
            let s = spec(shape);
            assert_eq!(intensity_envelope(&s, 0.0), 1.0);
            assert_relative_eq!(
                intensity_envelope(&s, 7.5e-12),
                0.5,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                intensity_envelope(&s, -7.5e-12),
                0.5,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn envelope_fwhm_recovered_by_bisection() {
        for shape in [PulseShape::Gaussian, PulseShape::Sech] {
            let s = spec(shape);
            let half_t = falling_crossing(|t| intensity_envelope(&s, t), 0.5, 0.0, 60e-12);
            assert_relative_eq!(2.0 * half_t, 15e-12, max_relative = 1e-6);
        }
    }

    /// FFT oracle: sample the amplitude envelope (√intensity), transform,
    /// and read the spectral intensity FWHM off the power spectrum.
    fn fft_spectral_fwhm(s: &PulseTrainSpec) -> f64 {
        let n = 1 << 20;
        let dt = s.duration_fwhm_s / 64.0;
        let mut buf: Vec<Complex64> = (0..n)
            .map(|k| {
                // center the pulse so the window holds the whole envelope
                let t = (k as f64 - n as f64 / 2.0) * dt;
                Complex64::new(intensity_envelope(s, t).sqrt(), 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let power: Vec<f64> = buf.iter().map(|c| c.norm_sqr()).collect();
        // peak sits at bin 0 (time-domain centering only adds phase)
        let peak = power[0];
        let mut k = 0;
        while power[k + 1] > peak / 2.0 {
            k += 1;
        }
        // linear interpolation of the half crossing between bins k and k+1
        let frac = (power[k] - peak / 2.0) / (power[k] - power[k + 1]);
        let df = 1.0 / (n as f64 * dt);
        2.0 * (k as f64 + frac) * df
    }

    #[test]
    fn fourier_limit_gaussian_15ps() {
        let s = spec(PulseShape::Gaussian);
        let limit = fourier_limit_fwhm(&s);
        assert!((limit - 29.4e9).abs() / 29.4e9 < 0.01, "got {limit}");
        let oracle = fft_spectral_fwhm(&s);
        assert_relative_eq!(limit, oracle, max_relative = 1e-3);
    }

    #[test]
    fn fourier_limit_sech_15ps() {
        let s = spec(PulseShape::Sech);
        let limit = fourier_limit_fwhm(&s);
        assert!((limit - 21.0e9).abs() / 21.0e9 < 0.01, "got {limit}");
        let oracle = fft_spectral_fwhm(&s);
        assert_relative_eq!(limit, oracle, max_relative = 1e-3);
    }

    #[test]
    fn time_bandwidth_product_shape_constant() {
        for shape in [PulseShape::Gaussian, PulseShape::Sech] {
            let tbp = shape.time_bandwidth_product();
            for exp in 0..=3 {
                let tau = 1e-13 * 10f64.powi(exp);
                let s = PulseTrainSpec::new(1e6, tau, shape, 0.1, 0.1, 13).unwrap();
                assert_relative_eq!(
                    fourier_limit_fwhm(&s) * tau,
                    tbp,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn excess_bandwidth_cases() {
        let s = spec(PulseShape::Gaussian);
        assert!(matches!(
            excess_bandwidth(&s),
            Err(Error::NoMeasuredWidth)
        ));

        let limit = fourier_limit_fwhm(&s);
        let exact = s.clone().with_measured_spectral_fwhm(limit);
        let e = excess_bandwidth(&exact).unwrap();
        assert_eq!(e.excess_hz, 0.0);
        assert!(!e.unphysical);

        let wide = s.clone().with_measured_spectral_fwhm(100e9);
        let e = excess_bandwidth(&wide).unwrap();
        assert!((e.excess_hz - 70.6e9).abs() / 70.6e9 < 0.01, "got {}", e.excess_hz);
        assert!(!e.unphysical);

        let narrow = s.with_measured_spectral_fwhm(10e9);
        assert!(excess_bandwidth(&narrow).unwrap().unphysical);
    }

    #[test]
    fn autocorrelation_normalization_and_evenness() {
        for shape in [PulseShape::Gaussian, PulseShape::Sech] {
            let s = spec(shape);
            assert_eq!(autocorrelation(&s, 0.0), 1.0);
            for d in [1e-12, 7.3e-12, 21e-12] {
                let plus = autocorrelation(&s, d);
                let minus = autocorrelation(&s, -d);
                assert_eq!(plus, minus);
                assert!(plus < 1.0);
            }
        }
    }

    #[test]
    fn gaussian_autocorrelation_fwhm_is_sqrt2_tau() {
        // analytic Gaussian convolution identity
        let s = spec(PulseShape::Gaussian);
        let half = falling_crossing(|d| autocorrelation(&s, d), 0.5, 0.0, 60e-12);
        assert_relative_eq!(
            2.0 * half,
            std::f64::consts::SQRT_2 * 15e-12,
            max_relative = 1e-4
        );
    }

    #[test]
    fn sech_autocorrelation_fwhm() {
        // independent oracle: the closed-form sech² autocorrelation
        // g(x) = 3(x·cosh x − sinh x)/sinh³x with x = SECH_FWHM_ARG·d/τ;
        // find its half point by bisection and compare the implementation.
        let tau = 15e-12;
        let analytic = |d: f64| {
            let x = SECH_FWHM_ARG * d / tau;
            if x.abs() < 1e-8 {
                1.0
            } else {
                3.0 * (x * x.cosh() - x.sinh()) / x.sinh().powi(3)
            }
        };
        let half_oracle = falling_crossing(analytic, 0.5, 0.0, 100e-12);
        let s = spec(PulseShape::Sech);
        let half_impl = falling_crossing(|d| autocorrelation(&s, d), 0.5, 0.0, 100e-12);
        assert_relative_eq!(half_impl, half_oracle, max_relative = 1e-6);
        assert_relative_eq!(2.0 * half_impl / tau, 1.543, max_relative = 1e-3);
    }

    #[test]
    fn spec_invariants_enforced() {
        assert!(PulseTrainSpec::new(0.0, 15e-12, PulseShape::Gaussian, 0.1, 0.1, 13).is_err());
        assert!(PulseTrainSpec::new(525.7e6, 0.0, PulseShape::Gaussian, 0.1, 0.1, 13).is_err());
        // pulse longer than the period
        assert!(PulseTrainSpec::new(525.7e6, 3e-9, PulseShape::Gaussian, 0.1, 0.1, 13).is_err());
        assert!(PulseTrainSpec::new(525.7e6, 15e-12, PulseShape::Gaussian, -0.1, 0.1, 13).is_err());
        assert!(PulseTrainSpec::new(525.7e6, 15e-12, PulseShape::Gaussian, 0.1, 4.0, 13).is_err());
        assert!(PulseTrainSpec::new(525.7e6, 15e-12, PulseShape::Gaussian, 0.1, 0.1, 0).is_err());
    }
}
