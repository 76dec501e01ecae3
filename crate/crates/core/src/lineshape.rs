//! The closed-form resonance model and a damped Gauss–Newton fitter.
//!
//! The model is a four-parameter Lorentzian,
//!
//! ```text
//! f(x) = offset + amplitude / (1 + (2(x − center)/fwhm)²)
//! ```
//!
//! with a signed amplitude so both peaks and dips fit with the same code.
//! On the hyperfine axis with fwhm = Γ₁₂/π this is exactly the
//! dark-resonance lineshape: half depth at 2πΔν/Γ₁₂ = ±1.

use crate::error::{Error, Result};
use crate::spectrum::ScanResult;
use nalgebra::{SMatrix, SVector};

type M4 = SMatrix<f64, 4, 4>;
type V4 = SVector<f64, 4>;

/// Lorentzian model parameters in the spectrum's frequency domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams {
    /// Signed height above the offset; negative for a dip.
    pub amplitude: f64,
    pub center_hz: f64,
    pub fwhm_hz: f64,
    /// Background level.
    pub offset: f64,
}

impl LorentzianParams {
    /// Validating constructor: positive width and a model that never
    /// predicts negative fluorescence.
    pub fn new(amplitude: f64, center_hz: f64, fwhm_hz: f64, offset: f64) -> Result<Self> {
        if !(fwhm_hz > 0.0) {
            return Err(Error::domain(format!(
                "fwhm_hz must be positive, got {fwhm_hz}"
            )));
        }
        if offset + amplitude.min(0.0) < -1e-12 * amplitude.abs().max(offset.abs()).max(1.0) {
            return Err(Error::domain(format!(
                "offset + min(0, amplitude) = {} predicts negative fluorescence",
                offset + amplitude.min(0.0)
            )));
        }
        Ok(LorentzianParams {
            amplitude,
            center_hz,
            fwhm_hz,
            offset,
        })
    }

    fn from_vector(v: &V4) -> Self {
        LorentzianParams {
            amplitude: v[0],
            center_hz: v[1],
            fwhm_hz: v[2].abs(),
            offset: v[3],
        }
    }

    fn to_vector(self) -> V4 {
        V4::new(self.amplitude, self.center_hz, self.fwhm_hz, self.offset)
    }
}

/// Model value at one frequency.
pub fn closed_form_signal(x_hz: f64, p: &LorentzianParams) -> f64 {
    let u = 2.0 * (x_hz - p.center_hz) / p.fwhm_hz;
    p.offset + p.amplitude / (1.0 + u * u)
}

/// Fit result: parameters, covariance (ordered amplitude, center, fwhm,
/// offset), fit-quality diagnostics and convergence state.
#[derive(Debug, Clone)]
pub struct LorentzianFit {
    pub params: LorentzianParams,
    pub covariance: M4,
    pub reduced_chi2: f64,
    pub r2: f64,
    pub n_iterations: usize,
    pub converged: bool,
    /// Skewness of the residuals; a symmetric model fitted to an asymmetric
    /// line shows up here.
    pub residual_skew: f64,
}

impl LorentzianFit {
    pub fn param_stderr(&self, index: usize) -> f64 {
        self.covariance[(index, index)].max(0.0).sqrt()
    }
}

/// Relative parameter change below which an accepted step counts as
/// converged (two consecutive times).
pub const FIT_PARAM_TOL: f64 = 1e-10;
/// Gradient-norm alternative convergence threshold.
pub const FIT_GRAD_TOL: f64 = 1e-12;
/// Maximum accepted Gauss–Newton steps.
pub const FIT_MAX_ITER: usize = 200;

/// Starting point read directly off the data: median of the outer 20% of
/// samples as offset, signed extremum as amplitude, half-excursion
/// crossings as width.
pub fn initial_guess(spec: &ScanResult) -> Result<LorentzianParams> {
    let n = spec.len();
    if n < 5 {
        return Err(Error::data(format!(
            "need at least 5 points for a guess, got {n}"
        )));
    }
    let xs: Vec<f64> = spec.freqs().collect();
    let ys: Vec<f64> = spec.signals().collect();

    // offset: median of the outer 20% (first and last 10% of the ordered scan)
    let wing = (n / 10).max(1);
    let mut outer: Vec<f64> = ys[..wing].iter().chain(&ys[n - wing..]).copied().collect();
    outer.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let offset = if outer.len() % 2 == 1 {
        outer[outer.len() / 2]
    } else {
        0.5 * (outer[outer.len() / 2 - 1] + outer[outer.len() / 2])
    };

    // signed extremum: sample farthest from the offset, earliest index on
    // ties; exact-value plateaus use the midpoint of the longest run.
    let mut ext_idx = 0usize;
    for (i, &y) in ys.iter().enumerate() {
        if (y - offset).abs() > (ys[ext_idx] - offset).abs() {
            ext_idx = i;
        }
    }
    let ext_val = ys[ext_idx];
    let mut best_run = (ext_idx, ext_idx);
    let mut run_start = None;
    for i in 0..=n {
        if i < n && ys[i] == ext_val {
            run_start.get_or_insert(i);
        } else if let Some(s) = run_start.take() {
            if i - s > best_run.1 - best_run.0 + 1 {
                best_run = (s, i - 1);
            }
        }
    }
    let center_idx = (best_run.0 + best_run.1) / 2;
    let center = xs[center_idx];
    let amplitude = ext_val - offset;

    // flat-spectrum guard: compare the excursion against the wing scatter
    let wing_mean = outer.iter().sum::<f64>() / outer.len() as f64;
    let wing_std = (outer.iter().map(|y| (y - wing_mean).powi(2)).sum::<f64>()
        / outer.len() as f64)
        .sqrt();
    if amplitude.abs() <= 3.0 * wing_std || amplitude == 0.0 {
        return Err(Error::NoResonanceDetected(format!(
            "signal excursion {} is within 3× the wing scatter {}",
            amplitude.abs(),
            wing_std
        )));
    }

    // width: half-excursion crossings, linearly interpolated outward from
    // the extremum
    let half = offset + amplitude / 2.0;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = center_idx;
        for i in range {
            let (a, b) = (ys[prev], ys[i]);
            let crossed = if amplitude > 0.0 {
                a >= half && b < half
            } else {
                a <= half && b > half
            };
            if crossed {
                let t = (half - a) / (b - a);
                return Some(xs[prev] + t * (xs[i] - xs[prev]));
            }
            prev = i;
        }
        None
    };
    let right = crossing(&mut ((center_idx + 1)..n));
    let left = crossing(&mut (0..center_idx).rev());
    let span = xs[n - 1] - xs[0];
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (center - l),
        (None, Some(r)) => 2.0 * (r - center),
        (None, None) => span / 4.0,
    };
    let fwhm = if fwhm > 0.0 { fwhm } else { span / 4.0 };

    Ok(LorentzianParams {
        amplitude,
        center_hz: center,
        fwhm_hz: fwhm,
        offset,
    })
}

fn model_and_jacobian(x: f64, p: &V4) -> (f64, V4) {
    let (amp, center, fwhm, offset) = (p[0], p[1], p[2], p[3]);
    let u = 2.0 * (x - center) / fwhm;
    let d = 1.0 + u * u;
    let f = offset + amp / d;
    let d2 = d * d;
    (
        f,
        V4::new(
            1.0 / d,
            4.0 * amp * u / (fwhm * d2),
            2.0 * amp * u * u / (fwhm * d2),
            1.0,
        ),
    )
}

/// Weighted least squares by damped Gauss–Newton with the analytic
/// Jacobian. The damping factor grows multiplicatively on step rejection
/// and shrinks on acceptance. Non-convergence is reported in the result,
/// not as an error.
pub fn fit(spec: &ScanResult, guess: Option<LorentzianParams>) -> Result<LorentzianFit> {
    let n = spec.len();
    if n < 5 {
        return Err(Error::data(format!(
            "need at least 5 points to fit, got {n}"
        )));
    }
    let xs: Vec<f64> = spec.freqs().collect();
    let ys: Vec<f64> = spec.signals().collect();
    let weights: Vec<f64> = spec
        .samples()
        .iter()
        .map(|s| match s.sigma {
            Some(sig) if sig > 0.0 => 1.0 / sig,
            _ => 1.0,
        })
        .collect();
    let weighted = spec.samples().iter().any(|s| s.sigma.unwrap_or(0.0) > 0.0);

    let start = match guess {
        Some(g) => g,
        None => initial_guess(spec)?,
    };
    let mut p = start.to_vector();

    let chi2_of = |p: &V4| -> f64 {
        xs.iter()
            .zip(&ys)
            .zip(&weights)
            .map(|((&x, &y), &w)| {
                let (f, _) = model_and_jacobian(x, p);
                (w * (y - f)).powi(2)
            })
            .sum()
    };

    let mut chi2 = chi2_of(&p);
    let mut lambda = 1e-3;
    let mut consecutive_ok = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < FIT_MAX_ITER {
        // normal equations J^T W J δ = J^T W r at the current point
        let mut normal = M4::zeros();
        let mut grad = V4::zeros();
        for (&x, (&y, &w)) in xs.iter().zip(ys.iter().zip(&weights)) {
            let (f, j) = model_and_jacobian(x, &p);
            let wj = j * w;
            normal += wj * wj.transpose();
            grad += wj * (w * (y - f));
        }

        // damped step; inflate λ until the step is solvable and reduces χ²
        let mut accepted = false;
        for _ in 0..60 {
            let mut damped = normal;
            for k in 0..4 {
                damped[(k, k)] += lambda * normal[(k, k)].max(1e-300);
            }
            if let Some(step) = damped.lu().solve(&grad) {
                let candidate = p + step;
                let candidate_chi2 = chi2_of(&candidate);
                if candidate_chi2.is_finite() && candidate_chi2 <= chi2 {
                    // convergence bookkeeping uses the accepted step
                    let rel_change = (0..4)
                        .map(|k| (step[k] / (p[k].abs().max(1e-300))).abs())
                        .fold(0.0f64, f64::max);
                    p = candidate;
                    chi2 = candidate_chi2;
                    lambda = (lambda / 3.0).max(1e-14);
                    accepted = true;
                    iterations += 1;
                    if rel_change < FIT_PARAM_TOL || grad.norm() < FIT_GRAD_TOL {
                        consecutive_ok += 1;
                    } else {
                        consecutive_ok = 0;
                    }
                    break;
                }
            }
            lambda *= 5.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !accepted {
            // no descent direction left; either converged in practice or stuck
            break;
        }
        if consecutive_ok >= 2 {
            converged = true;
            break;
        }
    }

    // covariance from the undamped normal matrix at the solution
    let mut normal = M4::zeros();
    for (&x, &w) in xs.iter().zip(&weights) {
        let (_, j) = model_and_jacobian(x, &p);
        let wj = j * w;
        normal += wj * wj.transpose();
    }
    let dof = (n as f64 - 4.0).max(1.0);
    let reduced_chi2 = chi2 / dof;
    let covariance = normal.try_inverse().ok_or_else(|| {
        Error::DegenerateFit("singular normal matrix at the solution".into())
    })?;
    let covariance = if weighted {
        covariance
    } else {
        covariance * reduced_chi2
    };

    // unweighted diagnostics
    let params = LorentzianParams::from_vector(&p);
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| y - closed_form_signal(x, &params))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    let mean_r = residuals.iter().sum::<f64>() / n as f64;
    let m2 = residuals.iter().map(|r| (r - mean_r).powi(2)).sum::<f64>() / n as f64;
    let m3 = residuals.iter().map(|r| (r - mean_r).powi(3)).sum::<f64>() / n as f64;
    let residual_skew = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };

    Ok(LorentzianFit {
        params,
        covariance,
        reduced_chi2,
        r2,
        n_iterations: iterations,
        converged,
        residual_skew,
    })
}
