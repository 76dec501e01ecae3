//! Batch harness wiring the simulate → fit → infer pipeline.
//!
//! Every subcommand reads its inputs (config and/or spectrum CSV), writes
//! one primary artifact to `--out`, and exits 0 on success. Nonzero exit
//! codes distinguish failure classes: 2 config, 3 data/io, 4 fit
//! non-convergence, 1 anything else. Log verbosity comes from `RUST_LOG`.

use clap::{Args, Parser, Subcommand};
use darkres::config::{read_config, RunConfig};
use darkres::dynamics::{scan_spectrum, NoiseSpec};
use darkres::inference;
use darkres::io::{fit_report, inference_report, read_csv, write_csv, Report};
use darkres::lineshape::{self, closed_form_signal, LorentzianFit, LorentzianParams};
use darkres::pulses;
use darkres::relaxation;
use darkres::spectrum::{ScanDomain, ScanResult, ScanSample};
use darkres::units::pa_to_mbar;
use darkres::{Error, Result};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "darkres",
    about = "Pulsed-laser dark-resonance spectroscopy: simulate, fit, infer",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Run configuration (TOML with unit-suffixed keys).
    #[arg(long)]
    config: PathBuf,
    /// Override config keys: section.key=value (repeatable; flag > config).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self, extra: &[String]) -> Result<RunConfig> {
        let mut all = self.overrides.clone();
        all.extend_from_slice(extra);
        read_config(&self.config, &all)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a fluorescence scan and write it as CSV.
    SimulateScan {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Noise seed (overrides [noise] seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of scan points (overrides [scan] points).
        #[arg(long)]
        points: Option<usize>,
        /// Scan span in Hz (overrides [scan] span_hz).
        #[arg(long)]
        span_hz: Option<f64>,
        /// Scan centre in Hz (overrides the automatic resonance centre).
        #[arg(long, allow_negative_numbers = true)]
        center_hz: Option<f64>,
        /// Scan axis: pulse_rep or hyperfine.
        #[arg(long)]
        domain: Option<String>,
    },
    /// Evaluate the closed-form resonance model on a grid and write CSV.
    ClosedForm {
        #[arg(long, allow_negative_numbers = true)]
        amplitude: f64,
        #[arg(long, allow_negative_numbers = true)]
        center_hz: f64,
        #[arg(long)]
        fwhm_hz: f64,
        #[arg(long, allow_negative_numbers = true)]
        offset: f64,
        #[arg(long)]
        span_hz: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, default_value = "hyperfine")]
        domain: String,
        /// Subharmonic order recorded in the file metadata.
        #[arg(long, default_value_t = 13)]
        m: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a Lorentzian to a spectrum CSV and write a report.
    Fit {
        /// Input spectrum CSV.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a spectrum and extract the decoherence cross section σ₂.
    InferSigma2 {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Subtract the wall-diffusion term before inverting (needs gas d0).
        #[arg(long)]
        subtract_diffusion: bool,
    },
    /// Fit a spectrum and extract the pressure-shift coefficient.
    InferShift {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a spectrum and recover the free-atom hyperfine splitting.
    InferHfs {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Known shift coefficient (overrides [inference]).
        #[arg(long, allow_negative_numbers = true)]
        shift_coeff_hz_per_mbar: Option<f64>,
    },
    /// Report pulse diagnostics: transform limit, bandwidth, autocorrelation.
    PulseInfo {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report the linewidth-optimal buffer-gas pressure.
    OptimalPressure {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a spectrum (optionally with a fitted curve) to SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fit a Lorentzian and overlay it.
        #[arg(long)]
        fit: bool,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Data(_) | Error::Io(_) => 3,
        Error::DegenerateFit(_) | Error::NoResonanceDetected(_) => 4,
        _ => 1,
    }
}

fn fit_spectrum(spec: &ScanResult) -> Result<LorentzianFit> {
    let fit = lineshape::fit(spec, None)?;
    if !fit.converged {
        return Err(Error::DegenerateFit(format!(
            "fit did not converge after {} iterations",
            fit.n_iterations
        )));
    }
    Ok(fit)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateScan {
            config,
            out,
            seed,
            points,
            span_hz,
            center_hz,
            domain,
        } => {
            let mut extra = Vec::new();
            if let Some(s) = seed {
                extra.push(format!("noise.seed={s}"));
            }
            if let Some(p) = points {
                extra.push(format!("scan.points={p}"));
            }
            if let Some(s) = span_hz {
                extra.push(format!("scan.span_hz={s}"));
            }
            if let Some(c) = center_hz {
                extra.push(format!("scan.center_hz={c}"));
            }
            if let Some(d) = domain {
                extra.push(format!("scan.domain=\"{d}\""));
            }
            let cfg = config.load(&extra)?;
            let noise = cfg.noise.map(|n| NoiseSpec {
                rel_sigma: n.rel_sigma,
                seed: n.seed,
            });
            let scan = scan_spectrum(
                &cfg.pulse,
                &cfg.atom,
                &cfg.gas,
                &cfg.conditions,
                &cfg.scan,
                noise,
            )?;
            write_csv(&scan, &out)?;
            log::info!("wrote {} points to {}", scan.len(), out.display());
            Ok(())
        }

        Command::ClosedForm {
            amplitude,
            center_hz,
            fwhm_hz,
            offset,
            span_hz,
            points,
            domain,
            m,
            out,
        } => {
            if points < 3 {
                return Err(Error::config(format!("points must be ≥ 3, got {points}")));
            }
            if !(span_hz > 0.0) {
                return Err(Error::config(format!(
                    "span_hz must be positive, got {span_hz}"
                )));
            }
            let params = LorentzianParams::new(amplitude, center_hz, fwhm_hz, offset)?;
            let domain = ScanDomain::parse(&domain)?;
            let samples: Vec<ScanSample> = (0..points)
                .map(|i| {
                    let x = center_hz - span_hz / 2.0
                        + span_hz * i as f64 / (points - 1) as f64;
                    ScanSample {
                        scan_freq_hz: x,
                        signal: closed_form_signal(x, &params).max(0.0),
                        sigma: None,
                    }
                })
                .collect();
            let spec = ScanResult::new(samples, domain, m, None, BTreeMap::new())?;
            write_csv(&spec, &out)?;
            Ok(())
        }

        Command::Fit { input, out } => {
            let spec = read_csv(&input)?;
            let fit = fit_spectrum(&spec)?;
            fit_report(&fit, spec.domain, spec.subharmonic).write(&out)?;
            Ok(())
        }

        Command::InferSigma2 {
            config,
            input,
            out,
            subtract_diffusion,
        } => {
            let cfg = config.load(&[])?;
            let spec = read_csv(&input)?;
            let fit = fit_spectrum(&spec)?;
            let mut settings = cfg.inference;
            settings.subtract_diffusion |= subtract_diffusion;
            let inf = inference::extract_sigma2(
                &fit,
                spec.domain,
                spec.subharmonic,
                &cfg.conditions,
                &cfg.atom,
                &cfg.gas,
                &cfg.conditions.cell,
                &settings,
            )?;
            inference_report(&inf).write(&out)?;
            Ok(())
        }

        Command::InferShift { config, input, out } => {
            let cfg = config.load(&[])?;
            let spec = read_csv(&input)?;
            let fit = fit_spectrum(&spec)?;
            let inf = inference::extract_pressure_shift(
                &fit,
                spec.domain,
                spec.subharmonic,
                &cfg.conditions,
                &cfg.atom,
                &cfg.inference,
            )?;
            inference_report(&inf).write(&out)?;
            Ok(())
        }

        Command::InferHfs {
            config,
            input,
            out,
            shift_coeff_hz_per_mbar,
        } => {
            let cfg = config.load(&[])?;
            let spec = read_csv(&input)?;
            let fit = fit_spectrum(&spec)?;
            let known = shift_coeff_hz_per_mbar
                .or(cfg.known_shift_coeff_hz_per_mbar)
                .or(cfg.gas.shift_coeff_hz_per_mbar)
                .ok_or_else(|| {
                    Error::config(
                        "no known shift coefficient: give --shift-coeff-hz-per-mbar or \
                         [inference] known_shift_coeff_hz_per_mbar",
                    )
                })?;
            let inf = inference::recover_hyperfine(
                &fit,
                spec.domain,
                spec.subharmonic,
                &cfg.conditions,
                &cfg.atom,
                known,
                &cfg.inference,
            )?;
            inference_report(&inf).write(&out)?;
            Ok(())
        }

        Command::PulseInfo { config, out } => {
            let cfg = config.load(&[])?;
            let pulse = &cfg.pulse;
            let mut r = Report::new();
            r.push("shape", format!("{:?}", pulse.shape).to_lowercase());
            r.push_float("rep_freq_hz", pulse.rep_freq_hz);
            r.push_float("duration_fwhm_s", pulse.duration_fwhm_s);
            r.push_float("period_s", pulse.period_s());
            r.push("m", pulse.subharmonic);
            r.push_float("fourier_limit_fwhm_hz", pulses::fourier_limit_fwhm(pulse));
            r.push_float(
                "time_bandwidth_product",
                pulse.shape.time_bandwidth_product(),
            );
            // autocorrelation FWHM by bisection on the even, decreasing lobe
            let mut lo = 0.0f64;
            let mut hi = 10.0 * pulse.duration_fwhm_s;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if pulses::autocorrelation(pulse, mid) > 0.5 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            r.push_float("autocorrelation_fwhm_s", lo + hi);
            if pulse.spectral_fwhm_hz.is_some() {
                let excess = pulses::excess_bandwidth(pulse)?;
                r.push_float("measured_spectral_fwhm_hz", pulse.spectral_fwhm_hz.unwrap());
                r.push_float("excess_bandwidth_hz", excess.excess_hz);
                r.push("excess_unphysical", excess.unphysical);
            }
            r.write(&out)?;
            Ok(())
        }

        Command::OptimalPressure { config, out } => {
            let cfg = config.load(&[])?;
            let opt = relaxation::optimal_pressure(
                &cfg.conditions.cell,
                &cfg.gas,
                &cfg.atom,
                cfg.conditions.temperature_k,
            )?;
            let mut r = Report::new();
            r.push("gas", &cfg.gas.name);
            r.push_float("temperature_k", cfg.conditions.temperature_k);
            r.push_float("optimal_pressure_mbar", pa_to_mbar(opt.pressure_pa));
            r.push_float("gamma12_s", opt.breakdown.total);
            r.push_float("diffusion_rate_s", opt.breakdown.diffusion_rate);
            r.push_float("collision_rate_s", opt.breakdown.collision_rate);
            r.push_float("fwhm_hf_hz", opt.breakdown.fwhm_hf_hz);
            r.push_float(
                "fwhm_scan_hz",
                opt.breakdown.fwhm_scan_hz(cfg.pulse.subharmonic),
            );
            r.write(&out)?;
            Ok(())
        }

        Command::Plot { input, out, fit } => {
            let spec = read_csv(&input)?;
            let fitted = if fit { Some(fit_spectrum(&spec)?) } else { None };
            darkres::plot::write_plot(&spec, fitted.as_ref(), &out)?;
            Ok(())
        }
    }
}
