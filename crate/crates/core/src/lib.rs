//! Forward simulator and inverse-inference toolkit for pulsed-laser
//! dark-resonance (coherent-population-trapping) spectroscopy of alkali
//! atoms in buffer gas.
//!
//! The crate models a three-level Λ-system driven stroboscopically by a
//! mode-locked pulse train, generates synthetic fluorescence spectra versus
//! pulse repetition frequency, fits Lorentzian lineshapes, and converts the
//! fitted parameters into physical quantities: the buffer-gas decoherence
//! cross section, the pressure shift of the 0–0 hyperfine line, and the
//! free-atom hyperfine splitting as a frequency-reference cross-check.
//!
//! Module map:
//! - [`constants`], [`units`], [`kinetics`], [`species`]: shared records
//!   and conversions (SI inside, mbar/Torr/μT/°C at the boundary only).
//! - [`relaxation`]: wall-diffusion + collisional decoherence rate Γ₁₂ and
//!   the optimal-pressure analysis.
//! - [`zeeman`]: Breit–Rabi sublevel structure, clock shift, isolation of
//!   the 0–0 line.
//! - [`pulses`]: pulse-train diagnostics (transform limit, autocorrelation).
//! - [`dynamics`]: the stroboscopic Λ-system engine and spectrum scans.
//! - [`lineshape`]: the closed-form resonance model and the damped
//!   Gauss–Newton fitter.
//! - [`inference`]: fitted parameters → physical results with uncertainties.
//! - [`noise`], [`spectrum`], [`io`], [`config`], [`plot`]: deterministic
//!   noise injection, scan containers, CSV/report/SVG emission, and strict
//!   run configuration.
//!
//! Scans evaluate their points on the rayon pool when the default
//! `parallel` feature is enabled; `scan_spectrum_sequential` is the
//! always-available fallback, and both produce bit-identical output.

pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod inference;
pub mod io;
pub mod kinetics;
pub mod lineshape;
pub mod noise;
pub mod plot;
pub mod pulses;
pub mod relaxation;
pub mod spectrum;
pub mod species;
pub mod units;
pub mod zeeman;

pub use error::{Error, Result};
