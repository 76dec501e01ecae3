//! Scan containers: ordered (frequency, signal) samples with the metadata
//! needed to interpret and reproduce them.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Which frequency axis the samples are recorded on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanDomain {
    /// Pulse repetition frequency ν_p.
    PulseRep,
    /// Hyperfine-domain coordinate m·ν_p.
    Hyperfine,
}

impl ScanDomain {
    pub fn tag(self) -> &'static str {
        match self {
            ScanDomain::PulseRep => "pulse_rep",
            ScanDomain::Hyperfine => "hyperfine",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "pulse_rep" => Ok(ScanDomain::PulseRep),
            "hyperfine" => Ok(ScanDomain::Hyperfine),
            other => Err(Error::config(format!(
                "unknown scan domain `{other}` (expected pulse_rep or hyperfine)"
            ))),
        }
    }
}

/// One scan point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample {
    pub scan_freq_hz: f64,
    pub signal: f64,
    /// Per-point noise scale, when known.
    pub sigma: Option<f64>,
}

/// An ordered spectrum plus the metadata that travels with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    samples: Vec<ScanSample>,
    pub domain: ScanDomain,
    /// Subharmonic order m of the resonance the scan targets.
    pub subharmonic: u32,
    /// Noise seed, when noise was injected.
    pub seed: Option<u64>,
    /// Free-form key=value metadata (conditions echo, provenance).
    pub meta: BTreeMap<String, String>,
}

impl ScanResult {
    /// Validates ordering, non-negative signals and all-or-none sigmas.
    pub fn new(
        samples: Vec<ScanSample>,
        domain: ScanDomain,
        subharmonic: u32,
        seed: Option<u64>,
        meta: BTreeMap<String, String>,
    ) -> Result<Self> {
        if subharmonic < 1 {
            return Err(Error::data("subharmonic order m must be ≥ 1"));
        }
        let with_sigma = samples.iter().filter(|s| s.sigma.is_some()).count();
        if with_sigma != 0 && with_sigma != samples.len() {
            return Err(Error::data(
                "sigma column must be present for every sample or none",
            ));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.scan_freq_hz.is_finite() || !s.signal.is_finite() {
                return Err(Error::data(format!("row {}: non-finite value", i + 1)));
            }
            if s.signal < 0.0 {
                return Err(Error::data(format!(
                    "row {}: signal must be ≥ 0, got {}",
                    i + 1,
                    s.signal
                )));
            }
            if let Some(sig) = s.sigma {
                if !(sig >= 0.0) {
                    return Err(Error::data(format!(
                        "row {}: sigma must be ≥ 0, got {sig}",
                        i + 1
                    )));
                }
            }
            if i > 0 && s.scan_freq_hz <= samples[i - 1].scan_freq_hz {
                return Err(Error::data(format!(
                    "row {}: scan_freq_hz must be strictly increasing",
                    i + 1
                )));
            }
        }
        Ok(ScanResult {
            samples,
            domain,
            subharmonic,
            seed,
            meta,
        })
    }

    pub fn samples(&self) -> &[ScanSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn freqs(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.scan_freq_hz)
    }

    pub fn signals(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.signal)
    }

    /// max − min of the signal column.
    pub fn excursion(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.samples {
            lo = lo.min(s.signal);
            hi = hi.max(s.signal);
        }
        if self.samples.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }

    /// Re-label the frequency axis between ν_p and m·ν_p.
    pub fn to_domain(&self, target: ScanDomain) -> ScanResult {
        if target == self.domain {
            return self.clone();
        }
        let m = self.subharmonic as f64;
        let factor = match target {
            ScanDomain::Hyperfine => m,
            ScanDomain::PulseRep => 1.0 / m,
        };
        let samples = self
            .samples
            .iter()
            .map(|s| ScanSample {
                scan_freq_hz: s.scan_freq_hz * factor,
                ..*s
            })
            .collect();
        ScanResult {
            samples,
            domain: target,
            subharmonic: self.subharmonic,
            seed: self.seed,
            meta: self.meta.clone(),
        }
    }
}
