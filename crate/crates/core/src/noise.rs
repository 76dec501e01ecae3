//! Deterministic noise injection. Each point draws from its own ChaCha8
//! stream keyed by (seed, point index), so the result is independent of
//! evaluation order and worker count.

use crate::error::{Error, Result};
use crate::spectrum::{ScanResult, ScanSample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Add Gaussian noise with std = `rel_sigma` × (max − min of the signals),
/// clamping at zero. Returns (std used, number of clamped points).
pub(crate) fn add_seeded_noise(signals: &mut [f64], rel_sigma: f64, seed: u64) -> (f64, usize) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &y in signals.iter() {
        lo = lo.min(y);
        hi = hi.max(y);
    }
    let std = rel_sigma * (hi - lo);
    if std == 0.0 {
        return (0.0, 0);
    }
    let mut clamped = 0usize;
    for (i, y) in signals.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let z: f64 = StandardNormal.sample(&mut rng);
        *y += std * z;
        if *y < 0.0 {
            *y = 0.0;
            clamped += 1;
        }
    }
    (std, clamped)
}

/// Noise-injected copy of a spectrum. The applied std is recorded in the
/// sigma column and the clamp count in the metadata.
pub fn inject_noise(spec: &ScanResult, rel_sigma: f64, seed: u64) -> Result<ScanResult> {
    if rel_sigma < 0.0 {
        return Err(Error::domain(format!(
            "rel_sigma must be ≥ 0, got {rel_sigma}"
        )));
    }
    let mut signals: Vec<f64> = spec.signals().collect();
    let (std, clamped) = add_seeded_noise(&mut signals, rel_sigma, seed);
    if rel_sigma == 0.0 {
        return Ok(spec.clone());
    }
    let samples: Vec<ScanSample> = spec
        .freqs()
        .zip(signals)
        .map(|(x, y)| ScanSample {
            scan_freq_hz: x,
            signal: y,
            sigma: Some(std),
        })
        .collect();
    let mut meta = spec.meta.clone();
    meta.insert("noise_rel_sigma".into(), format!("{rel_sigma}"));
    meta.insert("noise_clamped".into(), format!("{clamped}"));
    ScanResult::new(samples, spec.domain, spec.subharmonic, Some(seed), meta)
}
