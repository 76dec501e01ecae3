//! Spectrum CSV schema and the structured key-value report format.
//!
//! A spectrum file is a comma-separated table with a header row and leading
//! `#` comment lines carrying `key=value` metadata (at least `domain` and
//! `m`; `seed` when noise was injected). Floats render with 17 significant
//! digits so `parse(emit(x)) == x` exactly.

use crate::error::{Error, Result};
use crate::inference::InferenceReport;
use crate::lineshape::LorentzianFit;
use crate::spectrum::{ScanDomain, ScanResult, ScanSample};
use std::collections::BTreeMap;
use std::path::Path;

/// 17 significant digits: lossless for f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a spectrum to the CSV schema.
pub fn emit_csv(spec: &ScanResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("# domain={}\n", spec.domain.tag()));
    out.push_str(&format!("# m={}\n", spec.subharmonic));
    if let Some(seed) = spec.seed {
        out.push_str(&format!("# seed={seed}\n"));
    }
    for (k, v) in &spec.meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    let has_sigma = spec.samples().first().map(|s| s.sigma.is_some()).unwrap_or(false);
    out.push_str(if has_sigma {
        "scan_freq_hz,signal,sigma\n"
    } else {
        "scan_freq_hz,signal\n"
    });
    for s in spec.samples() {
        out.push_str(&fmt_float(s.scan_freq_hz));
        out.push(',');
        out.push_str(&fmt_float(s.signal));
        if let Some(sig) = s.sigma {
            out.push(',');
            out.push_str(&fmt_float(sig));
        }
        out.push('\n');
    }
    out
}

/// Parse the CSV schema back into a spectrum. Errors name the offending
/// line.
pub fn parse_csv(text: &str) -> Result<ScanResult> {
    let mut meta = BTreeMap::new();
    let mut domain = None;
    let mut m: Option<u32> = None;
    let mut seed: Option<u64> = None;
    let mut header_seen = false;
    let mut expect_sigma = false;
    let mut samples = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let human = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            let (k, v) = comment.split_once('=').ok_or_else(|| {
                Error::data(format!("line {human}: metadata comment is not key=value"))
            })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "domain" => domain = Some(ScanDomain::parse(v).map_err(|_| {
                    Error::data(format!("line {human}: unknown domain `{v}`"))
                })?),
                "m" => {
                    m = Some(v.parse().map_err(|_| {
                        Error::data(format!("line {human}: m must be a positive integer, got `{v}`"))
                    })?)
                }
                "seed" => {
                    seed = Some(v.parse().map_err(|_| {
                        Error::data(format!("line {human}: seed must be an integer, got `{v}`"))
                    })?)
                }
                _ => {
                    meta.insert(k.to_string(), v.to_string());
                }
            }
            continue;
        }
        if !header_seen {
            match line {
                "scan_freq_hz,signal" => expect_sigma = false,
                "scan_freq_hz,signal,sigma" => expect_sigma = true,
                other => {
                    return Err(Error::data(format!(
                        "line {human}: unexpected header `{other}`"
                    )))
                }
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = if expect_sigma { 3 } else { 2 };
        if fields.len() != expected {
            return Err(Error::data(format!(
                "line {human}: expected {expected} columns, got {}",
                fields.len()
            )));
        }
        let parse_field = |name: &str, s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| {
                Error::data(format!("line {human}: column `{name}` is not a number: `{s}`"))
            })
        };
        let x = parse_field("scan_freq_hz", fields[0])?;
        let y = parse_field("signal", fields[1])?;
        let sigma = if expect_sigma {
            Some(parse_field("sigma", fields[2])?)
        } else {
            None
        };
        samples.push(ScanSample {
            scan_freq_hz: x,
            signal: y,
            sigma,
        });
    }

    let domain = domain.ok_or_else(|| Error::data("missing `# domain=` metadata line"))?;
    let m = m.ok_or_else(|| Error::data("missing `# m=` metadata line"))?;
    if !header_seen {
        return Err(Error::data("missing header row"));
    }
    ScanResult::new(samples, domain, m, seed, meta)
}

pub fn write_csv(spec: &ScanResult, path: &Path) -> Result<()> {
    std::fs::write(path, emit_csv(spec))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<ScanResult> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    parse_csv(&text)
}

/// Ordered key-value report; renders one `key = value` line per entry.
#[derive(Debug, Clone, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl std::fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_float(&mut self, key: impl Into<String>, value: f64) {
        self.entries.push((key.into(), fmt_float(value)));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

/// Standard report block for a lineshape fit.
pub fn fit_report(fit: &LorentzianFit, domain: ScanDomain, m: u32) -> Report {
    let mut r = Report::new();
    r.push("converged", fit.converged);
    r.push("domain", domain.tag());
    r.push("m", m);
    r.push_float("amplitude", fit.params.amplitude);
    r.push_float("center_hz", fit.params.center_hz);
    r.push_float("fwhm_hz", fit.params.fwhm_hz);
    r.push_float("offset", fit.params.offset);
    r.push_float("stderr_amplitude", fit.param_stderr(0));
    r.push_float("stderr_center_hz", fit.param_stderr(1));
    r.push_float("stderr_fwhm_hz", fit.param_stderr(2));
    r.push_float("stderr_offset", fit.param_stderr(3));
    if domain == ScanDomain::PulseRep {
        r.push_float("fwhm_hf_hz", fit.params.fwhm_hz * m as f64);
        r.push_float("center_hf_hz", fit.params.center_hz * m as f64);
    }
    r.push_float("reduced_chi2", fit.reduced_chi2);
    r.push_float("r2", fit.r2);
    r.push_float("residual_skew", fit.residual_skew);
    r.push("n_iterations", fit.n_iterations);
    r
}

/// Standard report block for an inference result.
pub fn inference_report(inf: &InferenceReport) -> Report {
    let mut r = Report::new();
    if let Some(m) = inf.sigma2_cm2 {
        r.push_float("sigma2_cm2", m.value);
        r.push_float("sigma2_unc_cm2", m.uncertainty);
    }
    if let Some(m) = inf.shift_coeff_hz_per_mbar {
        r.push_float("shift_coeff_hz_per_mbar", m.value);
        r.push_float("shift_coeff_unc_hz_per_mbar", m.uncertainty);
    }
    if let Some(m) = inf.nu12_recovered_hz {
        r.push_float("nu12_recovered_hz", m.value);
        r.push_float("nu12_unc_hz", m.uncertainty);
    }
    for c in &inf.corrections {
        if let Some((k, v)) = c.split_once('=') {
            r.push(format!("correction.{k}"), v);
        }
    }
    for (k, v) in &inf.inputs {
        r.push(format!("input.{k}"), v);
    }
    for (i, w) in inf.warnings.iter().enumerate() {
        r.push(format!("warning.{i}"), w);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec_with(seed: Option<u64>, sigma: Option<f64>) -> ScanResult {
        let samples = (0..16)
            .map(|i| ScanSample {
                scan_freq_hz: 5.257e8 + i as f64 * 13.7,
                signal: 1.0 + (i as f64 * 0.37).sin().abs(),
                sigma,
            })
            .collect();
        let mut meta = BTreeMap::new();
        meta.insert("gas".into(), "xe".into());
        meta.insert("pressure_mbar".into(), "53.3".into());
        ScanResult::new(samples, ScanDomain::PulseRep, 13, seed, meta).unwrap()
    }

    #[test]
    fn round_trip_exact() {
        for spec in [spec_with(None, None), spec_with(Some(7), Some(0.02))] {
            let text = emit_csv(&spec);
            let parsed = parse_csv(&text).unwrap();
            assert_eq!(spec, parsed);
        }
    }

    #[test]
    fn parse_errors_name_lines() {
        let spec = spec_with(None, None);
        let mut text = emit_csv(&spec);
        text.push_str("not,a,number,row\n");
        let err = parse_csv(&text).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");

        let bad_header = "# domain=pulse_rep\n# m=13\nfreq,signal\n";
        let err = parse_csv(bad_header).unwrap_err().to_string();
        assert!(err.contains("unexpected header"), "{err}");

        let bad_signal = "# domain=pulse_rep\n# m=13\nscan_freq_hz,signal\n1.0,-0.5\n";
        let err = parse_csv(bad_signal).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
    }

    #[test]
    fn missing_metadata_rejected() {
        let no_domain = "# m=13\nscan_freq_hz,signal\n1.0,0.5\n";
        assert!(parse_csv(no_domain).is_err());
        let no_m = "# domain=hyperfine\nscan_freq_hz,signal\n1.0,0.5\n";
        assert!(parse_csv(no_m).is_err());
    }

    #[test]
    fn report_renders_key_value_lines() {
        let mut r = Report::new();
        r.push("converged", true);
        r.push_float("fwhm_hz", 16700.0);
        let text = r.render();
        assert!(text.starts_with("converged = true\n"));
        assert!(text.contains("fwhm_hz = 1.6700000000000000e4\n"));
    }

    proptest! {
        #[test]
        fn float_format_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let parsed: f64 = fmt_float(x).parse().unwrap();
            prop_assert!(parsed == x || (parsed.is_nan() && x.is_nan()));
        }

        #[test]
        fn csv_round_trips_arbitrary_spectra(
            n in 5usize..40,
            x0 in 1.0f64..1e9,
            dx in 1e-3f64..1e6,
            seed in any::<Option<u64>>(),
            with_sigma in any::<bool>(),
        ) {
            let samples: Vec<ScanSample> = (0..n).map(|i| ScanSample {
                scan_freq_hz: x0 + dx * i as f64,
                signal: (i as f64 * 0.61).sin().abs() * 3.0,
                sigma: with_sigma.then_some(0.01 + i as f64 * 1e-4),
            }).collect();
            prop_assume!(samples.windows(2).all(|w| w[1].scan_freq_hz > w[0].scan_freq_hz));
            let spec = ScanResult::new(samples, ScanDomain::Hyperfine, 13, seed, BTreeMap::new()).unwrap();
            let parsed = parse_csv(&emit_csv(&spec)).unwrap();
            prop_assert_eq!(spec, parsed);
        }
    }
}
