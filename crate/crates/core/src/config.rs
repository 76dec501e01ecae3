//! Run configuration: sectioned key-value text (TOML syntax) with
//! unit-suffixed keys. Parsing is strict and total — unknown sections or
//! keys, type mismatches and invalid values are all collected and reported
//! in one aggregated error. Missing optional fields fall back to the
//! built-in ⁸⁷Rb/gas tables with a logged notice.

use crate::dynamics::{NoiseSpec, ScanGrid};
use crate::error::{Error, Result};
use crate::inference::InferenceSettings;
use crate::pulses::{PulseShape, PulseTrainSpec};
use crate::species::{AtomSpec, BufferGasSpec, CellGeometry, ExperimentConditions};
use crate::spectrum::ScanDomain;
use crate::units;
use toml::Value;

/// Fully-populated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub atom: AtomSpec,
    pub gas: BufferGasSpec,
    pub conditions: ExperimentConditions,
    pub pulse: PulseTrainSpec,
    pub scan: ScanGrid,
    pub noise: Option<NoiseSpec>,
    pub inference: InferenceSettings,
    /// Shift coefficient assumed known for the hyperfine recovery (Hz/mbar).
    pub known_shift_coeff_hz_per_mbar: Option<f64>,
}

struct Section {
    name: &'static str,
    table: toml::map::Map<String, Value>,
    problems: Vec<String>,
}

impl Section {
    fn take_f64(&mut self, key: &str) -> Option<f64> {
        match self.table.remove(key) {
            None => None,
            Some(Value::Float(x)) => Some(x),
            Some(Value::Integer(i)) => Some(i as f64),
            Some(other) => {
                self.problems.push(format!(
                    "[{}] {key}: expected a number, got {other}",
                    self.name
                ));
                None
            }
        }
    }

    fn take_u64(&mut self, key: &str) -> Option<u64> {
        match self.table.remove(key) {
            None => None,
            Some(Value::Integer(i)) if i >= 0 => Some(i as u64),
            Some(other) => {
                self.problems.push(format!(
                    "[{}] {key}: expected a non-negative integer, got {other}",
                    self.name
                ));
                None
            }
        }
    }

    fn take_string(&mut self, key: &str) -> Option<String> {
        match self.table.remove(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(other) => {
                self.problems.push(format!(
                    "[{}] {key}: expected a string, got {other}",
                    self.name
                ));
                None
            }
        }
    }

    fn take_bool(&mut self, key: &str) -> Option<bool> {
        match self.table.remove(key) {
            None => None,
            Some(Value::Boolean(b)) => Some(b),
            Some(other) => {
                self.problems.push(format!(
                    "[{}] {key}: expected true/false, got {other}",
                    self.name
                ));
                None
            }
        }
    }

    fn finish(mut self, problems: &mut Vec<String>) {
        for key in self.table.keys() {
            self.problems
                .push(format!("[{}] unknown key `{key}`", self.name));
        }
        problems.append(&mut self.problems);
    }
}

fn section(
    root: &mut toml::map::Map<String, Value>,
    name: &'static str,
    problems: &mut Vec<String>,
) -> Section {
    let table = match root.remove(name) {
        None => toml::map::Map::new(),
        Some(Value::Table(t)) => t,
        Some(other) => {
            problems.push(format!("[{name}] must be a table, got {other}"));
            toml::map::Map::new()
        }
    };
    Section {
        name,
        table,
        problems: Vec::new(),
    }
}

/// Parse a config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with_overrides(text, &[])
}

/// Parse with `section.key=value` overrides applied on top of the document
/// (flag > config > default).
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut root: toml::map::Map<String, Value> = text
        .parse::<toml::Table>()
        .map_err(|e| Error::config(format!("config is not valid TOML: {e}")))?;

    let mut problems: Vec<String> = Vec::new();

    for ov in overrides {
        match apply_override(&mut root, ov) {
            Ok(()) => {}
            Err(msg) => problems.push(msg),
        }
    }

    // ---- [atom] ----
    let mut atom_sec = section(&mut root, "atom", &mut problems);
    let base_atom = AtomSpec::rb87();
    let atom_name = atom_sec.take_string("name").unwrap_or_else(|| {
        log::info!("[atom] missing; defaulting to built-in rb87");
        "rb87".into()
    });
    if atom_name != "rb87" {
        atom_sec
            .problems
            .push(format!("[atom] unknown atom `{atom_name}` (built-in table has rb87)"));
    }
    let nu12 = atom_sec.take_f64("nu12_free_hz").unwrap_or(base_atom.nu12_free_hz);
    let nuclear_spin = atom_sec.take_f64("nuclear_spin").unwrap_or(base_atom.nuclear_spin);
    let g_j = atom_sec.take_f64("g_j").unwrap_or(base_atom.g_j);
    let g_i = atom_sec.take_f64("g_i").unwrap_or(base_atom.g_i);
    let mass_u = atom_sec.take_f64("mass_u");
    let linewidth_hz = atom_sec.take_f64("natural_linewidth_hz");
    let branching = atom_sec.take_f64("branching_lower").unwrap_or(base_atom.branching_lower);
    let gamma1_override = atom_sec.take_f64("gamma1_s");
    let atom = AtomSpec::new(
        atom_name,
        nu12,
        nuclear_spin,
        g_j,
        g_i,
        mass_u.map(crate::constants::amu_to_kg).unwrap_or(base_atom.mass_kg),
        linewidth_hz
            .map(|w| 2.0 * std::f64::consts::PI * w)
            .unwrap_or(base_atom.gamma_e),
        branching,
    );
    let atom = match atom {
        Ok(a) => a,
        Err(e) => {
            atom_sec.problems.push(format!("[atom] {e}"));
            base_atom
        }
    };
    if gamma1_override.is_some() {
        atom_sec.problems.push(
            "[atom] gamma1_s moved to [inference]; ground relaxation defaults to Γ₁₂".into(),
        );
    }
    atom_sec.finish(&mut problems);

    // ---- [gas] ----
    let mut gas_sec = section(&mut root, "gas", &mut problems);
    let gas_name = gas_sec.take_string("name");
    let gas_mass_u = gas_sec.take_f64("mass_u");
    let mut gas = match (&gas_name, gas_mass_u) {
        (Some(name), None) => match BufferGasSpec::builtin(name) {
            Some(g) => g,
            None => {
                gas_sec.problems.push(format!(
                    "[gas] unknown gas `{name}` and no mass_u given (built-ins: he, ne, ar, xe)"
                ));
                BufferGasSpec::new("invalid", 1.0).unwrap()
            }
        },
        (Some(name), Some(mass_u)) => match BufferGasSpec::new(name.clone(), crate::constants::amu_to_kg(mass_u)) {
            Ok(g) => g,
            Err(e) => {
                gas_sec.problems.push(format!("[gas] {e}"));
                BufferGasSpec::new("invalid", 1.0).unwrap()
            }
        },
        (None, Some(mass_u)) => match BufferGasSpec::new("custom", crate::constants::amu_to_kg(mass_u)) {
            Ok(g) => g,
            Err(e) => {
                gas_sec.problems.push(format!("[gas] {e}"));
                BufferGasSpec::new("invalid", 1.0).unwrap()
            }
        },
        (None, None) => {
            gas_sec
                .problems
                .push("[gas] name (or mass_u) is required".into());
            BufferGasSpec::new("invalid", 1.0).unwrap()
        }
    };
    if let Some(d0) = gas_sec.take_f64("d0_cm2_s") {
        match gas.clone().with_d0(d0) {
            Ok(g) => gas = g,
            Err(e) => gas_sec.problems.push(format!("[gas] {e}")),
        }
    }
    if let Some(s2) = gas_sec.take_f64("sigma2_cm2") {
        match gas.clone().with_sigma2(s2) {
            Ok(g) => gas = g,
            Err(e) => gas_sec.problems.push(format!("[gas] {e}")),
        }
    }
    if let Some(sc) = gas_sec.take_f64("shift_coeff_hz_per_mbar") {
        gas = gas.with_shift_coeff(sc);
    }
    if let Some(sc_torr) = gas_sec.take_f64("shift_coeff_hz_per_torr") {
        if gas.shift_coeff_hz_per_mbar.is_some() {
            gas_sec.problems.push(
                "[gas] give shift_coeff_hz_per_mbar or shift_coeff_hz_per_torr, not both".into(),
            );
        } else {
            gas = gas.with_shift_coeff(units::shift_coeff_to_hz_per_mbar(
                sc_torr,
                units::PressureUnit::Torr,
            ));
        }
    }
    if let Some(t0) = gas_sec.take_f64("t0_k") {
        match gas.clone().with_t0(t0) {
            Ok(g) => gas = g,
            Err(e) => gas_sec.problems.push(format!("[gas] {e}")),
        }
    }
    gas_sec.finish(&mut problems);

    // ---- [cell] ----
    let mut cell_sec = section(&mut root, "cell", &mut problems);
    let length_cm = cell_sec.take_f64("length_cm").unwrap_or_else(|| {
        log::info!("[cell] length_cm missing; defaulting to 5 cm");
        5.0
    });
    let radius_cm = cell_sec.take_f64("radius_cm").unwrap_or_else(|| {
        log::info!("[cell] radius_cm missing; defaulting to 1 cm");
        1.0
    });
    let cell = match CellGeometry::new(length_cm / 100.0, radius_cm / 100.0) {
        Ok(c) => c,
        Err(e) => {
            cell_sec.problems.push(format!("[cell] {e}"));
            CellGeometry::new(0.05, 0.01).unwrap()
        }
    };
    cell_sec.finish(&mut problems);

    // ---- [conditions] ----
    let mut cond_sec = section(&mut root, "conditions", &mut problems);
    let pressure_mbar = cond_sec.take_f64("pressure_mbar");
    let pressure_torr = cond_sec.take_f64("pressure_torr");
    let pressure_pa = match (pressure_mbar, pressure_torr) {
        (Some(_), Some(_)) => {
            cond_sec
                .problems
                .push("[conditions] give pressure_mbar or pressure_torr, not both".into());
            None
        }
        (Some(mbar), None) => Some(units::mbar_to_pa(mbar)),
        (None, Some(torr)) => Some(torr * units::PA_PER_TORR),
        (None, None) => {
            cond_sec
                .problems
                .push("[conditions] pressure_mbar is required".into());
            None
        }
    };
    let temp_c = cond_sec.take_f64("temperature_c");
    let temp_k = cond_sec.take_f64("temperature_k");
    let temperature_k = match (temp_c, temp_k) {
        (Some(_), Some(_)) => {
            cond_sec
                .problems
                .push("[conditions] give temperature_c or temperature_k, not both".into());
            None
        }
        (Some(c), None) => Some(units::celsius_to_kelvin(c)),
        (None, Some(k)) => Some(k),
        (None, None) => {
            cond_sec
                .problems
                .push("[conditions] temperature_c (or temperature_k) is required".into());
            None
        }
    };
    let b_field_ut = cond_sec.take_f64("b_field_ut").unwrap_or_else(|| {
        log::info!("[conditions] b_field_ut missing; defaulting to 0");
        0.0
    });
    let conditions = match (pressure_pa, temperature_k) {
        (Some(p), Some(t)) => {
            match ExperimentConditions::new(p, t, units::microtesla_to_tesla(b_field_ut), cell) {
                Ok(c) => Some(c),
                Err(e) => {
                    cond_sec.problems.push(format!("[conditions] {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    cond_sec.finish(&mut problems);

    // ---- [pulse] ----
    let mut pulse_sec = section(&mut root, "pulse", &mut problems);
    let m = pulse_sec.take_u64("m").unwrap_or_else(|| {
        log::info!("[pulse] m missing; defaulting to 13");
        13
    }) as u32;
    let rep_freq_hz = pulse_sec.take_f64("rep_freq_hz").unwrap_or_else(|| {
        let nominal = atom.nu12_free_hz / m.max(1) as f64;
        log::info!("[pulse] rep_freq_hz missing; defaulting to nu12/m = {nominal}");
        nominal
    });
    let duration_ps = pulse_sec.take_f64("duration_ps").unwrap_or_else(|| {
        log::info!("[pulse] duration_ps missing; defaulting to 15 ps");
        15.0
    });
    let shape = match pulse_sec.take_string("shape") {
        None => PulseShape::Gaussian,
        Some(tag) => match PulseShape::parse(&tag) {
            Ok(s) => s,
            Err(e) => {
                pulse_sec.problems.push(format!("[pulse] {e}"));
                PulseShape::Gaussian
            }
        },
    };
    let area1 = pulse_sec.take_f64("area1_rad").unwrap_or_else(|| {
        log::info!("[pulse] area1_rad missing; defaulting to 2e-4 rad");
        2e-4
    });
    let area2 = pulse_sec.take_f64("area2_rad").unwrap_or(area1);
    let spectral_fwhm_ghz = pulse_sec.take_f64("spectral_fwhm_ghz");
    let pulse = match PulseTrainSpec::new(rep_freq_hz, duration_ps * 1e-12, shape, area1, area2, m)
    {
        Ok(mut p) => {
            if let Some(w) = spectral_fwhm_ghz {
                p = p.with_measured_spectral_fwhm(w * 1e9);
            }
            Some(p)
        }
        Err(e) => {
            pulse_sec.problems.push(format!("[pulse] {e}"));
            None
        }
    };
    pulse_sec.finish(&mut problems);

    // ---- [scan] ----
    let mut scan_sec = section(&mut root, "scan", &mut problems);
    let domain = match scan_sec.take_string("domain") {
        None => ScanDomain::PulseRep,
        Some(tag) => match ScanDomain::parse(&tag) {
            Ok(d) => d,
            Err(e) => {
                scan_sec.problems.push(format!("[scan] {e}"));
                ScanDomain::PulseRep
            }
        },
    };
    let span_hz = scan_sec.take_f64("span_hz").unwrap_or_else(|| {
        log::info!("[scan] span_hz missing; defaulting to 10 kHz");
        10e3
    });
    let points = scan_sec.take_u64("points").unwrap_or_else(|| {
        log::info!("[scan] points missing; defaulting to 201");
        201
    }) as usize;
    let center_hz = scan_sec.take_f64("center_hz");
    let frequency_offset_hz = scan_sec.take_f64("frequency_offset_hz").unwrap_or(0.0);
    let scan = ScanGrid {
        center_hz,
        span_hz,
        points,
        domain,
        frequency_offset_hz,
    };
    scan_sec.finish(&mut problems);

    // ---- [noise] ----
    let mut noise_sec = section(&mut root, "noise", &mut problems);
    let rel_sigma = noise_sec.take_f64("rel_sigma");
    let seed = noise_sec.take_u64("seed");
    let noise = match (rel_sigma, seed) {
        (Some(rs), seed) => {
            if rs < 0.0 {
                noise_sec
                    .problems
                    .push(format!("[noise] rel_sigma must be ≥ 0, got {rs}"));
                None
            } else {
                Some(NoiseSpec {
                    rel_sigma: rs,
                    seed: seed.unwrap_or(0),
                })
            }
        }
        (None, Some(_)) => {
            noise_sec
                .problems
                .push("[noise] seed given without rel_sigma".into());
            None
        }
        (None, None) => None,
    };
    noise_sec.finish(&mut problems);

    // ---- [inference] ----
    let mut inf_sec = section(&mut root, "inference", &mut problems);
    let pressure_rel_unc = inf_sec.take_f64("pressure_rel_unc").unwrap_or(0.0);
    let subtract_diffusion = inf_sec.take_bool("subtract_diffusion").unwrap_or(false);
    let known_shift_coeff_hz_per_mbar = inf_sec.take_f64("known_shift_coeff_hz_per_mbar");
    let known_shift_torr = inf_sec.take_f64("known_shift_coeff_hz_per_torr");
    let known_shift_coeff_hz_per_mbar = match (known_shift_coeff_hz_per_mbar, known_shift_torr) {
        (Some(_), Some(_)) => {
            inf_sec.problems.push(
                "[inference] give known_shift_coeff_hz_per_mbar or _per_torr, not both".into(),
            );
            None
        }
        (Some(v), None) => Some(v),
        (None, Some(v)) => Some(units::shift_coeff_to_hz_per_mbar(
            v,
            units::PressureUnit::Torr,
        )),
        (None, None) => None,
    };
    if pressure_rel_unc < 0.0 {
        inf_sec
            .problems
            .push(format!("[inference] pressure_rel_unc must be ≥ 0, got {pressure_rel_unc}"));
    }
    let inference = InferenceSettings {
        pressure_rel_unc: pressure_rel_unc.max(0.0),
        subtract_diffusion,
    };
    inf_sec.finish(&mut problems);

    // any leftover top-level keys are unknown sections
    for key in root.keys() {
        problems.push(format!("unknown section [{key}]"));
    }

    if !problems.is_empty() {
        return Err(Error::Config { problems });
    }
    Ok(RunConfig {
        atom,
        gas,
        conditions: conditions.expect("validated above"),
        pulse: pulse.expect("validated above"),
        scan,
        noise,
        inference,
        known_shift_coeff_hz_per_mbar,
    })
}

/// Apply one `section.key=value` override onto the raw table.
fn apply_override(
    root: &mut toml::map::Map<String, Value>,
    ov: &str,
) -> std::result::Result<(), String> {
    let (path, raw_value) = ov
        .split_once('=')
        .ok_or_else(|| format!("override `{ov}` is not section.key=value"))?;
    let (sec, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| format!("override `{ov}` is not section.key=value"))?;
    let parsed: Value = match raw_value.trim().parse::<toml::Value>() {
        Ok(v) => v,
        Err(_) => Value::String(raw_value.trim().to_string()),
    };
    let entry = root
        .entry(sec.to_string())
        .or_insert_with(|| Value::Table(toml::map::Map::new()));
    match entry {
        Value::Table(t) => {
            t.insert(key.to_string(), parsed);
            Ok(())
        }
        _ => Err(format!("override `{ov}`: [{sec}] is not a table")),
    }
}

pub fn read_config(path: &std::path::Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_with_overrides(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG5: &str = r#"
[gas]
name = "xe"
sigma2_cm2 = 1.1e-18
shift_coeff_hz_per_mbar = -885.0

[conditions]
pressure_mbar = 53.3
temperature_c = 21.0
b_field_ut = 50.0

[pulse]
m = 13
area1_rad = 2e-4

[scan]
span_hz = 10e3
points = 201

[noise]
rel_sigma = 0.02
seed = 7
"#;

    #[test]
    fn fig5_config_parses() {
        let cfg = parse_config(FIG5).unwrap();
        assert_eq!(cfg.atom.name, "rb87");
        assert_eq!(cfg.gas.name, "xe");
        assert!((cfg.conditions.pressure_mbar() - 53.3).abs() < 1e-12);
        assert!((cfg.conditions.temperature_k - 294.15).abs() < 1e-12);
        assert!((cfg.conditions.b_field_t - 50e-6).abs() < 1e-18);
        assert_eq!(cfg.pulse.subharmonic, 13);
        assert_eq!(cfg.scan.points, 201);
        assert_eq!(cfg.noise.unwrap().seed, 7);
        assert_eq!(cfg.gas.sigma2_cm2, Some(1.1e-18));
    }

    #[test]
    fn unknown_key_named_in_error() {
        let text = format!("{FIG5}\n[scan]\nspam = 1\n");
        // toml rejects duplicate section headers, so use a fresh doc
        let text = text.replace("[scan]\nspan_hz = 10e3\npoints = 201\n", "");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("spam"), "{err}");
    }

    #[test]
    fn problems_aggregate() {
        let bad = r#"
[gas]
name = "unobtainium"

[conditions]
pressure_mbar = -5.0
temperature_c = 21.0
mystery_key = 1

[typo_section]
x = 1
"#;
        let err = parse_config(bad).unwrap_err();
        let Error::Config { problems } = err else {
            panic!("expected aggregated config error")
        };
        let text = problems.join("\n");
        assert!(text.contains("unobtainium"), "{text}");
        assert!(text.contains("pressure"), "{text}");
        assert!(text.contains("mystery_key"), "{text}");
        assert!(text.contains("typo_section"), "{text}");
        assert!(problems.len() >= 4);
    }

    #[test]
    fn overrides_win_over_config() {
        let cfg = parse_config_with_overrides(
            FIG5,
            &[
                "conditions.pressure_mbar=33.0".into(),
                "scan.points=51".into(),
                "gas.name=\"ar\"".into(),
            ],
        )
        .unwrap();
        assert!((cfg.conditions.pressure_mbar() - 33.0).abs() < 1e-12);
        assert_eq!(cfg.scan.points, 51);
        assert_eq!(cfg.gas.name, "ar");
    }

    #[test]
    fn torr_keys_convert() {
        let text = r#"
[gas]
name = "ar"
shift_coeff_hz_per_torr = -51.0

[conditions]
pressure_torr = 25.0
temperature_k = 307.0

[inference]
known_shift_coeff_hz_per_torr = -51.0
"#;
        let cfg = parse_config(text).unwrap();
        let expected = -51.0 * 760.0 * 100.0 / 101325.0;
        assert!((cfg.gas.shift_coeff_hz_per_mbar.unwrap() - expected).abs() < 1e-9);
        assert!((cfg.known_shift_coeff_hz_per_mbar.unwrap() - expected).abs() < 1e-9);
        assert!((cfg.conditions.pressure_pa - 25.0 * units::PA_PER_TORR).abs() < 1e-9);
    }

    #[test]
    fn atom_overrides_apply() {
        let text = r#"
[atom]
name = "rb87"
nu12_free_hz = 6.834682611e9
branching_lower = 0.4

[gas]
name = "xe"
sigma2_cm2 = 1.1e-18

[conditions]
pressure_mbar = 53.3
temperature_c = 21.0
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.atom.nu12_free_hz, 6.834682611e9);
        assert_eq!(cfg.atom.branching_lower, 0.4);
    }

    #[test]
    fn duplicate_unit_keys_rejected() {
        let text = r#"
[gas]
name = "xe"

[conditions]
pressure_mbar = 53.3
pressure_torr = 40.0
temperature_c = 21.0
"#;
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("not both"), "{err}");
    }
}
