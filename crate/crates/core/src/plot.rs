//! Static SVG emission: data points plus an optional fitted curve,
//! axis labels with units and domain tag. Identical input produces
//! byte-identical output.

use crate::lineshape::{closed_form_signal, LorentzianFit};
use crate::spectrum::ScanResult;
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
/// Fractional padding applied to both axis ranges.
const PAD: f64 = 0.05;

fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

fn fmt_tick(x: f64) -> String {
    format!("{x:.6e}")
}

/// Render the spectrum (and fit curve, when given) to an SVG document.
pub fn emit_plot(spec: &ScanResult, fit: Option<&LorentzianFit>) -> String {
    let xs: Vec<f64> = spec.freqs().collect();
    let ys: Vec<f64> = spec.signals().collect();
    let (xmin, xmax) = bounds(&xs);
    let (ymin, ymax) = bounds(&ys);
    let xr = pad_range(xmin, xmax);
    let yr = pad_range(ymin, ymax);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - xr.0) / (xr.1 - xr.0) * plot_w;
    let py = |y: f64| MARGIN_TOP + (yr.1 - y) / (yr.1 - yr.0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        "<!-- x_range={},{} y_range={},{} -->",
        fmt_tick(xr.0),
        fmt_tick(xr.1),
        fmt_tick(yr.0),
        fmt_tick(yr.1)
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    // frame
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        fmt(MARGIN_LEFT),
        fmt(MARGIN_TOP),
        fmt(plot_w),
        fmt(plot_h)
    );

    // ticks: min / mid / max on both axes
    for (i, x) in [xr.0, 0.5 * (xr.0 + xr.1), xr.1].iter().enumerate() {
        let xp = px(*x);
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black" stroke-width="1"/>"#,
            fmt(xp),
            fmt(MARGIN_TOP + plot_h),
            fmt(MARGIN_TOP + plot_h + 6.0)
        );
        let anchor = match i {
            0 => "start",
            2 => "end",
            _ => "middle",
        };
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="{anchor}">{}</text>"#,
            fmt(xp),
            fmt(MARGIN_TOP + plot_h + 20.0),
            fmt_tick(*x)
        );
    }
    for y in [yr.0, 0.5 * (yr.0 + yr.1), yr.1] {
        let yp = py(y);
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black" stroke-width="1"/>"#,
            fmt(MARGIN_LEFT - 6.0),
            fmt(yp),
            fmt(MARGIN_LEFT)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="end">{}</text>"#,
            fmt(MARGIN_LEFT - 10.0),
            fmt(yp + 4.0),
            fmt_tick(y)
        );
    }

    // axis labels
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="14" text-anchor="middle">scan_freq_hz ({})</text>"#,
        fmt(MARGIN_LEFT + plot_w / 2.0),
        fmt(HEIGHT - 15.0),
        spec.domain.tag()
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" font-family="monospace" font-size="14" text-anchor="middle" transform="rotate(-90 20 {})">signal (arb. units)</text>"#,
        fmt(MARGIN_TOP + plot_h / 2.0),
        fmt(MARGIN_TOP + plot_h / 2.0)
    );

    // fitted curve under the points
    if let Some(f) = fit {
        let n = 512;
        let mut d = String::from("M");
        for k in 0..n {
            let x = xr.0 + (xr.1 - xr.0) * k as f64 / (n - 1) as f64;
            let y = closed_form_signal(x, &f.params);
            let _ = write!(d, "{},{} ", fmt(px(x)), fmt(py(y.clamp(yr.0, yr.1))));
        }
        let _ = writeln!(
            svg,
            r##"<path d="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
            d.trim_end()
        );
    }

    // data points
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(
            svg,
            r##"<circle cx="{}" cy="{}" r="2.5" fill="#1f77b4"/>"##,
            fmt(px(*x)),
            fmt(py(*y))
        );
    }

    svg.push_str("</svg>\n");
    svg
}

pub fn write_plot(spec: &ScanResult, fit: Option<&LorentzianFit>, path: &Path) -> crate::Result<()> {
    std::fs::write(path, emit_plot(spec, fit))?;
    Ok(())
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

fn pad_range(lo: f64, hi: f64) -> (f64, f64) {
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - PAD * span, hi + PAD * span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineshape::{fit, LorentzianParams};
    use crate::spectrum::{ScanDomain, ScanSample};
    use std::collections::BTreeMap;

    fn sample_spec() -> ScanResult {
        let p = LorentzianParams::new(-0.8, 1000.0, 40.0, 1.0).unwrap();
        let samples = (0..81)
            .map(|i| {
                let x = 840.0 + 4.0 * i as f64;
                ScanSample {
                    scan_freq_hz: x,
                    signal: closed_form_signal(x, &p),
                    sigma: None,
                }
            })
            .collect();
        ScanResult::new(samples, ScanDomain::Hyperfine, 13, None, BTreeMap::new()).unwrap()
    }

    #[test]
    fn points_only_without_fit() {
        let svg = emit_plot(&sample_spec(), None);
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("<path"));
        assert!(svg.contains("hyperfine"));
    }

    #[test]
    fn fit_curve_drawn_when_given() {
        let spec = sample_spec();
        let f = fit(&spec, None).unwrap();
        let svg = emit_plot(&spec, Some(&f));
        assert!(svg.contains("<path"));
    }

    #[test]
    fn axis_range_is_data_range_padded_5_percent() {
        let spec = sample_spec();
        let svg = emit_plot(&spec, None);
        let xs: Vec<f64> = spec.freqs().collect();
        let span = xs.last().unwrap() - xs[0];
        let expected_lo = xs[0] - 0.05 * span;
        let expected_hi = xs.last().unwrap() + 0.05 * span;
        let line = svg
            .lines()
            .find(|l| l.starts_with("<!-- x_range="))
            .unwrap();
        let body = line
            .trim_start_matches("<!-- x_range=")
            .split(" y_range=")
            .next()
            .unwrap();
        let mut parts = body.split(',');
        let lo: f64 = parts.next().unwrap().parse().unwrap();
        let hi: f64 = parts.next().unwrap().parse().unwrap();
        assert!((lo - expected_lo).abs() < 1e-3 * span);
        assert!((hi - expected_hi).abs() < 1e-3 * span);
    }

    #[test]
    fn identical_input_identical_output() {
        let spec = sample_spec();
        let f = fit(&spec, None).unwrap();
        assert_eq!(emit_plot(&spec, Some(&f)), emit_plot(&spec, Some(&f)));
    }
}
