//! Named test functions available to runs and the CLI: `cos`, `gauss_bump`,
//! `tanh_clip`, `capped_pow(delta, m)`, and `cos_minus_one` (used by the
//! small-time slope diagnostic, which needs `phi(0) = 0`).

use crate::error::{domain, Result};
use crate::nonlocal::SampledFunction;

/// Build the registry function named by `spec`, e.g. `"cos"` or
/// `"capped_pow(0.25, 2)"`.
pub fn test_function(spec: &str) -> Result<SampledFunction> {
    let s = spec.trim();
    match s {
        "cos" => {
            return Ok(SampledFunction::new(1.0, f64::cos)
                .with_lip(1.0)
                .with_increment(|x, h| -2.0 * (x + 0.5 * h).sin() * (0.5 * h).sin())
                .with_cosine_tag(1.0));
        }
        "cos_minus_one" => {
            return Ok(SampledFunction::new(2.0, |x: f64| x.cos() - 1.0)
                .with_lip(1.0)
                .with_increment(|x, h| -2.0 * (x + 0.5 * h).sin() * (0.5 * h).sin()));
        }
        "gauss_bump" => {
            return Ok(SampledFunction::new(1.0, |x: f64| (-x * x).exp())
                .with_lip((2.0f64 / std::f64::consts::E).sqrt()));
        }
        "tanh_clip" => {
            return Ok(SampledFunction::new(1.0, f64::tanh).with_lip(1.0));
        }
        _ => {}
    }
    if let Some(args) = s.strip_prefix("capped_pow(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(domain(format!("capped_pow expects (delta, m), got {s}")));
        }
        let delta: f64 = parts[0]
            .parse()
            .map_err(|_| domain(format!("bad delta in {s}")))?;
        let m: f64 = parts[1]
            .parse()
            .map_err(|_| domain(format!("bad cap in {s}")))?;
        if !(delta > 0.0 && delta < 1.0) || !(m > 0.0) {
            return Err(domain(format!(
                "capped_pow needs 0 < delta < 1 and m > 0, got {s}"
            )));
        }
        return Ok(SampledFunction::new(m, move |x: f64| {
            x.abs().powf(delta).min(m)
        }));
    }
    Err(domain(format!(
        "unknown test function {s:?} (registry: cos, cos_minus_one, gauss_bump, tanh_clip, capped_pow(delta, m))"
    )))
}

/// Names accepted by [`test_function`], for help text.
pub const REGISTRY_NAMES: &[&str] = &[
    "cos",
    "cos_minus_one",
    "gauss_bump",
    "tanh_clip",
    "capped_pow(delta, m)",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_parses() {
        let c = test_function("cos").unwrap();
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.cosine_freq(), Some(1.0));
        let cm1 = test_function("cos_minus_one").unwrap();
        assert_eq!(cm1.eval(0.0), 0.0);
        let cp = test_function("capped_pow(0.25, 2)").unwrap();
        assert_eq!(cp.eval(16.0), 2.0);
        assert!((cp.eval(0.0625)).abs() < 0.51);
        assert!(test_function("nope").is_err());
        assert!(test_function("capped_pow(0.25)").is_err());
        assert!(test_function("capped_pow(1.5, 2)").is_err());
    }

    #[test]
    fn cos_increment_is_exact_at_tiny_h() {
        let c = test_function("cos").unwrap();
        let x = 0.7;
        let h = 1e-12;
        let exact = c.delta(x, h);
        // the product form keeps relative accuracy where naive subtraction
        // loses all digits
        assert!((exact - (-h * x.sin())).abs() < 1e-24);
    }
}
