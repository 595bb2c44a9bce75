//! Composite Simpson quadrature, cumulative integrals, and series-guarded
//! exponential differences used throughout the kernel formulas.

use crate::error::{Error, Result};

/// Composite Simpson rule over equally spaced samples (odd count required).
pub fn simpson(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "Simpson needs an odd sample count >= 3, got {n}"
        )));
    }
    let mut s4 = 0.0;
    let mut s2 = 0.0;
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            s4 += v;
        } else {
            s2 += v;
        }
    }
    Ok(h / 3.0 * (values[0] + values[n - 1] + 4.0 * s4 + 2.0 * s2))
}

/// Simpson rule for a function on `[a, b]` with `n` intervals (even).
pub fn simpson_fn<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> Result<f64> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!("need an even interval count, got {n}")));
    }
    let h = (b - a) / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| f(a + i as f64 * h)).collect();
    simpson(&values, h)
}

/// Simpson with dyadic refinement until the estimate changes by less than
/// `rtol` in relative terms (plus a tiny absolute floor for near-zero values).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("non-finite integration bounds".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut n = 32usize;
    let mut prev = simpson_fn(&f, a, b, n)?;
    for _ in 0..20 {
        n *= 2;
        let cur = simpson_fn(&f, a, b, n)?;
        if (cur - prev).abs() <= rtol * cur.abs() + 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

/// Running integral over grid samples: `out[k]` approximates the integral of
/// the sampled function from node 0 to node `k`, 4th-order accurate.
///
/// Even prefixes use Simpson pairs; odd prefixes close with a 3/8 panel
/// (first one with a local cubic).
pub fn cumulative_simpson(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "cumulative Simpson needs an odd sample count >= 3, got {n}"
        )));
    }
    let mut out = vec![0.0; n];
    out[1] = h / 12.0 * (5.0 * values[0] + 8.0 * values[1] - values[2]);
    for k in (2..n).step_by(2) {
        out[k] = out[k - 2] + h / 3.0 * (values[k - 2] + 4.0 * values[k - 1] + values[k]);
    }
    for k in (3..n).step_by(2) {
        out[k] = out[k - 3]
            + 3.0 * h / 8.0
                * (values[k - 3] + 3.0 * values[k - 2] + 3.0 * values[k - 1] + values[k]);
    }
    Ok(out)
}

/// `exp(x) - 1 - x`, accurate near zero.
pub fn expm1_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        // x^2/2 * (1 + x/3 + x^2/12 + x^3/60 + x^4/360)
        let x2 = x * x;
        x2 / 2.0 * (1.0 + x / 3.0 + x2 / 12.0 + x2 * x / 60.0 + x2 * x2 / 360.0)
    } else {
        x.exp_m1() - x
    }
}

/// `exp(x) - 1 - x - x^2/2`, accurate near zero.
pub fn expm1_minus_x_minus_half_x2(x: f64) -> f64 {
    if x.abs() < 5e-2 {
        // x^3/6 * (1 + x/4 + x^2/20 + x^3/120 + x^4/840 + x^5/6720)
        let x2 = x * x;
        x * x2 / 6.0
            * (1.0 + x / 4.0 + x2 / 20.0 + x2 * x / 120.0 + x2 * x2 / 840.0
                + x2 * x2 * x / 6720.0)
    } else {
        x.exp_m1() - x - x * x / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_fourth_order() {
        // integral of e^t on [0, 2]
        let exact = 2.0_f64.exp() - 1.0;
        let e1 = (simpson_fn(f64::exp, 0.0, 2.0, 16).unwrap() - exact).abs();
        let e2 = (simpson_fn(f64::exp, 0.0, 2.0, 32).unwrap() - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let h = 1e-3;
        let n = 2001;
        let values: Vec<f64> = (0..n).map(|i| (i as f64 * h).exp()).collect();
        let cum = cumulative_simpson(&values, h).unwrap();
        for (k, c) in cum.iter().enumerate() {
            let exact = (k as f64 * h).exp() - 1.0;
            assert!((c - exact).abs() < 1e-12, "node {k}: {c} vs {exact}");
        }
    }

    #[test]
    fn adaptive_hits_requested_tolerance() {
        let v = adaptive_simpson(|t| (-t * t).exp(), 0.0, 3.0, 1e-12).unwrap();
        let exact = 0.886_207_348_259_521_3; // sqrt(pi)/2 * erf(3)
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn guarded_series_agree_with_direct_evaluation() {
        // reference via exp_m1, which is itself accurate in this range
        for &x in &[2e-4_f64, 9e-4, 2e-3, 0.04, 0.3, 2.0, -2e-4, -0.3] {
            let direct1 = x.exp_m1() - x;
            let direct2 = x.exp_m1() - x - x * x / 2.0;
            assert!(
                (expm1_minus_x(x) - direct1).abs() <= 1e-9 * direct1.abs(),
                "expm1_minus_x({x})"
            );
            assert!(
                (expm1_minus_x_minus_half_x2(x) - direct2).abs() <= 1e-7 * direct2.abs(),
                "expm1_minus_x_minus_half_x2({x})"
            );
        }
        // deep in the series regime the leading term dominates
        assert!((expm1_minus_x(1e-8) - 5e-17).abs() < 1e-24);
        assert!((expm1_minus_x_minus_half_x2(1e-8) - 1e-24 / 6.0).abs() < 1e-32);
    }

    #[test]
    fn simpson_rejects_even_counts() {
        assert!(simpson(&[1.0, 2.0], 0.1).is_err());
        assert!(simpson_fn(|t| t, 0.0, 1.0, 3).is_err());
    }
}
