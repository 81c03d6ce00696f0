//! One-step error formulas for Anderson acceleration on symmetric linear
//! maps, the Chebyshev bound they satisfy, and the WaveHoltz filter function.

mod spectrum;

pub use spectrum::{
    predicted_one_step_error, sigma_for_norm, verify_one_step_bound, Basis, BoundReport, InitialError,
    Placement, SpectrumSpec,
};

use crate::error::{Error, Result};

/// Chebyshev polynomial of the first kind, `T_m(x)`.
pub fn chebyshev_t(m: u32, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (m as f64 * x.acos()).cos()
    } else {
        let sign = if x < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
        sign * (m as f64 * x.abs().acosh()).cosh()
    }
}

/// Rejects intervals with `a >= b` or containing 0 or 1.
pub(crate) fn check_interval(a: f64, b: f64) -> Result<()> {
    let contains = |p: f64| a <= p && p <= b;
    if !(a < b) || !a.is_finite() || !b.is_finite() || contains(0.0) || contains(1.0) {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(())
}

/// `C(a, b, m) = 1 / |T_m((2ab - a - b) / (b - a))|`.
///
/// ```
/// let c = hsaa::theory::bound_c(0.3, 0.9, 10).unwrap();
/// assert!(c < 0.024);
/// ```
pub fn bound_c(a: f64, b: f64, m: u32) -> Result<f64> {
    check_interval(a, b)?;
    let x = (2.0 * a * b - a - b) / (b - a);
    Ok(1.0 / chebyshev_t(m, x).abs())
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// `(2/T) * integral_0^T (cos(omega t) - 1/4) cos(lambda t) dt` with
/// `T = 2 pi / omega`.
pub fn waveholtz_beta(lambda: f64, omega: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let x = lambda * two_pi / omega;
    // sin(2 pi -+ x) = -+ sin x keeps beta(0) = -1/2 exact
    let y = two_pi - x;
    let first = if y.abs() < 0.5 { sinc(y) } else { -x.sin() / y };
    first + x.sin() / (two_pi + x) - 0.5 * sinc(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev_t(0, 7.5), 1.0);
        assert!((chebyshev_t(3, 0.5) + 1.0).abs() < 1e-15);
        let expect = (10.0 * 1.1f64.acosh()).cosh();
        assert!((chebyshev_t(10, 1.1) - expect).abs() < 1e-12);
        // exact rational recurrence value
        assert!((chebyshev_t(10, 1.1) - 42.2107827712).abs() < 1e-9);
        // odd degree at negative argument
        assert!((chebyshev_t(3, -2.0) - (4.0 * -8.0 + 6.0)).abs() < 1e-12);
        assert!((chebyshev_t(4, -2.0) - (8.0 * 16.0 - 8.0 * 4.0 + 1.0)).abs() < 1e-11);
    }

    #[test]
    fn chebyshev_recurrence() {
        for &x in &[-3.0, -1.0, -0.3, 0.0, 0.7, 1.0, 1.05, 4.0] {
            let (mut t0, mut t1) = (1.0, x);
            for m in 2..12u32 {
                let t2 = 2.0 * x * t1 - t0;
                assert!((chebyshev_t(m, x) - t2).abs() <= 1e-12 * t2.abs().max(1.0), "m={m} x={x}");
                (t0, t1) = (t1, t2);
            }
        }
    }

    #[test]
    fn bound_values() {
        let c = bound_c(0.3, 0.9, 10).unwrap();
        assert!((c - 0.0236906291319).abs() < 1e-12, "{c}");
        assert!(c <= 0.024);
        assert!(bound_c(2.0, 100.0, 10).unwrap() <= 3.84e-8);
        assert_eq!(bound_c(0.3, 0.9, 0).unwrap(), 1.0);
        assert!((bound_c(0.3, 0.9, 1).unwrap() - 0.6 / 0.66).abs() < 1e-14);
    }

    #[test]
    fn bound_rejects_bad_intervals() {
        for (a, b) in [(0.5, 1.5), (-0.5, 0.5), (0.9, 0.3), (0.4, 0.4), (1.0, 2.0), (0.0, 0.5)] {
            assert_eq!(bound_c(a, b, 3), Err(Error::InvalidInterval { a, b }));
        }
        assert!(bound_c(-3.0, -0.5, 4).is_ok());
    }

    #[test]
    fn beta_special_values() {
        let w = 25.0 * 2f64.sqrt();
        assert!((waveholtz_beta(0.0, w) + 0.5).abs() < 1e-14);
        assert!((waveholtz_beta(w, w) - 1.0).abs() < 1e-14);
        assert!(waveholtz_beta(2.0 * w, w).abs() < 1e-14);
    }

    #[test]
    fn beta_matches_quadrature() {
        let omega = 3.0;
        let t = 2.0 * std::f64::consts::PI / omega;
        for &lam in &[0.0, 0.5, 2.9, 3.0, 3.1, 7.0, 20.0] {
            // composite Simpson with many panels
            let n = 20_000;
            let dt = t / n as f64;
            let f = |s: f64| ((omega * s).cos() - 0.25) * (lam * s).cos();
            let mut acc = f(0.0) + f(t);
            for i in 1..n {
                acc += f(i as f64 * dt) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let quad = 2.0 / t * acc * dt / 3.0;
            assert!((waveholtz_beta(lam, omega) - quad).abs() < 1e-10, "lambda {lam}");
        }
    }

    #[test]
    fn beta_range_sweep() {
        let omega = 11.0;
        for i in 0..10_000 {
            let lam = 10.0 * omega * i as f64 / 9999.0;
            let b = waveholtz_beta(lam, omega);
            assert!((-0.5 - 1e-12..=1.0 + 1e-12).contains(&b), "lambda {lam}: {b}");
            if (lam - omega).abs() >= 0.01 * omega {
                assert!(b < 1.0 - 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn bound_nonincreasing(a in 0.01f64..0.95, w in 0.001f64..0.9, m in 0u32..50) {
            let b = (a + w).min(0.999);
            prop_assume!(a < b);
            let c0 = bound_c(a, b, m).unwrap();
            let c1 = bound_c(a, b, m + 1).unwrap();
            prop_assert!(c1 <= c0 * (1.0 + 1e-12));
        }

        #[test]
        fn bound_nonincreasing_above_one(a in 1.01f64..50.0, w in 0.1f64..100.0, m in 0u32..50) {
            let c0 = bound_c(a, a + w, m).unwrap();
            let c1 = bound_c(a, a + w, m + 1).unwrap();
            prop_assert!(c1 <= c0 * (1.0 + 1e-12));
        }
    }
}
