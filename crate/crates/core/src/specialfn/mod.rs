//! Special-function kernels: incomplete gamma and its log-moments, the
//! exponential-product tail F_L and its density, the Erlang tail, and
//! modified Bessel functions used as reference values.
//!
//! Everything is computed from real integrals in the variable v = ln t,
//! where the gamma integrand exp(s v - e^v) is log-concave and can be
//! integrated after subtracting its peak.

pub mod bessel;
pub mod product;
pub mod quad;

pub use bessel::{bessel_k0, bessel_k1, x_k1_minus_one};
pub use product::{f_l, f_l_density, FLTable, ProductTail};
pub use quad::QuadratureConfig;

use crate::error::{OutageError, Result};
use quad::effective_support;

/// Peak of `s v - (e^v - a)` on `[ln a, ∞)`.
fn gamma_peak(s: f64, a: f64) -> f64 {
    if s > a {
        s.ln()
    } else {
        a.ln()
    }
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(OutageError::Domain(format!("incomplete gamma lower limit must be positive, got {a}")))
    }
}

/// `ln(e^a Γ(s, a))`, the scaled incomplete gamma in log form.
pub fn ln_scaled_upper_gamma(s: f64, a: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_a(a)?;
    let la = a.ln();
    let g = move |v: f64| s * v - a * (v - la).exp_m1();
    quad::ln_integral_unimodal(g, la, f64::INFINITY, gamma_peak(s, a), cfg)
}

/// Upper incomplete gamma `Γ(s, a) = ∫_a^∞ e^{-t} t^{s-1} dt` for any real `s`.
pub fn upper_incomplete_gamma(s: f64, a: f64) -> Result<f64> {
    upper_incomplete_gamma_with(s, a, &QuadratureConfig::default())
}

pub fn upper_incomplete_gamma_with(s: f64, a: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok((ln_scaled_upper_gamma(s, a, cfg)? - a).exp())
}

/// Log-normalizer, mean and variance of v under the density
/// proportional to `exp(s v - e^v)` on `[ln a, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMoments {
    pub ln_scaled: f64,
    pub mean: f64,
    pub var: f64,
}

pub fn tilted_log_moments(s: f64, a: f64, cfg: &QuadratureConfig) -> Result<LogMoments> {
    check_a(a)?;
    let la = a.ln();
    let g = move |v: f64| s * v - a * (v - la).exp_m1();
    let sup = effective_support(&g, la, f64::INFINITY, gamma_peak(s, a))?;
    let w = |v: f64| (g(v) - sup.log_peak).exp();
    let int = |h: &dyn Fn(f64) -> f64| -> Result<f64> {
        let lo = quad::integrate(h, sup.left, sup.peak, cfg)?;
        let hi = quad::integrate(h, sup.peak, sup.right, cfg)?;
        Ok(lo.value + hi.value)
    };
    let c = sup.peak;
    let z = int(&|v| w(v))?;
    let m = int(&|v| (v - c) * w(v))? / z;
    let var = int(&|v| {
        let d = v - c - m;
        d * d * w(v)
    })? / z;
    Ok(LogMoments {
        ln_scaled: sup.log_peak + z.ln(),
        mean: c + m,
        var,
    })
}

/// Log-moment `∫_a^∞ t^{b-1} (ln t)^k e^{-t} dt` for `k ∈ {0, 1, 2}`.
pub fn gamma_log_moment(b: f64, a: f64, k: u32) -> Result<f64> {
    gamma_log_moment_with(b, a, k, &QuadratureConfig::default())
}

pub fn gamma_log_moment_with(b: f64, a: f64, k: u32, cfg: &QuadratureConfig) -> Result<f64> {
    match k {
        0 => upper_incomplete_gamma_with(b, a, cfg),
        1 | 2 => {
            let m = tilted_log_moments(b, a, cfg)?;
            let scale = (m.ln_scaled - a).exp();
            Ok(if k == 1 {
                scale * m.mean
            } else {
                scale * (m.var + m.mean * m.mean)
            })
        }
        _ => Err(OutageError::Domain(format!("log-moment order must be 0, 1 or 2, got {k}"))),
    }
}

/// Erlang tail `Σ_{k<L} e^{-x} x^k / k!`, i.e. `Γ(L, x)/(L-1)!`.
pub fn erlang_tail(l: usize, x: f64) -> Result<f64> {
    if l < 1 || !(x >= 0.0) {
        return Err(OutageError::Domain(format!("erlang_tail needs L >= 1 and x >= 0, got L={l}, x={x}")));
    }
    let mut term = (-x).exp();
    let mut sum = term;
    for k in 1..l {
        term *= x / k as f64;
        sum += term;
    }
    Ok(sum.min(1.0))
}
