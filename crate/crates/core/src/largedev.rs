//! Large-deviation machinery for the rate deficit `R̄ - ln(1 + γX)`
//! with `X ~ Exp(1)`, and for the total rate `Y = Σ ln(1 + γ X_l)`.
//!
//! With `a = 1/γ` both log-MGFs reduce to the scaled incomplete gamma:
//! `Λ(ξ) = (R̄ - ln γ) ξ + ln(e^a Γ(1-ξ, a))` and
//! `ln M(ξ) = L [ξ ln γ + ln(e^a Γ(1+ξ, a))]`, so `Λ(ξ) = R̄ξ + ln M(-ξ)/L`.

use crate::error::{OutageError, Result};
use crate::metrics::ergodic_capacity;
use crate::specialfn::{ln_scaled_upper_gamma, tilted_log_moments, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub num_subchannels: usize,
    pub snr: f64,
}

impl ChannelSpec {
    pub fn new(num_subchannels: usize, snr: f64) -> Result<Self> {
        if num_subchannels < 1 || !(snr > 0.0) || !snr.is_finite() {
            return Err(OutageError::Domain(format!(
                "channel needs L >= 1 and a positive SNR, got L={num_subchannels}, snr={snr}"
            )));
        }
        Ok(ChannelSpec { num_subchannels, snr })
    }

    pub fn from_db(num_subchannels: usize, snr_db: f64) -> Result<Self> {
        ChannelSpec::new(num_subchannels, 10f64.powf(snr_db / 10.0))
    }

    pub fn l(&self) -> f64 {
        self.num_subchannels as f64
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr.log10()
    }

    /// `ln(1 + γ)`.
    pub fn c_awgn(&self) -> f64 {
        self.snr.ln_1p()
    }
}

/// Target rate in nats with its normalized forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub total_rate: f64,
    pub per_subchannel_rate: f64,
    pub multiplexing_gain: f64,
    pub avg_multiplexing_gain: f64,
}

impl RatePoint {
    pub fn from_total(total_rate: f64, channel: &ChannelSpec) -> Result<Self> {
        if !(total_rate >= 0.0) || !total_rate.is_finite() {
            return Err(OutageError::Domain(format!("rate must be finite and nonnegative, got {total_rate}")));
        }
        let l = channel.l();
        let r = total_rate / channel.c_awgn();
        Ok(RatePoint {
            total_rate,
            per_subchannel_rate: total_rate / l,
            multiplexing_gain: r,
            avg_multiplexing_gain: r / l,
        })
    }

    pub fn from_per_subchannel(rate: f64, channel: &ChannelSpec) -> Result<Self> {
        RatePoint::from_total(rate * channel.l(), channel)
    }

    /// Rate fixed by the average multiplexing gain: `R = r̄ L ln(1+γ)`.
    pub fn from_avg_multiplexing_gain(rbar: f64, channel: &ChannelSpec) -> Result<Self> {
        RatePoint::from_total(rbar * channel.l() * channel.c_awgn(), channel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltSolution {
    pub tilt: f64,
    pub rate_function_value: f64,
    pub curvature: Option<f64>,
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Per-subchannel log-MGF `Λ(ξ)` of the rate deficit.
pub fn log_mgf(tilt: f64, channel: &ChannelSpec, rate: &RatePoint) -> Result<f64> {
    log_mgf_with(tilt, channel, rate, &cfg())
}

pub fn log_mgf_with(tilt: f64, channel: &ChannelSpec, rate: &RatePoint, cfg: &QuadratureConfig) -> Result<f64> {
    if tilt == 0.0 {
        return Ok(0.0);
    }
    let a = 1.0 / channel.snr;
    let lz = ln_scaled_upper_gamma(1.0 - tilt, a, cfg)?;
    Ok((rate.per_subchannel_rate - channel.snr.ln()) * tilt + lz)
}

/// `(Λ'(ξ), Λ''(ξ))`.
pub fn log_mgf_derivs(tilt: f64, channel: &ChannelSpec, rate: &RatePoint) -> Result<(f64, f64)> {
    log_mgf_derivs_with(tilt, channel, rate, &cfg())
}

pub fn log_mgf_derivs_with(
    tilt: f64,
    channel: &ChannelSpec,
    rate: &RatePoint,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let m = tilted_log_moments(1.0 - tilt, 1.0 / channel.snr, cfg)?;
    Ok((rate.per_subchannel_rate - channel.snr.ln() - m.mean, m.var))
}

/// `ln M(ξ)` of the total rate `Y`.
pub fn total_log_mgf(tilt: f64, channel: &ChannelSpec) -> Result<f64> {
    if tilt == 0.0 {
        return Ok(0.0);
    }
    let lz = ln_scaled_upper_gamma(1.0 + tilt, 1.0 / channel.snr, &cfg())?;
    Ok(channel.l() * (tilt * channel.snr.ln() + lz))
}

/// `(d/dξ ln M, d²/dξ² ln M)`.
pub fn total_log_mgf_derivs(tilt: f64, channel: &ChannelSpec) -> Result<(f64, f64)> {
    let m = tilted_log_moments(1.0 + tilt, 1.0 / channel.snr, &cfg())?;
    let l = channel.l();
    Ok((l * (channel.snr.ln() + m.mean), l * m.var))
}

const ROOT_WIDTH: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 80;

/// Root of an increasing function on `[lo, hi]` by bisection, then Newton polish.
fn monotone_root(
    f: &dyn Fn(f64) -> Result<(f64, f64)>,
    mut lo: f64,
    mut hi: f64,
    context: &str,
) -> Result<f64> {
    for _ in 0..400 {
        if hi - lo <= ROOT_WIDTH * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)?.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let (v, d) = f(x)?;
        if v == 0.0 || !(d > 0.0) {
            break;
        }
        let next = x - v / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        x = next;
    }
    if !x.is_finite() {
        return Err(OutageError::numerical(context, f64::NAN));
    }
    Ok(x)
}

/// Positive root `Ξ(0)` of `Λ'(ξ) = 0`, with `Λ*(0) = -Λ(Ξ(0))` and `σ² = Λ''(Ξ(0))`.
pub fn solve_xi0(channel: &ChannelSpec, rate: &RatePoint) -> Result<TiltSolution> {
    solve_xi0_with(channel, rate, &cfg())
}

pub fn solve_xi0_with(channel: &ChannelSpec, rate: &RatePoint, cfg: &QuadratureConfig) -> Result<TiltSolution> {
    if rate.total_rate <= 0.0 {
        return Err(OutageError::Domain("exponents are unbounded at R = 0".into()));
    }
    let cbar = ergodic_capacity(channel.snr)?;
    if rate.total_rate >= channel.l() * cbar {
        return Err(OutageError::Regime(format!(
            "per-subchannel rate {} is not below the ergodic capacity {cbar}; use the high-rate bounds",
            rate.per_subchannel_rate
        )));
    }
    let f = |x: f64| log_mgf_derivs_with(x, channel, rate, cfg);
    let (mut lo, mut hi) = (1e-6, 1.0);
    if f(lo)?.0 >= 0.0 {
        hi = lo;
        lo = 0.0;
    } else {
        let mut n = 0;
        while f(hi)?.0 < 0.0 {
            lo = hi;
            hi *= 2.0;
            n += 1;
            if n > MAX_DOUBLINGS {
                return Err(OutageError::numerical("Ξ(0) bracket expansion", f64::NAN));
            }
        }
    }
    let xi = monotone_root(&f, lo, hi, "Ξ(0) root")?;
    let value = -log_mgf_with(xi, channel, rate, cfg)?;
    let (_, var) = f(xi)?;
    Ok(TiltSolution {
        tilt: xi,
        rate_function_value: value,
        curvature: Some(var),
    })
}

/// Negative root `Ξ(t)` of `d/dξ ln M(ξ) = t` for `0 < t < L C̄`.
/// `rate_function_value` is `Λ*_Y(t) = Ξ(t) t - ln M(Ξ(t))`.
pub fn solve_xi_t(t: f64, channel: &ChannelSpec) -> Result<TiltSolution> {
    let mean = channel.l() * ergodic_capacity(channel.snr)?;
    if !(t > 0.0) || t >= mean {
        return Err(OutageError::Domain(format!("Ξ(t) needs 0 < t < L C̄ = {mean}, got {t}")));
    }
    let f = |x: f64| total_log_mgf_derivs(x, channel).map(|(d1, d2)| (d1 - t, d2));
    let (mut lo, mut hi) = (-1.0, 0.0);
    let mut n = 0;
    while f(lo)?.0 > 0.0 {
        hi = lo;
        lo *= 2.0;
        n += 1;
        if n > MAX_DOUBLINGS {
            return Err(OutageError::numerical("Ξ(t) bracket expansion", f64::NAN));
        }
    }
    let xi = monotone_root(&f, lo, hi, "Ξ(t) root")?;
    let xi = xi.min(-f64::MIN_POSITIVE);
    Ok(TiltSolution {
        tilt: xi,
        rate_function_value: xi * t - total_log_mgf(xi, channel)?,
        curvature: None,
    })
}

/// `∫_lo^hi Ξ(t) dt` from the Legendre identity `d/dt [Ξ t - ln M(Ξ)] = Ξ`.
pub fn xi_integral(lo: f64, hi: f64, channel: &ChannelSpec) -> Result<f64> {
    let a = solve_xi_t(lo, channel)?;
    let b = solve_xi_t(hi, channel)?;
    Ok(b.rate_function_value - a.rate_function_value)
}

/// Tilted rate functions `(Λ*_α(δR), Λ*_α(R))` of the total rate, with
/// `Λ*_α(z) = R(α - z/R) Ξ(αR) - ∫_z^{αR} Ξ(t) dt`.
pub fn lf_transform_segment(alpha: f64, delta: f64, rate: &RatePoint, channel: &ChannelSpec) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && delta <= alpha) {
        return Err(OutageError::Domain(format!("segment needs 0 < δ <= α < 1, got α={alpha}, δ={delta}")));
    }
    let r = rate.total_rate;
    let xa = solve_xi_t(alpha * r, channel)?;
    let at_delta = if delta == alpha {
        0.0
    } else {
        let xd = solve_xi_t(delta * r, channel)?;
        r * (alpha - delta) * xa.tilt - (xa.rate_function_value - xd.rate_function_value)
    };
    let xr = solve_xi_t(r, channel)?;
    let at_one = r * (alpha - 1.0) * xa.tilt + (xr.rate_function_value - xa.rate_function_value);
    Ok((at_delta, at_one))
}

/// Chebyshev table of `Ξ` on `[lo, hi]`, integrated with Clenshaw-Curtis weights.
#[derive(Debug, Clone)]
pub struct XiTable {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    weights: Vec<f64>,
}

impl XiTable {
    pub const DEFAULT_NODES: usize = 129;

    pub fn new(lo: f64, hi: f64, num_nodes: usize, channel: &ChannelSpec) -> Result<Self> {
        if num_nodes < 3 || !(hi > lo) {
            return Err(OutageError::Domain(format!("XiTable needs >= 3 nodes and lo < hi, got {num_nodes}")));
        }
        let n = num_nodes - 1;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let nodes: Vec<f64> = (0..=n)
            .map(|j| mid + half * (std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        let values = nodes
            .iter()
            .map(|&t| solve_xi_t(t, channel).map(|s| s.tilt))
            .collect::<Result<Vec<_>>>()?;
        let weights = clenshaw_curtis(n).into_iter().map(|w| w * half).collect();
        Ok(XiTable { nodes, values, weights })
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|j| {
            let c = if j == 0 || j == n { 1.0 } else { 2.0 };
            let mut s = 0.0;
            for k in 1..=n / 2 {
                let b = if 2 * k == n { 1.0 } else { 2.0 };
                let kf = k as f64;
                s += b / (4.0 * kf * kf - 1.0) * (2.0 * kf * j as f64 * std::f64::consts::PI / nf).cos();
            }
            c / nf * (1.0 - s)
        })
        .collect()
}
