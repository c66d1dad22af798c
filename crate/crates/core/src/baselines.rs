//! Reference bounds: the Chernoff bound of Kaplan and Shamai and the
//! high-SNR product lower bound of Tse and Viswanath.

use crate::error::{OutageError, Result};
use crate::exponents::{BoundKind, ExponentBound, Regime};
use crate::largedev::{log_mgf, ChannelSpec, RatePoint};

/// `min_{λ≥0} e^{λR̄} [E(1+γX)^{-λ/L}]^L`, i.e. `exp(L min Λ(λ/L))`.
pub fn kaplan_shamai_bound(channel: &ChannelSpec, rate: &RatePoint) -> Result<ExponentBound> {
    if !(rate.total_rate > 0.0) {
        return Err(OutageError::Domain("Chernoff bound needs R > 0".into()));
    }
    let l = channel.l();
    let obj = |lam: f64| -> Result<f64> { Ok(l * log_mgf(lam / l, channel, rate)?) };
    let mut hi = 50.0 * l;
    let mut expansions = 0;
    let (lam, val) = loop {
        let (x, v) = golden_min(&obj, 0.0, hi, 1e-9 * hi)?;
        if x < hi * (1.0 - 1e-6) {
            break (x, v);
        }
        expansions += 1;
        if expansions > 8 {
            return Err(OutageError::numerical("Chernoff minimiser escaped its bracket", x));
        }
        hi *= 4.0;
    };
    let val = val.min(0.0);
    let mut b = ExponentBound {
        kind: BoundKind::Upper,
        coefficient: 1.0,
        exponent_rate: -val / l,
        probability: val.exp(),
        raw_probability: val.exp(),
        regime: Regime::LowRate,
        flag: None,
    };
    if lam == 0.0 {
        b.flag = Some("trivial".into());
    }
    Ok(b)
}

fn golden_min(f: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let v = f(x)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// `(1 - e^{-(e^{R̄}-1)/γ})^L`.
pub fn tse_viswanath_bound(channel: &ChannelSpec, rate: &RatePoint) -> Result<ExponentBound> {
    let l = channel.l();
    let single = -(-rate.per_subchannel_rate.exp_m1() / channel.snr).exp_m1();
    let p = single.powi(channel.num_subchannels as i32);
    Ok(ExponentBound {
        kind: BoundKind::Lower,
        coefficient: 1.0,
        exponent_rate: if p > 0.0 { -p.ln() / l } else { f64::INFINITY },
        probability: p.clamp(0.0, 1.0),
        raw_probability: p,
        regime: Regime::HighRate,
        flag: None,
    })
}
