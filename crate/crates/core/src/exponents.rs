//! Outage bounds built from the exponent machinery: saddle-point upper
//! bound, tilted lower bound, product-tail bounds for high rates, the
//! low-SNR Erlang approximation and the calibrated high-SNR form with its
//! exponent decomposition.

use crate::error::{OutageError, Result};
use crate::largedev::{solve_xi0, solve_xi_t, ChannelSpec, RatePoint};
use crate::montecarlo::MCEstimate;
use crate::specialfn::{erlang_tail, ProductTail};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    LowRate,
    HighRate,
    LowSnr,
}

/// `probability = min(1, max(0, raw_probability))`, nominally
/// `coefficient · e^{-L · exponent_rate}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentBound {
    pub kind: BoundKind,
    pub coefficient: f64,
    pub exponent_rate: f64,
    pub probability: f64,
    pub raw_probability: f64,
    pub regime: Regime,
    pub flag: Option<String>,
}

impl ExponentBound {
    fn new(kind: BoundKind, regime: Regime, coefficient: f64, exponent_rate: f64, raw: f64) -> Self {
        ExponentBound {
            kind,
            coefficient,
            exponent_rate,
            probability: raw.clamp(0.0, 1.0),
            raw_probability: raw,
            regime,
            flag: None,
        }
    }

    /// Wraps a directly computed probability, with `E = -ln(p)/L`.
    fn from_probability(kind: BoundKind, regime: Regime, raw: f64, l: f64) -> Self {
        let e = if raw > 0.0 { -raw.ln() / l } else { f64::INFINITY };
        let mut b = ExponentBound::new(kind, regime, 1.0, e, raw);
        if raw > 1.0 || raw < 0.0 {
            b.flag = Some("clamped".into());
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerLDParams {
    pub alpha: f64,
    pub delta: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliableFunctionParts {
    pub e11: f64,
    pub e10: f64,
    pub e0: f64,
    pub lambda_cal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaCalibration {
    pub lambda: f64,
    pub clamped: bool,
}

/// Saddle-point upper bound `e^{-LΛ*(0)} / (√(2πL) σ Ξ(0))`.
pub fn upper_exponent(channel: &ChannelSpec, rate: &RatePoint) -> Result<ExponentBound> {
    let s = solve_xi0(channel, rate)?;
    let l = channel.l();
    let sigma = s.curvature.unwrap_or(0.0).sqrt();
    let coefficient = 1.0 / ((2.0 * std::f64::consts::PI * l).sqrt() * sigma * s.tilt);
    let raw = coefficient * (-l * s.rate_function_value).exp();
    let mut b = ExponentBound::new(BoundKind::Upper, Regime::LowRate, coefficient, s.rate_function_value, raw);
    if raw > 1.0 {
        b.flag = Some("clamped".into());
    }
    Ok(b)
}

struct AlphaEval {
    ln_bound: f64,
    delta: f64,
    prefactor: f64,
    l_e1: f64,
}

/// Lower bound at one α. `None` when δ or the prefactor is not positive.
fn lower_at_alpha(alpha: f64, rate: &RatePoint, channel: &ChannelSpec, ls_r: f64) -> Result<Option<AlphaEval>> {
    let r = rate.total_rate;
    let xa = solve_xi_t(alpha * r, channel)?;
    let xi = xa.tilt;
    let ln_m = xi * alpha * r - xa.rate_function_value;
    // Λ*_α(z) = Λ*_Y(z) - (ξ_α z - ln M(ξ_α))
    let a_one = ls_r - (xi * r - ln_m);
    let e_a = (-a_one).exp();
    let delta = (alpha - e_a) / (1.0 - e_a);
    if !(delta > 0.0) {
        return Ok(None);
    }
    let a_delta = if delta >= alpha {
        0.0
    } else {
        solve_xi_t(delta * r, channel)?.rate_function_value - (xi * delta * r - ln_m)
    };
    let prefactor = -(-a_one).exp_m1() - (-a_delta).exp();
    if !(prefactor > 0.0) {
        return Ok(None);
    }
    let l_e1 = xi * delta * r - ln_m;
    Ok(Some(AlphaEval {
        ln_bound: prefactor.ln() - l_e1,
        delta,
        prefactor,
        l_e1,
    }))
}

/// Tilted lower bound: best α on a 0.05 grid, refined by golden section.
pub fn lower_exponent_ld(channel: &ChannelSpec, rate: &RatePoint) -> Result<(ExponentBound, LowerLDParams)> {
    // regime and domain checks shared with the upper bound
    solve_xi0(channel, rate)?;
    let ls_r = solve_xi_t(rate.total_rate, channel)?.rate_function_value;
    let score = |a: f64| -> Result<f64> {
        Ok(lower_at_alpha(a, rate, channel, ls_r)?.map_or(f64::NEG_INFINITY, |e| e.ln_bound))
    };
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for k in 1..=19 {
        let a = 0.05 * k as f64;
        let v = score(a)?;
        if v > best.0 {
            best = (v, a);
        }
    }
    let l = channel.l();
    if !best.0.is_finite() {
        let mut b = ExponentBound::new(BoundKind::Lower, Regime::LowRate, 0.0, f64::INFINITY, 0.0);
        b.flag = Some("no_feasible_alpha".into());
        return Ok((b, LowerLDParams { alpha: f64::NAN, delta: f64::NAN, prefactor: 0.0 }));
    }
    let mut lo = (best.1 - 0.05).max(1e-6);
    let mut hi = (best.1 + 0.05).min(1.0 - 1e-6);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (score(x1)?, score(x2)?);
    while hi - lo > 1e-4 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = score(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = score(x2)?;
        }
    }
    for (v, a) in [(f1, x1), (f2, x2)] {
        if v > best.0 {
            best = (v, a);
        }
    }
    let e = lower_at_alpha(best.1, rate, channel, ls_r)?.expect("best alpha is feasible");
    let b = ExponentBound::new(BoundKind::Lower, Regime::LowRate, e.prefactor, e.l_e1 / l, e.ln_bound.exp());
    Ok((
        b,
        LowerLDParams {
            alpha: best.1,
            delta: e.delta,
            prefactor: e.prefactor,
        },
    ))
}

fn ln_z_of(channel: &ChannelSpec, shift: f64, rate: &RatePoint) -> f64 {
    // ln((e^R - shift)/γ^L)
    let r = rate.total_rate;
    let num = if shift == 0.0 { r } else { r.exp_m1().ln() };
    num - channel.l() * channel.snr.ln()
}

/// Product-tail bounds `1 - F_L((e^R-1)/γ^L)` and `1 - e^{L/γ} F_L(e^R/γ^L)`.
pub fn high_rate_bounds(channel: &ChannelSpec, rate: &RatePoint) -> Result<(ExponentBound, ExponentBound)> {
    if !(rate.total_rate > 0.0) {
        return Err(OutageError::Domain("product-tail bounds need R > 0".into()));
    }
    let l = channel.l();
    let pt = ProductTail::global();
    let (_, ln_g_up) = pt.ln_tail_pair(channel.num_subchannels, ln_z_of(channel, 1.0, rate).exp())?;
    let (ln_f_lo, _) = pt.ln_tail_pair(channel.num_subchannels, ln_z_of(channel, 0.0, rate).exp())?;
    let upper = ln_g_up.exp();
    let lower = -(l / channel.snr + ln_f_lo).exp_m1();
    Ok((
        ExponentBound::from_probability(BoundKind::Upper, Regime::HighRate, upper, l),
        ExponentBound::from_probability(BoundKind::Lower, Regime::HighRate, lower, l),
    ))
}

/// `1 - Γ(L, r)/(L-1)!`, a function of the multiplexing gain only.
pub fn low_snr_outage(channel: &ChannelSpec, rate: &RatePoint) -> Result<f64> {
    Ok((1.0 - erlang_tail(channel.num_subchannels, rate.multiplexing_gain)?).clamp(0.0, 1.0))
}

/// λ with `1 - e^{λ} F_L(e^{R₁}) = anchor`, where `R₁ = r̄ L ln 2` is the
/// rate at 0 dB for the same average multiplexing gain.
pub fn calibrate_lambda(channel: &ChannelSpec, rate: &RatePoint, anchor: &MCEstimate) -> Result<LambdaCalibration> {
    let l = channel.l();
    let p = anchor.p_hat;
    let unit = ChannelSpec::new(channel.num_subchannels, 1.0)?;
    let r1 = RatePoint::from_avg_multiplexing_gain(rate.avg_multiplexing_gain, &unit)?;
    let (ln_f, _) = ProductTail::global().ln_tail_pair(channel.num_subchannels, r1.total_rate.exp())?;
    let lambda = if p >= 1.0 { f64::NEG_INFINITY } else { (-p).ln_1p() - ln_f };
    if lambda.is_nan() {
        return Err(OutageError::numerical("λ calibration", lambda));
    }
    let clamped = lambda.clamp(0.0, l);
    Ok(LambdaCalibration {
        lambda: clamped,
        clamped: clamped != lambda,
    })
}

fn check_lambda(channel: &ChannelSpec, lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda < channel.l()) {
        return Err(OutageError::Domain(format!("λ must lie in [0, L), got {lambda}")));
    }
    Ok(())
}

/// `f(γ) = ln(1 - e^{λ/γ} F_L((1+γ)^r/γ^L))`, the log of the calibrated outage.
pub fn ln_calibrated_outage(channel: &ChannelSpec, rate: &RatePoint, lambda: f64) -> Result<f64> {
    check_lambda(channel, lambda)?;
    let (ln_f, _) = ProductTail::global().ln_tail_pair(channel.num_subchannels, ln_z_of(channel, 0.0, rate).exp())?;
    let d = -(lambda / channel.snr + ln_f).exp_m1();
    if !(d > 0.0) {
        return Err(OutageError::Range(format!("calibrated outage is not positive ({d:e})")));
    }
    Ok(d.ln())
}

pub fn calibrated_outage(channel: &ChannelSpec, rate: &RatePoint, lambda: f64) -> Result<ExponentBound> {
    check_lambda(channel, lambda)?;
    let (ln_f, _) = ProductTail::global().ln_tail_pair(channel.num_subchannels, ln_z_of(channel, 0.0, rate).exp())?;
    let raw = -(lambda / channel.snr + ln_f).exp_m1();
    Ok(ExponentBound::from_probability(BoundKind::Lower, Regime::HighRate, raw, channel.l()))
}

/// Split of `-γ f'(γ)` into the `E_{1,1}`, `E_{1,0}`, `E_0` terms; the bound
/// carries `exp(-L[(1 - r/L) E_{1,1} + E_{1,0} + E_0/L])`.
pub fn reliable_function_high(
    channel: &ChannelSpec,
    rate: &RatePoint,
    lambda_cal: f64,
) -> Result<(ReliableFunctionParts, ExponentBound)> {
    check_lambda(channel, lambda_cal)?;
    let l = channel.l();
    let r = rate.multiplexing_gain;
    if !(r < l) {
        return Err(OutageError::Domain(format!("multiplexing gain must be below L, got {r}")));
    }
    let g = channel.snr;
    let z = ln_z_of(channel, 0.0, rate).exp();
    let pt = ProductTail::global();
    let (ln_f, _) = pt.ln_tail_pair(channel.num_subchannels, z)?;
    let ln_zf = pt.ln_z_density(channel.num_subchannels, z)?;
    let shift = lambda_cal / g;
    let d = -(shift + ln_f).exp_m1();
    if d < 1e-15 {
        return Err(OutageError::Range(format!("1 - e^(λ/γ) F_L = {d:e} is below 1e-15")));
    }
    let e11 = g / (1.0 + g) * (ln_zf + shift).exp() / d;
    let e10 = e11 / g;
    let e0 = -shift * (shift + ln_f).exp() / d;
    let exponent = (1.0 - r / l) * e11 + e10 + e0 / l;
    let bound = ExponentBound::new(BoundKind::Lower, Regime::HighRate, 1.0, exponent, (-l * exponent).exp());
    Ok((
        ReliableFunctionParts {
            e11,
            e10,
            e0,
            lambda_cal,
        },
        bound,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ergodic_capacity;
    use crate::montecarlo::outage_mc;
    use proptest::prelude::*;

    fn setup(l: usize, db: f64, rbar: f64) -> (ChannelSpec, RatePoint) {
        let c = ChannelSpec::from_db(l, db).unwrap();
        let r = RatePoint::from_avg_multiplexing_gain(rbar, &c).unwrap();
        (c, r)
    }

    #[test]
    fn upper_bound_dominates_single_channel_exact() {
        let c = ChannelSpec::new(1, 1.0).unwrap();
        let r = RatePoint::from_per_subchannel(0.2, &c).unwrap();
        let b = upper_exponent(&c, &r).unwrap();
        let exact = -(-(0.2f64.exp_m1())).exp_m1();
        assert!(b.raw_probability >= exact, "{} < {exact}", b.raw_probability);
        assert_eq!(b.kind, BoundKind::Upper);
    }

    #[test]
    fn upper_bound_degenerates_at_capacity() {
        let c = ChannelSpec::new(4, 10.0).unwrap();
        let cbar = ergodic_capacity(10.0).unwrap();
        let near = |f: f64| upper_exponent(&c, &RatePoint::from_per_subchannel(f * cbar, &c).unwrap()).unwrap();
        let (a, b) = (near(0.99), near(0.9999));
        assert!(b.exponent_rate < a.exponent_rate);
        assert!(b.coefficient > a.coefficient);
        let over = RatePoint::from_per_subchannel(1.1 * cbar, &c).unwrap();
        assert!(matches!(upper_exponent(&c, &over), Err(OutageError::Regime(_))));
    }

    #[test]
    fn lower_below_upper_grid() {
        for &l in &[2, 4] {
            for &db in &[0.0, 10.0] {
                for &rb in &[0.1, 0.3, 0.5] {
                    let (c, r) = setup(l, db, rb);
                    let Ok(up) = upper_exponent(&c, &r) else { continue };
                    let (lo, p) = lower_exponent_ld(&c, &r).unwrap();
                    assert!(lo.raw_probability <= up.raw_probability, "L={l} db={db} rb={rb}");
                    if lo.flag.is_none() {
                        assert!(p.prefactor > 0.0 && p.prefactor < 1.0);
                        assert!(p.delta > 0.0 && p.delta < p.alpha);
                    }
                }
            }
        }
    }

    #[test]
    fn lower_bound_params_satisfy_delta_relation() {
        let (c, r) = setup(4, 10.0, 0.3);
        let (_, p) = lower_exponent_ld(&c, &r).unwrap();
        let (_, a_one) = crate::largedev::lf_transform_segment(p.alpha, p.delta, &r, &c).unwrap();
        let e = (-a_one).exp();
        let delta = (p.alpha - e) / (1.0 - e);
        assert!((delta - p.delta).abs() < 1e-8);
    }

    #[test]
    fn lower_matches_segment_transform() {
        // prefactor recomputed from the integral form of the two transforms
        let (c, r) = setup(2, 10.0, 0.3);
        let (_, p) = lower_exponent_ld(&c, &r).unwrap();
        let (ad, a1) = crate::largedev::lf_transform_segment(p.alpha, p.delta, &r, &c).unwrap();
        let pre = 1.0 - (-a1).exp() - (-ad).exp();
        assert!((pre - p.prefactor).abs() < 1e-9);
    }

    #[test]
    fn bounds_sandwich_monte_carlo_low_rate() {
        for &(l, db, rb) in &[(2, 0.0, 0.1), (2, 10.0, 0.3), (4, 0.0, 0.3)] {
            let (c, r) = setup(l, db, rb);
            let mc = outage_mc(&c, &r, 400_000, 3).unwrap();
            let up = upper_exponent(&c, &r).unwrap();
            let (lo, _) = lower_exponent_ld(&c, &r).unwrap();
            assert!(lo.raw_probability <= mc.p_hat + 3.0 * mc.stderr);
            assert!(mc.p_hat <= up.raw_probability + 3.0 * mc.stderr);
        }
    }

    #[test]
    fn high_rate_single_channel_is_exact() {
        for &g in &[0.5, 3.0, 40.0] {
            let c = ChannelSpec::new(1, g).unwrap();
            let r = RatePoint::from_total(1.3, &c).unwrap();
            let (up, lo) = high_rate_bounds(&c, &r).unwrap();
            let exact = -(-(1.3f64.exp_m1()) / g).exp_m1();
            assert!((up.raw_probability - exact).abs() < 1e-12);
            assert!(up.raw_probability >= lo.raw_probability);
        }
    }

    #[test]
    fn high_rate_bounds_merge_at_high_snr() {
        let (c, r) = setup(4, 60.0, 0.8);
        let (up, lo) = high_rate_bounds(&c, &r).unwrap();
        assert!((lo.raw_probability / up.raw_probability - 1.0).abs() < 0.01);
    }

    #[test]
    fn high_rate_lower_clamps_at_low_snr() {
        let (c, r) = setup(4, -10.0, 0.8);
        let (up, lo) = high_rate_bounds(&c, &r).unwrap();
        assert!(lo.raw_probability < 0.0);
        assert_eq!(lo.probability, 0.0);
        assert!(up.probability > 0.0);
    }

    #[test]
    fn low_snr_examples() {
        let c = ChannelSpec::new(1, 0.1).unwrap();
        let r = RatePoint::from_total(0.7 * c.c_awgn(), &c).unwrap();
        assert!((low_snr_outage(&c, &r).unwrap() - (1.0 - (-0.7f64).exp())).abs() < 1e-12);
        let c = ChannelSpec::new(4, 0.05).unwrap();
        let r = RatePoint::from_total(3.2 * c.c_awgn(), &c).unwrap();
        assert!((low_snr_outage(&c, &r).unwrap() - 0.39748).abs() < 1e-5);
    }

    #[test]
    fn low_snr_depends_only_on_r() {
        let a = ChannelSpec::new(3, 0.01).unwrap();
        let b = ChannelSpec::new(3, 100.0).unwrap();
        let ra = RatePoint::from_avg_multiplexing_gain(0.6, &a).unwrap();
        let rb = RatePoint::from_avg_multiplexing_gain(0.6, &b).unwrap();
        assert_eq!(low_snr_outage(&a, &ra).unwrap(), low_snr_outage(&b, &rb).unwrap());
    }

    fn anchor(p: f64) -> MCEstimate {
        MCEstimate {
            p_hat: p,
            stderr: 0.0,
            trials: 1,
            seed: 0,
            hits: 0,
        }
    }

    #[test]
    fn lambda_calibration_endpoints() {
        let (c, r) = setup(4, 10.0, 0.8);
        let unit = ChannelSpec::new(4, 1.0).unwrap();
        let r1 = RatePoint::from_avg_multiplexing_gain(0.8, &unit).unwrap();
        let (_, lo) = high_rate_bounds(&unit, &r1).unwrap();
        let cal = calibrate_lambda(&c, &r, &anchor(lo.raw_probability)).unwrap();
        assert!((cal.lambda - 4.0).abs() < 1e-9);
        let top = 1.0 - crate::specialfn::f_l(4, r1.total_rate.exp()).unwrap();
        let cal = calibrate_lambda(&c, &r, &anchor(top)).unwrap();
        assert!(cal.lambda.abs() < 1e-9);
        let cal = calibrate_lambda(&c, &r, &anchor(0.999)).unwrap();
        assert!(cal.clamped && cal.lambda == 0.0);
        let cal = calibrate_lambda(&c, &r, &anchor(1.0)).unwrap();
        assert!(cal.clamped && cal.lambda == 0.0);
    }

    #[test]
    fn lambda_calibration_reproduces_anchor() {
        let (c, r) = setup(4, 10.0, 0.8);
        let cal = calibrate_lambda(&c, &r, &anchor(0.6)).unwrap();
        assert!(!cal.clamped);
        let unit = ChannelSpec::new(4, 1.0).unwrap();
        let r1 = RatePoint::from_avg_multiplexing_gain(0.8, &unit).unwrap();
        let back = calibrated_outage(&unit, &r1, cal.lambda).unwrap();
        assert!((back.raw_probability - 0.6).abs() < 1e-10);
    }

    #[test]
    fn decomposition_reassembles_log_derivative() {
        for &l in &[2, 4] {
            for &db in &[10.0, 20.0] {
                for &rb in &[0.8, 0.9] {
                    let (c, r) = setup(l, db, rb);
                    let lam = 0.5;
                    let (parts, b) = reliable_function_high(&c, &r, lam).unwrap();
                    assert!((parts.e10 - parts.e11 / c.snr).abs() <= 1e-12 * parts.e10.abs());
                    // central difference of f at fixed r in ln γ
                    let f = |lg: f64| {
                        let ch = ChannelSpec::new(l, lg.exp()).unwrap();
                        let rr = RatePoint::from_total(r.multiplexing_gain * ch.c_awgn(), &ch).unwrap();
                        ln_calibrated_outage(&ch, &rr, lam).unwrap()
                    };
                    let h = 1e-4;
                    let lg = c.snr.ln();
                    let gf = (f(lg + h) - f(lg - h)) / (2.0 * h);
                    let recon = -(c.l()) * b.exponent_rate;
                    assert!((recon - gf).abs() < 1e-6 * gf.abs().max(1.0), "L={l} db={db} rb={rb}");
                }
            }
        }
    }

    #[test]
    fn decomposition_range_error() {
        // deep zero-outage corner: tiny rate at high SNR
        let c = ChannelSpec::from_db(4, 60.0).unwrap();
        let r = RatePoint::from_avg_multiplexing_gain(0.01, &c).unwrap();
        assert!(matches!(reliable_function_high(&c, &r, 0.0), Err(OutageError::Range(_))));
        assert!(reliable_function_high(&c, &r, 4.0).is_err());
    }

    #[test]
    fn e0_vanishes_relative_to_ln_gamma() {
        let (c, r) = setup(4, 60.0, 0.8);
        let (p, _) = reliable_function_high(&c, &r, 3.0).unwrap();
        assert!(p.e0.abs() / c.snr.ln() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn bounds_monotone_in_snr(db in 0.0f64..30.0, rb in 0.05f64..0.5) {
            let (c1, r1) = setup(4, db, rb);
            let (c2, r2) = setup(4, db + 2.0, rb);
            let a = upper_exponent(&c1, &r1).unwrap().raw_probability;
            let b = upper_exponent(&c2, &r2).unwrap().raw_probability;
            prop_assert!(b < a);
            // the product-tail family is intended for γ >= 10 dB
            let (c1, r1) = setup(4, db + 10.0, 0.8);
            let (c2, r2) = setup(4, db + 12.0, 0.8);
            let (ua, la) = high_rate_bounds(&c1, &r1).unwrap();
            let (ub, lb) = high_rate_bounds(&c2, &r2).unwrap();
            prop_assert!(ub.raw_probability <= ua.raw_probability);
            prop_assert!(lb.raw_probability <= la.raw_probability);
        }

        #[test]
        fn bounds_monotone_in_rate(db in 0.0f64..30.0, rb in 0.05f64..0.5) {
            let c = ChannelSpec::from_db(3, db).unwrap();
            let r1 = RatePoint::from_avg_multiplexing_gain(rb, &c).unwrap();
            let r2 = RatePoint::from_avg_multiplexing_gain(rb * 1.05, &c).unwrap();
            if let (Ok(a), Ok(b)) = (upper_exponent(&c, &r1), upper_exponent(&c, &r2)) {
                prop_assert!(b.raw_probability > a.raw_probability);
            }
            let (ua, la) = high_rate_bounds(&c, &r1).unwrap();
            let (ub, lb) = high_rate_bounds(&c, &r2).unwrap();
            prop_assert!(ub.raw_probability >= ua.raw_probability);
            prop_assert!(lb.raw_probability >= la.raw_probability);
        }

        #[test]
        fn upper_decreases_in_l(db in 0.0f64..20.0, frac in 0.2f64..0.9) {
            let p = |l: usize| {
                let c = ChannelSpec::from_db(l, db).unwrap();
                let cbar = ergodic_capacity(c.snr).unwrap();
                let r = RatePoint::from_per_subchannel(frac * cbar, &c).unwrap();
                upper_exponent(&c, &r).unwrap().raw_probability
            };
            prop_assert!(p(4) < p(2));
        }

        #[test]
        fn high_rate_ordering(l in 1usize..7, db in -10.0f64..50.0, rb in 0.3f64..1.2) {
            let (c, r) = setup(l, db, rb);
            let (up, lo) = high_rate_bounds(&c, &r).unwrap();
            // the two coincide analytically at L = 1
            prop_assert!(up.raw_probability >= lo.raw_probability - 1e-12 * up.raw_probability.abs());
            prop_assert!(up.probability >= 0.0 && up.probability <= 1.0);
        }
    }
}
