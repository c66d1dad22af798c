//! Capacity and tradeoff metrics.

use crate::error::{OutageError, Result};
use crate::exponents::{ln_calibrated_outage, reliable_function_high, upper_exponent};
use crate::largedev::{solve_xi0, ChannelSpec, RatePoint};
use crate::specialfn::{ln_scaled_upper_gamma, QuadratureConfig};

/// Ordered `(x, y)` series with strictly increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(OutageError::Domain("a curve needs at least 2 points".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(OutageError::Domain("curve abscissae must be strictly increasing".into()));
        }
        Ok(Curve { label: label.into(), points })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeVariant {
    LowRate,
    HighRate,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeTag {
    pub variant: RegimeVariant,
    pub threshold: f64,
}

pub const REGIME_MARGIN: f64 = 0.02;

pub fn awgn_capacity(snr: f64) -> f64 {
    snr.ln_1p()
}

/// `C̄ = e^{1/γ} Γ(0, 1/γ)`.
pub fn ergodic_capacity(snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(OutageError::Domain(format!("SNR must be positive, got {snr}")));
    }
    Ok(ln_scaled_upper_gamma(0.0, 1.0 / snr, &QuadratureConfig::default())?.exp())
}

/// ε-outage capacity per subchannel: the rate at which the saddle-point
/// upper bound equals ε. The fixed-point form of the closed expression
/// seeds a bisection in `R̄ ∈ (0, C̄)`.
pub fn outage_capacity_bound(channel: &ChannelSpec, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(OutageError::Domain(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let cbar = ergodic_capacity(channel.snr)?;
    let l = channel.l();
    let target = epsilon.ln();
    let ln_p = |rbar: f64| -> Result<f64> {
        let r = RatePoint::from_per_subchannel(rbar, channel)?;
        Ok(upper_exponent(channel, &r)?.raw_probability.ln())
    };
    let guess = {
        let r = RatePoint::from_per_subchannel(0.5 * cbar, channel)?;
        let s = solve_xi0(channel, &r)?;
        let xi = s.tilt;
        let sigma = s.curvature.unwrap_or(0.0).sqrt();
        let lz = ln_scaled_upper_gamma(1.0 - xi, 1.0 / channel.snr, &QuadratureConfig::default())?;
        let c = (epsilon * (2.0 * std::f64::consts::PI * l).sqrt() * sigma * xi).ln() / l;
        channel.snr.ln() + (c - lz) / xi
    };
    let (mut lo, mut hi) = (0.0, cbar);
    let mut x = if guess > 0.0 && guess < cbar { guess } else { 0.5 * cbar };
    for _ in 0..200 {
        let v = ln_p(x)?;
        if (v - target).abs() < 1e-8 || hi - lo < 1e-15 * cbar {
            return Ok(x);
        }
        if v > target {
            hi = x;
        } else {
            lo = x;
        }
        x = 0.5 * (lo + hi);
    }
    Err(OutageError::numerical("ε-outage capacity bisection", x))
}

/// `r₀(γ) = C̄ / C_awgn`.
pub fn r0_curve(snr: f64) -> Result<f64> {
    Ok(ergodic_capacity(snr)? / awgn_capacity(snr))
}

/// Golden-section minimum of `r₀` over `ln γ ∈ [ln 10⁻², ln 10⁴]`.
pub fn r0_minimum() -> Result<(f64, f64)> {
    r0_minimum_in(1e-2, 1e4)
}

pub fn r0_minimum_in(lo: f64, hi: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |u: f64| r0_curve(u.exp());
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-9 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    let u = 0.5 * (a + b);
    Ok((u.exp(), f(u)?))
}

/// Finite-SNR diversity `-γ f'(γ)` of the calibrated high-SNR outage.
pub fn finite_snr_dmt(channel: &ChannelSpec, rate: &RatePoint, lambda_cal: f64) -> Result<f64> {
    let (_, b) = reliable_function_high(channel, rate, lambda_cal)?;
    Ok(channel.l() * b.exponent_rate)
}

/// `-∂ ln p/∂ ln γ` of the calibrated outage by central differences at fixed `r`.
pub fn finite_snr_dmt_fd(channel: &ChannelSpec, rate: &RatePoint, lambda_cal: f64) -> Result<f64> {
    let h = 1e-4;
    let lg = channel.snr.ln();
    let r = rate.multiplexing_gain;
    let at = |u: f64| -> Result<f64> {
        let c = ChannelSpec::new(channel.num_subchannels, u.exp())?;
        let rr = RatePoint::from_total(r * c.c_awgn(), &c)?;
        ln_calibrated_outage(&c, &rr, lambda_cal)
    };
    Ok(-(at(lg + h)? - at(lg - h)?) / (2.0 * h))
}

/// `-d ln p / d ln γ` of the saddle-point upper bound at fixed r, by central difference.
pub fn saddle_point_dmt(channel: &ChannelSpec, rate: &RatePoint) -> Result<f64> {
    let h = 1e-4;
    let lg = channel.snr.ln();
    let r = rate.multiplexing_gain;
    let at = |u: f64| -> Result<f64> {
        let c = ChannelSpec::new(channel.num_subchannels, u.exp())?;
        let rr = RatePoint::from_total(r * c.c_awgn(), &c)?;
        Ok(upper_exponent(&c, &rr)?.raw_probability.ln())
    };
    Ok(-(at(lg + h)? - at(lg - h)?) / (2.0 * h))
}

pub fn asymptotic_dmt(l: usize, r: f64) -> Result<f64> {
    let lf = l as f64;
    if !(0.0..=lf).contains(&r) {
        return Err(OutageError::Domain(format!("multiplexing gain must lie in [0, L], got {r}")));
    }
    Ok(lf * (1.0 - r / lf))
}

/// dB abscissa where the curve crosses `log10 p`, by linear interpolation.
fn crossing(curve: &Curve, lp: f64) -> Result<f64> {
    for w in curve.points.windows(2) {
        let (x0, p0) = w[0];
        let (x1, p1) = w[1];
        if !(p0 > 0.0 && p1 > 0.0) {
            return Err(OutageError::Domain(format!("curve '{}' has a nonpositive value", curve.label)));
        }
        let (y0, y1) = (p0.log10(), p1.log10());
        if (y0 - lp) * (y1 - lp) <= 0.0 {
            if y0 == y1 {
                return Ok(x0);
            }
            return Ok(x0 + (lp - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    Err(OutageError::Domain(format!("target probability is outside the range of curve '{}'", curve.label)))
}

/// Horizontal gap `x_b - x_a` in dB at outage level `p_target`.
pub fn snr_gain(curve_a: &Curve, curve_b: &Curve, p_target: f64) -> Result<f64> {
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(OutageError::Domain(format!("target probability must lie in (0, 1), got {p_target}")));
    }
    let lp = p_target.log10();
    Ok(crossing(curve_b, lp)? - crossing(curve_a, lp)?)
}

pub fn regime_select(channel: &ChannelSpec, rate: &RatePoint) -> Result<RegimeTag> {
    let threshold = r0_curve(channel.snr)?;
    let rb = rate.avg_multiplexing_gain;
    let variant = if rb < threshold - REGIME_MARGIN {
        RegimeVariant::LowRate
    } else if rb > threshold + REGIME_MARGIN {
        RegimeVariant::HighRate
    } else {
        RegimeVariant::Boundary
    };
    Ok(RegimeTag { variant, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::high_rate_bounds;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn awgn_examples() {
        assert!(awgn_capacity(1e-300) < 1e-299);
        assert!((awgn_capacity(1.0) - 0.693147180559945).abs() < 1e-14);
        assert!((awgn_capacity(std::f64::consts::E - 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ergodic_capacity_matches_monte_carlo() {
        let c = ergodic_capacity(1.0).unwrap();
        assert!((c - 0.596347362323194).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 4_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = (-(1.0 - rng.gen::<f64>()).ln()).ln_1p();
            s += v;
            s2 += v * v;
        }
        let m = s / n as f64;
        let se = ((s2 / n as f64 - m * m) / n as f64).sqrt();
        assert!((c - m).abs() < 3.0 * se);
    }

    #[test]
    fn ergodic_capacity_limits() {
        for &g in &[1e-3, 1e6] {
            let ratio = ergodic_capacity(g).unwrap() / awgn_capacity(g);
            assert!(ratio > 0.95 && ratio < 1.0, "g={g} ratio={ratio}");
        }
    }

    #[test]
    fn outage_capacity_inverts_upper_bound() {
        let c = ChannelSpec::from_db(4, 25.0).unwrap();
        let cap = outage_capacity_bound(&c, 0.01).unwrap();
        let r = RatePoint::from_per_subchannel(cap, &c).unwrap();
        let p = upper_exponent(&c, &r).unwrap().raw_probability;
        assert!((p / 0.01 - 1.0).abs() < 1e-6);
        assert!(cap < ergodic_capacity(c.snr).unwrap());
        let caps: Vec<f64> = [1e-4, 1e-3, 1e-2].iter().map(|&e| outage_capacity_bound(&c, e).unwrap()).collect();
        assert!(caps[0] < caps[1] && caps[1] < caps[2]);
        assert!(outage_capacity_bound(&c, 0.0).is_err());
    }

    #[test]
    fn r0_minimum_location() {
        let (g, r) = r0_minimum().unwrap();
        assert!((r - 0.833114).abs() < 1e-5);
        // the location is 6.2242 dB (recorded discrepancy with 6.2442)
        assert!((10.0 * g.log10() - 6.2242).abs() < 0.01);
        let db = 10.0 * g.log10();
        for d in [-1.0, 1.0] {
            assert!(r0_curve(10f64.powf((db + d) / 10.0)).unwrap() > r);
        }
        let (g2, r2) = r0_minimum_in(2e-2, 5e3).unwrap();
        assert!((g2 / g - 1.0).abs() < 1e-6 && (r2 - r).abs() < 1e-6);
    }

    #[test]
    fn r0_limits_and_definition() {
        assert!(r0_curve(1e-6).unwrap() > 0.99);
        assert!(r0_curve(1e12).unwrap() > 0.95);
        let g = 7.0;
        assert_eq!(r0_curve(g).unwrap(), ergodic_capacity(g).unwrap() / awgn_capacity(g));
    }

    #[test]
    fn r0_quasi_convex() {
        let vals: Vec<f64> = (0..=120).map(|i| r0_curve(10f64.powf(-2.0 + i as f64 / 20.0)).unwrap()).collect();
        let imin = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(vals[..=imin].windows(2).all(|w| w[1] <= w[0]));
        assert!(vals[imin..].windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn asymptotic_dmt_examples() {
        assert_eq!(asymptotic_dmt(4, 0.0).unwrap(), 4.0);
        assert_eq!(asymptotic_dmt(4, 4.0).unwrap(), 0.0);
        assert_eq!(asymptotic_dmt(4, 2.0).unwrap(), 2.0);
        assert!(asymptotic_dmt(4, 4.5).is_err());
    }

    #[test]
    fn finite_dmt_forms_agree() {
        for &db in &[10.0, 20.0, 40.0] {
            let c = ChannelSpec::from_db(4, db).unwrap();
            let r = RatePoint::from_avg_multiplexing_gain(0.8, &c).unwrap();
            let a = finite_snr_dmt(&c, &r, 2.0).unwrap();
            let b = finite_snr_dmt_fd(&c, &r, 2.0).unwrap();
            assert!((a / b - 1.0).abs() < 1e-6, "db={db} a={a} b={b}");
        }
    }

    #[test]
    fn finite_dmt_decreases_in_rate() {
        let c = ChannelSpec::from_db(4, 30.0).unwrap();
        let d: Vec<f64> = [0.5, 0.8, 0.95, 0.99]
            .iter()
            .map(|&rb| finite_snr_dmt(&c, &RatePoint::from_avg_multiplexing_gain(rb, &c).unwrap(), 0.0).unwrap())
            .collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        assert!(d[3] > 0.0);
    }

    #[test]
    fn finite_dmt_monotone_beyond_30db() {
        let d: Vec<f64> = [30.0, 40.0, 50.0, 60.0]
            .iter()
            .map(|&db| {
                let c = ChannelSpec::from_db(4, db).unwrap();
                finite_snr_dmt(&c, &RatePoint::from_avg_multiplexing_gain(0.8, &c).unwrap(), 1.0).unwrap()
            })
            .collect();
        let target = 0.8;
        assert!(d.windows(2).all(|w| (w[1] - target).abs() < (w[0] - target).abs()), "{d:?}");
    }

    fn shifted(dx: f64) -> Curve {
        Curve::new("c", (0..10).map(|i| (i as f64 * 5.0 + dx, 10f64.powf(-0.4 * i as f64))).collect()).unwrap()
    }

    #[test]
    fn snr_gain_examples() {
        let a = shifted(0.0);
        assert_eq!(snr_gain(&a, &a, 1e-2).unwrap(), 0.0);
        let b = shifted(3.0);
        for &p in &[0.3, 1e-2, 1e-3] {
            assert!((snr_gain(&a, &b, p).unwrap() - 3.0).abs() < 1e-12);
        }
        assert!(snr_gain(&a, &b, 1e-9).is_err());
        assert!(Curve::new("x", vec![(1.0, 0.1)]).is_err());
        assert!(Curve::new("x", vec![(1.0, 0.1), (1.0, 0.01)]).is_err());
    }

    #[test]
    fn saddle_point_gains_over_chernoff() {
        let build = |f: &dyn Fn(&ChannelSpec, &RatePoint) -> f64| {
            let pts = (0..=8)
                .map(|i| {
                    let db = 2.5 * i as f64;
                    let c = ChannelSpec::from_db(4, db).unwrap();
                    (db, f(&c, &RatePoint::from_avg_multiplexing_gain(0.1, &c).unwrap()))
                })
                .collect();
            Curve::new("c", pts).unwrap()
        };
        let up = build(&|c, r| upper_exponent(c, r).unwrap().raw_probability);
        let ks = build(&|c, r| crate::baselines::kaplan_shamai_bound(c, r).unwrap().raw_probability);
        // the saddle-point curve stays below 1e-3 at every SNR for this rate
        assert!(snr_gain(&up, &ks, 1e-4).unwrap() > 0.0);
    }

    #[test]
    fn regime_examples() {
        let c = ChannelSpec::from_db(4, 6.24).unwrap();
        let tag = |rb: f64, c: &ChannelSpec| regime_select(c, &RatePoint::from_avg_multiplexing_gain(rb, c).unwrap()).unwrap();
        assert_eq!(tag(0.3, &c).variant, RegimeVariant::LowRate);
        assert_eq!(tag(0.8331, &c).variant, RegimeVariant::Boundary);
        for &db in &[0.0, 6.0, 15.0] {
            let c = ChannelSpec::from_db(4, db).unwrap();
            assert_eq!(tag(0.95, &c).variant, RegimeVariant::HighRate);
        }
    }

    #[test]
    fn delay_limited_capacity_restatement() {
        let g = 10.0;
        let cbar = ergodic_capacity(g).unwrap();
        let p: Vec<f64> = [2, 4, 8, 16]
            .iter()
            .map(|&l| {
                let c = ChannelSpec::new(l, g).unwrap();
                upper_exponent(&c, &RatePoint::from_per_subchannel(0.95 * cbar, &c).unwrap()).unwrap().raw_probability
            })
            .collect();
        assert!(p.windows(2).all(|w| w[1] < w[0]));
        for &l in &[2, 4, 8, 16] {
            let c = ChannelSpec::new(l, g).unwrap();
            let (_, lo) = high_rate_bounds(&c, &RatePoint::from_per_subchannel(1.05 * cbar, &c).unwrap()).unwrap();
            assert!(lo.raw_probability > 0.1, "L={l} p={}", lo.raw_probability);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn ergodic_below_awgn(lg in -6.0f64..8.0) {
            let g = 10f64.powf(lg);
            let c = ergodic_capacity(g).unwrap();
            prop_assert!(c > 0.0 && c < awgn_capacity(g));
        }

        #[test]
        fn outage_capacity_monotone(db in 5.0f64..30.0, le in -4.0f64..-1.0) {
            let c1 = ChannelSpec::from_db(4, db).unwrap();
            let c2 = ChannelSpec::from_db(4, db + 3.0).unwrap();
            let e = 10f64.powf(le);
            let a = outage_capacity_bound(&c1, e).unwrap();
            prop_assert!(outage_capacity_bound(&c1, 2.0 * e).unwrap() > a);
            prop_assert!(outage_capacity_bound(&c2, e).unwrap() > a);
        }
    }

    #[test]
    fn saddle_point_dmt_tracks_simulated_slope() {
        let mut prev = 0.0;
        for &db in &[20.0, 30.0, 40.0] {
            let c = ChannelSpec::from_db(4, db).unwrap();
            let r = RatePoint::from_avg_multiplexing_gain(0.7, &c).unwrap();
            let d = saddle_point_dmt(&c, &r).unwrap();
            assert!(d > prev && d < asymptotic_dmt(4, 2.8).unwrap(), "{db} dB: {d}");
            prev = d;
        }
        // simulated slope between 25 and 35 dB with common seeds
        let p = |db: f64| {
            let c = ChannelSpec::from_db(4, db).unwrap();
            let r = RatePoint::from_avg_multiplexing_gain(0.7, &c).unwrap();
            crate::montecarlo::outage_mc(&c, &r, 2_000_000, 12).unwrap().p_hat
        };
        let (g1, g2) = (ChannelSpec::from_db(4, 25.0).unwrap().snr, ChannelSpec::from_db(4, 35.0).unwrap().snr);
        let sim = -(p(35.0).ln() - p(25.0).ln()) / (g2.ln() - g1.ln());
        let c = ChannelSpec::from_db(4, 30.0).unwrap();
        let d = saddle_point_dmt(&c, &RatePoint::from_avg_multiplexing_gain(0.7, &c).unwrap()).unwrap();
        assert!((d / sim - 1.0).abs() < 0.15, "theory {d} sim {sim}");
    }
}
