//! Monte Carlo references.
//!
//! Trials are split into fixed-size streams. Stream `i` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` with `set_stream(i)`, so estimates do
//! not depend on how many workers run the streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{OutageError, Result};
use crate::largedev::{ChannelSpec, RatePoint};
use crate::metrics::Curve;
use crate::specialfn::quad::integrate;
use crate::specialfn::QuadratureConfig;

/// Trials per RNG stream.
pub const STREAM_TRIALS: u64 = 1 << 16;
/// Below this many hits an estimate is flagged as unresolved.
pub const MIN_RESOLVED_HITS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    pub hits: u64,
}

impl MCEstimate {
    fn from_hits(hits: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let p = hits as f64 / n;
        MCEstimate {
            p_hat: p,
            stderr: (p * (1.0 - p) / n).sqrt(),
            trials,
            seed,
            hits,
        }
    }

    pub fn unresolved(&self) -> bool {
        self.hits < MIN_RESOLVED_HITS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub gains: Vec<f64>,
}

/// `Σ ln(1 + γ g_l)`.
pub fn mutual_information(sample: &ChannelSample, snr: f64) -> f64 {
    sample.gains.iter().map(|g| (snr * g).ln_1p()).sum()
}

#[inline]
fn exp1(rng: &mut ChaCha8Rng) -> f64 {
    -(-rng.gen::<f64>()).ln_1p()
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn stream_len(trials: u64, stream: u64) -> u64 {
    STREAM_TRIALS.min(trials - stream * STREAM_TRIALS)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < 1 {
        return Err(OutageError::Domain("Monte Carlo needs at least one trial".into()));
    }
    Ok(())
}

/// Per-trial statistic `s` of `l` unit exponentials, reduced to a hit count.
fn count_hits<S, H>(l: usize, trials: u64, seed: u64, stat: S, hit: H) -> u64
where
    S: Fn(&[f64]) -> f64 + Sync,
    H: Fn(f64) -> bool + Sync,
{
    let streams = trials.div_ceil(STREAM_TRIALS);
    (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s);
            let mut x = vec![0.0; l];
            let mut hits = 0u64;
            for _ in 0..stream_len(trials, s) {
                x.iter_mut().for_each(|v| *v = exp1(&mut rng));
                hits += hit(stat(&x)) as u64;
            }
            hits
        })
        .sum()
}

/// All per-trial mutual informations, in trial order.
fn mutual_information_samples(channel: &ChannelSpec, trials: u64, seed: u64) -> Vec<f64> {
    let l = channel.num_subchannels;
    let g = channel.snr;
    let streams = trials.div_ceil(STREAM_TRIALS);
    let chunks: Vec<Vec<f64>> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s);
            (0..stream_len(trials, s))
                .map(|_| (0..l).map(|_| (g * exp1(&mut rng)).ln_1p()).sum())
                .collect()
        })
        .collect();
    chunks.concat()
}

/// Empirical `Pr{Σ ln(1 + γ X_l) < R}`.
pub fn outage_mc(channel: &ChannelSpec, rate: &RatePoint, trials: u64, seed: u64) -> Result<MCEstimate> {
    check_trials(trials)?;
    if rate.total_rate == 0.0 {
        return Ok(MCEstimate::from_hits(0, trials, seed));
    }
    let g = channel.snr;
    let r = rate.total_rate;
    let hits = count_hits(
        channel.num_subchannels,
        trials,
        seed,
        |x| x.iter().map(|v| (g * v).ln_1p()).sum(),
        |i| i < r,
    );
    Ok(MCEstimate::from_hits(hits, trials, seed))
}

/// Two-subchannel outage `∫_0^{(e^R-1)/γ} e^{-x} (1 - e^{-(e^R/(1+γx) - 1)/γ}) dx`.
pub fn exact_outage_l2(snr: f64, rate: f64) -> Result<f64> {
    if !(snr > 0.0 && rate >= 0.0) {
        return Err(OutageError::Domain(format!("need γ > 0 and R >= 0, got γ={snr}, R={rate}")));
    }
    if rate == 0.0 {
        return Ok(0.0);
    }
    let top = rate.exp_m1() / snr;
    let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
    let f = |x: f64| (-x).exp() * -(-(rate - (snr * x).ln_1p()).exp_m1() / snr).exp_m1();
    // the integrand decays like e^{-x}; beyond x = 750 it is below the double range
    let v = integrate(f, 0.0, top.min(750.0), &cfg)?.value;
    Ok(v.clamp(0.0, 1.0))
}

/// Empirical `Pr{∏ X_l ≥ z}`.
pub fn product_exp_tail_mc(l: usize, z: f64, trials: u64, seed: u64) -> Result<MCEstimate> {
    check_trials(trials)?;
    if l < 1 || !(z >= 0.0) {
        return Err(OutageError::Domain(format!("need L >= 1 and z >= 0, got L={l}, z={z}")));
    }
    if z == 0.0 {
        return Ok(MCEstimate::from_hits(trials, trials, seed));
    }
    let lz = z.ln();
    let hits = count_hits(l, trials, seed, |x| x.iter().map(|v| v.ln()).sum(), |s| s >= lz);
    Ok(MCEstimate::from_hits(hits, trials, seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitySearch {
    pub c_norm: f64,
    pub p_hat: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const CAPACITY_MAX_ITERATIONS: usize = 60;

/// Bisection on `C_norm ∈ [0, 2]` with `R̄ = C_norm · C_awgn`, stopping when the
/// simulated outage is within `delta_tol_factor · ε` of ε. Every evaluation
/// uses the same seed, so the simulated outage is monotone in `C_norm`.
pub fn capacity_search(
    channel: &ChannelSpec,
    epsilon: f64,
    delta_tol_factor: f64,
    trials_per_eval: u64,
    seed: u64,
) -> Result<CapacitySearch> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(OutageError::Domain(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    check_trials(trials_per_eval)?;
    let mut info = mutual_information_samples(channel, trials_per_eval, seed);
    info.sort_unstable_by(f64::total_cmp);
    let n = trials_per_eval as f64;
    let delta = delta_tol_factor * epsilon;
    let p_at = |c: f64| {
        let r = c * channel.l() * channel.c_awgn();
        info.partition_point(|&v| v < r) as f64 / n
    };

    let (mut lo, mut hi) = (0.0, 2.0);
    let mut c = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, c, 0.0);
    for it in 1..=CAPACITY_MAX_ITERATIONS {
        let p = p_at(c);
        let gap = p - epsilon;
        if gap.abs() < best.0 {
            best = (gap.abs(), c, p);
        }
        if gap.abs() < delta {
            return Ok(CapacitySearch { c_norm: c, p_hat: p, iterations: it, converged: true });
        }
        if gap >= delta {
            hi = c;
        } else {
            lo = c;
        }
        c = 0.5 * (lo + hi);
    }
    Ok(CapacitySearch {
        c_norm: best.1,
        p_hat: best.2,
        iterations: CAPACITY_MAX_ITERATIONS,
        converged: false,
    })
}

pub fn capacity_search_default(
    channel: &ChannelSpec,
    epsilon: f64,
    trials_per_eval: u64,
    seed: u64,
) -> Result<CapacitySearch> {
    capacity_search(channel, epsilon, 1e-3, trials_per_eval, seed)
}

/// Centered slope of `-ln p` against `ln γ` at interior points of a `(dB, p)` curve.
pub fn empirical_diversity(curve: &Curve) -> Result<Curve> {
    let pts = &curve.points;
    if pts.len() < 3 {
        return Err(OutageError::Domain("diversity slope needs at least 3 points".into()));
    }
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return Err(OutageError::Domain("outage values must be positive".into()));
    }
    let ln_g = |db: f64| db * std::f64::consts::LN_10 / 10.0;
    let out = pts
        .windows(3)
        .map(|w| {
            let slope = -(w[2].1.ln() - w[0].1.ln()) / (ln_g(w[2].0) - ln_g(w[0].0));
            (w[1].0, slope)
        })
        .collect();
    Curve::new(format!("{} slope", curve.label), out)
}
