//! Modified Bessel functions K0 and K1 of real positive argument.
//! Power series below x = 2, Steed's continued fraction above.

use crate::error::{OutageError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(OutageError::Domain(format!("Bessel K needs a positive finite argument, got {x}")));
    }
    if x < 1e-300 {
        return Err(OutageError::Range(format!("Bessel K overflows at x = {x:e}")));
    }
    Ok(())
}

/// Returns `(K0, K1, x K1 - 1)` from the power series.
fn series_full(x: f64) -> (f64, f64, f64) {
    let q = 0.25 * x * x;
    let lnh = (0.5 * x).ln();
    let (mut i0, mut i1) = (0.0, 0.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    let mut t0 = 1.0; // q^k / (k!)^2
    let mut t1 = 1.0; // q^k / (k! (k+1)!)
    let mut harm = 0.0; // H_k
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            t0 *= q / (kf * kf);
            t1 *= q / (kf * (kf + 1.0));
            harm += 1.0 / kf;
        }
        i0 += t0;
        i1 += t1;
        s0 += harm * t0;
        // ψ(k+1) + ψ(k+2) = 2 H_k + 1/(k+1) - 2γ
        s1 += (2.0 * harm + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA) * t1;
        if t0 < 1e-18 * i0 && k > 2 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -(lnh + EULER_GAMMA) * i0 + s0;
    let xk1m1 = x * lnh * i1 - 0.25 * x * x * s1;
    (k0, 1.0 / x + lnh * i1 - 0.25 * x * s1, xk1m1)
}

fn series(x: f64) -> (f64, f64) {
    let (k0, k1, _) = series_full(x);
    (k0, k1)
}

/// `x K1(x) - 1` without cancellation, for `0 < x <= 2`.
pub fn x_k1_minus_one(x: f64) -> Result<f64> {
    check(x)?;
    if x > 2.0 {
        return Err(OutageError::Domain(format!("x K1(x) - 1 series is used for x <= 2, got {x}")));
    }
    Ok(series_full(x).2)
}

fn steed(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn k01(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        series(x)
    } else {
        steed(x)
    }
}

pub fn bessel_k0(x: f64) -> Result<f64> {
    check(x)?;
    Ok(k01(x).0)
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    check(x)?;
    Ok(k01(x).1)
}
