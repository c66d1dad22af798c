//! Adaptive Gauss-Kronrod quadrature and a log-space driver for
//! unimodal integrands whose magnitude spans the full double range.

use crate::error::{OutageError, Result};

/// Tolerances for every adaptive integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_subdivisions < 1 {
            return Err(OutageError::Config(format!(
                "quadrature config rel_tol={rel_tol}, abs_tol={abs_tol}, max_subdivisions={max_subdivisions}"
            )));
        }
        Ok(QuadratureConfig {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadratureConfig { rel_tol, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    let abs_value = abs_k * h.abs();
    let round = 50.0 * f64::EPSILON * abs_value;
    let error = ((kron - gauss) * h).abs().max(round);
    Segment {
        a,
        b,
        value,
        error,
        abs_value,
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(OutageError::Domain(format!("integration limits [{a}, {b}] must be finite")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    let mut segs = vec![gk15(&f, a, b)];
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let abs_total: f64 = segs.iter().map(|s| s.abs_value).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(OutageError::numerical("adaptive quadrature (non-finite integrand)", f64::NAN));
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        let round_floor = 100.0 * f64::EPSILON * abs_total;
        if err <= target || err <= round_floor {
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                subdivisions: segs.len(),
            });
        }
        if segs.len() >= cfg.max_subdivisions {
            let achieved = if total != 0.0 { err / total.abs() } else { err };
            return Err(OutageError::numerical("adaptive quadrature", achieved));
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs.swap_remove(idx);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            let achieved = if total != 0.0 { err / total.abs() } else { err };
            return Err(OutageError::numerical("adaptive quadrature (interval underflow)", achieved));
        }
        segs.push(gk15(&f, s.a, m));
        segs.push(gk15(&f, m, s.b));
    }
}

/// Log-integrand drop, relative to its peak, beyond which the tail is discarded.
const TAIL_DROP: f64 = 60.0;

fn golden_max<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-9 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Locates the peak of a unimodal log-integrand on `[lo, hi]`.
pub fn locate_peak<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64, start: f64) -> f64 {
    let clamp = |x: f64| x.max(lo).min(hi);
    let x0 = clamp(start);
    let g0 = g(x0);
    let mut step = 0.5;
    let dir = if clamp(x0 + step) > x0 && g(clamp(x0 + step)) > g0 {
        1.0
    } else if clamp(x0 - step) < x0 && g(clamp(x0 - step)) > g0 {
        -1.0
    } else {
        let a = clamp(x0 - step);
        let b = clamp(x0 + step);
        return golden_max(g, a, b);
    };
    let mut prev = x0;
    let mut cur = clamp(x0 + dir * step);
    let mut gcur = g(cur);
    loop {
        step *= 2.0;
        let next = clamp(cur + dir * step);
        if next == cur {
            return cur;
        }
        let gnext = g(next);
        if !(gnext > gcur) {
            let (a, b) = if dir > 0.0 { (prev, next) } else { (next, prev) };
            return golden_max(g, a, b);
        }
        prev = cur;
        cur = next;
        gcur = gnext;
    }
}

fn cutoff<G: Fn(f64) -> f64>(g: &G, peak: f64, gpeak: f64, bound: f64, dir: f64) -> f64 {
    let mut step = 0.5;
    let mut x = peak;
    let (inside, outside) = loop {
        let next = if dir > 0.0 { (x + step).min(bound) } else { (x - step).max(bound) };
        if next == x {
            return x;
        }
        if !(g(next) > gpeak - TAIL_DROP) {
            break (x, next);
        }
        x = next;
        step *= 2.0;
    };
    // tighten to the crossing so narrow peaks are not lost in a wide panel
    let (mut a, mut b) = (inside, outside);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if g(m) > gpeak - TAIL_DROP {
            a = m;
        } else {
            b = m;
        }
    }
    b
}

/// Peak and truncated support of a unimodal log-integrand.
#[derive(Debug, Clone, Copy)]
pub struct Support {
    pub peak: f64,
    pub log_peak: f64,
    pub left: f64,
    pub right: f64,
}

pub fn effective_support<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64, start: f64) -> Result<Support> {
    let peak = locate_peak(g, lo, hi, start);
    let log_peak = g(peak);
    if !log_peak.is_finite() {
        return Err(OutageError::numerical("log-space quadrature (no finite peak)", f64::NAN));
    }
    Ok(Support {
        peak,
        log_peak,
        left: cutoff(g, peak, log_peak, lo, -1.0),
        right: cutoff(g, peak, log_peak, hi, 1.0),
    })
}

/// Returns `ln ∫_lo^hi exp(g(u)) du` for a unimodal `g`; `lo`/`hi` may be infinite.
pub fn ln_integral_unimodal<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    hi: f64,
    start: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let Support {
        peak,
        log_peak: gpeak,
        left,
        right,
    } = effective_support(&g, lo, hi, start)?;
    // the log-integrand carries absolute rounding noise of order ulp(|g|)
    let noise = 16.0 * f64::EPSILON * (1.0 + gpeak.abs());
    let cfg = &cfg.with_rel_tol(cfg.rel_tol.max(noise));
    let h = |u: f64| {
        let v = g(u) - gpeak;
        if v.is_finite() {
            v.exp()
        } else {
            0.0
        }
    };
    let a = integrate(&h, left, peak, cfg)?;
    let b = integrate(&h, peak, right, cfg)?;
    let total = a.value + b.value;
    if !(total > 0.0) {
        return Err(OutageError::numerical("log-space quadrature (vanishing mass)", f64::NAN));
    }
    Ok(gpeak + total.ln())
}
