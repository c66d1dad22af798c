//! Tail `F_L(z) = Pr{X_1 ⋯ X_L ≥ z}` of a product of unit exponentials
//! and its density, built order by order from
//! `F_{k+1}(z) = ∫ e^{u - e^u} F_k(z e^{-u}) du`.
//!
//! Each order is tabulated on a log-spaced grid. Both `ln F` and
//! `ln(1 - F)` are stored with their exact slopes, so either tail keeps
//! full relative precision.

use std::fmt::Write as _;
use std::sync::OnceLock;

use super::quad::{self, QuadratureConfig};
use crate::error::{OutageError, Result};

pub const DEFAULT_GRID_SIZE: usize = 512;
pub const DEFAULT_DEPTH_LIMIT: usize = 16;
const LN_Z_MIN: f64 = -27.631_021_115_928_547; // ln 1e-12
const LN_HALF: f64 = -std::f64::consts::LN_2;
const LN_Z_MAX_BASE: f64 = 6.907_755_278_982_137; // ln 1e3

fn ln_z_max(order: usize) -> f64 {
    let k = order as f64;
    (k * (700.0 / k).ln()).max(LN_Z_MAX_BASE)
}

/// Tabulated `F_k` on a uniform grid in `u = ln z`.
#[derive(Debug, Clone)]
pub struct FLTable {
    order: usize,
    u0: f64,
    h: f64,
    ln_f: Vec<f64>,
    ln_g: Vec<f64>,
    // ln F minus its large-z asymptote, and the slope of that residual
    res_f: Vec<f64>,
    d_res_f: Vec<f64>,
    d_ln_g: Vec<f64>,
    config: QuadratureConfig,
}

/// `θ u - k e^{u/k}` with `θ = (k-1)/(2k)`: the shape of `ln F_k` at large `z = e^u`.
fn asymptote(order: usize, u: f64) -> (f64, f64) {
    let k = order as f64;
    let theta = (k - 1.0) / (2.0 * k);
    let e = (u / k).exp();
    (theta * u - k * e, theta - e)
}

/// Lower order used inside the recursion integrals.
enum Inner<'a> {
    Exact,
    Table(&'a FLTable),
}

impl Inner<'_> {
    /// `(ln F_k(w), ln(1 - F_k(w)))` at `w = e^u`.
    fn eval(&self, u: f64) -> (f64, f64) {
        match self {
            Inner::Exact => {
                let z = u.exp();
                (-z, (-(-z).exp_m1()).ln())
            }
            Inner::Table(t) => t.eval_ln(u),
        }
    }
}

fn hermite_plain(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Cubic Hermite with the Fritsch-Carlson monotonicity limiter.
fn hermite(y0: f64, y1: f64, mut d0: f64, mut d1: f64, h: f64, t: f64) -> f64 {
    let delta = (y1 - y0) / h;
    if delta == 0.0 {
        d0 = 0.0;
        d1 = 0.0;
    } else {
        let a = d0 / delta;
        let b = d1 / delta;
        if a < 0.0 {
            d0 = 0.0;
        }
        if b < 0.0 {
            d1 = 0.0;
        }
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            d0 *= tau;
            d1 *= tau;
        }
    }
    hermite_plain(y0, y1, d0, d1, h, t)
}

impl FLTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.ln_f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_f.is_empty()
    }

    /// Abscissae `z`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| (self.u0 + self.h * i as f64).exp()).collect()
    }

    /// `F_k(z)` at each abscissa.
    pub fn values(&self) -> Vec<f64> {
        self.ln_f.iter().map(|v| v.exp()).collect()
    }

    fn u_max(&self) -> f64 {
        self.u0 + self.h * (self.len() - 1) as f64
    }

    pub fn eval_ln(&self, u: f64) -> (f64, f64) {
        let n = self.len();
        let k = self.order as f64;
        if u > self.u_max() {
            let lf = self.res_f[n - 1] + asymptote(self.order, u).0;
            return (lf, (-lf.exp()).ln_1p());
        }
        if u < self.u0 {
            // G_k(z) ~ C z (c - ln z)^{k-1}, with c fixed by the end slope
            let s0 = self.d_ln_g[0];
            let mut lg = self.ln_g[0] + (u - self.u0);
            if k > 1.0 && s0 < 1.0 {
                let c = self.u0 + (k - 1.0) / (1.0 - s0);
                lg += (k - 1.0) * ((c - u) / (c - self.u0)).ln();
            }
            return ((-lg.exp()).ln_1p(), lg);
        }
        let x = (u - self.u0) / self.h;
        let i = (x.floor() as usize).min(n - 2);
        let t = x - i as f64;
        let lf = asymptote(self.order, u).0
            + hermite_plain(self.res_f[i], self.res_f[i + 1], self.d_res_f[i], self.d_res_f[i + 1], self.h, t);
        let lg = hermite(self.ln_g[i], self.ln_g[i + 1], self.d_ln_g[i], self.d_ln_g[i + 1], self.h, t);
        // take each tail from whichever interpolant is far from zero
        let (lf, lg) = (lf.min(0.0), lg.min(0.0));
        if lf < LN_HALF {
            (lf, (-lf.exp()).ln_1p())
        } else {
            ((-lg.exp()).ln_1p(), lg)
        }
    }

    /// Cache text: header `L,<order>,<grid_size>`, then `z,value` rows.
    pub fn to_cache_string(&self) -> String {
        let mut s = format!("L,{},{}\n", self.order, self.len());
        for (z, v) in self.grid().iter().zip(self.values()) {
            let _ = writeln!(s, "{z:.16e},{v:.16e}");
        }
        s
    }

    /// Parses cache text back into `(order, [(z, F)])`.
    pub fn parse_cache(text: &str) -> Result<(usize, Vec<(f64, f64)>)> {
        let bad = |m: &str| OutageError::Config(format!("malformed F_L cache: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let parts: Vec<&str> = header.split(',').collect();
        if parts.len() != 3 || parts[0] != "L" {
            return Err(bad("header"));
        }
        let order: usize = parts[1].parse().map_err(|_| bad("order"))?;
        let size: usize = parts[2].parse().map_err(|_| bad("grid size"))?;
        let mut rows = Vec::with_capacity(size);
        for line in lines {
            let (a, b) = line.split_once(',').ok_or_else(|| bad("row"))?;
            let z: f64 = a.parse().map_err(|_| bad("z"))?;
            let v: f64 = b.parse().map_err(|_| bad("value"))?;
            rows.push((z, v));
        }
        if rows.len() != size {
            return Err(bad("row count"));
        }
        Ok((order, rows))
    }
}

fn ln_diff(p: f64, n: f64) -> Result<f64> {
    // ln(e^p - e^n)
    if p > n {
        Ok(p + (-(n - p).exp()).ln_1p())
    } else {
        Err(OutageError::numerical("F_L density (cancellation)", 1.0))
    }
}

/// `(ln F, ln(1-F), ln(z f))` of order `k+1` at `z = e^u`, from order `k`.
fn next_order(inner: &Inner<'_>, u: f64, cfg: &QuadratureConfig) -> Result<(f64, f64, f64)> {
    let all = (f64::NEG_INFINITY, f64::INFINITY);
    let start = (0.5 * u).clamp(-3.0, 3.0);
    let lf = quad::ln_integral_unimodal(|x| x - x.exp() + inner.eval(u - x).0, all.0, all.1, start, cfg)?;
    let lg = quad::ln_integral_unimodal(|x| x - x.exp() + inner.eval(u - x).1, all.0, all.1, start, cfg)?;
    let lzf = ln_zf(inner, u, cfg)?;
    Ok((lf, lg, lzf))
}

/// `ln(z f_{k+1}(z))` with `z f = ∫ e^{-x}(x-1) F_k(z/x) dx = -∫ e^{-x}(x-1) G_k(z/x) dx`.
fn ln_zf(inner: &Inner<'_>, u: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let use_g = u < 0.0;
    let pick = |x: f64| {
        let (lf, lg) = inner.eval(u - x);
        if use_g {
            lg
        } else {
            lf
        }
    };
    let pos = quad::ln_integral_unimodal(|x| x - x.exp() + x.exp_m1().ln() + pick(x), 0.0, f64::INFINITY, 1.0, cfg)?;
    let neg = quad::ln_integral_unimodal(
        |x| x - x.exp() + (-x.exp_m1()).ln() + pick(x),
        f64::NEG_INFINITY,
        0.0,
        -1.0,
        cfg,
    )?;
    if use_g {
        ln_diff(neg, pos)
    } else {
        ln_diff(pos, neg)
    }
}

fn build_table(order: usize, lower: &Inner<'_>, grid_size: usize, cfg: &QuadratureConfig) -> Result<FLTable> {
    let u0 = LN_Z_MIN;
    let h = (ln_z_max(order) - u0) / (grid_size - 1) as f64;
    let mut t = FLTable {
        order,
        u0,
        h,
        ln_f: Vec::with_capacity(grid_size),
        ln_g: Vec::with_capacity(grid_size),
        res_f: Vec::with_capacity(grid_size),
        d_res_f: Vec::with_capacity(grid_size),
        d_ln_g: Vec::with_capacity(grid_size),
        config: *cfg,
    };
    for i in 0..grid_size {
        let u = u0 + h * i as f64;
        let (lf, lg, lzf) = match lower {
            Inner::Exact if order == 1 => {
                let z = u.exp();
                (-z, (-(-z).exp_m1()).ln(), u - z)
            }
            _ => next_order(lower, u, cfg)?,
        };
        let (a, da) = asymptote(order, u);
        t.ln_f.push(lf);
        t.ln_g.push(lg);
        t.res_f.push(lf - a);
        t.d_res_f.push(-(lzf - lf).exp() - da);
        t.d_ln_g.push((lzf - lg).exp());
    }
    Ok(t)
}

/// Lazily built tables for orders `1..=depth_limit`; read-only once built.
#[derive(Debug)]
pub struct ProductTail {
    cfg: QuadratureConfig,
    grid_size: usize,
    depth_limit: usize,
    tables: Vec<OnceLock<std::result::Result<FLTable, OutageError>>>,
}

impl Default for ProductTail {
    fn default() -> Self {
        ProductTail::new(QuadratureConfig::default(), DEFAULT_GRID_SIZE, DEFAULT_DEPTH_LIMIT)
            .expect("default configuration is valid")
    }
}

impl ProductTail {
    pub fn new(cfg: QuadratureConfig, grid_size: usize, depth_limit: usize) -> Result<Self> {
        if grid_size < 4 || depth_limit < 1 {
            return Err(OutageError::Config(format!(
                "F_L engine needs grid_size >= 4 and depth_limit >= 1, got {grid_size}, {depth_limit}"
            )));
        }
        Ok(ProductTail {
            cfg,
            grid_size,
            depth_limit,
            tables: (0..depth_limit).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Shared engine with default settings.
    pub fn global() -> &'static ProductTail {
        static ENGINE: OnceLock<ProductTail> = OnceLock::new();
        ENGINE.get_or_init(ProductTail::default)
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    fn check(&self, order: usize, z: f64) -> Result<()> {
        if order < 1 {
            return Err(OutageError::Domain("F_L needs L >= 1".into()));
        }
        if order > self.depth_limit {
            return Err(OutageError::UnsupportedOrder {
                order,
                limit: self.depth_limit,
            });
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(OutageError::Domain(format!("F_L needs a positive finite argument, got {z}")));
        }
        Ok(())
    }

    /// Table for `order`, building lower orders first.
    pub fn table(&self, order: usize) -> Result<&FLTable> {
        if order < 1 || order > self.depth_limit {
            return Err(OutageError::UnsupportedOrder {
                order,
                limit: self.depth_limit,
            });
        }
        let cell = &self.tables[order - 1];
        let built = cell.get_or_init(|| {
            if order == 1 {
                build_table(1, &Inner::Exact, self.grid_size, &self.cfg)
            } else {
                let lower = self.inner(order - 1)?;
                build_table(order, &lower, self.grid_size, &self.cfg)
            }
        });
        built.as_ref().map_err(|e| e.clone())
    }

    fn inner(&self, order: usize) -> Result<Inner<'_>> {
        if order == 1 {
            Ok(Inner::Exact)
        } else {
            Ok(Inner::Table(self.table(order)?))
        }
    }

    /// `(ln F_L(z), ln(1 - F_L(z)))` by one quadrature over the order `L-1` table.
    pub fn ln_tail_pair(&self, order: usize, z: f64) -> Result<(f64, f64)> {
        self.check(order, z)?;
        if order == 1 {
            return Ok(Inner::Exact.eval(z.ln()));
        }
        let inner = self.inner(order - 1)?;
        let (lf, lg, _) = next_order(&inner, z.ln(), &self.cfg)?;
        Ok((lf.min(0.0), lg.min(0.0)))
    }

    pub fn tail(&self, order: usize, z: f64) -> Result<f64> {
        Ok(self.ln_tail_pair(order, z)?.0.exp())
    }

    /// `1 - F_L(z)`, accurate for small `z`.
    pub fn cdf(&self, order: usize, z: f64) -> Result<f64> {
        Ok(self.ln_tail_pair(order, z)?.1.exp())
    }

    /// `ln(z f_L(z))` where `f_L = -dF_L/dz`.
    pub fn ln_z_density(&self, order: usize, z: f64) -> Result<f64> {
        self.check(order, z)?;
        if order == 1 {
            return Ok(z.ln() - z);
        }
        let inner = self.inner(order - 1)?;
        ln_zf(&inner, z.ln(), &self.cfg)
    }

    pub fn density(&self, order: usize, z: f64) -> Result<f64> {
        Ok((self.ln_z_density(order, z)? - z.ln()).exp())
    }
}

/// `F_L(z) = Pr{∏_{l≤L} X_l ≥ z}` for i.i.d. unit exponentials.
pub fn f_l(l: usize, z: f64) -> Result<f64> {
    ProductTail::global().tail(l, z)
}

/// Density `-dF_L/dz`.
pub fn f_l_density(l: usize, z: f64) -> Result<f64> {
    ProductTail::global().density(l, z)
}
