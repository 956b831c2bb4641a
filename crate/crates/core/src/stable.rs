//! Density of the standard positive stable law with Laplace transform `exp(-u^alpha)`.
//!
//! Two independent evaluation paths are provided:
//!
//! * the convergent power series in `x^(-alpha)`, accurate for moderate and large `x`;
//! * Zolotarev's integral over `(0, pi)`, accurate for small `x`, where the density
//!   decays like `exp(-c x^(-alpha/(1-alpha)))`.
//!
//! [`r_alpha`] dispatches between them. [`StableDensity`] precomputes the series
//! coefficients and, when built with [`StableDensity::tabulated`], a piecewise
//! Chebyshev table of the Zolotarev path, which makes repeated small-`x`
//! evaluations inside nested quadratures cheap.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::cheb::ChebPiece;
use crate::error::{Error, QuadContext, Result};
use crate::quadrature::{integrate_with, Abscissa, QuadConfig, SingularityHint};
use crate::special::{ln_gamma, sin_pi};

const MAX_TERMS: usize = 200;
const PHI_CLIP: f64 = 1e-10;
const SERIES_TOL: f64 = 1e-15;

/// Stability index, restricted to the open interval `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StableIndex(f64);

impl StableIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(StableIndex(alpha))
        } else {
            Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_half(self) -> bool {
        self.0 == 0.5
    }
}

impl TryFrom<f64> for StableIndex {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        StableIndex::new(v)
    }
}

impl From<StableIndex> for f64 {
    fn from(a: StableIndex) -> f64 {
        a.0
    }
}

/// `x^(-3/2) exp(-1/(4x)) / (2 sqrt(pi))`, zero for `x <= 0`.
pub fn r_half_closed(x: f64) -> f64 {
    if x <= 0.0 || x.is_nan() {
        return 0.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    0.5 / PI.sqrt() * x.powf(-1.5) * (-0.25 / x).exp()
}

/// Density evaluator for one fixed `alpha`.
#[derive(Debug, Clone)]
pub struct StableDensity {
    alpha: StableIndex,
    /// `ln |c_n|` and `sign(c_n)` for the series coefficients, `n = 1..`.
    coef: Vec<(f64, f64)>,
    /// `ln Gamma(n alpha + 1) - ln n! - ln pi`, the coefficient envelope.
    envelope: Vec<f64>,
    gamma: f64,
    ln_a0: f64,
    threshold: f64,
    table: Option<ChebTable>,
}

impl StableDensity {
    pub fn new(alpha: StableIndex) -> Self {
        let a = alpha.value();
        let mut coef = Vec::with_capacity(MAX_TERMS);
        let mut envelope = Vec::with_capacity(MAX_TERMS);
        for n in 1..=MAX_TERMS {
            let nf = n as f64;
            let env = ln_gamma(nf * a + 1.0) - ln_gamma(nf + 1.0) - PI.ln();
            let s = sin_pi(nf * a);
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 } * s.signum();
            let ln_c = if s == 0.0 { f64::NEG_INFINITY } else { env + s.abs().ln() };
            coef.push((ln_c, if s == 0.0 { 0.0 } else { sign }));
            envelope.push(env);
        }
        let gamma = a / (1.0 - a);
        let ln_a0 = gamma * a.ln() + (1.0 - a).ln();
        StableDensity { alpha, coef, envelope, gamma, ln_a0, threshold: if a <= 0.5 { 1.0 } else { 2.0 }, table: None }
    }

    /// Like [`new`](Self::new), plus an interpolation table for the small-`x` branch.
    pub fn tabulated(alpha: StableIndex) -> Result<Self> {
        let mut d = StableDensity::new(alpha);
        if !alpha.is_half() {
            d.table = Some(ChebTable::build(&d)?);
        }
        Ok(d)
    }

    /// Shared tabulated evaluator, built once per `alpha`.
    pub fn shared(alpha: StableIndex) -> Result<Arc<StableDensity>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<StableDensity>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = alpha.value().to_bits();
        if let Some(d) = cache.lock().expect("stable cache poisoned").get(&key) {
            return Ok(Arc::clone(d));
        }
        let d = Arc::new(StableDensity::tabulated(alpha)?);
        let mut guard = cache.lock().expect("stable cache poisoned");
        Ok(Arc::clone(guard.entry(key).or_insert(d)))
    }

    pub fn alpha(&self) -> StableIndex {
        self.alpha
    }

    /// Crossover between the integral path (below) and the series path (at or above).
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Density value with automatic path selection.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("stable density argument must be finite, got {x}")));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        if self.alpha.is_half() {
            return Ok(r_half_closed(x));
        }
        if x >= self.threshold {
            if let Ok(v) = self.series(x, SERIES_TOL) {
                return Ok(v);
            }
        }
        if let Some(table) = &self.table {
            if let Some(v) = table.eval(self, x) {
                return Ok(v);
            }
        }
        self.integral(x, &zolotarev_cfg())
    }

    /// Power series; errors when it cannot reach `tol` relative accuracy.
    pub fn series(&self, x: f64, tol: f64) -> Result<f64> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Domain(format!("series requires finite x > 0, got {x}")));
        }
        let a = self.alpha.value();
        let lx = x.ln();
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        let mut prev_env = f64::INFINITY;
        for (i, (&(ln_c, sign), &env)) in self.coef.iter().zip(&self.envelope).enumerate() {
            let n = (i + 1) as f64;
            let shift = (n * a + 1.0) * lx;
            if sign != 0.0 {
                let term = sign * (ln_c - shift).exp();
                sum += term;
                abs_sum += term.abs();
            }
            let env_n = (env - shift).exp();
            let decreasing = env_n < prev_env;
            prev_env = env_n;
            if decreasing && env_n <= tol * sum.abs() {
                let rounding = 4.0 * f64::EPSILON * abs_sum;
                if rounding > tol.max(1e-13) * sum.abs() {
                    return Err(Error::SeriesNotConverged { terms: i + 1, residual: rounding });
                }
                return Ok(sum.max(0.0));
            }
        }
        Err(Error::SeriesNotConverged { terms: MAX_TERMS, residual: prev_env })
    }

    /// Zolotarev integral representation.
    pub fn integral(&self, x: f64, cfg: &QuadConfig) -> Result<f64> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Domain(format!("integral path requires finite x > 0, got {x}")));
        }
        let u = x.ln();
        let c = (-self.gamma * u).exp();
        let ln_i = self.ln_zolotarev(c, cfg)?;
        Ok(self.assemble(u, c, ln_i))
    }

    /// `ln r(x)` from `u = ln x`, `c = x^(-gamma)` and `ln I(c)`.
    #[inline]
    fn assemble(&self, u: f64, c: f64, ln_i: f64) -> f64 {
        let a = self.alpha.value();
        let ln_r = (self.gamma / PI).ln() - u / (1.0 - a) - c * self.ln_a0.exp() + ln_i;
        ln_r.exp()
    }

    /// `ln of int_0^pi A(phi) exp(-c (A(phi) - A(0))) dphi`.
    fn ln_zolotarev(&self, c: f64, cfg: &QuadConfig) -> Result<f64> {
        let a = self.alpha.value();
        let g = self.gamma;
        let ln_a0 = self.ln_a0;
        let a0 = ln_a0.exp();
        let integrand = |n: Abscissa| {
            let phi = n.x.clamp(PHI_CLIP, PI - PHI_CLIP);
            let sin_phi = if phi < 0.5 * PI { phi.sin() } else { n.hi.max(PHI_CLIP).sin() };
            let ln_a = g * ((a * phi).sin() / sin_phi).ln() + (((1.0 - a) * phi).sin() / sin_phi).ln();
            let excess = a0 * (ln_a - ln_a0).exp_m1();
            ln_a.exp() * (-c * excess).exp()
        };
        let out = integrate_with(integrand, 0.0, PI, SingularityHint::None, cfg)
            .context(|| format!("Zolotarev integral at alpha={a}, c={c:e}"))?;
        if !out.converged {
            return Err(Error::Quadrature {
                context: format!("Zolotarev integral at alpha={a}, c={c:e}"),
                source: crate::quadrature::QuadError::NotConverged {
                    value: out.estimate.value,
                    error: out.estimate.error,
                    evals: out.estimate.evals,
                },
            });
        }
        Ok(out.estimate.value.ln())
    }
}

fn zolotarev_cfg() -> QuadConfig {
    QuadConfig { abs_tol: 0.0, rel_tol: 1e-12, max_depth: 50, max_evals: 100_000 }
}

const CHEB_N: usize = 20;
const CHEB_WIDTH: f64 = 0.5;

/// Piecewise Chebyshev interpolant of `ln I(c(u))` on `u = ln x`.
#[derive(Debug, Clone)]
struct ChebTable {
    u_min: f64,
    u_max: f64,
    pieces: Vec<ChebPiece>,
}

impl ChebTable {
    fn build(d: &StableDensity) -> Result<Self> {
        let u_max = d.threshold.ln();
        // Below this the density is far below the smallest subnormal.
        let c_cut = 850.0 / d.ln_a0.exp();
        let u_min = -c_cut.ln() / d.gamma;
        let span = u_max - u_min;
        let count = ((span / CHEB_WIDTH).ceil() as usize).max(1);
        let h = span / count as f64;
        let cfg = zolotarev_cfg();
        let pieces = (0..count)
            .map(|i| {
                let lo = u_min + i as f64 * h;
                ChebPiece::fit(|u| d.ln_zolotarev((-d.gamma * u).exp(), &cfg), lo, lo + h, CHEB_N)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChebTable { u_min, u_max, pieces })
    }

    fn eval(&self, d: &StableDensity, x: f64) -> Option<f64> {
        let u = x.ln();
        if u < self.u_min {
            return Some(0.0);
        }
        if u > self.u_max {
            return None;
        }
        let h = (self.u_max - self.u_min) / self.pieces.len() as f64;
        let idx = (((u - self.u_min) / h) as usize).min(self.pieces.len() - 1);
        let ln_i = self.pieces[idx].eval(u);
        Some(d.assemble(u, (-d.gamma * u).exp(), ln_i))
    }
}

/// `r_alpha(x)` with automatic path selection; zero for `x <= 0`.
pub fn r_alpha(alpha: StableIndex, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("stable density argument must be finite, got {x}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if alpha.is_half() {
        return Ok(r_half_closed(x));
    }
    StableDensity::new(alpha).eval(x)
}

/// Series path only.
pub fn r_alpha_series(alpha: StableIndex, x: f64, tol: f64) -> Result<f64> {
    StableDensity::new(alpha).series(x, tol)
}

/// Integral path only.
pub fn r_alpha_integral(alpha: StableIndex, x: f64, cfg: &QuadConfig) -> Result<f64> {
    StableDensity::new(alpha).integral(x, cfg)
}
