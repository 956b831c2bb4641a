//! The kernel `K(w, x) = int_0^inf z^(1-alpha) r(a z) r(b z) dz` with
//! `a = (w + x) / (2 p^(1/alpha))` and `b = (w - x) / (2 (1 - p)^(1/alpha))`.
//!
//! Substituting `z = zeta / m`, `m = min(a, b)`, gives
//! `K = m^(alpha - 2) int_0^inf zeta^(1-alpha) r(zeta) r(rho zeta) dzeta`
//! with `rho = max(a, b) / m >= 1`, so the integrand always has its bulk near
//! `zeta ~ 1`. It decays like `zeta^(-1 - 3 alpha)`; after the map to `(0, 1)`
//! that tail is an endpoint singularity of exponent `3 alpha - 1` when
//! `alpha < 1/3`.
//!
//! As `w -> |x|` the kernel behaves like `(w - |x|)^(2 alpha - 1)`.
//!
//! The profile `g(rho)` depends on `alpha` alone. Writing
//! `g(rho) = rho^(-1-alpha) h(v)` with `v = rho^(-alpha)`, the term-by-term
//! integral of the stable series gives
//! `h(v) = sum_n a_n v^(n-1)`,
//! `a_n = (-1)^(n+1) sin(pi n alpha)/pi (n+1) Gamma(n alpha + 1)/Gamma(n alpha + alpha + 1)`,
//! convergent for `v < 1`. The tabulated method sums this for `v <= 1/2`
//! and uses Chebyshev pieces fitted to quadrature values on `[1/2, 1]`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::cheb::ChebPiece;
use crate::error::{Error, QuadContext, Result};
use crate::params::ModelParams;
use crate::quadrature::{integrate_semiinfinite_hinted, QuadConfig, SingularityHint};
use crate::special::{ln_gamma, sin_pi};
use crate::stable::{StableDensity, StableIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    /// Closed form at `alpha = 1/2`, tabulated profile otherwise.
    #[default]
    Auto,
    /// Always integrate over `z`.
    Quadrature,
    /// Always use the tabulated profile.
    Table,
}

/// Kernel evaluator for fixed parameters.
#[derive(Debug)]
pub struct ZKernel {
    params: ModelParams,
    method: KernelMethod,
    cfg: QuadConfig,
    stable: Arc<StableDensity>,
    scale_sum: f64,
    scale_diff: f64,
    profile: Option<Arc<KernelProfile>>,
    cache: Option<Mutex<HashMap<(u64, u64), f64>>>,
}

impl ZKernel {
    /// `cfg.rel_tol` sets the relative accuracy of each z-integral.
    pub fn new(params: ModelParams, cfg: &QuadConfig) -> Result<Self> {
        Self::with_method(params, KernelMethod::Auto, cfg)
    }

    pub fn with_method(params: ModelParams, method: KernelMethod, cfg: &QuadConfig) -> Result<Self> {
        cfg.validate()?;
        let a = params.alpha();
        let p = params.p();
        let tabulated = match method {
            KernelMethod::Auto => !params.alpha.is_half(),
            KernelMethod::Quadrature => false,
            KernelMethod::Table => true,
        };
        Ok(ZKernel {
            params,
            method,
            profile: if tabulated { Some(KernelProfile::shared(params.alpha)?) } else { None },
            cfg: QuadConfig { abs_tol: 0.0, rel_tol: cfg.rel_tol.max(1e-13), ..*cfg },
            stable: StableDensity::shared(params.alpha)?,
            scale_sum: 0.5 * p.powf(-1.0 / a),
            scale_diff: 0.5 * (1.0 - p).powf(-1.0 / a),
            cache: None,
        })
    }

    /// Memoise values keyed by the exact argument bits.
    pub fn cached(mut self) -> Self {
        self.cache = Some(Mutex::new(HashMap::new()));
        self
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn uses_closed_form(&self) -> bool {
        self.method == KernelMethod::Auto && self.params.alpha.is_half()
    }

    /// `K(w, x)` for `w > |x|`.
    pub fn eval(&self, w: f64, x: f64) -> Result<f64> {
        if !(w.is_finite() && x.is_finite()) || w <= x.abs() {
            return Err(Error::Domain(format!("kernel requires w > |x|, got w={w}, x={x}")));
        }
        self.eval_sum_diff(w + x, w - x)
    }

    /// `K` from `w + x` and `w - x`, which callers can often supply without cancellation.
    pub fn eval_sum_diff(&self, sum: f64, diff: f64) -> Result<f64> {
        if !(sum > 0.0 && diff > 0.0) || !(sum.is_finite() && diff.is_finite()) {
            return Err(Error::Domain(format!("kernel requires w + x > 0 and w - x > 0, got {sum} and {diff}")));
        }
        if self.uses_closed_form() {
            return Ok(half_from_sum_diff(self.params.p(), sum, diff));
        }
        let key = (sum.to_bits(), diff.to_bits());
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.lock().expect("kernel cache poisoned").get(&key) {
                return Ok(*v);
            }
        }
        let (a, b) = (sum * self.scale_sum, diff * self.scale_diff);
        if let Some(profile) = &self.profile {
            return Ok(profile.kernel(a, b));
        }
        let v = self.integrate(a, b)?;
        if let Some(cache) = &self.cache {
            cache.lock().expect("kernel cache poisoned").insert(key, v);
        }
        Ok(v)
    }

    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        let alpha = self.params.alpha();
        let (m, big) = if a <= b { (a, b) } else { (b, a) };
        let g = profile_integral(&self.stable, big / m, &self.cfg)
            .context(|| format!("kernel z-integral at a={a:e}, b={b:e}"))?;
        Ok(m.powf(alpha - 2.0) * g)
    }
}

/// `g(rho) = int_0^inf zeta^(1-alpha) r(zeta) r(rho zeta) dzeta`.
fn profile_integral(
    r: &StableDensity,
    rho: f64,
    cfg: &QuadConfig,
) -> std::result::Result<f64, crate::quadrature::QuadError> {
    let alpha = r.alpha().value();
    let f = |zeta: f64| {
        let lo = r.eval(zeta).unwrap_or(f64::NAN);
        if lo == 0.0 {
            return 0.0;
        }
        zeta.powf(1.0 - alpha) * lo * r.eval(rho * zeta).unwrap_or(f64::NAN)
    };
    let hint = SingularityHint::upper_if_singular(3.0 * alpha - 1.0);
    Ok(integrate_semiinfinite_hinted(f, 0.0, hint, cfg)?.value)
}

const PROFILE_TERMS: usize = 80;
const PROFILE_SPLIT: f64 = 0.5;
const PROFILE_NODES: usize = 24;
const PROFILE_TOL: f64 = 5e-11;

/// `h(v)` for one `alpha`, shared across kernels.
#[derive(Debug)]
struct KernelProfile {
    alpha: f64,
    series: Vec<f64>,
    pieces: Vec<ChebPiece>,
}

impl KernelProfile {
    fn shared(alpha: StableIndex) -> Result<Arc<KernelProfile>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<KernelProfile>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = alpha.value().to_bits();
        if let Some(p) = cache.lock().expect("profile cache poisoned").get(&key) {
            return Ok(Arc::clone(p));
        }
        let built = Arc::new(KernelProfile::build(alpha)?);
        let mut guard = cache.lock().expect("profile cache poisoned");
        Ok(Arc::clone(guard.entry(key).or_insert(built)))
    }

    fn build(alpha: StableIndex) -> Result<Self> {
        let a = alpha.value();
        let series = (1..=PROFILE_TERMS)
            .map(|n| {
                let n = n as f64;
                let sign = if n as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * sin_pi(n * a) / PI * (n + 1.0) * (ln_gamma(n * a + 1.0) - ln_gamma(n * a + a + 1.0)).exp()
            })
            .collect();
        let stable = StableDensity::shared(alpha)?;
        let h = |v: f64| -> Result<f64> {
            let rho = v.powf(-1.0 / a);
            // h is of order one, so g needs only this much absolute accuracy
            let cfg =
                QuadConfig { abs_tol: 1e-12 * rho.powf(-1.0 - a), rel_tol: 1e-12, max_depth: 50, max_evals: 400_000 };
            let g =
                profile_integral(&stable, rho, &cfg).context(|| format!("kernel profile at rho={rho:e}, alpha={a}"))?;
            Ok(rho.powf(1.0 + a) * g)
        };
        let mut pieces = Vec::new();
        let mut todo = vec![(PROFILE_SPLIT, 0.75), (0.75, 1.0)];
        while let Some((lo, hi)) = todo.pop() {
            let piece = ChebPiece::fit(h, lo, hi, PROFILE_NODES)?;
            let probes = [lo + 0.31 * (hi - lo), lo + 0.77 * (hi - lo)];
            let mut worst = 0.0f64;
            for x in probes {
                let exact = h(x)?;
                worst = worst.max((piece.eval(x) - exact).abs() / exact.abs());
            }
            if worst > PROFILE_TOL && hi - lo > 1.0 / 256.0 {
                let mid = 0.5 * (lo + hi);
                todo.push((mid, hi));
                todo.push((lo, mid));
            } else {
                pieces.push(piece);
            }
        }
        pieces.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        Ok(KernelProfile { alpha: a, series, pieces })
    }

    fn h(&self, v: f64) -> f64 {
        if v <= PROFILE_SPLIT {
            return self.series.iter().rev().fold(0.0, |acc, &c| acc * v + c);
        }
        let i = self.pieces.partition_point(|p| p.hi < v).min(self.pieces.len() - 1);
        self.pieces[i].eval(v)
    }

    /// `K` in terms of the scaled arguments `a`, `b`.
    fn kernel(&self, a: f64, b: f64) -> f64 {
        let (m, big) = if a <= b { (a, b) } else { (b, a) };
        let v = (m / big).powf(self.alpha);
        m.powf(2.0 * self.alpha - 1.0) * big.powf(-1.0 - self.alpha) * self.h(v)
    }
}

fn half_from_sum_diff(p: f64, sum: f64, diff: f64) -> f64 {
    let q = 1.0 - p;
    let denom = p * p * diff + q * q * sum;
    2f64.powf(1.5) / PI.sqrt() * (p * q).powi(3) / denom.powf(1.5)
}

/// Closed form of the kernel at `alpha = 1/2`.
pub fn z_kernel_half(p: f64, w: f64, x: f64) -> Result<f64> {
    crate::params::check_p(p)?;
    if !(w.is_finite() && x.is_finite()) || w <= x.abs() {
        return Err(Error::Domain(format!("kernel requires w > |x|, got w={w}, x={x}")));
    }
    Ok(half_from_sum_diff(p, w + x, w - x))
}

/// One-off kernel evaluation; prefer [`ZKernel`] in loops.
pub fn z_kernel(params: ModelParams, w: f64, x: f64, cfg: &QuadConfig) -> Result<f64> {
    ZKernel::new(params, cfg)?.eval(w, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn quad(alpha: f64, p: f64) -> ZKernel {
        let params = ModelParams::new(alpha, p).unwrap();
        ZKernel::with_method(params, KernelMethod::Quadrature, &QuadConfig::relative(1e-11)).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let v = z_kernel_half(0.5, 1.0, 0.0).unwrap();
        assert!((v - 1.0 / (8.0 * PI.sqrt())).abs() < 1e-15);
        assert!((v - 0.070_523_697_9).abs() < 1e-10);
        // 2^(3/2)/sqrt(pi) * 0.25^3 0.75^3 / (0.0625 + 0.5625 * 3)^(3/2)
        let v = z_kernel_half(0.25, 2.0, 1.0).unwrap();
        assert!(rel(v, 0.004_543_774_8) < 1e-8, "{v}");
        assert_eq!(z_kernel_half(0.5, 1.3, 0.4).unwrap(), z_kernel_half(0.5, 1.3, -0.4).unwrap());
        assert!(z_kernel_half(0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn quadrature_matches_closed_form_grid() {
        for &p in &[0.5, 0.25] {
            let k = quad(0.5, p);
            for &w in &[0.5, 1.0, 2.0, 4.0, 8.0] {
                for &f in &[0.0, 0.25, -0.25, 0.5, -0.5] {
                    let x = f * w;
                    let q = k.eval(w, x).unwrap();
                    let c = z_kernel_half(p, w, x).unwrap();
                    assert!(rel(q, c) < 1e-9, "p={p} w={w} x={x}: {q} vs {c}");
                }
            }
        }
    }

    #[test]
    fn auto_uses_closed_form_at_half() {
        let params = ModelParams::new(0.5, 0.25).unwrap();
        let v = z_kernel(params, 2.0, 1.0, &QuadConfig::default()).unwrap();
        assert_eq!(v, z_kernel_half(0.25, 2.0, 1.0).unwrap());
    }

    #[test]
    fn mirror_symmetry() {
        for &alpha in &[0.25, 0.75] {
            let k = quad(alpha, 0.3);
            let m = quad(alpha, 0.7);
            let a = k.eval(1.0, 0.4).unwrap();
            let b = m.eval(1.0, -0.4).unwrap();
            assert!(rel(a, b) < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn tolerance_tightening_is_stable() {
        let params = ModelParams::new(0.75, 0.5).unwrap();
        let loose = z_kernel(params, 1.0, 0.5, &QuadConfig::relative(1e-8)).unwrap();
        let tight = z_kernel(params, 1.0, 0.5, &QuadConfig::relative(1e-10)).unwrap();
        assert!(loose > 0.0 && rel(loose, tight) < 1e-8);
    }

    #[test]
    fn endpoint_power_law() {
        // K ~ C (w - x)^(2 alpha - 1) as w -> x
        for &alpha in &[0.3, 0.7] {
            let k = quad(alpha, 0.4);
            let x = 0.5;
            let d1 = 1e-9;
            let d2 = 1e-10;
            let k1 = k.eval_sum_diff(2.0 * x + d1, d1).unwrap();
            let k2 = k.eval_sum_diff(2.0 * x + d2, d2).unwrap();
            let slope = (k1 / k2).ln() / 10f64.ln();
            // next-order correction is of relative size (w - x)^alpha
            assert!((slope - (2.0 * alpha - 1.0)).abs() < 5e-3, "alpha={alpha}: {slope}");
        }
    }

    #[test]
    fn small_alpha_tail() {
        let k = quad(0.2, 0.5);
        let v1 = k.eval(1.0, 0.2).unwrap();
        let k2 = ZKernel::with_method(
            ModelParams::new(0.2, 0.5).unwrap(),
            KernelMethod::Quadrature,
            &QuadConfig::relative(1e-9),
        )
        .unwrap();
        let v2 = k2.eval(1.0, 0.2).unwrap();
        assert!(v1 > 0.0 && rel(v1, v2) < 1e-8);
    }

    #[test]
    fn domain_errors() {
        let k = quad(0.6, 0.5);
        assert!(matches!(k.eval(0.5, 0.5), Err(Error::Domain(_))));
        assert!(matches!(k.eval(0.5, -0.7), Err(Error::Domain(_))));
        assert!(matches!(k.eval_sum_diff(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn profile_matches_quadrature() {
        let near = [(1.0, 0.0), (1.0, 0.3), (1.0, -0.7)];
        let far = [(1.0, 0.0), (1.0, 0.3), (1.0, -0.7), (2.0, 1.999), (0.3, -0.29999), (5.0, 0.01)];
        for &alpha in &[0.1, 0.25, 1.0 / 3.0, 0.5, 0.6, 0.75, 0.9] {
            // the direct integral is unreliable for extreme ratios at small alpha
            let (points, ps): (&[(f64, f64)], &[f64]) = if alpha < 0.2 { (&near, &[0.5]) } else { (&far, &[0.2, 0.5]) };
            for &p in ps {
                let params = ModelParams::new(alpha, p).unwrap();
                let t = ZKernel::with_method(params, KernelMethod::Table, &QuadConfig::default()).unwrap();
                let deep = QuadConfig { max_depth: 50, max_evals: 400_000, ..QuadConfig::relative(1e-10) };
                let q = ZKernel::with_method(params, KernelMethod::Quadrature, &deep).unwrap();
                for &(w, x) in points {
                    let a = t.eval(w, x).unwrap();
                    let b = q.eval(w, x).unwrap();
                    assert!(rel(a, b) < 1e-9, "alpha={alpha} p={p} w={w} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn profile_limit_constant() {
        // h(0) = 2 Gamma(1 + alpha) sin(pi alpha) / (pi Gamma(1 + 2 alpha))
        let alpha = 0.3;
        let prof = KernelProfile::shared(StableIndex::new(alpha).unwrap()).unwrap();
        let expect = 2.0 * crate::special::gamma(1.0 + alpha) * (PI * alpha).sin()
            / (PI * crate::special::gamma(1.0 + 2.0 * alpha));
        assert!(rel(prof.h(0.0), expect) < 1e-13);
        let half =
            ZKernel::with_method(ModelParams::new(0.5, 0.3).unwrap(), KernelMethod::Table, &QuadConfig::default())
                .unwrap();
        assert!(rel(half.eval(1.0, 0.2).unwrap(), z_kernel_half(0.3, 1.0, 0.2).unwrap()) < 1e-11);
    }

    #[test]
    fn cache_returns_identical_values() {
        let k = quad(0.75, 0.25).cached();
        let a = k.eval(1.2, 0.3).unwrap();
        let b = k.eval(1.2, 0.3).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
