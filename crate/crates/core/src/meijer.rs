//! Meijer G functions by numerical Mellin–Barnes integration, and the
//! representations of `r_(l/k)` and of the wait-first density they provide.
//!
//! `G^{m,n}_{p,q}(a; b; z) = (1 / 2 pi i) int_L phi(s) ds` with
//! `phi(s) = prod_{j<=m} Gamma(b_j - s) prod_{j<=n} Gamma(1 - a_j + s)
//!  / (prod_{j>n} Gamma(a_j - s) prod_{j>m} Gamma(1 - b_j + s)) z^s`.
//! The contour is the vertical line `Re s = sigma` between the two pole
//! families, with `sigma` placed where the integrand is smallest on the real
//! axis. Only real parameters and `z > 0` are supported.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, QuadContext, Result};
use crate::kernel::ZKernel;
use crate::params::{check_p, check_time, ModelParams};
use crate::quadrature::{integrate_finite_gaps, integrate_with, Abscissa, Estimate, QuadConfig, SingularityHint};
use crate::special::{gamma, ln_gamma, ln_gamma_complex};
use crate::wait_first::{kernel_cfg, prefactor};

/// Nodes whose G-argument lies this close to 1 use the kernel instead.
pub const HYBRID_RADIUS: f64 = 0.05;

/// `alpha = l / k` in lowest terms with `0 < l < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalIndex {
    l: u32,
    k: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RationalIndex {
    pub fn new(l: u32, k: u32) -> Result<Self> {
        if l == 0 || l >= k {
            return Err(Error::InvalidParameter(format!("need 0 < l < k, got {l}/{k}")));
        }
        if gcd(l, k) != 1 {
            return Err(Error::InvalidParameter(format!("{l}/{k} is not in lowest terms")));
        }
        Ok(RationalIndex { l, k })
    }

    /// The fraction with denominator at most 100 equal to `alpha`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        for k in 2..=100u32 {
            let l = (alpha * k as f64).round();
            if l >= 1.0 && l < k as f64 && (l / k as f64 - alpha).abs() <= 1e-12 {
                let g = gcd(l as u32, k);
                return RationalIndex::new(l as u32 / g, k / g);
            }
        }
        Err(Error::InvalidParameter(format!("alpha = {alpha} is not a fraction l/k with k <= 100")))
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.l as f64 / self.k as f64
    }
}

impl std::str::FromStr for RationalIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected l/k, got {s:?}"));
        let (l, k) = s.split_once('/').ok_or_else(bad)?;
        RationalIndex::new(l.trim().parse().map_err(|_| bad())?, k.trim().parse().map_err(|_| bad())?)
    }
}

/// `[a/k, (a+1)/k, ..., (a+k-1)/k]`.
pub fn delta_list(k: u32, a: f64) -> Vec<f64> {
    (0..k).map(|j| (a + j as f64) / k as f64).collect()
}

/// Parameters of `G^{m,n}_{p,q}` with a positive argument.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerSpec {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    ln_z: f64,
    sigma_lo: f64,
    sigma_hi: f64,
}

impl MeijerSpec {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>, z: f64) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Meijer(format!("argument must be positive and finite, got {z}")));
        }
        Self::with_ln_argument(m, n, a, b, z.ln())
    }

    /// Same as [`new`](Self::new) with the argument given as `ln z`.
    pub fn with_ln_argument(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>, ln_z: f64) -> Result<Self> {
        if m > b.len() || n > a.len() || m + n == 0 {
            return Err(Error::Meijer(format!("inconsistent orders m={m}, n={n}, p={}, q={}", a.len(), b.len())));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) || !ln_z.is_finite() {
            return Err(Error::Meijer("parameters must be finite".into()));
        }
        let near_int = |d: f64| (d - d.round()).abs() < 1e-12;
        for fam in [&b[..m], &a[..n]] {
            for i in 0..fam.len() {
                for j in i + 1..fam.len() {
                    if near_int(fam[i] - fam[j]) {
                        return Err(Error::Meijer(format!(
                            "parameters {} and {} differ by an integer (multiple pole)",
                            fam[i], fam[j]
                        )));
                    }
                }
            }
        }
        let sigma_hi = b[..m].iter().copied().fold(f64::INFINITY, f64::min);
        let sigma_lo = a[..n].iter().map(|v| v - 1.0).fold(f64::NEG_INFINITY, f64::max);
        if sigma_lo >= sigma_hi {
            return Err(Error::Meijer(format!("pole families overlap: no contour between {sigma_lo} and {sigma_hi}")));
        }
        let p = a.len() as f64;
        let q = b.len() as f64;
        let delta = (m + n) as f64 - 0.5 * (p + q);
        if delta <= 0.0 {
            return Err(Error::Meijer(format!("contour integral does not converge (delta = {delta})")));
        }
        Ok(MeijerSpec { m, n, a, b, ln_z, sigma_lo, sigma_hi })
    }

    pub fn argument(&self) -> f64 {
        self.ln_z.exp()
    }

    pub fn with_argument_ln(&self, ln_z: f64) -> Self {
        MeijerSpec { ln_z, ..self.clone() }
    }

    fn ln_phi(&self, s: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = s * self.ln_z;
        for (j, &b) in self.b.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma_complex(b - s);
            } else {
                acc -= ln_gamma_complex(one - b + s);
            }
        }
        for (j, &a) in self.a.iter().enumerate() {
            if j < self.n {
                acc += ln_gamma_complex(one - a + s);
            } else {
                acc -= ln_gamma_complex(a - s);
            }
        }
        acc
    }

    fn ln_abs_phi_real(&self, sigma: f64) -> f64 {
        let mut acc = sigma * self.ln_z;
        for (j, &b) in self.b.iter().enumerate() {
            acc += if j < self.m { ln_gamma(b - sigma) } else { -ln_gamma(1.0 - b + sigma) };
        }
        for (j, &a) in self.a.iter().enumerate() {
            acc += if j < self.n { ln_gamma(1.0 - a + sigma) } else { -ln_gamma(a - sigma) };
        }
        acc
    }

    /// Contour abscissa minimising the real-axis integrand.
    fn choose_sigma(&self) -> f64 {
        let hi = self.sigma_hi;
        let lo = if self.sigma_lo.is_finite() { self.sigma_lo } else { hi - 200.0 };
        let pad = 1e-3 * (hi - lo).min(1.0);
        let (mut x0, mut x1) = (lo + pad, hi - pad);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |s: f64| {
            let v = self.ln_abs_phi_real(s);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut c = x1 - g * (x1 - x0);
        let mut d = x0 + g * (x1 - x0);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if fc < fd {
                x1 = d;
                d = c;
                fd = fc;
                c = x1 - g * (x1 - x0);
                fc = f(c);
            } else {
                x0 = c;
                c = d;
                fc = fd;
                d = x0 + g * (x1 - x0);
                fd = f(d);
            }
        }
        let s = 0.5 * (x0 + x1);
        if f(s).is_finite() {
            s
        } else {
            0.5 * (lo + pad + hi - pad)
        }
    }
}

/// Value of the G function with a quadrature error estimate.
pub fn eval_meijer_g(spec: &MeijerSpec, cfg: &QuadConfig) -> Result<Estimate> {
    cfg.validate()?;
    let sigma = spec.choose_sigma();
    let peak_ln = spec.ln_phi(Complex64::new(sigma, 0.0)).re;
    let cutoff = peak_ln + (1e-16f64).ln();
    let mut big_t = 2.0;
    while spec.ln_phi(Complex64::new(sigma, big_t)).re > cutoff {
        big_t *= 1.5;
        if big_t > 1e4 {
            return Err(Error::Meijer(format!(
                "integrand decays too slowly (ln z = {}); use the kernel fallback",
                spec.ln_z
            )));
        }
    }
    let scale = peak_ln;
    let f = |n: Abscissa| (spec.ln_phi(Complex64::new(sigma, n.x)) - scale).exp();
    let qcfg = QuadConfig { abs_tol: 1e-15 * big_t, rel_tol: cfg.rel_tol, ..*cfg };
    let out = integrate_with(f, -big_t, big_t, SingularityHint::None, &qcfg)
        .context(|| format!("Mellin-Barnes integral at ln z = {}", spec.ln_z))?;
    let factor = scale.exp() / (2.0 * PI);
    let value = out.estimate.value;
    if !out.converged {
        return Err(Error::Meijer(format!(
            "Mellin-Barnes integral did not converge (value {:e}, error {:e})",
            value.re * factor,
            out.estimate.error * factor
        )));
    }
    if value.im.abs() > 1e-8 * value.re.abs() + out.estimate.error {
        return Err(Error::Meijer(format!("imaginary residual {:e} too large relative to {:e}", value.im, value.re)));
    }
    Ok(Estimate { value: value.re * factor, error: out.estimate.error * factor, evals: out.estimate.evals })
}

/// `r_(l/k)(x)` from its `G^{k,0}_{l,k}` representation.
pub fn r_rational(idx: RationalIndex, x: f64, cfg: &QuadConfig) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("argument must be finite, got {x}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let (l, k) = (idx.l as f64, idx.k as f64);
    let ln_z = l * l.ln() - k * k.ln() - l * x.ln();
    let spec = MeijerSpec::with_ln_argument(idx.k as usize, 0, delta_list(idx.l, 0.0), delta_list(idx.k, 0.0), ln_z)?;
    let g = eval_meijer_g(&spec, cfg)?;
    Ok((k * l).sqrt() / (2.0 * PI).powf(0.5 * (k - l)) / x * g.value)
}

/// Parameter lists of the `G^{k,k}_{l+k,l+k}` in the wait-first representation.
fn wait_first_spec(idx: RationalIndex) -> Result<MeijerSpec> {
    let (l, k) = (idx.l, idx.k);
    let alpha = idx.alpha();
    let mut a: Vec<f64> = delta_list(k, k as f64 * (alpha / l as f64 - 1.0)).into_iter().map(|v| -v).collect();
    a.extend(delta_list(l, 0.0));
    let mut b = delta_list(k, 0.0);
    b.extend(delta_list(l, l as f64 * (alpha / l as f64 - 1.0)).into_iter().map(|v| -v));
    MeijerSpec::with_ln_argument(k as usize, k as usize, a, b, 0.0)
}

/// Evaluation details of [`pdf_wait_first_meijer_detailed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerEvaluation {
    pub estimate: Estimate,
    /// Nodes evaluated through the kernel because the argument was near 1.
    pub fallback_nodes: usize,
}

/// Wait-first density from the Meijer G representation.
pub fn pdf_wait_first_meijer(idx: RationalIndex, p: f64, t: f64, x: f64, cfg: &QuadConfig) -> Result<Estimate> {
    pdf_wait_first_meijer_detailed(idx, p, t, x, cfg).map(|e| e.estimate)
}

pub fn pdf_wait_first_meijer_detailed(
    idx: RationalIndex,
    p: f64,
    t: f64,
    x: f64,
    cfg: &QuadConfig,
) -> Result<MeijerEvaluation> {
    check_p(p)?;
    check_time(t)?;
    cfg.validate()?;
    if x.is_nan() {
        return Err(Error::Domain("position is NaN".into()));
    }
    let ax = x.abs();
    if ax >= t {
        return Ok(MeijerEvaluation { estimate: Estimate { value: 0.0, error: 0.0, evals: 0 }, fallback_nodes: 0 });
    }
    if x == 0.0 {
        return Ok(MeijerEvaluation {
            estimate: Estimate { value: f64::INFINITY, error: 0.0, evals: 0 },
            fallback_nodes: 0,
        });
    }
    let (l, k) = (idx.l as f64, idx.k as f64);
    let alpha = idx.alpha();
    let params = ModelParams::new(alpha, p)?;
    let base = wait_first_spec(idx)?;
    let kernel = ZKernel::new(params, &kernel_cfg(cfg))?;
    let g_cfg = cfg.inner(100.0);
    let c_meijer =
        2f64.powf(1.0 - alpha - k + l) / (p * PI.powf(k - l)) * k * k / l.powf(alpha) * alpha / gamma(1.0 - alpha);
    let c_kernel = prefactor(&params);
    let ln_ratio_p = k * ((1.0 - p) / p).ln();
    let fallbacks = AtomicUsize::new(0);
    let two_ax = 2.0 * ax;
    let positive = x > 0.0;

    let node = |n: Abscissa| -> Result<f64> {
        let (sum, diff) = if positive { (n.lo + two_ax, n.lo) } else { (n.lo, n.lo + two_ax) };
        let ln_z = ln_ratio_p + l * (sum.ln() - diff.ln());
        let weight = n.hi.powf(-alpha);
        if (ln_z.exp() - 1.0).abs() < HYBRID_RADIUS {
            fallbacks.fetch_add(1, Ordering::Relaxed);
            return Ok(weight * c_kernel * kernel.eval_sum_diff(sum, diff)?);
        }
        let g = eval_meijer_g(&base.with_argument_ln(ln_z), &g_cfg)?;
        Ok(weight * c_meijer * sum.powf(alpha - 1.0) / diff * g.value)
    };
    let first_error = std::sync::Mutex::new(None);
    let f = |n: Abscissa| match node(n) {
        Ok(v) => v,
        Err(e) => {
            first_error.lock().expect("error slot poisoned").get_or_insert(e);
            f64::NAN
        }
    };
    let hint = SingularityHint::Upper(-alpha).and(SingularityHint::lower_if_singular(2.0 * alpha - 1.0));
    let result = integrate_finite_gaps(f, ax, t, hint, cfg);
    if let Some(e) = first_error.into_inner().expect("error slot poisoned") {
        return Err(e);
    }
    let est = result.context(|| format!("Meijer wait-first w-integral at t={t}, x={x}"))?;
    Ok(MeijerEvaluation { estimate: est, fallback_nodes: fallbacks.into_inner() })
}
