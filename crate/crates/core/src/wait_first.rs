//! Density `p_t(x)` of the wait-first walk limit, supported on `(-t, t)`.
//!
//! `p_t(x) = C int_|x|^t (t - w)^(-alpha) K(w, x) dw` with
//! `C = alpha / (Gamma(1 - alpha) 2 p^(1/alpha) (1 - p)^(1/alpha))`.
//! Near `x = 0` the density grows like `|x|^(alpha - 1)`; it is infinite at `x = 0`.

use std::f64::consts::{PI, SQRT_2};

use crate::curve::{build_curve, DensityCurve, Method, Process};
use crate::error::{Error, QuadContext, Result};
use crate::kernel::{KernelMethod, ZKernel};
use crate::meijer::{pdf_wait_first_meijer, RationalIndex};
use crate::params::{check_p, check_time, EvalPoint, ModelParams};
use crate::quadrature::{integrate_finite_gaps, Estimate, QuadConfig, SingularityHint};
use crate::special::gamma;

fn exact(value: f64) -> Estimate {
    Estimate { value, error: 0.0, evals: 0 }
}

/// `alpha / (Gamma(1 - alpha) 2 p^(1/alpha) (1 - p)^(1/alpha))`.
pub(crate) fn prefactor(params: &ModelParams) -> f64 {
    let a = params.alpha();
    let p = params.p();
    a / (gamma(1.0 - a) * 2.0 * p.powf(1.0 / a) * (1.0 - p).powf(1.0 / a))
}

/// Wait-first density with automatic method selection.
pub fn pdf_wait_first(params: ModelParams, pt: EvalPoint, cfg: &QuadConfig) -> Result<Estimate> {
    pdf_wait_first_with(params, pt, cfg, Method::Auto)
}

/// Wait-first density by an explicit method.
pub fn pdf_wait_first_with(params: ModelParams, pt: EvalPoint, cfg: &QuadConfig, method: Method) -> Result<Estimate> {
    let (t, x) = (pt.t(), pt.x);
    if x.abs() >= t {
        return Ok(exact(0.0));
    }
    match method.resolve(params.alpha()) {
        Method::ClosedHalf => {
            if !params.alpha.is_half() {
                return Err(Error::InvalidParameter("closed-half method requires alpha = 1/2".into()));
            }
            Ok(exact(pdf_wait_first_half(params.p(), t, x)?))
        }
        Method::Meijer => {
            let idx = RationalIndex::from_alpha(params.alpha())?;
            pdf_wait_first_meijer(idx, params.p(), t, x, cfg)
        }
        _ => {
            let kernel = ZKernel::with_method(params, KernelMethod::Table, &kernel_cfg(cfg))?;
            wait_first_quadrature(&kernel, t, x, cfg)
        }
    }
}

pub(crate) fn kernel_cfg(cfg: &QuadConfig) -> QuadConfig {
    cfg.inner(100.0).with_rel_tol((cfg.rel_tol * 1e-2).max(1e-12))
}

/// Outer `w`-integral with a prepared kernel; `|x| < t` assumed.
pub(crate) fn wait_first_quadrature(kernel: &ZKernel, t: f64, x: f64, cfg: &QuadConfig) -> Result<Estimate> {
    if x == 0.0 {
        return Ok(exact(f64::INFINITY));
    }
    let params = kernel.params();
    let alpha = params.alpha();
    let ax = x.abs();
    let positive = x > 0.0;
    let c = prefactor(&params);
    let u = ax / t;
    if u < 0.5 {
        // w = |x|/s turns the integral into
        // |x|^(alpha-1) t^(-alpha) int_u^1 (s - u)^(-alpha) K(1 + s, 1 - s) ds
        // (arguments swapped for x < 0), which has a single length scale.
        let f = |n: crate::quadrature::Abscissa| {
            let (sum, diff) = if positive { (2.0 - n.hi, n.hi) } else { (n.hi, 2.0 - n.hi) };
            match kernel.eval_sum_diff(sum, diff) {
                Ok(k) => n.lo.powf(-alpha) * k,
                Err(_) => f64::NAN,
            }
        };
        let hint = SingularityHint::Lower(-alpha).and(SingularityHint::upper_if_singular(2.0 * alpha - 1.0));
        let scale = c * ax.powf(alpha - 1.0) * t.powf(-alpha);
        let scaled = QuadConfig { abs_tol: cfg.abs_tol / scale, ..*cfg };
        let est = integrate_finite_gaps(f, u, 1.0, hint, &scaled)
            .context(|| format!("wait-first s-integral at t={t}, x={x}"))?;
        return Ok(Estimate { value: scale * est.value, error: scale * est.error, evals: est.evals });
    }
    let two_ax = 2.0 * ax;
    let f = |n: crate::quadrature::Abscissa| {
        // n.lo = w - |x|, n.hi = t - w
        let (sum, diff) = if positive { (n.lo + two_ax, n.lo) } else { (n.lo, n.lo + two_ax) };
        match kernel.eval_sum_diff(sum, diff) {
            Ok(k) => n.hi.powf(-alpha) * k,
            Err(_) => f64::NAN,
        }
    };
    let hint = SingularityHint::Upper(-alpha).and(SingularityHint::lower_if_singular(2.0 * alpha - 1.0));
    let scaled = QuadConfig { abs_tol: cfg.abs_tol / c, ..*cfg };
    let est =
        integrate_finite_gaps(f, ax, t, hint, &scaled).context(|| format!("wait-first w-integral at t={t}, x={x}"))?;
    Ok(Estimate { value: c * est.value, error: c * est.error, evals: est.evals })
}

/// Closed form at `alpha = 1/2`.
pub fn pdf_wait_first_half(p: f64, t: f64, x: f64) -> Result<f64> {
    check_p(p)?;
    check_time(t)?;
    if x.is_nan() {
        return Err(Error::Domain("position is NaN".into()));
    }
    let ax = x.abs();
    if ax >= t {
        return Ok(0.0);
    }
    let q = 1.0 - p;
    let first = 2.0 * p * p * t + (1.0 - 2.0 * p) * (t + x);
    let second = if x > 0.0 { 2.0 * q * q * x } else { 2.0 * p * p * ax };
    Ok(SQRT_2 / PI * p * q * (t - ax).sqrt() / (first * second.sqrt()))
}

/// Evaluate the wait-first density on a grid, in parallel.
pub fn curve_wait_first(
    params: ModelParams,
    t: f64,
    grid: &[f64],
    cfg: &QuadConfig,
    method: Method,
) -> Result<DensityCurve> {
    check_time(t)?;
    cfg.validate()?;
    let resolved = method.resolve(params.alpha());
    match resolved {
        Method::Quadrature => {
            let kernel = ZKernel::with_method(params, KernelMethod::Table, &kernel_cfg(cfg))?;
            build_curve(Process::WaitFirst, params, t, grid, resolved, |x| {
                if x.abs() >= t {
                    Ok(exact(0.0))
                } else {
                    wait_first_quadrature(&kernel, t, x, cfg)
                }
            })
        }
        _ => {
            if resolved == Method::ClosedHalf && !params.alpha.is_half() {
                return Err(Error::InvalidParameter("closed-half method requires alpha = 1/2".into()));
            }
            if resolved == Method::Meijer {
                RationalIndex::from_alpha(params.alpha())?;
            }
            build_curve(Process::WaitFirst, params, t, grid, resolved, |x| {
                pdf_wait_first_with(params, EvalPoint::new(t, x)?, cfg, resolved)
            })
        }
    }
}
