//! Density `w_t(y)` of the jump-first walk limit, supported on the whole line.
//!
//! For `|y| < t` the density is
//! `c1 int_{-t}^{y} (y - x)^(-1-alpha) J_1(x) dx + c2 int_{y}^{t} (x - y)^(-1-alpha) J_2(x) dx`
//! where `J_i(x)` integrates the kernel `K(w, x)` over `w` from
//! `max(|x|, t -+ y +- x)` to `t`. For `|y| >= t` only one term survives and the
//! lower `w` limit is `|x|`. The `x`-ranges are split where the lower limit
//! changes branch, so that every piece has a smooth integrand apart from
//! endpoint power laws, which are removed by singularity hints.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::{build_curve, DensityCurve, Method, Process};
use crate::error::{Error, QuadContext, Result};
use crate::kernel::{KernelMethod, ZKernel};
use crate::params::{check_p, check_time, ModelParams};
use crate::quadrature::{
    graded_cuts, integrate_finite_gaps, integrate_finite_gaps_cut, Abscissa, Estimate, QuadConfig, SingularityHint,
};
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionCase {
    /// `|y| < t`
    Interior,
    /// `y >= t`
    UpperTail,
    /// `y <= -t`
    LowerTail,
}

impl RegionCase {
    pub fn of(t: f64, y: f64) -> Self {
        if y >= t {
            RegionCase::UpperTail
        } else if y <= -t {
            RegionCase::LowerTail
        } else {
            RegionCase::Interior
        }
    }
}

/// Default configuration for the triple integral: `1e-4` relative.
pub fn default_jump_first_cfg() -> QuadConfig {
    QuadConfig { abs_tol: 1e-12, rel_tol: 1e-4, ..QuadConfig::default() }
}

/// Jump-first density with automatic method selection.
pub fn pdf_jump_first(params: ModelParams, t: f64, y: f64, cfg: &QuadConfig) -> Result<Estimate> {
    pdf_jump_first_with(params, t, y, cfg, Method::Auto)
}

pub fn pdf_jump_first_with(params: ModelParams, t: f64, y: f64, cfg: &QuadConfig, method: Method) -> Result<Estimate> {
    check_time(t)?;
    cfg.validate()?;
    if !y.is_finite() {
        return Err(Error::Domain(format!("position must be finite, got {y}")));
    }
    match method.resolve(params.alpha()) {
        Method::ClosedHalf => {
            if !params.alpha.is_half() {
                return Err(Error::InvalidParameter("closed-half method requires alpha = 1/2".into()));
            }
            let value = pdf_jump_first_half(params.p(), t, y)?;
            Ok(Estimate { value, error: 0.0, evals: 0 })
        }
        Method::Meijer => Err(Error::InvalidParameter("the Meijer method covers only the wait-first density".into())),
        _ => {
            let kernel = ZKernel::with_method(params, KernelMethod::Table, &inner_cfg(cfg, 1e-4))?;
            jump_first_quadrature(&kernel, t, y, cfg)
        }
    }
}

fn inner_cfg(cfg: &QuadConfig, factor: f64) -> QuadConfig {
    QuadConfig { abs_tol: 0.0, rel_tol: (cfg.rel_tol * factor).max(1e-12), ..*cfg }
}

struct Pieces<'a> {
    kernel: &'a ZKernel,
    alpha: f64,
    w_cfg: QuadConfig,
    x_cfg: QuadConfig,
    w_hint: SingularityHint,
    /// `int_0^1 s^(-alpha) K(1, +-s) ds` for `x > 0` and `x < 0`.
    full: [f64; 2],
}

impl Pieces<'_> {
    /// `int_{t - h}^{t} K dw` with `w + x = s0 + (w - lower)` and `w - x = d0 + (w - lower)`.
    fn window(&self, h: f64, s0: f64, d0: f64) -> Result<f64> {
        if h <= 0.0 {
            return Ok(0.0);
        }
        let f = |n: Abscissa| self.kernel.eval_sum_diff(s0 + n.lo, d0 + n.lo).unwrap_or(f64::NAN);
        let scale = if s0 > 0.0 && d0 > 0.0 { s0.min(d0) } else { s0.max(d0) };
        let cuts = graded_cuts(0.0, h, scale, true);
        integrate_finite_gaps_cut(f, 0.0, h, self.w_hint, &cuts, &self.w_cfg)
            .context(|| format!("kernel window of width {h} at w + x = {s0}, w - x = {d0}"))
            .map(|e| e.value)
    }

    /// `int_a^b s^(-alpha) K(1, +-s) ds`.
    fn scaled(&self, a: f64, b: f64, positive: bool, hint: SingularityHint) -> Result<f64> {
        let f = |n: Abscissa| {
            let s = n.x;
            let gap = if b == 1.0 { n.hi } else { 1.0 - s };
            let (sum, diff) = if positive { (1.0 + s, gap) } else { (gap, 1.0 + s) };
            s.powf(-self.alpha) * self.kernel.eval_sum_diff(sum, diff).unwrap_or(f64::NAN)
        };
        integrate_finite_gaps(f, a, b, hint, &self.w_cfg)
            .context(|| format!("scaled kernel integral over [{a}, {b}]"))
            .map(|e| e.value)
    }

    /// `J(x) = int_{|x|}^{t} K(w, x) dw`.
    ///
    /// With `s = |x| / w` and homogeneity, `J = |x|^(alpha-1) int_{|x|/t}^1 s^(-alpha) K(1, +-s) ds`;
    /// for small `|x|` the integral is the full one minus a short piece near zero.
    fn inner_abs(&self, t: f64, x: f64) -> Result<f64> {
        let ax = x.abs();
        let eps = ax / t;
        if eps >= 0.5 {
            return if x >= 0.0 { self.window(t - ax, 2.0 * ax, 0.0) } else { self.window(t - ax, 0.0, 2.0 * ax) };
        }
        let positive = x >= 0.0;
        let full = self.full[usize::from(!positive)];
        let head = if eps > 0.0 { self.scaled(0.0, eps, positive, SingularityHint::Lower(-self.alpha))? } else { 0.0 };
        Ok(ax.powf(self.alpha - 1.0) * (full - head))
    }

    fn outer<F>(&self, g: F, a: f64, b: f64, hint: SingularityHint, cuts: &[f64], what: &str) -> Result<Estimate>
    where
        F: Fn(Abscissa) -> Result<f64>,
    {
        if b <= a {
            return Ok(Estimate { value: 0.0, error: 0.0, evals: 0 });
        }
        let slot = std::sync::Mutex::new(None);
        let f = |n: Abscissa| match g(n) {
            Ok(v) => v,
            Err(e) => {
                slot.lock().expect("error slot poisoned").get_or_insert(e);
                f64::NAN
            }
        };
        let out = integrate_finite_gaps_cut(f, a, b, hint, cuts, &self.x_cfg);
        if let Some(e) = slot.into_inner().expect("error slot poisoned") {
            return Err(e);
        }
        out.context(|| format!("jump-first {what} (x in [{a}, {b}], alpha={})", self.alpha))
    }
}

/// Triple integral with a prepared kernel.
pub(crate) fn jump_first_quadrature(kernel: &ZKernel, t: f64, y: f64, cfg: &QuadConfig) -> Result<Estimate> {
    let params = kernel.params();
    let alpha = params.alpha();
    let p = params.p();
    let g1 = gamma(1.0 - alpha);
    let c1 = alpha * alpha * p.powf(1.0 - 1.0 / alpha) / (2.0 * (1.0 - p).powf(1.0 / alpha) * g1);
    let c2 = alpha * alpha * (1.0 - p).powf(1.0 - 1.0 / alpha) / (2.0 * p.powf(1.0 / alpha) * g1);
    let e = -1.0 - alpha;
    let mut pieces = Pieces {
        kernel,
        alpha,
        w_cfg: inner_cfg(cfg, 1e-2),
        x_cfg: QuadConfig { rel_tol: cfg.rel_tol * 0.5, ..*cfg },
        w_hint: SingularityHint::lower_if_singular(2.0 * alpha - 1.0),
        full: [0.0; 2],
    };
    let both = SingularityHint::Lower(-alpha).and(SingularityHint::upper_if_singular(2.0 * alpha - 1.0));
    pieces.full = [pieces.scaled(0.0, 1.0, true, both)?, pieces.scaled(0.0, 1.0, false, both)?];
    let none = SingularityHint::None;
    let mut total = Estimate { value: 0.0, error: 0.0, evals: 0 };
    let mut add = |c: f64, est: Estimate| {
        total.value += c * est.value;
        total.error += c * est.error;
        total.evals += est.evals;
    };

    match RegionCase::of(t, y) {
        RegionCase::Interior => {
            let k1 = 0.5 * (y - t);
            let k2 = 0.5 * (y + t);
            // y close to either end of the support puts a feature of width t -+ y next to k1 or k2
            let (near_top, near_bottom) = (t - y, t + y);
            // x in [-t, (y-t)/2]: lower w limit is |x| = -x
            let a = pieces.outer(
                |n| Ok((y - n.x).powf(e) * pieces.inner_abs(t, n.x)?),
                -t,
                k1,
                none,
                &graded_cuts(-t, k1, 0.5 * near_top, false),
                "piece A",
            )?;
            // x in [(y-t)/2, y]: window y - x above t - y + x
            let b = pieces.outer(
                |n| {
                    let h = n.hi;
                    Ok(h.powf(e) * pieces.window(h, 2.0 * n.lo, t - y)?)
                },
                k1,
                y,
                SingularityHint::Upper(-alpha),
                &graded_cuts(k1, y, near_top, true),
                "piece B",
            )?;
            // x in [y, (y+t)/2]: window x - y above t + y - x
            let c = pieces.outer(
                |n| {
                    let h = n.lo;
                    Ok(h.powf(e) * pieces.window(h, t + y, 2.0 * n.hi)?)
                },
                y,
                k2,
                SingularityHint::Lower(-alpha),
                &graded_cuts(y, k2, near_bottom, false),
                "piece C",
            )?;
            // x in [(y+t)/2, t]: lower w limit is |x| = x
            let d = pieces.outer(
                |n| Ok((n.x - y).powf(e) * pieces.inner_abs(t, n.x)?),
                k2,
                t,
                none,
                &graded_cuts(k2, t, 0.5 * near_bottom, true),
                "piece D",
            )?;
            add(c1, a);
            add(c1, b);
            add(c2, c);
            add(c2, d);
        }
        RegionCase::UpperTail => {
            // J(x) ~ |x|^(alpha - 1) at 0; at y = t the integrand ~ (t - x)^(alpha - 1)
            let s = alpha - 1.0;
            let left = pieces.outer(
                |n| Ok((y + n.hi).powf(e) * pieces.inner_abs(t, n.x)?),
                -t,
                0.0,
                SingularityHint::Upper(s),
                &[],
                "upper tail, x < 0",
            )?;
            let right = pieces.outer(
                |n| Ok(((y - t) + n.hi).powf(e) * pieces.inner_abs(t, n.x)?),
                0.0,
                t,
                SingularityHint::Both { lower: s, upper: s },
                &graded_cuts(0.0, t, y - t, false),
                "upper tail, x > 0",
            )?;
            add(c1, left);
            add(c1, right);
        }
        RegionCase::LowerTail => {
            let s = alpha - 1.0;
            let left = pieces.outer(
                |n| Ok(((-t - y) + n.lo).powf(e) * pieces.inner_abs(t, n.x)?),
                -t,
                0.0,
                SingularityHint::Both { lower: s, upper: s },
                &graded_cuts(-t, 0.0, -t - y, true),
                "lower tail, x < 0",
            )?;
            let right = pieces.outer(
                |n| Ok((n.lo - y).powf(e) * pieces.inner_abs(t, n.x)?),
                0.0,
                t,
                SingularityHint::Lower(s),
                &[],
                "lower tail, x > 0",
            )?;
            add(c2, left);
            add(c2, right);
        }
    }
    Ok(total)
}

/// Closed form at `alpha = 1/2`, written to stay finite at `y = 0` and `y = +-t`.
pub fn pdf_jump_first_half(p: f64, t: f64, y: f64) -> Result<f64> {
    check_p(p)?;
    check_time(t)?;
    if !y.is_finite() {
        return Err(Error::Domain(format!("position must be finite, got {y}")));
    }
    let q = 1.0 - p;
    let st = t.sqrt();
    Ok(match RegionCase::of(t, y) {
        RegionCase::Interior => {
            let lin = (1.0 - 2.0 * p * q) * t + (1.0 - 2.0 * p) * y;
            2.0 * p * q * st / (PI * ((t - y).sqrt() + (t + y).sqrt()) * lin)
        }
        RegionCase::UpperTail => p / PI * st / (y * (p * (y - t).sqrt() + q * (y + t).sqrt())),
        RegionCase::LowerTail => (p - 1.0) / PI * st / (y * (p * (t - y).sqrt() + q * (-y - t).sqrt())),
    })
}

/// Evaluate the jump-first density on a grid, in parallel.
pub fn curve_jump_first(
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
            let kernel = ZKernel::with_method(params, KernelMethod::Table, &inner_cfg(cfg, 1e-4))?;
            build_curve(Process::JumpFirst, params, t, grid, resolved, |y| jump_first_quadrature(&kernel, t, y, cfg))
        }
        Method::ClosedHalf if params.alpha.is_half() => {
            build_curve(Process::JumpFirst, params, t, grid, resolved, |y| {
                Ok(Estimate { value: pdf_jump_first_half(params.p(), t, y)?, error: 0.0, evals: 0 })
            })
        }
        Method::ClosedHalf => Err(Error::InvalidParameter("closed-half method requires alpha = 1/2".into())),
        _ => Err(Error::InvalidParameter("the Meijer method covers only the wait-first density".into())),
    }
}
