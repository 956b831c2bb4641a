//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.
//!
//! The engine bisects the interval with the largest local error estimate
//! (15-point Kronrod / 7-point Gauss pair, QUADPACK error heuristics) until the
//! global estimate meets `max(abs_tol, rel_tol * |I|)`.
//!
//! Integrable algebraic endpoint singularities `(b - w)^e` or `(w - a)^e` with
//! `e in (-1, 0)` are removed before the adaptive stage by the power
//! substitution `b - w = s^q`, `q = 1 / (1 + e)`, which turns the integrand
//! into a bounded function of `s`. When both endpoints are singular the
//! interval is split at its midpoint and each half gets its own substitution.
//!
//! Integrands receive an [`Abscissa`], which carries the distances to both
//! endpoints computed without cancellation. Callers whose integrands contain
//! factors such as `(t - w)^(-alpha)` should use those gaps rather than
//! recomputing `t - w`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Tolerances and work limits shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any single subinterval.
    pub max_depth: u32,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-10, rel_tol: 1e-8, max_depth: 30, max_evals: 200_000 }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32, max_evals: usize) -> Result<Self, QuadError> {
        let cfg = QuadConfig { abs_tol, rel_tol, max_depth, max_evals };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Purely relative tolerance; used for inner integrals whose magnitude is unknown.
    pub fn relative(rel_tol: f64) -> Self {
        QuadConfig { abs_tol: 0.0, rel_tol, ..QuadConfig::default() }
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.abs_tol) || !finite_nonneg(self.rel_tol) {
            return Err(QuadError::InvalidConfig(format!(
                "tolerances must be finite and non-negative (abs_tol={}, rel_tol={})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(QuadError::InvalidConfig("abs_tol and rel_tol are both zero".into()));
        }
        if self.max_depth == 0 || self.max_evals == 0 {
            return Err(QuadError::InvalidConfig("max_depth and max_evals must be positive".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadConfig { rel_tol, ..self }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        QuadConfig { abs_tol, ..self }
    }

    /// Configuration for an integral nested inside another one: relative only,
    /// `factor` times tighter, never tighter than what doubles can deliver.
    pub fn inner(self, factor: f64) -> Self {
        QuadConfig { abs_tol: 0.0, rel_tol: (self.rel_tol / factor).max(1e-14), ..self }
    }

    fn target(&self, magnitude: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * magnitude)
    }
}

/// Location and strength of an integrable algebraic endpoint singularity.
///
/// Exponents must lie in `(-1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SingularityHint {
    #[default]
    None,
    /// `(w - a)^e` behaviour at the lower endpoint.
    Lower(f64),
    /// `(b - w)^e` behaviour at the upper endpoint.
    Upper(f64),
    Both {
        lower: f64,
        upper: f64,
    },
}

impl SingularityHint {
    /// Lower-endpoint hint, or `None` when the exponent is not singular.
    pub fn lower_if_singular(exponent: f64) -> Self {
        if exponent < 0.0 {
            SingularityHint::Lower(exponent)
        } else {
            SingularityHint::None
        }
    }

    /// Upper-endpoint hint, or `None` when the exponent is not singular.
    pub fn upper_if_singular(exponent: f64) -> Self {
        if exponent < 0.0 {
            SingularityHint::Upper(exponent)
        } else {
            SingularityHint::None
        }
    }

    /// Merge two hints that refer to different endpoints.
    pub fn and(self, other: SingularityHint) -> Self {
        let (lo1, hi1) = self.parts();
        let (lo2, hi2) = other.parts();
        SingularityHint::from_parts(lo1.or(lo2), hi1.or(hi2))
    }

    fn parts(self) -> (Option<f64>, Option<f64>) {
        match self {
            SingularityHint::None => (None, None),
            SingularityHint::Lower(e) => (Some(e), None),
            SingularityHint::Upper(e) => (None, Some(e)),
            SingularityHint::Both { lower, upper } => (Some(lower), Some(upper)),
        }
    }

    fn from_parts(lower: Option<f64>, upper: Option<f64>) -> Self {
        match (lower, upper) {
            (None, None) => SingularityHint::None,
            (Some(e), None) => SingularityHint::Lower(e),
            (None, Some(e)) => SingularityHint::Upper(e),
            (Some(lower), Some(upper)) => SingularityHint::Both { lower, upper },
        }
    }

    fn validate(&self) -> Result<(), QuadError> {
        let (lo, hi) = self.parts();
        for e in lo.into_iter().chain(hi) {
            if !(e > -1.0 && e < 0.0) {
                return Err(QuadError::InvalidExponent(e));
            }
        }
        Ok(())
    }
}

/// An integration node together with its exact distances to the interval ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abscissa {
    pub x: f64,
    /// `x - a`
    pub lo: f64,
    /// `b - x`
    pub hi: f64,
}

/// Integral value with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T = f64> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

/// Result of the generic engine: the best estimate and whether the tolerance was met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<T> {
    pub estimate: Estimate<T>,
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("singularity exponent {0} outside (-1, 0)")]
    InvalidExponent(f64),
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("tolerance not met: value {value:e}, error estimate {error:e} after {evals} evaluations")]
    NotConverged { value: f64, error: f64, evals: usize },
}

/// Values the engine can integrate: reals and complex numbers.
pub trait QuadValue: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

// Kronrod abscissae on [0, 1] (odd indices are the Gauss nodes) and weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Maps the integration variable `s` of one segment to a node of the
/// original interval, together with the Jacobian `dw/ds`.
#[derive(Debug, Clone, Copy)]
enum Segment {
    /// `w = s`, `s in [a, b]`.
    Plain { a: f64, b: f64 },
    /// `w = a + s^q`; `len = b - a` of the whole original interval.
    LowerPow { a: f64, q: f64, len: f64 },
    /// `w = b - s^q`.
    UpperPow { b: f64, q: f64, len: f64 },
}

impl Segment {
    #[inline]
    fn node(&self, s: f64) -> (Abscissa, f64) {
        match *self {
            Segment::Plain { a, b } => (Abscissa { x: s, lo: s - a, hi: b - s }, 1.0),
            Segment::LowerPow { a, q, len } => {
                let d = s.powf(q);
                let jac = q * s.powf(q - 1.0);
                (Abscissa { x: a + d, lo: d, hi: len - d }, jac)
            }
            Segment::UpperPow { b, q, len } => {
                let d = s.powf(q);
                let jac = q * s.powf(q - 1.0);
                (Abscissa { x: b - d, lo: len - d, hi: d }, jac)
            }
        }
    }

    /// Parameter `s` of the point `x`; NaN when `x` lies on the wrong side.
    fn inverse(&self, x: f64) -> f64 {
        match *self {
            Segment::Plain { .. } => x,
            Segment::LowerPow { a, q, .. } => (x - a).powf(1.0 / q),
            Segment::UpperPow { b, q, .. } => (b - x).powf(1.0 / q),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Interval<T> {
    seg: usize,
    s0: f64,
    s1: f64,
    depth: u32,
    value: T,
    error: f64,
}

struct ByError<T>(Interval<T>);

impl<T> PartialEq for ByError<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0.error == other.0.error
    }
}
impl<T> Eq for ByError<T> {}
impl<T> PartialOrd for ByError<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for ByError<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.error.total_cmp(&other.0.error)
    }
}

fn gauss_kronrod<T, F>(f: &F, seg: &Segment, s0: f64, s1: f64) -> Result<(T, f64), QuadError>
where
    T: QuadValue,
    F: Fn(Abscissa) -> T,
{
    let center = 0.5 * (s0 + s1);
    let half = 0.5 * (s1 - s0);
    let eval = |s: f64| -> Result<T, QuadError> {
        let (node, jac) = seg.node(s);
        // Nodes that collapse onto an endpoint carry no weight in exact arithmetic.
        if node.lo <= 0.0 || node.hi <= 0.0 || jac == 0.0 {
            return Ok(T::zero());
        }
        let v = f(node) * jac;
        if !v.norm().is_finite() {
            return Err(QuadError::NonFinite { x: node.x });
        }
        Ok(v)
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let scale = half.abs();
    let result = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err))
}

fn segments(a: f64, b: f64, hint: SingularityHint) -> Vec<(Segment, f64, f64)> {
    let len = b - a;
    let pow_len = |q: f64, l: f64| l.powf(1.0 / q);
    match hint {
        SingularityHint::None => vec![(Segment::Plain { a, b }, a, b)],
        SingularityHint::Lower(e) => {
            let q = 1.0 / (1.0 + e);
            vec![(Segment::LowerPow { a, q, len }, 0.0, pow_len(q, len))]
        }
        SingularityHint::Upper(e) => {
            let q = 1.0 / (1.0 + e);
            vec![(Segment::UpperPow { b, q, len }, 0.0, pow_len(q, len))]
        }
        SingularityHint::Both { lower, upper } => {
            let half = 0.5 * len;
            let ql = 1.0 / (1.0 + lower);
            let qu = 1.0 / (1.0 + upper);
            vec![
                (Segment::LowerPow { a, q: ql, len }, 0.0, pow_len(ql, half)),
                (Segment::UpperPow { b, q: qu, len }, 0.0, pow_len(qu, len - half)),
            ]
        }
    }
}

/// Generic adaptive driver. Returns the best estimate even when the
/// tolerance could not be met; `converged` reports which case occurred.
pub fn integrate_with<T, F>(
    f: F,
    a: f64,
    b: f64,
    hint: SingularityHint,
    cfg: &QuadConfig,
) -> Result<Outcome<T>, QuadError>
where
    T: QuadValue,
    F: Fn(Abscissa) -> T,
{
    integrate_with_cuts(f, a, b, hint, &[], cfg)
}

/// As [`integrate_with`], with the initial partition refined at `cuts`.
/// Cuts outside `(a, b)` are ignored.
pub fn integrate_with_cuts<T, F>(
    f: F,
    a: f64,
    b: f64,
    hint: SingularityHint,
    cuts: &[f64],
    cfg: &QuadConfig,
) -> Result<Outcome<T>, QuadError>
where
    T: QuadValue,
    F: Fn(Abscissa) -> T,
{
    cfg.validate()?;
    hint.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadError::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(Outcome { estimate: Estimate { value: T::zero(), error: 0.0, evals: 0 }, converged: true });
    }

    let segs = segments(a, b, hint);
    let mut heap: BinaryHeap<ByError<T>> = BinaryHeap::new();
    let mut done: Vec<Interval<T>> = Vec::new();
    let mut evals = 0usize;
    let mut total = T::zero();
    let mut total_err = 0.0;
    for (i, (seg, s0, s1)) in segs.iter().enumerate() {
        let mut nodes: Vec<f64> = cuts.iter().map(|&x| seg.inverse(x)).filter(|s| *s > *s0 && *s < *s1).collect();
        nodes.push(*s0);
        nodes.push(*s1);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        for w in nodes.windows(2) {
            let (v, e) = gauss_kronrod(&f, seg, w[0], w[1])?;
            evals += 15;
            total = total + v;
            total_err += e;
            heap.push(ByError(Interval { seg: i, s0: w[0], s1: w[1], depth: 0, value: v, error: e }));
        }
    }

    let mut iterations = 0usize;
    let converged = loop {
        if total_err <= cfg.target(total.norm()) {
            break true;
        }
        if evals + 30 > cfg.max_evals {
            break false;
        }
        let Some(ByError(worst)) = heap.pop() else {
            break false;
        };
        let mid = 0.5 * (worst.s0 + worst.s1);
        let too_deep = worst.depth >= cfg.max_depth;
        let too_narrow = mid <= worst.s0 || mid >= worst.s1;
        if too_deep || too_narrow {
            done.push(worst);
            continue;
        }
        let seg = &segs[worst.seg].0;
        let (v1, e1) = gauss_kronrod(&f, seg, worst.s0, mid)?;
        let (v2, e2) = gauss_kronrod(&f, seg, mid, worst.s1)?;
        evals += 30;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        let depth = worst.depth + 1;
        heap.push(ByError(Interval { seg: worst.seg, s0: worst.s0, s1: mid, depth, value: v1, error: e1 }));
        heap.push(ByError(Interval { seg: worst.seg, s0: mid, s1: worst.s1, depth, value: v2, error: e2 }));

        iterations += 1;
        if iterations.is_multiple_of(64) {
            // Resum to stop drift in the running totals.
            total = T::zero();
            total_err = 0.0;
            for iv in heap.iter().map(|h| &h.0).chain(done.iter()) {
                total = total + iv.value;
                total_err += iv.error;
            }
        }
    };

    let mut value = T::zero();
    let mut error = 0.0;
    for iv in heap.iter().map(|h| &h.0).chain(done.iter()) {
        value = value + iv.value;
        error += iv.error;
    }
    let converged = converged || error <= cfg.target(value.norm());
    Ok(Outcome { estimate: Estimate { value, error, evals }, converged })
}

fn finish(outcome: Outcome<f64>) -> Result<Estimate, QuadError> {
    if outcome.converged {
        Ok(outcome.estimate)
    } else {
        Err(QuadError::NotConverged {
            value: outcome.estimate.value,
            error: outcome.estimate.error,
            evals: outcome.estimate.evals,
        })
    }
}

/// Integrate `f` over `[a, b]`, removing the hinted endpoint singularities first.
pub fn integrate_finite<F>(f: F, a: f64, b: f64, hint: SingularityHint, cfg: &QuadConfig) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> f64,
{
    finish(integrate_with(|n: Abscissa| f(n.x), a, b, hint, cfg)?)
}

/// Like [`integrate_finite`] but the integrand sees exact endpoint gaps.
pub fn integrate_finite_gaps<F>(
    f: F,
    a: f64,
    b: f64,
    hint: SingularityHint,
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError>
where
    F: Fn(Abscissa) -> f64,
{
    finish(integrate_with(f, a, b, hint, cfg)?)
}

/// As [`integrate_finite_gaps`], starting from a partition refined at `cuts`.
pub fn integrate_finite_gaps_cut<F>(
    f: F,
    a: f64,
    b: f64,
    hint: SingularityHint,
    cuts: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError>
where
    F: Fn(Abscissa) -> f64,
{
    finish(integrate_with_cuts(f, a, b, hint, cuts, cfg)?)
}

/// Points at distances `scale, 4 scale, 16 scale, ...` from one end of
/// `[a, b]`, stopping short of the midpoint. Empty unless
/// `0 < scale < (b - a) / 4`.
pub fn graded_cuts(a: f64, b: f64, scale: f64, toward_lower: bool) -> Vec<f64> {
    let half = 0.5 * (b - a);
    let mut out = Vec::new();
    if !(scale > 0.0 && scale < 0.5 * half) {
        return out;
    }
    let mut d = scale;
    while d < half {
        out.push(if toward_lower { a + d } else { b - d });
        d *= 4.0;
    }
    out
}

/// Integrate over `(a, inf)` through the map `z = a + u / (1 - u)`.
pub fn integrate_semiinfinite<F>(f: F, a: f64, cfg: &QuadConfig) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> f64,
{
    integrate_semiinfinite_hinted(f, a, SingularityHint::None, cfg)
}

/// Semi-infinite integral with a hint on the mapped variable `u in (0, 1)`.
///
/// For an integrand decaying like `z^(-beta)` with `1 < beta < 2` the mapped
/// integrand behaves like `(1 - u)^(beta - 2)`, so `Upper(beta - 2)` applies;
/// `Lower(e)` describes a `(z - a)^e` singularity at the finite end.
pub fn integrate_semiinfinite_hinted<F>(
    f: F,
    a: f64,
    hint: SingularityHint,
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> f64,
{
    if !a.is_finite() {
        return Err(QuadError::InvalidInterval { a, b: f64::INFINITY });
    }
    let mapped = |n: Abscissa| {
        let gap = n.hi;
        let z = a + n.lo / gap;
        if !z.is_finite() {
            return 0.0;
        }
        f(z) / (gap * gap)
    };
    finish(integrate_with(mapped, 0.0, 1.0, hint, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> QuadConfig {
        QuadConfig::new(1e-13, 1e-12, 40, 400_000).unwrap()
    }

    #[test]
    fn constant_integrand() {
        let r = integrate_finite(|_| 1.0, 0.0, 3.0, SingularityHint::None, &tight()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn graded_cuts_resolve_nearby_singularity() {
        let eps = 1e-10_f64;
        let exact = 4.0 * ((1.0 + eps).powf(0.25) - eps.powf(0.25));
        let cfg = QuadConfig::new(0.0, 1e-12, 40, 20_000).unwrap();
        let cuts = graded_cuts(0.0, 1.0, eps, true);
        assert_eq!(cuts.len(), 17);
        let r = integrate_finite_gaps_cut(|n| (n.lo + eps).powf(-0.75), 0.0, 1.0, SingularityHint::None, &cuts, &cfg)
            .unwrap();
        assert!((r.value - exact).abs() < 1e-11 * exact, "{}", r.value);
        assert!(graded_cuts(0.0, 1.0, 0.3, true).is_empty());
        assert_eq!(graded_cuts(0.0, 1.0, 0.1, false), vec![0.9, 0.6]);
    }

    #[test]
    fn inverse_sqrt_at_upper_end() {
        let r = integrate_finite(|w| (1.0 - w).powf(-0.5), 0.0, 1.0, SingularityHint::Upper(-0.5), &tight()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn both_endpoint_kernel_identity() {
        // int_x^t (t - w)^(-1/2) w^(-3/2) dw = 2 (t - x)^(1/2) / (t x^(1/2))
        let (t, x) = (1.0f64, 0.25f64);
        let r =
            integrate_finite_gaps(|n| n.hi.powf(-0.5) * n.x.powf(-1.5), x, t, SingularityHint::Upper(-0.5), &tight())
                .unwrap();
        let exact = 2.0 * (t - x).sqrt() / (t * x.sqrt());
        assert!((exact - 3.464_101_615_137_754_6).abs() < 1e-12);
        assert!((r.value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn semiinfinite_cases() {
        let e = integrate_semiinfinite(|z| (-z).exp(), 0.0, &tight()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
        let h = integrate_semiinfinite(|z| (1.0 + z).powi(-2), 1.0, &tight()).unwrap();
        assert!((h.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn slow_tail_with_hint() {
        // int_1^inf z^(-5/4) dz = 4; mapped integrand ~ (1-u)^(-3/4)
        let r = integrate_semiinfinite_hinted(|z| (1.0 + z).powf(-1.25), 0.0, SingularityHint::Upper(-0.75), &tight())
            .unwrap();
        assert!((r.value - 4.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(QuadConfig::new(0.0, 0.0, 10, 10).is_err());
        assert!(QuadConfig::new(-1.0, 1e-3, 10, 10).is_err());
        let cfg = QuadConfig::default();
        assert!(matches!(
            integrate_finite(|x| x, 1.0, 0.0, SingularityHint::None, &cfg),
            Err(QuadError::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate_finite(|x| x, 0.0, 1.0, SingularityHint::Upper(-1.0), &cfg),
            Err(QuadError::InvalidExponent(_))
        ));
        assert!(matches!(
            integrate_finite(|x| x, 0.0, 1.0, SingularityHint::Lower(0.5), &cfg),
            Err(QuadError::InvalidExponent(_))
        ));
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        let cfg = QuadConfig::new(0.0, 1e-15, 3, 100).unwrap();
        let r = integrate_finite(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, SingularityHint::None, &cfg);
        match r {
            Err(QuadError::NotConverged { value, error, .. }) => {
                assert!(value.is_finite() && error > 0.0);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let cfg = QuadConfig::default();
        let r = integrate_finite(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, SingularityHint::None, &cfg);
        assert!(matches!(r, Err(QuadError::NonFinite { .. })));
    }

    #[test]
    fn complex_values() {
        let cfg = tight();
        let out = integrate_with(
            |n: Abscissa| Complex64::new(0.0, n.x).exp(),
            0.0,
            std::f64::consts::PI,
            SingularityHint::None,
            &cfg,
        )
        .unwrap();
        assert!(out.converged);
        assert!((out.estimate.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn hints_merge() {
        let h = SingularityHint::lower_if_singular(-0.3).and(SingularityHint::Upper(-0.5));
        assert_eq!(h, SingularityHint::Both { lower: -0.3, upper: -0.5 });
        assert_eq!(SingularityHint::lower_if_singular(0.2), SingularityHint::None);
    }
}
