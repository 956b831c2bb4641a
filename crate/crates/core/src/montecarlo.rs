//! Finite-scale simulation of both walks and histogram comparison against
//! the limit densities.
//!
//! Waiting times are exactly one-sided stable (Kanter's representation), so
//! the rescaled endpoint `R(nt)/n` differs from the limit only through the
//! discreteness of the walk.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::DensityCurve;
use crate::error::{Error, QuadContext, Result};
use crate::params::{check_time, ModelParams};
use crate::quadrature::{integrate_finite, QuadConfig, SingularityHint};
use crate::stable::StableIndex;

/// Parameters of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub params: ModelParams,
    pub t: f64,
    pub n: u64,
    pub samples: usize,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(params: ModelParams, t: f64, n: u64, samples: usize, seed: u64) -> Result<Self> {
        let cfg = WalkConfig { params, t, n, samples, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_time(self.t)?;
        if self.n == 0 {
            return Err(Error::InvalidParameter("scale n must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        Ok(())
    }

    /// Generator for one sample; independent of scheduling.
    fn stream(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

/// Kanter's exact sampler for the law with Laplace transform `exp(-u^alpha)`.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: StableIndex, rng: &mut R) -> f64 {
    let a = alpha.value();
    loop {
        let u: f64 = PI * rng.sample::<f64, _>(Open01);
        let w: f64 = rng.sample(Exp1);
        let num = ((1.0 - a) * u).sin() * (a * u).sin().powf(a / (1.0 - a));
        let den = u.sin().powf(1.0 / (1.0 - a));
        let z = (num / den / w).powf((1.0 - a) / a);
        // underflow or overflow for extreme draws; redraw keeps the law exact
        if z > 0.0 && z.is_finite() {
            return z;
        }
    }
}

/// Endpoints of one trajectory on a shared random stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEndpoints {
    /// `R(nt)/n`: completed jumps only.
    pub wait_first: f64,
    /// `R~(nt)/n`: including the jump in progress.
    pub jump_first: f64,
    /// Completed jumps.
    pub jumps: u64,
    pub up_jumps: u64,
}

/// Run one walk with waiting times rescaled by `1/n` against horizon `t`.
///
/// Upward and downward travel are summed separately; a jump is accepted
/// only while their sum stays within `t`, so `|wait_first| <= t` holds in
/// floating point as well.
pub fn simulate_path<R: Rng + ?Sized>(params: ModelParams, t: f64, n: u64, rng: &mut R) -> PathEndpoints {
    let scale = 1.0 / n as f64;
    let (mut up, mut down) = (0.0f64, 0.0f64);
    let (mut jumps, mut up_jumps) = (0u64, 0u64);
    loop {
        let tau = sample_positive_stable(params.alpha, rng) * scale;
        let is_up = rng.random::<f64>() < params.p();
        let (u2, d2) = if is_up { (up + tau, down) } else { (up, down + tau) };
        if u2 + d2 > t {
            let wait_first = up - down;
            let last = if is_up { tau } else { -tau };
            return PathEndpoints { wait_first, jump_first: wait_first + last, jumps, up_jumps };
        }
        up = u2;
        down = d2;
        jumps += 1;
        up_jumps += u64::from(is_up);
    }
}

/// All trajectories of a run, in sample order.
pub fn simulate_paths(cfg: &WalkConfig) -> Result<Vec<PathEndpoints>> {
    cfg.validate()?;
    Ok((0..cfg.samples).into_par_iter().map(|i| simulate_path(cfg.params, cfg.t, cfg.n, &mut cfg.stream(i))).collect())
}

/// Rescaled wait-first endpoints `R(nt)/n`.
pub fn simulate_wait_first(cfg: &WalkConfig) -> Result<Vec<f64>> {
    Ok(simulate_paths(cfg)?.into_iter().map(|e| e.wait_first).collect())
}

/// Rescaled jump-first endpoints `R~(nt)/n`.
pub fn simulate_jump_first(cfg: &WalkConfig) -> Result<Vec<f64>> {
    Ok(simulate_paths(cfg)?.into_iter().map(|e| e.jump_first).collect())
}

/// `bins` equal bins over `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || bins == 0 {
        return Err(Error::InvalidParameter(format!("bad binning window [{lo}, {hi}] with {bins} bins")));
    }
    let w = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * w).collect();
    edges.push(hi);
    Ok(edges)
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidParameter("need at least two bin edges".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("bin edges must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Histogram of endpoints. `masses[i]` is the fraction of all samples in bin `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub total_samples: usize,
    pub clipped_fraction: f64,
}

impl EmpiricalDensity {
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    /// Mass per unit length in each bin.
    pub fn densities(&self) -> Vec<f64> {
        self.masses.iter().zip(self.bin_edges.windows(2)).map(|(m, e)| m / (e[1] - e[0])).collect()
    }

    /// Rebuild from per-bin densities, as stored in a histogram file.
    pub fn from_densities(bin_edges: Vec<f64>, densities: &[f64], total_samples: usize) -> Result<Self> {
        check_edges(&bin_edges)?;
        if densities.len() + 1 != bin_edges.len() {
            return Err(Error::Mismatch(format!("{} densities for {} bins", densities.len(), bin_edges.len() - 1)));
        }
        let masses: Vec<f64> = densities.iter().zip(bin_edges.windows(2)).map(|(d, e)| d * (e[1] - e[0])).collect();
        let inside: f64 = masses.iter().sum();
        Ok(EmpiricalDensity { bin_edges, masses, total_samples, clipped_fraction: (1.0 - inside).max(0.0) })
    }
}

/// Bin endpoints into `[edges[0], edges[last]]`; bins are half-open except the last.
pub fn empirical_density(endpoints: &[f64], edges: &[f64]) -> Result<EmpiricalDensity> {
    if endpoints.is_empty() {
        return Err(Error::Empty("no endpoints to bin".into()));
    }
    check_edges(edges)?;
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut counts = vec![0u64; bins];
    let mut clipped = 0u64;
    for &x in endpoints {
        if !(x >= lo && x <= hi) {
            clipped += 1;
            continue;
        }
        let i = edges.partition_point(|&e| e <= x).saturating_sub(1).min(bins - 1);
        counts[i] += 1;
    }
    let total = endpoints.len() as f64;
    Ok(EmpiricalDensity {
        bin_edges: edges.to_vec(),
        masses: counts.iter().map(|&c| c as f64 / total).collect(),
        total_samples: endpoints.len(),
        clipped_fraction: clipped as f64 / total,
    })
}

/// Per-bin probability of an analytic density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBins {
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl AnalyticBins {
    /// Integrate `density` over each bin. `breaks` lists points where the
    /// density is singular or kinked, with the power-law exponent there
    /// (`0` for a kink); bins are split at them.
    pub fn integrate<F>(edges: &[f64], density: F, breaks: &[(f64, f64)], cfg: &QuadConfig) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        check_edges(edges)?;
        let masses = edges
            .par_windows(2)
            .map(|e| {
                let mut cuts = vec![(e[0], None)];
                cuts.extend(breaks.iter().filter(|b| b.0 > e[0] && b.0 < e[1]).map(|&(x, s)| (x, Some(s))));
                cuts.push((e[1], None));
                cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut total = 0.0;
                for pair in cuts.windows(2) {
                    let (a, sa) = pair[0];
                    let (b, sb) = pair[1];
                    let exponent_at = |x: f64, s: Option<f64>| {
                        s.or_else(|| breaks.iter().find(|bk| bk.0 == x).map(|bk| bk.1)).unwrap_or(0.0)
                    };
                    let hint = SingularityHint::lower_if_singular(exponent_at(a, sa))
                        .and(SingularityHint::upper_if_singular(exponent_at(b, sb)));
                    let failure = std::sync::Mutex::new(None);
                    let f = |x: f64| match density(x) {
                        Ok(v) => v,
                        Err(err) => {
                            failure.lock().expect("error slot poisoned").get_or_insert(err);
                            f64::NAN
                        }
                    };
                    let est = integrate_finite(f, a, b, hint, cfg);
                    if let Some(err) = failure.into_inner().expect("error slot poisoned") {
                        return Err(err);
                    }
                    total += est.context(|| format!("bin mass over [{a}, {b}]"))?.value;
                }
                Ok(total)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(AnalyticBins { bin_edges: edges.to_vec(), masses })
    }

    /// Bin a sampled curve by the trapezoidal rule on its points, with
    /// linear interpolation at the bin edges. The curve must cover the window.
    pub fn from_curve(curve: &DensityCurve, edges: &[f64]) -> Result<Self> {
        Self::from_points(&curve.abscissas, &curve.values, edges)
    }

    /// As [`AnalyticBins::from_curve`], from increasing abscissas and values.
    pub fn from_points(xs: &[f64], ys: &[f64], edges: &[f64]) -> Result<Self> {
        check_edges(edges)?;
        if xs.len() != ys.len() {
            return Err(Error::Mismatch(format!("{} abscissas for {} values", xs.len(), ys.len())));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("curve abscissas must be strictly increasing".into()));
        }
        if xs.len() < 2 {
            return Err(Error::Empty("curve needs at least two points".into()));
        }
        let (first, last) = (edges[0], edges[edges.len() - 1]);
        let span = xs[xs.len() - 1] - xs[0];
        let slack = span / (xs.len() - 1) as f64;
        if xs[0] > first + slack || xs[xs.len() - 1] < last - slack {
            return Err(Error::Mismatch(format!(
                "curve covers [{}, {}] but the bins span [{first}, {last}]",
                xs[0],
                xs[xs.len() - 1]
            )));
        }
        if ys.iter().any(|v| !v.is_finite()) {
            return Err(Error::Mismatch("curve has non-finite values".into()));
        }
        let interp = |x: f64| {
            let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
            let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
            (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).max(0.0)
        };
        let masses = edges
            .windows(2)
            .map(|e| {
                let mut pts = vec![e[0]];
                pts.extend(xs.iter().copied().filter(|&x| x > e[0] && x < e[1]));
                pts.push(e[1]);
                pts.windows(2).map(|s| 0.5 * (s[1] - s[0]) * (interp(s[0]) + interp(s[1]))).sum()
            })
            .collect();
        Ok(AnalyticBins { bin_edges: edges.to_vec(), masses })
    }
}

/// Distances between an empirical and an analytic histogram on the same bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStats {
    pub l1_distance: f64,
    pub ks_distance: f64,
    pub max_bin_abs_err: f64,
}

pub fn compare(emp: &EmpiricalDensity, analytic: &AnalyticBins) -> Result<ComparisonStats> {
    if emp.bin_edges.len() != analytic.bin_edges.len() {
        return Err(Error::Mismatch(format!(
            "{} empirical bins vs {} analytic bins",
            emp.bins(),
            analytic.masses.len()
        )));
    }
    for (a, b) in emp.bin_edges.iter().zip(&analytic.bin_edges) {
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            return Err(Error::Mismatch(format!("bin edge {a} does not match {b}")));
        }
    }
    let (mut l1, mut ks, mut max_err) = (0.0f64, 0.0f64, 0.0f64);
    let (mut ce, mut ca) = (0.0, 0.0);
    for (&e, &a) in emp.masses.iter().zip(&analytic.masses) {
        let d = (e - a).abs();
        l1 += d;
        max_err = max_err.max(d);
        ce += e;
        ca += a;
        ks = ks.max((ce - ca).abs());
    }
    Ok(ComparisonStats { l1_distance: l1, ks_distance: ks, max_bin_abs_err: max_err })
}
