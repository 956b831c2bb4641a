use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::Estimate;

/// Values above this are reported as divergent.
pub const DIVERGENCE_LEVEL: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Process {
    WaitFirst,
    JumpFirst,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::WaitFirst => "wait-first",
            Process::JumpFirst => "jump-first",
        }
    }
}

impl std::str::FromStr for Process {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wait-first" => Ok(Process::WaitFirst),
            "jump-first" => Ok(Process::JumpFirst),
            _ => Err(Error::InvalidParameter(format!("unknown process {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed form at `alpha = 1/2`, quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
    ClosedHalf,
    Meijer,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Quadrature => "quadrature",
            Method::ClosedHalf => "closed-half",
            Method::Meijer => "meijer",
        }
    }

    /// The concrete method `Auto` stands for.
    pub fn resolve(self, alpha: f64) -> Method {
        match self {
            Method::Auto if alpha == 0.5 => Method::ClosedHalf,
            Method::Auto => Method::Quadrature,
            m => m,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "quadrature" => Ok(Method::Quadrature),
            "closed-half" => Ok(Method::ClosedHalf),
            "meijer" => Ok(Method::Meijer),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    Divergent,
    Failed(String),
}

/// A density sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub process: Process,
    pub params: ModelParams,
    pub t: f64,
    pub method: Method,
    pub abscissas: Vec<f64>,
    pub values: Vec<f64>,
    pub error_estimates: Option<Vec<f64>>,
    pub status: Vec<PointStatus>,
}

impl DensityCurve {
    pub fn len(&self) -> usize {
        self.abscissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissas.is_empty()
    }

    pub fn divergent_count(&self) -> usize {
        self.status.iter().filter(|s| **s == PointStatus::Divergent).count()
    }

    pub fn failed_count(&self) -> usize {
        self.status.iter().filter(|s| matches!(s, PointStatus::Failed(_))).count()
    }
}

/// `count` points covering `(lo, hi)` with a half-step inset at both ends.
/// A point landing on zero is moved a quarter step to the right.
pub fn open_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("grid needs finite lo < hi, got {lo}:{hi}")));
    }
    let step = (hi - lo) / count as f64;
    Ok((0..count)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * step;
            if x.abs() <= 1e-9 * step {
                0.25 * step
            } else {
                x
            }
        })
        .collect())
}

/// Parse `lo:hi:count` into an open grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidParameter(format!("grid must be lo:hi:count, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    open_grid(lo, hi, count)
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("grid contains non-finite values".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
    }
    Ok(())
}

pub(crate) fn build_curve<F>(
    process: Process,
    params: ModelParams,
    t: f64,
    grid: &[f64],
    method: Method,
    eval: F,
) -> Result<DensityCurve>
where
    F: Fn(f64) -> Result<Estimate> + Sync,
{
    check_grid(grid)?;
    let results: Vec<(f64, f64, PointStatus)> = grid
        .par_iter()
        .map(|&x| match eval(x) {
            Ok(est) if est.value.is_infinite() || est.value > DIVERGENCE_LEVEL => {
                (est.value, est.error, PointStatus::Divergent)
            }
            Ok(est) => (est.value, est.error, PointStatus::Ok),
            Err(e) => {
                let v = e.partial_value().unwrap_or(f64::NAN);
                (v, f64::INFINITY, PointStatus::Failed(e.to_string()))
            }
        })
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut errors = Vec::with_capacity(results.len());
    let mut status = Vec::with_capacity(results.len());
    for (v, e, s) in results {
        values.push(v);
        errors.push(e);
        status.push(s);
    }
    Ok(DensityCurve {
        process,
        params,
        t,
        method,
        abscissas: grid.to_vec(),
        values,
        error_estimates: Some(errors),
        status,
    })
}
