use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable::StableIndex;

/// Stability index and up-probability of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    pub alpha: StableIndex,
    p: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        let alpha = StableIndex::new(alpha)?;
        Self::with_index(alpha, p)
    }

    pub fn with_index(alpha: StableIndex, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")));
        }
        Ok(ModelParams { alpha, p })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Same walk with the directions reversed.
    pub fn mirrored(&self) -> Self {
        ModelParams { alpha: self.alpha, p: 1.0 - self.p }
    }
}

#[derive(Deserialize)]
struct RawParams {
    alpha: f64,
    p: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.alpha, raw.p)
    }
}

/// Time and position at which a density is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalPoint {
    t: f64,
    pub x: f64,
}

impl EvalPoint {
    pub fn new(t: f64, x: f64) -> Result<Self> {
        check_time(t)?;
        if x.is_nan() {
            return Err(Error::Domain("position is NaN".into()));
        }
        Ok(EvalPoint { t, x })
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t must be positive and finite, got {t}")))
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must lie in (0, 1), got {p}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModelParams::new(0.5, 0.0).is_err());
        assert!(ModelParams::new(0.5, 1.0).is_err());
        assert!(ModelParams::new(1.2, 0.5).is_err());
        assert!(ModelParams::new(0.5, f64::NAN).is_err());
        let m = ModelParams::new(0.3, 0.2).unwrap();
        assert!((m.mirrored().p() - 0.8).abs() < 1e-15);
        assert!(EvalPoint::new(0.0, 0.1).is_err());
        assert!(EvalPoint::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let m = ModelParams::new(0.75, 0.25).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"alpha":0.75,"p":0.25}"#);
        let back: ModelParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ModelParams>(r#"{"alpha":1.5,"p":0.25}"#).is_err());
        assert!(serde_json::from_str::<ModelParams>(r#"{"alpha":0.5,"p":1.25}"#).is_err());
    }
}
