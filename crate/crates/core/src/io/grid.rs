use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const MAX_POINTS: usize = 1_000_000;

/// A weight grid: `lo:step:hi` in log space, or a comma-separated list of
/// linear values.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Log { lo: f64, step: f64, hi: f64 },
    List(Vec<f64>),
}

impl GridSpec {
    /// Grid points as logs of the weights.
    pub fn log_values(&self) -> Vec<f64> {
        match self {
            GridSpec::Log { lo, step, hi } => {
                let k = ((hi - lo) / step + 1e-9).floor() as usize;
                (0..=k).map(|i| lo + step * i as f64).collect()
            }
            GridSpec::List(v) => v.iter().map(|x| x.ln()).collect(),
        }
    }

    /// Grid points as weights.
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Log { .. } => self.log_values().into_iter().map(f64::exp).collect(),
            GridSpec::List(v) => v.clone(),
        }
    }
}

fn number(s: &str, spec: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::GridSpec(spec.to_string()))
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::GridSpec(s.to_string());
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [lo, step, hi] = parts[..] else { return Err(bad()) };
            let (lo, step, hi) = (number(lo, s)?, number(step, s)?, number(hi, s)?);
            if step <= 0.0 || hi < lo || (hi - lo) / step > MAX_POINTS as f64 {
                return Err(bad());
            }
            Ok(GridSpec::Log { lo, step, hi })
        } else {
            let v = s.split(',').map(|x| number(x, s)).collect::<Result<Vec<f64>>>()?;
            if v.iter().any(|x| *x <= 0.0) {
                return Err(bad());
            }
            Ok(GridSpec::List(v))
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Log { lo, step, hi } => write!(f, "{lo}:{step}:{hi}"),
            GridSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}
