use rayon::prelude::*;

use super::{run, Metrics, Scenario};
use crate::error::SimError;

/// Which scenario field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Knob {
    /// Keep the first `value` flows.
    Connections,
    /// Set every flow's rate to `value` packets/s.
    Rate,
    /// Run for `value` seconds.
    Duration,
}

impl Knob {
    pub fn as_str(self) -> &'static str {
        match self {
            Knob::Connections => "connections",
            Knob::Rate => "rate",
            Knob::Duration => "duration",
        }
    }

    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario, SimError> {
        let mut s = base.clone();
        match self {
            Knob::Connections => {
                let n = value as usize;
                if value.fract() != 0.0 || n == 0 || n > base.flows.len() {
                    return Err(SimError::Invalid(format!(
                        "connections must be an integer in 1..={}, got {value}",
                        base.flows.len()
                    )));
                }
                s.flows.truncate(n);
            }
            Knob::Rate => {
                for f in &mut s.flows {
                    f.rate = value;
                }
            }
            Knob::Duration => s.duration = value,
        }
        Ok(s)
    }
}

impl std::str::FromStr for Knob {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "connections" => Ok(Knob::Connections),
            "rate" => Ok(Knob::Rate),
            "duration" => Ok(Knob::Duration),
            other => Err(format!(
                "unknown knob `{other}` (expected connections, rate or duration)"
            )),
        }
    }
}

/// Seed for replication `rep` of sweep point `point`:
/// `base + 0x9E3779B97F4A7C15 * (point * replications + rep + 1)`, wrapping.
pub fn derive_seed(base: u64, point: usize, rep: usize, replications: usize) -> u64 {
    let slot = (point * replications + rep + 1) as u64;
    base.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(slot))
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    /// `(seed, metrics)` per replication, in replication order.
    pub runs: Vec<(u64, Metrics)>,
}

/// One run per value and replication; points come back sorted by value and
/// seeds are derived from the sorted position. Runs execute in parallel and
/// share nothing.
pub fn sweep(
    base: &Scenario,
    knob: Knob,
    values: &[f64],
    replications: usize,
) -> Result<Vec<SweepPoint>, SimError> {
    if values.is_empty() {
        return Err(SimError::Invalid("sweep needs at least one value".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(SimError::Invalid(format!(
            "sweep value {bad} is not finite"
        )));
    }
    let mut values = values.to_vec();
    values.sort_by(f64::total_cmp);
    if replications == 0 {
        return Err(SimError::Invalid("replications must be >= 1".into()));
    }
    let scenarios = values
        .iter()
        .map(|&v| {
            knob.apply(base, v).map_err(|e| SimError::SweepPoint {
                value: v,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|p| (0..replications).map(move |r| (p, r)))
        .collect();
    let results: Vec<Result<(u64, Metrics), SimError>> = jobs
        .par_iter()
        .map(|&(p, r)| {
            let mut s = scenarios[p].clone();
            s.seed = derive_seed(base.seed, p, r, replications);
            run(&s)
                .map(|m| (s.seed, m))
                .map_err(|e| SimError::SweepPoint {
                    value: values[p],
                    source: Box::new(e),
                })
        })
        .collect();

    let mut points: Vec<SweepPoint> = values
        .iter()
        .map(|&value| SweepPoint {
            value,
            runs: Vec::with_capacity(replications),
        })
        .collect();
    for (&(p, _), res) in jobs.iter().zip(results) {
        points[p].runs.push(res?);
    }
    Ok(points)
}
