//! Closed-form transmission and delay model for one relay.
//!
//! Every quantity is per packet. `kappa_k` is the utilization- and
//! centrality-weighted mass of the selected flows, `kappa_n` the same mass
//! for packets already handed over, and `rate` the packet's own weighted
//! rate term. `rate` and `kappa_k` are independent: the score functions are
//! partial derivatives in `kappa_k` with `rate` held fixed.

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    /// Total node count.
    pub m: usize,
    /// Queued packets at the relay.
    pub p_sum: usize,
    pub load: f64,
    pub kappa_k: f64,
    pub kappa_n: f64,
    /// Residual workload of the packet's flow.
    pub alpha: f64,
    pub rate: f64,
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.m < 2 {
            return Err(AnalysisError::Domain(format!(
                "m must be >= 2, got {}",
                self.m
            )));
        }
        if !(self.load > 0.0) {
            return Err(AnalysisError::Domain(format!(
                "load must be > 0, got {}",
                self.load
            )));
        }
        if !(self.alpha >= 0.0) {
            return Err(AnalysisError::Domain(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.kappa_k >= 0.0) {
            return Err(AnalysisError::Domain(format!(
                "kappa_k must be >= 0, got {}",
                self.kappa_k
            )));
        }
        let bound = (self.m - 1) as f64;
        if !(self.kappa_n >= 0.0 && self.kappa_n <= bound) {
            return Err(AnalysisError::Domain(format!(
                "kappa_n must lie in [0, m-1 = {bound}], got {}",
                self.kappa_n
            )));
        }
        Ok(())
    }

    /// `self` with `kappa_k` replaced, for finite differences.
    pub fn with_kappa_k(self, kappa_k: f64) -> Self {
        Self { kappa_k, ..self }
    }
}

/// `exp(-load * kappa_k * alpha)`.
pub fn prob_not_transferred(p: &AnalysisParams) -> f64 {
    (-p.load * p.kappa_k * p.alpha).exp()
}

/// `kappa_n / (m - 1)`.
pub fn prob_already_transferred(p: &AnalysisParams) -> Result<f64, AnalysisError> {
    let bound = p.m.saturating_sub(1) as f64;
    if p.m < 2 || p.kappa_n > bound || p.kappa_n < 0.0 {
        return Err(AnalysisError::Domain(format!(
            "kappa_n = {} outside [0, m-1 = {bound}]",
            p.kappa_n
        )));
    }
    Ok(p.kappa_n / bound)
}

pub fn packet_transfer_prob(p: &AnalysisParams) -> Result<f64, AnalysisError> {
    let q = prob_already_transferred(p)?;
    Ok((1.0 - q) * (1.0 - prob_not_transferred(p)) + q)
}

/// Partial derivative of [`packet_transfer_prob`] in `kappa_k`.
pub fn transmission_score(p: &AnalysisParams) -> Result<f64, AnalysisError> {
    let q = prob_already_transferred(p)?;
    Ok((1.0 - q) * p.load * p.alpha * prob_not_transferred(p))
}

pub fn total_transmission(ps: &[AnalysisParams]) -> Result<f64, AnalysisError> {
    ps.iter().map(packet_transfer_prob).sum()
}

/// Expected delay contribution of a packet not yet handed over.
pub fn expected_delay_term(p: &AnalysisParams) -> Result<f64, AnalysisError> {
    check_singular(p)?;
    let q = prob_already_transferred(p)?;
    Ok((1.0 - q) * (p.rate + 1.0 / (p.load * p.kappa_k)))
}

pub fn total_delay(ps: &[AnalysisParams]) -> Result<f64, AnalysisError> {
    ps.iter().map(expected_delay_term).sum()
}

/// Negated partial derivative of [`expected_delay_term`] in `kappa_k`.
pub fn delay_score(p: &AnalysisParams) -> Result<f64, AnalysisError> {
    check_singular(p)?;
    let q = prob_already_transferred(p)?;
    Ok((1.0 - q) / (p.load * p.kappa_k * p.kappa_k))
}

fn check_singular(p: &AnalysisParams) -> Result<(), AnalysisError> {
    if !(p.kappa_k > 0.0) {
        return Err(AnalysisError::Singular(format!(
            "kappa_k must be > 0, got {}",
            p.kappa_k
        )));
    }
    if !(p.load > 0.0) {
        return Err(AnalysisError::Singular(format!(
            "load must be > 0, got {}",
            p.load
        )));
    }
    Ok(())
}

/// Central difference of `f` in `kappa_k`.
pub fn central_difference<F>(p: &AnalysisParams, step: f64, f: F) -> Result<f64, AnalysisError>
where
    F: Fn(&AnalysisParams) -> Result<f64, AnalysisError>,
{
    let hi = f(&p.with_kappa_k(p.kappa_k + step))?;
    let lo = f(&p.with_kappa_k(p.kappa_k - step))?;
    Ok((hi - lo) / (2.0 * step))
}

/// `|numeric - analytic| / |analytic|`, or the absolute gap when the
/// analytic value is zero.
pub fn relative_residual(numeric: f64, analytic: f64) -> f64 {
    let gap = (numeric - analytic).abs();
    if analytic == 0.0 {
        gap
    } else {
        gap / analytic.abs()
    }
}

/// Both gradient residuals for one parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub transmission: f64,
    pub delay: f64,
}

pub fn gradient_check(p: &AnalysisParams, step: f64) -> Result<GradientCheck, AnalysisError> {
    let fd_tr = central_difference(p, step, packet_transfer_prob)?;
    let fd_dt = -central_difference(p, step, expected_delay_term)?;
    Ok(GradientCheck {
        transmission: relative_residual(fd_tr, transmission_score(p)?),
        delay: relative_residual(fd_dt, delay_score(p)?),
    })
}

/// Relay-side inputs for one flow, used to build [`AnalysisParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSnapshot {
    pub utilization: f64,
    pub centrality: f64,
    pub queued_bytes: u64,
}

/// Maps relay state onto the analytic model:
///
/// * `rate    = u * c`
/// * `kappa_k = k * u * c`, `k` = size of the schedulable set
/// * `kappa_n = n * u * c`, `n` = active flows outside that set
/// * `alpha   = queued_bytes * 8 / link_bps`
pub fn params_from_state(
    flow: &FlowSnapshot,
    m: usize,
    p_sum: usize,
    load: f64,
    schedulable: usize,
    newcomers: usize,
    link_bps: f64,
) -> AnalysisParams {
    let rate = flow.utilization * flow.centrality;
    AnalysisParams {
        m,
        p_sum,
        load,
        kappa_k: schedulable as f64 * rate,
        kappa_n: newcomers as f64 * rate,
        alpha: flow.queued_bytes as f64 * 8.0 / link_bps,
        rate,
    }
}

/// Cartesian grid of parameter values for batch evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisGrid {
    pub m: Vec<usize>,
    pub load: Vec<f64>,
    pub kappa_k: Vec<f64>,
    pub kappa_n: Vec<f64>,
    pub alpha: Vec<f64>,
    pub rate: Vec<f64>,
}

/// All model outputs for one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisRow {
    pub params: AnalysisParams,
    pub prob_not_transferred: f64,
    pub prob_already_transferred: f64,
    pub packet_transfer_prob: f64,
    pub transmission_score: f64,
    pub expected_delay_term: f64,
    pub delay_score: f64,
    pub residuals: GradientCheck,
}

pub const FD_STEP: f64 = 1e-5;

impl AnalysisGrid {
    /// Points in row-major order (`m` outermost, `rate` innermost).
    pub fn points(&self) -> Vec<AnalysisParams> {
        let mut out = Vec::new();
        for &m in &self.m {
            for &load in &self.load {
                for &kappa_k in &self.kappa_k {
                    for &kappa_n in &self.kappa_n {
                        for &alpha in &self.alpha {
                            for &rate in &self.rate {
                                out.push(AnalysisParams {
                                    m,
                                    p_sum: m,
                                    load,
                                    kappa_k,
                                    kappa_n,
                                    alpha,
                                    rate,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Evaluates every point. The first point that violates a domain or
    /// singularity constraint aborts with that constraint.
    pub fn evaluate(&self) -> Result<Vec<AnalysisRow>, AnalysisError> {
        self.points().iter().map(evaluate_point).collect()
    }
}

pub fn evaluate_point(p: &AnalysisParams) -> Result<AnalysisRow, AnalysisError> {
    p.validate()?;
    Ok(AnalysisRow {
        params: *p,
        prob_not_transferred: prob_not_transferred(p),
        prob_already_transferred: prob_already_transferred(p)?,
        packet_transfer_prob: packet_transfer_prob(p)?,
        transmission_score: transmission_score(p)?,
        expected_delay_term: expected_delay_term(p)?,
        delay_score: delay_score(p)?,
        residuals: gradient_check(p, FD_STEP)?,
    })
}
