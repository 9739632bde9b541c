//! Conversion efficiency |Ωs(α)|²/Ω0²: closed forms and numerical evaluation.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::propagation::{propagate_reduced, step_count, FieldState, IntegratorOptions};
use crate::protocols::{singular_slope, solve_theta0, Protocol, ProtocolSpec};

/// Loss rate of the lossy adiabatic mode.
const ETA: f64 = 0.5;

/// e^{−2γα} sin²(u_s α) with γ = cos²θ0 / 2 and u_s = sin(2θ0)/4.
pub fn optimal_efficiency_closed(alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let theta0 = solve_theta0(alpha)?;
    let us = singular_slope(theta0);
    // γ = 1/(2(1 + tan²θ0))
    let gamma = 0.5 * theta0.cos().powi(2);
    Ok((-2.0 * gamma * alpha).exp() * (us * alpha).sin().powi(2))
}

/// e^{−ηα}[cosh κα + (η/2κ) sinh κα]² with η = 1/2, κ² = η²/4 − u², u = π/(2α).
///
/// For κ² < 0 the real continuation cos/sin is used; at κ = 0 the limit
/// e^{−ηα}(1 + ηα/2)².
pub fn constant_efficiency_closed(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(crate::Error::InvalidAlpha(alpha));
    }
    let u = std::f64::consts::FRAC_PI_2 / alpha;
    let half = 0.5 * ETA;
    let kappa_sq = (half - u) * (half + u);
    let value = if kappa_sq > 0.0 {
        // e^{−ηα/2}[cosh + c sinh] = e^{(κ−η/2)α}[(1+e^{−2κα}) + c(1−e^{−2κα})]/2
        let kappa = kappa_sq.sqrt();
        let decay = (-2.0 * kappa * alpha).exp();
        let ratio = half / kappa;
        let bracket = 0.5 * ((1.0 + decay) + ratio * (-(-2.0 * kappa * alpha).exp_m1()));
        ((kappa - half) * alpha).exp() * bracket
    } else if kappa_sq < 0.0 {
        let k = (-kappa_sq).sqrt();
        (-half * alpha).exp() * ((k * alpha).cos() + half / k * (k * alpha).sin())
    } else {
        (-half * alpha).exp() * (1.0 + half * alpha)
    };
    Ok(value * value)
}

/// Both closed forms where defined, plus the numerically integrated value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub alpha: f64,
    pub protocol: String,
    pub eta_closed: Option<f64>,
    pub eta_numeric: f64,
    pub step_count: usize,
    pub discrepancy: Option<f64>,
}

pub fn closed_form(spec: &ProtocolSpec) -> Result<Option<f64>> {
    match spec.protocol {
        Protocol::Optimal => optimal_efficiency_closed(spec.alpha).map(Some),
        Protocol::Constant => constant_efficiency_closed(spec.alpha).map(Some),
        _ => Ok(None),
    }
}

pub fn numerical_efficiency(spec: &ProtocolSpec, opts: &IntegratorOptions) -> Result<EfficiencyReport> {
    let profile = spec.profile()?;
    let traj = propagate_reduced(&profile, spec.alpha, FieldState::INCIDENT_PROBE, opts)?;
    let eta_numeric = traj.conversion_efficiency();
    let eta_closed = closed_form(spec)?;
    Ok(EfficiencyReport {
        alpha: spec.alpha,
        protocol: spec.protocol.name().to_string(),
        eta_closed,
        eta_numeric,
        step_count: step_count(&profile, opts),
        discrepancy: eta_closed.map(|c| (c - eta_numeric).abs()),
    })
}
