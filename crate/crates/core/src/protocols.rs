//! Mixing-angle profiles θ(ζ) and the control protocols built from them.
//!
//! The control pair is parametrized as Ωc = Ω0 sin θ, Ωd = Ω0 cos θ with the
//! magnitude fixed at Ω0 = 1. A profile carries an interior law on [0, α] and
//! optional impulsive jumps at the two faces of the medium. The physical
//! boundary values are θ(0⁻) = π/2 and θ(α⁺) = 0.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking that a position lies inside [0, α].
const DOMAIN_SLACK: f64 = 1e-12;

/// Instantaneous change of θ at one face of the medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub before: f64,
    pub after: f64,
}

impl Jump {
    pub fn size(&self) -> f64 {
        self.after - self.before
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Interior {
    /// θ(ζ) = start + (end − start)·ζ/α, exact at both faces.
    Linear { start: f64, end: f64 },
    /// θ(ζ) = arctan(exp(−(ζ − ζ0)/(2 ζ̄))), the angle of the logistic control pair.
    Logistic { zeta0: f64, zbar: f64 },
    /// Linear interpolation between samples; `zeta` strictly increasing.
    Samples { zeta: Vec<f64>, theta: Vec<f64> },
}

impl Interior {
    fn value(&self, zeta: f64, alpha: f64) -> f64 {
        match self {
            Interior::Linear { start, end } => {
                if alpha == 0.0 {
                    *start
                } else {
                    start + (end - start) * (zeta / alpha)
                }
            }
            Interior::Logistic { zeta0, zbar } => (-(zeta - zeta0) / (2.0 * zbar)).exp().atan(),
            Interior::Samples { zeta: zs, theta } => {
                let k = segment_index(zs, zeta);
                let w = (zeta - zs[k]) / (zs[k + 1] - zs[k]);
                theta[k] + w * (theta[k + 1] - theta[k])
            }
        }
    }
}

/// Index `k` of the segment `[zs[k], zs[k+1]]` that contains `zeta`, clamped to the ends.
fn segment_index(zs: &[f64], zeta: f64) -> usize {
    let last = zs.len() - 2;
    match zs.partition_point(|&z| z <= zeta) {
        0 => 0,
        p => (p - 1).min(last),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaProfile {
    pub alpha: f64,
    pub interior: Interior,
    pub entry_jump: Option<Jump>,
    pub exit_jump: Option<Jump>,
}

impl ThetaProfile {
    /// Wraps an interior law, adding whatever jumps are needed to meet
    /// θ(0⁻) = π/2 and θ(α⁺) = 0.
    pub fn with_boundary_jumps(alpha: f64, interior: Interior) -> Self {
        let mut profile = Self {
            alpha,
            interior,
            entry_jump: None,
            exit_jump: None,
        };
        let start = profile.interior.value(0.0, alpha);
        let end = profile.interior.value(alpha, alpha);
        if start != FRAC_PI_2 {
            profile.entry_jump = Some(Jump {
                before: FRAC_PI_2,
                after: start,
            });
        }
        if end != 0.0 {
            profile.exit_jump = Some(Jump {
                before: end,
                after: 0.0,
            });
        }
        profile
    }

    /// Piecewise-linear profile through `(zeta, theta)` samples covering [0, α].
    pub fn from_samples(alpha: f64, zeta: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        validate_alpha(alpha)?;
        if zeta.len() != theta.len() {
            return Err(Error::InvalidTable("column lengths differ".into()));
        }
        if zeta.len() < 2 {
            return Err(Error::InvalidTable("need at least two samples".into()));
        }
        if zeta.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidTable("zeta must be strictly increasing".into()));
        }
        if let Some(t) = theta
            .iter()
            .find(|t| !(**t >= -DOMAIN_SLACK && **t <= FRAC_PI_2 + DOMAIN_SLACK))
        {
            return Err(Error::InvalidTable(format!("theta={t} outside [0, pi/2]")));
        }
        let (first, last) = (zeta[0], zeta[zeta.len() - 1]);
        if first > DOMAIN_SLACK || last < alpha - DOMAIN_SLACK * alpha.max(1.0) {
            return Err(Error::ProfileDomainMismatch {
                profile: last,
                alpha,
            });
        }
        Ok(Self::with_boundary_jumps(
            alpha,
            Interior::Samples { zeta, theta },
        ))
    }

    fn check_domain(&self, zeta: f64) -> Result<()> {
        if zeta < -DOMAIN_SLACK || zeta > self.alpha + DOMAIN_SLACK * self.alpha.max(1.0) || zeta.is_nan() {
            return Err(Error::OutOfDomain {
                zeta,
                alpha: self.alpha,
            });
        }
        Ok(())
    }

    /// Interior angle θ(ζ) for ζ ∈ [0, α]; the faces return the inner limits 0⁺ and α⁻.
    pub fn theta(&self, zeta: f64) -> Result<f64> {
        self.check_domain(zeta)?;
        Ok(self.interior.value(zeta, self.alpha))
    }

    pub(crate) fn theta_unchecked(&self, zeta: f64) -> f64 {
        self.interior.value(zeta, self.alpha)
    }

    /// dθ/dζ inside the piece `[lo, hi]` of the integration grid.
    pub(crate) fn slope_within(&self, zeta: f64, lo: f64, hi: f64) -> f64 {
        match &self.interior {
            Interior::Linear { start, end } => (end - start) / self.alpha,
            Interior::Logistic { zeta0, zbar } => {
                let s = (zeta - zeta0) / (2.0 * zbar);
                -1.0 / (4.0 * zbar * s.cosh())
            }
            Interior::Samples { zeta: zs, theta } => {
                let k = segment_index(zs, 0.5 * (lo + hi));
                (theta[k + 1] - theta[k]) / (zs[k + 1] - zs[k])
            }
        }
    }

    /// Interior points where θ is not smooth; the integration grid is aligned to them.
    pub fn knots(&self) -> Vec<f64> {
        match &self.interior {
            Interior::Samples { zeta, .. } => zeta
                .iter()
                .copied()
                .filter(|&z| z > 0.0 && z < self.alpha)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// θ(0⁻): the angle before any entry jump.
    pub fn theta_before_entry(&self) -> f64 {
        self.entry_jump
            .map(|j| j.before)
            .unwrap_or_else(|| self.interior.value(0.0, self.alpha))
    }

    /// θ(α⁺): the angle after any exit jump.
    pub fn theta_after_exit(&self) -> f64 {
        self.exit_jump
            .map(|j| j.after)
            .unwrap_or_else(|| self.interior.value(self.alpha, self.alpha))
    }

    /// (π/2 − θ(0⁻), θ(α⁺)): zero when the boundary conditions hold exactly.
    pub fn boundary_defect(&self) -> (f64, f64) {
        (FRAC_PI_2 - self.theta_before_entry(), self.theta_after_exit())
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// (α/4) sin 2θ0 − 2θ0 + π/2; its root in (π/4, π/2) is the optimal entry angle.
pub fn theta0_residual(alpha: f64, theta0: f64) -> f64 {
    0.25 * alpha * (2.0 * theta0).sin() - 2.0 * theta0 + FRAC_PI_2
}

const BISECTION_MAX_ITER: usize = 200;
const BISECTION_WIDTH: f64 = 1e-12;

/// Optimal post-jump angle θ0 for optical density `alpha`, found by bisection.
///
/// Iterates until the bracket stops shrinking in floating point, which is
/// always narrower than 1e-12.
pub fn solve_theta0(alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    let (mut lo, mut hi) = (FRAC_PI_4, FRAC_PI_2);
    let f_lo = theta0_residual(alpha, lo);
    let f_hi = theta0_residual(alpha, hi);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NotBracketed(alpha));
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = theta0_residual(alpha, mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(hi - lo < BISECTION_WIDTH);
    // endpoint with the smaller residual
    if theta0_residual(alpha, lo).abs() <= theta0_residual(alpha, hi).abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// Constant rate u_s = sin(2θ0)/4 of the singular arc.
pub fn singular_slope(theta0: f64) -> f64 {
    0.25 * (2.0 * theta0).sin()
}

/// Jump π/2 → θ0, linear descent with slope −u_s, jump θ0 − u_s α → 0.
pub fn optimal_protocol(alpha: f64) -> Result<ThetaProfile> {
    let theta0 = solve_theta0(alpha)?;
    let end = theta0 - singular_slope(theta0) * alpha;
    Ok(ThetaProfile {
        alpha,
        interior: Interior::Linear { start: theta0, end },
        entry_jump: Some(Jump {
            before: FRAC_PI_2,
            after: theta0,
        }),
        exit_jump: Some(Jump {
            before: end,
            after: 0.0,
        }),
    })
}

/// θ(ζ) = π/2 − πζ/(2α), no jumps.
pub fn constant_protocol(alpha: f64) -> Result<ThetaProfile> {
    validate_alpha(alpha)?;
    Ok(ThetaProfile {
        alpha,
        interior: Interior::Linear {
            start: FRAC_PI_2,
            end: 0.0,
        },
        entry_jump: None,
        exit_jump: None,
    })
}

/// Logistic control pair centred at `zeta0` with width `zbar`.
///
/// The boundary conditions hold only approximately; the residual mismatch is
/// reported by [`ThetaProfile::boundary_defect`].
pub fn adiabatic_protocol(alpha: f64, zeta0: f64, zbar: f64) -> Result<ThetaProfile> {
    validate_alpha(alpha)?;
    if !(zbar > 0.0 && zbar.is_finite()) {
        return Err(Error::InvalidZbar(zbar));
    }
    if !zeta0.is_finite() {
        return Err(Error::NonFinite("adiabatic_protocol zeta0"));
    }
    Ok(ThetaProfile {
        alpha,
        interior: Interior::Logistic { zeta0, zbar },
        entry_jump: None,
        exit_jump: None,
    })
}

/// ζ̄ must be well above 1/2 for the logistic protocol to stay adiabatic.
pub fn is_adiabatic(zbar: f64) -> bool {
    zbar > 0.5
}

/// (Ωc, Ωd) = (sin θ, cos θ) in units of Ω0.
pub fn theta_to_controls(profile: &ThetaProfile, zeta: f64) -> Result<(f64, f64)> {
    Ok(controls_from_theta(profile.theta(zeta)?))
}

pub fn controls_from_theta(theta: f64) -> (f64, f64) {
    theta.sin_cos()
}

/// Inverse of [`controls_from_theta`] on [0, π/2].
pub fn theta_from_controls(omega_c: f64, omega_d: f64) -> f64 {
    omega_c.atan2(omega_d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    Optimal,
    Constant,
    Adiabatic { zeta0: f64, zbar: f64 },
    Custom { zeta: Vec<f64>, theta: Vec<f64> },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Optimal => "optimal",
            Protocol::Constant => "constant",
            Protocol::Adiabatic { .. } => "adiabatic",
            Protocol::Custom { .. } => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub alpha: f64,
    pub protocol: Protocol,
}

impl ProtocolSpec {
    pub fn new(alpha: f64, protocol: Protocol) -> Self {
        Self { alpha, protocol }
    }

    pub fn profile(&self) -> Result<ThetaProfile> {
        match &self.protocol {
            Protocol::Optimal => optimal_protocol(self.alpha),
            Protocol::Constant => constant_protocol(self.alpha),
            Protocol::Adiabatic { zeta0, zbar } => adiabatic_protocol(self.alpha, *zeta0, *zbar),
            Protocol::Custom { zeta, theta } => {
                ThetaProfile::from_samples(self.alpha, zeta.clone(), theta.clone())
            }
        }
    }
}
