//! Steady-state spatial propagation of the probe/signal pair.
//!
//! Three routes are provided:
//!
//! * [`propagate_reduced`] integrates dΩ/dζ = −½ M(θ) Ω in the lab frame.
//! * [`propagate_adiabatic`] integrates ẏ = −u x, ẋ = u y − x/2 (u = −dθ/dζ)
//!   in the frame rotated by θ, applying boundary jumps as exact rotations.
//! * [`propagate_exact`] closes the field equations with the exact steady
//!   state of the coherences from [`crate::bloch_steady`].
//!
//! Distances are in absorption lengths, so propagation runs over ζ ∈ [0, α].
//! Amplitudes are normalized to the incident probe Ω0 = 1.

use std::convert::Infallible;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch_steady::{steady_coherences, DriveFields, Rates};
use crate::error::{Error, Result};
use crate::ode::rk4_span;
use crate::protocols::{controls_from_theta, ThetaProfile};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub omega_p: f64,
    pub omega_s: f64,
}

impl FieldState {
    pub const INCIDENT_PROBE: FieldState = FieldState {
        omega_p: 1.0,
        omega_s: 0.0,
    };

    pub fn new(omega_p: f64, omega_s: f64) -> Self {
        Self { omega_p, omega_s }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.omega_p * self.omega_p + self.omega_s * self.omega_s
    }

    /// Amplitude of the lossy mode, Ωp cos θ − Ωs sin θ.
    pub fn lossy_component(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * self.omega_p - s * self.omega_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticState {
    pub x: f64,
    pub y: f64,
}

impl AdiabaticState {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// (y, x) = R(θ)(Ωp, Ωs) with R = [[sin θ, cos θ], [cos θ, −sin θ]].
pub fn to_adiabatic(theta: f64, state: FieldState) -> AdiabaticState {
    let (s, c) = theta.sin_cos();
    AdiabaticState {
        y: s * state.omega_p + c * state.omega_s,
        x: c * state.omega_p - s * state.omega_s,
    }
}

/// R(θ) is symmetric and orthogonal, hence its own inverse.
pub fn from_adiabatic(theta: f64, state: AdiabaticState) -> FieldState {
    let (s, c) = theta.sin_cos();
    FieldState {
        omega_p: s * state.y + c * state.x,
        omega_s: c * state.y - s * state.x,
    }
}

/// Re-expresses an adiabatic state after θ jumps from `from` to `to`, leaving
/// the lab-frame fields untouched.
pub fn rotate_frame(from: f64, to: f64, state: AdiabaticState) -> AdiabaticState {
    to_adiabatic(to, from_adiabatic(from, state))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    /// RK4 steps per unit of ζ.
    pub steps_per_unit: f64,
    /// Lower bound on the total number of steps.
    pub min_steps: usize,
    /// Relative tolerance for the step-halving convergence check.
    pub tolerance: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            steps_per_unit: 10.0,
            min_steps: 2,
            tolerance: 1e-6,
        }
    }
}

impl IntegratorOptions {
    pub fn with_density(steps_per_unit: f64) -> Self {
        Self {
            steps_per_unit,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.steps_per_unit > 0.0 && self.steps_per_unit.is_finite()) {
            return Err(Error::InvalidOptions(format!(
                "steps_per_unit={} must be positive",
                self.steps_per_unit
            )));
        }
        if self.min_steps < 2 {
            return Err(Error::InvalidOptions("min_steps must be at least 2".into()));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self {
            steps_per_unit: 2.0 * self.steps_per_unit,
            min_steps: 2 * self.min_steps,
            ..*self
        }
    }
}

/// Integration pieces `[a, b]` with step counts, aligned to `knots`.
fn pieces(alpha: f64, knots: &[f64], opts: &IntegratorOptions) -> Vec<(f64, f64, usize)> {
    if alpha == 0.0 {
        return Vec::new();
    }
    let mut bounds = Vec::with_capacity(knots.len() + 2);
    bounds.push(0.0);
    bounds.extend(knots.iter().copied().filter(|&k| k > 0.0 && k < alpha));
    bounds.push(alpha);
    bounds.dedup();
    let mut out: Vec<(f64, f64, usize)> = bounds
        .windows(2)
        .map(|w| {
            let n = ((w[1] - w[0]) * opts.steps_per_unit).ceil().max(1.0) as usize;
            (w[0], w[1], n)
        })
        .collect();
    let total: usize = out.iter().map(|p| p.2).sum();
    if total < opts.min_steps {
        let scale = opts.min_steps.div_ceil(total);
        for p in &mut out {
            p.2 *= scale;
        }
    }
    out
}

/// Total number of RK4 steps used for a profile over [0, α].
pub fn step_count(profile: &ThetaProfile, opts: &IntegratorOptions) -> usize {
    pieces(profile.alpha, &profile.knots(), opts)
        .iter()
        .map(|p| p.2)
        .sum()
}

fn check_domain(profile: &ThetaProfile, alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if (profile.alpha - alpha).abs() > 1e-12 * alpha.max(1.0) {
        return Err(Error::ProfileDomainMismatch {
            profile: profile.alpha,
            alpha,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub zeta: Vec<f64>,
    pub theta: Vec<f64>,
    pub states: Vec<FieldState>,
}

impl Trajectory {
    pub fn final_state(&self) -> FieldState {
        *self.states.last().expect("trajectory always holds the initial point")
    }

    /// |Ωs(α)|² for unit incident probe.
    pub fn conversion_efficiency(&self) -> f64 {
        let s = self.final_state().omega_s;
        s * s
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }
}

fn reduced_rhs(theta: f64, w: &[f64; 2]) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    let lossy = c * w[0] - s * w[1];
    [-0.5 * lossy * c, 0.5 * lossy * s]
}

/// Lab-frame propagation. Jumps in θ leave (Ωp, Ωs) unchanged, so the
/// profile's jumps play no role here.
pub fn propagate_reduced(
    profile: &ThetaProfile,
    alpha: f64,
    initial: FieldState,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    check_domain(profile, alpha)?;
    opts.validate()?;
    let mut traj = Trajectory {
        zeta: vec![0.0],
        theta: vec![profile.theta_unchecked(0.0)],
        states: vec![initial],
    };
    let mut rhs = |z: f64, w: &[f64; 2]| Ok::<_, Infallible>(reduced_rhs(profile.theta_unchecked(z), w));
    let mut w = [initial.omega_p, initial.omega_s];
    for (a, b, n) in pieces(alpha, &profile.knots(), opts) {
        w = rk4_span(&mut rhs, (a, b), n, w, |z, y| {
            traj.zeta.push(z);
            traj.theta.push(profile.theta_unchecked(z));
            traj.states.push(FieldState::new(y[0], y[1]));
        })
        .unwrap_or_else(|e| match e {});
    }
    if !(w[0].is_finite() && w[1].is_finite()) {
        return Err(Error::NonFinite("propagate_reduced"));
    }
    Ok(traj)
}

/// Final lab-frame state only; same arithmetic as [`propagate_reduced`]
/// without recording the trajectory.
pub fn propagate_reduced_final(
    profile: &ThetaProfile,
    alpha: f64,
    initial: FieldState,
    opts: &IntegratorOptions,
) -> Result<FieldState> {
    check_domain(profile, alpha)?;
    opts.validate()?;
    let mut rhs = |z: f64, w: &[f64; 2]| Ok::<_, Infallible>(reduced_rhs(profile.theta_unchecked(z), w));
    let mut w = [initial.omega_p, initial.omega_s];
    for (a, b, n) in pieces(alpha, &profile.knots(), opts) {
        w = rk4_span(&mut rhs, (a, b), n, w, |_, _| {}).unwrap_or_else(|e| match e {});
    }
    if !(w[0].is_finite() && w[1].is_finite()) {
        return Err(Error::NonFinite("propagate_reduced"));
    }
    Ok(FieldState::new(w[0], w[1]))
}

/// Final states at the requested resolution and at half the step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    pub coarse: FieldState,
    pub fine: FieldState,
    pub steps: usize,
    /// max component difference relative to the incident norm
    pub relative_change: f64,
    pub tolerance: f64,
    pub converged: bool,
}

pub fn convergence_check(
    profile: &ThetaProfile,
    alpha: f64,
    initial: FieldState,
    opts: &IntegratorOptions,
) -> Result<ConvergenceCheck> {
    let coarse = propagate_reduced_final(profile, alpha, initial, opts)?;
    let fine = propagate_reduced_final(profile, alpha, initial, &opts.refined())?;
    let scale = initial.norm_sqr().sqrt().max(f64::MIN_POSITIVE);
    let relative_change = (coarse.omega_p - fine.omega_p)
        .abs()
        .max((coarse.omega_s - fine.omega_s).abs())
        / scale;
    Ok(ConvergenceCheck {
        coarse,
        fine,
        steps: step_count(profile, opts),
        relative_change,
        tolerance: opts.tolerance,
        converged: relative_change <= opts.tolerance,
    })
}

/// Adiabatic-frame trajectory. `states[k]` is expressed in the frame of
/// `theta[k]`; the boundary entries record the states outside the jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticTrajectory {
    pub zeta: Vec<f64>,
    pub theta: Vec<f64>,
    pub states: Vec<AdiabaticState>,
    /// State at ζ = 0⁻ in the frame θ(0⁻).
    pub before_entry: AdiabaticState,
    /// State at ζ = α⁺ in the frame θ(α⁺).
    pub after_exit: AdiabaticState,
}

impl AdiabaticTrajectory {
    /// Lab-frame fields at each interior sample.
    pub fn lab_states(&self) -> Vec<FieldState> {
        self.theta
            .iter()
            .zip(&self.states)
            .map(|(&t, &s)| from_adiabatic(t, s))
            .collect()
    }
}

/// Adiabatic-frame propagation with control u = −dθ/dζ taken from `profile`.
///
/// `initial` is the state just before the entry face, in the frame θ(0⁻).
pub fn propagate_adiabatic(
    profile: &ThetaProfile,
    alpha: f64,
    initial: AdiabaticState,
    opts: &IntegratorOptions,
) -> Result<AdiabaticTrajectory> {
    check_domain(profile, alpha)?;
    opts.validate()?;
    let theta_in = profile.theta_unchecked(0.0);
    let start = rotate_frame(profile.theta_before_entry(), theta_in, initial);
    let mut zeta = vec![0.0];
    let mut theta = vec![theta_in];
    let mut states = vec![start];
    let mut v = [start.y, start.x];
    for (a, b, n) in pieces(alpha, &profile.knots(), opts) {
        let mut rhs = |z: f64, s: &[f64; 2]| {
            let u = -profile.slope_within(z, a, b);
            Ok::<_, Infallible>([-u * s[1], u * s[0] - 0.5 * s[1]])
        };
        v = rk4_span(&mut rhs, (a, b), n, v, |z, s| {
            zeta.push(z);
            theta.push(profile.theta_unchecked(z));
            states.push(AdiabaticState::new(s[1], s[0]));
        })
        .unwrap_or_else(|e| match e {});
    }
    if !(v[0].is_finite() && v[1].is_finite()) {
        return Err(Error::NonFinite("propagate_adiabatic"));
    }
    let last = *states.last().expect("initial point present");
    let after_exit = rotate_frame(profile.theta_unchecked(alpha), profile.theta_after_exit(), last);
    Ok(AdiabaticTrajectory {
        zeta,
        theta,
        states,
        before_entry: initial,
        after_exit,
    })
}

/// A spatial envelope of the two control fields.
pub trait ControlEnvelope: Sync {
    fn controls(&self, zeta: f64) -> (Complex64, Complex64);

    /// Points where the envelope is not smooth.
    fn knots(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl ControlEnvelope for ThetaProfile {
    fn controls(&self, zeta: f64) -> (Complex64, Complex64) {
        let (c, d) = controls_from_theta(self.theta_unchecked(zeta));
        (c.into(), d.into())
    }

    fn knots(&self) -> Vec<f64> {
        ThetaProfile::knots(self)
    }
}

/// Adapter for control envelopes given as closures.
pub struct FnControls<F>(pub F);

impl<F> ControlEnvelope for FnControls<F>
where
    F: Fn(f64) -> (Complex64, Complex64) + Sync,
{
    fn controls(&self, zeta: f64) -> (Complex64, Complex64) {
        (self.0)(zeta)
    }
}

/// Complex field amplitudes along ζ from the exact steady-state closure.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTrajectory {
    pub zeta: Vec<f64>,
    pub omega_p: Vec<Complex64>,
    pub omega_s: Vec<Complex64>,
}

impl ExactTrajectory {
    pub fn final_fields(&self) -> (Complex64, Complex64) {
        (
            *self.omega_p.last().expect("non-empty"),
            *self.omega_s.last().expect("non-empty"),
        )
    }

    pub fn conversion_efficiency(&self) -> f64 {
        self.final_fields().1.norm_sqr()
    }
}

/// dΩp/dζ = i Γ31 ρ31 / 2 and dΩs/dζ = i Γ41 ρ41 / 2 with the coherences
/// from the exact steady state at each ζ. Equal optical depth on both
/// transitions is assumed.
pub fn propagate_exact(
    controls: &dyn ControlEnvelope,
    alpha: f64,
    rates: &Rates,
    initial: FieldState,
    opts: &IntegratorOptions,
) -> Result<ExactTrajectory> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidAlpha(alpha));
    }
    rates.validate()?;
    opts.validate()?;
    let mut rhs = |z: f64, w: &[Complex64; 2]| -> Result<[Complex64; 2]> {
        let (omega_c, omega_d) = controls.controls(z);
        let sol = steady_coherences(
            &DriveFields {
                omega_p: w[0],
                omega_s: w[1],
                omega_c,
                omega_d,
            },
            rates,
        )?;
        Ok([
            I * sol.rho31 * (0.5 * rates.gamma31),
            I * sol.rho41 * (0.5 * rates.gamma41),
        ])
    };
    let mut traj = ExactTrajectory {
        zeta: vec![0.0],
        omega_p: vec![initial.omega_p.into()],
        omega_s: vec![initial.omega_s.into()],
    };
    let mut w: [Complex64; 2] = [initial.omega_p.into(), initial.omega_s.into()];
    for (a, b, n) in pieces(alpha, &controls.knots(), opts) {
        w = rk4_span(&mut rhs, (a, b), n, w, |z, y| {
            traj.zeta.push(z);
            traj.omega_p.push(y[0]);
            traj.omega_s.push(y[1]);
        })?;
    }
    if !w.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("propagate_exact"));
    }
    Ok(traj)
}
