//! Optimality checks for the bang-singular-bang protocol.
//!
//! [`verify_singular_arc`] evaluates the Pontryagin quantities along the
//! integrated optimal arc: costates λx = −μ/(2y), λy = μ/(2x) with μ = 1,
//! switching function φ = λx y − λy x + μ and control Hamiltonian
//! Hc = φ u − λx x / 2.
//!
//! [`optimize_piecewise`] is an independent route to the optimum: a
//! multi-start simplex search over piecewise-linear θ profiles that knows
//! nothing about the closed form.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::efficiency::optimal_efficiency_closed;
use crate::error::{Error, Result};
use crate::ode::rk4_span;
use crate::propagation::{
    propagate_adiabatic, propagate_reduced_final, AdiabaticState, FieldState, IntegratorOptions,
};
use crate::protocols::{optimal_protocol, singular_slope, solve_theta0, Interior, ThetaProfile};
use crate::simplex::{minimize, SimplexOptions};

const MU: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjointState {
    pub zeta: f64,
    pub x: f64,
    pub y: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub mu: f64,
    pub phi: f64,
    pub hc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcVerification {
    pub alpha: f64,
    pub theta0: f64,
    pub singular_slope: f64,
    pub samples: Vec<AdjointState>,
    /// max |φ|
    pub max_switching: f64,
    /// max |Hc(ζ) − Hc(0⁺)|
    pub max_hamiltonian_drift: f64,
    /// max |xy/(2(x² + y²)) − u_s|
    pub max_feedback_residual: f64,
    /// max |y/x − tan θ0|
    pub max_ratio_error: f64,
    /// max |λx y + λy x|
    pub max_orthogonality: f64,
    /// max residual of the costate equations, by central differences
    pub max_adjoint_residual: f64,
}

fn costates(x: f64, y: f64) -> (f64, f64) {
    (-MU / (2.0 * y), MU / (2.0 * x))
}

/// Integrates the optimal arc in the adiabatic frame and evaluates the
/// optimality conditions on the open interior (0, α).
pub fn verify_singular_arc(alpha: f64, opts: &IntegratorOptions) -> Result<ArcVerification> {
    let profile = optimal_protocol(alpha)?;
    let theta0 = solve_theta0(alpha)?;
    let us = singular_slope(theta0);
    let traj = propagate_adiabatic(&profile, alpha, AdiabaticState::new(0.0, 1.0), opts)?;

    let n = traj.zeta.len();
    let interior = 1..n.saturating_sub(1);
    let samples: Vec<AdjointState> = traj.zeta[interior.clone()]
        .iter()
        .zip(&traj.states[interior])
        .map(|(&zeta, s)| {
            let (lambda_x, lambda_y) = costates(s.x, s.y);
            let phi = lambda_x * s.y - lambda_y * s.x + MU;
            AdjointState {
                zeta,
                x: s.x,
                y: s.y,
                lambda_x,
                lambda_y,
                mu: MU,
                phi,
                hc: phi * us - 0.5 * lambda_x * s.x,
            }
        })
        .collect();
    if samples.is_empty() {
        return Err(Error::InvalidOptions("arc has no interior samples".into()));
    }

    // Hc(0⁺) from the state right after the entry jump
    let start = traj.states[0];
    let (lx0, ly0) = costates(start.x, start.y);
    let hc0 = (lx0 * start.y - ly0 * start.x + MU) * us - 0.5 * lx0 * start.x;
    let tan0 = theta0.tan();

    let max = |f: &dyn Fn(&AdjointState) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let mut max_adjoint_residual: f64 = 0.0;
    for w in samples.windows(3) {
        let h = w[2].zeta - w[0].zeta;
        let d_lx = (w[2].lambda_x - w[0].lambda_x) / h;
        let d_ly = (w[2].lambda_y - w[0].lambda_y) / h;
        let mid = &w[1];
        let r_ly = d_ly + us * mid.lambda_x;
        let r_lx = d_lx - (us * mid.lambda_y + 0.5 * mid.lambda_x);
        let scale = mid.lambda_x.abs().max(mid.lambda_y.abs());
        max_adjoint_residual = max_adjoint_residual.max(r_ly.abs().max(r_lx.abs()) / scale);
    }

    Ok(ArcVerification {
        alpha,
        theta0,
        singular_slope: us,
        max_switching: max(&|s| s.phi.abs()),
        max_hamiltonian_drift: max(&|s| (s.hc - hc0).abs()),
        max_feedback_residual: max(&|s| (s.x * s.y / (2.0 * (s.x * s.x + s.y * s.y)) - us).abs()),
        max_ratio_error: max(&|s| (s.y / s.x - tan0).abs()),
        max_orthogonality: max(&|s| (s.lambda_x * s.y + s.lambda_y * s.x).abs()),
        max_adjoint_residual,
        samples,
    })
}

/// Integrates the costate equations forward from their closed-form values at
/// ζ = 0⁺ and returns the largest relative deviation from the closed form
/// along the arc.
///
/// The costate system has a growing mode with rate ≈ 1/2, so round-off is
/// amplified by roughly e^{α/2}; useful for α up to a few tens.
pub fn adjoint_forward_deviation(alpha: f64, opts: &IntegratorOptions) -> Result<f64> {
    let verification = verify_singular_arc(alpha, opts)?;
    let us = verification.singular_slope;
    let profile = optimal_protocol(alpha)?;
    let traj = propagate_adiabatic(&profile, alpha, AdiabaticState::new(0.0, 1.0), opts)?;
    let start = traj.states[0];
    let (lx0, ly0) = costates(start.x, start.y);

    let mut rhs = |_z: f64, l: &[f64; 2]| Ok::<_, std::convert::Infallible>([us * l[1] + 0.5 * l[0], -us * l[0]]);
    let mut worst: f64 = 0.0;
    let mut k = 0;
    let mut lam = [lx0, ly0];
    let grid = &traj.zeta;
    for i in 0..grid.len() - 1 {
        lam = rk4_span(&mut rhs, (grid[i], grid[i + 1]), 1, lam, |_, _| {}).unwrap_or_else(|e| match e {});
        k += 1;
        if k + 1 < grid.len() {
            let s = traj.states[k];
            let (lx, ly) = costates(s.x, s.y);
            let dev = ((lam[0] - lx) / lx).abs().max(((lam[1] - ly) / ly).abs());
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// Budget and starting configuration for [`optimize_piecewise_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub alpha: f64,
    pub n_segments: usize,
    pub seed: u64,
    /// Total objective evaluations across all starts.
    pub budget: usize,
    pub starts: usize,
    pub integrator: IntegratorOptions,
}

impl SearchSettings {
    pub fn new(alpha: f64, n_segments: usize, seed: u64, budget: usize) -> Self {
        Self {
            alpha,
            n_segments,
            seed,
            budget,
            starts: 8,
            integrator: IntegratorOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub alpha: f64,
    pub n_segments: usize,
    pub seed: u64,
    /// Node positions of the piecewise-linear interior.
    pub zeta: Vec<f64>,
    /// θ at each node.
    pub theta: Vec<f64>,
    pub efficiency: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    pub budget_exhausted: bool,
    /// Index of the start that produced the result.
    pub best_start: usize,
}

impl SearchResult {
    pub fn profile(&self) -> Result<ThetaProfile> {
        ThetaProfile::from_samples(self.alpha, self.zeta.clone(), self.theta.clone())
    }

    /// Slope and intercept of the least-squares line through the nodes.
    pub fn linear_fit(&self) -> (f64, f64) {
        least_squares_line(&self.zeta, &self.theta)
    }

    /// Largest node deviation from [`SearchResult::linear_fit`].
    pub fn max_deviation_from_line(&self) -> f64 {
        let (slope, intercept) = self.linear_fit();
        self.zeta
            .iter()
            .zip(&self.theta)
            .map(|(z, t)| (t - (intercept + slope * z)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn nodes(alpha: f64, n_segments: usize) -> Vec<f64> {
    (0..=n_segments)
        .map(|k| {
            if k == n_segments {
                alpha
            } else {
                alpha * k as f64 / n_segments as f64
            }
        })
        .collect()
}

fn clamp_angles(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| t.clamp(0.0, FRAC_PI_2)).collect()
}

/// Conversion efficiency of the piecewise-linear profile through `(zeta, theta)`.
/// Angles are clamped to [0, π/2].
pub fn piecewise_efficiency(alpha: f64, zeta: &[f64], theta: &[f64], opts: &IntegratorOptions) -> Result<f64> {
    let profile = ThetaProfile {
        alpha,
        interior: Interior::Samples {
            zeta: zeta.to_vec(),
            theta: clamp_angles(theta),
        },
        entry_jump: None,
        exit_jump: None,
    };
    let end = propagate_reduced_final(&profile, alpha, FieldState::INCIDENT_PROBE, opts)?;
    Ok(end.omega_s * end.omega_s)
}

/// Refinement ladder 2, 4, 8, ... below `n`, then `n`.
fn levels(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 2;
    while k < n {
        out.push(k);
        k *= 2;
    }
    out.push(n);
    out
}

fn resample(from_zeta: &[f64], from_theta: &[f64], to_zeta: &[f64]) -> Vec<f64> {
    to_zeta
        .iter()
        .map(|&z| {
            let k = from_zeta
                .partition_point(|&v| v <= z)
                .saturating_sub(1)
                .min(from_zeta.len() - 2);
            let w = (z - from_zeta[k]) / (from_zeta[k + 1] - from_zeta[k]);
            from_theta[k] + w * (from_theta[k + 1] - from_theta[k])
        })
        .collect()
}

struct StartOutcome {
    theta: Vec<f64>,
    efficiency: f64,
    evaluations: usize,
    iterations: usize,
    converged: bool,
}

fn run_start(settings: &SearchSettings, start: usize, budget: usize) -> StartOutcome {
    let alpha = settings.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(start as u64);

    let ladder = levels(settings.n_segments);
    let weights: Vec<usize> = ladder.iter().map(|&k| k + 1).collect();
    let total_weight: usize = weights.iter().sum();

    let first = rng.gen_range(0.0..FRAC_PI_2);
    let last = rng.gen_range(0.0..FRAC_PI_2);
    let mut zeta = nodes(alpha, ladder[0]);
    let mut theta: Vec<f64> = zeta
        .iter()
        .map(|z| first + (last - first) * z / alpha + rng.gen_range(-0.05..0.05))
        .collect();
    theta = clamp_angles(&theta);

    let mut evaluations = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut best_value = f64::INFINITY;
    for (level, &segments) in ladder.iter().enumerate() {
        if level > 0 {
            let finer = nodes(alpha, segments);
            theta = resample(&zeta, &theta, &finer);
            zeta = finer;
        }
        let level_budget = if level + 1 == ladder.len() {
            budget.saturating_sub(evaluations)
        } else {
            budget * weights[level] / total_weight
        };
        let mut spent = 0;
        let mut step = if level == 0 { 0.2 } else { 0.02 };
        converged = false;
        while spent < level_budget {
            let objective = |v: &[f64]| {
                piecewise_efficiency(alpha, &zeta, v, &settings.integrator)
                    .map(|e| -e)
                    .unwrap_or(f64::INFINITY)
            };
            let m = minimize(
                objective,
                &theta,
                &SimplexOptions {
                    initial_step: step,
                    max_evals: level_budget - spent,
                    ftol: 1e-15,
                    xtol: 1e-10,
                },
            );
            spent += m.evals;
            iterations += m.iterations;
            let improved = m.value < best_value - 1e-15;
            if m.value <= best_value {
                best_value = m.value;
                theta = clamp_angles(&m.x);
            }
            // a restart that finds nothing new ends the level
            if m.converged && !improved {
                converged = true;
                break;
            }
            step *= 0.5;
        }
        evaluations += spent;
    }
    StartOutcome {
        efficiency: -best_value,
        theta,
        evaluations,
        iterations,
        converged,
    }
}

/// Multi-start simplex search over piecewise-linear θ profiles with
/// `n_segments` equal segments and free boundary jumps.
pub fn optimize_piecewise(alpha: f64, n_segments: usize, seed: u64, budget: usize) -> Result<SearchResult> {
    optimize_piecewise_with(&SearchSettings::new(alpha, n_segments, seed, budget))
}

pub fn optimize_piecewise_with(settings: &SearchSettings) -> Result<SearchResult> {
    if !(settings.alpha > 0.0 && settings.alpha.is_finite()) {
        return Err(Error::InvalidAlpha(settings.alpha));
    }
    if settings.n_segments < 2 {
        return Err(Error::InvalidSearch("n_segments must be at least 2".into()));
    }
    if settings.budget < 1 || settings.starts < 1 {
        return Err(Error::InvalidSearch("budget and starts must be positive".into()));
    }
    settings.integrator.validate()?;
    let per_start = (settings.budget / settings.starts).max(1);
    let outcomes: Vec<StartOutcome> = (0..settings.starts)
        .into_par_iter()
        .map(|i| run_start(settings, i, per_start))
        .collect();
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.efficiency > outcomes[best].efficiency {
            best = i;
        }
    }
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let winner = &outcomes[best];
    Ok(SearchResult {
        alpha: settings.alpha,
        n_segments: settings.n_segments,
        seed: settings.seed,
        zeta: nodes(settings.alpha, settings.n_segments),
        theta: winner.theta.clone(),
        efficiency: winner.efficiency,
        evaluations,
        iterations,
        converged: winner.converged,
        budget_exhausted: !winner.converged,
        best_start: best,
    })
}

/// A random piecewise-linear profile: 1 to 16 equal segments, node angles
/// uniform in [0, π/2].
pub fn random_profile(alpha: f64, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    let segments = rng.gen_range(1..=16);
    let zeta = nodes(alpha, segments);
    let theta = (0..=segments).map(|_| rng.gen_range(0.0..=FRAC_PI_2)).collect();
    (zeta, theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub alpha: f64,
    pub samples: usize,
    pub bound: f64,
    pub best_sampled: f64,
    /// max(sampled − bound), negative when every sample is below the bound
    pub worst_excess: f64,
}

/// Efficiency of `count` seeded random profiles against the closed-form optimum.
pub fn sampled_dominance(alpha: f64, count: usize, seed: u64, opts: &IntegratorOptions) -> Result<DominanceReport> {
    let bound = optimal_efficiency_closed(alpha)?;
    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (zeta, theta) = random_profile(alpha, &mut rng);
            piecewise_efficiency(alpha, &zeta, &theta, opts)
        })
        .collect::<Result<_>>()?;
    let best_sampled = values.iter().copied().fold(0.0, f64::max);
    Ok(DominanceReport {
        alpha,
        samples: count,
        bound,
        best_sampled,
        worst_excess: best_sampled - bound,
    })
}
