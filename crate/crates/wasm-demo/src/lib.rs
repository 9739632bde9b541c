//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the row layout is given on
//! each function.

use double_lambda::efficiency::{constant_efficiency_closed, optimal_efficiency_closed};
use double_lambda::propagation::{propagate_reduced, FieldState, IntegratorOptions};
use double_lambda::protocols::{singular_slope, solve_theta0, Protocol, ProtocolSpec};
use wasm_bindgen::prelude::*;

fn protocol(name: &str, alpha: f64, zeta0: f64, zbar: f64) -> Result<Protocol, String> {
    match name {
        "optimal" => Ok(Protocol::Optimal),
        "constant" => Ok(Protocol::Constant),
        "adiabatic" => Ok(Protocol::Adiabatic {
            zeta0: zeta0 * alpha,
            zbar: zbar * alpha,
        }),
        other => Err(format!("unknown protocol {other:?}")),
    }
}

/// Rows of (α, η_optimal, η_constant, η_adiabatic) for `points` densities up
/// to `alpha_max`. The adiabatic ramp sits at `zeta0·α` with width `zbar·α`.
pub fn efficiency_rows(alpha_max: f64, points: usize, zeta0: f64, zbar: f64) -> Result<Vec<f64>, String> {
    if points == 0 {
        return Err("need at least one point".into());
    }
    let mut out = Vec::with_capacity(4 * points);
    for k in 1..=points {
        let alpha = alpha_max * k as f64 / points as f64;
        let adiabatic = ProtocolSpec::new(alpha, protocol("adiabatic", alpha, zeta0, zbar)?)
            .profile()
            .and_then(|p| propagate_reduced(&p, alpha, FieldState::INCIDENT_PROBE, &IntegratorOptions::default()))
            .map_err(|e| e.to_string())?
            .conversion_efficiency();
        out.extend([
            alpha,
            optimal_efficiency_closed(alpha).map_err(|e| e.to_string())?,
            constant_efficiency_closed(alpha).map_err(|e| e.to_string())?,
            adiabatic,
        ]);
    }
    Ok(out)
}

/// Rows of (ζ, θ, Ω_p, Ω_s) through the medium.
pub fn trajectory_rows(name: &str, alpha: f64, zeta0: f64, zbar: f64, steps_per_unit: f64) -> Result<Vec<f64>, String> {
    let spec = ProtocolSpec::new(alpha, protocol(name, alpha, zeta0, zbar)?);
    let traj = spec
        .profile()
        .and_then(|p| {
            propagate_reduced(&p, alpha, FieldState::INCIDENT_PROBE, &IntegratorOptions::with_density(steps_per_unit))
        })
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * traj.len());
    for ((z, t), s) in traj.zeta.iter().zip(&traj.theta).zip(&traj.states) {
        out.extend([*z, *t, s.omega_p, s.omega_s]);
    }
    Ok(out)
}

/// (θ0, u_s, η_optimal, η_constant) at one optical density.
pub fn optimum_summary(alpha: f64) -> Result<Vec<f64>, String> {
    let theta0 = solve_theta0(alpha).map_err(|e| e.to_string())?;
    Ok(vec![
        theta0,
        singular_slope(theta0),
        optimal_efficiency_closed(alpha).map_err(|e| e.to_string())?,
        constant_efficiency_closed(alpha).map_err(|e| e.to_string())?,
    ])
}

#[wasm_bindgen(js_name = efficiencyCurve)]
pub fn efficiency_curve(alpha_max: f64, points: usize, zeta0: f64, zbar: f64) -> Result<Vec<f64>, JsError> {
    efficiency_rows(alpha_max, points, zeta0, zbar).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate(protocol: &str, alpha: f64, zeta0: f64, zbar: f64, steps_per_unit: f64) -> Result<Vec<f64>, JsError> {
    trajectory_rows(protocol, alpha, zeta0, zbar, steps_per_unit).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = optimum)]
pub fn optimum(alpha: f64) -> Result<Vec<f64>, JsError> {
    optimum_summary(alpha).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_layout() {
        let rows = efficiency_rows(100.0, 4, 0.5, 0.05).unwrap();
        assert_eq!(rows.len(), 16);
        let last = &rows[12..];
        assert_eq!(last[0], 100.0);
        assert!((last[1] - 0.9094).abs() < 5e-4 && (last[2] - 0.9077).abs() < 5e-4);
        assert!((last[3] - 0.8197).abs() < 5e-4);
    }

    #[test]
    fn trajectory_ends_at_efficiency() {
        let rows = trajectory_rows("optimal", 100.0, 0.5, 0.05, 10.0).unwrap();
        assert_eq!(rows.len() % 4, 0);
        let s = rows[rows.len() - 1];
        assert!((s * s - 0.9094).abs() < 5e-4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(trajectory_rows("zigzag", 10.0, 0.5, 0.05, 10.0).is_err());
        assert!(optimum_summary(-1.0).is_err());
        assert!(efficiency_rows(10.0, 0, 0.5, 0.05).is_err());
    }

    #[test]
    fn summary_at_reference_density() {
        let s = optimum_summary(100.0).unwrap();
        assert!((s[0] - 1.540568).abs() < 1e-5 && (s[1] - 0.015105).abs() < 1e-5);
    }
}
