//! Steady state of the weak-field coherence equations of the resonant
//! double-Λ system.
//!
//! With ρ11 ≈ 1 and all fields resonant the coherences obey
//!
//! ```text
//! dρ31/dt = i(Ωp + Ωc ρ21) − Γ31 ρ31
//! dρ41/dt = i(Ωs + Ωd ρ21) − Γ41 ρ41
//! dρ21/dt = i(Ωc* ρ31 + Ωd* ρ41) − Γ21 ρ21
//! ```
//!
//! [`steady_coherences`] solves the stationary system exactly for arbitrary
//! complex fields and rates. [`first_order_coherences`] is the projector form
//! that holds when Γ21 = 0 and Γ31 = Γ41.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relaxation rates, all in units of the excited-state decay Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub gamma31: f64,
    pub gamma41: f64,
    pub gamma21: f64,
}

impl Rates {
    pub fn new(gamma31: f64, gamma41: f64, gamma21: f64) -> Result<Self> {
        let rates = Self {
            gamma31,
            gamma41,
            gamma21,
        };
        rates.validate()?;
        Ok(rates)
    }

    /// Γ31 = Γ41 = `gamma`, Γ21 = 0.
    pub fn symmetric(gamma: f64) -> Self {
        Self {
            gamma31: gamma,
            gamma41: gamma,
            gamma21: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma31 > 0.0 && self.gamma31.is_finite()) {
            return Err(Error::InvalidRates(format!("gamma31={} must be > 0", self.gamma31)));
        }
        if !(self.gamma41 > 0.0 && self.gamma41.is_finite()) {
            return Err(Error::InvalidRates(format!("gamma41={} must be > 0", self.gamma41)));
        }
        if !(self.gamma21 >= 0.0 && self.gamma21.is_finite()) {
            return Err(Error::InvalidRates(format!("gamma21={} must be >= 0", self.gamma21)));
        }
        Ok(())
    }
}

impl Default for Rates {
    fn default() -> Self {
        Self::symmetric(1.0)
    }
}

/// Complex Rabi frequencies of the four resonant fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveFields {
    pub omega_p: Complex64,
    pub omega_s: Complex64,
    pub omega_c: Complex64,
    pub omega_d: Complex64,
}

impl DriveFields {
    pub fn real(omega_p: f64, omega_s: f64, omega_c: f64, omega_d: f64) -> Self {
        Self {
            omega_p: omega_p.into(),
            omega_s: omega_s.into(),
            omega_c: omega_c.into(),
            omega_d: omega_d.into(),
        }
    }

    /// Generalized Rabi frequency sqrt(|Ωc|² + |Ωd|²).
    pub fn control_magnitude(&self) -> f64 {
        self.omega_c.norm().hypot(self.omega_d.norm())
    }

    fn is_finite(&self) -> bool {
        [self.omega_p, self.omega_s, self.omega_c, self.omega_d]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceSolution {
    pub rho21: Complex64,
    pub rho31: Complex64,
    pub rho41: Complex64,
}

impl CoherenceSolution {
    /// Right-hand sides of the three coherence equations; all zero in steady state.
    pub fn residuals(&self, fields: &DriveFields, rates: &Rates) -> [Complex64; 3] {
        let DriveFields {
            omega_p,
            omega_s,
            omega_c,
            omega_d,
        } = *fields;
        [
            I * (omega_p + omega_c * self.rho21) - rates.gamma31 * self.rho31,
            I * (omega_s + omega_d * self.rho21) - rates.gamma41 * self.rho41,
            I * (omega_c.conj() * self.rho31 + omega_d.conj() * self.rho41)
                - rates.gamma21 * self.rho21,
        ]
    }

    fn is_finite(&self) -> bool {
        [self.rho21, self.rho31, self.rho41]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Exact steady state of the coherence equations.
///
/// The excited-state coherences are eliminated in favour of ρ21, which then
/// satisfies a scalar equation with coefficient |Ωc|²/Γ31 + |Ωd|²/Γ41 + Γ21.
pub fn steady_coherences(fields: &DriveFields, rates: &Rates) -> Result<CoherenceSolution> {
    rates.validate()?;
    if !fields.is_finite() {
        return Err(Error::NonFinite("steady_coherences input"));
    }
    let DriveFields {
        omega_p,
        omega_s,
        omega_c,
        omega_d,
    } = *fields;

    let coupling = omega_c.norm_sqr() / rates.gamma31 + omega_d.norm_sqr() / rates.gamma41;
    let denom = coupling + rates.gamma21;
    if denom == 0.0 {
        return Err(Error::SingularSystem);
    }
    let source = omega_c.conj() * omega_p / rates.gamma31 + omega_d.conj() * omega_s / rates.gamma41;
    let rho21 = -source / denom;
    let sol = CoherenceSolution {
        rho21,
        rho31: I * (omega_p + omega_c * rho21) / rates.gamma31,
        rho41: I * (omega_s + omega_d * rho21) / rates.gamma41,
    };
    if !sol.is_finite() {
        return Err(Error::NonFinite("steady_coherences"));
    }
    Ok(sol)
}

/// ρ21 = −(Ωc* Ωp + Ωd* Ωs)/Ω² for a dephasing-free ground state and equal
/// excited-state decay rates.
pub fn undephased_rho21(fields: &DriveFields) -> Result<Complex64> {
    let omega_sq = fields.omega_c.norm_sqr() + fields.omega_d.norm_sqr();
    if omega_sq == 0.0 {
        return Err(Error::SingularSystem);
    }
    Ok(-(fields.omega_c.conj() * fields.omega_p + fields.omega_d.conj() * fields.omega_s) / omega_sq)
}

/// The symmetric projector onto the lossy mode (cos θ, −sin θ).
pub fn lossy_projector(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c * c, -s * c], [-s * c, s * s]]
}

/// First-order (ρ31, ρ41) = (i/Γ) M(θ) (Ωp, Ωs).
pub fn first_order_coherences(
    omega_p: f64,
    omega_s: f64,
    theta: f64,
    gamma: f64,
) -> (Complex64, Complex64) {
    let m = lossy_projector(theta);
    let a = m[0][0] * omega_p + m[0][1] * omega_s;
    let b = m[1][0] * omega_p + m[1][1] * omega_s;
    (I * a / gamma, I * b / gamma)
}
