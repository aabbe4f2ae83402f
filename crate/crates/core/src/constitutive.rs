//! Isotropic hyper-elastic material models.
//!
//! The free energy splits into a volumetric part `Ψv(J)` and a shear part
//! `Ψs(Ī1, Ī2)` of the rank-one convex family
//!
//! ```text
//! Ψs = μ/(4ρ0) [ −2a(Ī1 − 3) + (1 + a)/3 (Ī2² − 9) ]
//! ```
//!
//! with `a = −1` giving the neo-Hookean law. Stress is `T = −p I + T0`.
//! Everything is stored in 3×3 form; plane-strain problems keep `B33 = 1`.

use serde::{Deserialize, Serialize};

use crate::error::MaterialError;
use crate::tensor::{deviatoric, Mat3};

/// Floor applied to the squared volumetric sound speed.
pub const SOUND_SPEED_FLOOR: f64 = 1e-14;

/// Principal invariants `(I1, I2, I3)`.
pub fn invariants(a: &Mat3) -> (f64, f64, f64) {
    let tr = a.trace();
    let tr2 = (a * a).trace();
    (tr, 0.5 * (tr * tr - tr2), a.determinant())
}

/// `A³ − I1 A² + I2 A − I3 I`, which vanishes identically.
pub fn cayley_hamilton_residual(a: &Mat3) -> Mat3 {
    let (i1, i2, i3) = invariants(a);
    let a2 = a * a;
    a2 * a - a2 * i1 + a * i2 - Mat3::identity() * i3
}

/// Kinematic quantities derived from the left Cauchy–Green tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainState {
    pub b: Mat3,
    pub j: f64,
    pub bbar: Mat3,
    pub i1bar: f64,
    pub i2bar: f64,
}

impl StrainState {
    pub fn new(b: &Mat3) -> Result<Self, MaterialError> {
        let det = b.determinant();
        if !(det > 0.0) || !det.is_finite() {
            return Err(MaterialError::NonPositiveJacobian(det.max(0.0).sqrt()));
        }
        let j = det.sqrt();
        let bbar = b * det.powf(-1.0 / 3.0);
        let (i1bar, i2bar, _) = invariants(&bbar);
        Ok(Self {
            b: *b,
            j,
            bbar,
            i1bar,
            i2bar,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "eos", rename_all = "snake_case")]
pub enum Eos {
    /// `Ψv = μ/(4ρ0)((J − 1)² + ln²J)`.
    NeoHookean,
    /// `εv = (p + γ p∞) / ((γ − 1) ρ)`.
    StiffenedGas { gamma: f64, p_inf: f64 },
}

/// Pressure and stress of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressState {
    pub p: f64,
    pub t: Mat3,
    /// Longitudinal wave speed.
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialModel {
    pub rho0: f64,
    pub young: f64,
    pub nu: f64,
    pub mu: f64,
    pub a: f64,
    pub eos: Eos,
    /// Constant added to the internal energy of the unloaded state. It carries
    /// no stress and only makes the positivity check on ε meaningful.
    pub eps_ref: f64,
}

pub fn neo_hookean_pressure(mu: f64, j: f64) -> Result<f64, MaterialError> {
    if !(j > 0.0) {
        return Err(MaterialError::NonPositiveJacobian(j));
    }
    Ok(-0.5 * mu * (j - 1.0 + j.ln() / j))
}

pub fn stiffened_gas_pressure(gamma: f64, p_inf: f64, rho: f64, eps_v: f64) -> f64 {
    (gamma - 1.0) * rho * eps_v - gamma * p_inf
}

pub fn stiffened_gas_energy(gamma: f64, p_inf: f64, rho: f64, p: f64) -> f64 {
    (p + gamma * p_inf) / ((gamma - 1.0) * rho)
}

impl MaterialModel {
    pub fn new(rho0: f64, young: f64, nu: f64, a: f64, eos: Eos) -> Result<Self, MaterialError> {
        let bad = |m: &str| Err(MaterialError::InvalidParameter(m.to_string()));
        if !(rho0 > 0.0) {
            return bad("rho0 must be positive");
        }
        if !(young > 0.0) {
            return bad("E must be positive");
        }
        if !(nu > -1.0 && nu < 0.5) {
            return bad("nu must lie in (-1, 0.5)");
        }
        if !(-1.0..=0.5).contains(&a) {
            return bad("a must lie in [-1, 0.5]");
        }
        if let Eos::StiffenedGas { gamma, p_inf } = eos {
            if !(gamma > 1.0) || !(p_inf >= 0.0) {
                return bad("stiffened gas needs gamma > 1 and p_inf >= 0");
            }
        }
        let mu = young / (2.0 * (1.0 + nu));
        let eps_ref = match eos {
            Eos::NeoHookean => mu / rho0,
            Eos::StiffenedGas { .. } => 0.0,
        };
        Ok(Self {
            rho0,
            young,
            nu,
            mu,
            a,
            eos,
            eps_ref,
        })
    }

    pub fn neo_hookean(rho0: f64, young: f64, nu: f64) -> Result<Self, MaterialError> {
        Self::new(rho0, young, nu, -1.0, Eos::NeoHookean)
    }

    /// `(∂Ψs/∂Ī1, ∂Ψs/∂Ī2)`.
    pub fn shear_derivatives(&self, s: &StrainState) -> (f64, f64) {
        let c = self.mu / self.rho0;
        (-0.5 * c * self.a, c * (1.0 + self.a) * s.i2bar / 6.0)
    }

    pub fn shear_energy(&self, s: &StrainState) -> f64 {
        let a = self.a;
        self.mu / (4.0 * self.rho0)
            * (-2.0 * a * (s.i1bar - 3.0) + (1.0 + a) / 3.0 * (s.i2bar * s.i2bar - 9.0))
    }

    /// Neo-Hookean volumetric free energy.
    pub fn volumetric_energy(&self, j: f64) -> f64 {
        let l = j.ln();
        self.mu / (4.0 * self.rho0) * ((j - 1.0).powi(2) + l * l)
    }

    /// `(Ψv, Ψs)`. For the stiffened gas `Ψv` is taken equal to `εv = ε − Ψs`.
    pub fn free_energies(&self, s: &StrainState, eps: f64) -> (f64, f64) {
        let psi_s = self.shear_energy(s);
        match self.eos {
            Eos::NeoHookean => (self.volumetric_energy(s.j), psi_s),
            Eos::StiffenedGas { .. } => (eps - self.eps_ref - psi_s, psi_s),
        }
    }

    /// Free energy as a function of an arbitrary (not necessarily symmetric)
    /// tensor through its invariants. Neo-Hookean volumetric part only.
    pub fn helmholtz(&self, b: &Mat3) -> f64 {
        let (i1, i2, i3) = invariants(b);
        let j = i3.sqrt();
        let i1bar = i1 * i3.powf(-1.0 / 3.0);
        let i2bar = i2 * i3.powf(-2.0 / 3.0);
        let a = self.a;
        self.volumetric_energy(j)
            + self.mu / (4.0 * self.rho0)
                * (-2.0 * a * (i1bar - 3.0) + (1.0 + a) / 3.0 * (i2bar * i2bar - 9.0))
    }

    /// `T0 = 2ρ[Ψ1 B̄0 − Ψ2 (B̄⁻¹)0]` with `ρ = ρ0/J`.
    pub fn deviatoric_stress(&self, s: &StrainState) -> Mat3 {
        let (d1, d2) = self.shear_derivatives(s);
        let rho = self.rho0 / s.j;
        let mut t0 = deviatoric(&s.bbar) * (2.0 * rho * d1);
        if d2 != 0.0 {
            let inv = s.bbar.try_inverse().unwrap_or_else(Mat3::zeros);
            t0 -= deviatoric(&inv) * (2.0 * rho * d2);
        }
        t0
    }

    /// Pressure. The neo-Hookean law uses `J` from `B`; the stiffened gas uses
    /// `ρ = 1/τ` and the volumetric internal energy `ε − Ψs`.
    pub fn pressure(&self, s: &StrainState, tau: f64, eps: f64) -> Result<f64, MaterialError> {
        match self.eos {
            Eos::NeoHookean => neo_hookean_pressure(self.mu, s.j),
            Eos::StiffenedGas { gamma, p_inf } => {
                let eps_v = eps - self.eps_ref - self.shear_energy(s);
                Ok(stiffened_gas_pressure(gamma, p_inf, 1.0 / tau, eps_v))
            }
        }
    }

    pub fn cauchy_stress(
        &self,
        s: &StrainState,
        tau: f64,
        eps: f64,
    ) -> Result<Mat3, MaterialError> {
        let p = self.pressure(s, tau, eps)?;
        Ok(self.deviatoric_stress(s) - Mat3::identity() * p)
    }

    /// `a = √(cv² + 4μ/(3ρ))` with `ρ = 1/τ`.
    pub fn wave_speed(&self, s: &StrainState, tau: f64, p: f64) -> f64 {
        let rho = 1.0 / tau;
        let cv2 = match self.eos {
            Eos::NeoHookean => {
                let j = s.j;
                0.5 * self.mu / self.rho0 * (j * j + 1.0 - j.ln())
            }
            Eos::StiffenedGas { gamma, p_inf } => gamma * (p + p_inf) / rho,
        };
        (cv2.max(SOUND_SPEED_FLOOR) + 4.0 * self.mu / (3.0 * rho)).sqrt()
    }

    /// Full stress evaluation of a state `(τ, ε, B)`.
    pub fn stress_state(&self, tau: f64, eps: f64, b: &Mat3) -> Result<StressState, MaterialError> {
        let s = StrainState::new(b)?;
        let p = self.pressure(&s, tau, eps)?;
        let t = self.deviatoric_stress(&s) - Mat3::identity() * p;
        Ok(StressState {
            p,
            t,
            a: self.wave_speed(&s, tau, p),
        })
    }

    /// Specific internal energy of a stress-free state with strain `B`.
    pub fn rest_internal_energy(&self, b: &Mat3, tau: f64) -> Result<f64, MaterialError> {
        let s = StrainState::new(b)?;
        let psi_s = self.shear_energy(&s);
        Ok(match self.eos {
            Eos::NeoHookean => self.eps_ref + self.volumetric_energy(s.j) + psi_s,
            Eos::StiffenedGas { gamma, p_inf } => {
                self.eps_ref + stiffened_gas_energy(gamma, p_inf, 1.0 / tau, 0.0) + psi_s
            }
        })
    }
}
