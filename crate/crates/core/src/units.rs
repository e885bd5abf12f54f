//! Unit system for ħ, k_B and the particle mass M.

use crate::error::{Error, Result};

/// Physical constants scaling every energy and entropy formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    hbar: f64,
    k_boltzmann: f64,
    mass: f64,
}

impl UnitSystem {
    /// All three constants must be strictly positive and finite.
    pub fn new(hbar: f64, k_boltzmann: f64, mass: f64) -> Result<Self> {
        for (name, value) in [("hbar", hbar), ("k_boltzmann", k_boltzmann), ("mass", mass)] {
            if !value.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {value}")));
            }
            if value <= 0.0 {
                return Err(Error::invalid(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        Ok(Self {
            hbar,
            k_boltzmann,
            mass,
        })
    }

    /// ħ = k_B = 1 and M = 1/2, so that ħ²/(2M) = 1 and a kinetic eigenvalue
    /// equals its wavenumber squared.
    pub const fn natural() -> Self {
        Self {
            hbar: 1.0,
            k_boltzmann: 1.0,
            mass: 0.5,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn k_boltzmann(&self) -> f64 {
        self.k_boltzmann
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// ħ²/(2M), the factor in front of −∇² in the kinetic operator.
    pub fn kinetic_prefactor(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    /// Converts a Laplacian eigenvalue (≤ 0 for Dirichlet/closed problems) to a
    /// kinetic energy: E = −(ħ²/2M)·λ.
    pub fn energy_from_laplacian(&self, lambda: f64) -> f64 {
        -self.kinetic_prefactor() * lambda
    }

    /// Inverse of [`energy_from_laplacian`](Self::energy_from_laplacian).
    pub fn laplacian_from_energy(&self, energy: f64) -> f64 {
        -energy / self.kinetic_prefactor()
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}

pub fn natural_units() -> UnitSystem {
    UnitSystem::natural()
}

pub fn kinetic_prefactor(u: &UnitSystem) -> f64 {
    u.kinetic_prefactor()
}
