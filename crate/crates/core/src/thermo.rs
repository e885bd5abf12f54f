//! The thermostatic side of the duality.
//!
//! Covers the ideal-gas fundamental equation S(V) = S0 + k_B ln(V/V0), the
//! metric-free entropy expectation in the radial ground states, the density
//! relation |ψ|² = exp(S/k_B), the fiducial wavenumber constraint
//! sin(c·r0)/r0 = exp(S0/2k_B), the substitution it/ħ ↔ −1/(k_B T) and the
//! Wick-rotated and quasistatic partition functions.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::heattrace::{sorted_levels, EnergyLevel};
use crate::specfun::{integrate, sine_integral, QuadratureSpec};
use crate::spectra::{
    degeneracy_window, dirichlet_wavenumber, RadialMode, DEFAULT_DEGENERACY_TOLERANCE,
};
use crate::summation::CompensatedSum;
use crate::units::UnitSystem;

/// Fiducial entropy S0: a finite number or the formal limit S0 = −∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiducialEntropy {
    Finite(f64),
    NegativeInfinity,
}

impl FiducialEntropy {
    pub fn finite(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite(format!(
                "finite entropy expected, got {value}; use FiducialEntropy::NegativeInfinity"
            )));
        }
        Ok(FiducialEntropy::Finite(value))
    }

    pub fn as_finite(&self) -> Option<f64> {
        match *self {
            FiducialEntropy::Finite(v) => Some(v),
            FiducialEntropy::NegativeInfinity => None,
        }
    }
}

/// Ideal-gas fundamental equation at fixed temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalEquation {
    pub s0: FiducialEntropy,
    pub v0: f64,
    /// Recorded for reference; S(V) does not depend on it.
    pub temperature_fixed: f64,
}

impl FundamentalEquation {
    pub fn new(s0: FiducialEntropy, v0: f64, temperature_fixed: f64) -> Result<Self> {
        if let FiducialEntropy::Finite(v) = s0 {
            FiducialEntropy::finite(v)?;
        }
        for (name, value) in [("v0", v0), ("temperature_fixed", temperature_fixed)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(Self {
            s0,
            v0,
            temperature_fixed,
        })
    }

    /// The fiducial sphere of radius r0: V0 = 4π r0³/3.
    pub fn for_sphere(s0: FiducialEntropy, r0: f64, temperature_fixed: f64) -> Result<Self> {
        Self::new(s0, 4.0 * PI * r0.powi(3) / 3.0, temperature_fixed)
    }
}

/// S(V) = S0 + k_B ln(V/V0); stays at −∞ when S0 is the sentinel.
pub fn ideal_gas_entropy(
    v: f64,
    fe: &FundamentalEquation,
    u: &UnitSystem,
) -> Result<FiducialEntropy> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(format!(
            "volume must be positive and finite, got {v}"
        )));
    }
    Ok(match fe.s0 {
        FiducialEntropy::Finite(s0) => {
            FiducialEntropy::Finite(s0 + u.k_boltzmann() * (v / fe.v0).ln())
        }
        FiducialEntropy::NegativeInfinity => FiducialEntropy::NegativeInfinity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    ClosedForm,
    Quadrature,
}

/// ⟨ψ_n| Ŝ − S0 |ψ_n⟩ with Ŝ = S0 + 3k_B ln(r̂/r0).
///
/// The closed form is 3k_B(Si(2πn)/(2πn) − 1); the quadrature route integrates
/// 3k_B r²|ψ_n(r)|² ln(r/r0) over [0, r0] directly. Neither depends on r0.
pub fn entropy_expectation(n: u32, r0: f64, method: EntropyMethod, u: &UnitSystem) -> Result<f64> {
    entropy_expectation_with(n, r0, method, u, &QuadratureSpec::default())
}

pub fn entropy_expectation_with(
    n: u32,
    r0: f64,
    method: EntropyMethod,
    u: &UnitSystem,
    quadrature: &QuadratureSpec,
) -> Result<f64> {
    let mode = RadialMode::new(n, r0, u)?;
    let k_b = u.k_boltzmann();
    match method {
        EntropyMethod::ClosedForm => {
            let x = 2.0 * PI * n as f64;
            Ok(3.0 * k_b * (sine_integral(x)? / x - 1.0))
        }
        EntropyMethod::Quadrature => {
            let integrand = |r: f64| {
                let psi = mode.wavefunction(r).unwrap_or(0.0);
                r * r * psi * psi * (r / r0).ln()
            };
            Ok(3.0 * k_b * integrate(integrand, 0.0, r0, quadrature)?)
        }
    }
}

/// S = k_B ln|ψ|².
pub fn entropy_from_density(psi_squared: f64, u: &UnitSystem) -> Result<f64> {
    if !(psi_squared.is_finite() && psi_squared > 0.0) {
        return Err(Error::invalid(format!(
            "density must be positive and finite, got {psi_squared}"
        )));
    }
    Ok(u.k_boltzmann() * psi_squared.ln())
}

/// |ψ|² = exp(S/k_B).
pub fn density_from_entropy(s: f64, u: &UnitSystem) -> Result<f64> {
    exp_checked(s / u.k_boltzmann())
}

/// exp(S/k_B), the modulus of the dual mechanical weight exp(−iI/ħ).
pub fn boltzmann_weight_from_entropy(s: f64, u: &UnitSystem) -> Result<f64> {
    exp_checked(s / u.k_boltzmann())
}

fn exp_checked(exponent: f64) -> Result<f64> {
    if exponent.is_nan() {
        return Err(Error::NonFinite(format!("exponent {exponent}")));
    }
    let value = exponent.exp();
    if value.is_infinite() {
        return Err(Error::Overflow { exponent });
    }
    Ok(value)
}

/// Solves sin(c·r0)/r0 = exp(S0/(2k_B)) for the `branch`-th smallest positive c.
///
/// For S0 = −∞ the right-hand side vanishes and the roots are the Dirichlet
/// wavenumbers nπ/r0. Otherwise each positive hump of the sine carries two
/// roots, one per monotone half; branches count them in increasing order. A
/// right-hand side of exactly 1/r0 touches each hump once.
pub fn solve_fiducial_wavenumber(
    fe: &FundamentalEquation,
    r0: f64,
    branch: u32,
    u: &UnitSystem,
) -> Result<f64> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::invalid(format!(
            "r0 must be positive and finite, got {r0}"
        )));
    }
    if branch == 0 {
        return Err(Error::invalid("branch index must be at least 1"));
    }
    let s0 = match fe.s0 {
        FiducialEntropy::NegativeInfinity => return Ok(dirichlet_wavenumber(branch, r0)),
        FiducialEntropy::Finite(s0) => s0,
    };
    let rhs = (s0 / (2.0 * u.k_boltzmann())).exp();
    let max = 1.0 / r0;
    if rhs > max {
        return Err(Error::NoRealSolution { rhs, max });
    }
    let target = rhs * r0;
    let index = (branch - 1) as f64;
    if target == 1.0 {
        return Ok((FRAC_PI_2 + 2.0 * PI * index) / r0);
    }
    let hump = ((branch - 1) / 2) as f64;
    let start = 2.0 * PI * hump;
    let x = if (branch - 1).is_multiple_of(2) {
        bisect_monotone(start, start + FRAC_PI_2, target, true)
    } else {
        bisect_monotone(start + FRAC_PI_2, start + PI, target, false)
    };
    Ok(x / r0)
}

/// Root of sin(x) = target on an interval where sin is monotone.
fn bisect_monotone(mut lo: f64, mut hi: f64, target: f64, increasing: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = mid.sin() < target;
        if below == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One point of the duality, seen both as imaginary time τ and as temperature
/// T = ħ/(k_B τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityPoint {
    pub imaginary_time: f64,
    pub temperature: f64,
}

impl DualityPoint {
    /// τ·k_B·T/ħ, equal to 1 up to rounding.
    pub fn consistency(&self, u: &UnitSystem) -> f64 {
        self.imaginary_time * u.k_boltzmann() * self.temperature / u.hbar()
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::invalid(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

/// τ → (τ, T = ħ/(k_B τ)). The point keeps τ exactly as given.
pub fn duality_map(tau: f64, u: &UnitSystem) -> Result<DualityPoint> {
    check_positive("imaginary time", tau)?;
    Ok(DualityPoint {
        imaginary_time: tau,
        temperature: u.hbar() / (u.k_boltzmann() * tau),
    })
}

/// T → (τ = ħ/(k_B T), T). The point keeps T exactly as given.
pub fn duality_from_temperature(temperature: f64, u: &UnitSystem) -> Result<DualityPoint> {
    check_positive("temperature", temperature)?;
    Ok(DualityPoint {
        imaginary_time: u.hbar() / (u.k_boltzmann() * temperature),
        temperature,
    })
}

/// exp(−iEt/ħ) for a single level at real time t; modulus one.
pub fn real_time_phase(energy: f64, t: f64, u: &UnitSystem) -> Complex64 {
    Complex64::from_polar(1.0, -energy * t / u.hbar())
}

fn check_levels(levels: &[EnergyLevel]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if let Some(bad) = levels
        .iter()
        .find(|l| !l.energy.is_finite() || l.multiplicity == 0)
    {
        return Err(Error::invalid(format!("invalid level {bad:?}")));
    }
    Ok(())
}

/// Σ mult·exp(−E/(k_B T)), ascending in energy, compensated.
pub fn thermal_partition(levels: &[EnergyLevel], temperature: f64, u: &UnitSystem) -> Result<f64> {
    check_levels(levels)?;
    check_positive("temperature", temperature)?;
    let thermal_energy = u.k_boltzmann() * temperature;
    let sum = sorted_levels(levels)
        .iter()
        .map(|l| l.multiplicity as f64 * (-l.energy / thermal_energy).exp())
        .collect::<CompensatedSum>()
        .value();
    if !sum.is_finite() {
        return Err(Error::Overflow {
            exponent: -sorted_levels(levels)[0].energy / thermal_energy,
        });
    }
    Ok(sum)
}

/// Wick-rotated partition function Z_qm(τ) = Σ mult·exp(−E τ/ħ), evaluated
/// as the thermal sum at the dual temperature T = ħ/(k_B τ).
pub fn qm_partition(levels: &[EnergyLevel], tau: f64, u: &UnitSystem) -> Result<f64> {
    check_levels(levels)?;
    let point = duality_map(tau, u)?;
    thermal_partition(levels, point.temperature, u)
}

/// Multiplicity and energy of the lowest level, merging entries that lie
/// within the default degeneracy window.
pub fn minimal_level(levels: &[EnergyLevel]) -> Result<EnergyLevel> {
    check_levels(levels)?;
    let energies: Vec<f64> = levels.iter().map(|l| l.energy).collect();
    let (min, window) = degeneracy_window(&energies, DEFAULT_DEGENERACY_TOLERANCE)?;
    let multiplicity = levels
        .iter()
        .filter(|l| l.energy - min <= window)
        .map(|l| l.multiplicity)
        .sum();
    Ok(EnergyLevel {
        energy: min,
        multiplicity,
    })
}

/// Z_qqm(τ) = dim H_min·exp(−E_min τ/ħ); at τ = 0 exactly dim H_min.
pub fn quasistatic_partition(levels: &[EnergyLevel], tau: f64, u: &UnitSystem) -> Result<f64> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid(format!(
            "imaginary time must be nonnegative, got {tau}"
        )));
    }
    let ground = minimal_level(levels)?;
    let dim = ground.multiplicity as f64;
    if tau == 0.0 {
        return Ok(dim);
    }
    let value = dim * (-ground.energy * tau / u.hbar()).exp();
    if !value.is_finite() {
        return Err(Error::Overflow {
            exponent: -ground.energy * tau / u.hbar(),
        });
    }
    Ok(value)
}
