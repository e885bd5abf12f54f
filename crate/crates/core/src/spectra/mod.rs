//! Eigenmodes of the quasistatic Hamiltonian on S², on the radial interval
//! [0, r0] and on Dirichlet boxes, plus conversion to [`EnergyLevel`] lists.
//!
//! Kinetic energies are always stored as nonnegative numbers; the matching
//! Laplacian eigenvalue is λ = −E/(ħ²/2M) ≤ 0.

mod analytic;
mod numeric;
pub mod tridiag;

pub use analytic::{
    angular_modes, box_modes, dirichlet_wavenumber, eval_radial_wavefunction, radial_modes,
    AngularMode, BoxMode, RadialMode,
};
pub use numeric::{solve_radial_numeric, NumericSpectrum, Potential};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::heattrace::EnergyLevel;
use crate::units::UnitSystem;

/// Default relative tolerance for treating two energies as degenerate.
pub const DEFAULT_DEGENERACY_TOLERANCE: f64 = 1e-9;

pub(crate) fn degeneracy_window(energies: &[f64], rel_tolerance: f64) -> Result<(f64, f64)> {
    if energies.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if !(rel_tolerance.is_finite() && rel_tolerance > 0.0) {
        return Err(Error::invalid(format!(
            "degeneracy tolerance must be positive, got {rel_tolerance}"
        )));
    }
    if let Some(bad) = energies.iter().find(|e| !e.is_finite()) {
        return Err(Error::NonFinite(format!("energy {bad}")));
    }
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = max - min;
    let window = if spread > 0.0 {
        rel_tolerance * spread
    } else {
        rel_tolerance
    };
    Ok((min, window))
}

/// Dimension of the lowest eigenspace: the number of energies within
/// `rel_tolerance`·(max − min) of the minimum (absolute tolerance when all
/// energies coincide).
pub fn hilbert_dim_min(energies: &[f64], rel_tolerance: f64) -> Result<usize> {
    let (min, window) = degeneracy_window(energies, rel_tolerance)?;
    Ok(energies.iter().filter(|&&e| e - min <= window).count())
}

/// Groups energies into levels. Consecutive sorted energies within the
/// tolerance window of the first energy of a group share that group.
pub fn group_energies(energies: &[f64], rel_tolerance: f64) -> Result<Vec<EnergyLevel>> {
    let (_, window) = degeneracy_window(energies, rel_tolerance)?;
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut levels: Vec<EnergyLevel> = Vec::new();
    for e in sorted {
        match levels.last_mut() {
            Some(level) if e - level.energy <= window => level.multiplicity += 1,
            _ => levels.push(EnergyLevel::simple(e)?),
        }
    }
    Ok(levels)
}

/// Dimension of H_{S²} ⊗ H_r.
pub fn tensor_ground_space(angular_dim: usize, radial_dim: usize) -> Result<usize> {
    if angular_dim < 1 || radial_dim < 1 {
        return Err(Error::invalid(
            "tensor factors must have dimension at least 1",
        ));
    }
    Ok(angular_dim * radial_dim)
}

pub fn angular_levels(l_max: u32, u: &UnitSystem) -> Vec<EnergyLevel> {
    angular_modes(l_max, u)
        .iter()
        .map(|m| EnergyLevel {
            energy: m.kinetic_energy,
            multiplicity: m.degeneracy,
        })
        .collect()
}

pub fn radial_levels(r0: f64, n_max: u32, u: &UnitSystem) -> Result<Vec<EnergyLevel>> {
    Ok(radial_modes(r0, n_max, u)?
        .iter()
        .map(|m| EnergyLevel {
            energy: m.kinetic_energy,
            multiplicity: 1,
        })
        .collect())
}

/// Levels of [0, r0] × S²: every radial energy plus every angular energy, with
/// multiplicity 2l + 1, sorted ascending. `l_max = 0` gives the pure radial
/// list.
pub fn ball_levels(r0: f64, n_max: u32, l_max: u32, u: &UnitSystem) -> Result<Vec<EnergyLevel>> {
    let radial = radial_modes(r0, n_max, u)?;
    let angular = angular_modes(l_max, u);
    let mut levels: Vec<EnergyLevel> = radial
        .iter()
        .flat_map(|r| {
            angular.iter().map(move |a| EnergyLevel {
                energy: r.kinetic_energy + a.kinetic_energy,
                multiplicity: a.degeneracy,
            })
        })
        .collect();
    levels.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.multiplicity.cmp(&b.multiplicity))
    });
    Ok(levels)
}

/// Box modes grouped into degenerate levels.
pub fn box_levels(
    side: f64,
    d: u32,
    n_max_per_axis: u32,
    u: &UnitSystem,
) -> Result<Vec<EnergyLevel>> {
    let energies: Vec<f64> = box_modes(side, d, n_max_per_axis, u)?
        .iter()
        .map(|m| m.kinetic_energy)
        .collect();
    group_energies(&energies, DEFAULT_DEGENERACY_TOLERANCE)
}

/// Extra decades below the leading term that a truncated list must resolve.
const TRACE_DECADES: f64 = 40.0;

/// Dirichlet levels of an interval of length `side`, enough of them that the
/// heat trace at time `t` converges to double precision.
pub fn interval_levels_for_trace(side: f64, t: f64, u: &UnitSystem) -> Result<Vec<EnergyLevel>> {
    analytic::check_positive("t", t)?;
    analytic::check_positive("side", side)?;
    // need (nπ/L)²·t beyond ~40 + ln(trace size)
    let budget = TRACE_DECADES + (1.0 + side / (PI * t).sqrt()).ln();
    let n_max = (side / PI * (budget / t).sqrt()).ceil() + 2.0;
    let n_max = checked_count(n_max)?;
    radial_levels(side, n_max, u)
}

/// Unit-sphere levels l = 0..l_max with l_max large enough for the heat trace
/// at time `t` to converge.
pub fn sphere_levels_for_trace(t: f64, u: &UnitSystem) -> Result<Vec<EnergyLevel>> {
    analytic::check_positive("t", t)?;
    let budget = TRACE_DECADES + (1.0 + 1.0 / t).ln();
    let l_max = checked_count((budget / t).sqrt().ceil() + 2.0)?;
    Ok(angular_levels(l_max, u))
}

fn checked_count(n: f64) -> Result<u32> {
    if n > 50_000_000.0 {
        return Err(Error::invalid(format!(
            "t too small: {n:e} modes would be needed for a converged trace"
        )));
    }
    Ok(n as u32)
}
