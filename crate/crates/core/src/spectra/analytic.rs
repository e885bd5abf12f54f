//! Closed-form eigenmodes: S² harmonics, Dirichlet radial modes on [0, r0] and
//! Dirichlet box modes in d dimensions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::UnitSystem;

/// Eigenspace of the angular kinetic operator on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMode {
    pub l: u32,
    pub kinetic_energy: f64,
    /// 2l + 1 spherical harmonics share this energy.
    pub degeneracy: u64,
}

impl AngularMode {
    pub fn new(l: u32, u: &UnitSystem) -> Self {
        let l_f = l as f64;
        Self {
            l,
            kinetic_energy: u.kinetic_prefactor() * l_f * (l_f + 1.0),
            degeneracy: 2 * l as u64 + 1,
        }
    }
}

/// Modes l = 0..=l_max.
pub fn angular_modes(l_max: u32, u: &UnitSystem) -> Vec<AngularMode> {
    (0..=l_max).map(|l| AngularMode::new(l, u)).collect()
}

/// c_n = nπ/r0. Shared by the radial modes and the S0 → −∞ fiducial limit so
/// both produce bit-identical wavenumbers.
pub fn dirichlet_wavenumber(n: u32, r0: f64) -> f64 {
    n as f64 * PI / r0
}

/// Regular radial mode ψ_n(r) = √(2/r0)·sin(c_n r)/r with ψ_n(r0) = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMode {
    pub n: u32,
    pub r0: f64,
    pub wavenumber: f64,
    pub kinetic_energy: f64,
}

impl RadialMode {
    pub fn new(n: u32, r0: f64, u: &UnitSystem) -> Result<Self> {
        check_positive("r0", r0)?;
        if n == 0 {
            return Err(Error::invalid("radial quantum number n must be at least 1"));
        }
        let wavenumber = dirichlet_wavenumber(n, r0);
        Ok(Self {
            n,
            r0,
            wavenumber,
            kinetic_energy: u.kinetic_prefactor() * wavenumber * wavenumber,
        })
    }

    pub fn wavefunction(&self, r: f64) -> Result<f64> {
        eval_radial_wavefunction(self, r)
    }
}

pub fn radial_modes(r0: f64, n_max: u32, u: &UnitSystem) -> Result<Vec<RadialMode>> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    (1..=n_max).map(|n| RadialMode::new(n, r0, u)).collect()
}

/// ψ_n(r) for 0 < r ≤ r0.
pub fn eval_radial_wavefunction(mode: &RadialMode, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= mode.r0) {
        return Err(Error::invalid(format!(
            "radius {r} outside the domain (0, {}]",
            mode.r0
        )));
    }
    Ok((2.0 / mode.r0).sqrt() * (mode.wavenumber * r).sin() / r)
}

/// Dirichlet mode of the box [0, L]^d.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxMode {
    pub quantum_numbers: Vec<u32>,
    pub side: f64,
    pub kinetic_energy: f64,
}

/// Refuse enumerations larger than this many tuples.
const MAX_BOX_MODES: u64 = 20_000_000;

/// All modes with every quantum number in 1..=n_max_per_axis, ascending by
/// energy; equal energies are ordered lexicographically by quantum numbers.
pub fn box_modes(side: f64, d: u32, n_max_per_axis: u32, u: &UnitSystem) -> Result<Vec<BoxMode>> {
    check_positive("side", side)?;
    if d == 0 || n_max_per_axis == 0 {
        return Err(Error::invalid(
            "box dimension and n_max_per_axis must be at least 1",
        ));
    }
    let count = (n_max_per_axis as u64)
        .checked_pow(d)
        .filter(|&c| c <= MAX_BOX_MODES)
        .ok_or_else(|| {
            Error::invalid(format!(
                "{n_max_per_axis}^{d} box modes exceed the enumeration limit {MAX_BOX_MODES}"
            ))
        })?;
    let scale = u.kinetic_prefactor() * (PI / side).powi(2);
    let mut modes = Vec::with_capacity(count as usize);
    let mut tuple = vec![1u32; d as usize];
    loop {
        let sum_sq: u64 = tuple.iter().map(|&n| (n as u64) * (n as u64)).sum();
        modes.push(BoxMode {
            quantum_numbers: tuple.clone(),
            side,
            kinetic_energy: scale * sum_sq as f64,
        });
        // odometer increment, last axis fastest
        let mut axis = tuple.len();
        loop {
            if axis == 0 {
                modes.sort_by(|a, b| {
                    a.kinetic_energy
                        .total_cmp(&b.kinetic_energy)
                        .then_with(|| a.quantum_numbers.cmp(&b.quantum_numbers))
                });
                return Ok(modes);
            }
            axis -= 1;
            if tuple[axis] < n_max_per_axis {
                tuple[axis] += 1;
                break;
            }
            tuple[axis] = 1;
        }
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("{name} = {value}")));
    }
    if value <= 0.0 {
        return Err(Error::invalid(format!(
            "{name} must be positive, got {value}"
        )));
    }
    Ok(())
}
