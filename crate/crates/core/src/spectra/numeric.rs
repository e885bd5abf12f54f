//! Finite-difference solver for the radial problem with an optional potential.
//!
//! With u(r) = r·ψ(r) the radial equation becomes
//! −(ħ²/2M)·u'' + U(r)·u = E·u on [0, r0] with u(0) = u(r0) = 0. The interior
//! nodes of a uniform grid give a symmetric tridiagonal matrix whose lowest
//! eigenvalues are found by Sturm bisection.

use std::fmt;
use std::sync::Arc;

use super::analytic::check_positive;
use super::tridiag;
use crate::error::{Error, Result};
use crate::units::UnitSystem;

/// Radial potential U(r), either a rule evaluated at the grid nodes or samples
/// already taken on the solver grid (one per node, endpoints included).
#[derive(Clone)]
pub enum Potential {
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Sampled(Vec<f64>),
}

impl Potential {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Potential::Function(Arc::new(f))
    }

    pub fn constant(value: f64) -> Self {
        Self::from_fn(move |_| value)
    }

    /// Values at the interior nodes r_i = i·h, i = 1..grid_points−2.
    fn interior_samples(&self, grid_points: usize, h: f64) -> Result<Vec<f64>> {
        let samples: Vec<f64> = match self {
            Potential::Function(f) => (1..grid_points - 1).map(|i| f(i as f64 * h)).collect(),
            Potential::Sampled(values) => {
                if values.len() != grid_points {
                    return Err(Error::invalid(format!(
                        "{} potential samples supplied for a {grid_points}-point grid",
                        values.len()
                    )));
                }
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::NonFinite(format!(
                        "potential sample {v} at node {i}"
                    )));
                }
                values[1..grid_points - 1].to_vec()
            }
        };
        if let Some((i, v)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "potential value {v} at r = {}",
                (i + 1) as f64 * h
            )));
        }
        Ok(samples)
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Function(_) => f.write_str("Potential::Function(..)"),
            Potential::Sampled(v) => write!(f, "Potential::Sampled({} samples)", v.len()),
        }
    }
}

/// Lowest eigenpairs of the discretized radial Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericSpectrum {
    pub r0: f64,
    pub grid_points: usize,
    /// Ascending.
    pub energies: Vec<f64>,
    /// u(r) = r·ψ(r) on all grid nodes, zero at both ends, normalized so that
    /// Σ u(r_i)²·h = 1.
    pub modes: Vec<Vec<f64>>,
}

impl NumericSpectrum {
    pub fn grid_spacing(&self) -> f64 {
        self.r0 / (self.grid_points - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.grid_spacing();
        (0..self.grid_points).map(|i| i as f64 * h).collect()
    }

    /// Wavenumbers c = √(E/(ħ²/2M)); meaningful for the free problem.
    pub fn wavenumbers(&self, u: &UnitSystem) -> Vec<f64> {
        let p = u.kinetic_prefactor();
        self.energies.iter().map(|e| (e / p).sqrt()).collect()
    }
}

pub fn solve_radial_numeric(
    r0: f64,
    grid_points: usize,
    k_lowest: usize,
    u: &UnitSystem,
    potential: Option<&Potential>,
) -> Result<NumericSpectrum> {
    check_positive("r0", r0)?;
    if grid_points < 3 {
        return Err(Error::invalid(format!(
            "grid too coarse: {grid_points} points, at least 3 required"
        )));
    }
    if k_lowest < 1 || k_lowest >= grid_points - 1 {
        return Err(Error::invalid(format!(
            "k_lowest = {k_lowest} must lie in 1..{} for a {grid_points}-point grid",
            grid_points - 2
        )));
    }

    let interior = grid_points - 2;
    let h = r0 / (grid_points - 1) as f64;
    let stiffness = u.kinetic_prefactor() / (h * h);
    let mut diag = vec![2.0 * stiffness; interior];
    if let Some(potential) = potential {
        let samples = potential.interior_samples(grid_points, h)?;
        diag.iter_mut().zip(&samples).for_each(|(d, v)| *d += v);
    }
    let off = vec![-stiffness; interior - 1];

    let energies = tridiag::lowest_eigenvalues(&diag, &off, k_lowest);
    let vectors = tridiag::eigenvectors(&diag, &off, &energies);
    let norm = h.sqrt();
    let modes = vectors
        .into_iter()
        .map(|v| {
            let mut full = Vec::with_capacity(grid_points);
            full.push(0.0);
            full.extend(v.iter().map(|x| x / norm));
            full.push(0.0);
            full
        })
        .collect();
    Ok(NumericSpectrum {
        r0,
        grid_points,
        energies,
        modes,
    })
}
