//! Heat-trace partition functions Z(t) = Tr exp(t∇²) and Weyl volume estimates.
//!
//! Spectra enter as explicit [`EnergyLevel`] lists in energy units; the
//! Laplacian eigenvalue of a level is λ = −(2M/ħ²)·E. Product domains (boxes,
//! the [0, r0] × S² configuration space) are handled by multiplying the traces
//! of their factors instead of enumerating tuples.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;
use crate::units::UnitSystem;

/// Terms smaller than this fraction of the running sum end the summation.
const TRUNCATION_RATIO: f64 = 1e-16;

/// An energy eigenvalue together with the dimension of its eigenspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLevel {
    pub energy: f64,
    pub multiplicity: u64,
}

impl EnergyLevel {
    pub fn new(energy: f64, multiplicity: u64) -> Result<Self> {
        if !energy.is_finite() {
            return Err(Error::NonFinite(format!("level energy {energy}")));
        }
        if multiplicity == 0 {
            return Err(Error::invalid("level multiplicity must be at least 1"));
        }
        Ok(Self {
            energy,
            multiplicity,
        })
    }

    pub fn simple(energy: f64) -> Result<Self> {
        Self::new(energy, 1)
    }
}

/// Sorts levels ascending by energy; equal energies are ordered by multiplicity
/// so the result does not depend on the input order.
pub(crate) fn sorted_levels(levels: &[EnergyLevel]) -> Vec<EnergyLevel> {
    let mut sorted = levels.to_vec();
    sorted.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then_with(|| a.multiplicity.cmp(&b.multiplicity))
    });
    sorted
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatTraceResult {
    pub t: f64,
    pub trace: f64,
    /// Estimated upper bound on the omitted tail of the sum.
    pub truncation_bound: f64,
    /// Number of levels actually summed.
    pub terms_used: usize,
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("heat-trace time {t}")));
    }
    if t <= 0.0 {
        return Err(Error::invalid(format!(
            "heat-trace time must be positive, got {t}"
        )));
    }
    Ok(())
}

/// Z(t) = Σ mult·exp(t·λ), λ = −(2M/ħ²)·E.
///
/// Levels are summed from the lowest energy upwards with compensated
/// summation. Summation stops once a term drops below 1e-16 of the running sum
/// while terms are decreasing; the remaining tail is bounded geometrically
/// from the ratio of the last two terms.
pub fn heat_trace(levels: &[EnergyLevel], t: f64, u: &UnitSystem) -> Result<HeatTraceResult> {
    check_time(t)?;
    if levels.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if let Some(bad) = levels
        .iter()
        .find(|l| l.energy < 0.0 || !l.energy.is_finite())
    {
        return Err(Error::invalid(format!(
            "heat trace needs nonnegative finite energies, got {}",
            bad.energy
        )));
    }

    let mut acc = CompensatedSum::new();
    let mut previous: Option<f64> = None;
    let mut truncation_bound = 0.0;
    let mut terms_used = 0;
    for level in sorted_levels(levels) {
        let lambda = u.laplacian_from_energy(level.energy);
        let term = level.multiplicity as f64 * (t * lambda).exp();
        if let Some(prev) = previous {
            let ratio = term / prev;
            if term < TRUNCATION_RATIO * acc.value() && ratio < 1.0 {
                truncation_bound = term / (1.0 - ratio);
                break;
            }
        }
        acc.add(term);
        previous = Some(term);
        terms_used += 1;
    }
    Ok(HeatTraceResult {
        t,
        trace: acc.value(),
        truncation_bound,
        terms_used,
    })
}

/// Heat trace of a product domain: the product of the factor traces.
pub fn product_heat_trace(
    factors: &[&[EnergyLevel]],
    t: f64,
    u: &UnitSystem,
) -> Result<HeatTraceResult> {
    check_time(t)?;
    if factors.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut trace = 1.0;
    let mut upper = 1.0;
    let mut terms_used = 0;
    for levels in factors {
        let factor = heat_trace(levels, t, u)?;
        trace *= factor.trace;
        upper *= factor.trace + factor.truncation_bound;
        terms_used += factor.terms_used;
    }
    Ok(HeatTraceResult {
        t,
        trace,
        truncation_bound: (upper - trace).max(0.0),
        terms_used,
    })
}

/// Z(t)·(4πt)^{d/2}, which tends to the volume of a d-dimensional domain as t → 0.
pub fn weyl_volume_estimate(levels: &[EnergyLevel], t: f64, d: u32, u: &UnitSystem) -> Result<f64> {
    check_dimension(d)?;
    Ok(heat_trace(levels, t, u)?.trace * weyl_scale(t, d))
}

/// Weyl estimate for a product domain of total dimension `d`.
pub fn product_weyl_volume_estimate(
    factors: &[&[EnergyLevel]],
    t: f64,
    d: u32,
    u: &UnitSystem,
) -> Result<f64> {
    check_dimension(d)?;
    Ok(product_heat_trace(factors, t, u)?.trace * weyl_scale(t, d))
}

fn weyl_scale(t: f64, d: u32) -> f64 {
    (4.0 * PI * t).powf(0.5 * d as f64)
}

fn check_dimension(d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylRow {
    pub t: f64,
    pub trace: f64,
    pub truncation_bound: f64,
    pub volume_estimate: f64,
}

/// One row per t, in input order.
pub fn weyl_convergence_scan(
    levels: &[EnergyLevel],
    t_values: &[f64],
    d: u32,
    u: &UnitSystem,
) -> Result<Vec<WeylRow>> {
    scan(t_values, d, |t| heat_trace(levels, t, u))
}

pub fn product_weyl_convergence_scan(
    factors: &[&[EnergyLevel]],
    t_values: &[f64],
    d: u32,
    u: &UnitSystem,
) -> Result<Vec<WeylRow>> {
    scan(t_values, d, |t| product_heat_trace(factors, t, u))
}

fn scan<F>(t_values: &[f64], d: u32, trace_at: F) -> Result<Vec<WeylRow>>
where
    F: Fn(f64) -> Result<HeatTraceResult>,
{
    check_dimension(d)?;
    if t_values.is_empty() {
        return Err(Error::invalid("Weyl scan needs at least one t value"));
    }
    t_values
        .iter()
        .map(|&t| {
            let result = trace_at(t)?;
            Ok(WeylRow {
                t,
                trace: result.trace,
                truncation_bound: result.truncation_bound,
                volume_estimate: result.trace * weyl_scale(t, d),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_interval_levels(n_max: u64) -> Vec<EnergyLevel> {
        (1..=n_max)
            .map(|n| EnergyLevel::simple((n as f64 * PI).powi(2)).unwrap())
            .collect()
    }

    /// Σ_{n≥1} exp(−π²n²t) by the Poisson-summed (image) series
    /// ½(θ − 1) with θ = (πt)^{-1/2} Σ_k exp(−k²/t).
    fn interval_trace_by_images(t: f64) -> f64 {
        let images: f64 = (1..50).map(|k| 2.0 * (-((k * k) as f64) / t).exp()).sum();
        0.5 * ((1.0 + images) / (PI * t).sqrt() - 1.0)
    }

    #[test]
    fn single_zero_level() {
        let levels = [EnergyLevel::simple(0.0).unwrap()];
        for t in [1e-6, 0.3, 10.0] {
            let r = heat_trace(&levels, t, &UnitSystem::natural()).unwrap();
            assert_eq!(r.trace, 1.0);
            assert_eq!(r.truncation_bound, 0.0);
        }
    }

    #[test]
    fn single_term_exponential() {
        let levels = [EnergyLevel::simple(PI * PI).unwrap()];
        let r = heat_trace(&levels, 0.1, &UnitSystem::natural()).unwrap();
        assert!((r.trace - (-0.1 * PI * PI).exp()).abs() < 1e-16);
        assert!((r.trace - 0.37267).abs() < 5e-5);
    }

    #[test]
    fn respects_unit_conversion() {
        // E = ħ²c²/(2M) gives λ = −c² regardless of units
        let u = UnitSystem::new(2.0, 1.0, 3.0).unwrap();
        let levels = [EnergyLevel::simple(u.kinetic_prefactor() * 4.0).unwrap()];
        let r = heat_trace(&levels, 0.25, &u).unwrap();
        assert!((r.trace - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn matches_image_sum_oracle() {
        let levels = unit_interval_levels(4000);
        let u = UnitSystem::natural();
        for t in [1e-2, 1e-4, 1e-6] {
            let r = heat_trace(&levels, t, &u).unwrap();
            let oracle = interval_trace_by_images(t);
            assert!(
                (r.trace - oracle).abs() <= 1e-13 * oracle,
                "t={t}: {} vs {oracle}",
                r.trace
            );
            assert!(r.terms_used < levels.len());
            assert!(r.truncation_bound < 1e-13 * r.trace);
        }
    }

    #[test]
    fn interval_weyl_estimates() {
        let levels = unit_interval_levels(4000);
        let u = UnitSystem::natural();
        let rows = weyl_convergence_scan(&levels, &[1e-2, 1e-4, 1e-6], 1, &u).unwrap();
        let expected = [0.8227546149094484, 0.9822754614909448, 0.9982275461490945];
        for (row, want) in rows.iter().zip(expected) {
            assert!((row.volume_estimate - want).abs() < 1e-12);
        }
        let single = weyl_volume_estimate(&levels, 1e-4, 1, &u).unwrap();
        assert_eq!(single, rows[1].volume_estimate);
        assert!(weyl_convergence_scan(&levels, &[], 1, &u).is_err());
    }

    #[test]
    fn cube_by_factorization() {
        let axis = unit_interval_levels(3000);
        let u = UnitSystem::natural();
        let est = product_weyl_volume_estimate(&[&axis, &axis, &axis], 1e-6, 3, &u).unwrap();
        assert!((est - 0.9946920576569162).abs() < 1e-12);
    }

    #[test]
    fn factorization_matches_enumeration() {
        let axis = unit_interval_levels(40);
        let u = UnitSystem::natural();
        let mut full = Vec::new();
        for a in 1..=40u32 {
            for b in 1..=40u32 {
                for c in 1..=40u32 {
                    let s = (a * a + b * b + c * c) as f64;
                    full.push(EnergyLevel::simple(PI * PI * s).unwrap());
                }
            }
        }
        for t in [0.01, 0.05, 0.3] {
            let enumerated = heat_trace(&full, t, &u).unwrap().trace;
            let product = product_heat_trace(&[&axis, &axis, &axis], t, &u)
                .unwrap()
                .trace;
            let power = heat_trace(&axis, t, &u).unwrap().trace.powi(3);
            assert!((enumerated - product).abs() <= 1e-10 * product);
            assert!((power - product).abs() <= 1e-14 * product);
        }
    }

    #[test]
    fn decreasing_in_t_for_positive_spectra() {
        let levels = unit_interval_levels(500);
        let u = UnitSystem::natural();
        let ts = [1e-4, 3e-4, 1e-3, 0.01, 0.1, 0.5, 2.0];
        let traces: Vec<f64> = ts
            .iter()
            .map(|&t| heat_trace(&levels, t, &u).unwrap().trace)
            .collect();
        assert!(traces.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_input() {
        let u = UnitSystem::natural();
        let levels = [EnergyLevel::simple(1.0).unwrap()];
        assert!(matches!(
            heat_trace(&[], 1.0, &u),
            Err(Error::EmptySpectrum)
        ));
        assert!(matches!(
            heat_trace(&levels, 0.0, &u),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            heat_trace(&levels, -1.0, &u),
            Err(Error::InvalidArgument(_))
        ));
        let negative = [EnergyLevel::simple(-1.0).unwrap()];
        assert!(heat_trace(&negative, 1.0, &u).is_err());
        assert!(weyl_volume_estimate(&levels, 1.0, 0, &u).is_err());
        assert!(EnergyLevel::new(1.0, 0).is_err());
        assert!(EnergyLevel::new(f64::NAN, 1).is_err());
    }

    #[test]
    fn weyl_scaling_law() {
        // λ → λ/s², t → t·s² multiplies the estimate by s^d
        let u = UnitSystem::natural();
        let s: f64 = 1.7;
        let axis = unit_interval_levels(2000);
        let scaled: Vec<EnergyLevel> = axis
            .iter()
            .map(|l| EnergyLevel::simple(l.energy / (s * s)).unwrap())
            .collect();
        for d in [1u32, 2, 3] {
            let factors: Vec<&[EnergyLevel]> = vec![&axis[..]; d as usize];
            let scaled_factors: Vec<&[EnergyLevel]> = vec![&scaled[..]; d as usize];
            let base = product_weyl_volume_estimate(&factors, 1e-3, d, &u).unwrap();
            let big = product_weyl_volume_estimate(&scaled_factors, 1e-3 * s * s, d, &u).unwrap();
            assert!((big - base * s.powi(d as i32)).abs() < 1e-12 * big);
        }
    }

    proptest! {
        #[test]
        fn permutation_invariant(seed in any::<u64>()) {
            let mut levels: Vec<EnergyLevel> = (1..=300u64)
                .map(|n| EnergyLevel::new((n as f64).powf(1.7), 1 + n % 4).unwrap())
                .collect();
            let u = UnitSystem::natural();
            let reference = heat_trace(&levels, 0.01, &u).unwrap().trace;
            // Fisher–Yates with a simple LCG driven by the seed
            let mut state = seed;
            for i in (1..levels.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                levels.swap(i, j);
            }
            let permuted = heat_trace(&levels, 0.01, &u).unwrap().trace;
            prop_assert!((permuted - reference).abs() <= 1e-13 * reference);
        }
    }
}
