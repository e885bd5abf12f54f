//! Cross-module checks through the public API.

use std::f64::consts::PI;

use quasistatic::heattrace::{heat_trace, product_heat_trace};
use quasistatic::spectra::{self, solve_radial_numeric, Potential};
use quasistatic::thermo::{qm_partition, quasistatic_partition, thermal_partition};
use quasistatic::{EnergyLevel, UnitSystem};

#[test]
fn numeric_modes_are_normalized_and_pinned() {
    let u = UnitSystem::natural();
    let spectrum = solve_radial_numeric(1.0, 400, 4, &u, None).unwrap();
    let h = spectrum.grid_spacing();
    for mode in &spectrum.modes {
        assert_eq!(mode.len(), 400);
        assert_eq!(mode[0], 0.0);
        assert_eq!(mode[399], 0.0);
        let norm: f64 = mode.iter().map(|v| v * v * h).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
    for (a, b) in spectrum.modes.iter().zip(spectrum.modes.iter().skip(1)) {
        let overlap: f64 = a.iter().zip(b).map(|(x, y)| x * y * h).sum();
        assert!(overlap.abs() < 1e-10);
    }
}

#[test]
fn constant_potential_shifts_the_spectrum() {
    let u = UnitSystem::natural();
    let free = solve_radial_numeric(1.0, 300, 3, &u, None).unwrap();
    let shifted = solve_radial_numeric(1.0, 300, 3, &u, Some(&Potential::constant(7.5))).unwrap();
    for (a, b) in free.energies.iter().zip(&shifted.energies) {
        assert!((b - a - 7.5).abs() < 1e-8);
    }
}

#[test]
fn sampled_and_closed_potentials_agree() {
    let u = UnitSystem::natural();
    let grid_points = 200;
    let h = 1.0 / (grid_points - 1) as f64;
    let samples: Vec<f64> = (0..grid_points)
        .map(|i| 20.0 * (i as f64 * h).powi(2))
        .collect();
    let a = solve_radial_numeric(
        1.0,
        grid_points,
        3,
        &u,
        Some(&Potential::from_fn(|r| 20.0 * r * r)),
    )
    .unwrap();
    let b =
        solve_radial_numeric(1.0, grid_points, 3, &u, Some(&Potential::Sampled(samples))).unwrap();
    for (x, y) in a.energies.iter().zip(&b.energies) {
        assert!((x - y).abs() < 1e-9 * x.abs());
    }
}

#[test]
fn ball_trace_factorizes_into_radial_and_sphere() {
    let u = UnitSystem::natural();
    let t = 0.05;
    let radial = spectra::interval_levels_for_trace(1.0, t, &u).unwrap();
    let sphere = spectra::sphere_levels_for_trace(t, &u).unwrap();
    let product = product_heat_trace(&[&radial, &sphere], t, &u).unwrap();
    let n_max = radial.len() as u32;
    let l_max = sphere.len() as u32 - 1;
    let ball = spectra::ball_levels(1.0, n_max, l_max, &u).unwrap();
    let direct = heat_trace(&ball, t, &u).unwrap();
    assert!((product.trace - direct.trace).abs() < 1e-12 * direct.trace);
}

#[test]
fn partition_functions_at_large_tau_are_ground_dominated() {
    let u = UnitSystem::natural();
    let levels = spectra::box_levels(1.0, 3, 6, &u).unwrap();
    let tau = 0.5;
    let z = qm_partition(&levels, tau, &u).unwrap();
    let z0 = quasistatic_partition(&levels, tau, &u).unwrap();
    let e0 = 3.0 * PI * PI;
    assert!((z0 - (-e0 * tau).exp()).abs() < 1e-15 * z0);
    // first excited correction relative to the ground term: 3·exp(−3π²τ)
    let correction = 3.0 * (-3.0 * PI * PI * tau).exp();
    assert!((z / z0 - 1.0 - correction).abs() < 1e-5 * correction);
    assert_eq!(z, thermal_partition(&levels, 1.0 / tau, &u).unwrap());
}

#[test]
fn heat_trace_of_a_single_level() {
    let u = UnitSystem::natural();
    let levels = [EnergyLevel::new(2.0, 5).unwrap()];
    let z = heat_trace(&levels, 0.5, &u).unwrap();
    assert_eq!(z.trace, 5.0 * (-1.0f64).exp());
    assert_eq!(z.terms_used, 1);
}
