use ginibre_core::gasdyn::RelaxParams;
use ginibre_core::measure::Atom;
use ginibre_core::ratefn::*;
use ginibre_core::rng::{stream, Domain};
use ginibre_core::*;
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

/// Deterministic `m`-atom discretization of the uniform law on the unit
/// disk: equal-area rings, conjugate-closed, none on the axis.
fn disk(m: usize) -> EmpiricalMeasure {
    let rings = ((m as f64 / PI).sqrt().round() as usize).max(1);
    let mut upper = Vec::new();
    let mut placed = 0;
    for r in 0..rings {
        let (a, b) = (r as f64 / rings as f64, (r + 1) as f64 / rings as f64);
        let radius = ((a * a + b * b) / 2.0).sqrt();
        let share = ((b * b - a * a) * (m / 2) as f64).round() as usize;
        let count = if r + 1 == rings { m / 2 - placed } else { share.min(m / 2 - placed) };
        for j in 0..count {
            let theta = PI * (j as f64 + 0.5) / count as f64;
            upper.push((Complex64::from_polar(radius, theta), 1.0));
        }
        placed += count;
    }
    EmpiricalMeasure::from_halves(&[], &upper).unwrap()
}

fn random_measure(seed: u64, reals: usize, uppers: usize) -> EmpiricalMeasure {
    let mut rng = stream(seed, Domain::Misc, 77);
    let on: Vec<(f64, f64)> = (0..reals).map(|_| (rng.random_range(-1.5..1.5), rng.random_range(0.5..2.0))).collect();
    let up: Vec<(Complex64, f64)> = (0..uppers)
        .map(|_| (Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(0.01..1.5)), rng.random_range(0.5..2.0)))
        .collect();
    EmpiricalMeasure::from_halves(&on, &up).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reflections_and_relabelling_leave_rate_unchanged(seed in any::<u64>(), reals in 0usize..30, uppers in 1usize..30, shift in 1usize..50) {
        let m = random_measure(seed, reals, uppers);
        let base = rate_function(&m).unwrap().rate_value;
        for other in [m.conjugated(), m.mirrored()] {
            let v = rate_function(&other).unwrap().rate_value;
            prop_assert!((v - base).abs() <= 1e-12 * base.abs().max(1.0));
        }
        let mut atoms: Vec<Atom> = m.atoms().to_vec();
        let len = atoms.len();
        atoms.rotate_left(shift % len);
        atoms.reverse();
        let v = rate_function(&EmpiricalMeasure::from_atoms(atoms).unwrap()).unwrap().rate_value;
        prop_assert!((v - base).abs() <= 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn on_axis_mass_is_reported(seed in any::<u64>(), reals in 1usize..20, uppers in 1usize..20) {
        let m = random_measure(seed, reals, uppers);
        let r = rate_function(&m).unwrap();
        prop_assert!((r.alpha - m.on_axis_mass() / m.total_mass()).abs() < 1e-12);
        prop_assert!(r.rate_value.is_finite());
    }
}

#[test]
fn convexity_probe() {
    let mu = disk(600);
    let on: Vec<(f64, f64)> = (0..600).map(|i| (-1.4 + 2.8 * (i as f64 + 0.5) / 600.0, 1.0)).collect();
    let nu = EmpiricalMeasure::from_halves(&on, &[]).unwrap();
    let others = [nu, random_measure(3, 200, 200)];
    for other in &others {
        let (a, b) = (rate_function(&mu).unwrap().rate_value, rate_function(other).unwrap().rate_value);
        for t in [0.25, 0.5, 0.75] {
            let mix = rate_function(&mu.mix(other, t).unwrap()).unwrap().rate_value;
            assert!(mix <= t * a + (1.0 - t) * b + 0.005, "t={t}: {mix} vs {a}, {b}");
        }
    }
}

#[test]
fn disk_discretization_error_decreases() {
    let sizes = [500, 1000, 2000, 4000];
    let values: Vec<f64> = sizes.iter().map(|&m| rate_function(&disk(m)).unwrap().rate_value).collect();
    for w in values.windows(2) {
        assert!(w[1].abs() < w[0].abs(), "{values:?}");
    }
    // fitted C in |I| <= C log m / m
    let c = sizes.iter().zip(&values).map(|(&m, v)| v.abs() * m as f64 / (m as f64).ln()).fold(0.0, f64::max);
    for (&m, v) in sizes.iter().zip(&values) {
        assert!(v.abs() <= c * (m as f64).ln() / m as f64 + 1e-15);
    }
    assert!(values[3].abs() < 0.01);
}

#[test]
fn minimum_estimate_has_prescribed_axis_mass() {
    for alpha in [0.0, 0.3, 1.0] {
        let n = 60;
        let est = minimum_estimate(alpha, n, RelaxParams { tolerance: 1e-6, ..Default::default() }, 5).unwrap();
        let k = round_to_parity(alpha, n).unwrap();
        assert!((est.report.alpha - alpha).abs() <= 1.0 / n as f64 + 1e-12);
        assert_eq!(est.config.k(), k);
        assert!(est.report.stderr >= 0.0);
    }
}

#[test]
fn entropies_are_finite() {
    let mut rng = stream(1, Domain::Misc, 5);
    let xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>() * 2.0).collect();
    assert!((entropy_1d(&xs, 20).unwrap() + 2f64.ln()).abs() < 0.05);
    let zs: Vec<Complex64> = (0..5000).map(|_| Complex64::new(rng.random(), rng.random::<f64>() + 0.1)).collect();
    assert!(entropy_2d(&zs, 0.1).unwrap().is_finite());
}
