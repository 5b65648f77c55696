use ginibre_core::analysis::real_histogram;
use ginibre_core::*;
use proptest::prelude::*;

fn upper() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, 1e-3..3.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

fn distinct_parts() -> impl Strategy<Value = (Vec<f64>, Vec<Complex64>)> {
    (prop::collection::vec(-3.0..3.0f64, 0..12), prop::collection::vec(upper(), 0..12)).prop_filter(
        "distinct points",
        |(r, u): &(Vec<f64>, Vec<Complex64>)| {
            let mut rs = r.clone();
            rs.sort_by(f64::total_cmp);
            rs.windows(2).all(|w| w[0] != w[1]) && u.iter().enumerate().all(|(i, a)| u[..i].iter().all(|b| a != b))
        },
    )
}

proptest! {
    #[test]
    fn measure_counts_match_configuration((reals, uppers) in distinct_parts()) {
        prop_assume!(!reals.is_empty() || !uppers.is_empty());
        let c = make_configuration(reals.clone(), uppers.clone()).unwrap();
        prop_assert_eq!(c.n(), reals.len() + 2 * uppers.len());
        let m = to_measure(&c);
        prop_assert_eq!(m.on_axis_count(), c.k());
        prop_assert_eq!(m.len() - m.on_axis_count(), 2 * c.l());
        prop_assert!((m.on_axis_mass() - c.k() as f64 / c.n() as f64).abs() < 1e-12);
        prop_assert!((m.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_exact(
        reals in prop::collection::vec(prop::num::f64::NORMAL, 0..6),
        ys in prop::collection::vec((prop::num::f64::NORMAL, prop::num::f64::POSITIVE), 0..6),
    ) {
        let uppers: Vec<Complex64> = ys.iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        let Ok(c) = make_configuration(reals, uppers) else { return Ok(()); };
        let back = SpectralConfiguration::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.reals().iter().map(|x| x.to_bits()).collect::<Vec<_>>(), c.reals().iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(back, c);
    }

    #[test]
    fn histogram_mass_is_on_axis_fraction((reals, uppers) in distinct_parts(), bins in 1usize..40) {
        prop_assume!(!reals.is_empty());
        let c = make_configuration(reals, uppers).unwrap();
        let h = real_histogram(std::slice::from_ref(&c), bins, None).unwrap();
        prop_assert!((h.integral() - c.k() as f64 / c.n() as f64).abs() < 1e-9);
    }

    #[test]
    fn parity_rounding_is_feasible(alpha in 0.0..=1.0f64, n in 1usize..500) {
        let k = round_to_parity(alpha, n).unwrap();
        prop_assert!(k <= n && (n - k).is_multiple_of(2));
        prop_assert!((k as f64 - alpha * n as f64).abs() <= 1.0 + 1e-9);
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let c = make_configuration(vec![0.1, -1.0 / 3.0, 1e-300], vec![Complex64::new(std::f64::consts::PI, 5e-324)]).unwrap();
    c.write_json(&path).unwrap();
    assert_eq!(SpectralConfiguration::read_json(&path).unwrap(), c);
}

#[test]
fn semicircle_quantiles_have_second_moment_one_half() {
    use ginibre_core::analysis::semicircle_cdf;
    let atoms = 10_000;
    let reals: Vec<f64> = (0..atoms)
        .map(|i| {
            let p = (i as f64 + 0.5) / atoms as f64;
            let (mut lo, mut hi) = (-2f64.sqrt(), 2f64.sqrt());
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if semicircle_cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    let m = to_measure(&make_configuration(reals, vec![]).unwrap());
    assert!((second_moment(&m).unwrap() - 0.5).abs() < 0.01);
}
