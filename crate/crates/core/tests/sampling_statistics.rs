use needlets_core::diagnostics::{kl_covariance_check, kl_variance};
use needlets_core::legendre::synthesize;
use needlets_core::sampling::{kl_sample, needlet_coefficients, needlet_harmonic_coefficients, needlet_sample};
use needlets_core::sphere::point_from_angles;
use needlets_core::{CutoffFunction, EvalGrid, NeedletFrame, PowerSpectrum, QuadratureChoice, UnitVector};
use proptest::prelude::*;

const SEEDS: usize = 10_000;

fn tangent(s: &UnitVector, v: (f64, f64, f64)) -> UnitVector {
    let d = v.0 * s.x() + v.1 * s.y() + v.2 * s.z();
    UnitVector::normalized(v.0 - d * s.x(), v.1 - d * s.y(), v.2 - d * s.z()).unwrap()
}

fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn kl_point_variance_matches_closed_form() {
    let spectrum = PowerSpectrum::power_law(0.5, 15).unwrap();
    let s = point_from_angles(1.0, 2.0).unwrap();
    let rows = kl_covariance_check(&spectrum, 15, SEEDS, &[(s, s)], 8).unwrap();
    assert!((rows[0].expected - kl_variance(&spectrum, 15).unwrap()).abs() < 1e-14);
    assert!(rows[0].z.abs() <= 3.0, "{:?}", rows[0]);
}

#[test]
fn covariance_depends_only_on_distance() {
    let spectrum = PowerSpectrum::power_law(1.0, 15).unwrap();
    let distance = 0.4;
    let pairs: Vec<(UnitVector, UnitVector)> = [
        ((0.2, 0.0), (1.0, 0.0, 0.0)),
        ((1.57, 1.0), (0.0, 0.0, 1.0)),
        ((2.5, 4.0), (0.3, -1.0, 0.2)),
        ((1.0, 5.5), (-1.0, 0.5, 0.7)),
    ]
    .iter()
    .map(|((theta, phi), v)| {
        let s = point_from_angles(*theta, *phi).unwrap();
        (s, s.towards(&tangent(&s, *v), distance))
    })
    .collect();
    let rows = kl_covariance_check(&spectrum, 15, SEEDS, &pairs, 77).unwrap();
    for r in &rows {
        assert!((r.expected - rows[0].expected).abs() < 1e-12);
        assert!(r.z.abs() <= 3.0, "{r:?}");
    }
    for a in &rows {
        for b in &rows {
            let z = (a.empirical - b.empirical) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt().max(1e-300);
            assert!(z.abs() <= 3.0 * 2f64.sqrt() || a == b, "{z}");
        }
    }
}

/// KL at `L = 2^{J-1} - 1` and the needlet field with degrees above `L`
/// removed both realise `ρ` on that band.
#[test]
fn kl_and_band_filtered_needlet_variances_agree() {
    let top = 4;
    let lmax = (1usize << (top - 1)) - 1;
    let spectrum = PowerSpectrum::power_law(1.0, (1 << top) - 1).unwrap();
    let frame = NeedletFrame::build(top, &spectrum, QuadratureChoice::GaussProduct, CutoffFunction::Meyer).unwrap();
    let point = point_from_angles(0.9, 1.3).unwrap();
    let grid = EvalGrid::from_points(vec![point]);
    let keep = (lmax + 1) * (lmax + 1);
    let mut kl = Vec::with_capacity(SEEDS);
    let mut filtered = Vec::with_capacity(SEEDS);
    for i in 0..SEEDS as u64 {
        kl.push(kl_sample(1_000 + i, &spectrum, lmax, &grid).unwrap().values[0].powi(2));
        let y = needlet_coefficients(500_000 + i, &frame).values;
        let a = needlet_harmonic_coefficients(&frame, &y).unwrap();
        filtered.push(synthesize(&a[..keep], lmax, &grid).unwrap()[0].powi(2));
    }
    let (m1, e1) = mean_and_error(&kl);
    let (m2, e2) = mean_and_error(&filtered);
    let z = (m1 - m2) / (e1 * e1 + e2 * e2).sqrt();
    assert!(z.abs() <= 3.0, "KL {m1} ± {e1}, needlet {m2} ± {e2}");
    let expected = kl_variance(&spectrum, lmax).unwrap();
    assert!(((m2 - expected) / e2).abs() <= 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn realisations_are_bit_identical(seed in any::<u64>()) {
        let spectrum = PowerSpectrum::power_law(1.5, 15).unwrap();
        let frame = NeedletFrame::build(4, &spectrum, QuadratureChoice::GaussProduct, CutoffFunction::Meyer).unwrap();
        let grid = EvalGrid::equirectangular(8, 16).unwrap();
        let a = needlet_sample(seed, &frame, &grid).unwrap();
        let b = needlet_sample(seed, &frame, &grid).unwrap();
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = kl_sample(seed, &spectrum, 15, &grid).unwrap();
        let d = kl_sample(seed, &spectrum, 15, &grid).unwrap();
        prop_assert_eq!(c, d);
    }
}
