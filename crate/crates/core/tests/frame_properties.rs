use needlets_core::diagnostics::{parseval_sums, partition_check, peak_scaling};
use needlets_core::legendre::harmonic_index;
use needlets_core::needlet::band;
use needlets_core::{CutoffFunction, NeedletFrame, PowerSpectrum, QuadratureChoice};
use proptest::prelude::*;

fn frame(top: u32, beta: f64) -> NeedletFrame {
    let spectrum = PowerSpectrum::power_law(beta, (1 << top) - 1).unwrap();
    NeedletFrame::build(top, &spectrum, QuadratureChoice::GaussProduct, CutoffFunction::Meyer).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_holds_below_the_boundary(top in 0u32..=12) {
        let report = partition_check(CutoffFunction::Meyer, top);
        prop_assert!(report.max_deviation <= 1e-10);
        for (ell, deficit) in &report.beyond {
            let mass = CutoffFunction::Meyer.window_mass(top, *ell);
            prop_assert!((deficit - (1.0 - mass)).abs() <= 1e-15);
        }
    }

    #[test]
    fn nonadjacent_levels_are_orthogonal(
        top in 3u32..=5,
        beta in 0.2f64..3.0,
        a in any::<prop::sample::Index>(),
        b in any::<prop::sample::Index>(),
        ka in any::<prop::sample::Index>(),
        kb in any::<prop::sample::Index>(),
    ) {
        let f = frame(top, beta);
        let ja = a.index(top as usize + 1) as u32;
        let far: Vec<u32> = (0..=top).filter(|j| j.abs_diff(ja) >= 2).collect();
        prop_assume!(!far.is_empty());
        let jb = far[b.index(far.len())];
        let ka = ka.index(f.level(ja).unwrap().quadrature.len());
        let kb = kb.index(f.level(jb).unwrap().quadrature.len());
        prop_assert_eq!(f.inner_product((ja, ka), (jb, kb)).unwrap(), 0.0);
    }

    #[test]
    fn moments_vanish_below_the_band(
        beta in 0.2f64..3.0,
        j in 2u32..=5,
        k in any::<prop::sample::Index>(),
        ell in any::<prop::sample::Index>(),
        m in any::<prop::sample::Index>(),
    ) {
        let f = frame(5, beta);
        let lo = band(j).0;
        let ell = ell.index(lo);
        let m = m.index(2 * ell + 1) as isize - ell as isize;
        let k = k.index(f.level(j).unwrap().quadrature.len());
        prop_assert_eq!(f.harmonic_coefficient(j, k, ell, m).unwrap(), 0.0);
    }

    #[test]
    fn standard_frame_is_parseval_below_the_boundary(top in 3u32..=5, ell in any::<prop::sample::Index>(), m in any::<prop::sample::Index>()) {
        let f = NeedletFrame::standard(top, QuadratureChoice::GaussProduct).unwrap();
        let boundary = (1usize << (top - 1)) - 1;
        let ell = ell.index(boundary + 1);
        let m = m.index(2 * ell + 1) as isize - ell as isize;
        let sums = parseval_sums(&f, boundary).unwrap();
        prop_assert!((sums[harmonic_index(ell, m)] - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn peak_slope_decreases_with_beta() {
    let slopes: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|beta| peak_scaling(&frame(7, *beta), 3..=7).unwrap().slope)
        .collect();
    assert!(slopes[0] > slopes[1] && slopes[1] > slopes[2], "{slopes:?}");
}

#[test]
fn closed_form_checks_hold_on_equal_area_nodes() {
    let spectrum = PowerSpectrum::power_law(1.0, 31).unwrap();
    let f = NeedletFrame::build(5, &spectrum, QuadratureChoice::EqualArea, CutoffFunction::Meyer).unwrap();
    let report = needlets_core::diagnostics::orthogonality_check(&f, 300, 20, 3).unwrap();
    assert_eq!(report.max_nonadjacent, 0.0);
    assert_eq!(report.max_moment, 0.0);
    let standard = NeedletFrame::standard(5, QuadratureChoice::EqualArea).unwrap();
    let parseval = needlets_core::diagnostics::parseval_check(&standard, 15).unwrap();
    assert!(parseval.worst_deviation <= 1e-8, "{}", parseval.worst_deviation);
}
