use std::sync::OnceLock;

use fraczeta_core::partition::{fit_expansion, partition_value, trace_grid, Window};
use fraczeta_core::spectrum::{interval_spectrum, toy_geometric_spectrum, SpectrumBatch};
use fraczeta_core::zeta::{zeta_direct, Continuation, ContinuationOptions, Mode};
use fraczeta_core::FractalModel;
use num_complex::Complex64;
use proptest::prelude::*;

struct Fixture {
    interval: SpectrumBatch,
    toy: SpectrumBatch,
    interval_cont: Continuation,
    toy_cont: Continuation,
}

fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let interval = interval_spectrum(2000).unwrap();
        let toy = toy_geometric_spectrum(&FractalModel::toy(3, 5.0).unwrap(), 20).unwrap();
        let interval_cont = Continuation::new(
            &interval,
            ContinuationOptions {
                mode: Mode::Expbounds,
                ..Default::default()
            },
        )
        .unwrap();
        let toy_cont = Continuation::new(&toy, ContinuationOptions::default()).unwrap();
        Fixture {
            interval,
            toy,
            interval_cont,
            toy_cont,
        }
    })
}

fn toy_closed_form(s: Complex64) -> Complex64 {
    1.0 / (1.0 - 3.0 * Complex64::new(5.0, 0.0).powc(-s / 2.0))
}

/// Distance from `s` to the nearest toy pole `d_S + 4πin/ln 5`.
fn toy_pole_distance(s: Complex64) -> f64 {
    let model = FractalModel::toy(3, 5.0).unwrap();
    let spacing = model.lattice_spacing();
    let n = (s.im / spacing).round();
    (s - Complex64::new(model.d_s, n * spacing)).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn direct_zeta_is_conjugate_symmetric(re in 1.0f64..6.0, im in -20.0f64..20.0, gamma in -5.0f64..50.0) {
        let f = fixture();
        let s = Complex64::new(re, im);
        let a = zeta_direct(&f.interval, s, gamma).unwrap();
        let b = zeta_direct(&f.interval, s.conj(), gamma).unwrap();
        prop_assert!((a.value.conj() - b.value).norm() <= 1e-14 * a.value.norm().max(1.0));
    }

    #[test]
    fn continued_zeta_is_conjugate_symmetric(re in -3.0f64..3.0, im in -12.0f64..12.0) {
        let f = fixture();
        let s = Complex64::new(re, im);
        prop_assume!((s - 1.0).norm() > 0.05);
        let a = f.interval_cont.evaluate(s, 0.0).unwrap();
        let b = f.interval_cont.evaluate(s.conj(), 0.0).unwrap();
        prop_assert!((a.value.conj() - b.value).norm() <= a.error_bound + b.error_bound);
    }

    #[test]
    fn real_argument_gives_real_value(re in -3.0f64..5.0, gamma in -5.0f64..20.0) {
        let f = fixture();
        prop_assume!((re - 1.0).abs() > 0.05);
        let p = f.interval_cont.evaluate(Complex64::new(re, 0.0), gamma).unwrap();
        prop_assert_eq!(p.value.im, 0.0);
    }

    #[test]
    fn zeta_decreases_in_gamma(re in 1.2f64..6.0, gamma in -9.0f64..40.0, step in 0.01f64..5.0) {
        let f = fixture();
        let s = Complex64::new(re, 0.0);
        let lo = zeta_direct(&f.interval, s, gamma).unwrap();
        let hi = zeta_direct(&f.interval, s, gamma + step).unwrap();
        prop_assert!(hi.value.re < lo.value.re);
    }

    #[test]
    fn toy_direct_matches_closed_form(re in 1.9f64..6.0, im in -30.0f64..30.0) {
        let f = fixture();
        let s = Complex64::new(re, im);
        let p = zeta_direct(&f.toy, s, 0.0).unwrap();
        prop_assume!(p.error_bound < 1e-12);
        prop_assert!((p.value - toy_closed_form(s)).norm() < 1e-10);
    }

    #[test]
    fn toy_continuation_matches_closed_form(re in 0.0f64..4.0, im in -15.0f64..15.0) {
        let f = fixture();
        let s = Complex64::new(re, im);
        prop_assume!(toy_pole_distance(s) > 0.1);
        let p = f.toy_cont.evaluate(s, 0.0).unwrap();
        prop_assert!((p.value - toy_closed_form(s)).norm() <= p.error_bound + 1e-12);
    }

    #[test]
    fn toy_trace_scaling_identity(t in 1e-6f64..10.0) {
        let f = fixture();
        let z = partition_value(&f.toy, t).unwrap().value;
        let z_scaled = partition_value(&f.toy, t / 5.0).unwrap().value;
        let top = 3f64.powi(20) * (-5f64.powi(20) * t).exp();
        let expected = (-t / 5.0).exp() + 3.0 * (z - top);
        prop_assert!((z_scaled - expected).abs() <= 1e-13 * expected.abs());
    }

    #[test]
    fn trace_decreases_in_t(lo in -4.0f64..-1.0, width in 0.5f64..3.0, points in 2usize..200) {
        let f = fixture();
        let t_lo = 10f64.powf(lo);
        let samples = trace_grid(&f.interval, t_lo, t_lo * 10f64.powf(width), points).unwrap();
        prop_assert!(samples.windows(2).all(|w| w[0].t < w[1].t && w[0].value > w[1].value));
    }
}

#[test]
fn fitted_coefficients_are_conjugate_pairs() {
    let f = fixture();
    for (batch, j) in [(&f.interval, 5), (&f.toy, 6)] {
        let model = &batch.model;
        for profile in fit_expansion(batch, model, 8, Window::period(model, j)).unwrap() {
            for n in 1..=8 {
                assert_eq!(profile.coefficient(-n), profile.coefficient(n).conj());
            }
            assert_eq!(profile.coefficient(0).im, 0.0);
        }
    }
}

#[test]
fn spectrum_generators_are_deterministic() {
    let model = FractalModel::toy(3, 5.0).unwrap();
    assert_eq!(
        toy_geometric_spectrum(&model, 30).unwrap(),
        toy_geometric_spectrum(&model, 30).unwrap()
    );
    assert_eq!(interval_spectrum(500).unwrap(), interval_spectrum(500).unwrap());
}
