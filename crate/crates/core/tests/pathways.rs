use std::f64::consts::PI;

use h2asym::pathways::{
    assemble, asymmetry, asymmetry_of_state, concurrence, dissociation_probability, BandParity,
    PathwaySpec, XuvSpectrum,
};
use h2asym::units::oscillation_period;
use proptest::prelude::*;

fn xuv(steps: [f64; 6]) -> XuvSpectrum {
    XuvSpectrum::from_chirp(1.2, 15, &steps).unwrap()
}

fn spec(parity: BandParity, order: u32, m: [f64; 3], theta: (f64, f64), x: &XuvSpectrum) -> PathwaySpec {
    PathwaySpec::new(parity, order, 0.6, m, theta, [1, 1, 1], x).unwrap()
}

fn parity() -> impl Strategy<Value = BandParity> {
    prop_oneof![Just(BandParity::Odd), Just(BandParity::Even)]
}

fn mags() -> impl Strategy<Value = [f64; 3]> {
    [0.01..2.0f64, 0.01..2.0f64, 0.01..2.0f64]
}

proptest! {
    #[test]
    fn asymmetry_is_bounded_and_periodic(
        p in parity(), m in mags(), gs in -50.0..50.0f64, bs in -50.0..50.0f64,
        steps in [-PI..PI, -PI..PI, -PI..PI, -PI..PI, -PI..PI, -PI..PI],
        order in prop::sample::select(vec![19u32, 21, 23, 25]), tau in -5.0..5.0f64,
    ) {
        let x = xuv(steps);
        let s = spec(p, order, m, (gs, bs), &x);
        let a = asymmetry(&s, tau).unwrap();
        prop_assert!((-1.0..=1.0).contains(&a));
        let later = asymmetry(&s, tau + oscillation_period(1.2)).unwrap();
        prop_assert!((a - later).abs() < 1e-9);
        let c = concurrence(&assemble(&s, tau)).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        prop_assert!(a.abs() <= c + 1e-12);
    }

    #[test]
    fn asymmetry_ignores_overall_scale_and_phase(
        p in parity(), m in mags(), gs in -50.0..50.0f64, bs in -50.0..50.0f64,
        k in 0.01..100.0f64, common in -10.0..10.0f64, tau in -5.0..5.0f64,
    ) {
        let x = xuv([0.0; 6]);
        let a = asymmetry(&spec(p, 21, m, (gs, bs), &x), tau).unwrap();
        let scaled = spec(p, 21, m.map(|v| v * k), (gs + common, bs + common), &x);
        prop_assert!((asymmetry(&scaled, tau).unwrap() - a).abs() < 1e-10);
        let p0 = dissociation_probability(&spec(p, 21, m, (gs, bs), &x), tau);
        prop_assert!((dissociation_probability(&scaled, tau) - k * k * p0).abs() < 1e-9 * k * k * p0.max(1.0));
    }

    #[test]
    fn matched_bands_are_in_antiphase(gs in -50.0..50.0f64, bs in -50.0..50.0f64, tau in -5.0..5.0f64) {
        let x = xuv([0.0; 6]);
        let odd = asymmetry(&spec(BandParity::Odd, 21, [1.0; 3], (gs, bs), &x), tau).unwrap();
        let even = asymmetry(&spec(BandParity::Even, 21, [1.0; 3], (gs, bs), &x), tau).unwrap();
        prop_assert!((odd + even).abs() < 1e-12);
    }

    #[test]
    fn chirp_moves_the_delay_origin(
        m in mags(), gs in -50.0..50.0f64, bs in -50.0..50.0f64, dphi in -PI..PI, tau in -5.0..5.0f64,
    ) {
        // Δφ_{21,19} = dphi is equivalent to shifting τ by Δφ/(2ω) for the odd band
        let flat = xuv([0.0; 6]);
        let chirped = xuv([0.0, 0.0, dphi, 0.0, 0.0, 0.0]);
        let omega = 1.2 / 0.658_211_956_9;
        let a = asymmetry(&spec(BandParity::Odd, 21, m, (gs, bs), &chirped), tau).unwrap();
        let b = asymmetry(&spec(BandParity::Odd, 21, m, (gs, bs), &flat), tau - dphi / (2.0 * omega)).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn state_asymmetry_matches_definition() {
    let x = xuv([0.0; 6]);
    let s = spec(BandParity::Odd, 21, [1.0, 0.5, 0.25], (3.0, 1.0), &x);
    for k in 0..10 {
        let st = assemble(&s, 0.1 * k as f64);
        let direct = -2.0 * (st.c_gs * st.c_bs.conj()).re / st.norm_sqr();
        assert!((asymmetry_of_state(&st).unwrap() - direct).abs() < 1e-15);
    }
}
