//! Property tests for the geometric and algebraic invariants the library
//! is built on. Each property is exact or has a margin wide enough that
//! any generated case must pass; failures indicate real defects.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use outerlab_core::modulus::CircleModulus;
use outerlab_core::oscillation::{
    ball_drop_exponent, balance_exponents, disc_drop_exponent, fit_loglog, mean_oscillation,
    sharpness_weight_exponent,
};
use outerlab_core::sampler::Sampler;
use outerlab_core::sphere::{
    apply_frame, niso_distance, orthonormal_frame, sample_sphere, SpherePoint,
};

fn sphere_point(n: usize, raw: &[(f64, f64)]) -> Option<SpherePoint> {
    let coords: Vec<C64> = raw.iter().take(n).map(|&(a, b)| C64::new(a, b)).collect();
    SpherePoint::new(coords).ok()
}

fn coord() -> impl Strategy<Value = (f64, f64)> {
    ((-3.0..3.0f64), (-3.0..3.0f64))
}

fn triple(n: usize) -> impl Strategy<Value = Vec<Vec<(f64, f64)>>> {
    proptest::collection::vec(proptest::collection::vec(coord(), n), 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_symmetric_and_bounded(raw in triple(3)) {
        let pts: Vec<_> = raw.iter().filter_map(|c| sphere_point(3, c)).collect();
        for u in &pts {
            for v in &pts {
                let duv = niso_distance(u, v);
                let dvu = niso_distance(v, u);
                prop_assert!((duv - dvu).abs() <= 1e-15);
                prop_assert!((0.0..=2.0 + 1e-12).contains(&duv));
            }
        }
        for u in &pts {
            prop_assert!(niso_distance(u, u) <= 1e-12);
        }
    }

    #[test]
    fn quasi_triangle_constant_four(raw in triple(2)) {
        let pts: Vec<_> = raw.iter().filter_map(|c| sphere_point(2, c)).collect();
        if pts.len() == 3 {
            let duw = niso_distance(&pts[0], &pts[2]);
            let duv = niso_distance(&pts[0], &pts[1]);
            let dvw = niso_distance(&pts[1], &pts[2]);
            prop_assert!(duw <= 4.0 * (duv + dvw) + 1e-12);
            // sqrt d is a genuine metric, which is where the 4 comes from
            prop_assert!(duw.sqrt() <= duv.sqrt() + dvw.sqrt() + 1e-9);
        }
    }

    #[test]
    fn distance_survives_frame_transport(raw in proptest::collection::vec(coord(), 3), seed in 0u64..1u64 << 48) {
        if let Some(center) = sphere_point(3, &raw) {
            let mut s = Sampler::new(seed, 11);
            let u = sample_sphere(3, &mut s);
            let v = sample_sphere(3, &mut s);
            let frame = orthonormal_frame(&center);
            let before = niso_distance(&u, &v);
            let after = niso_distance(
                &apply_frame(&frame, u.coords()),
                &apply_frame(&frame, v.coords()),
            );
            prop_assert!((before - after).abs() <= 1e-10_f64.max(1e-9 * before));
        }
    }

    #[test]
    fn ball_drop_exponent_routes_agree(
        alpha in 0.01..1.0f64,
        p in 1.01..64.0f64,
        n in 1usize..6,
    ) {
        // ball_drop_exponent itself cross-checks its two algebraic routes to
        // 1e-12 and errors on disagreement; the property is that no input in
        // the legal domain trips it.
        let drop = ball_drop_exponent(alpha, p, n).unwrap();
        prop_assert!(drop > 0.0 && drop < alpha + 1e-15);
        // monotone in p: more integrability keeps more smoothness
        let more = ball_drop_exponent(alpha, p + 0.5, n).unwrap();
        prop_assert!(more >= drop - 1e-15);
        // monotone in n the other way
        let wider = ball_drop_exponent(alpha, p, n + 1).unwrap();
        prop_assert!(wider <= drop + 1e-15);
    }

    #[test]
    fn disc_drop_is_the_one_dimensional_ball_drop(alpha in 0.01..1.0f64, p in 1.01..64.0f64) {
        let disc = disc_drop_exponent(alpha, p).unwrap();
        let ball = ball_drop_exponent(alpha, p, 1).unwrap();
        prop_assert!((disc - ball).abs() <= 1e-13);
    }

    #[test]
    fn balance_point_solves_both_regimes(alpha in 0.01..1.99f64) {
        let bal = balance_exponents(alpha).unwrap();
        prop_assert!((bal.gamma - alpha / 2.0).abs() <= 1e-13);
        prop_assert!((bal.far_regime - bal.near_regime).abs() <= 1e-12);
    }

    #[test]
    fn sharpness_weight_stays_integrable(
        p in 2.5..32.0f64,
        eps in 0.01..0.9f64,
    ) {
        // n = 2 demands p > 2; both routes agree internally to 1e-12.
        let w = sharpness_weight_exponent(p, 2, eps).unwrap();
        prop_assert!(w > -1.0);
    }

    #[test]
    fn fit_recovers_any_planted_line(
        slope in -3.0..3.0f64,
        intercept in -2.0..2.0f64,
    ) {
        let xs: Vec<f64> = (0..6).map(|k| -(k as f64) * 0.7 - 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| slope * x + intercept).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-9);
        prop_assert!((fit.intercept - intercept).abs() <= 1e-9);
    }

    #[test]
    fn oscillation_is_translation_invariant_and_scales(
        raw in proptest::collection::vec(coord(), 8),
        shift in coord(),
        scale in 0.1..10.0f64,
    ) {
        let base: Vec<C64> = raw.iter().map(|&(a, b)| C64::new(a, b)).collect();
        let nu0 = mean_oscillation(&base).unwrap().nu;
        let moved: Vec<C64> = base
            .iter()
            .map(|v| v * scale + C64::new(shift.0, shift.1))
            .collect();
        let nu1 = mean_oscillation(&moved).unwrap().nu;
        prop_assert!((nu1 - nu0 * scale).abs() <= 1e-8 * (1.0 + nu0 * scale));
    }

    #[test]
    fn sampler_streams_are_reproducible(seed in any::<u64>(), stream in any::<u64>()) {
        let mut a = Sampler::new(seed, stream);
        let mut b = Sampler::new(seed, stream);
        for _ in 0..16 {
            prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            prop_assert_eq!(b.uniform().to_bits(), a.uniform().to_bits());
        }
    }

    #[test]
    fn spike_modulus_is_bounded_and_tapers_to_one(t in -12.0..12.0f64, gamma in 0.05..0.95f64) {
        let psi = CircleModulus::log_spike(gamma, 1e-12).unwrap();
        let lv = psi.log_value(t);
        prop_assert!(lv <= 0.0);
        prop_assert!(lv >= (1e-12f64).ln() - 1e-9);
        // wrapped angle at least 1 away from the spike: identically 1
        let wrapped = {
            let mut a = t % core::f64::consts::TAU;
            if a > core::f64::consts::PI { a -= core::f64::consts::TAU; }
            if a < -core::f64::consts::PI { a += core::f64::consts::TAU; }
            a.abs()
        };
        if wrapped >= 1.0 {
            prop_assert!(lv == 0.0);
        }
    }
}
