//! Randomized invariants over the numeric kernels and the codec.

use std::f64::consts::PI;

use proptest::prelude::*;

use sparsecc::analysis::{err_prob_alpha0, err_upper_alpha0, h_poisson, DEFAULT_TAIL_TOL};
use sparsecc::codec::{
    decode_min, encode, generate_signal, DesignParams, Measurements, Signal, SignalKind,
};
use sparsecc::ratio_cdf::{q_alpha, QuadratureSpec, RatioCdf};
use sparsecc::rng::StreamKey;

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

proptest! {
    // Swapping the two angle draws inverts the ratio kernel.
    #[test]
    fn ratio_kernel_is_antisymmetric(
        alpha in 0.05f64..0.95,
        u1 in 0.02f64..0.98,
        u2 in 0.02f64..0.98,
    ) {
        let q = q_alpha(alpha, u1 * PI, u2 * PI).unwrap();
        let q_swapped = q_alpha(alpha, u2 * PI, u1 * PI).unwrap();
        prop_assert!((q * q_swapped - 1.0).abs() < 1e-12, "{q} * {q_swapped}");
    }

    #[test]
    fn cdf_is_monotone_and_bounded(
        alpha in 0.05f64..0.95,
        ln_t in -8.0f64..8.0,
        step in 0.0f64..4.0,
    ) {
        let table = RatioCdf::quadrature(alpha, quad()).unwrap();
        let lo = table.eval(ln_t.exp()).unwrap();
        let hi = table.eval((ln_t + step).exp()).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!((0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo - 1e-12, "F({}) = {lo} > F({}) = {hi}", ln_t.exp(), (ln_t + step).exp());
    }

    // The ratio and its reciprocal are identically distributed.
    #[test]
    fn cdf_complements_to_one(alpha in 0.05f64..0.95, ln_t in -8.0f64..8.0) {
        let table = RatioCdf::quadrature(alpha, quad()).unwrap();
        let f = table.eval(ln_t.exp()).unwrap();
        let f_inv = table.eval((-ln_t).exp()).unwrap();
        prop_assert!((f + f_inv - 1.0).abs() < 1e-9, "{f} + {f_inv}");
    }

    // The workable closed-form bound dominates the exact failure probability.
    #[test]
    fn failure_bound_dominates_exact_rate(
        k in 1usize..30,
        gamma in 0.01f64..=1.0,
        m in 1usize..50,
    ) {
        let exact = err_prob_alpha0(k, gamma, m, true).unwrap();
        let upper = err_upper_alpha0(k, gamma, m).unwrap();
        prop_assert!(exact <= upper + 1e-12, "exact {exact} vs upper {upper}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Loosening the precision target never lowers the decodability rate.
    #[test]
    fn rate_grows_with_epsilon(
        alpha in 0.05f64..0.95,
        lambda in 0.1f64..5.0,
        epsilon in 0.01f64..1.0,
        scale in 1.0f64..10.0,
    ) {
        let tight = h_poisson(lambda, epsilon, alpha, quad(), DEFAULT_TAIL_TOL).unwrap();
        let loose = h_poisson(lambda, epsilon * scale, alpha, quad(), DEFAULT_TAIL_TOL).unwrap();
        prop_assert!(loose >= tight - 1e-10, "h({epsilon}) = {tight} > h({}) = {loose}", epsilon * scale);
    }
}

prop_compose! {
    fn design_and_signal()(
        n in 10usize..40,
        m in 5usize..40,
        k in 1usize..=5,
        alpha in 0.05f64..0.9,
        gamma in 0.1f64..=1.0,
        seed in any::<u64>(),
        binary in any::<bool>(),
    ) -> (DesignParams, usize, SignalKind) {
        let kind = if binary { SignalKind::Binary } else { SignalKind::FoldedGaussian };
        (DesignParams { n, m, alpha, gamma, master_seed: seed }, k, kind)
    }
}

fn make_signal(params: &DesignParams, k: usize, kind: SignalKind) -> Signal {
    let mut stream = StreamKey::root(params.master_seed).child_str("sig").stream();
    generate_signal(kind, params.n, k, &mut stream).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covered_estimates_never_undershoot((params, k, kind) in design_and_signal()) {
        let signal = make_signal(&params, k, kind);
        let estimate = decode_min(&encode(&signal, &params).unwrap(), &params).unwrap();
        for i in 0..params.n {
            if estimate.covered()[i] {
                let truth = signal.value(i);
                let got = estimate.values()[i];
                match kind {
                    // Unit values survive the product/quotient exactly.
                    SignalKind::Binary => prop_assert!(got >= truth, "{got} < {truth} at {i}"),
                    // General values may lose one rounding step each way.
                    SignalKind::FoldedGaussian => {
                        prop_assert!(got >= truth * (1.0 - 1e-12), "{got} < {truth} at {i}")
                    }
                }
            }
        }
    }

    // Extending a design keeps its prefix: more measurements can only widen
    // coverage and tighten (lower) the minimum estimates.
    #[test]
    fn more_measurements_never_hurt(
        (params, k, kind) in design_and_signal(),
        extra in 1usize..30,
    ) {
        let signal = make_signal(&params, k, kind);
        let longer = DesignParams { m: params.m + extra, ..params };
        let short = decode_min(&encode(&signal, &params).unwrap(), &params).unwrap();
        let long = decode_min(&encode(&signal, &longer).unwrap(), &longer).unwrap();
        for i in 0..params.n {
            if short.covered()[i] {
                prop_assert!(long.covered()[i]);
                prop_assert!(long.values()[i] <= short.values()[i]);
            }
        }
    }

    #[test]
    fn signal_text_round_trips((params, k, kind) in design_and_signal()) {
        let signal = make_signal(&params, k, kind);
        let back = Signal::from_text(&signal.to_text()).unwrap();
        prop_assert_eq!(back.n(), signal.n());
        prop_assert_eq!(back.entries().len(), signal.entries().len());
        for (a, b) in back.entries().iter().zip(signal.entries()) {
            prop_assert_eq!(a.0, b.0);
            prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn measurement_text_round_trips((params, k, kind) in design_and_signal()) {
        let signal = make_signal(&params, k, kind);
        let measurements = encode(&signal, &params).unwrap();
        let back = Measurements::from_text(&measurements.to_text()).unwrap();
        prop_assert_eq!(back.len(), measurements.len());
        for (a, b) in back.values().iter().zip(measurements.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
