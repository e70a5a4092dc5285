use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use qtop::coherent::{Basis, QuantumState};
use qtop::evolution::{evolve, overlap, OverlapSeries};
use qtop::kicked_top::KickedTop;
use qtop::nonextensive::{e_q, fit_qexp, ln_q, s_q, FitOptions, ProbabilityDistribution, TimePower};
use qtop::Spin;

fn distribution() -> impl Strategy<Value = ProbabilityDistribution> {
    prop::collection::vec(0.001f64..1.0, 1..10).prop_map(|w| {
        let sum: f64 = w.iter().sum();
        ProbabilityDistribution::new(w.iter().map(|v| v / sum).collect()).unwrap()
    })
}

fn oo_state(spin: Spin) -> impl Strategy<Value = QuantumState> {
    let n = spin.j() as usize / 2;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(move |v| {
            let amps = DVector::from_iterator(v.len(), v.iter().map(|&(re, im)| Complex64::new(re, im)));
            QuantumState::normalized(Basis::Oo(spin), amps).unwrap()
        })
}

proptest! {
    #[test]
    fn pseudo_additivity(a in distribution(), b in distribution(), q in 0.1f64..5.0) {
        let (sa, sb) = (s_q(&a, q), s_q(&b, q));
        let joint = s_q(&a.product(&b).unwrap(), q);
        prop_assert!((joint - (sa + sb + (1.0 - q) * sa * sb)).abs() < 1e-12);
    }

    #[test]
    fn superextensive_below_one(a in distribution(), b in distribution(), q in 0.1f64..0.95) {
        let (sa, sb) = (s_q(&a, q), s_q(&b, q));
        prop_assert!(s_q(&a.product(&b).unwrap(), q) >= sa + sb - 1e-12);
    }

    #[test]
    fn subextensive_above_one(a in distribution(), b in distribution(), q in 1.05f64..5.0) {
        let (sa, sb) = (s_q(&a, q), s_q(&b, q));
        prop_assert!(s_q(&a.product(&b).unwrap(), q) <= sa + sb + 1e-12);
    }

    #[test]
    fn q_exponential_inverts_q_log(x in 1e-6f64..1.0, q in 0.2f64..6.0) {
        prop_assert!((e_q(ln_q(x, q).unwrap(), q) - x).abs() < 1e-12);
    }

    #[test]
    fn joint_evolution_keeps_overlap(
        (a, b) in (oo_state(Spin::new(40).unwrap()), oo_state(Spin::new(40).unwrap())),
        n in 1usize..40,
    ) {
        let top = KickedTop::new(Spin::new(40).unwrap()).unwrap();
        let u = top.oo_floquet(3.0);
        let before = overlap(&a, &b).unwrap();
        let after = overlap(&evolve(&u, &a, n).unwrap(), &evolve(&u, &b, n).unwrap()).unwrap();
        prop_assert!((after - before).abs() < 1e-10);
    }

    #[test]
    fn time_rescaling_rescales_tau(q in 1.5f64..5.0, tau in 50.0f64..400.0, c in 1.5f64..4.0) {
        let a = OverlapSeries::from_fn(600, |t| e_q(-(t / tau).powi(2), q)).unwrap();
        let b = OverlapSeries::from_fn(600, |t| e_q(-(t / (tau * c)).powi(2), q)).unwrap();
        let fa = fit_qexp(&a, (1, 600), TimePower::Two, &FitOptions::default()).unwrap();
        let fb = fit_qexp(&b, (1, 600), TimePower::Two, &FitOptions::default()).unwrap();
        prop_assert!((fa.q_rel - fb.q_rel).abs() < 0.02);
        prop_assert!((fb.tau / fa.tau / c - 1.0).abs() < 0.01);
    }
}
