use qtop::classical::ClassicalPoint;
use qtop::coherent::{coherent_state_at, project_oo};
use qtop::edge::{delta_sweep, oo_coherent_state, scan_line_point, table1, SweepOptions, TableOptions};
use qtop::evolution::{fidelity_series_with, OverlapSeries};
use qtop::kicked_top::{KickedTop, KickedTopSpec};
use qtop::nonextensive::{
    classify_decay, e_q, fit_gaussian, fit_qexp, ClassifyOptions, DecayClass, FitOptions, TimePower,
};
use qtop::Spin;

#[test]
fn recovers_synthetic_q_exponential() {
    let s = OverlapSeries::from_fn(3000, |t| e_q(-(t / 1300.0).powi(2), 3.3)).unwrap();
    let fit = fit_qexp(&s, (600, 2500), TimePower::Two, &FitOptions::default()).unwrap();
    assert!((fit.q_rel - 3.3).abs() < 0.05, "q = {}", fit.q_rel);
    assert!((fit.tau / 1300.0 - 1.0).abs() < 0.02, "tau = {}", fit.tau);
    assert!(fit.linearity > 0.999);
}

#[test]
fn near_one_q_matches_gaussian_width() {
    let s = OverlapSeries::from_fn(400, |t| (-(t / 120.0).powi(2)).exp()).unwrap();
    let g = fit_gaussian(&s, (1, 300)).unwrap();
    let opts = FitOptions { q_lo: 1.001, q_hi: 1.001, q_step: 0.0, refine_tol: 1e-4 };
    let q = fit_qexp(&s, (1, 300), TimePower::Two, &opts).unwrap();
    let tau_gauss = 1.0 / g.width.sqrt();
    assert!((q.tau / tau_gauss - 1.0).abs() < 0.01, "{} vs {}", q.tau, tau_gauss);
}

#[test]
fn classifies_synthetic_shapes() {
    let opts = ClassifyOptions::default();
    let with_floor = |f: &dyn Fn(f64) -> f64| OverlapSeries::from_fn(3000, |t| f(t) * 0.95 + 0.05).unwrap();
    let exp = with_floor(&|t| (-t / 40.0).exp());
    assert_eq!(classify_decay(&exp, &opts).unwrap().class, DecayClass::Exponential);
    let gauss = with_floor(&|t| (-(t / 40.0).powi(2)).exp());
    assert_eq!(classify_decay(&gauss, &opts).unwrap().class, DecayClass::Gaussian);
    let power = OverlapSeries::from_fn(3000, |t| e_q(-(t / 30.0).powi(2), 3.0)).unwrap();
    assert!(classify_decay(&power, &opts).unwrap().class.is_power_law());
    let flat = OverlapSeries::from_fn(3000, |t| 1.0 - 1e-5 * t / 3000.0).unwrap();
    assert_eq!(classify_decay(&flat, &opts).unwrap().class, DecayClass::Regular);
}

#[test]
fn fixed_point_state_has_quarter_weight_in_oo() {
    let spin = Spin::new(240).unwrap();
    let top = KickedTop::new(spin).unwrap();
    let cs = coherent_state_at(spin, &ClassicalPoint::fixed_point(1.0)).unwrap();
    let proj = project_oo(&cs, top.decomposition(), true).unwrap();
    assert!((proj.weight - 0.25).abs() < 0.05, "weight {}", proj.weight);
}

#[test]
fn zero_perturbation_keeps_full_overlap() {
    let spin = Spin::new(60).unwrap();
    let top = KickedTop::new(spin).unwrap();
    let spec = KickedTopSpec::new(spin, 3.0, 0.0).unwrap();
    let state = oo_coherent_state(&top, &scan_line_point(0.1).unwrap()).unwrap();
    let s = fidelity_series_with(&top, &spec, &state, 500).unwrap();
    assert!(s.values.iter().all(|o| (o - 1.0).abs() < 1e-12));
}

#[test]
fn single_delta_sweep_has_no_slope() {
    let spin = Spin::new(40).unwrap();
    let top = KickedTop::new(spin).unwrap();
    let p = scan_line_point(0.05).unwrap();
    let r = delta_sweep(&top, 3.0, &p, &[0.02], &SweepOptions::default()).unwrap();
    assert_eq!(r.points.len(), 1);
    assert!(r.tau_slope.is_none());
    assert!(delta_sweep(&top, 3.0, &p, &[], &SweepOptions::default()).is_err());
    assert!(delta_sweep(&top, 3.0, &p, &[0.02, 0.01], &SweepOptions::default()).is_err());
}

#[test]
fn empty_table() {
    let t = table1(&[], 3.0, &TableOptions::default());
    assert!(t.rows.is_empty() && t.failures.is_empty());
    let odd = table1(&[7], 3.0, &TableOptions::default());
    assert_eq!(odd.failures.len(), 1);
}
