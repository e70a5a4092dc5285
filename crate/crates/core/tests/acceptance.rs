//! End-to-end acceptance checks. Runs every criterion, prints one PASS/FAIL
//! line each and exits non-zero if any failed.
//!
//! Run with `cargo test -p qtop --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use qtop::classical::{self, ClassicalPoint, SensitivityOptions};
use qtop::coherent::{Basis, QuantumState};
use qtop::edge::{self, chaotic_sea_point, oo_coherent_state, scan_line_point, TableOptions};
use qtop::evolution::{self, fidelity_series_with, overlap, short_time_exponent};
use qtop::kicked_top::{build_qkt, critical_delta_for_spin, parity_basis, KickedTop, KickedTopSpec};
use qtop::nonextensive::{
    classify_decay, e_q, fit_qexp, ln_q, s_q, ClassifyOptions, DecayClass, FitOptions, ProbabilityDistribution,
    TimePower,
};
use qtop::evolution::OverlapSeries;
use qtop::Spin;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHA: f64 = 3.0;
const TABLE_J: [u32; 8] = [120, 150, 180, 210, 240, 280, 360, 480];
const TABLE_DELTA_C: [f64; 8] = [5.39e-3, 3.86e-3, 2.94e-3, 2.33e-3, 1.91e-3, 1.51e-3, 1.04e-3, 6.74e-4];
const FIG3_OFFSET: f64 = 0.176;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_rel(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn round_sig3(x: f64) -> f64 {
    format!("{x:.2e}").parse().unwrap()
}

fn structure() -> Outcome {
    let start = Instant::now();
    let mut worst_unitary: f64 = 0.0;
    let mut worst_block: f64 = 0.0;
    let mut dims_ok = true;
    for j in [8, 120, 240, 480] {
        let spin = Spin::new(j).unwrap();
        let u = build_qkt(spin, ALPHA).unwrap();
        let decomp = parity_basis(spin).unwrap();
        worst_unitary = worst_unitary.max(u.unitarity_residual());
        worst_block = worst_block.max(decomp.off_block_residual(u.entries()).unwrap());
        let h = j as usize / 2;
        dims_ok &= decomp.block_dims() == (h + 1, h, 2 * h);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_unitary < 1e-10 && worst_block < 1e-10 && dims_ok && secs < 30.0,
        format!("unitarity {worst_unitary:.1e}, off-block {worst_block:.1e}, dims ok {dims_ok}, {secs:.1} s"),
    )
}

fn critical_delta_formula() -> Outcome {
    let mut bad = Vec::new();
    for (&j, &published) in TABLE_J.iter().zip(&TABLE_DELTA_C) {
        let d = critical_delta_for_spin(Spin::new(j).unwrap());
        if (round_sig3(d) - published).abs() > 1e-12 {
            bad.push(format!("J={j}: {d:.4e}"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "all eight match".into() } else { bad.join(", ") })
}

fn overlap_decay_contrast() -> Outcome {
    let start = Instant::now();
    let spin = Spin::new(480).unwrap();
    let top = KickedTop::new(spin).unwrap();
    let spec = KickedTopSpec::new(spin, ALPHA, 0.005).unwrap();
    let fixed = oo_coherent_state(&top, &ClassicalPoint::fixed_point(1.0)).unwrap();
    let regular = fidelity_series_with(&top, &spec, &fixed, 300).unwrap();
    let regular_min = regular.min_value();

    let sea = oo_coherent_state(&top, &chaotic_sea_point()).unwrap();
    let chaotic = fidelity_series_with(&top, &spec, &sea, 3000).unwrap();
    let class = classify_decay(&chaotic, &ClassifyOptions::default()).unwrap().class;
    let exponent = short_time_exponent(&chaotic, 0.1).unwrap_or(f64::NAN);
    let secs = start.elapsed().as_secs_f64();
    let pass = regular_min > 0.8
        && class == DecayClass::Exponential
        && (exponent - 2.0).abs() <= 0.2
        && secs < 60.0;
    outcome(
        pass,
        format!(
            "fixed-point min O {regular_min:.3}, chaotic class {}, short-time exponent {exponent:.2}, {secs:.1} s",
            class.name()
        ),
    )
}

fn fig3_fits() -> Outcome {
    let start = Instant::now();
    let spin = Spin::new(240).unwrap();
    let top = KickedTop::new(spin).unwrap();
    let state = oo_coherent_state(&top, &scan_line_point(FIG3_OFFSET).unwrap()).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for (delta, window, steps, q_target, q_tol, tau_target) in
        [(0.01, (20, 70), 3000, 4.25, 0.5, 34.0), (0.0003, (600, 2500), 3000, 3.3, 0.4, 1300.0)]
    {
        let spec = KickedTopSpec::new(spin, ALPHA, delta).unwrap();
        let series = fidelity_series_with(&top, &spec, &state, steps).unwrap();
        match fit_qexp(&series, window, TimePower::Two, &FitOptions::default()) {
            Ok(fit) => {
                pass &= (fit.q_rel - q_target).abs() <= q_tol && within_rel(fit.tau, tau_target, 0.3);
                lines.push(format!("δ={delta}: q {:.2} τ {:.0}", fit.q_rel, fit.tau));
            }
            Err(e) => {
                pass = false;
                lines.push(format!("δ={delta}: {e}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    outcome(pass, format!("{}, {secs:.1} s", lines.join("; ")))
}

fn table_run() -> edge::Table {
    edge::table1(&[120, 240, 480], ALPHA, &TableOptions::default())
}

fn delta_sweep(table: &edge::Table) -> Outcome {
    let Some(sweep) = table.sweeps.iter().find(|s| s.j == 240) else {
        return outcome(false, "no J=240 sweep".into());
    };
    let slope = sweep.tau_slope;
    let below: Vec<f64> = sweep.fitted().iter().filter(|p| p.0 < sweep.delta_c).map(|p| p.1).collect();
    let spread = if below.is_empty() {
        f64::NAN
    } else {
        let mean = below.iter().sum::<f64>() / below.len() as f64;
        below.iter().map(|q| (q - mean).abs()).fold(0.0, f64::max)
    };
    let pass = slope.is_some_and(|s| (-1.2..=-0.9).contains(&s)) && spread < 0.3;
    outcome(
        pass,
        format!(
            "τ slope {}, q below δ_c {:?}, max deviation {spread:.2}",
            slope.map_or("none".into(), |s| format!("{s:.2}")),
            below.iter().map(|q| (q * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

fn table_trends(table: &edge::Table, scan_secs: f64) -> Outcome {
    if !table.failures.is_empty() || table.rows.len() != 3 {
        let reasons: Vec<String> = table.failures.iter().map(|f| format!("J={}: {}", f.j, f.reason)).collect();
        return outcome(false, format!("missing rows: {}", reasons.join("; ")));
    }
    let r = &table.rows;
    let increasing = |f: &dyn Fn(&edge::TableRow) -> f64| r.windows(2).all(|w| f(&w[1]) > f(&w[0]));
    let decreasing = |f: &dyn Fn(&edge::TableRow) -> f64| r.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let offsets_up = increasing(&|row| row.edge_offset);
    let delta_down = decreasing(&|row| row.delta_c);
    let q_down = decreasing(&|row| row.q_rel_c.unwrap_or(f64::NAN));
    let off240 = r[1].edge_offset;
    let pass = offsets_up && delta_down && q_down && (off240 - FIG3_OFFSET).abs() <= 0.02 && scan_secs < 1800.0;
    let rows: Vec<String> = r
        .iter()
        .map(|row| {
            format!(
                "J={} offset {:.3} δ_c {:.2e} q_c {}",
                row.j,
                row.edge_offset,
                row.delta_c,
                row.q_rel_c.map_or("none".into(), |q| format!("{q:.2}"))
            )
        })
        .collect();
    outcome(pass, format!("{}; {scan_secs:.0} s", rows.join(", ")))
}

fn classical_map() -> Outcome {
    let fp_err = [1.0, -1.0]
        .iter()
        .map(|&s| {
            let p = ClassicalPoint::fixed_point(s);
            let q = classical::step(&p, ALPHA);
            ((q.x - p.x).powi(2) + (q.y - p.y).powi(2) + (q.z - p.z).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    let start = ClassicalPoint::normalized(0.3, -0.5, 0.8).unwrap();
    let drift = classical::orbit(&start, ALPHA, 10_000).iter().map(|p| (p.norm() - 1.0).abs()).fold(0.0, f64::max);
    let chaotic = classical::sensitivity(&chaotic_sea_point(), ALPHA, 2000, SensitivityOptions::default()).unwrap();
    let fixed =
        classical::sensitivity(&ClassicalPoint::fixed_point(1.0), ALPHA, 10_000, SensitivityOptions::default()).unwrap();
    let xi_max = fixed.xi.iter().copied().fold(0.0, f64::max);
    let bounded = fixed.truncated_at.is_none() && xi_max < 100.0;
    outcome(
        fp_err < 1e-6 && drift < 1e-8 && chaotic.lyapunov > 0.0 && bounded,
        format!(
            "fixed-point error {fp_err:.1e}, norm drift {drift:.1e}, chaotic λ {:.3}, fixed-point max ξ {xi_max:.1}",
            chaotic.lyapunov
        ),
    )
}

fn nonextensive_properties() -> Outcome {
    let mut inverse_err: f64 = 0.0;
    for qi in 0..=30 {
        let q = 0.5 + 0.1 * qi as f64;
        for xi in 1..=100 {
            let x = xi as f64 / 100.0;
            inverse_err = inverse_err.max((e_q(ln_q(x, q).unwrap(), q) - x).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut additivity_err: f64 = 0.0;
    let random_dist = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(2..8);
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let sum: f64 = w.iter().sum();
        ProbabilityDistribution::new(w.iter().map(|v| v / sum).collect()).unwrap()
    };
    for _ in 0..200 {
        let a = random_dist(&mut rng);
        let b = random_dist(&mut rng);
        let ab = a.product(&b).unwrap();
        let q = rng.random_range(0.2..4.0);
        let (sa, sb) = (s_q(&a, q), s_q(&b, q));
        let expected = sa + sb + (1.0 - q) * sa * sb;
        additivity_err = additivity_err.max((s_q(&ab, q) - expected).abs());
    }

    let d = random_dist(&mut rng);
    let s1 = s_q(&d, 1.0);
    let continuity = [1.0 - 1e-7, 1.0 + 1e-7].iter().map(|&q| (s_q(&d, q) - s1).abs()).fold(0.0, f64::max);

    let series = OverlapSeries::from_fn(3000, |t| e_q(-(t / 1300.0).powi(2), 3.3)).unwrap();
    let (q_fit, tau_fit) = match fit_qexp(&series, (1, 3000), TimePower::Two, &FitOptions::default()) {
        Ok(f) => (f.q_rel, f.tau),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let pass = inverse_err < 1e-12
        && additivity_err < 1e-12
        && continuity < 1e-6
        && (q_fit - 3.3).abs() <= 0.05
        && within_rel(tau_fit, 1300.0, 0.02);
    outcome(
        pass,
        format!(
            "inverse {inverse_err:.1e}, additivity {additivity_err:.1e}, continuity {continuity:.1e}, fit q {q_fit:.3} τ {tau_fit:.1}"
        ),
    )
}

fn random_oo_state(spin: Spin, rng: &mut ChaCha8Rng) -> QuantumState {
    let n = spin.j() as usize / 2;
    let amps = DVector::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    QuantumState::normalized(Basis::Oo(spin), amps).unwrap()
}

fn invariance() -> Outcome {
    let spin = Spin::new(240).unwrap();
    let top = KickedTop::new(spin).unwrap();
    let u = top.oo_floquet(ALPHA);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = random_oo_state(spin, &mut rng);
        let b = random_oo_state(spin, &mut rng);
        let before = overlap(&a, &b).unwrap();
        let n = rng.random_range(1..50);
        let after = overlap(&evolution::evolve(&u, &a, n).unwrap(), &evolution::evolve(&u, &b, n).unwrap()).unwrap();
        worst = worst.max((after - before).abs());
    }
    let spec = KickedTopSpec::new(spin, ALPHA, 0.0).unwrap();
    let state = oo_coherent_state(&top, &chaotic_sea_point()).unwrap();
    let series = fidelity_series_with(&top, &spec, &state, 1000).unwrap();
    let unit_err = series.values.iter().map(|o| (o - 1.0).abs()).fold(0.0, f64::max);
    outcome(worst < 1e-10 && unit_err < 1e-12, format!("pair overlap drift {worst:.1e}, δ=0 deviation {unit_err:.1e}"))
}

fn saturation() -> Outcome {
    let spin = Spin::new(240).unwrap();
    let top = KickedTop::new(spin).unwrap();
    let spec = KickedTopSpec::new(spin, ALPHA, 0.01).unwrap();
    let state = oo_coherent_state(&top, &chaotic_sea_point()).unwrap();
    let series = fidelity_series_with(&top, &spec, &state, 3000).unwrap();
    let r = evolution::saturation_report(&series, top.oo_dim(), evolution::DEFAULT_TAIL_FRACTION).unwrap();
    let nearest = r.log10_ratio_inverse_n.abs().min(r.log10_ratio_inverse_sqrt_n.abs());
    outcome(
        nearest <= 1.0,
        format!(
            "plateau {:.4}, 1/N {:.4} (log10 ratio {:+.2}), 1/√N {:.4} (log10 ratio {:+.2})",
            r.plateau, r.inverse_n, r.log10_ratio_inverse_n, r.inverse_sqrt_n, r.log10_ratio_inverse_sqrt_n
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };
    report("1 structure", structure());
    report("2 critical perturbation formula", critical_delta_formula());
    report("3 fixed point vs chaotic sea", overlap_decay_contrast());
    report("4 edge-state q-exponential fits", fig3_fits());
    let start = Instant::now();
    let table = table_run();
    let table_secs = start.elapsed().as_secs_f64();
    report("5 perturbation sweep", delta_sweep(&table));
    report("6 edge trends with J", table_trends(&table, table_secs));
    report("7 classical map", classical_map());
    report("8 nonextensive properties", nonextensive_properties());
    report("9 invariance", invariance());
    report("10 saturation", saturation());

    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
