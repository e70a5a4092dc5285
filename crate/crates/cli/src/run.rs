//! Executing experiments and writing their outputs.

use std::time::Instant;

use qtop::classical::{self, ClassicalPoint, SensitivityOptions, FIXED_POINT_XZ};
use qtop::edge::{
    self, chaotic_sea_point, log_spaced, oo_coherent_state, scan_line_point, ScanOptions, SweepOptions, TableOptions,
    CHAOTIC_SEA_OFFSET,
};
use qtop::evolution::{fidelity_series_with, saturation_report, short_time_exponent, OverlapSeries};
use qtop::kicked_top::{critical_delta_for_spin, perturbation_stats_with, KickedTop, KickedTopSpec};
use qtop::linalg::unitarity_residual;
use qtop::nonextensive::{classify_decay, fit_qexp, ln_q, ClassifyOptions, QExpFit, TimePower};
use qtop::Spin;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind, Target, TABLE_SPINS};
use crate::emit::{parse_numeric_csv, Cell, Emitter, Table};
use crate::record::RunRecord;
use crate::svg::Plot;
use crate::CliError;

/// Offset below the fixed point of the published J = 240 edge state.
pub const PUBLISHED_EDGE_OFFSET_240: f64 = 0.176;
/// Classical orbit length for the phase-space portrait.
pub const PORTRAIT_POINTS: usize = 10_000;


/// Fixed parameters of each reproduction target.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub spins: Vec<u32>,
    pub alpha: f64,
    pub deltas: Vec<f64>,
    pub windows: Vec<(usize, usize)>,
}

pub fn preset(target: Target) -> Preset {
    let spins = |v: &[u32]| v.to_vec();
    match target {
        Target::Fig1 => Preset { spins: spins(&[480]), alpha: 3.0, deltas: vec![0.005], windows: vec![] },
        Target::Fig2 => Preset { spins: vec![], alpha: 3.0, deltas: vec![], windows: vec![] },
        Target::Fig3 => {
            Preset { spins: spins(&[240]), alpha: 3.0, deltas: vec![0.0003, 0.01], windows: vec![(600, 2500), (20, 70)] }
        }
        Target::Fig4 => Preset { spins: spins(&[120, 240, 360, 480]), alpha: 3.0, deltas: vec![], windows: vec![] },
        Target::Fig5 | Target::Fig6 | Target::Table1 => {
            Preset { spins: TABLE_SPINS.to_vec(), alpha: 3.0, deltas: vec![], windows: vec![] }
        }
    }
}

fn meta(cfg: &ExperimentConfig) -> Value {
    json!({ "J": cfg.j, "alpha": cfg.alpha, "delta": cfg.delta })
}

/// `t,overlap` rows.
pub fn series_table(series: &OverlapSeries) -> Table {
    let mut t = Table::new(&["t", "overlap"]);
    for (s, o) in series.steps.iter().zip(&series.values) {
        t.push(vec![(*s).into(), (*o).into()]);
    }
    t
}

fn series_points(series: &OverlapSeries) -> Vec<(f64, f64)> {
    series.steps.iter().zip(&series.values).map(|(t, o)| (*t as f64, *o)).collect()
}

/// `ln_q O` against `t^p` in the fit window, alongside the fitted line.
fn linearized_table(series: &OverlapSeries, fit: &QExpFit) -> Table {
    let p = fit.time_power.exponent();
    let mut t = Table::new(&["t", "t_pow", "ln_q_overlap", "fit_line"]);
    for (s, o) in series.window(fit.window.0, fit.window.1) {
        let x = (s as f64).powi(p);
        let y = ln_q(o, fit.q_rel).ok();
        t.push(vec![s.into(), x.into(), y.into(), (-x / fit.tau.powi(p)).into()]);
    }
    t
}

fn load_series(path: &std::path::Path) -> Result<OverlapSeries, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (header, rows) = parse_numeric_csv(&text)?;
    if header.len() < 2 || header[0] != "t" || header[1] != "overlap" {
        return Err(CliError::Config(format!("input: expected header t,overlap, got {}", header.join(","))));
    }
    let mut steps = Vec::with_capacity(rows.len());
    for r in &rows {
        if r[0] < 0.0 || r[0].fract() != 0.0 {
            return Err(CliError::Config(format!("input: time {} is not a non-negative integer", r[0])));
        }
        steps.push(r[0] as usize);
    }
    Ok(OverlapSeries::from_values(steps, rows.iter().map(|r| r[1]).collect())?)
}

struct Quantum {
    top: KickedTop,
    spec: KickedTopSpec,
}

impl Quantum {
    fn new(spin: Spin, alpha: f64, delta: f64) -> Result<Self, CliError> {
        let top = KickedTop::new(spin)?;
        let spec = KickedTopSpec::new(spin, alpha, delta)?;
        Ok(Self { top, spec })
    }

    fn series(&self, p: &ClassicalPoint, steps: usize) -> Result<OverlapSeries, CliError> {
        let state = oo_coherent_state(&self.top, p)?;
        Ok(fidelity_series_with(&self.top, &self.spec, &state, steps)?)
    }
}

fn computed_or_loaded_series(cfg: &ExperimentConfig) -> Result<OverlapSeries, CliError> {
    if let Some(path) = &cfg.input {
        return load_series(path);
    }
    let q = Quantum::new(cfg.spin()?, cfg.alpha, cfg.delta.unwrap_or(0.0))?;
    q.series(&cfg.state.expect("checked"), cfg.steps)
}

fn classify_options(cfg: &ExperimentConfig) -> ClassifyOptions {
    ClassifyOptions { tail_fraction: cfg.tail_fraction, fit: cfg.fit, ..Default::default() }
}

fn scan_options(cfg: &ExperimentConfig) -> ScanOptions {
    let (z_start, z_end) = cfg.z_range.unwrap_or((FIXED_POINT_XZ, FIXED_POINT_XZ - CHAOTIC_SEA_OFFSET));
    ScanOptions { z_start, z_end, z_step: cfg.z_step, steps: cfg.steps, classify: classify_options(cfg) }
}

fn sweep_options(cfg: &ExperimentConfig) -> SweepOptions {
    SweepOptions { window: cfg.window, tail_fraction: cfg.tail_fraction, fit: cfg.fit, ..Default::default() }
}

fn run_build(cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let spin = cfg.spin()?;
    let delta = cfg.delta.unwrap_or(0.0);
    let top = KickedTop::new(spin)?;
    let spec = KickedTopSpec::new(spin, cfg.alpha, delta)?;
    let u = top.floquet(cfg.alpha);
    let up = top.floquet(spec.perturbed_alpha());
    let decomp = top.decomposition();
    let stats = perturbation_stats_with(&top, &spec)?;
    let (ee, oo, oe) = decomp.block_dims();
    out.json(
        "summary.json",
        &json!({
            "J": spin.j(),
            "alpha": cfg.alpha,
            "delta": delta,
            "dim": spin.dim(),
            "block_dims": { "ee": ee, "oo": oo, "oe": oe },
            "unitarity_residual": u.unitarity_residual(),
            "perturbed_unitarity_residual": up.unitarity_residual(),
            "off_block_residual": decomp.off_block_residual(u.entries())?,
            "oo_unitarity_residual": unitarity_residual(top.oo_floquet(cfg.alpha).entries()),
            "perturbation": stats,
        }),
    )
}

fn run_fidelity(cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let q = Quantum::new(cfg.spin()?, cfg.alpha, cfg.delta.expect("checked"))?;
    let series = q.series(&cfg.state.expect("checked"), cfg.steps)?;
    out.table("fidelity", &series_table(&series), &meta(cfg))?;
    let saturation = saturation_report(&series, q.top.oo_dim(), cfg.tail_fraction).ok();
    out.json(
        "summary.json",
        &json!({
            "J": cfg.j, "alpha": cfg.alpha, "delta": cfg.delta, "state": cfg.state,
            "steps": cfg.steps, "min_overlap": series.min_value(), "saturation": saturation,
        }),
    )?;
    let mut plot = Plot::new("overlap decay", "t", "O").log_log();
    plot.add("O(t)", series_points(&series));
    out.plot("fidelity", &plot)
}

fn run_fit(cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let series = computed_or_loaded_series(cfg)?;
    let power = if cfg.time_power == 1 { TimePower::One } else { TimePower::Two };
    let fit = fit_qexp(&series, cfg.window.expect("checked"), power, &cfg.fit)?;
    let classification = if cfg.classify { Some(classify_decay(&series, &classify_options(cfg))?) } else { None };
    let lin = linearized_table(&series, &fit);
    out.table("linearized", &lin, &json!({ "q_rel": fit.q_rel, "tau": fit.tau }))?;
    out.json("summary.json", &json!({ "fit": fit, "classification": classification }))?;
    let mut plot = Plot::new("q-exponential fit", "t", "O").log_log();
    plot.add("data", series_points(&series));
    plot.add(
        "fit",
        series.window(fit.window.0.max(1), fit.window.1).map(|(t, _)| (t as f64, fit.predict(t as f64))).collect(),
    );
    out.plot("fit", &plot)
}

fn run_classify(cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let series = computed_or_loaded_series(cfg)?;
    let c = classify_decay(&series, &classify_options(cfg))?;
    out.json("summary.json", &json!({ "class": c.class.name(), "classification": c }))
}

fn scan_table(result: &edge::EdgeScanResult) -> Table {
    let mut t = Table::new(&["z", "offset", "class", "q_rel", "tau", "decades"]);
    for p in &result.points {
        t.push(vec![
            p.z.into(),
            p.offset.into(),
            p.class.map_or("error", |c| c.name()).into(),
            p.fit.map(|f| f.q_rel).into(),
            p.fit.map(|f| f.tau).into(),
            p.stretch.map(|s| s.decades).into(),
        ]);
    }
    t
}

fn sweep_table(result: &edge::DeltaSweepResult) -> Table {
    let mut t = Table::new(&["delta", "q_rel", "tau", "window_lo", "window_hi", "steps"]);
    for p in &result.points {
        t.push(vec![
            p.delta.into(),
            p.fit.map(|f| f.q_rel).into(),
            p.fit.map(|f| f.tau).into(),
            p.window.map_or(Cell::Empty, |w| w.0.into()),
            p.window.map_or(Cell::Empty, |w| w.1.into()),
            p.steps.into(),
        ]);
    }
    t
}

fn sweep_summary(r: &edge::DeltaSweepResult) -> Value {
    json!({
        "J": r.j,
        "edge_state": r.edge_state,
        "delta_c": r.delta_c,
        "q_rel_c": r.q_rel_c,
        "delta_s": r.delta_s,
        "q_rel_s": r.q_rel_s,
        "saturation": if r.saturation_detected() { "detected" } else { "no saturation detected" },
        "tau_slope": r.tau_slope,
        "tau_slope_defined": r.tau_slope.is_some(),
        "failures": r.points.iter().filter_map(|p| p.error.as_ref().map(|e| json!({"delta": p.delta, "error": e}))).collect::<Vec<_>>(),
    })
}

fn run_edge_scan(cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let top = KickedTop::new(cfg.spin()?)?;
    let result = edge::scan_edge(&top, cfg.alpha, cfg.delta.expect("checked"), &scan_options(cfg))?;
    out.table("scan", &scan_table(&result), &meta(cfg))?;
    out.json(
        "summary.json",
        &json!({ "J": result.j, "alpha": result.alpha, "delta": result.delta,
                 "edge_z": result.edge_z, "edge_offset": result.edge_offset }),
    )
}

fn default_deltas(spin: Spin) -> Vec<f64> {
    let dc = critical_delta_for_spin(spin);
    log_spaced(0.1 * dc, 10.0 * dc, 9)
}

fn sweep_plots(out: &mut Emitter, sweeps: &[edge::DeltaSweepResult]) -> Result<(), CliError> {
    let mut q = Plot::new("q_rel vs delta", "delta", "q_rel");
    q.log_x = true;
    let mut tau = Plot::new("tau vs delta", "delta", "tau").log_log();
    for s in sweeps {
        let f = s.fitted();
        q.add(&format!("J={}", s.j), f.iter().map(|x| (x.0, x.1)).collect());
        tau.add(&format!("J={}", s.j), f.iter().map(|x| (x.0, x.2)).collect());
    }
    out.plot("q_rel", &q)?;
    out.plot("tau", &tau)
}

fn run_delta_sweep(cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let spin = cfg.spin()?;
    let top = KickedTop::new(spin)?;
    let deltas = cfg.deltas.clone().unwrap_or_else(|| default_deltas(spin));
    let r = edge::delta_sweep(&top, cfg.alpha, &cfg.state.expect("checked"), &deltas, &sweep_options(cfg))?;
    out.table("sweep", &sweep_table(&r), &meta(cfg))?;
    out.json("summary.json", &sweep_summary(&r))?;
    sweep_plots(out, std::slice::from_ref(&r))
}

fn table_options(cfg: &ExperimentConfig) -> TableOptions {
    TableOptions {
        scan_delta: cfg.delta.unwrap_or(TableOptions::default().scan_delta),
        scan: scan_options(cfg),
        sweep: sweep_options(cfg),
        ..Default::default()
    }
}

/// One row per spin: `J,edge_offset,delta_c,q_rel_c`.
pub fn table1_rows(rows: &[edge::TableRow]) -> Table {
    let mut t = Table::new(&["J", "edge_offset", "delta_c", "q_rel_c"]);
    for r in rows {
        t.push(vec![r.j.into(), r.edge_offset.into(), r.delta_c.into(), r.q_rel_c.into()]);
    }
    t
}

fn emit_table1(out: &mut Emitter, table: &edge::Table, alpha: f64, portrait: bool) -> Result<(), CliError> {
    out.table("table1", &table1_rows(&table.rows), &json!({ "alpha": alpha }))?;
    let mut fig5 = Table::new(&["inv_J", "q_rel_c"]);
    for (x, q) in table.inverse_j_vs_q() {
        fig5.push(vec![x.into(), q.into()]);
    }
    out.table("fig5", &fig5, &json!({}))?;
    let mut inset = Table::new(&["edge_offset", "inv_J"]);
    for (o, x) in table.offset_vs_inverse_j() {
        inset.push(vec![o.into(), x.into()]);
    }
    out.table("fig6_inset", &inset, &json!({}))?;
    for (scan, sweep) in table.scans.iter().zip(&table.sweeps) {
        out.table(&format!("scan_J{}", scan.j), &scan_table(scan), &json!({ "J": scan.j }))?;
        out.table(&format!("sweep_J{}", sweep.j), &sweep_table(sweep), &json!({ "J": sweep.j }))?;
    }
    if portrait {
        // edge states on the projected plane with their angular footprint
        let mut edges = Table::new(&["J", "x", "y", "z", "proj_x", "proj_z", "footprint"]);
        for scan in &table.scans {
            let p = scan.edge_point()?;
            let (px, pz) = classical::project(&p);
            edges.push(vec![
                scan.j.into(),
                p.x.into(),
                p.y.into(),
                p.z.into(),
                px.into(),
                pz.into(),
                (1.0 / (scan.j as f64).sqrt()).into(),
            ]);
        }
        out.table("fig6_edges", &edges, &json!({}))?;
        emit_portrait(out, alpha, "fig6_portrait")?;
    }
    out.json(
        "summary.json",
        &json!({
            "rows": table.rows,
            "failures": table.failures,
            "sweeps": table.sweeps.iter().map(sweep_summary).collect::<Vec<_>>(),
        }),
    )?;
    sweep_plots(out, &table.sweeps)
}

fn table1_result(cfg: &ExperimentConfig, spins: &[u32]) -> Result<edge::Table, CliError> {
    let table = edge::table1(spins, cfg.alpha, &table_options(cfg));
    if table.rows.is_empty() && !table.failures.is_empty() {
        let reasons: Vec<String> = table.failures.iter().map(|f| format!("J={}: {}", f.j, f.reason)).collect();
        let all_missing = table.failures.iter().all(|f| f.reason.contains("no power-law"));
        let msg = reasons.join("; ");
        return Err(if all_missing { qtop::Error::EdgeNotFound(msg) } else { qtop::Error::Fit(msg) }.into());
    }
    Ok(table)
}

fn run_table1(cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let spins = cfg.j_list.clone().unwrap_or_else(|| TABLE_SPINS.to_vec());
    let table = table1_result(cfg, &spins)?;
    emit_table1(out, &table, cfg.alpha, false)
}

fn orbit_table(orbit: &[ClassicalPoint]) -> Table {
    let mut t = Table::new(&["t", "x", "y", "z"]);
    for (i, p) in orbit.iter().enumerate() {
        t.push(vec![i.into(), p.x.into(), p.y.into(), p.z.into()]);
    }
    t
}

fn projection_table(orbit: &[ClassicalPoint]) -> Table {
    let mut t = Table::new(&["proj_x", "proj_z"]);
    for p in orbit {
        let (x, z) = classical::project(p);
        t.push(vec![x.into(), z.into()]);
    }
    t
}

fn emit_portrait(out: &mut Emitter, alpha: f64, stem: &str) -> Result<(), CliError> {
    let orbit = classical::orbit(&chaotic_sea_point(), alpha, PORTRAIT_POINTS - 1);
    out.table(stem, &projection_table(&orbit), &json!({ "alpha": alpha, "seed": chaotic_sea_point() }))?;
    let mut plot = Plot::new("projected chaotic orbit", "x R/r", "z R/r").dots();
    plot.add("orbit", orbit.iter().map(classical::project).collect());
    out.plot(stem, &plot)
}

fn run_classical(cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let p0 = cfg.state.expect("checked");
    match cfg.kind {
        ExperimentKind::ClassicalOrbit => {
            let orbit = classical::orbit(&p0, cfg.alpha, cfg.steps);
            out.table("orbit", &orbit_table(&orbit), &json!({ "alpha": cfg.alpha }))
        }
        ExperimentKind::Project => {
            let orbit = classical::orbit(&p0, cfg.alpha, cfg.steps);
            out.table("projection", &projection_table(&orbit), &json!({ "alpha": cfg.alpha }))?;
            let mut plot = Plot::new("projected orbit", "x R/r", "z R/r").dots();
            plot.add("orbit", orbit.iter().map(classical::project).collect());
            out.plot("projection", &plot)
        }
        _ => {
            let s = classical::sensitivity(&p0, cfg.alpha, cfg.steps, SensitivityOptions::default())?;
            let mut t = Table::new(&["t", "xi"]);
            for (step, xi) in s.steps.iter().zip(&s.xi) {
                t.push(vec![(*step).into(), (*xi).into()]);
            }
            out.table("sensitivity", &t, &json!({ "alpha": cfg.alpha }))?;
            out.json(
                "summary.json",
                &json!({ "lyapunov": s.lyapunov, "truncated_at": s.truncated_at,
                         "q_sen": s.q_sen, "lambda_q_sen": s.lambda_q_sen }),
            )
        }
    }
}

fn run_reproduce(target: Target, cfg: &ExperimentConfig, out: &mut Emitter) -> Result<(), CliError> {
    let pre = preset(target);
    match target {
        Target::Fig1 => {
            let spin = Spin::new(pre.spins[0])?;
            let q = Quantum::new(spin, pre.alpha, pre.deltas[0])?;
            let fixed = q.series(&ClassicalPoint::fixed_point(1.0), cfg.steps)?;
            let chaotic = q.series(&chaotic_sea_point(), cfg.steps)?;
            let m = json!({ "J": spin.j(), "alpha": pre.alpha, "delta": pre.deltas[0] });
            out.table("fig1_fixed_point", &series_table(&fixed), &m)?;
            out.table("fig1_chaotic", &series_table(&chaotic), &m)?;
            let opts = classify_options(cfg);
            out.json(
                "summary.json",
                &json!({
                    "fixed_point": { "classification": classify_decay(&fixed, &opts).ok(), "min_overlap": fixed.min_value() },
                    "chaotic": {
                        "state": chaotic_sea_point(),
                        "classification": classify_decay(&chaotic, &opts).ok(),
                        "short_time_exponent": short_time_exponent(&chaotic, 0.1).ok(),
                        "saturation": saturation_report(&chaotic, q.top.oo_dim(), cfg.tail_fraction).ok(),
                    },
                }),
            )?;
            let mut plot = Plot::new("overlap, J=480", "t", "O").log_log();
            plot.add("fixed point", series_points(&fixed));
            plot.add("chaotic sea", series_points(&chaotic));
            out.plot("fig1", &plot)
        }
        Target::Fig2 => emit_portrait(out, pre.alpha, "fig2"),
        Target::Fig3 => {
            let spin = Spin::new(pre.spins[0])?;
            let p = scan_line_point(PUBLISHED_EDGE_OFFSET_240)?;
            let top = KickedTop::new(spin)?;
            let state = oo_coherent_state(&top, &p)?;
            let mut fits = Vec::new();
            for (delta, window) in pre.deltas.iter().zip(&pre.windows) {
                let spec = KickedTopSpec::new(spin, pre.alpha, *delta)?;
                let series = fidelity_series_with(&top, &spec, &state, cfg.steps)?;
                let tag = format!("fig3_delta_{delta}");
                out.table(&tag, &series_table(&series), &json!({ "J": spin.j(), "delta": delta }))?;
                let fit = fit_qexp(&series, *window, TimePower::Two, &cfg.fit);
                if let Ok(f) = &fit {
                    out.table(&format!("{tag}_linearized"), &linearized_table(&series, f), &json!({ "delta": delta }))?;
                }
                let mut plot = Plot::new(&format!("edge state, delta={delta}"), "t", "O").log_log();
                plot.add("O(t)", series_points(&series));
                out.plot(&tag, &plot)?;
                fits.push(json!({
                    "delta": delta,
                    "window": window,
                    "fit": fit.as_ref().ok(),
                    "error": fit.as_ref().err().map(|e| e.to_string()),
                }));
            }
            out.json("summary.json", &json!({ "state": p, "offset": PUBLISHED_EDGE_OFFSET_240, "fits": fits }))
        }
        Target::Fig4 => {
            let table = table1_result(cfg, &pre.spins)?;
            emit_table1(out, &table, pre.alpha, false)
        }
        Target::Fig5 | Target::Table1 => {
            let table = table1_result(cfg, &pre.spins)?;
            emit_table1(out, &table, pre.alpha, false)
        }
        Target::Fig6 => {
            let table = table1_result(cfg, &pre.spins)?;
            emit_table1(out, &table, pre.alpha, true)
        }
    }
}

fn kind_name(kind: ExperimentKind) -> String {
    match kind {
        ExperimentKind::Build => "build".into(),
        ExperimentKind::Fidelity => "fidelity".into(),
        ExperimentKind::Fit => "fit".into(),
        ExperimentKind::Classify => "classify".into(),
        ExperimentKind::EdgeScan => "edge-scan".into(),
        ExperimentKind::DeltaSweep => "delta-sweep".into(),
        ExperimentKind::Table1 => "table1".into(),
        ExperimentKind::ClassicalOrbit => "classical orbit".into(),
        ExperimentKind::Sensitivity => "classical sensitivity".into(),
        ExperimentKind::Project => "classical project".into(),
        ExperimentKind::Reproduce(t) => format!("reproduce {}", t.name()),
    }
}

/// Runs `cfg`, writes every output plus `run.json` into `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunRecord, CliError> {
    let start = Instant::now();
    let mut out = Emitter::new(&cfg.out, cfg.format, cfg.svg)?;
    match cfg.kind {
        ExperimentKind::Build => run_build(cfg, &mut out)?,
        ExperimentKind::Fidelity => run_fidelity(cfg, &mut out)?,
        ExperimentKind::Fit => run_fit(cfg, &mut out)?,
        ExperimentKind::Classify => run_classify(cfg, &mut out)?,
        ExperimentKind::EdgeScan => run_edge_scan(cfg, &mut out)?,
        ExperimentKind::DeltaSweep => run_delta_sweep(cfg, &mut out)?,
        ExperimentKind::Table1 => run_table1(cfg, &mut out)?,
        ExperimentKind::ClassicalOrbit | ExperimentKind::Sensitivity | ExperimentKind::Project => {
            run_classical(cfg, &mut out)?
        }
        ExperimentKind::Reproduce(t) => run_reproduce(t, cfg, &mut out)?,
    }
    let record = RunRecord {
        command: kind_name(cfg.kind),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: out.into_entries(),
    };
    record.write(&cfg.out)?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_hold_published_parameters() {
        let f1 = preset(Target::Fig1);
        assert_eq!((f1.spins.as_slice(), f1.alpha, f1.deltas.as_slice()), (&[480][..], 3.0, &[0.005][..]));
        let f3 = preset(Target::Fig3);
        assert_eq!(f3.spins, vec![240]);
        assert_eq!(f3.deltas, vec![0.0003, 0.01]);
        assert_eq!(preset(Target::Fig4).spins, vec![120, 240, 360, 480]);
        assert_eq!(preset(Target::Table1).spins, vec![120, 150, 180, 210, 240, 280, 360, 480]);
    }

    #[test]
    fn chaotic_reference_is_classically_chaotic() {
        let s = classical::sensitivity(&chaotic_sea_point(), 3.0, 2000, SensitivityOptions::default()).unwrap();
        assert!(s.lyapunov > 0.1, "lyapunov {}", s.lyapunov);
    }
}
