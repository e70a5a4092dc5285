//! Locating the edge of quantum chaos and characterizing it under a range of
//! perturbation strengths.

use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalPoint, FIXED_POINT_XZ, FIXED_POINT_Y};
use crate::coherent::{coherent_state_at, project_oo, QuantumState};
use crate::evolution::{fidelity_series_with, plateau, OverlapSeries};
use crate::kicked_top::{critical_delta_for_spin, KickedTop, KickedTopSpec};
use crate::nonextensive::{
    classify_decay, fit_qexp, linear_regression, pre_plateau_window, ClassifyOptions, DecayClass, FitOptions,
    PowerLawStretch, QExpFit, TimePower,
};
use crate::{Error, Result, Spin};

/// Offset of the chaotic-sea reference state: the far end of the default scan band.
pub const CHAOTIC_SEA_OFFSET: f64 = 0.30;

/// Point on the scan line `y = y_f` at height `z_f - offset`, with `x > 0`.
pub fn scan_line_point(offset: f64) -> Result<ClassicalPoint> {
    ClassicalPoint::at_height(FIXED_POINT_Y, FIXED_POINT_XZ - offset)
}

/// Reference initial point in the chaotic sea.
pub fn chaotic_sea_point() -> ClassicalPoint {
    scan_line_point(CHAOTIC_SEA_OFFSET).expect("inside the sphere")
}

/// Options for [`scan_edge`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Heights are visited from `z_start` towards `z_end`.
    pub z_start: f64,
    pub z_end: f64,
    pub z_step: f64,
    pub steps: usize,
    pub classify: ClassifyOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            z_start: FIXED_POINT_XZ,
            z_end: FIXED_POINT_XZ - CHAOTIC_SEA_OFFSET,
            z_step: 0.002,
            steps: 3000,
            classify: ClassifyOptions::default(),
        }
    }
}

impl ScanOptions {
    /// Heights visited by the scan, starting at `z_start`.
    pub fn heights(&self) -> Result<Vec<f64>> {
        if !(self.z_step > 0.0 && self.z_step.is_finite()) {
            return Err(Error::InvalidInput(format!("z step must be positive, got {}", self.z_step)));
        }
        if !self.z_start.is_finite() || !self.z_end.is_finite() {
            return Err(Error::InvalidInput("scan bounds must be finite".into()));
        }
        let span = (self.z_end - self.z_start).abs();
        let sign = if self.z_end < self.z_start { -1.0 } else { 1.0 };
        let count = (span / self.z_step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.z_start + sign * self.z_step * i as f64).collect())
    }
}

/// Outcome of classifying one initial state of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub z: f64,
    /// Distance below the fixed point, `z_f - z`.
    pub offset: f64,
    pub class: Option<DecayClass>,
    pub fit: Option<QExpFit>,
    pub stretch: Option<PowerLawStretch>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeScanResult {
    pub j: u32,
    pub alpha: f64,
    pub delta: f64,
    pub points: Vec<ScanPoint>,
    pub edge_z: f64,
    pub edge_offset: f64,
}

impl EdgeScanResult {
    pub fn edge_point(&self) -> Result<ClassicalPoint> {
        ClassicalPoint::at_height(FIXED_POINT_Y, self.edge_z)
    }
}

/// Coherent state centred at `p`, projected onto the odd-odd block and renormalized.
pub fn oo_coherent_state(top: &KickedTop, p: &ClassicalPoint) -> Result<QuantumState> {
    let cs = coherent_state_at(top.spin(), p)?;
    Ok(project_oo(&cs, top.decomposition(), true)?.state)
}

fn scan_point(top: &KickedTop, spec: &KickedTopSpec, z: f64, opts: &ScanOptions) -> ScanPoint {
    let mut point = ScanPoint { z, offset: FIXED_POINT_XZ - z, class: None, fit: None, stretch: None, error: None };
    let outcome = ClassicalPoint::at_height(FIXED_POINT_Y, z)
        .and_then(|p| oo_coherent_state(top, &p))
        .and_then(|state| fidelity_series_with(top, spec, &state, opts.steps))
        .and_then(|series| classify_decay(&series, &opts.classify));
    match outcome {
        Ok(c) => {
            point.class = Some(c.class);
            point.fit = c.qexp;
            point.stretch = c.stretch;
        }
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

#[cfg(feature = "parallel")]
fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Edge state among scanned points: the power-law point with the longest
/// log–log stretch, preferring the one closest to the fixed point on ties.
pub fn select_edge(points: &[ScanPoint]) -> Option<&ScanPoint> {
    let mut best: Option<&ScanPoint> = None;
    for p in points {
        if !p.class.is_some_and(|c| c.is_power_law()) {
            continue;
        }
        let Some(s) = p.stretch else { continue };
        best = match best {
            None => Some(p),
            Some(b) => {
                let bd = b.stretch.map_or(0.0, |s| s.decades);
                let closer = p.offset.abs() < b.offset.abs();
                if s.decades > bd + 1e-12 || ((s.decades - bd).abs() <= 1e-12 && closer) {
                    Some(p)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Scan initial states along `y = y_f` and locate the edge of quantum chaos.
pub fn scan_edge(top: &KickedTop, alpha: f64, delta: f64, opts: &ScanOptions) -> Result<EdgeScanResult> {
    let spec = KickedTopSpec::new(top.spin(), alpha, delta)?;
    let zs = opts.heights()?;
    let points = map_ordered(&zs, |z| scan_point(top, &spec, *z, opts));
    let Some(edge) = select_edge(&points) else {
        let listing: Vec<String> = points
            .iter()
            .map(|p| {
                let class = p.class.map_or("error", |c| c.name());
                format!("{:.4}:{class}", p.z)
            })
            .collect();
        return Err(Error::EdgeNotFound(listing.join(" ")));
    };
    let (edge_z, edge_offset) = (edge.z, edge.offset);
    Ok(EdgeScanResult { j: top.spin().j(), alpha, delta, points, edge_z, edge_offset })
}

/// Options for [`delta_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// The fit uses times up to `horizon / δ`, so every δ sees the same
    /// part of its decay when `τ` scales as `1/δ`. The series is run for
    /// that many steps, clamped to `[min_steps, max_steps]`.
    pub horizon: f64,
    pub min_steps: usize,
    pub max_steps: usize,
    /// Fixed fit window; when absent the pre-plateau window of each series is used.
    pub window: Option<(usize, usize)>,
    pub tail_fraction: f64,
    pub fit: FitOptions,
    /// Half-width of the terminal plateau used to detect saturation.
    pub saturation_band: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            min_steps: 400,
            max_steps: 12_000,
            window: None,
            tail_fraction: 0.2,
            fit: FitOptions::default(),
            saturation_band: 0.15,
        }
    }
}

impl SweepOptions {
    pub fn steps_for(&self, delta: f64) -> usize {
        let raw = (self.horizon / delta).ceil();
        if raw.is_finite() {
            (raw as usize).clamp(self.min_steps, self.max_steps)
        } else {
            self.max_steps
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub steps: usize,
    pub window: Option<(usize, usize)>,
    pub fit: Option<QExpFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSweepResult {
    pub j: u32,
    pub edge_state: ClassicalPoint,
    pub points: Vec<SweepPoint>,
    pub delta_c: f64,
    pub q_rel_c: Option<f64>,
    /// Start of the terminal plateau, when one is detected.
    pub delta_s: Option<f64>,
    pub q_rel_s: Option<f64>,
    /// Least-squares slope of `ln τ` against `ln δ`. Undefined with fewer
    /// than two successful fits.
    pub tau_slope: Option<f64>,
}

impl DeltaSweepResult {
    pub fn deltas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.delta).collect()
    }

    /// `(δ, q_rel, τ)` for every successful fit.
    pub fn fitted(&self) -> Vec<(f64, f64, f64)> {
        self.points.iter().filter_map(|p| p.fit.map(|f| (p.delta, f.q_rel, f.tau))).collect()
    }

    pub fn saturation_detected(&self) -> bool {
        self.q_rel_s.is_some()
    }
}

/// Fit window for a sweep series: the pre-plateau region, or the whole
/// series when that region is too short to fit.
pub fn sweep_window(series: &OverlapSeries, tail_fraction: f64) -> Result<(usize, usize)> {
    let p = plateau(series, tail_fraction)?;
    let w = pre_plateau_window(series, p);
    if series.window(w.0, w.1).count() < 10 {
        Ok((series.steps[0], *series.steps.last().expect("non-empty")))
    } else {
        Ok(w)
    }
}

fn sweep_point(top: &KickedTop, alpha: f64, state: &QuantumState, delta: f64, opts: &SweepOptions) -> SweepPoint {
    let steps = opts.steps_for(delta);
    let mut point = SweepPoint { delta, steps, window: None, fit: None, error: None };
    let outcome = KickedTopSpec::new(top.spin(), alpha, delta)
        .and_then(|spec| fidelity_series_with(top, &spec, state, steps))
        .and_then(|series| {
            let window = match opts.window {
                Some(w) => w,
                None => {
                    let (lo, hi) = sweep_window(&series, opts.tail_fraction)?;
                    let cap = (opts.horizon / delta).ceil();
                    (lo, if cap < hi as f64 { (cap as usize).max(lo + 10) } else { hi })
                }
            };
            point.window = Some(window);
            fit_qexp(&series, window, TimePower::Two, &opts.fit)
        });
    match outcome {
        Ok(f) => point.fit = Some(f),
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

/// Terminal plateau of a q sequence: the longest run at the end whose values
/// all lie within `band` of the run mean, if it has at least three entries.
fn terminal_plateau(qs: &[(f64, f64)], band: f64) -> Option<(f64, f64)> {
    if qs.len() < 3 {
        return None;
    }
    let within = |run: &[(f64, f64)]| {
        let mean = run.iter().map(|r| r.1).sum::<f64>() / run.len() as f64;
        run.iter().all(|r| (r.1 - mean).abs() <= band).then_some(mean)
    };
    let mut start = qs.len() - 3;
    let mut mean = within(&qs[start..])?;
    while start > 0 {
        match within(&qs[start - 1..]) {
            Some(m) => {
                start -= 1;
                mean = m;
            }
            None => break,
        }
    }
    Some((qs[start].0, mean))
}

/// Fit the overlap decay of `edge_state` for each perturbation strength.
pub fn delta_sweep(
    top: &KickedTop,
    alpha: f64,
    edge_state: &ClassicalPoint,
    deltas: &[f64],
    opts: &SweepOptions,
) -> Result<DeltaSweepResult> {
    if deltas.is_empty() {
        return Err(Error::InvalidInput("delta list is empty".into()));
    }
    if deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::InvalidInput("deltas must be positive".into()));
    }
    if deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("deltas must be strictly increasing".into()));
    }
    let state = oo_coherent_state(top, edge_state)?;
    let points = map_ordered(deltas, |d| sweep_point(top, alpha, &state, *d, opts));

    let delta_c = critical_delta_for_spin(top.spin());
    let fitted: Vec<(f64, f64, f64)> = points.iter().filter_map(|p| p.fit.map(|f| (p.delta, f.q_rel, f.tau))).collect();
    let below: Vec<f64> = fitted.iter().filter(|f| f.0 < delta_c).map(|f| f.1).collect();
    let q_rel_c = (!below.is_empty()).then(|| below.iter().sum::<f64>() / below.len() as f64);

    let above: Vec<(f64, f64)> = fitted.iter().filter(|f| f.0 > delta_c).map(|f| (f.0, f.1)).collect();
    let (delta_s, q_rel_s) = match terminal_plateau(&above, opts.saturation_band) {
        Some((d, q)) => (Some(d), Some(q)),
        None => (None, None),
    };

    let logs: Vec<(f64, f64)> =
        fitted.iter().filter(|f| f.2 > 0.0 && f.2.is_finite()).map(|f| (f.0.ln(), f.2.ln())).collect();
    let tau_slope = (logs.len() >= 2).then(|| linear_regression(&logs).slope);

    Ok(DeltaSweepResult {
        j: top.spin().j(),
        edge_state: *edge_state,
        points,
        delta_c,
        q_rel_c,
        delta_s,
        q_rel_s,
        tau_slope,
    })
}

/// `count` log-spaced values between `lo` and `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
        }
    }
}

/// Options for [`table1`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    /// Perturbation used while scanning for the edge, the same for every spin.
    pub scan_delta: f64,
    pub scan: ScanOptions,
    /// Sweep range, as multiples of the critical perturbation.
    pub sweep_lo: f64,
    pub sweep_hi: f64,
    pub sweep_points: usize,
    pub sweep: SweepOptions,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            scan_delta: 0.01,
            scan: ScanOptions::default(),
            sweep_lo: 0.1,
            sweep_hi: 10.0,
            sweep_points: 9,
            sweep: SweepOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub j: u32,
    pub edge_offset: f64,
    pub delta_c: f64,
    pub q_rel_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableFailure {
    pub j: u32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Table {
    pub rows: Vec<TableRow>,
    pub failures: Vec<TableFailure>,
    pub scans: Vec<EdgeScanResult>,
    pub sweeps: Vec<DeltaSweepResult>,
}

impl Table {
    /// `(1/J, q_rel_c)` for rows with a critical-plateau estimate.
    pub fn inverse_j_vs_q(&self) -> Vec<(f64, f64)> {
        self.rows.iter().filter_map(|r| r.q_rel_c.map(|q| (1.0 / r.j as f64, q))).collect()
    }

    /// `(edge_offset, 1/J)` for every row.
    pub fn offset_vs_inverse_j(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.edge_offset, 1.0 / r.j as f64)).collect()
    }
}

fn table_row(j: u32, alpha: f64, opts: &TableOptions) -> Result<(TableRow, EdgeScanResult, DeltaSweepResult)> {
    let spin = Spin::new(j)?;
    let top = KickedTop::new(spin)?;
    let delta_c = critical_delta_for_spin(spin);
    let scan = scan_edge(&top, alpha, opts.scan_delta, &opts.scan)?;
    let edge = scan.edge_point()?;
    let deltas = log_spaced(opts.sweep_lo * delta_c, opts.sweep_hi * delta_c, opts.sweep_points);
    let sweep = delta_sweep(&top, alpha, &edge, &deltas, &opts.sweep)?;
    let row = TableRow { j, edge_offset: scan.edge_offset, delta_c, q_rel_c: sweep.q_rel_c };
    Ok((row, scan, sweep))
}

/// Edge offset, critical perturbation and critical q for each spin.
/// Failures for one spin are recorded and the remaining spins still run.
pub fn table1(j_list: &[u32], alpha: f64, opts: &TableOptions) -> Table {
    let mut table = Table::default();
    for &j in j_list {
        match table_row(j, alpha, opts) {
            Ok((row, scan, sweep)) => {
                table.rows.push(row);
                table.scans.push(scan);
                table.sweeps.push(sweep);
            }
            Err(e) => table.failures.push(TableFailure { j, reason: e.to_string() }),
        }
    }
    table
}
