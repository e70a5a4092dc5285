//! Nonextensive entropy, the q-logarithm/q-exponential pair, and the
//! relaxation fits used to classify overlap decay.
//!
//! The q-exponential fit linearizes the data: for the right entropic index
//! `q`, `ln_q O` is a straight line in `t²` (or `t`) with slope `-1/τ²`
//! (or `-1/τ`). `q` is chosen on a grid by the coefficient of
//! determination of that line and then refined by golden-section search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{self, OverlapSeries};

/// `|q - 1|` below which the Boltzmann–Gibbs limits are used.
const Q_ONE_BAND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityDistribution {
    probs: Vec<f64>,
    k: f64,
}

impl ProbabilityDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_constant(probs, 1.0)
    }

    pub fn with_constant(probs: Vec<f64>, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("entropy constant must be positive, got {k}")));
        }
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidInput("probabilities must be non-negative and finite".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        Ok(ProbabilityDistribution { probs, k })
    }

    pub fn uniform(w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::InvalidInput("uniform distribution needs W >= 1".into()));
        }
        Self::new(vec![1.0 / w as f64; w])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Joint distribution of two independent systems, `p(a, b) = p(a) p(b)`.
    pub fn product(&self, other: &ProbabilityDistribution) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::InvalidInput("entropy constants differ".into()));
        }
        let probs = self.probs.iter().flat_map(|a| other.probs.iter().map(move |b| a * b)).collect();
        let total: f64 = self.probs.iter().sum::<f64>() * other.probs.iter().sum::<f64>();
        let probs: Vec<f64> = probs;
        // products of exact unit sums can drift by an ulp or two
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(ProbabilityDistribution { probs, k: self.k })
    }
}

/// `S_q = k (1 - Σ p^q) / (q - 1)`, with `S_1 = -k Σ p ln p` and `0 ln 0 = 0`.
pub fn s_q(dist: &ProbabilityDistribution, q: f64) -> f64 {
    let k = dist.k;
    if (q - 1.0).abs() < Q_ONE_BAND {
        return -k * dist.probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>();
    }
    // zero probabilities contribute nothing for q > 0
    let sum: f64 = dist.probs.iter().filter(|p| **p > 0.0).map(|p| p.powf(q)).sum();
    k * (1.0 - sum) / (q - 1.0)
}

/// `ln_q x = (x^{1-q} - 1) / (1 - q)`.
pub fn ln_q(x: f64, q: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("ln_q undefined for x = {x}")));
    }
    Ok(ln_q_unchecked(x, q))
}

fn ln_q_unchecked(x: f64, q: f64) -> f64 {
    let a = 1.0 - q;
    if a.abs() < Q_ONE_BAND {
        x.ln()
    } else {
        // exp_m1 keeps precision for x near 1
        (a * x.ln()).exp_m1() / a
    }
}

/// `e_q(x) = [1 + (1 - q) x]^{1/(1-q)}`, and 0 where the bracket is negative.
pub fn e_q(x: f64, q: f64) -> f64 {
    let a = 1.0 - q;
    if a.abs() < Q_ONE_BAND {
        return x.exp();
    }
    let base = 1.0 + a * x;
    if base < 0.0 {
        0.0
    } else if base == 0.0 {
        if 1.0 / a > 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (a * x).ln_1p().mul_add(1.0 / a, 0.0).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope x + intercept`. A perfectly flat `y`
/// gets `R² = 1`.
pub fn linear_regression(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 && sxx > 0.0 {
        ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0)
    } else if syy == 0.0 {
        1.0
    } else {
        0.0
    };
    LinearFit { slope, intercept, r_squared }
}

/// Exponent of `t` in the linearized q-exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimePower {
    /// `ln_q ξ` linear in `t` (sensitivity growth).
    One,
    /// `ln_q O` linear in `t²` (overlap relaxation).
    Two,
}

impl TimePower {
    pub fn exponent(self) -> i32 {
        match self {
            TimePower::One => 1,
            TimePower::Two => 2,
        }
    }
}

/// Grid and refinement settings for [`fit_qexp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub q_lo: f64,
    pub q_hi: f64,
    pub q_step: f64,
    /// Width of the final golden-section bracket.
    pub refine_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { q_lo: 1.05, q_hi: 8.0, q_step: 0.05, refine_tol: 1e-4 }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.q_lo.is_finite()
            && self.q_hi.is_finite()
            && self.q_lo <= self.q_hi
            && (self.q_step > 0.0 || self.q_lo == self.q_hi)
            && self.refine_tol > 0.0;
        if !ok {
            return Err(Error::InvalidInput(format!("bad q grid {self:?}")));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        if self.q_lo == self.q_hi {
            return vec![self.q_lo];
        }
        let n = ((self.q_hi - self.q_lo) / self.q_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.q_lo + i as f64 * self.q_step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QExpFit {
    pub q_rel: f64,
    pub tau: f64,
    pub window: (usize, usize),
    pub time_power: TimePower,
    /// R² of the linearized regression.
    pub linearity: f64,
}

impl QExpFit {
    /// Model value `e_q(-(t/τ)^p)`.
    pub fn predict(&self, t: f64) -> f64 {
        e_q(-(t / self.tau).powi(self.time_power.exponent()), self.q_rel)
    }
}

fn windowed(series: &OverlapSeries, window: (usize, usize), min_points: usize) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if lo >= hi {
        return Err(Error::Fit(format!("empty window {lo}..{hi}")));
    }
    let pts: Vec<(f64, f64)> = series.window(lo, hi).map(|(t, o)| (t as f64, o)).collect();
    if pts.len() < min_points {
        return Err(Error::Fit(format!("window {lo}..{hi} holds {} points, need {min_points}", pts.len())));
    }
    if let Some((t, o)) = pts.iter().find(|(_, o)| !(*o > 0.0)) {
        return Err(Error::Fit(format!("non-positive overlap {o} at t = {t}")));
    }
    Ok(pts)
}

fn linearized(pts: &[(f64, f64)], q: f64, power: i32, buf: &mut Vec<(f64, f64)>) -> LinearFit {
    buf.clear();
    buf.extend(pts.iter().map(|&(t, o)| (t.powi(power), ln_q_unchecked(o, q))));
    linear_regression(buf)
}

/// Fits `O(t) = e_q(-(t/τ)^p)` on `window` (inclusive step bounds).
pub fn fit_qexp(series: &OverlapSeries, window: (usize, usize), time_power: TimePower, opts: &FitOptions) -> Result<QExpFit> {
    opts.validate()?;
    let pts = windowed(series, window, 5)?;
    let power = time_power.exponent();
    let mut buf = Vec::with_capacity(pts.len());
    let mut score = |q: f64| {
        let fit = linearized(&pts, q, power, &mut buf);
        if fit.r_squared.is_finite() { fit.r_squared } else { -1.0 }
    };

    let grid = opts.grid();
    let (mut best_q, mut best_r2) = (grid[0], f64::NEG_INFINITY);
    for &q in &grid {
        let r2 = score(q);
        if r2 > best_r2 {
            best_q = q;
            best_r2 = r2;
        }
    }

    if grid.len() > 1 {
        // golden-section on the bracket around the best grid point
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut a = (best_q - opts.q_step).max(opts.q_lo);
        let mut b = (best_q + opts.q_step).min(opts.q_hi);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (score(c), score(d));
        while b - a > opts.refine_tol {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = score(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = score(d);
            }
        }
        let q_mid = 0.5 * (a + b);
        let r2_mid = score(q_mid);
        if r2_mid >= best_r2 {
            best_q = q_mid;
            best_r2 = r2_mid;
        }
    }

    let fit = linearized(&pts, best_q, power, &mut buf);
    if !(fit.slope < 0.0) {
        return Err(Error::Fit(format!("linearized slope {} is not negative", fit.slope)));
    }
    let tau = match time_power {
        TimePower::Two => (-1.0 / fit.slope).sqrt(),
        TimePower::One => -1.0 / fit.slope,
    };
    Ok(QExpFit { q_rel: best_q, tau, window, time_power, linearity: best_r2.clamp(0.0, 1.0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    /// Decay rate per step, `O ≈ A e^{-Γ t}`.
    pub rate: f64,
    pub window: (usize, usize),
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    /// Coefficient of `t²`, `O ≈ A e^{-w t²}`.
    pub width: f64,
    pub window: (usize, usize),
    pub r_squared: f64,
}

pub fn fit_exponential(series: &OverlapSeries, window: (usize, usize)) -> Result<ExponentialFit> {
    let pts: Vec<(f64, f64)> = windowed(series, window, 5)?.into_iter().map(|(t, o)| (t, o.ln())).collect();
    let fit = linear_regression(&pts);
    Ok(ExponentialFit { rate: (-fit.slope).max(0.0), window, r_squared: fit.r_squared })
}

pub fn fit_gaussian(series: &OverlapSeries, window: (usize, usize)) -> Result<GaussianFit> {
    let pts: Vec<(f64, f64)> = windowed(series, window, 5)?.into_iter().map(|(t, o)| (t * t, o.ln())).collect();
    let fit = linear_regression(&pts);
    Ok(GaussianFit { width: (-fit.slope).max(0.0), window, r_squared: fit.r_squared })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum DecayClass {
    Regular,
    Gaussian,
    Exponential,
    PowerLaw { q_rel: f64 },
}

impl DecayClass {
    pub fn name(&self) -> &'static str {
        match self {
            DecayClass::Regular => "regular",
            DecayClass::Gaussian => "gaussian",
            DecayClass::Exponential => "exponential",
            DecayClass::PowerLaw { .. } => "power_law",
        }
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self, DecayClass::PowerLaw { .. })
    }
}

/// Longest stretch over which `ln O` is linear in `ln t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawStretch {
    pub t_start: usize,
    pub t_end: usize,
    pub decades: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// A series whose minimum stays above this is regular.
    pub regular_floor: f64,
    pub tail_fraction: f64,
    /// Minimum R² of a log–log stretch.
    pub loglog_r2: f64,
    /// Minimum extent of the log–log stretch, in decades of `t`.
    pub min_decades: f64,
    pub fit: FitOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            regular_floor: 0.9,
            tail_fraction: evolution::DEFAULT_TAIL_FRACTION,
            loglog_r2: 0.98,
            min_decades: 0.5,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayClassification {
    pub class: DecayClass,
    /// Steps used for the competing fits.
    pub window: Option<(usize, usize)>,
    pub plateau: f64,
    pub gaussian: Option<GaussianFit>,
    pub exponential: Option<ExponentialFit>,
    pub qexp: Option<QExpFit>,
    pub stretch: Option<PowerLawStretch>,
    /// Goodness of each model measured on `O` itself, so the three are comparable.
    pub scores: ModelScores,
}

/// R² of each decay model against the overlap values in the fit window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelScores {
    pub gaussian: Option<f64>,
    pub exponential: Option<f64>,
    pub qexp: Option<f64>,
}

/// Fits `fwd(O)` linearly against `x(t)` and scores `inv` of that line
/// against `O`.
fn overlap_r_squared(
    pts: &[(f64, f64)],
    x: impl Fn(f64) -> f64,
    fwd: impl Fn(f64) -> f64,
    inv: impl Fn(f64) -> f64,
) -> Option<f64> {
    let lin: Vec<(f64, f64)> = pts.iter().map(|&(t, o)| (x(t), fwd(o))).collect();
    let fit = linear_regression(&lin);
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (&(_, o), (xt, _)) in pts.iter().zip(&lin) {
        ss_res += (o - inv(fit.intercept + fit.slope * xt)).powi(2);
        ss_tot += (o - mean).powi(2);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    r2.is_finite().then_some(r2)
}

/// Plateau level below which the "within a factor 2" rule of
/// [`pre_plateau_window`] applies.
pub const LOW_PLATEAU: f64 = 0.25;

/// Running mean over the log-time window `[i / 1.2, i * 1.2]`.
fn log_smoothed(values: &[f64]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + v);
    }
    (0..values.len())
        .map(|i| {
            let lo = (i as f64 / 1.2).floor() as usize;
            let hi = ((i as f64 * 1.2).ceil() as usize).min(values.len() - 1).max(i);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}

/// Start and end (inclusive steps) of the region before the series settles
/// onto its plateau `p`.
///
/// The series is smoothed on a logarithmic time scale. The decay is taken to
/// be over at the last new minimum of the smoothed curve that is not
/// followed by another one within a doubling of time. When the plateau is
/// low the region also ends where the smoothed curve first comes within a
/// factor 2 of it.
pub fn pre_plateau_window(series: &OverlapSeries, plateau: f64) -> (usize, usize) {
    let first = series.steps.first().copied().unwrap_or(0);
    if series.values.is_empty() {
        return (first, first);
    }
    let smooth = log_smoothed(&series.values);
    let mut best = 0usize;
    for (i, v) in smooth.iter().enumerate() {
        if *v < smooth[best] {
            best = i;
        }
        if i >= 2 * best.max(5) {
            break;
        }
    }
    let mut cut = best;
    if plateau < LOW_PLATEAU {
        if let Some(i) = smooth.iter().position(|v| *v <= 2.0 * plateau) {
            cut = cut.min(i);
        }
    }
    (first, series.steps[cut].max(first))
}

/// Longest window of log-spaced points on which `ln O` vs `ln t` has
/// `R² >= r2_min`, looking only where `O` has dropped below `ceiling`.
pub fn power_law_stretch(series: &OverlapSeries, window: (usize, usize), ceiling: f64, r2_min: f64) -> Option<PowerLawStretch> {
    // thin to ~20 points per decade so dense late times do not dominate
    let mut pts: Vec<(usize, f64, f64)> = Vec::new();
    let mut last_log = f64::NEG_INFINITY;
    for (t, o) in series.window(window.0.max(1), window.1) {
        if o >= ceiling || o <= 0.0 {
            continue;
        }
        let lt = (t as f64).ln();
        if lt - last_log >= std::f64::consts::LN_10 / 20.0 {
            pts.push((t, lt, o.ln()));
            last_log = lt;
        }
    }
    let mut best: Option<PowerLawStretch> = None;
    let mut buf = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        for k in (i + 4..pts.len()).rev() {
            let decades = (pts[k].1 - pts[i].1) / std::f64::consts::LN_10;
            if best.is_some_and(|b| decades <= b.decades) {
                break;
            }
            buf.clear();
            buf.extend(pts[i..=k].iter().map(|p| (p.1, p.2)));
            let fit = linear_regression(&buf);
            if fit.r_squared >= r2_min && fit.slope < 0.0 {
                best = Some(PowerLawStretch {
                    t_start: pts[i].0,
                    t_end: pts[k].0,
                    decades,
                    exponent: fit.slope,
                    r_squared: fit.r_squared,
                });
                break;
            }
        }
    }
    best
}

/// Regular, Gaussian, exponential or power-law (q-exponential) decay.
pub fn classify_decay(series: &OverlapSeries, opts: &ClassifyOptions) -> Result<DecayClassification> {
    if series.len() < 50 {
        return Err(Error::InsufficientData { needed: 50, got: series.len() });
    }
    let plateau = evolution::plateau(series, opts.tail_fraction)?;
    let mut out = DecayClassification {
        class: DecayClass::Regular,
        window: None,
        plateau,
        gaussian: None,
        exponential: None,
        qexp: None,
        stretch: None,
        scores: ModelScores::default(),
    };
    if series.min_value() > opts.regular_floor {
        return Ok(out);
    }

    let mut window = pre_plateau_window(series, plateau);
    if series.window(window.0, window.1).count() < 10 {
        window = (series.steps[0], *series.steps.last().expect("non-empty"));
    }
    out.window = Some(window);
    out.gaussian = fit_gaussian(series, window).ok();
    out.exponential = fit_exponential(series, window).ok();
    out.qexp = fit_qexp(series, window, TimePower::Two, &opts.fit).ok();
    out.stretch = power_law_stretch(series, window, opts.regular_floor, opts.loglog_r2);

    if let Ok(pts) = windowed(series, window, 5) {
        out.scores.gaussian = overlap_r_squared(&pts, |t| t * t, f64::ln, f64::exp);
        out.scores.exponential = overlap_r_squared(&pts, |t| t, f64::ln, f64::exp);
        // the family is scored at its best member over the q grid
        out.scores.qexp = opts
            .fit
            .grid()
            .into_iter()
            .filter_map(|q| overlap_r_squared(&pts, |t| t * t, |o| ln_q_unchecked(o, q), |y| e_q(y, q)))
            .reduce(f64::max);
    }
    let g = out.scores.gaussian.unwrap_or(f64::NEG_INFINITY);
    let e = out.scores.exponential.unwrap_or(f64::NEG_INFINITY);
    let q = out.scores.qexp.unwrap_or(f64::NEG_INFINITY);
    let stretch_ok = out.stretch.is_some_and(|s| s.decades >= opts.min_decades);

    out.class = if q > g && q > e && stretch_ok {
        DecayClass::PowerLaw { q_rel: out.qexp.expect("scored").q_rel }
    } else if e >= g {
        DecayClass::Exponential
    } else {
        DecayClass::Gaussian
    };
    Ok(out)
}
