//! The classical kicked top on the unit sphere: map, orbits, the equal-area
//! style projection used for phase-space portraits, and two-trajectory
//! sensitivity to initial conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::OverlapSeries;
use crate::nonextensive::{self, QExpFit, TimePower};

/// Input points may miss the unit sphere by this much; they are projected
/// back onto it on construction.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-6;

/// Coordinates of the positive order-one fixed point for `α = 3`.
pub const FIXED_POINT_XZ: f64 = 0.6294126;
pub const FIXED_POINT_Y: f64 = 0.4557187;

/// A point on the unit sphere `x² + y² + z² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ClassicalPoint {
    /// Accepts coordinates within [`INPUT_NORM_TOLERANCE`] of the sphere and
    /// rescales them onto it.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n2 = x * x + y * y + z * z;
        if !n2.is_finite() || (n2 - 1.0).abs() > INPUT_NORM_TOLERANCE {
            return Err(Error::InvalidPoint(format!("({x}, {y}, {z}) is not on the unit sphere (|r|² = {n2})")));
        }
        Ok(Self::from_raw(x, y, z))
    }

    /// Projects any nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n2 = x * x + y * y + z * z;
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(Error::InvalidPoint(format!("cannot normalize ({x}, {y}, {z})")));
        }
        Ok(Self::from_raw(x, y, z))
    }

    fn from_raw(x: f64, y: f64, z: f64) -> Self {
        let n = (x * x + y * y + z * z).sqrt();
        ClassicalPoint { x: x / n, y: y / n, z: z / n }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Great-circle distance.
    pub fn geodesic_distance(&self, other: &ClassicalPoint) -> f64 {
        // atan2 form stays accurate for tiny separations
        let cross = [
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        ];
        let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        let cos = self.x * other.x + self.y * other.y + self.z * other.z;
        sin.atan2(cos)
    }

    /// The positive (`sign = 1`) or negative order-one fixed point for `α = 3`.
    pub fn fixed_point(sign: f64) -> Self {
        let s = sign.signum();
        Self::from_raw(s * FIXED_POINT_XZ, FIXED_POINT_Y, s * FIXED_POINT_XZ)
    }

    /// Point on the sphere at height `z` with `y` held fixed, taking the
    /// positive `x` root.
    pub fn at_height(y: f64, z: f64) -> Result<Self> {
        let x2 = 1.0 - y * y - z * z;
        if !(x2 >= 0.0) {
            return Err(Error::InvalidPoint(format!("no point with y = {y}, z = {z} on the unit sphere")));
        }
        Ok(Self::from_raw(x2.sqrt(), y, z))
    }
}

/// One application of the map: a twist about z by `α z`, then a quarter
/// turn about y.
pub fn step(p: &ClassicalPoint, alpha: f64) -> ClassicalPoint {
    let (s, c) = (alpha * p.z).sin_cos();
    ClassicalPoint { x: p.z, y: p.x * s + p.y * c, z: -p.x * c + p.y * s }
}

/// `n` iterations, returned together with the starting point.
pub fn orbit(p0: &ClassicalPoint, alpha: f64, n: usize) -> Vec<ClassicalPoint> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(*p0);
    let mut p = *p0;
    for _ in 0..n {
        p = step(&p, alpha);
        out.push(p);
    }
    out
}

/// Projects onto the x–z plane, scaling by `R/r` with `R = sqrt(2(1-|y|))`
/// and `r = sqrt(1-y²)`. `R/r = sqrt(2/(1+|y|))`, which is finite at the
/// poles `y = ±1`.
pub fn project(p: &ClassicalPoint) -> (f64, f64) {
    let s = (2.0 / (1.0 + p.y.abs())).sqrt();
    (p.x * s, p.z * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityOptions {
    pub d0: f64,
    /// Separation at which the linearized regime is considered broken.
    pub saturation: f64,
    /// Renormalization interval for the long-run Lyapunov estimate.
    pub renorm_interval: usize,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        SensitivityOptions { d0: 1e-9, saturation: 0.1, renorm_interval: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySeries {
    pub steps: Vec<usize>,
    /// Raw separation ratio `Δ(t) / Δ(0)`.
    pub xi: Vec<f64>,
    /// Lyapunov exponent per step from the renormalized two-trajectory run.
    pub lyapunov: f64,
    /// `Some(t)` if the raw separation exceeded the saturation threshold at `t`
    /// and the series was cut there.
    pub truncated_at: Option<usize>,
    /// Power-law (q-exponential in `t`) fit to the growth of `ξ`, when the
    /// series supports one.
    pub q_sen: Option<f64>,
    pub lambda_q_sen: Option<f64>,
}

/// Tangent displacement of size `d` at `p`, perpendicular to `p` and lying
/// in the plane spanned by `p` and a fixed generic direction.
fn displaced(p: &ClassicalPoint, d: f64) -> ClassicalPoint {
    let a = [0.36, -0.48, 0.8];
    let dot = a[0] * p.x + a[1] * p.y + a[2] * p.z;
    let mut t = [a[0] - dot * p.x, a[1] - dot * p.y, a[2] - dot * p.z];
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    if tn < 1e-6 {
        // a is parallel to p; any orthogonal direction works
        t = [p.y, -p.x, 0.0];
        if p.x.abs() + p.y.abs() < 1e-6 {
            t = [1.0, 0.0, 0.0];
        }
    }
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    let (c, s) = (d.cos(), d.sin());
    ClassicalPoint::from_raw(
        c * p.x + s * t[0] / tn,
        c * p.y + s * t[1] / tn,
        c * p.z + s * t[2] / tn,
    )
}

/// Moves `q` back to geodesic distance `d` from `p` along the same great circle.
fn pull_back(p: &ClassicalPoint, q: &ClassicalPoint, d: f64) -> ClassicalPoint {
    let dot = p.x * q.x + p.y * q.y + p.z * q.z;
    let t = [q.x - dot * p.x, q.y - dot * p.y, q.z - dot * p.z];
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    if tn == 0.0 {
        return displaced(p, d);
    }
    let (c, s) = (d.cos(), d.sin());
    ClassicalPoint::from_raw(c * p.x + s * t[0] / tn, c * p.y + s * t[1] / tn, c * p.z + s * t[2] / tn)
}

/// Separation ratio of two initially close trajectories.
///
/// `ξ(t)` is the raw geodesic separation ratio; the neighbour is only
/// re-projected onto the sphere. A separate renormalized run estimates
/// `λ₁`. A q-exponential in `t` is fitted to `1/ξ` when the raw series is
/// long enough, giving `q_sen` and `λ_{q_sen}`.
pub fn sensitivity(p0: &ClassicalPoint, alpha: f64, n: usize, opts: SensitivityOptions) -> Result<SensitivitySeries> {
    if !(opts.d0 > 0.0 && opts.d0 < opts.saturation) {
        return Err(Error::InvalidInput(format!("initial separation {} must be in (0, {})", opts.d0, opts.saturation)));
    }
    if n == 0 {
        return Err(Error::InvalidInput("sensitivity needs at least one step".into()));
    }

    let mut steps = vec![0];
    let mut xi = vec![1.0];
    let mut truncated_at = None;
    let (mut a, mut b) = (*p0, displaced(p0, opts.d0));
    for t in 1..=n {
        a = step(&a, alpha);
        b = step(&b, alpha);
        let d = a.geodesic_distance(&b);
        if d > opts.saturation {
            truncated_at = Some(t);
            break;
        }
        steps.push(t);
        xi.push(d / opts.d0);
    }

    // Benettin-style renormalized estimate
    let interval = opts.renorm_interval.max(1);
    let (mut a, mut b) = (*p0, displaced(p0, opts.d0));
    let mut log_sum = 0.0;
    for t in 1..=n {
        a = step(&a, alpha);
        b = step(&b, alpha);
        if t % interval == 0 || t == n {
            let d = a.geodesic_distance(&b);
            log_sum += (d / opts.d0).ln();
            b = pull_back(&a, &b, opts.d0);
        }
    }
    let lyapunov = log_sum / n as f64;

    let (q_sen, lambda_q_sen) = match fit_sensitivity(&steps, &xi) {
        Some(fit) => (Some(fit.q), Some(fit.lambda)),
        None => (None, None),
    };

    Ok(SensitivitySeries { steps, xi, lyapunov, truncated_at, q_sen, lambda_q_sen })
}

/// Parameters of `ξ = e_q(λ t)` for `q < 1` growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityFit {
    pub q: f64,
    pub lambda: f64,
    pub r_squared: f64,
}

/// `ξ = [1 + (1-q) λ t]^{1/(1-q)}` is equivalent to `1/ξ = e_{q'}(-λ t)` with
/// `q' = 2 - q`, which is the decaying form the relaxation fit handles.
pub fn fit_sensitivity(steps: &[usize], xi: &[f64]) -> Option<SensitivityFit> {
    if xi.len() < 10 || xi.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let inv: Vec<f64> = xi.iter().map(|v| 1.0 / v).collect();
    if inv.iter().any(|v| *v > 1.0 + 1e-9) && inv.last().copied().unwrap_or(1.0) > 0.5 {
        // never grows: nothing to fit
        return None;
    }
    let series = OverlapSeries::from_values(steps.to_vec(), inv.iter().map(|v| v.min(1.0)).collect()).ok()?;
    let window = (1, *steps.last()?);
    let fit: QExpFit = nonextensive::fit_qexp(&series, window, TimePower::One, &Default::default()).ok()?;
    Some(SensitivityFit { q: 2.0 - fit.q_rel, lambda: 1.0 / fit.tau, r_squared: fit.linearity })
}
