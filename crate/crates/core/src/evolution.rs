//! Floquet propagation and overlap (fidelity) time series.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::ClassicalPoint;
use crate::coherent::{Basis, QuantumState};
use crate::error::{Error, Result};
use crate::kicked_top::{KickedTop, KickedTopSpec};
use crate::linalg::CVector;
use crate::spin::UnitaryMatrix;

/// Run parameters attached to a simulated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub j: u32,
    pub alpha: f64,
    pub delta: f64,
    pub initial: Option<ClassicalPoint>,
    /// Dimension of the subspace the dynamics ran in.
    pub n: usize,
}

/// `O(t)` for `t = steps[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSeries {
    pub steps: Vec<usize>,
    pub values: Vec<f64>,
    pub meta: Option<SeriesMeta>,
}

impl OverlapSeries {
    pub fn from_values(steps: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if steps.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: steps.len(), found: values.len() });
        }
        if steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("series steps must be strictly increasing".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0 && **v <= 1.0 + 1e-12)) {
            return Err(Error::InvalidInput(format!("overlap value {bad} outside [0, 1]")));
        }
        Ok(OverlapSeries { steps, values, meta: None })
    }

    /// Samples `f(t)` at `t = 0..=n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let steps: Vec<usize> = (0..=n).collect();
        let values = steps.iter().map(|&t| f(t as f64)).collect();
        Self::from_values(steps, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `(t, O)` pairs with `lo <= t <= hi`.
    pub fn window(&self, lo: usize, hi: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.steps.iter().copied().zip(self.values.iter().copied()).filter(move |(t, _)| *t >= lo && *t <= hi)
    }
}

fn check_dims(u: &UnitaryMatrix, state: &QuantumState) -> Result<()> {
    if u.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: state.dim() });
    }
    Ok(())
}

/// `Uⁿ |ψ>` by repeated matrix–vector products.
pub fn evolve(u: &UnitaryMatrix, state: &QuantumState, n: usize) -> Result<QuantumState> {
    check_dims(u, state)?;
    let mut psi = state.amplitudes().clone();
    let mut scratch = CVector::zeros(psi.len());
    for _ in 0..n {
        apply(u, &psi, &mut scratch);
        std::mem::swap(&mut psi, &mut scratch);
    }
    Ok(QuantumState::from_parts_unchecked(state.basis(), psi))
}

fn apply(u: &UnitaryMatrix, psi: &CVector, out: &mut CVector) {
    out.gemv(Complex64::new(1.0, 0.0), u.entries(), psi, Complex64::new(0.0, 0.0));
}

/// `|<a|b>|`.
pub fn overlap(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.basis() != b.basis() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(a.amplitudes().dotc(b.amplitudes()).norm())
}

/// `|<u|p>| / (|u| |p|)`.
fn normalized_overlap(u: &CVector, p: &CVector) -> f64 {
    (u.dotc(p).norm() / (u.norm() * p.norm())).min(1.0)
}

/// Overlap of one state propagated by two maps.
pub fn overlap_series(
    unperturbed: &UnitaryMatrix,
    perturbed: &UnitaryMatrix,
    initial: &QuantumState,
    n_steps: usize,
) -> Result<OverlapSeries> {
    check_dims(unperturbed, initial)?;
    check_dims(perturbed, initial)?;
    let mut u = initial.amplitudes().clone();
    let mut p = u.clone();
    let mut scratch = CVector::zeros(u.len());
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(normalized_overlap(&u, &p));
    for _ in 0..n_steps {
        apply(unperturbed, &u, &mut scratch);
        std::mem::swap(&mut u, &mut scratch);
        apply(perturbed, &p, &mut scratch);
        std::mem::swap(&mut p, &mut scratch);
        values.push(normalized_overlap(&u, &p));
    }
    Ok(OverlapSeries { steps: (0..=n_steps).collect(), values, meta: None })
}

/// Fidelity decay in the oo subspace of the top described by `spec`.
pub fn fidelity_series(spec: &KickedTopSpec, initial: &QuantumState, n_steps: usize) -> Result<OverlapSeries> {
    let top = KickedTop::new(spec.spin)?;
    fidelity_series_with(&top, spec, initial, n_steps)
}

/// As [`fidelity_series`], reusing a prepared [`KickedTop`].
pub fn fidelity_series_with(
    top: &KickedTop,
    spec: &KickedTopSpec,
    initial: &QuantumState,
    n_steps: usize,
) -> Result<OverlapSeries> {
    if top.spin() != spec.spin || initial.basis() != Basis::Oo(spec.spin) {
        return Err(Error::InvalidInput(format!("initial state must be in the oo basis of J = {}", spec.spin.j())));
    }
    let u = top.oo_floquet(spec.alpha);
    let p = top.oo_floquet(spec.perturbed_alpha());
    let mut series = overlap_series(&u, &p, initial, n_steps)?;
    series.meta = Some(SeriesMeta {
        j: spec.spin.j(),
        alpha: spec.alpha,
        delta: spec.delta,
        initial: None,
        n: top.oo_dim(),
    });
    Ok(series)
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;

/// Mean of the last `tail_fraction` of the series.
pub fn plateau(series: &OverlapSeries, tail_fraction: f64) -> Result<f64> {
    if series.len() < 10 {
        return Err(Error::InsufficientData { needed: 10, got: series.len() });
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("tail fraction {tail_fraction} must be in (0, 1]")));
    }
    let k = ((series.len() as f64 * tail_fraction).ceil() as usize).clamp(1, series.len());
    let tail = &series.values[series.len() - k..];
    Ok(tail.iter().sum::<f64>() / k as f64)
}

/// Measured plateau against the two candidate saturation scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub n: usize,
    pub plateau: f64,
    pub inverse_n: f64,
    pub inverse_sqrt_n: f64,
    /// `log10(plateau · N)`: zero when the plateau sits at `1/N`.
    pub log10_ratio_inverse_n: f64,
    /// `log10(plateau · √N)`.
    pub log10_ratio_inverse_sqrt_n: f64,
}

pub fn saturation_report(series: &OverlapSeries, n: usize, tail_fraction: f64) -> Result<SaturationReport> {
    let plateau = plateau(series, tail_fraction)?;
    let nf = n as f64;
    Ok(SaturationReport {
        n,
        plateau,
        inverse_n: 1.0 / nf,
        inverse_sqrt_n: 1.0 / nf.sqrt(),
        log10_ratio_inverse_n: (plateau * nf).log10(),
        log10_ratio_inverse_sqrt_n: (plateau * nf.sqrt()).log10(),
    })
}

/// Log–log slope of `1 - O(t)` against `t` over the first decade of decay
/// (`t = 1..=10`, stopping early once `1 - O` exceeds `max_loss`).
pub fn short_time_exponent(series: &OverlapSeries, max_loss: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .steps
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| (1..=10).contains(*t))
        .take_while(|(_, o)| 1.0 - **o <= max_loss)
        .filter(|(_, o)| 1.0 - **o > 0.0)
        .map(|(t, o)| ((*t as f64).ln(), (1.0 - o).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: pts.len() });
    }
    Ok(crate::nonextensive::linear_regression(&pts).slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{coherent_state_at, project_oo};
    use crate::kicked_top::build_qkt;
    use crate::spin::Spin;

    #[test]
    fn evolve_zero_steps_and_semigroup() {
        let s = Spin::new(10).unwrap();
        let u = build_qkt(s, 3.0).unwrap();
        let psi = coherent_state_at(s, &ClassicalPoint::normalized(0.3, 0.2, 0.9).unwrap()).unwrap();
        assert_eq!(evolve(&u, &psi, 0).unwrap(), psi);
        let ab = evolve(&u, &psi, 17).unwrap();
        let a_b = evolve(&u, &evolve(&u, &psi, 9).unwrap(), 8).unwrap();
        assert!((ab.amplitudes() - a_b.amplitudes()).norm() < 1e-10);
        let far = evolve(&u, &psi, 1000).unwrap();
        assert!((far.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn overlap_basics() {
        let b = Basis::Oo(Spin::new(8).unwrap());
        let e0 = QuantumState::basis_state(b, 0).unwrap();
        let e1 = QuantumState::basis_state(b, 1).unwrap();
        assert_eq!(overlap(&e0, &e0).unwrap(), 1.0);
        assert_eq!(overlap(&e0, &e1).unwrap(), 0.0);
        let other = QuantumState::basis_state(Basis::Full(Spin::new(1).unwrap()), 0).unwrap();
        assert!(overlap(&e0, &other).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let u = build_qkt(Spin::new(2).unwrap(), 3.0).unwrap();
        let psi = QuantumState::basis_state(Basis::Full(Spin::new(3).unwrap()), 0).unwrap();
        assert!(matches!(evolve(&u, &psi, 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_delta_fidelity_is_one() {
        let s = Spin::new(40).unwrap();
        let top = KickedTop::new(s).unwrap();
        let spec = KickedTopSpec::new(s, 3.0, 0.0).unwrap();
        let cs = coherent_state_at(s, &ClassicalPoint::normalized(0.3, 0.2, 0.9).unwrap()).unwrap();
        let psi = project_oo(&cs, top.decomposition(), true).unwrap().state;
        let series = fidelity_series_with(&top, &spec, &psi, 200).unwrap();
        assert!(series.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!((plateau(&series, 0.2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plateau_of_constant() {
        let s = OverlapSeries::from_fn(20, |_| 0.25).unwrap();
        assert!((plateau(&s, 0.2).unwrap() - 0.25).abs() < 1e-15);
        let short = OverlapSeries::from_fn(5, |_| 1.0).unwrap();
        assert!(matches!(plateau(&short, 0.2), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn series_validation() {
        assert!(OverlapSeries::from_values(vec![0, 1], vec![1.0, 1.5]).is_err());
        assert!(OverlapSeries::from_values(vec![0, 0], vec![1.0, 0.5]).is_err());
        assert!(OverlapSeries::from_values(vec![0, 1], vec![1.0]).is_err());
    }

    #[test]
    fn short_time_exponent_of_gaussian() {
        let s = OverlapSeries::from_fn(50, |t| (-(t / 40.0).powi(2)).exp()).unwrap();
        let e = short_time_exponent(&s, 0.5).unwrap();
        assert!((e - 2.0).abs() < 0.05, "{e}");
    }
}
