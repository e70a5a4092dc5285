//! Spin coherent states and their projection onto the oo subspace.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalPoint, INPUT_NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::kicked_top::{Block, SubspaceDecomposition};
use crate::linalg::CVector;
use crate::spin::Spin;

/// Weight below which an oo projection is treated as empty.
pub const EMPTY_PROJECTION_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(-PI..=PI).contains(&phi) {
            return Err(Error::InvalidPoint(format!("angles out of range: theta = {theta}, phi = {phi}")));
        }
        Ok(SphericalPoint { theta, phi })
    }

    pub fn to_cartesian(&self) -> ClassicalPoint {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        ClassicalPoint { x: st * cp, y: st * sp, z: ct }
    }
}

/// `θ = arccos z`, `φ = atan2(y, x)`; `φ = 0` at the poles.
pub fn cartesian_to_angles(x: f64, y: f64, z: f64) -> Result<SphericalPoint> {
    let n2 = x * x + y * y + z * z;
    if !n2.is_finite() || (n2 - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(Error::InvalidPoint(format!("({x}, {y}, {z}) is not on the unit sphere")));
    }
    let rho = x.hypot(y);
    let theta = rho.atan2(z);
    let phi = if rho == 0.0 { 0.0 } else { y.atan2(x) };
    SphericalPoint::new(theta, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "basis", content = "j")]
pub enum Basis {
    /// `|J, m>`, `m = J..=-J`.
    Full(Spin),
    /// oo parity basis of an even `J`.
    Oo(Spin),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Full(s) => s.dim(),
            Basis::Oo(s) => s.j() as usize / 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    basis: Basis,
    amplitudes: CVector,
}

impl QuantumState {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    /// Wraps `amplitudes`, requiring unit norm.
    pub fn new(basis: Basis, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: amplitudes.len() });
        }
        let n = amplitudes.norm();
        if !((n - 1.0).abs() < 1e-10) {
            return Err(Error::InvalidInput(format!("state norm {n} is not 1")));
        }
        Ok(QuantumState { basis, amplitudes })
    }

    /// Scales `amplitudes` to unit norm.
    pub fn normalized(basis: Basis, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: amplitudes.len() });
        }
        let n = amplitudes.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("cannot normalize a zero state".into()));
        }
        Ok(QuantumState { basis, amplitudes: amplitudes / Complex64::new(n, 0.0) })
    }

    pub(crate) fn from_parts_unchecked(basis: Basis, amplitudes: CVector) -> Self {
        QuantumState { basis, amplitudes }
    }

    /// Basis vector `k`.
    pub fn basis_state(basis: Basis, k: usize) -> Result<Self> {
        if k >= basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: k + 1 });
        }
        let mut v = CVector::zeros(basis.dim());
        v[k] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { basis, amplitudes: v })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// `ln C(n, k)`.
fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `n ln x` with `0 ln 0 = 0`.
fn ln_pow(x: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * x.ln()
    }
}

/// SU(2) coherent state: `|J, J>` rotated by `θ` about `(-sin φ, cos φ, 0)`.
///
/// `<J, m|θ, φ> = C(2J, J+m)^{1/2} cos(θ/2)^{J+m} sin(θ/2)^{J-m} e^{i(J-m)φ}`,
/// so `<J>/J` points at `(sin θ cos φ, sin θ sin φ, cos θ)` and the `m = J`
/// amplitude is real and non-negative.
pub fn coherent_state(spin: Spin, point: SphericalPoint) -> QuantumState {
    let j = spin.j() as u64;
    let (s, c) = (point.theta / 2.0).sin_cos();
    let amps: Vec<Complex64> = spin
        .ms()
        .map(|m| {
            let up = (j as i64 + m) as u64;
            let down = (j as i64 - m) as u64;
            let ln_mag = 0.5 * ln_binomial(2 * j, up) + ln_pow(c, up) + ln_pow(s, down);
            Complex64::from_polar(ln_mag.exp(), down as f64 * point.phi)
        })
        .collect();
    let v = CVector::from_vec(amps);
    let n = v.norm();
    QuantumState::from_parts_unchecked(Basis::Full(spin), v / Complex64::new(n, 0.0))
}

/// Coherent state centred on a classical phase-space point.
pub fn coherent_state_at(spin: Spin, p: &ClassicalPoint) -> Result<QuantumState> {
    Ok(coherent_state(spin, cartesian_to_angles(p.x, p.y, p.z)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub state: QuantumState,
    /// Probability carried by the oo subspace before any renormalization.
    pub weight: f64,
}

/// oo components `T_oo† ψ` of a full-basis state.
pub fn project_oo(state: &QuantumState, decomp: &SubspaceDecomposition, renormalize: bool) -> Result<Projection> {
    let spin = decomp.spin();
    if state.basis() != Basis::Full(spin) {
        return Err(Error::InvalidInput(format!("expected a full-basis state for J = {}", spin.j())));
    }
    let range = decomp.range(Block::Oo);
    let psi = state.amplitudes();
    let v = CVector::from_iterator(
        range.len(),
        range.map(|col| {
            decomp
                .column_entries(col)
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, &(r, t)| acc + psi[r] * t)
        }),
    );
    let weight = v.norm_squared();
    if !(weight >= EMPTY_PROJECTION_LIMIT) {
        return Err(Error::EmptyProjection(weight));
    }
    let amplitudes = if renormalize { &v / Complex64::new(weight.sqrt(), 0.0) } else { v };
    Ok(Projection { state: QuantumState::from_parts_unchecked(Basis::Oo(spin), amplitudes), weight })
}

/// Embeds an oo state back into the full basis: `T_oo ψ`.
pub fn embed_oo(state: &QuantumState, decomp: &SubspaceDecomposition) -> Result<QuantumState> {
    let spin = decomp.spin();
    if state.basis() != Basis::Oo(spin) {
        return Err(Error::InvalidInput(format!("expected an oo-basis state for J = {}", spin.j())));
    }
    let mut v = CVector::zeros(spin.dim());
    for (k, col) in decomp.range(Block::Oo).enumerate() {
        for &(r, t) in decomp.column_entries(col) {
            v[r] += state.amplitudes()[k] * t;
        }
    }
    Ok(QuantumState::from_parts_unchecked(Basis::Full(spin), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kicked_top::parity_basis;
    use crate::spin::{jx_matrix, jy_matrix, jz_matrix};

    fn expect(op: &crate::linalg::CMatrix, psi: &CVector) -> f64 {
        psi.dotc(&(op * psi)).re
    }

    #[test]
    fn north_pole_is_highest_weight() {
        let s = Spin::new(6).unwrap();
        let cs = coherent_state(s, SphericalPoint::new(0.0, 0.0).unwrap());
        assert!((cs.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(cs.amplitudes().iter().skip(1).all(|a| a.norm() == 0.0));
    }

    #[test]
    fn expectation_points_along_direction() {
        let s = Spin::new(20).unwrap();
        let (jx, jy, jz) = (jx_matrix(s), jy_matrix(s), jz_matrix(s));
        for (theta, phi) in [(0.4, 0.3), (1.2, -2.0), (2.9, 3.0), (PI / 2.0, 0.0)] {
            let cs = coherent_state(s, SphericalPoint::new(theta, phi).unwrap());
            assert!((cs.norm() - 1.0).abs() < 1e-12);
            let psi = cs.amplitudes();
            let j = 20.0;
            assert!((expect(jx.entries(), psi) / j - theta.sin() * phi.cos()).abs() < 1e-10);
            assert!((expect(jy.entries(), psi) / j - theta.sin() * phi.sin()).abs() < 1e-10);
            assert!((expect(jz.entries(), psi) / j - theta.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn overlap_of_meridian_neighbours() {
        let s = Spin::new(10).unwrap();
        let (t1, t2, phi) = (0.5, 0.9, 0.7);
        let a = coherent_state(s, SphericalPoint::new(t1, phi).unwrap());
        let b = coherent_state(s, SphericalPoint::new(t2, phi).unwrap());
        let ov = a.amplitudes().dotc(b.amplitudes()).norm();
        assert!((ov - ((t2 - t1) / 2.0f64).cos().powi(20)).abs() < 1e-8);
    }

    #[test]
    fn angles_from_cartesian() {
        let p = cartesian_to_angles(0.0, 0.0, 1.0).unwrap();
        assert_eq!((p.theta, p.phi), (0.0, 0.0));
        let p = cartesian_to_angles(0.0, 0.0, -1.0).unwrap();
        assert_eq!((p.theta, p.phi), (PI, 0.0));
        let p = cartesian_to_angles(1.0, 0.0, 0.0).unwrap();
        assert!((p.theta - PI / 2.0).abs() < 1e-15 && p.phi == 0.0);
        let (x, y, z) = (0.6294126, 0.4557187, 0.6294126);
        let p = cartesian_to_angles(x, y, z).unwrap();
        assert!((p.theta - z.acos()).abs() < 1e-7);
        assert!((p.phi - y.atan2(x)).abs() < 1e-15);
        assert!(cartesian_to_angles(0.5, 0.5, 0.5).is_err());
        assert!(SphericalPoint::new(-0.1, 0.0).is_err());
        assert!(SphericalPoint::new(1.0, 4.0).is_err());
    }

    #[test]
    fn projection_of_oo_vector_is_itself() {
        let s = Spin::new(8).unwrap();
        let d = parity_basis(s).unwrap();
        let col = d.range(Block::Oo).start + 2;
        let full = QuantumState::new(Basis::Full(s), d.basis_vector(col)).unwrap();
        let p = project_oo(&full, &d, true).unwrap();
        assert!((p.weight - 1.0).abs() < 1e-15);
        let target = QuantumState::basis_state(Basis::Oo(s), 2).unwrap();
        assert!((p.state.amplitudes() - target.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn projection_of_ee_vector_is_empty() {
        let s = Spin::new(8).unwrap();
        let d = parity_basis(s).unwrap();
        let zero = QuantumState::basis_state(Basis::Full(s), s.index_of(0).unwrap()).unwrap();
        assert!(matches!(project_oo(&zero, &d, true), Err(Error::EmptyProjection(_))));
    }

    #[test]
    fn projection_is_idempotent() {
        let s = Spin::new(12).unwrap();
        let d = parity_basis(s).unwrap();
        let cs = coherent_state(s, SphericalPoint::new(0.8, 0.6).unwrap());
        let once = project_oo(&cs, &d, false).unwrap();
        let back = embed_oo(&once.state, &d).unwrap();
        let twice = project_oo(&back, &d, false).unwrap();
        assert!((once.state.amplitudes() - twice.state.amplitudes()).norm() < 1e-14);
        assert!((once.weight - twice.weight).abs() < 1e-14);
    }
}
