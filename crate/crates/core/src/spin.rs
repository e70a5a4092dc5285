//! Angular momentum matrices and the two elementary unitaries of the kicked
//! top.
//!
//! Units have ħ = 1. Every matrix is written in the J_z eigenbasis with `m`
//! running in descending order `J, J-1, …, -J`, so row/column `k` carries
//! `m = J - k`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Integer spin quantum number `J >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Spin(u32);

impl Spin {
    pub fn new(j: u32) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Spin(j))
    }

    pub fn j(self) -> u32 {
        self.0
    }

    pub fn dim(self) -> usize {
        2 * self.0 as usize + 1
    }

    /// Magnetic quantum number carried by basis index `k`.
    pub fn m_of(self, k: usize) -> i64 {
        self.0 as i64 - k as i64
    }

    /// Basis index of magnetic quantum number `m`, if `|m| <= J`.
    pub fn index_of(self, m: i64) -> Option<usize> {
        let j = self.0 as i64;
        (-j..=j).contains(&m).then(|| (j - m) as usize)
    }

    pub fn ms(self) -> impl Iterator<Item = i64> {
        let j = self.0 as i64;
        (-j..=j).rev()
    }

    pub fn is_even(self) -> bool {
        self.0 % 2 == 0
    }
}

impl TryFrom<u32> for Spin {
    type Error = Error;
    fn try_from(j: u32) -> Result<Self> {
        Spin::new(j)
    }
}

impl From<Spin> for u32 {
    fn from(s: Spin) -> u32 {
        s.0
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(j: f64) -> Result<Self> {
        if !j.is_finite() || j < 1.0 || j.fract() != 0.0 || j > u32::MAX as f64 {
            return Err(Error::InvalidSpin(j));
        }
        Ok(Spin(j as u32))
    }
}

/// A matrix representation of an angular momentum observable.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMatrix,
    hermitian: bool,
}

impl OperatorMatrix {
    pub(crate) fn new(entries: CMatrix, hermitian: bool) -> Self {
        debug_assert!(entries.is_square());
        OperatorMatrix { entries, hermitian }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Largest entry of `|A - A†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        linalg::max_abs_diff(&self.entries, &self.entries.adjoint())
    }
}

/// A unitary matrix. Construction goes through the builders in this crate,
/// all of which keep `max |U†U - I| < 1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: CMatrix,
}

impl UnitaryMatrix {
    pub const TOLERANCE: f64 = 1e-10;

    /// Wraps `entries`, checking unitarity against [`Self::TOLERANCE`].
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        let residual = linalg::unitarity_residual(&entries);
        if !(residual < Self::TOLERANCE) {
            return Err(Error::Numerical { context: "unitarity check", residual });
        }
        Ok(UnitaryMatrix { entries })
    }

    pub(crate) fn new_unchecked(entries: CMatrix) -> Self {
        UnitaryMatrix { entries }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix { entries: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        linalg::unitarity_residual(&self.entries)
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix { entries: self.entries.adjoint() }
    }

    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rhs.dim() });
        }
        Ok(UnitaryMatrix { entries: &self.entries * &rhs.entries })
    }
}

/// Ladder coefficient `sqrt(J(J+1) - m(m+1))` for `J+ |m> = c |m+1>`.
fn raise_coefficient(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

pub fn jz_matrix(spin: Spin) -> OperatorMatrix {
    let dim = spin.dim();
    let mut a = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        a[(k, k)] = Complex64::new(spin.m_of(k) as f64, 0.0);
    }
    OperatorMatrix::new(a, true)
}

/// Raising operator `J+`; nonzero entries sit on the first superdiagonal.
pub fn jplus_matrix(spin: Spin) -> OperatorMatrix {
    let dim = spin.dim();
    let j = spin.j() as f64;
    let mut a = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        // column k has m, row k-1 has m+1
        let m = spin.m_of(k) as f64;
        a[(k - 1, k)] = Complex64::new(raise_coefficient(j, m), 0.0);
    }
    OperatorMatrix::new(a, false)
}

pub fn jminus_matrix(spin: Spin) -> OperatorMatrix {
    OperatorMatrix::new(jplus_matrix(spin).entries.adjoint(), false)
}

/// `Jx = (J+ + J-) / 2`.
pub fn jx_matrix(spin: Spin) -> OperatorMatrix {
    let p = jplus_matrix(spin).entries;
    let m = p.adjoint();
    OperatorMatrix::new((p + m) * Complex64::new(0.5, 0.0), true)
}

/// `Jy = (J+ - J-) / 2i`.
pub fn jy_matrix(spin: Spin) -> OperatorMatrix {
    let p = jplus_matrix(spin).entries;
    let m = p.adjoint();
    OperatorMatrix::new((p - m) * Complex64::new(0.0, -0.5), true)
}

/// Real symmetric tridiagonal `Jx`, used as the spectral route for `Jy`.
fn jx_real(spin: Spin) -> DMatrix<f64> {
    let dim = spin.dim();
    let j = spin.j() as f64;
    let mut a = DMatrix::zeros(dim, dim);
    for k in 1..dim {
        let c = 0.5 * raise_coefficient(j, spin.m_of(k) as f64);
        a[(k - 1, k)] = c;
        a[(k, k - 1)] = c;
    }
    a
}

/// `exp(-i angle Jy)`.
///
/// `Jy = D Jx D†` with `D = diag(i^k)`, and `Jx` is real symmetric, so the
/// Hermitian eigendecomposition is done on `Jx` in real arithmetic and the
/// result is conjugated by `D`. The eigenvalues of `Jx` are the integers
/// `-J..=J`; they are snapped to those values before exponentiating.
pub fn rotation_y(spin: Spin, angle: f64) -> Result<UnitaryMatrix> {
    if !angle.is_finite() {
        return Err(Error::InvalidInput(format!("rotation angle must be finite, got {angle}")));
    }
    let dim = spin.dim();
    let jx = jx_real(spin);
    let eig = SymmetricEigen::new(jx.clone());

    let mut residual: f64 = 0.0;
    for (col, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(col);
        let r = (&jx * v - v * lambda).amax();
        residual = residual.max(r);
        residual = residual.max((lambda - lambda.round()).abs());
    }
    if !(residual < 1e-8 * spin.j() as f64) {
        return Err(Error::Numerical { context: "Jx eigendecomposition", residual });
    }

    // exp(-i angle Jx) = V diag(e^{-i angle λ}) Vᵀ
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -angle * l.round()))
        .collect();
    let v = &eig.eigenvectors;
    let mut scaled = CMatrix::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..dim {
            scaled[(r, c)] = phases[c] * v[(r, c)];
        }
    }
    let vt = v.transpose().map(|x| Complex64::new(x, 0.0));
    let mut out = scaled * vt;

    // conjugate by D = diag(i^k): out[r, c] *= i^r * (-i)^c = i^(r - c)
    let ipow = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    for c in 0..dim {
        for r in 0..dim {
            let p = (r + 4 * dim - c) % 4;
            out[(r, c)] *= ipow[p];
        }
    }

    let residual = linalg::unitarity_residual(&out);
    if !(residual < UnitaryMatrix::TOLERANCE) {
        return Err(Error::Numerical { context: "rotation_y unitarity", residual });
    }
    Ok(UnitaryMatrix::new_unchecked(out))
}

/// Diagonal phases `exp(-i strength m² / 2J)` of the torsion, in basis order.
pub fn torsion_phases(spin: Spin, strength: f64) -> Vec<Complex64> {
    let two_j = 2.0 * spin.j() as f64;
    spin.ms()
        .map(|m| {
            let m = m as f64;
            Complex64::from_polar(1.0, -strength * m * m / two_j)
        })
        .collect()
}

/// `exp(-i strength Jz² / 2J)`.
pub fn torsion(spin: Spin, strength: f64) -> Result<UnitaryMatrix> {
    if !strength.is_finite() {
        return Err(Error::InvalidInput(format!("torsion strength must be finite, got {strength}")));
    }
    let phases = torsion_phases(spin, strength);
    Ok(UnitaryMatrix::new_unchecked(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases))))
}
