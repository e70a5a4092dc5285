//! Small dense helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entry of `|A†A - I|`.
pub fn unitarity_residual(a: &CMatrix) -> f64 {
    let n = a.ncols();
    let g = a.adjoint() * a;
    let mut worst: f64 = 0.0;
    for c in 0..n {
        for r in 0..n {
            let target = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((g[(r, c)] - target).norm());
        }
    }
    worst
}

/// Spectral data of a unitary matrix: eigenphases in `(-π, π]`, ascending,
/// and the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct UnitarySpectrum {
    pub phases: Vec<f64>,
    pub vectors: CMatrix,
}

/// Diagonalizes a unitary (hence normal) matrix through its complex Schur
/// form; for normal input the triangular factor is diagonal and the Schur
/// vectors are eigenvectors.
pub fn unitary_spectrum(u: &CMatrix) -> Result<UnitarySpectrum> {
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), 1e-15, 10_000)
        .ok_or(Error::Numerical { context: "Schur decomposition", residual: f64::NAN })?;
    let (q, t) = schur.unpack();

    let mut off: f64 = 0.0;
    for c in 0..n {
        for r in 0..c {
            off = off.max(t[(r, c)].norm());
        }
    }
    if !(off < 1e-8) {
        return Err(Error::Numerical { context: "unitary eigendecomposition", residual: off });
    }

    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|k| {
            let mut phase = t[(k, k)].arg();
            if phase <= -std::f64::consts::PI {
                phase = std::f64::consts::PI;
            }
            (phase, k)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &(_, src)) in order.iter().enumerate() {
        vectors.set_column(dst, &q.column(src));
    }
    Ok(UnitarySpectrum { phases: order.iter().map(|p| p.0).collect(), vectors })
}
