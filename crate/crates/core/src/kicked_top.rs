//! Floquet operator of the quantum kicked top, its parity decomposition for
//! even `J`, and the weak/FGR perturbation diagnostics.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::spin::{self, Spin, UnitaryMatrix};

/// Off-block residual above which a transformed operator is rejected.
pub const BLOCK_RESIDUAL_LIMIT: f64 = 1e-8;

/// Parameters of an unperturbed/perturbed pair of tops. The perturbed top
/// has kick strength `alpha + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickedTopSpec {
    pub spin: Spin,
    pub alpha: f64,
    pub delta: f64,
}

impl KickedTopSpec {
    pub fn new(spin: Spin, alpha: f64, delta: f64) -> Result<Self> {
        if !spin.is_even() {
            return Err(Error::UnsupportedSpin(spin.j()));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be finite, got {alpha}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidInput(format!("delta must be finite and >= 0, got {delta}")));
        }
        Ok(KickedTopSpec { spin, alpha, delta })
    }

    pub fn perturbed_alpha(&self) -> f64 {
        self.alpha + self.delta
    }

    /// Dimension of the oo subspace, `J/2`.
    pub fn oo_dim(&self) -> usize {
        self.spin.j() as usize / 2
    }
}

/// `U = exp(-i π/2 Jy) exp(-i α Jz² / 2J)` on the full `2J+1` space.
pub fn build_qkt(spin: Spin, alpha: f64) -> Result<UnitaryMatrix> {
    let rotation = spin::rotation_y(spin, FRAC_PI_2)?;
    Ok(apply_torsion(&rotation, spin, alpha))
}

/// Unperturbed and perturbed full Floquet operators of `spec`.
pub fn build_pair(spec: &KickedTopSpec) -> Result<(UnitaryMatrix, UnitaryMatrix)> {
    let rotation = spin::rotation_y(spec.spin, FRAC_PI_2)?;
    Ok((
        apply_torsion(&rotation, spec.spin, spec.alpha),
        apply_torsion(&rotation, spec.spin, spec.perturbed_alpha()),
    ))
}

/// `R · diag(phases)` is a column scaling of `R`.
fn apply_torsion(rotation: &UnitaryMatrix, spin: Spin, alpha: f64) -> UnitaryMatrix {
    let phases = spin::torsion_phases(spin, alpha);
    let mut out = rotation.entries().clone();
    for (c, p) in phases.iter().enumerate() {
        for r in 0..out.nrows() {
            out[(r, c)] *= p;
        }
    }
    UnitaryMatrix::new_unchecked(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Ee,
    Oo,
    Oe,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Ee, Block::Oo, Block::Oe];
}

/// One column of the parity transformation: at most two nonzero entries.
#[derive(Debug, Clone, PartialEq)]
struct SparseColumn {
    entries: Vec<(usize, f64)>,
}

/// The orthogonal change of basis `T` that block-diagonalizes the even-`J`
/// kicked top into the ee, oo and oe subspaces (in that column order).
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceDecomposition {
    spin: Spin,
    columns: Vec<SparseColumn>,
    n_ee: usize,
    n_oo: usize,
    n_oe: usize,
}

pub fn parity_basis(spin: Spin) -> Result<SubspaceDecomposition> {
    if !spin.is_even() {
        return Err(Error::UnsupportedSpin(spin.j()));
    }
    let half = spin.j() as i64 / 2;
    let idx = |m: i64| spin.index_of(m).expect("|m| <= J by construction");
    let pair = |a: i64, b: i64, sign: f64| SparseColumn {
        entries: vec![(idx(a), FRAC_1_SQRT_2), (idx(b), sign * FRAC_1_SQRT_2)],
    };

    let mut columns = Vec::with_capacity(spin.dim());
    // ee
    columns.push(SparseColumn { entries: vec![(idx(0), 1.0)] });
    for m in 1..=half {
        columns.push(pair(2 * m, -2 * m, 1.0));
    }
    // oo
    for m in 1..=half {
        columns.push(pair(2 * m - 1, 1 - 2 * m, -1.0));
    }
    // oe
    for m in 1..=half {
        columns.push(pair(2 * m, -2 * m, -1.0));
    }
    for m in 1..=half {
        columns.push(pair(2 * m - 1, 1 - 2 * m, 1.0));
    }

    let h = half as usize;
    Ok(SubspaceDecomposition { spin, columns, n_ee: h + 1, n_oo: h, n_oe: 2 * h })
}

impl SubspaceDecomposition {
    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// `(N_ee, N_oo, N_oe)`.
    pub fn block_dims(&self) -> (usize, usize, usize) {
        (self.n_ee, self.n_oo, self.n_oe)
    }

    pub fn range(&self, block: Block) -> Range<usize> {
        match block {
            Block::Ee => 0..self.n_ee,
            Block::Oo => self.n_ee..self.n_ee + self.n_oo,
            Block::Oe => self.n_ee + self.n_oo..self.dim(),
        }
    }

    pub fn block_of(&self, column: usize) -> Block {
        Block::ALL
            .into_iter()
            .find(|b| self.range(*b).contains(&column))
            .expect("column within decomposition")
    }

    /// Dense `T` with the basis vectors as columns.
    pub fn transform_matrix(&self) -> CMatrix {
        let n = self.dim();
        let mut t = CMatrix::zeros(n, n);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in &col.entries {
                t[(r, c)] = Complex64::new(v, 0.0);
            }
        }
        t
    }

    /// Basis vector `column` of `T`, expanded in the `|m>` basis.
    pub fn basis_vector(&self, column: usize) -> linalg::CVector {
        let mut v = linalg::CVector::zeros(self.dim());
        for &(r, x) in &self.columns[column].entries {
            v[r] = Complex64::new(x, 0.0);
        }
        v
    }

    /// `(T† A T)[row, col]`; T is real so no conjugation is needed.
    fn transformed_entry(&self, a: &CMatrix, row: usize, col: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(i, ti) in &self.columns[row].entries {
            for &(j, tj) in &self.columns[col].entries {
                acc += a[(i, j)] * (ti * tj);
            }
        }
        acc
    }

    /// Full `T† A T`.
    pub fn transform(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check_dim(a)?;
        let n = self.dim();
        Ok(CMatrix::from_fn(n, n, |r, c| self.transformed_entry(a, r, c)))
    }

    /// Largest entry of `T† A T` outside the three diagonal blocks.
    pub fn off_block_residual(&self, a: &CMatrix) -> Result<f64> {
        self.check_dim(a)?;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for c in 0..n {
            let bc = self.block_of(c);
            for r in 0..n {
                if self.block_of(r) != bc {
                    worst = worst.max(self.transformed_entry(a, r, c).norm());
                }
            }
        }
        Ok(worst)
    }

    /// Diagonal block of `T† A T` for `block`, plus the largest entry coupling
    /// that block to the rest.
    pub fn extract(&self, a: &CMatrix, block: Block) -> Result<(CMatrix, f64)> {
        self.check_dim(a)?;
        let range = self.range(block);
        let n = self.dim();
        let sub = CMatrix::from_fn(range.len(), range.len(), |r, c| {
            self.transformed_entry(a, range.start + r, range.start + c)
        });
        let mut leak: f64 = 0.0;
        for inside in range.clone() {
            for outside in (0..n).filter(|k| !range.contains(k)) {
                leak = leak
                    .max(self.transformed_entry(a, inside, outside).norm())
                    .max(self.transformed_entry(a, outside, inside).norm());
            }
        }
        Ok((sub, leak))
    }

    fn check_dim(&self, a: &CMatrix) -> Result<()> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.nrows() });
        }
        Ok(())
    }

    pub(crate) fn column_entries(&self, column: usize) -> &[(usize, f64)] {
        &self.columns[column].entries
    }
}

/// An invariant block pulled out of a full operator.
#[derive(Debug, Clone)]
pub struct ExtractedBlock {
    pub unitary: UnitaryMatrix,
    /// Largest coupling between the block and its complement.
    pub leakage: f64,
}

/// The oo block of `T† U T`, used as the map for all dynamics.
pub fn oo_block(u: &UnitaryMatrix, decomp: &SubspaceDecomposition) -> Result<ExtractedBlock> {
    let (sub, leakage) = decomp.extract(u.entries(), Block::Oo)?;
    if !(leakage < BLOCK_RESIDUAL_LIMIT) {
        return Err(Error::NotBlockDiagonal(leakage));
    }
    Ok(ExtractedBlock { unitary: UnitaryMatrix::new(sub)?, leakage })
}

/// Kicked top with the π/2 rotation and its oo block cached, so Floquet
/// maps for many kick strengths cost one diagonal scaling each.
#[derive(Debug, Clone)]
pub struct KickedTop {
    spin: Spin,
    rotation: UnitaryMatrix,
    decomposition: SubspaceDecomposition,
    rotation_oo: CMatrix,
    leakage: f64,
}

impl KickedTop {
    pub fn new(spin: Spin) -> Result<Self> {
        let decomposition = parity_basis(spin)?;
        let rotation = spin::rotation_y(spin, FRAC_PI_2)?;
        let (rotation_oo, leakage) = decomposition.extract(rotation.entries(), Block::Oo)?;
        if !(leakage < BLOCK_RESIDUAL_LIMIT) {
            return Err(Error::NotBlockDiagonal(leakage));
        }
        Ok(KickedTop { spin, rotation, decomposition, rotation_oo, leakage })
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn decomposition(&self) -> &SubspaceDecomposition {
        &self.decomposition
    }

    pub fn oo_dim(&self) -> usize {
        self.rotation_oo.nrows()
    }

    /// Coupling of the oo block of the rotation factor to the other blocks.
    pub fn rotation_leakage(&self) -> f64 {
        self.leakage
    }

    pub fn floquet(&self, alpha: f64) -> UnitaryMatrix {
        apply_torsion(&self.rotation, self.spin, alpha)
    }

    /// oo torsion phases `exp(-i α (2m-1)² / 2J)`, `m = 1..=J/2`.
    pub fn oo_torsion_phases(&self, alpha: f64) -> Vec<Complex64> {
        let two_j = 2.0 * self.spin.j() as f64;
        (1..=self.oo_dim())
            .map(|m| {
                let mm = (2 * m - 1) as f64;
                Complex64::from_polar(1.0, -alpha * mm * mm / two_j)
            })
            .collect()
    }

    /// oo block of the Floquet operator. The torsion is constant on each
    /// `{|m>, |-m>}` pair, so it is diagonal in the parity basis and
    /// factors out of the block extraction.
    pub fn oo_floquet(&self, alpha: f64) -> UnitaryMatrix {
        let phases = self.oo_torsion_phases(alpha);
        let mut out = self.rotation_oo.clone();
        for (c, p) in phases.iter().enumerate() {
            for r in 0..out.nrows() {
                out[(r, c)] *= p;
            }
        }
        UnitaryMatrix::new_unchecked(out)
    }

    /// Diagonal of the torsion generator `Jz² / 2J` in the oo basis.
    pub fn oo_perturbation_diagonal(&self) -> Vec<f64> {
        let two_j = 2.0 * self.spin.j() as f64;
        (1..=self.oo_dim()).map(|m| ((2 * m - 1) as f64).powi(2) / two_j).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Weak,
    Fgr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRegime {
    pub n: usize,
    pub level_spacing: f64,
    pub sigma: f64,
    pub delta_c: f64,
    pub regime: Regime,
}

/// Mean level spacing `2π/N` of an `N`-dimensional Floquet operator.
pub fn level_spacing(n: usize) -> f64 {
    2.0 * PI / n as f64
}

/// Critical perturbation `sqrt(2π / N³)`.
pub fn critical_delta(n: usize) -> f64 {
    (2.0 * PI / (n as f64).powi(3)).sqrt()
}

/// Critical perturbation for spin `J` in the oo subspace (`N = J/2`).
pub fn critical_delta_for_spin(spin: Spin) -> f64 {
    critical_delta(spin.j() as usize / 2)
}

pub fn perturbation_stats(spec: &KickedTopSpec) -> Result<PerturbationRegime> {
    let top = KickedTop::new(spec.spin)?;
    perturbation_stats_with(&top, spec)
}

/// Typical off-diagonal element of `δ V` in the ordered eigenbasis of the
/// unperturbed oo Floquet block, against the level spacing.
pub fn perturbation_stats_with(top: &KickedTop, spec: &KickedTopSpec) -> Result<PerturbationRegime> {
    if top.spin() != spec.spin {
        return Err(Error::InvalidInput("kicked top and spec disagree on J".into()));
    }
    let n = top.oo_dim();
    let u = top.oo_floquet(spec.alpha);
    let spectrum = linalg::unitary_spectrum(u.entries())?;
    let v = top.oo_perturbation_diagonal();

    // W = E† diag(v) E
    let e = &spectrum.vectors;
    let mut scaled = e.clone();
    for r in 0..n {
        for c in 0..n {
            scaled[(r, c)] *= v[r];
        }
    }
    let w = e.adjoint() * scaled;
    let mut sum = 0.0;
    for c in 0..n {
        for r in 0..n {
            if r != c {
                sum += w[(r, c)].norm_sqr();
            }
        }
    }
    let second_moment = if n > 1 { sum / (n * (n - 1)) as f64 } else { 0.0 };
    let sigma = (spec.delta * spec.delta * second_moment).sqrt();
    let level_spacing = level_spacing(n);
    Ok(PerturbationRegime {
        n,
        level_spacing,
        sigma,
        delta_c: critical_delta(n),
        regime: if sigma > level_spacing { Regime::Fgr } else { Regime::Weak },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(j: u32) -> Spin {
        Spin::new(j).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(KickedTopSpec::new(spin(3), 3.0, 0.0).is_err());
        assert!(KickedTopSpec::new(spin(4), f64::NAN, 0.0).is_err());
        assert!(KickedTopSpec::new(spin(4), 3.0, -0.1).is_err());
        assert_eq!(KickedTopSpec::new(spin(240), 3.0, 0.01).unwrap().oo_dim(), 120);
    }

    #[test]
    fn block_dims_and_orthonormality() {
        let d = parity_basis(spin(4)).unwrap();
        assert_eq!(d.block_dims(), (3, 2, 4));
        let t = d.transform_matrix();
        let id = CMatrix::identity(9, 9);
        assert!(linalg::max_abs_diff(&(t.adjoint() * &t), &id) < 1e-12);
        assert!(parity_basis(spin(5)).is_err());
    }

    #[test]
    fn first_oo_column() {
        let s = spin(4);
        let d = parity_basis(s).unwrap();
        let v = d.basis_vector(d.range(Block::Oo).start);
        let mut expect = linalg::CVector::zeros(9);
        expect[s.index_of(1).unwrap()] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        expect[s.index_of(-1).unwrap()] = Complex64::new(-FRAC_1_SQRT_2, 0.0);
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn qkt_block_diagonal_small_j() {
        let s = spin(8);
        let u = build_qkt(s, 3.0).unwrap();
        assert!(u.unitarity_residual() < 1e-10);
        let d = parity_basis(s).unwrap();
        // dense route as a cross-check of the sparse transform
        let t = d.transform_matrix();
        let dense = t.adjoint() * u.entries() * &t;
        let sparse = d.transform(u.entries()).unwrap();
        assert!(linalg::max_abs_diff(&dense, &sparse) < 1e-13);
        assert!(d.off_block_residual(u.entries()).unwrap() < 1e-10);
        let block = oo_block(&u, &d).unwrap();
        assert_eq!(block.unitary.dim(), 4);
        assert!(block.unitary.unitarity_residual() < 1e-10);
    }

    #[test]
    fn cached_oo_floquet_matches_extraction() {
        let s = spin(12);
        let top = KickedTop::new(s).unwrap();
        for alpha in [0.0, 3.0, 3.01] {
            let full = top.floquet(alpha);
            let ext = oo_block(&full, top.decomposition()).unwrap();
            assert!(linalg::max_abs_diff(ext.unitary.entries(), top.oo_floquet(alpha).entries()) < 1e-12);
        }
    }

    #[test]
    fn perturbed_top_factorizes() {
        let s = spin(10);
        let spec = KickedTopSpec::new(s, 3.0, 0.02).unwrap();
        let (_, pert) = build_pair(&spec).unwrap();
        let prod = spin::rotation_y(s, FRAC_PI_2)
            .unwrap()
            .compose(&spin::torsion(s, 3.0).unwrap())
            .unwrap()
            .compose(&spin::torsion(s, 0.02).unwrap())
            .unwrap();
        assert!(linalg::max_abs_diff(pert.entries(), prod.entries()) < 1e-12);
        let same = KickedTopSpec::new(s, 3.0, 0.0).unwrap();
        let (a, b) = build_pair(&same).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn critical_delta_values() {
        assert!((critical_delta_for_spin(spin(240)) - 1.91e-3).abs() < 0.005e-3);
        assert!((critical_delta_for_spin(spin(480)) - 6.74e-4).abs() < 0.005e-4);
    }

    #[test]
    fn zero_delta_is_weak() {
        let spec = KickedTopSpec::new(spin(40), 3.0, 0.0).unwrap();
        let stats = perturbation_stats(&spec).unwrap();
        assert_eq!(stats.sigma, 0.0);
        assert_eq!(stats.regime, Regime::Weak);
        assert_eq!(stats.n, 20);
        assert!((stats.level_spacing - 2.0 * PI / 20.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_scales_linearly_with_delta() {
        let top = KickedTop::new(spin(40)).unwrap();
        let a = perturbation_stats_with(&top, &KickedTopSpec::new(spin(40), 3.0, 0.01).unwrap()).unwrap();
        let b = perturbation_stats_with(&top, &KickedTopSpec::new(spin(40), 3.0, 0.02).unwrap()).unwrap();
        assert!(a.sigma > 0.0);
        assert!((b.sigma / a.sigma - 2.0).abs() < 1e-9);
    }
}
