//! Dense Hermitian numerics: eigen-based pseudo-inverses, square roots, kernels and ranges.
//!
//! Every rank decision is relative: an eigenvalue counts as zero when it is at most
//! `rank_rtol * scale`, where `scale` is the largest eigenvalue of the matrix at hand, or
//! a larger reference magnitude when the matrix is the result of a computation on bigger
//! inputs (see the `*_scaled` variants).

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative bound on `|M - M*|` accepted when building a [`HermitianMatrix`].
pub const HERMITIAN_RTOL: f64 = 1e-12;
/// Bound on `|B*B - I|` for subspace bases.
pub const ORTHONORMAL_ATOL: f64 = 1e-12;

const PHASE_PIVOT_ATOL: f64 = 1e-10;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Rank and residual tolerances shared by all operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    rank_rtol: f64,
    residual_atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rtol: 1e-10,
            residual_atol: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rtol: f64, residual_atol: f64) -> Result<Self> {
        if !(rank_rtol > 0.0 && rank_rtol.is_finite()) {
            return Err(Error::InvalidTolerance(format!(
                "rank_rtol must be positive, got {rank_rtol}"
            )));
        }
        if !(residual_atol > 0.0 && residual_atol.is_finite()) {
            return Err(Error::InvalidTolerance(format!(
                "residual_atol must be positive, got {residual_atol}"
            )));
        }
        Ok(Tolerance {
            rank_rtol,
            residual_atol,
        })
    }

    pub fn rank_rtol(&self) -> f64 {
        self.rank_rtol
    }

    pub fn residual_atol(&self) -> f64 {
        self.residual_atol
    }

    /// Relative cutoff for compressions `Y* T Y` of a form to a subspace, a thousandfold below
    /// `rank_rtol`. A direction `y` of the subspace with `t[y]` just above the rank cutoff is
    /// still resolved in double precision; dropping it would leave `|T y|`, up to
    /// `sqrt(lambda_max * t[y])`, on the subspace.
    pub fn compression_rtol(&self) -> f64 {
        self.rank_rtol * COMPRESSION_FACTOR
    }
}

const COMPRESSION_FACTOR: f64 = 1e-3;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMat,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry within `1e-12 * (1 + max|entry|)` and stores `(M + M*)/2`.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix has non-finite entries".into()));
        }
        let max_abs = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let deviation = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let bound = HERMITIAN_RTOL * (1.0 + max_abs);
        if deviation > bound {
            return Err(Error::NotHermitian { deviation, bound });
        }
        Ok(Self::hermitize(m))
    }

    /// Symmetrizes without validation; for matrices produced by trusted arithmetic.
    pub(crate) fn hermitize(m: CMat) -> Self {
        let adj = m.adjoint();
        HermitianMatrix {
            m: (m + adj) * c64(0.5, 0.0),
        }
    }

    /// Builds a real symmetric matrix from rows.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMat::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = c64(v, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = CVec::from_iterator(values.len(), values.iter().map(|&v| c64(v, 0.0)));
        HermitianMatrix {
            m: CMat::from_diagonal(&d),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix { m: CMat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            m: CMat::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> Self {
        HermitianMatrix {
            m: &self.m * c64(c, 0.0),
        }
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(HermitianMatrix {
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(HermitianMatrix {
            m: &self.m - &other.m,
        })
    }

    /// `x* M x`, real part.
    pub fn quadratic(&self, x: &CVec) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(x.dotc(&(&self.m * x)).re)
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::of(&self.m)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Eigen-decomposition with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    fn of(m: &CMat) -> Self {
        let n = m.nrows();
        if n == 0 {
            return HermitianEigen {
                values: Vec::new(),
                vectors: CMat::zeros(0, 0),
            };
        }
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Eigenvalues at or below this are treated as zero.
    pub fn cutoff(&self, scale: f64, tol: &Tolerance) -> f64 {
        tol.rank_rtol * self.lambda_max().max(scale).max(0.0)
    }

    /// Fails with `NotPsd` when an eigenvalue is below `-rank_rtol * max(lambda_max, scale)`.
    pub fn check_psd(&self, scale: f64, tol: &Tolerance) -> Result<()> {
        let reference = self.lambda_max().max(scale).max(-self.lambda_min());
        let threshold = tol.rank_rtol * reference;
        let min = self.lambda_min();
        if min < -threshold {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                threshold,
            });
        }
        Ok(())
    }

    fn columns_where(&self, keep: impl Fn(f64) -> bool) -> CMat {
        let idx: Vec<usize> = (0..self.values.len())
            .filter(|&i| keep(self.values[i]))
            .collect();
        select_columns(&self.vectors, &idx)
    }
}

pub(crate) fn select_columns(m: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])])
}

fn psd_eigen(a: &HermitianMatrix, scale: f64, tol: &Tolerance) -> Result<HermitianEigen> {
    let eig = a.eigen();
    eig.check_psd(scale, tol)?;
    Ok(eig)
}

/// `F` with `F F* = pinv(M)`: the eigenvectors of the nonzero part scaled by `lambda^{-1/2}`.
pub fn pinv_factor(m: &HermitianMatrix, tol: &Tolerance) -> Result<CMat> {
    pinv_factor_scaled(m, 0.0, tol)
}

/// Like [`pinv_factor`], with the rank cutoff taken against `max(lambda_max, scale)`.
pub fn pinv_factor_scaled(m: &HermitianMatrix, scale: f64, tol: &Tolerance) -> Result<CMat> {
    let eig = psd_eigen(m, scale, tol)?;
    let cut = eig.cutoff(scale, tol);
    let idx: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > cut)
        .collect();
    let mut f = select_columns(&eig.vectors, &idx);
    for (c, &i) in idx.iter().enumerate() {
        let s = eig.values[i].sqrt().recip();
        f.column_mut(c).scale_mut(s);
    }
    Ok(f)
}

/// [`pinv_factor_scaled`] for a compression `Y* T Y`: eigenvalues at or below
/// `compression_rtol * max(lambda_max, scale)` are treated as zero.
pub fn compression_pinv_factor(m: &HermitianMatrix, scale: f64, tol: &Tolerance) -> Result<CMat> {
    let eig = psd_eigen(m, scale, tol)?;
    let cut = tol.compression_rtol() * eig.lambda_max().max(scale).max(0.0);
    let idx: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > cut)
        .collect();
    let mut f = select_columns(&eig.vectors, &idx);
    for (c, &i) in idx.iter().enumerate() {
        f.column_mut(c).scale_mut(eig.values[i].sqrt().recip());
    }
    Ok(f)
}

/// Moore-Penrose pseudo-inverse of a PSD matrix.
pub fn pinv(m: &HermitianMatrix, tol: &Tolerance) -> Result<HermitianMatrix> {
    let f = pinv_factor(m, tol)?;
    Ok(HermitianMatrix::hermitize(&f * f.adjoint()))
}

/// `J` with `J J* = A`, one column `sqrt(lambda) v` per eigenpair above the rank cutoff.
pub fn psd_factor(a: &HermitianMatrix, tol: &Tolerance) -> Result<CMat> {
    psd_factor_scaled(a, 0.0, tol)
}

pub fn psd_factor_scaled(a: &HermitianMatrix, scale: f64, tol: &Tolerance) -> Result<CMat> {
    let eig = psd_eigen(a, scale, tol)?;
    let cut = eig.cutoff(scale, tol);
    let idx: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > cut)
        .collect();
    let mut j = select_columns(&eig.vectors, &idx);
    for (c, &i) in idx.iter().enumerate() {
        j.column_mut(c).scale_mut(eig.values[i].sqrt());
    }
    Ok(j)
}

/// Hermitian PSD square root; eigenvalues in `[-rank_rtol * lambda_max, 0)` are clipped.
pub fn psd_sqrt(a: &HermitianMatrix, tol: &Tolerance) -> Result<HermitianMatrix> {
    let eig = psd_eigen(a, 0.0, tol)?;
    let n = a.dim();
    let roots = CVec::from_iterator(n, eig.values.iter().map(|&l| c64(l.max(0.0).sqrt(), 0.0)));
    let v = &eig.vectors;
    let scaled = CMat::from_fn(n, n, |r, c| v[(r, c)] * roots[c]);
    Ok(HermitianMatrix::hermitize(&scaled * v.adjoint()))
}

/// Orthonormal basis of the kernel of a PSD matrix, ascending eigenvalue order.
pub fn null_basis(a: &HermitianMatrix, tol: &Tolerance) -> Result<Subspace> {
    null_basis_scaled(a, 0.0, tol)
}

/// Like [`null_basis`], with eigenvalues judged against `max(lambda_max, scale)`.
pub fn null_basis_scaled(a: &HermitianMatrix, scale: f64, tol: &Tolerance) -> Result<Subspace> {
    let eig = psd_eigen(a, scale, tol)?;
    let cut = eig.cutoff(scale, tol);
    let mut basis = eig.columns_where(|l| l <= cut);
    normalize_phases(&mut basis);
    Ok(Subspace {
        ambient: a.dim(),
        basis,
    })
}

/// Orthonormal basis of the range of a PSD matrix.
pub fn range_basis_scaled(a: &HermitianMatrix, scale: f64, tol: &Tolerance) -> Result<Subspace> {
    let eig = psd_eigen(a, scale, tol)?;
    let cut = eig.cutoff(scale, tol);
    let mut basis = eig.columns_where(|l| l > cut);
    normalize_phases(&mut basis);
    Ok(Subspace {
        ambient: a.dim(),
        basis,
    })
}

/// Makes the first coordinate of non-negligible modulus of each column real positive.
fn normalize_phases(basis: &mut CMat) {
    for mut col in basis.column_iter_mut() {
        if let Some(p) = col.iter().find(|z| z.norm() > PHASE_PIVOT_ATOL).copied() {
            let phase = p.conj() / p.norm();
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
}

/// Thin SVD `m = U diag(s) V*`, returning `U` and `s` (nonincreasing).
///
/// Goes through faer: nalgebra's complex SVD can return factors that do not reconstruct the
/// input. Should faer's iteration fail to converge, falls back to the eigendecomposition of
/// `m m*`, which loses accuracy below `sqrt(eps) * sigma_max`.
pub fn thin_svd(m: &CMat) -> (CMat, Vec<f64>) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (CMat::zeros(rows, 0), Vec::new());
    }
    let fm = faer::Mat::<C64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    match fm.thin_svd() {
        Ok(svd) => {
            let k = rows.min(cols);
            let u = svd.U();
            let s = svd.S().column_vector();
            let values = (0..k).map(|i| s[i].re.max(0.0)).collect();
            (CMat::from_fn(rows, k, |i, j| u[(i, j)]), values)
        }
        Err(_) => {
            let gram = HermitianMatrix::hermitize(m * m.adjoint());
            let eig = gram.eigen();
            let k = rows.min(cols);
            let idx: Vec<usize> = (0..rows).rev().take(k).collect();
            let values = idx.iter().map(|&i| eig.values[i].max(0.0).sqrt()).collect();
            (select_columns(&eig.vectors, &idx), values)
        }
    }
}

/// Orthonormal basis of the column space of `m`; singular values at or below
/// `rank_rtol * sigma_max` are dropped.
pub fn orth_range(m: &CMat, tol: &Tolerance) -> CMat {
    let (u, sv) = thin_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let idx: Vec<usize> = (0..sv.len())
        .filter(|&i| sv[i] > 0.0 && sv[i] > tol.rank_rtol * smax)
        .collect();
    select_columns(&u, &idx)
}

/// Orthonormal basis of the column space of `m`, keeping singular values above `cutoff`.
pub fn orth_range_above(m: &CMat, cutoff: f64) -> CMat {
    let (u, sv) = thin_svd(m);
    let idx: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > cutoff).collect();
    select_columns(&u, &idx)
}

/// Numerical rank from singular values, cutoff `rank_rtol * sigma_max`.
pub fn numerical_rank(m: &CMat, tol: &Tolerance) -> usize {
    let (_, sv) = thin_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > 0.0 && s > tol.rank_rtol * smax).count()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    thin_svd(m).1.first().copied().unwrap_or(0.0)
}

/// A linear subspace of `C^n` held as an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: CMat,
}

impl Subspace {
    pub fn new(basis: CMat) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.adjoint() * &basis;
        let deviation = (gram - CMat::identity(k, k))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > ORTHONORMAL_ATOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Subspace {
            ambient: basis.nrows(),
            basis,
        })
    }

    /// Orthonormalizes an arbitrary spanning set (columns of `vectors`).
    pub fn span(vectors: &CMat, tol: &Tolerance) -> Self {
        Subspace {
            ambient: vectors.nrows(),
            basis: orth_range(vectors, tol),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: CMat::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: CMat::identity(ambient, ambient),
        }
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Self {
        let basis = CMat::from_fn(ambient, indices.len(), |r, c| {
            if r == indices[c] {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        Subspace { ambient, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Orthogonal complement in the ambient space.
    pub fn complement(&self) -> Self {
        let n = self.ambient;
        if self.dim() == 0 {
            return Subspace::full(n);
        }
        let p = orth_project(self);
        let q = CMat::identity(n, n) - p.as_matrix();
        // I - P is a projector: eigenvalues are 0 or 1.
        let eig = HermitianMatrix::hermitize(q).eigen();
        let mut basis = eig.columns_where(|l| l > 0.5);
        normalize_phases(&mut basis);
        Subspace { ambient: n, basis }
    }
}

/// Orthogonal projection onto a subspace, `B B*`.
pub fn orth_project(s: &Subspace) -> HermitianMatrix {
    HermitianMatrix::hermitize(&s.basis * s.basis.adjoint())
}

/// True iff `ran A^{1/2}` and `ran B^{1/2}` meet only in zero.
pub fn range_intersection_trivial(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: &Tolerance,
) -> Result<bool> {
    range_intersection_trivial_scaled(a, 0.0, b, 0.0, tol)
}

/// Rank test on the concatenated block of orthonormal range bases: the ranges meet
/// trivially iff `rank [Q_A | Q_B] = rank A + rank B`. Each rank is judged against the
/// given reference scale (or the matrix's own largest eigenvalue, whichever is larger).
pub fn range_intersection_trivial_scaled(
    a: &HermitianMatrix,
    a_scale: f64,
    b: &HermitianMatrix,
    b_scale: f64,
    tol: &Tolerance,
) -> Result<bool> {
    check_dim(a.dim(), b.dim())?;
    let qa = range_basis_scaled(a, a_scale, tol)?;
    let qb = range_basis_scaled(b, b_scale, tol)?;
    let (ra, rb) = (qa.dim(), qb.dim());
    if ra == 0 || rb == 0 {
        return Ok(true);
    }
    let n = a.dim();
    let mut block = CMat::zeros(n, ra + rb);
    block.columns_mut(0, ra).copy_from(qa.basis());
    block.columns_mut(ra, rb).copy_from(qb.basis());
    Ok(numerical_rank(&block, tol) == ra + rb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMat, b: &CMat, eps: f64) -> bool {
        (a - b).norm() <= eps
    }

    #[test]
    fn pinv_examples() {
        let tol = Tolerance::default();
        let p = pinv(&HermitianMatrix::diag(&[2.0, 0.0]), &tol).unwrap();
        assert!(close(p.as_matrix(), HermitianMatrix::diag(&[0.5, 0.0]).as_matrix(), 1e-14));

        let z = pinv(&HermitianMatrix::zeros(3), &tol).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);

        let m = HermitianMatrix::from_real_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let inv = pinv(&m, &tol).unwrap();
        let expected = HermitianMatrix::from_real_rows(&[[1.0, -1.0], [-1.0, 2.0]]).unwrap();
        assert!(close(inv.as_matrix(), expected.as_matrix(), 1e-13));
        let prod = m.as_matrix() * inv.as_matrix();
        assert!(close(&prod, &CMat::identity(2, 2), 1e-13));
    }

    #[test]
    fn pinv_rejects_indefinite() {
        let tol = Tolerance::default();
        let err = pinv(&HermitianMatrix::diag(&[1.0, -1.0]), &tol).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
        // rounding-level negatives are accepted
        assert!(pinv(&HermitianMatrix::diag(&[1.0, -1e-14]), &tol).is_ok());
    }

    #[test]
    fn sqrt_examples() {
        let tol = Tolerance::default();
        let r = psd_sqrt(&HermitianMatrix::diag(&[4.0, 9.0]), &tol).unwrap();
        assert!(close(r.as_matrix(), HermitianMatrix::diag(&[2.0, 3.0]).as_matrix(), 1e-14));
        let i = psd_sqrt(&HermitianMatrix::identity(3), &tol).unwrap();
        assert!(close(i.as_matrix(), &CMat::identity(3, 3), 1e-14));
        let m = HermitianMatrix::from_real_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let r = psd_sqrt(&m, &tol).unwrap();
        assert!(close(&(r.as_matrix() * r.as_matrix()), m.as_matrix(), 1e-10));
    }

    #[test]
    fn null_basis_examples() {
        let tol = Tolerance::default();
        let k = null_basis(&HermitianMatrix::diag(&[1.0, 0.0]), &tol).unwrap();
        assert_eq!(k.dim(), 1);
        assert!(close(k.basis(), &CMat::from_column_slice(2, 1, &[c64(0.0, 0.0), c64(1.0, 0.0)]), 1e-14));

        assert_eq!(null_basis(&HermitianMatrix::identity(2), &tol).unwrap().dim(), 0);
        assert_eq!(null_basis(&HermitianMatrix::zeros(3), &tol).unwrap().dim(), 3);

        let m = HermitianMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let k = null_basis(&m, &tol).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // first coordinate made real positive
        assert!(close(k.basis(), &CMat::from_column_slice(2, 1, &[c64(s, 0.0), c64(-s, 0.0)]), 1e-14));
    }

    #[test]
    fn projection_examples() {
        let p = orth_project(&Subspace::coordinate(2, &[0]));
        assert!(close(p.as_matrix(), HermitianMatrix::diag(&[1.0, 0.0]).as_matrix(), 0.0));
        assert_eq!(orth_project(&Subspace::zero(3)).frobenius_norm(), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sub = Subspace::new(CMat::from_column_slice(2, 1, &[c64(s, 0.0), c64(s, 0.0)])).unwrap();
        let expected = HermitianMatrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert!(close(orth_project(&sub).as_matrix(), expected.as_matrix(), 1e-15));
    }

    #[test]
    fn range_intersection_examples() {
        let tol = Tolerance::default();
        let e1 = HermitianMatrix::diag(&[1.0, 0.0]);
        let e2 = HermitianMatrix::diag(&[0.0, 1.0]);
        assert!(range_intersection_trivial(&e1, &e2, &tol).unwrap());
        let i = HermitianMatrix::identity(2);
        assert!(!range_intersection_trivial(&i, &i, &tol).unwrap());
        let ones = HermitianMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(range_intersection_trivial(&ones, &e1, &tol).unwrap());
        assert!(matches!(
            range_intersection_trivial(&ones, &HermitianMatrix::identity(3), &tol),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hermitian_validation() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = c64(1e-3, 0.0);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = c64(1e-15, 0.0);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.as_matrix()[(0, 1)], h.as_matrix()[(1, 0)].conj());
    }

    #[test]
    fn complement_is_orthogonal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sub = Subspace::new(CMat::from_column_slice(3, 1, &[c64(s, 0.0), c64(0.0, s), c64(0.0, 0.0)])).unwrap();
        let comp = sub.complement();
        assert_eq!(comp.dim(), 2);
        assert!((sub.basis().adjoint() * comp.basis()).norm() < 1e-14);
        assert_eq!(Subspace::zero(2).complement().dim(), 2);
        assert_eq!(Subspace::full(2).complement().dim(), 0);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(Tolerance::new(0.0, 1e-9).is_err());
        assert!(Tolerance::new(1e-10, -1.0).is_err());
        assert!(Tolerance::new(1e-10, 1e-9).is_ok());
    }
}
