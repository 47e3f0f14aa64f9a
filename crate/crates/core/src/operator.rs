//! Positive operators: the induced space `H_A`, the factorization `A = J_A J_A*`, and the
//! short of `A` to a subspace written as `J_A (I - P) J_A*`.
//!
//! Naming: [`krein_short`]`(A, M)` is the short that *vanishes on* `M`, whose quadratic form is
//! `inf_{y in M} (A(x - y) | x - y)`. The short with range inside `M` is
//! `krein_short(A, M.complement())`.
//!
//! `H_A` is the closure of `ran A` under `(Ax | Ay)_A = (Ax | y)`. In finite dimension it is
//! the `r = rank A` dimensional coordinate space in which `Ax` has coordinates `J* x`, where
//! `J = V diag(sqrt(lambda))` collects the nonzero eigenpairs of `A`.

use crate::error::Result;
use crate::forms::{self, PsdForm};
use crate::linalg::{
    self, c64, check_dim, orth_range_above, CMat, CVec, HermitianMatrix, Subspace, Tolerance,
};

/// `A = J J*` with `J` an `n x rank(A)` matrix whose columns span `ran A^{1/2}`.
#[derive(Debug, Clone)]
pub struct InducedSpaceFactor {
    a: HermitianMatrix,
    j: CMat,
    scale: f64,
}

impl InducedSpaceFactor {
    pub fn operator(&self) -> &HermitianMatrix {
        &self.a
    }

    /// The embedding `J_A : H_A -> C^n`.
    pub fn j(&self) -> &CMat {
        &self.j
    }

    pub fn rank(&self) -> usize {
        self.j.ncols()
    }

    /// Coordinates of `Ax` in `H_A`, i.e. `J_A* x`.
    pub fn embed(&self, x: &CVec) -> Result<CVec> {
        check_dim(self.a.dim(), x.len())?;
        Ok(self.j.adjoint() * x)
    }

    /// `|J J* - A|_F`.
    pub fn reconstruction_residual(&self) -> f64 {
        (&self.j * self.j.adjoint() - self.a.as_matrix()).norm()
    }
}

pub fn build_factor(a: &HermitianMatrix, tol: &Tolerance) -> Result<InducedSpaceFactor> {
    let scale = a.eigen().lambda_max().max(0.0);
    let j = linalg::psd_factor(a, tol)?;
    Ok(InducedSpaceFactor {
        a: a.clone(),
        j,
        scale,
    })
}

/// The short of `A` to `M` as `J_A (I - P) J_A*`, where `P` projects `H_A` onto the image of
/// `M`, spanned by the columns of `J_A* Y` for an orthonormal basis `Y` of `M`.
///
/// Directions of `J_A* Y` with squared singular value at most `compression_rtol * lambda_max(A)`
/// are treated as null, matching the kernel convention of the Schur-complement route.
pub fn krein_short(a: &HermitianMatrix, m: &Subspace, tol: &Tolerance) -> Result<HermitianMatrix> {
    check_dim(a.dim(), m.ambient_dim())?;
    let factor = build_factor(a, tol)?;
    Ok(short_from_factor(&factor, m, tol))
}

fn short_from_factor(factor: &InducedSpaceFactor, m: &Subspace, tol: &Tolerance) -> HermitianMatrix {
    let j = &factor.j;
    if m.dim() == 0 || j.ncols() == 0 {
        return HermitianMatrix::hermitize(j * j.adjoint());
    }
    let image = j.adjoint() * m.basis();
    let q = orth_range_above(&image, (tol.compression_rtol() * factor.scale).sqrt());
    let k = j - (j * &q) * q.adjoint();
    HermitianMatrix::hermitize(&k * k.adjoint())
}

/// `(Ax|x) - sup { |(Ax|y)|^2 : y in M, (Ay|y) <= 1 }`, with the supremum evaluated in closed
/// form as `(Y*Ax)* (Y*AY)^+ (Y*Ax)`.
pub fn short_quadratic_sup(
    a: &HermitianMatrix,
    m: &Subspace,
    x: &CVec,
    tol: &Tolerance,
) -> Result<f64> {
    check_dim(a.dim(), m.ambient_dim())?;
    check_dim(a.dim(), x.len())?;
    let total = a.quadratic(x)?;
    Ok((total - constrained_sup(a, m, x, tol)?).max(0.0))
}

/// `sup { |(Ax|y)|^2 : y in M, (Ay|y) <= 1 }`.
pub fn constrained_sup(a: &HermitianMatrix, m: &Subspace, x: &CVec, tol: &Tolerance) -> Result<f64> {
    check_dim(a.dim(), m.ambient_dim())?;
    check_dim(a.dim(), x.len())?;
    if m.dim() == 0 {
        return Ok(0.0);
    }
    let eig = a.eigen();
    eig.check_psd(0.0, tol)?;
    let scale = eig.lambda_max().max(0.0);
    let y = m.basis();
    let ay = a.as_matrix() * y;
    let compressed = HermitianMatrix::hermitize(y.adjoint() * &ay);
    let w = linalg::compression_pinv_factor(&compressed, scale, tol)?;
    let b = ay.adjoint() * x;
    Ok((w.adjoint() * b).norm_squared())
}

/// `A = A_ll + A_perp` relative to `B`.
#[derive(Debug, Clone)]
pub struct OperatorDecomposition {
    pub a_ll: HermitianMatrix,
    pub a_perp: HermitianMatrix,
    /// `A_ll` is dominated by `B`; always the case in finite dimension.
    pub unique: bool,
    /// Worst gap between `(A_perp x|x)` and the constrained supremum over `ker B`, on the
    /// polarization probes `e_i`, `e_i + e_j`, `e_i + i e_j`.
    pub sup_formula_residual: f64,
}

pub fn operator_decompose(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: &Tolerance,
) -> Result<OperatorDecomposition> {
    check_dim(a.dim(), b.dim())?;
    let a_form = PsdForm::new(a.clone(), tol)?;
    let b_form = PsdForm::new(b.clone(), tol)?;
    let kernel = linalg::null_basis(b, tol)?;
    let a_ll = krein_short(a, &kernel, tol)?;
    let ll_form = PsdForm::from_computed(a_ll, a_form.scale(), tol)?;
    let perp_form = a_form.difference(&ll_form, tol)?;

    let mut sup_formula_residual: f64 = 0.0;
    for x in polarization_probes(a.dim()) {
        let sup = constrained_sup(a, &kernel, &x, tol)?;
        let direct = perp_form.gram().quadratic(&x)?;
        sup_formula_residual = sup_formula_residual.max((sup - direct).abs());
    }
    let unique = forms::is_dominated(&ll_form, &b_form, tol)?.is_some();
    Ok(OperatorDecomposition {
        a_ll: ll_form.gram().clone(),
        a_perp: perp_form.gram().clone(),
        unique,
        sup_formula_residual,
    })
}

/// `e_i`, `e_i + e_j` and `e_i + i e_j` for `i < j`: the quadratic form on these vectors
/// determines a Hermitian matrix.
pub fn polarization_probes(n: usize) -> Vec<CVec> {
    let unit = |i: usize| {
        let mut v = CVec::zeros(n);
        v[i] = c64(1.0, 0.0);
        v
    };
    let mut out: Vec<CVec> = (0..n).map(unit).collect();
    for i in 0..n {
        for j in i + 1..n {
            let mut v = unit(i);
            v[j] = c64(1.0, 0.0);
            out.push(v);
            let mut v = unit(i);
            v[j] = c64(0.0, 1.0);
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::short_form;

    fn real(rows: &[[f64; 2]]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(rows).unwrap()
    }

    fn vec(values: &[f64]) -> CVec {
        CVec::from_iterator(values.len(), values.iter().map(|&v| c64(v, 0.0)))
    }

    #[test]
    fn factor_examples() {
        let tol = Tolerance::default();
        let f = build_factor(&HermitianMatrix::identity(2), &tol).unwrap();
        assert_eq!(f.rank(), 2);
        assert!(f.reconstruction_residual() < 1e-14);
        assert_eq!(build_factor(&HermitianMatrix::zeros(3), &tol).unwrap().rank(), 0);
        let f = build_factor(&HermitianMatrix::diag(&[4.0, 0.0]), &tol).unwrap();
        assert_eq!(f.rank(), 1);
        let col = f.j().column(0);
        assert!((col[0].norm() - 2.0).abs() < 1e-14 && col[1].norm() < 1e-14);
    }

    #[test]
    fn krein_short_examples() {
        let tol = Tolerance::default();
        let a = real(&[[2.0, 1.0], [1.0, 1.0]]);
        let s = krein_short(&a, &Subspace::zero(2), &tol).unwrap();
        assert!((s.as_matrix() - a.as_matrix()).norm() < 1e-14);
        let s = krein_short(&HermitianMatrix::identity(2), &Subspace::coordinate(2, &[0]), &tol).unwrap();
        assert!((s.as_matrix() - HermitianMatrix::diag(&[0.0, 1.0]).as_matrix()).norm() < 1e-14);
        let s = krein_short(&a, &Subspace::coordinate(2, &[1]), &tol).unwrap();
        assert!((s.as_matrix() - HermitianMatrix::diag(&[1.0, 0.0]).as_matrix()).norm() < 1e-14);
    }

    #[test]
    fn krein_short_range_convention() {
        // the short with range inside M is obtained from the complement
        let tol = Tolerance::default();
        let a = real(&[[2.0, 1.0], [1.0, 1.0]]);
        let m = Subspace::coordinate(2, &[0]);
        let s = krein_short(&a, &m.complement(), &tol).unwrap();
        assert!((s.as_matrix() - HermitianMatrix::diag(&[1.0, 0.0]).as_matrix()).norm() < 1e-14);
    }

    #[test]
    fn sup_examples() {
        let tol = Tolerance::default();
        let i = HermitianMatrix::identity(2);
        let e1 = Subspace::coordinate(2, &[0]);
        let v = short_quadratic_sup(&i, &e1, &vec(&[1.0, 1.0]), &tol).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        let a = real(&[[2.0, 1.0], [1.0, 1.0]]);
        let x = vec(&[0.3, -1.2]);
        let v = short_quadratic_sup(&a, &Subspace::zero(2), &x, &tol).unwrap();
        assert!((v - a.quadratic(&x).unwrap()).abs() < 1e-15);
        assert_eq!(short_quadratic_sup(&a, &e1, &vec(&[0.0, 0.0]), &tol).unwrap(), 0.0);
    }

    #[test]
    fn sup_matches_brute_force_maximization() {
        // sup over y = c e1 with (Ay|y) = 2|c|^2 <= 1 of |(Ax|y)|^2, scanned over c on the boundary
        let tol = Tolerance::default();
        let a = real(&[[2.0, 1.0], [1.0, 1.0]]);
        let x = vec(&[0.4, 1.1]);
        let ax = a.as_matrix() * &x;
        let radius = (0.5f64).sqrt();
        let brute = (0..3600)
            .map(|k| {
                let theta = k as f64 * std::f64::consts::PI / 1800.0;
                let y = vec(&[radius, 0.0]) * c64(theta.cos(), theta.sin());
                ax.dotc(&y).norm_sqr()
            })
            .fold(0.0, f64::max);
        let got = constrained_sup(&a, &Subspace::coordinate(2, &[0]), &x, &tol).unwrap();
        assert!((brute - got).abs() < 1e-12, "{brute} vs {got}");
    }

    #[test]
    fn decompose_examples() {
        let tol = Tolerance::default();
        let a = real(&[[2.0, 1.0], [1.0, 1.0]]);
        let d = operator_decompose(&a, &real(&[[1.0, 0.3], [0.3, 2.0]]), &tol).unwrap();
        assert!((d.a_ll.as_matrix() - a.as_matrix()).norm() < 1e-14);
        assert!(d.a_perp.frobenius_norm() < 1e-14);
        assert!(d.unique);

        let ones = real(&[[1.0, 1.0], [1.0, 1.0]]);
        let d = operator_decompose(&ones, &HermitianMatrix::diag(&[1.0, 0.0]), &tol).unwrap();
        assert!(d.a_ll.frobenius_norm() < 1e-14);
        assert!((d.a_perp.as_matrix() - ones.as_matrix()).norm() < 1e-14);
        assert!(d.unique && d.sup_formula_residual < 1e-14);

        let d = operator_decompose(
            &HermitianMatrix::diag(&[3.0, 5.0]),
            &HermitianMatrix::diag(&[1.0, 0.0]),
            &tol,
        )
        .unwrap();
        assert!((d.a_ll.as_matrix() - HermitianMatrix::diag(&[3.0, 0.0]).as_matrix()).norm() < 1e-14);
        assert!((d.a_perp.as_matrix() - HermitianMatrix::diag(&[0.0, 5.0]).as_matrix()).norm() < 1e-14);
    }

    #[test]
    fn factor_route_matches_schur_route() {
        let tol = Tolerance::default();
        let a = real(&[[2.0, 1.0], [1.0, 1.0]]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = Subspace::new(CMat::from_column_slice(2, 1, &[c64(s, 0.0), c64(0.0, -s)])).unwrap();
        let k = krein_short(&a, &m, &tol).unwrap();
        let f = short_form(&PsdForm::new(a, &tol).unwrap(), &m, &tol).unwrap();
        assert!((k.as_matrix() - f.gram().as_matrix()).norm() < 1e-14);
    }

    #[test]
    fn probes_cover_upper_triangle() {
        assert_eq!(polarization_probes(3).len(), 3 + 2 * 3);
        assert!(polarization_probes(0).is_empty());
    }
}
