//! Positive functionals on finite-dimensional *-algebras: the induced form `t_f(a, b) = f(b* a)`,
//! the GNS triple `(H_f, pi_f, xi_f)`, and the decomposition `f = f_ll + f_perp` relative to a
//! second positive functional `g`.
//!
//! Elements are coefficient vectors in a fixed basis `e_0, .., e_{d-1}`. Neither a unit nor
//! commutativity is assumed; representability is decided by solving for the cyclic vector.
//!
//! Gram convention: `gram[r][c] = f(e_r* e_c)`, so that `t_f(a, b) = b* gram a` and
//! `f(a* a) = a* gram a`, matching [`PsdForm`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forms::{short_form, PsdForm};
use crate::linalg::{self, c64, orth_range_above, CMat, CVec, HermitianMatrix, Tolerance};

pub const MAX_ALGEBRA_DIM: usize = 16;

/// Tolerance on the algebra axioms, relative to `1 + max |c|^2`.
pub const AXIOM_ATOL: f64 = 1e-10;

/// A complex *-algebra given by structure constants and the matrix of the involution.
#[derive(Debug, Clone, PartialEq)]
pub struct StarAlgebra {
    dim: usize,
    /// `e_i e_j = sum_k structure[(i * dim + j) * dim + k] e_k`
    structure: Vec<crate::linalg::C64>,
    /// `e_i* = sum_k involution[(i, k)] e_k`
    involution: CMat,
}

impl StarAlgebra {
    /// `structure[i][j][k]` is the coefficient of `e_k` in `e_i e_j`.
    pub fn new(structure: Vec<Vec<Vec<crate::linalg::C64>>>, involution: CMat) -> Result<Self> {
        let dim = structure.len();
        if dim == 0 || dim > MAX_ALGEBRA_DIM {
            return Err(Error::InvalidAlgebra(format!(
                "dimension {dim} outside 1..={MAX_ALGEBRA_DIM}"
            )));
        }
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for row in &structure {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            for coeffs in row {
                if coeffs.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: coeffs.len(),
                    });
                }
                flat.extend_from_slice(coeffs);
            }
        }
        if involution.nrows() != dim || involution.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: involution.nrows().max(involution.ncols()),
            });
        }
        let algebra = StarAlgebra {
            dim,
            structure: flat,
            involution,
        };
        algebra.validate()?;
        Ok(algebra)
    }

    fn c(&self, i: usize, j: usize, k: usize) -> crate::linalg::C64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim;
        if self.structure.iter().chain(self.involution.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidAlgebra("non-finite coefficient".into()));
        }
        let cmax = self.structure.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let bound = AXIOM_ATOL * (1.0 + cmax * cmax);
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    for m in 0..d {
                        let left: crate::linalg::C64 =
                            (0..d).map(|k| self.c(i, j, k) * self.c(k, l, m)).sum();
                        let right: crate::linalg::C64 =
                            (0..d).map(|k| self.c(j, l, k) * self.c(i, k, m)).sum();
                        if (left - right).norm() > bound {
                            return Err(Error::InvalidAlgebra(format!(
                                "product not associative on basis triple ({i}, {j}, {l})"
                            )));
                        }
                    }
                }
            }
        }
        let s = &self.involution;
        let smax = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let twice = s.map(|z| z.conj()) * s;
        let dev = (twice - CMat::identity(d, d)).camax();
        if dev > AXIOM_ATOL * (1.0 + smax * smax) {
            return Err(Error::InvalidAlgebra(format!(
                "involution applied twice is not the identity (deviation {dev:e})"
            )));
        }
        let star_bound = AXIOM_ATOL * (1.0 + cmax * smax * smax) * (1.0 + cmax);
        for i in 0..d {
            for j in 0..d {
                let ab_star = self.star(&self.product(&self.basis(i), &self.basis(j)));
                let b_star_a_star = self.product(&self.star(&self.basis(j)), &self.star(&self.basis(i)));
                if (ab_star - b_star_a_star).camax() > star_bound {
                    return Err(Error::InvalidAlgebra(format!(
                        "(e_{i} e_{j})* differs from e_{j}* e_{i}*"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn involution(&self) -> &CMat {
        &self.involution
    }

    /// Structure constants as nested arrays `[i][j][k]`.
    pub fn structure(&self) -> Vec<Vec<Vec<crate::linalg::C64>>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| (0..self.dim).map(|k| self.c(i, j, k)).collect())
                    .collect()
            })
            .collect()
    }

    pub fn basis(&self, i: usize) -> CVec {
        let mut v = CVec::zeros(self.dim);
        v[i] = c64(1.0, 0.0);
        v
    }

    pub fn product(&self, a: &CVec, b: &CVec) -> CVec {
        let d = self.dim;
        let mut out = CVec::zeros(d);
        for i in 0..d {
            if a[i] == c64(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                let ab = a[i] * b[j];
                if ab == c64(0.0, 0.0) {
                    continue;
                }
                for k in 0..d {
                    out[k] += ab * self.c(i, j, k);
                }
            }
        }
        out
    }

    /// `(sum a_i e_i)* = sum conj(a_i) e_i*`.
    pub fn star(&self, a: &CVec) -> CVec {
        self.involution.transpose() * a.map(|z| z.conj())
    }

    /// Matrix of `x -> e_i x` on coefficient vectors.
    pub fn left_multiplication(&self, i: usize) -> CMat {
        CMat::from_fn(self.dim, self.dim, |k, j| self.c(i, j, k))
    }
}

/// Named fixture algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// `C^d` with pointwise product.
    Diagonal,
    /// `M_k(C)` in matrix units, `e_ab` at index `a k + b`.
    Matrix,
    /// The group algebra of `Z/nZ`.
    CyclicGroup,
}

impl Fixture {
    pub fn build(self, param: usize) -> Result<StarAlgebra> {
        match self {
            Fixture::Diagonal => diagonal_algebra(param),
            Fixture::Matrix => matrix_algebra(param),
            Fixture::CyclicGroup => cyclic_group_algebra(param),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Diagonal => "diagonal",
            Fixture::Matrix => "matrix",
            Fixture::CyclicGroup => "cyclic_group",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "diagonal" => Some(Fixture::Diagonal),
            "matrix" => Some(Fixture::Matrix),
            "cyclic_group" => Some(Fixture::CyclicGroup),
            _ => None,
        }
    }
}

fn from_table(d: usize, product: impl Fn(usize, usize) -> Option<usize>, star: impl Fn(usize) -> usize) -> Result<StarAlgebra> {
    let zero = c64(0.0, 0.0);
    let structure = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut v = vec![zero; d];
                    if let Some(k) = product(i, j) {
                        v[k] = c64(1.0, 0.0);
                    }
                    v
                })
                .collect()
        })
        .collect();
    let involution = CMat::from_fn(d, d, |i, k| if star(i) == k { c64(1.0, 0.0) } else { zero });
    StarAlgebra::new(structure, involution)
}

pub fn diagonal_algebra(d: usize) -> Result<StarAlgebra> {
    from_table(d, |i, j| (i == j).then_some(i), |i| i)
}

pub fn matrix_algebra(k: usize) -> Result<StarAlgebra> {
    from_table(
        k * k,
        |i, j| (i % k == j / k).then_some((i / k) * k + j % k),
        |i| (i % k) * k + i / k,
    )
}

pub fn cyclic_group_algebra(n: usize) -> Result<StarAlgebra> {
    if n == 0 {
        return Err(Error::InvalidAlgebra("empty group".into()));
    }
    from_table(n, |i, j| Some((i + j) % n), |i| (n - i) % n)
}

/// A positive linear functional, `f(e_i) = coeffs[i]`.
#[derive(Debug, Clone)]
pub struct Functional {
    algebra: Arc<StarAlgebra>,
    coeffs: CVec,
}

impl Functional {
    /// Validates positivity: the Gram matrix must be Hermitian PSD.
    pub fn new(algebra: Arc<StarAlgebra>, coeffs: CVec, tol: &Tolerance) -> Result<Self> {
        Functional::with_scale(algebra, coeffs, 0.0, tol)
    }

    /// Positivity judged against `scale` as well as the functional's own spectrum; used for
    /// computed parts of a larger functional.
    fn with_scale(algebra: Arc<StarAlgebra>, coeffs: CVec, scale: f64, tol: &Tolerance) -> Result<Self> {
        linalg::check_dim(algebra.dim, coeffs.len())?;
        let f = Functional { algebra, coeffs };
        let gram = HermitianMatrix::new(f.gram_matrix())?;
        gram.eigen().check_psd(scale, tol)?;
        Ok(f)
    }

    pub fn zero(algebra: Arc<StarAlgebra>) -> Self {
        let coeffs = CVec::zeros(algebra.dim);
        Functional { algebra, coeffs }
    }

    pub fn algebra(&self) -> &Arc<StarAlgebra> {
        &self.algebra
    }

    pub fn coeffs(&self) -> &CVec {
        &self.coeffs
    }

    /// `f(a)` for a coefficient vector `a`.
    pub fn apply(&self, a: &CVec) -> crate::linalg::C64 {
        self.coeffs.iter().zip(a.iter()).map(|(f, x)| f * x).sum()
    }

    /// `gram[r][c] = f(e_r* e_c)`, without validation.
    pub fn gram_matrix(&self) -> CMat {
        let alg = &self.algebra;
        let stars: Vec<CVec> = (0..alg.dim).map(|r| alg.star(&alg.basis(r))).collect();
        CMat::from_fn(alg.dim, alg.dim, |r, c| {
            self.apply(&alg.product(&stars[r], &alg.basis(c)))
        })
    }
}

fn same_algebra(f: &Functional, g: &Functional) -> Result<()> {
    if Arc::ptr_eq(&f.algebra, &g.algebra) || f.algebra == g.algebra {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch)
    }
}

/// `t_f(a, b) = f(b* a)`.
pub fn induced_gram(f: &Functional, tol: &Tolerance) -> Result<PsdForm> {
    PsdForm::new(HermitianMatrix::new(f.gram_matrix())?, tol)
}

/// The GNS triple in isometric coordinates: `a + N_f` has coordinates `quotient_map * a`, and
/// the `f`-inner product becomes the standard one.
#[derive(Debug, Clone)]
pub struct GnsData {
    pub quotient_map: CMat,
    /// Right inverse of `quotient_map`: coefficients of a preimage of each coordinate vector.
    pub lift: CMat,
    pub pi: Vec<CMat>,
    pub xi: CVec,
    /// Residual of the Riesz system `<a + N_f, xi> = f(a)`.
    pub riesz_residual: f64,
    scale: f64,
}

impl GnsData {
    pub fn quotient_dim(&self) -> usize {
        self.quotient_map.nrows()
    }

    /// Coefficients of an algebra element whose class is `xi`.
    pub fn xi_preimage(&self) -> CVec {
        &self.lift * &self.xi
    }

    /// `pi(a)` for a coefficient vector `a`.
    pub fn pi_of(&self, a: &CVec) -> CMat {
        let r = self.quotient_dim();
        self.pi
            .iter()
            .zip(a.iter())
            .fold(CMat::zeros(r, r), |acc, (p, &x)| acc + p * x)
    }

    /// Max over basis elements of `|<pi(e_i) xi, xi> - f(e_i)|`.
    pub fn reconstruction_residual(&self, f: &Functional) -> f64 {
        self.pi
            .iter()
            .zip(f.coeffs.iter())
            .map(|(p, &fi)| (self.xi.dotc(&(p * &self.xi)) - fi).norm())
            .fold(0.0, f64::max)
    }

    /// Max over basis pairs of `|pi(e_i e_j) - pi(e_i) pi(e_j)|_F` and `|pi(e_i*) - pi(e_i)*|_F`.
    pub fn homomorphism_residual(&self, algebra: &StarAlgebra) -> f64 {
        let d = algebra.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let prod = algebra.product(&algebra.basis(i), &algebra.basis(j));
                worst = worst.max((self.pi_of(&prod) - &self.pi[i] * &self.pi[j]).norm());
            }
            let star = algebra.star(&algebra.basis(i));
            worst = worst.max((self.pi_of(&star) - self.pi[i].adjoint()).norm());
        }
        worst
    }
}

pub fn gns(f: &Functional, tol: &Tolerance) -> Result<GnsData> {
    gns_scaled(f, 0.0, tol)
}

fn gns_scaled(f: &Functional, scale: f64, tol: &Tolerance) -> Result<GnsData> {
    let gram = HermitianMatrix::new(f.gram_matrix())?;
    let eig = gram.eigen();
    eig.check_psd(scale, tol)?;
    let scale = scale.max(eig.lambda_max().max(0.0));
    let cutoff = eig.cutoff(scale, tol);
    let idx: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > cutoff).collect();
    let d = f.algebra.dim;
    let r = idx.len();
    let mut quotient_map = CMat::zeros(r, d);
    let mut lift = CMat::zeros(d, r);
    for (row, &i) in idx.iter().enumerate() {
        let v = eig.vectors.column(i);
        let s = eig.values[i].sqrt();
        quotient_map.row_mut(row).copy_from(&(v.adjoint() * c64(s, 0.0)));
        lift.column_mut(row).copy_from(&(v * c64(s.recip(), 0.0)));
    }
    let pi = (0..d)
        .map(|i| &quotient_map * f.algebra.left_multiplication(i) * &lift)
        .collect();
    let target = f.coeffs.map(|z| z.conj());
    let xi = lift.adjoint() * &target;
    let riesz_residual = (quotient_map.adjoint() * &xi - &target).norm();
    let bound = tol.residual_atol() * (1.0 + f.coeffs.norm());
    if riesz_residual > bound {
        return Err(Error::NotRepresentable {
            residual: riesz_residual,
            bound,
        });
    }
    Ok(GnsData {
        quotient_map,
        lift,
        pi,
        xi,
        riesz_residual,
        scale,
    })
}

/// `f = f_ll + f_perp` relative to `g`, with diagnostics.
#[derive(Debug, Clone)]
pub struct FunctionalDecomposition {
    pub ll: Functional,
    pub perp: Functional,
    /// Orthogonal projection onto `M = {a + N_f : g(a* a) = 0}` in GNS coordinates.
    pub projection: CMat,
    /// `max_i |f(e_i) - f_ll(e_i) - f_perp(e_i)|`.
    pub sum_residual: f64,
    /// `max_i |(I - P) pi(e_i) P|_F`.
    pub invariance_residual: f64,
    /// `|gram(f_ll) - short(gram(f), ker gram(g))|_F`.
    pub form_bridge_residual: f64,
    /// Max of `f_ll(v* v)` over an orthonormal basis of the null space of `g`'s Gram.
    pub kernel_inclusion_max: f64,
}

pub fn functional_decompose(
    f: &Functional,
    g: &Functional,
    tol: &Tolerance,
) -> Result<FunctionalDecomposition> {
    same_algebra(f, g)?;
    let data = gns(f, tol)?;
    let f_form = induced_gram(f, tol)?;
    let g_form = induced_gram(g, tol)?;
    let kernel = linalg::null_basis(g_form.gram(), tol)?;
    let r = data.quotient_dim();

    let image = &data.quotient_map * kernel.basis();
    let q = orth_range_above(&image, (tol.compression_rtol() * data.scale).sqrt());
    let projection = &q * q.adjoint();
    let complement = CMat::identity(r, r) - &projection;

    let xi_ll = &complement * &data.xi;
    let xi_perp = &projection * &data.xi;
    let evaluate = |x: &CVec| CVec::from_iterator(data.pi.len(), data.pi.iter().map(|p| x.dotc(&(p * x))));
    let ll_coeffs = evaluate(&xi_ll);
    let perp_coeffs = evaluate(&xi_perp);

    let ll = Functional::with_scale(f.algebra.clone(), ll_coeffs, data.scale, tol)?;
    let perp = Functional::with_scale(f.algebra.clone(), perp_coeffs, data.scale, tol)?;

    let sum_residual = (&ll.coeffs + &perp.coeffs - &f.coeffs).camax();
    let invariance_residual = data
        .pi
        .iter()
        .map(|p| (&complement * p * &projection).norm())
        .fold(0.0, f64::max);
    let ll_gram = HermitianMatrix::new(ll.gram_matrix())?;
    let shorted = short_form(&f_form, &kernel, tol)?;
    let form_bridge_residual = (ll_gram.as_matrix() - shorted.gram().as_matrix()).norm();
    let kernel_inclusion_max = kernel
        .basis()
        .column_iter()
        .map(|v| ll_gram.quadratic(&v.into_owned()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    Ok(FunctionalDecomposition {
        ll,
        perp,
        projection,
        sum_residual,
        invariance_residual,
        form_bridge_residual,
        kernel_inclusion_max,
    })
}

/// Basis of the commutant `{X : X pi(e_i) = pi(e_i) X for all i}`, as `r x r` matrices.
/// The commutant is a *-algebra because `pi` is *-preserving.
pub fn commutant_basis(data: &GnsData, tol: &Tolerance) -> Vec<CMat> {
    let r = data.quotient_dim();
    if r == 0 {
        return Vec::new();
    }
    let id = CMat::identity(r, r);
    let mut normal = CMat::zeros(r * r, r * r);
    for p in &data.pi {
        // vec(P X - X P) = (I kron P - P^T kron I) vec(X)
        let k = id.kronecker(p) - p.transpose().kronecker(&id);
        normal += k.adjoint() * k;
    }
    let normal = HermitianMatrix::hermitize(normal);
    let null = linalg::null_basis(&normal, tol).expect("normal matrix is PSD");
    null.basis()
        .column_iter()
        .map(|v| CMat::from_column_slice(r, r, v.as_slice()))
        .collect()
}

/// `h(a) = <pi(a) C xi, xi>` for `C` in the commutant with `0 <= C <= I`; such `h` is
/// representable and `h <= f`.
pub fn functional_from_commutant(
    f: &Functional,
    data: &GnsData,
    c: &CMat,
    tol: &Tolerance,
) -> Result<Functional> {
    let cxi = c * &data.xi;
    let coeffs = CVec::from_iterator(data.pi.len(), data.pi.iter().map(|p| data.xi.dotc(&(p * &cxi))));
    Functional::with_scale(f.algebra.clone(), coeffs, data.scale, tol)
}

/// Operator norm of `pi(e_i)`.
pub fn pi_norm(data: &GnsData, i: usize) -> f64 {
    linalg::spectral_norm(&data.pi[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_coeffs(values: &[f64]) -> CVec {
        CVec::from_iterator(values.len(), values.iter().map(|&v| c64(v, 0.0)))
    }

    fn functional(alg: &Arc<StarAlgebra>, values: &[f64]) -> Functional {
        Functional::new(alg.clone(), real_coeffs(values), &Tolerance::default()).unwrap()
    }

    #[test]
    fn fixtures_validate() {
        for n in 1..=4 {
            assert_eq!(diagonal_algebra(n).unwrap().dim(), n);
            assert_eq!(matrix_algebra(n).unwrap().dim(), n * n);
            assert_eq!(cyclic_group_algebra(n).unwrap().dim(), n);
        }
        assert!(matrix_algebra(5).is_err());
        assert!(diagonal_algebra(0).is_err());
    }

    #[test]
    fn broken_algebras_rejected() {
        let d = diagonal_algebra(2).unwrap();
        let mut bad = d.involution().clone();
        bad[(0, 0)] = c64(2.0, 0.0);
        assert!(matches!(StarAlgebra::new(d.structure(), bad), Err(Error::InvalidAlgebra(_))));
        // e_0 e_0 = e_1, everything else zero, is associative; with e_1 e_0 = e_0 it is not
        let zero = c64(0.0, 0.0);
        let one = c64(1.0, 0.0);
        let structure = vec![
            vec![vec![zero, one], vec![zero, zero]],
            vec![vec![one, zero], vec![zero, zero]],
        ];
        assert!(StarAlgebra::new(structure, CMat::identity(2, 2)).is_err());
    }

    #[test]
    fn matrix_units_multiply() {
        let m = matrix_algebra(2).unwrap();
        // e_01 e_10 = e_00
        let p = m.product(&m.basis(1), &m.basis(2));
        assert_eq!(p, m.basis(0));
        assert_eq!(m.star(&m.basis(1)), m.basis(2));
    }

    #[test]
    fn induced_gram_examples() {
        let tol = Tolerance::default();
        let diag = Arc::new(diagonal_algebra(2).unwrap());
        let g = induced_gram(&functional(&diag, &[1.0, 2.0]), &tol).unwrap();
        assert_eq!(g.gram().as_matrix(), HermitianMatrix::diag(&[1.0, 2.0]).as_matrix());
        assert_eq!(induced_gram(&Functional::zero(diag), &tol).unwrap().frobenius_norm(), 0.0);
        let m = Arc::new(matrix_algebra(2).unwrap());
        let trace = functional(&m, &[1.0, 0.0, 0.0, 1.0]);
        let g = induced_gram(&trace, &tol).unwrap();
        assert_eq!(g.gram().as_matrix(), &CMat::identity(4, 4));
    }

    #[test]
    fn non_positive_functional_rejected() {
        let diag = Arc::new(diagonal_algebra(2).unwrap());
        let err = Functional::new(diag, real_coeffs(&[1.0, -1.0]), &Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
    }

    #[test]
    fn gns_examples() {
        let tol = Tolerance::default();
        let diag = Arc::new(diagonal_algebra(2).unwrap());
        let f = functional(&diag, &[1.0, 2.0]);
        let data = gns(&f, &tol).unwrap();
        assert_eq!(data.quotient_dim(), 2);
        assert!((data.xi_preimage() - real_coeffs(&[1.0, 1.0])).camax() < 1e-14);
        assert!(data.reconstruction_residual(&f) < 1e-14);
        assert!(data.homomorphism_residual(&diag) < 1e-14);

        let data = gns(&Functional::zero(diag.clone()), &tol).unwrap();
        assert_eq!(data.quotient_dim(), 0);
        assert_eq!(data.xi.len(), 0);

        let data = gns(&functional(&diag, &[1.0, 0.0]), &tol).unwrap();
        assert_eq!(data.quotient_dim(), 1);
    }

    #[test]
    fn gns_on_noncommutative_fixture() {
        let tol = Tolerance::default();
        let m = Arc::new(matrix_algebra(2).unwrap());
        // f(x) = tr(rho x) with rho = diag(1, 0): f(e_ab) = rho_ba
        let f = functional(&m, &[1.0, 0.0, 0.0, 0.0]);
        let data = gns(&f, &tol).unwrap();
        assert_eq!(data.quotient_dim(), 2);
        assert!(data.reconstruction_residual(&f) < 1e-14);
        assert!(data.homomorphism_residual(&m) < 1e-14);
    }

    #[test]
    fn zero_product_functional_not_representable() {
        let zero = c64(0.0, 0.0);
        let structure = vec![vec![vec![zero; 2]; 2]; 2];
        let alg = Arc::new(StarAlgebra::new(structure, CMat::identity(2, 2)).unwrap());
        let f = Functional::new(alg, real_coeffs(&[1.0, 0.0]), &Tolerance::default()).unwrap();
        assert!(matches!(gns(&f, &Tolerance::default()), Err(Error::NotRepresentable { .. })));
    }

    #[test]
    fn decompose_examples() {
        let tol = Tolerance::default();
        let diag = Arc::new(diagonal_algebra(2).unwrap());
        let f = functional(&diag, &[1.0, 2.0]);
        let d = functional_decompose(&f, &functional(&diag, &[0.0, 1.0]), &tol).unwrap();
        assert!((d.ll.coeffs() - real_coeffs(&[0.0, 2.0])).camax() < 1e-12);
        assert!((d.perp.coeffs() - real_coeffs(&[1.0, 0.0])).camax() < 1e-12);
        assert!(d.invariance_residual < 1e-14 && d.form_bridge_residual < 1e-14);

        let d = functional_decompose(&f, &functional(&diag, &[3.0, 0.5]), &tol).unwrap();
        assert!((d.ll.coeffs() - f.coeffs()).camax() < 1e-14);
        assert!(d.perp.coeffs().camax() < 1e-14);

        let d = functional_decompose(&f, &Functional::zero(diag), &tol).unwrap();
        assert!(d.ll.coeffs().camax() < 1e-14);
        assert!((d.perp.coeffs() - f.coeffs()).camax() < 1e-14);
    }

    #[test]
    fn algebra_mismatch() {
        let tol = Tolerance::default();
        let a = Functional::zero(Arc::new(diagonal_algebra(2).unwrap()));
        let b = Functional::zero(Arc::new(cyclic_group_algebra(2).unwrap()));
        assert!(matches!(functional_decompose(&a, &b, &tol), Err(Error::AlgebraMismatch)));
    }

    #[test]
    fn commutant_of_full_matrix_representation_is_scalar() {
        let tol = Tolerance::default();
        let m = Arc::new(matrix_algebra(2).unwrap());
        // f = tr(rho x) with rho = diag(1, 0): GNS is the defining representation on C^2
        let data = gns(&functional(&m, &[1.0, 0.0, 0.0, 0.0]), &tol).unwrap();
        let basis = commutant_basis(&data, &tol);
        assert_eq!(basis.len(), 1);
        // faithful trace: GNS is C^2 (x) C^2, commutant M_2
        let data = gns(&functional(&m, &[1.0, 0.0, 0.0, 1.0]), &tol).unwrap();
        assert_eq!(commutant_basis(&data, &tol).len(), 4);
    }
}
