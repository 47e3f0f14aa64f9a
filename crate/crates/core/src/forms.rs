//! Nonnegative sesquilinear forms on `C^n`, their shorts to subspaces, parallel sums,
//! the closable part `D_w t`, and the short-type decomposition `t = t_{ker w} + (t - t_{ker w})`.
//!
//! A form is stored as its Gram matrix `G`, with `t(x, y) = y* G x` and `t[x] = x* G x`.
//! Forms produced by arithmetic on other forms remember the magnitude of their inputs
//! (`scale`), so that kernel and rank decisions on results such as `t - t_Y` treat rounding
//! residue as zero instead of promoting it to a genuine direction.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c64, check_dim, orth_range, orth_range_above, psd_factor_scaled, CMat, CVec,
    HermitianMatrix, Subspace, Tolerance,
};

/// Agreement required between `D_w t` and `t_{ker w}`, relative to `1 + |T|_F`.
pub const LEBESGUE_AGREEMENT_RTOL: f64 = 1e-6;
/// Doubling cap for the `t : 2^k w` iteration.
pub const LEBESGUE_MAX_DOUBLINGS: usize = 60;

const QUADRATIC_IMAG_RTOL: f64 = 1e-10;

/// The scalars used to certify the quasi-unit identities.
pub const QUASI_UNIT_SCALARS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

/// A nonnegative sesquilinear form, held as a Hermitian PSD Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdForm {
    gram: HermitianMatrix,
    scale: f64,
}

impl PsdForm {
    /// Validates positivity of `gram` against its own largest eigenvalue.
    pub fn new(gram: HermitianMatrix, tol: &Tolerance) -> Result<Self> {
        let eig = gram.eigen();
        eig.check_psd(0.0, tol)?;
        Ok(PsdForm {
            scale: eig.lambda_max().max(0.0),
            gram,
        })
    }

    /// Wraps the result of a computation whose inputs had largest eigenvalue `scale`.
    ///
    /// Eigenvalues in `[-rank_rtol * scale, 0)` are clipped to zero; anything more
    /// negative is reported as `NotPsd`.
    pub fn from_computed(gram: HermitianMatrix, scale: f64, tol: &Tolerance) -> Result<Self> {
        let eig = gram.eigen();
        eig.check_psd(scale, tol)?;
        let negative: Vec<usize> = (0..eig.values.len())
            .filter(|&i| eig.values[i] < 0.0)
            .collect();
        let gram = if negative.is_empty() {
            gram
        } else {
            let v = linalg::select_columns(&eig.vectors, &negative);
            let shift = CMat::from_fn(v.nrows(), v.ncols(), |r, c| {
                v[(r, c)] * c64(-eig.values[negative[c]], 0.0)
            });
            HermitianMatrix::hermitize(gram.as_matrix() + shift * v.adjoint())
        };
        Ok(PsdForm {
            scale: scale.max(eig.lambda_max()).max(0.0),
            gram,
        })
    }

    /// Wraps a Gram matrix of the form `F* F`, which is PSD by construction.
    pub(crate) fn from_factor(f: &CMat, scale: f64) -> Self {
        let gram = HermitianMatrix::hermitize(f.adjoint() * f);
        PsdForm { gram, scale }
    }

    pub fn zero(n: usize) -> Self {
        PsdForm {
            gram: HermitianMatrix::zeros(n),
            scale: 0.0,
        }
    }

    pub fn identity(n: usize) -> Self {
        PsdForm {
            gram: HermitianMatrix::identity(n),
            scale: if n > 0 { 1.0 } else { 0.0 },
        }
    }

    pub fn gram(&self) -> &HermitianMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    /// Reference magnitude for rank decisions: the largest eigenvalue of this form or of
    /// the inputs it was computed from.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.gram.frobenius_norm()
    }

    /// `c * t` for `c >= 0`.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c >= 0.0, "forms are scaled by nonnegative reals");
        PsdForm {
            gram: self.gram.scale(c),
            scale: self.scale * c,
        }
    }

    pub fn sum(&self, other: &PsdForm) -> Result<Self> {
        Ok(PsdForm {
            gram: self.gram.add(&other.gram)?,
            scale: self.scale + other.scale,
        })
    }

    /// `t - s`, which must again be a form up to rounding.
    pub fn difference(&self, other: &PsdForm, tol: &Tolerance) -> Result<Self> {
        let d = self.gram.sub(&other.gram)?;
        PsdForm::from_computed(d, self.scale.max(other.scale), tol)
    }

    /// `t(x, y) = y* G x`: linear in `x`, antilinear in `y`.
    pub fn sesquilinear(&self, x: &CVec, y: &CVec) -> Result<crate::linalg::C64> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(y.dotc(&(self.gram.as_matrix() * x)))
    }

    /// `t[x] = x* G x`.
    pub fn quadratic(&self, x: &CVec) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let z = x.dotc(&(self.gram.as_matrix() * x));
        if z.im.abs() > QUADRATIC_IMAG_RTOL * (1.0 + z.re.abs()) {
            return Err(Error::InternalInconsistency(format!(
                "quadratic form has imaginary part {:e}",
                z.im
            )));
        }
        Ok(z.re)
    }

    /// `t <= w` as quadratic forms, up to `rank_rtol` times the larger scale.
    pub fn le(&self, other: &PsdForm, tol: &Tolerance) -> Result<bool> {
        let d = other.gram.sub(&self.gram)?;
        let reference = self.scale.max(other.scale);
        Ok(d.eigen().lambda_min() >= -tol.rank_rtol() * reference)
    }

    /// Orthonormal basis of `ker T`, judged against the reference scale.
    pub fn kernel(&self, tol: &Tolerance) -> Result<Subspace> {
        linalg::null_basis_scaled(&self.gram, self.scale, tol)
    }

    fn factor(&self, tol: &Tolerance) -> Result<CMat> {
        psd_factor_scaled(&self.gram, self.scale, tol)
    }
}

/// The short `t_Y[x] = inf_{y in Y} t[x - y]`, via the generalized Schur complement
/// `T - T Y (Y* T Y)^+ Y* T`.
///
/// The pseudo-inverse is applied in factored form, `(Y*TY)^+ = W W*`, and the result is
/// assembled as `T - (TYW)(TYW)*`; this keeps the error at the level of `eps * |T|` even when
/// `Y*TY` is badly conditioned. Directions of `Y*TY` at or below
/// `compression_rtol * lambda_max(T)` are treated as null.
pub fn short_form(t: &PsdForm, y: &Subspace, tol: &Tolerance) -> Result<PsdForm> {
    check_dim(t.dim(), y.ambient_dim())?;
    if y.dim() == 0 {
        return Ok(t.clone());
    }
    let tm = t.gram.as_matrix();
    let ty = tm * y.basis();
    let compressed = HermitianMatrix::hermitize(y.basis().adjoint() * &ty);
    let w = linalg::compression_pinv_factor(&compressed, t.scale, tol)?;
    let f = ty * w;
    let gram = HermitianMatrix::hermitize(tm - &f * f.adjoint());
    PsdForm::from_computed(gram, t.scale, tol)
}

/// Parallel sum `(t:w)[x] = inf_y { t[x - y] + w[y] }`.
///
/// With `T = J J*` and `W = K K*`, the infimum is the least-squares residual of
/// `[J*; K*] y ~ [J* x; 0]`, so `t:w = E* (I - U U*) E` with `E = [J*; 0]` and `U` an
/// orthonormal basis of the range of `[J*; K*]`. This equals `T (T+W)^+ W` but stays accurate
/// when `T + W` is ill-conditioned.
pub fn parallel_sum(t: &PsdForm, w: &PsdForm, tol: &Tolerance) -> Result<PsdForm> {
    check_dim(t.dim(), w.dim())?;
    let n = t.dim();
    let j = t.factor(tol)?;
    let k = w.factor(tol)?;
    let (rt, rw) = (j.ncols(), k.ncols());
    let mut stacked = CMat::zeros(rt + rw, n);
    stacked.rows_mut(0, rt).copy_from(&j.adjoint());
    stacked.rows_mut(rt, rw).copy_from(&k.adjoint());
    let scale = t.scale.max(w.scale);
    // singular values of the stack are square roots of eigenvalues of T + W
    let cutoff = (tol.rank_rtol() * (t.scale + w.scale)).sqrt();
    let u = orth_range_above(&stacked, cutoff);
    let mut e = CMat::zeros(rt + rw, n);
    e.rows_mut(0, rt).copy_from(&j.adjoint());
    let f = &e - &u * (u.adjoint() * &e);
    Ok(PsdForm::from_factor(&f, scale))
}

/// `t : (c w)` for large `c`, computed in coordinates adapted to `w`.
///
/// The minimizer is split as `y = Y a + Z b` with `Y` spanning `ker w` and `Z` the eigenvectors
/// of the nonzero eigenvalues `Omega` of `W`; substituting `b = Omega^{-1/2} b' / sqrt(c)` turns
/// the infimum into a least-squares problem with matrix `[[J*Y, J*Z Omega^{-1/2} / sqrt(c)], [0, I]]`,
/// which stays well conditioned as `c` grows.
pub fn parallel_sum_scaled(t: &PsdForm, w: &PsdForm, c: f64, tol: &Tolerance) -> Result<PsdForm> {
    check_dim(t.dim(), w.dim())?;
    assert!(c > 0.0, "parallel_sum_scaled needs a positive multiplier");
    let n = t.dim();
    let j = t.factor(tol)?;
    let r = j.ncols();
    let eig = w.gram.eigen();
    eig.check_psd(w.scale, tol)?;
    let cut = eig.cutoff(w.scale, tol);
    let kernel_idx: Vec<usize> = (0..n).filter(|&i| eig.values[i] <= cut).collect();
    let range_idx: Vec<usize> = (0..n).filter(|&i| eig.values[i] > cut).collect();
    let (kd, m) = (kernel_idx.len(), range_idx.len());
    let y = linalg::select_columns(&eig.vectors, &kernel_idx);
    let z = linalg::select_columns(&eig.vectors, &range_idx);

    let jt = j.adjoint();
    let g = &jt * &y;
    let mut h = &jt * &z;
    for (col, &i) in range_idx.iter().enumerate() {
        let s = (eig.values[i] * c).sqrt().recip();
        h.column_mut(col).scale_mut(s);
    }
    let mut system = CMat::zeros(r + m, kd + m);
    system.view_mut((0, 0), (r, kd)).copy_from(&g);
    system.view_mut((0, kd), (r, m)).copy_from(&h);
    system
        .view_mut((r, kd), (m, m))
        .copy_from(&CMat::identity(m, m));
    let u = orth_range(&system, tol);
    let mut e = CMat::zeros(r + m, n);
    e.rows_mut(0, r).copy_from(&jt);
    let f = &e - &u * (u.adjoint() * &e);
    Ok(PsdForm::from_factor(&f, t.scale))
}

/// Result of the `t : 2^k w` iteration.
#[derive(Debug, Clone)]
pub struct LebesgueAcPart {
    pub form: PsdForm,
    /// Number of doublings performed.
    pub iterations: usize,
    pub converged: bool,
    /// `|D_w t - t_{ker w}|_F`.
    pub discrepancy: f64,
}

/// The closable part `D_w t = sup_n (t : n w)`, computed as the limit of `t : (2^k s w)`
/// where `s = lambda_max(T) / lambda_max(W)` normalizes the two forms to the same magnitude
/// (the supremum does not depend on positive rescaling of `w`).
///
/// Stops once successive iterates differ by at most `residual_atol * (1 + |T|_F)`, or after
/// [`LEBESGUE_MAX_DOUBLINGS`] doublings, and extrapolates the last two iterates. In finite dimension the limit must coincide with
/// `t_{ker w}`; a discrepancy above `1e-6 * (1 + |T|_F)` is an error.
pub fn lebesgue_ac_part(t: &PsdForm, w: &PsdForm, tol: &Tolerance) -> Result<LebesgueAcPart> {
    check_dim(t.dim(), w.dim())?;
    let t_norm = t.frobenius_norm();
    let step_bound = tol.residual_atol() * (1.0 + t_norm);
    let normalizer = if t.scale > 0.0 && w.scale > 0.0 {
        t.scale / w.scale
    } else {
        1.0
    };

    let mut prev = parallel_sum_scaled(t, w, normalizer, tol)?;
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=LEBESGUE_MAX_DOUBLINGS {
        let c = normalizer * (k as f64).exp2();
        let cur = parallel_sum_scaled(t, w, c, tol)?;
        let step = (cur.gram.as_matrix() - prev.gram.as_matrix()).norm();
        iterations = k;
        if step <= step_bound {
            converged = true;
            // t : cw = D_w t + R / c + O(1 / c^2): one Richardson step removes the R / c term,
            // which is about as large as the last step
            let extrapolated = cur.gram.as_matrix() * c64(2.0, 0.0) - prev.gram.as_matrix();
            prev = PsdForm::from_computed(HermitianMatrix::hermitize(extrapolated), t.scale, tol)?;
            break;
        }
        prev = cur;
    }

    let short = short_form(t, &w.kernel(tol)?, tol)?;
    let discrepancy = (prev.gram.as_matrix() - short.gram.as_matrix()).norm();
    let agreement_bound = LEBESGUE_AGREEMENT_RTOL * (1.0 + t_norm);
    if discrepancy > agreement_bound {
        if !converged {
            return Err(Error::NoConvergence {
                iterations,
                discrepancy,
            });
        }
        return Err(Error::InternalInconsistency(format!(
            "D_w t and t_(ker w) differ by {discrepancy:e} (bound {agreement_bound:e})"
        )));
    }
    Ok(LebesgueAcPart {
        form: prev,
        iterations,
        converged,
        discrepancy,
    })
}

/// Diagnostics attached to a short-type decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionResiduals {
    /// `|T - (AC + SING)|_F`
    pub sum_residual: f64,
    /// `max v* AC v` over the orthonormal kernel basis of `w`.
    pub kernel_inclusion_max: f64,
    /// `|sing : w|_F`
    pub singularity_parallel_sum_norm: f64,
}

/// `t = ac + sing` with `ac << w` maximal and `sing` singular to `w`.
#[derive(Debug, Clone)]
pub struct ShortTypeDecomposition {
    pub ac: PsdForm,
    pub sing: PsdForm,
    /// True iff `ac` is dominated by `w`, which is exactly when the decomposition is unique.
    pub unique: bool,
    pub residuals: DecompositionResiduals,
}

pub fn short_type_decompose(
    t: &PsdForm,
    w: &PsdForm,
    tol: &Tolerance,
) -> Result<ShortTypeDecomposition> {
    check_dim(t.dim(), w.dim())?;
    let kernel = w.kernel(tol)?;
    let ac = short_form(t, &kernel, tol)?;
    let sing = t.difference(&ac, tol)?;
    let unique = is_dominated(&ac, w, tol)?.is_some();

    let sum_residual =
        (t.gram.as_matrix() - ac.gram.as_matrix() - sing.gram.as_matrix()).norm();
    let kernel_inclusion_max = kernel
        .basis()
        .column_iter()
        .map(|v| ac.gram.quadratic(&v.into_owned()).unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    let singularity_parallel_sum_norm = parallel_sum(&sing, w, tol)?.frobenius_norm();
    Ok(ShortTypeDecomposition {
        ac,
        sing,
        unique,
        residuals: DecompositionResiduals {
            sum_residual,
            kernel_inclusion_max,
            singularity_parallel_sum_norm,
        },
    })
}

/// `ker w ⊆ ker t`, tested on the kernel basis of `w` against `rank_rtol * lambda_max(T)`.
pub fn is_absolutely_continuous(t: &PsdForm, w: &PsdForm, tol: &Tolerance) -> Result<bool> {
    check_dim(t.dim(), w.dim())?;
    let bound = tol.rank_rtol() * t.scale;
    for v in w.kernel(tol)?.basis().column_iter() {
        if t.gram.quadratic(&v.into_owned())? > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Singularity, decided twice: `|t:w|_F` negligible, and `ran T^{1/2} ∩ ran W^{1/2} = {0}`.
/// The two criteria must agree.
pub fn is_singular(t: &PsdForm, w: &PsdForm, tol: &Tolerance) -> Result<bool> {
    check_dim(t.dim(), w.dim())?;
    let ps_norm = parallel_sum(t, w, tol)?.frobenius_norm();
    let by_parallel_sum =
        ps_norm <= tol.residual_atol() * (1.0 + t.frobenius_norm() + w.frobenius_norm());
    let by_ranges =
        linalg::range_intersection_trivial_scaled(&t.gram, t.scale, &w.gram, w.scale, tol)?;
    if by_parallel_sum != by_ranges {
        return Err(Error::InternalInconsistency(format!(
            "singularity tests disagree: |t:w|_F = {ps_norm:e}, range intersection trivial = {by_ranges}"
        )));
    }
    Ok(by_ranges)
}

/// Least `c` with `t <= c w`, or `None` when `ran T` is not contained in `ran W`.
pub fn is_dominated(t: &PsdForm, w: &PsdForm, tol: &Tolerance) -> Result<Option<f64>> {
    if !is_absolutely_continuous(t, w, tol)? {
        return Ok(None);
    }
    let f = linalg::pinv_factor_scaled(&w.gram, w.scale, tol)?;
    if f.ncols() == 0 {
        return Ok(Some(0.0));
    }
    let compressed = HermitianMatrix::hermitize(f.adjoint() * t.gram.as_matrix() * &f);
    Ok(Some(compressed.eigen().lambda_max().max(0.0)))
}

fn require_below(u: &PsdForm, t: &PsdForm, tol: &Tolerance) -> Result<()> {
    check_dim(t.dim(), u.dim())?;
    if !u.le(t, tol)? {
        return Err(Error::PreconditionViolated("u <= t does not hold".into()));
    }
    Ok(())
}

/// Detailed outcome of the quasi-unit test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiUnitReport {
    pub is_quasi_unit: bool,
    /// `|D_u t - u|_F`
    pub closable_part_residual: f64,
    /// Whether `u` is a disjoint part of `t`.
    pub disjoint: bool,
    /// Worst Frobenius residual of `(lu):(mt) = lm/(l+m) u` over the test scalars.
    pub harmonic_identity_residual: f64,
    /// Worst Frobenius residual of `(lu):t = u:(lt)` over the test scalars.
    pub exchange_identity_residual: f64,
}

/// Evaluates the equivalent characterizations of `u` being a `t`-quasi-unit and checks that
/// they agree: `D_u t = u`, `u` disjoint from `t - u`, and the two parallel-sum identities.
pub fn quasi_unit_report(u: &PsdForm, t: &PsdForm, tol: &Tolerance) -> Result<QuasiUnitReport> {
    require_below(u, t, tol)?;
    let bound = tol.residual_atol() * (1.0 + t.frobenius_norm());

    let d = lebesgue_ac_part(t, u, tol)?;
    let closable_part_residual = (d.form.gram.as_matrix() - u.gram.as_matrix()).norm();
    let quasi = closable_part_residual <= bound;
    let disjoint = is_disjoint_part(u, t, tol)?;

    let mut harmonic: f64 = 0.0;
    let mut exchange: f64 = 0.0;
    for &l in &QUASI_UNIT_SCALARS {
        for &m in &QUASI_UNIT_SCALARS {
            let lhs = parallel_sum(&u.scaled(l), &t.scaled(m), tol)?;
            let rhs = u.scaled(l * m / (l + m));
            harmonic = harmonic.max((lhs.gram.as_matrix() - rhs.gram.as_matrix()).norm());
        }
        let a = parallel_sum(&u.scaled(l), t, tol)?;
        let b = parallel_sum(u, &t.scaled(l), tol)?;
        exchange = exchange.max((a.gram.as_matrix() - b.gram.as_matrix()).norm());
    }
    let identities = harmonic <= bound && exchange <= bound;

    if quasi != disjoint || quasi != identities {
        return Err(Error::InternalInconsistency(format!(
            "quasi-unit characterizations disagree: D_u t = u: {quasi}, disjoint part: {disjoint}, \
             parallel-sum identities: {identities}"
        )));
    }
    Ok(QuasiUnitReport {
        is_quasi_unit: quasi,
        closable_part_residual,
        disjoint,
        harmonic_identity_residual: harmonic,
        exchange_identity_residual: exchange,
    })
}

/// `D_u t = u`; requires `u <= t`.
pub fn is_quasi_unit(u: &PsdForm, t: &PsdForm, tol: &Tolerance) -> Result<bool> {
    Ok(quasi_unit_report(u, t, tol)?.is_quasi_unit)
}

/// `u` and `t - u` are singular; requires `u <= t`.
pub fn is_disjoint_part(u: &PsdForm, t: &PsdForm, tol: &Tolerance) -> Result<bool> {
    require_below(u, t, tol)?;
    let rest = t.difference(u, tol)?;
    is_singular(u, &rest, tol)
}
