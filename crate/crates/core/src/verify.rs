//! Property suite over PSD pairs, charges and functionals. Each property keeps its worst
//! residual against its bound; a property passes iff every check stayed within bound.
//!
//! Instances are independent and evaluated in parallel; results are merged in instance order,
//! so the report depends only on the seed and the inputs.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::charges::{self, Charge};
use crate::error::Result;
use crate::forms::{self, PsdForm, LEBESGUE_AGREEMENT_RTOL};
use crate::functionals;
use crate::linalg::{self, c64, CMat, CVec, HermitianMatrix, Tolerance};
use crate::operator;
use crate::sample;

/// Worst case of one property.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub checks: usize,
    pub failures: usize,
    /// Residual and bound at the check with the largest `residual / bound`.
    pub residual: f64,
    pub bound: f64,
    pub first_failure: Option<String>,
}

impl Default for PropertyResult {
    fn default() -> Self {
        PropertyResult {
            checks: 0,
            failures: 0,
            residual: 0.0,
            bound: 0.0,
            first_failure: None,
        }
    }
}

impl PropertyResult {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }

    fn ratio(&self) -> f64 {
        ratio(self.residual, self.bound)
    }
}

fn ratio(residual: f64, bound: f64) -> f64 {
    if residual.is_nan() {
        f64::INFINITY
    } else if bound > 0.0 {
        residual / bound
    } else if residual > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Property name -> result.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub properties: BTreeMap<String, PropertyResult>,
    pub instances: usize,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.properties.values().all(PropertyResult::pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = (&String, &PropertyResult)> {
        self.properties.iter().filter(|(_, p)| !p.pass())
    }

    fn check(&mut self, name: &str, residual: f64, bound: f64, context: impl FnOnce() -> String) {
        let p = self.properties.entry(name.to_string()).or_default();
        p.checks += 1;
        if p.checks == 1 || ratio(residual, bound) > p.ratio() {
            p.residual = residual;
            p.bound = bound;
        }
        // NaN residuals fail
        let within = residual <= bound;
        if !within {
            p.failures += 1;
            if p.first_failure.is_none() {
                p.first_failure = Some(format!(
                    "{}: residual {residual:e} exceeds {bound:e}",
                    context()
                ));
            }
        }
    }

    /// A yes/no property, recorded as residual 1 against bound 0 when it fails.
    fn require(&mut self, name: &str, ok: bool, context: impl FnOnce() -> String) {
        let p = self.properties.entry(name.to_string()).or_default();
        p.checks += 1;
        if !ok {
            p.failures += 1;
            if p.ratio() < f64::INFINITY {
                p.residual = 1.0;
                p.bound = 0.0;
            }
            if p.first_failure.is_none() {
                p.first_failure = Some(context());
            }
        }
    }

    /// Runs `f`; an error counts as a failure of `name`.
    fn guard<T>(&mut self, name: &str, context: &dyn Fn() -> String, f: impl FnOnce() -> Result<T>) -> Option<T> {
        match f() {
            Ok(v) => Some(v),
            Err(e) => {
                self.require(name, false, || format!("{}: {e}", context()));
                None
            }
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.instances += other.instances;
        for (name, q) in other.properties {
            let p = self.properties.entry(name).or_default();
            if p.checks == 0 || q.ratio() > p.ratio() {
                p.residual = q.residual;
                p.bound = q.bound;
            }
            p.checks += q.checks;
            p.failures += q.failures;
            if p.first_failure.is_none() {
                p.first_failure = q.first_failure;
            }
        }
    }
}

/// Sizes of a seeded random run.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub seed: u64,
    /// Number of PSD pairs; charges and functionals get the same number of instances.
    pub trials: usize,
    pub max_dim: usize,
    pub max_cond: f64,
}

impl RunConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        RunConfig {
            seed,
            trials,
            max_dim: 12,
            max_cond: 1e8,
        }
    }
}

/// Random instances of every family.
pub fn verify_random(cfg: &RunConfig, tol: &Tolerance) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<sample::PsdPair> = (0..cfg.trials)
        .map(|_| sample::random_pair(cfg.max_dim, cfg.max_cond, &mut rng))
        .collect();
    let mut report = Report::default();
    let pair_reports: Vec<Report> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let seed = cfg.seed.wrapping_add(i as u64);
            verify_pair(&p.a, &p.b, seed, tol)
                .unwrap_or_else(|e| failed_instance("input validation", format!("pair {i}: {e}")))
        })
        .collect();
    let charge_reports: Vec<Report> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| verify_charges(cfg.seed ^ 0x00c4_a26e_0000_0000 ^ i as u64, tol))
        .collect();
    let fixtures = sample::fixture_algebras();
    let functional_reports: Vec<Report> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let (fixture, param) = fixtures[i % fixtures.len()];
            verify_functionals(fixture, param, cfg.seed ^ 0x0f0c_7000_0000_0000 ^ i as u64, tol)
        })
        .collect();
    for r in pair_reports.into_iter().chain(charge_reports).chain(functional_reports) {
        report.merge(r);
    }
    report
}

fn failed_instance(name: &str, message: String) -> Report {
    let mut r = Report {
        instances: 1,
        ..Report::default()
    };
    r.require(name, false, || message);
    r
}

/// Runs the matrix, form and operator properties on one pair. Fails early only if the inputs
/// are not PSD matrices of equal size.
pub fn verify_pair(a: &HermitianMatrix, b: &HermitianMatrix, seed: u64, tol: &Tolerance) -> Result<Report> {
    linalg::check_dim(a.dim(), b.dim())?;
    let af = PsdForm::new(a.clone(), tol)?;
    let bf = PsdForm::new(b.clone(), tol)?;
    let mut r = Report {
        instances: 1,
        ..Report::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = move || format!("pair seed {seed}");
    linalg_properties(&mut r, a, b, tol, &ctx);
    form_properties(&mut r, &af, &bf, &mut rng, tol, &ctx);
    operator_properties(&mut r, &af, &bf, &mut rng, tol, &ctx);
    Ok(r)
}

fn linalg_properties(r: &mut Report, a: &HermitianMatrix, b: &HermitianMatrix, tol: &Tolerance, ctx: &dyn Fn() -> String) {
    let atol = tol.residual_atol();
    for m in [a, b] {
        let Some(x) = r.guard("pinv_penrose_identities", ctx, || linalg::pinv(m, tol)) else {
            continue;
        };
        let (mm, xm) = (m.as_matrix(), x.as_matrix());
        let norm_m = linalg::spectral_norm(mm);
        let norm_x = linalg::spectral_norm(xm);
        // residuals relative to the natural size of each identity
        let kappa = 1.0 + norm_m * norm_x;
        let mx = mm * xm;
        let xm_ = xm * mm;
        r.check("pinv_penrose_identities", (&mx * mm - mm).norm() / (1.0 + norm_m), atol * kappa, ctx);
        r.check("pinv_penrose_identities", (xm * &mx - xm).norm() / (1.0 + norm_x), atol * kappa, ctx);
        r.check("pinv_penrose_identities", (mx.adjoint() - &mx).norm(), atol * kappa, ctx);
        r.check("pinv_penrose_identities", (xm_.adjoint() - &xm_).norm(), atol * kappa, ctx);

        if let Some(s) = r.guard("psd_sqrt_commutes_and_psd", ctx, || linalg::psd_sqrt(m, tol)) {
            let comm = (s.as_matrix() * mm - mm * s.as_matrix()).norm();
            r.check("psd_sqrt_commutes_and_psd", comm, atol * (1.0 + m.frobenius_norm()) * (1.0 + s.frobenius_norm()), ctx);
            let eig = s.eigen();
            r.check("psd_sqrt_commutes_and_psd", (-eig.lambda_min()).max(0.0), tol.rank_rtol() * eig.lambda_max().max(0.0), ctx);
        }

        if let Some(k) = r.guard("null_basis_vectors_null", ctx, || linalg::null_basis(m, tol)) {
            let lmax = m.eigen().lambda_max().max(0.0);
            for v in k.basis().column_iter() {
                let q = m.quadratic(&v.into_owned()).unwrap_or(f64::NAN);
                r.check("null_basis_vectors_null", q, tol.rank_rtol() * lmax, ctx);
            }
            let p = linalg::orth_project(&k);
            let idem = (p.as_matrix() * p.as_matrix() - p.as_matrix()).norm();
            r.check("projection_idempotent", idem, 1e-12, ctx);
        }
    }
    let ab = linalg::range_intersection_trivial(a, b, tol);
    let ba = linalg::range_intersection_trivial(b, a, tol);
    match (ab, ba) {
        (Ok(x), Ok(y)) => r.require("range_intersection_symmetric", x == y, || format!("{}: asymmetric result", ctx())),
        (Err(e), _) | (_, Err(e)) => r.require("range_intersection_symmetric", false, || format!("{}: {e}", ctx())),
    }
}

fn quadratic_excess(lo: &PsdForm, hi: &PsdForm, x: &CVec) -> f64 {
    lo.quadratic(x).unwrap_or(f64::NAN) - hi.quadratic(x).unwrap_or(f64::NAN)
}

fn form_properties(
    r: &mut Report,
    af: &PsdForm,
    bf: &PsdForm,
    rng: &mut ChaCha8Rng,
    tol: &Tolerance,
    ctx: &dyn Fn() -> String,
) {
    let n = af.dim();
    let atol = tol.residual_atol();
    let a_norm = af.frobenius_norm();
    let b_norm = bf.frobenius_norm();
    let lmax = af.scale();

    let Some(d) = r.guard("decomposition_sum", ctx, || forms::short_type_decompose(af, bf, tol)) else {
        return;
    };
    r.check("decomposition_sum", d.residuals.sum_residual, 1e-10 * (1.0 + a_norm), ctx);
    r.check("ac_kernel_inclusion", d.residuals.kernel_inclusion_max, 1e-9 * lmax, ctx);
    r.check(
        "sing_parallel_sum_zero",
        d.residuals.singularity_parallel_sum_norm,
        1e-8 * (1.0 + a_norm + b_norm),
        ctx,
    );
    if let Some(s) = r.guard("sing_singularity_oracles_agree", ctx, || forms::is_singular(&d.sing, bf, tol)) {
        r.require("sing_singularity_oracles_agree", s, || format!("{}: second part not singular", ctx()));
    }
    r.require("decomposition_unique", d.unique, || format!("{}: unique flag false", ctx()));

    // idempotence on ker B and on a random subspace
    let k = rng.random_range(0..=n);
    let y = sample::random_subspace(n, k, rng);
    if let Some(ky) = r.guard("short_idempotent", ctx, || bf.kernel(tol)) {
        for sub in [&ky, &y] {
            if let Some((s1, s2)) = r.guard("short_idempotent", ctx, || {
                let s1 = forms::short_form(af, sub, tol)?;
                let s2 = forms::short_form(&s1, sub, tol)?;
                Ok((s1, s2))
            }) {
                let gap = (s1.gram().as_matrix() - s2.gram().as_matrix()).norm();
                r.check("short_idempotent", gap, atol * (1.0 + a_norm), ctx);
            }
        }
    }

    // monotonicity: t <= t + b and Z subset of Y give t_Y <= (t + b)_Z
    let z_dim = rng.random_range(0..=k);
    let z = linalg::Subspace::new(y.basis().columns(0, z_dim).into_owned()).expect("orthonormal columns");
    if let Some((ty, wz)) = r.guard("short_monotone", ctx, || {
        let w = af.sum(bf)?;
        Ok((forms::short_form(af, &y, tol)?, forms::short_form(&w, &z, tol)?))
    }) {
        for _ in 0..20 {
            let x = sample::random_unit_vector(n, rng);
            r.check("short_monotone", quadratic_excess(&ty, &wz, &x), atol * (1.0 + a_norm + b_norm), ctx);
        }
    }

    // maximality against contractions C = A^{1/2} K A^{1/2}
    if let Some(kernel) = r.guard("short_maximal", ctx, || bf.kernel(tol)) {
        for _ in 0..5 {
            let c = sample::random_contraction(af.gram(), rng);
            if let Some(cs) = r.guard("short_maximal", ctx, || {
                forms::short_form(&PsdForm::from_computed(c, lmax, tol)?, &kernel, tol)
            }) {
                for _ in 0..10 {
                    let x = sample::random_unit_vector(n, rng);
                    r.check("short_maximal", quadratic_excess(&cs, &d.ac, &x), 1e-9 * lmax, ctx);
                }
            }
        }
    }

    // fixed point: t << w iff t_(ker w) = t
    if let Some(ac) = r.guard("ac_fixed_point", ctx, || forms::is_absolutely_continuous(af, bf, tol)) {
        let fixed = (d.ac.gram().as_matrix() - af.gram().as_matrix()).norm() <= atol * (1.0 + a_norm);
        r.require("ac_fixed_point", ac == fixed, || {
            format!("{}: absolutely continuous {ac} but fixed point {fixed}", ctx())
        });
    }

    // D_w t <= t_(ker w) <= t, and D_w t = t_(ker w)
    if let Some(l) = r.guard("lebesgue_coincidence", ctx, || forms::lebesgue_ac_part(af, bf, tol)) {
        r.require("lebesgue_coincidence", l.converged, || format!("{}: doubling cap reached", ctx()));
        r.check("lebesgue_coincidence", l.discrepancy, LEBESGUE_AGREEMENT_RTOL * (1.0 + a_norm), ctx);
        for _ in 0..10 {
            let x = sample::random_unit_vector(n, rng);
            r.check("ordering_chain", quadratic_excess(&l.form, &d.ac, &x), LEBESGUE_AGREEMENT_RTOL * (1.0 + a_norm), ctx);
            r.check("ordering_chain", quadratic_excess(&d.ac, af, &x), atol * (1.0 + a_norm), ctx);
        }
    }

    // quasi-unit characterizations for shorts, and u : (t - u) = 0 for u = A_ll
    if let Some(u) = r.guard("quasi_unit_equivalence", ctx, || forms::short_form(af, &y, tol)) {
        if let Some(rep) = r.guard("quasi_unit_equivalence", ctx, || forms::quasi_unit_report(&u, af, tol)) {
            r.require("quasi_unit_equivalence", rep.is_quasi_unit, || format!("{}: short is not a quasi-unit", ctx()));
        }
    }
    if let Some(rep) = r.guard("quasi_unit_identities", ctx, || forms::quasi_unit_report(&d.ac, af, tol)) {
        r.check("quasi_unit_identities", rep.harmonic_identity_residual, 1e-9, ctx);
        r.check("quasi_unit_identities", rep.exchange_identity_residual, 1e-9, ctx);
    }
    if let Some(ps) = r.guard("disjoint_part_parallel_sum", ctx, || forms::parallel_sum(&d.ac, &d.sing, tol)) {
        r.check("disjoint_part_parallel_sum", ps.frobenius_norm(), 1e-8, ctx);
    }

    // parallel sum against the minimizer y = (T + W)^+ T x
    if let Some((ps, sum_pinv)) = r.guard("parallel_sum_infimum", ctx, || {
        let ps = forms::parallel_sum(af, bf, tol)?;
        let sum = af.gram().add(bf.gram())?;
        Ok((ps, linalg::pinv(&sum, tol)?))
    }) {
        for _ in 0..20 {
            let x = sample::random_vector(n, rng);
            let y = sum_pinv.as_matrix() * (af.gram().as_matrix() * &x);
            let value = af.quadratic(&(&x - &y)).unwrap_or(f64::NAN) + bf.quadratic(&y).unwrap_or(f64::NAN);
            let closed = ps.quadratic(&x).unwrap_or(f64::NAN);
            let xtx = af.quadratic(&x).unwrap_or(f64::NAN);
            r.check("parallel_sum_infimum", (value - closed).abs(), atol * (1.0 + xtx), ctx);
        }
    }
}

fn operator_properties(
    r: &mut Report,
    af: &PsdForm,
    bf: &PsdForm,
    rng: &mut ChaCha8Rng,
    tol: &Tolerance,
    ctx: &dyn Fn() -> String,
) {
    let a = af.gram();
    let n = a.dim();
    let atol = tol.residual_atol();
    let a_norm = a.frobenius_norm();

    for k in 0..=n {
        let m = sample::random_subspace(n, k, rng);
        if let Some((krein, schur)) = r.guard("factorization_equivalence", ctx, || {
            Ok((operator::krein_short(a, &m, tol)?, forms::short_form(af, &m, tol)?))
        }) {
            let gap = (krein.as_matrix() - schur.gram().as_matrix()).norm();
            r.check("factorization_equivalence", gap, atol * (1.0 + a_norm), ctx);
            let p = linalg::orth_project(&m);
            let leak = (p.as_matrix() * krein.as_matrix()).norm();
            r.check("short_vanishes_on_subspace", leak, atol * (1.0 + a_norm), ctx);
            for _ in 0..5 {
                let x = sample::random_vector(n, rng);
                if let Some(sup) = r.guard("sup_formula", ctx, || operator::short_quadratic_sup(a, &m, &x, tol)) {
                    let direct = krein.quadratic(&x).unwrap_or(f64::NAN);
                    let xax = a.quadratic(&x).unwrap_or(f64::NAN);
                    r.check("sup_formula", (sup - direct).abs(), 1e-8 * (1.0 + xax), ctx);
                }
            }
        }
    }

    let Some(od) = r.guard("operator_matches_forms", ctx, || operator::operator_decompose(a, bf.gram(), tol)) else {
        return;
    };
    r.check("operator_sup_formula_residual", od.sup_formula_residual, 1e-8 * (1.0 + a_norm), ctx);
    if let Some(d) = r.guard("operator_matches_forms", ctx, || forms::short_type_decompose(af, bf, tol)) {
        let gap = (od.a_ll.as_matrix() - d.ac.gram().as_matrix())
            .norm()
            .max((od.a_perp.as_matrix() - d.sing.gram().as_matrix()).norm());
        r.check("operator_matches_forms", gap, atol * (1.0 + a_norm), ctx);
        if let Some(disjoint) = r.guard("ac_part_extremal", ctx, || forms::is_disjoint_part(&d.ac, af, tol)) {
            r.require("ac_part_extremal", disjoint, || format!("{}: A_ll not a disjoint part", ctx()));
        }
    }
}

/// Charge properties on one random ring.
pub fn verify_charges(seed: u64, tol: &Tolerance) -> Report {
    let mut r = Report {
        instances: 1,
        ..Report::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ring = Arc::new(sample::random_ring(8, &mut rng));
    let nu = sample::random_charge(&ring, 0.2, &mut rng);
    let mu = sample::random_charge(&ring, 0.4, &mut rng);
    let ctx = move || format!("ring seed {seed}");
    let ctx: &dyn Fn() -> String = &ctx;

    let Some(d) = r.guard("charge_form_consistency", ctx, || charges::charge_decompose(&nu, &mu, tol)) else {
        return r;
    };
    r.check("charge_form_consistency", d.form_residual, 1e-10, ctx);
    r.check("charge_ll_absolutely_continuous", d.null_set_max, 0.0, ctx);
    for part in [&d.ll, &d.perp] {
        let revalidated = Charge::new(ring.clone(), part.values().to_vec());
        r.require("charge_parts_valid", revalidated.is_ok(), || format!("{}: invalid part", ctx()));
    }
    let t_nu = charges::induced_form(&nu);
    let t_mu = charges::induced_form(&mu);
    let t_ll = charges::induced_form(&d.ll);
    let t_perp = charges::induced_form(&d.perp);
    if let Some(s) = r.guard("charge_perp_singular", ctx, || forms::is_singular(&t_perp, &t_mu, tol)) {
        r.require("charge_perp_singular", s, || format!("{}: perp part not singular", ctx()));
    }
    if let Some(dp) = r.guard("charge_ll_extremal", ctx, || forms::is_disjoint_part(&t_ll, &t_nu, tol)) {
        r.require("charge_ll_extremal", dp, || format!("{}: not a disjoint part", ctx()));
    }
    if let Some(l) = r.guard("charge_sigma_additive_coincidence", ctx, || forms::lebesgue_ac_part(&t_nu, &t_mu, tol)) {
        let gap = (l.form.gram().as_matrix() - t_ll.gram().as_matrix()).norm();
        r.check("charge_sigma_additive_coincidence", gap, 1e-8, ctx);
    }
    if let Some(shorted) = r.guard("charge_short_modulus_invariant", ctx, || {
        forms::short_form(&t_nu, &t_mu.kernel(tol)?, tol)
    }) {
        for _ in 0..10 {
            let zeta = sample::random_vector(shorted.dim(), &mut rng);
            let abs = zeta.map(|z| c64(z.norm(), 0.0));
            let a = shorted.quadratic(&zeta).unwrap_or(f64::NAN);
            let b = shorted.quadratic(&abs).unwrap_or(f64::NAN);
            r.check("charge_short_modulus_invariant", (a - b).abs(), 1e-9 * (1.0 + a), ctx);
        }
    }

    // maximality: theta <= nu with theta << mu is below nu_ll
    let threshold = charges::atom_zero_threshold(&mu, tol);
    let mu_atoms = mu.atom_values();
    for _ in 0..5 {
        let theta_atoms: Vec<f64> = nu
            .atom_values()
            .iter()
            .zip(&mu_atoms)
            .map(|(&v, &m)| if m > threshold { v * rng.random_range(0.0..=1.0) } else { 0.0 })
            .collect();
        if let Some(theta) = r.guard("charge_ll_maximal", ctx, || Charge::from_atom_values(ring.clone(), &theta_atoms)) {
            let excess = theta
                .values()
                .iter()
                .zip(d.ll.values())
                .map(|(t, l)| t - l)
                .fold(0.0, f64::max);
            r.check("charge_ll_maximal", excess, 1e-12 * (1.0 + nu.values().iter().copied().fold(0.0, f64::max)), ctx);
        }
    }

    // additivity criterion in both directions
    if let Some(ok) = r.guard("additivity_criterion", ctx, || charges::is_induced_additive(&ring, &t_nu, 10, &mut rng)) {
        r.require("additivity_criterion", ok, || format!("{}: induced form rejected", ctx()));
    }
    let k = t_nu.dim();
    if k >= 2 {
        let mut g = t_nu.gram().as_matrix().clone();
        let s = 1.0 + g[(0, 0)].re.max(g[(k - 1, k - 1)].re);
        for (i, j) in [(0, 0), (k - 1, k - 1), (0, k - 1), (k - 1, 0)] {
            g[(i, j)] += c64(s, 0.0);
        }
        if let Some(ok) = r.guard("additivity_criterion", ctx, || {
            let coupled = PsdForm::new(HermitianMatrix::new(g)?, tol)?;
            charges::is_induced_additive(&ring, &coupled, 10, &mut rng)
        }) {
            r.require("additivity_criterion", !ok, || format!("{}: coupled form accepted", ctx()));
        }
    }
    r
}

/// Functional properties for one random pair `(f, g)` on a fixture algebra.
pub fn verify_functionals(fixture: functionals::Fixture, param: usize, seed: u64, tol: &Tolerance) -> Report {
    let mut r = Report {
        instances: 1,
        ..Report::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = move || format!("{} {param} seed {seed}", fixture.name());
    let ctx: &dyn Fn() -> String = &ctx;
    let alg = Arc::new(fixture.build(param).expect("fixture parameters are valid"));
    let f = sample::random_functional(fixture, &alg, &mut rng);
    let g = sample::random_functional(fixture, &alg, &mut rng);
    let atol = tol.residual_atol();
    let f_max = f.coeffs().camax();

    let Some(data) = r.guard("gns_reconstruction", ctx, || functionals::gns(&f, tol)) else {
        return r;
    };
    r.check("gns_reconstruction", data.reconstruction_residual(&f), 1e-9 * (1.0 + f_max), ctx);
    r.check("gns_homomorphism", data.homomorphism_residual(&alg), 1e-9 * (1.0 + f_max), ctx);

    let Some(d) = r.guard("functional_sum", ctx, || functionals::functional_decompose(&f, &g, tol)) else {
        return r;
    };
    r.check("functional_sum", d.sum_residual, atol * (1.0 + f_max), ctx);
    r.check("functional_invariance", d.invariance_residual, atol * (1.0 + f_max), ctx);
    r.check("functional_form_bridge", d.form_bridge_residual, atol * (1.0 + f_max), ctx);

    let Some((f_form, g_form, ll_form, perp_form)) = r.guard("functional_parts", ctx, || {
        let f_form = functionals::induced_gram(&f, tol)?;
        Ok((
            f_form.clone(),
            functionals::induced_gram(&g, tol)?,
            PsdForm::from_computed(HermitianMatrix::new(d.ll.gram_matrix())?, f_form.scale(), tol)?,
            PsdForm::from_computed(HermitianMatrix::new(d.perp.gram_matrix())?, f_form.scale(), tol)?,
        ))
    }) else {
        return r;
    };
    r.check("functional_ll_absolutely_continuous", d.kernel_inclusion_max, tol.rank_rtol() * f_form.scale().max(1.0), ctx);
    if let Some(s) = r.guard("functional_perp_singular", ctx, || forms::is_singular(&perp_form, &g_form, tol)) {
        r.require("functional_perp_singular", s, || format!("{}: perp part not singular", ctx()));
    }
    if let Some(dp) = r.guard("functional_ll_extremal", ctx, || forms::is_disjoint_part(&ll_form, &f_form, tol)) {
        r.require("functional_ll_extremal", dp, || format!("{}: not a disjoint part", ctx()));
    }
    for part in [&d.ll, &d.perp] {
        if r.guard("functional_parts_representable", ctx, || functionals::gns(part, tol)).is_some() {
            r.require("functional_parts_representable", true, String::new);
        }
    }

    // maximality against h(a) = <pi(a) C xi, xi> with C in the commutant, 0 <= C <= I - P
    let basis = functionals::commutant_basis(&data, tol);
    let q = data.quotient_dim();
    let complement = CMat::identity(q, q) - &d.projection;
    for _ in 0..3 {
        if basis.is_empty() {
            break;
        }
        let mut x = CMat::zeros(q, q);
        for b in &basis {
            x += b * sample::gaussian(&mut rng);
        }
        let herm = &x + x.adjoint();
        let pos = &herm * &herm;
        let norm = linalg::spectral_norm(&pos);
        if norm == 0.0 {
            continue;
        }
        let c = &complement * pos.unscale(norm) * &complement;
        if let Some(h) = r.guard("functional_ll_maximal", ctx, || {
            let h = functionals::functional_from_commutant(&f, &data, &c, tol)?;
            PsdForm::from_computed(HermitianMatrix::new(h.gram_matrix())?, f_form.scale(), tol)
        }) {
            for _ in 0..10 {
                let x = sample::random_unit_vector(alg.dim(), &mut rng);
                r.check("functional_ll_maximal", quadratic_excess(&h, &ll_form, &x), atol * (1.0 + f_form.scale()), ctx);
            }
        }
    }

    // t_ll[a b] <= |pi(a)|^2 t_ll[b]
    for i in 0..alg.dim() {
        let lambda = functionals::pi_norm(&data, i).powi(2);
        for _ in 0..3 {
            let b = sample::random_vector(alg.dim(), &mut rng);
            let ab = alg.product(&alg.basis(i), &b);
            let lhs = ll_form.quadratic(&ab).unwrap_or(f64::NAN);
            let rhs = lambda * ll_form.quadratic(&b).unwrap_or(f64::NAN);
            r.check("representable_form_bound", lhs - rhs, atol * (1.0 + rhs), ctx);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_random_run_passes() {
        let report = verify_random(&RunConfig::new(7, 8), &Tolerance::default());
        let failed: Vec<_> = report.failed().map(|(name, p)| (name, &p.first_failure)).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert_eq!(report.instances, 24);
        assert!(report.properties.len() > 30);
    }

    #[test]
    fn zero_trials_is_vacuous() {
        let report = verify_random(&RunConfig::new(1, 0), &Tolerance::default());
        assert!(report.pass());
        assert!(report.properties.is_empty());
    }

    #[test]
    fn indefinite_input_rejected() {
        let tol = Tolerance::default();
        let bad = HermitianMatrix::diag(&[1.0, -1.0]);
        assert!(verify_pair(&bad, &HermitianMatrix::identity(2), 0, &tol).is_err());
    }
}
