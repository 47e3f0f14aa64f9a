//! Randomized invariants, driven by proptest-chosen seeds and sizes.

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shorted::charges;
use shorted::forms::{self, PsdForm};
use shorted::functionals;
use shorted::linalg::{self, HermitianMatrix, Tolerance};
use shorted::operator;
use shorted::sample;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn pair(seed: u64) -> (PsdForm, PsdForm) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = sample::random_pair(8, 1e6, &mut rng);
    (PsdForm::new(p.a, &tol()).unwrap(), PsdForm::new(p.b, &tol()).unwrap())
}

fn gap_below(small: &HermitianMatrix, big: &HermitianMatrix) -> f64 {
    (-big.sub(small).unwrap().eigen().lambda_min()).max(0.0)
}

fn bound(t: &PsdForm) -> f64 {
    1e-9 * (1.0 + t.frobenius_norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_parts_add_up_and_separate(seed in any::<u64>()) {
        let (t, w) = pair(seed);
        let d = forms::short_type_decompose(&t, &w, &tol()).unwrap();
        prop_assert!(d.residuals.sum_residual <= 1e-10 * (1.0 + t.frobenius_norm()));
        prop_assert!(gap_below(d.ac.gram(), t.gram()) <= bound(&t));
        prop_assert!(forms::is_absolutely_continuous(&d.ac, &w, &tol()).unwrap());
        prop_assert!(forms::is_singular(&d.sing, &w, &tol()).unwrap());
        prop_assert!(d.unique);
    }

    #[test]
    fn short_is_idempotent_and_below(seed in any::<u64>(), k in 0usize..9) {
        let (t, _) = pair(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let y = sample::random_subspace(t.dim(), k, &mut rng);
        let s = forms::short_form(&t, &y, &tol()).unwrap();
        let ss = forms::short_form(&s, &y, &tol()).unwrap();
        prop_assert!((ss.gram().as_matrix() - s.gram().as_matrix()).norm() <= bound(&t));
        prop_assert!(gap_below(s.gram(), t.gram()) <= bound(&t));
        for v in y.basis().column_iter() {
            prop_assert!(s.quadratic(&v.into_owned()).unwrap() <= bound(&t));
        }
    }

    #[test]
    fn larger_subspace_gives_smaller_short(seed in any::<u64>(), k in 0usize..9) {
        let (t, _) = pair(seed);
        let n = t.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let big = sample::random_subspace(n, k.min(n), &mut rng);
        let keep = k.min(n) / 2;
        let small = linalg::Subspace::new(big.basis().columns(0, keep).into_owned()).unwrap();
        let s_big = forms::short_form(&t, &big, &tol()).unwrap();
        let s_small = forms::short_form(&t, &small, &tol()).unwrap();
        prop_assert!(gap_below(s_big.gram(), s_small.gram()) <= bound(&t));
    }

    #[test]
    fn parallel_sum_is_symmetric_and_below_both(seed in any::<u64>()) {
        let (t, w) = pair(seed);
        let tw = forms::parallel_sum(&t, &w, &tol()).unwrap();
        let wt = forms::parallel_sum(&w, &t, &tol()).unwrap();
        let b = 1e-9 * (1.0 + t.frobenius_norm() + w.frobenius_norm());
        prop_assert!((tw.gram().as_matrix() - wt.gram().as_matrix()).norm() <= b);
        prop_assert!(gap_below(tw.gram(), t.gram()) <= b);
        prop_assert!(gap_below(tw.gram(), w.gram()) <= b);
    }

    #[test]
    fn factor_route_matches_schur_complement(seed in any::<u64>(), k in 0usize..9) {
        let (t, _) = pair(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let m = sample::random_subspace(t.dim(), k, &mut rng);
        let krein = operator::krein_short(t.gram(), &m, &tol()).unwrap();
        let schur = forms::short_form(&t, &m, &tol()).unwrap();
        prop_assert!((krein.as_matrix() - schur.gram().as_matrix()).norm() <= bound(&t));
        let leak = (linalg::orth_project(&m).as_matrix() * krein.as_matrix()).norm();
        prop_assert!(leak <= bound(&t));
    }

    #[test]
    fn iterated_parallel_sums_reach_the_short(seed in any::<u64>()) {
        let (t, w) = pair(seed);
        let l = forms::lebesgue_ac_part(&t, &w, &tol()).unwrap();
        let s = forms::short_form(&t, &w.kernel(&tol()).unwrap(), &tol()).unwrap();
        prop_assert!((l.form.gram().as_matrix() - s.gram().as_matrix()).norm() <= 1e-6 * (1.0 + t.frobenius_norm()));
    }

    #[test]
    fn charge_parts_add_up(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ring = Arc::new(sample::random_ring(8, &mut rng));
        let nu = sample::random_charge(&ring, 0.2, &mut rng);
        let mu = sample::random_charge(&ring, 0.4, &mut rng);
        let d = charges::charge_decompose(&nu, &mu, &tol()).unwrap();
        for ((a, b), c) in d.ll.values().iter().zip(d.perp.values()).zip(nu.values()) {
            prop_assert!((a + b - c).abs() <= 1e-12 * (1.0 + c));
        }
        prop_assert!(d.form_residual <= 1e-10 * (1.0 + nu.atom_values().iter().sum::<f64>()));
        prop_assert_eq!(d.null_set_max, 0.0);
    }

    #[test]
    fn functional_parts_add_up(seed in any::<u64>(), which in 0usize..9) {
        let (fixture, param) = sample::fixture_algebras()[which];
        let alg = Arc::new(fixture.build(param).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = sample::random_functional(fixture, &alg, &mut rng);
        let g = sample::random_functional(fixture, &alg, &mut rng);
        let d = functionals::functional_decompose(&f, &g, &tol()).unwrap();
        let scale = 1.0 + f.coeffs().camax();
        prop_assert!(d.sum_residual <= 1e-9 * scale);
        prop_assert!(d.invariance_residual <= 1e-9 * scale);
        prop_assert!(d.form_bridge_residual <= 1e-9 * scale);
    }
}
