//! Seeded random instances: PSD pairs with controlled rank and conditioning, subspaces, rings,
//! charges and positive functionals on the fixture algebras.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::charges::{Charge, SetRing};
use crate::functionals::{Fixture, Functional, StarAlgebra};
use crate::linalg::{c64, CMat, CVec, HermitianMatrix, Subspace, Tolerance};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> crate::linalg::C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    CVec::from_fn(n, |_, _| gaussian(rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    loop {
        let v = random_vector(n, rng);
        let norm = v.norm();
        if norm > 1e-3 {
            return v.unscale(norm);
        }
    }
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases of `R` removed.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let g = CMat::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
    q
}

/// `U diag(lambda) U*` with `rank` nonzero eigenvalues log-spaced between `magnitude` and
/// `magnitude / cond`.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rank: usize, cond: f64, magnitude: f64, rng: &mut R) -> HermitianMatrix {
    let rank = rank.min(n);
    let u = random_unitary(n, rng);
    let mut values = vec![0.0; n];
    for (i, v) in values.iter_mut().take(rank).enumerate() {
        let t = if rank > 1 { i as f64 / (rank - 1) as f64 } else { 0.0 };
        *v = magnitude * cond.powf(-t);
    }
    let d = CMat::from_diagonal(&CVec::from_iterator(n, values.iter().map(|&v| c64(v, 0.0))));
    HermitianMatrix::hermitize(&u * d * u.adjoint())
}

/// A pair `(A, B)` of PSD matrices.
#[derive(Debug, Clone)]
pub struct PsdPair {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
}

/// Dimensions `1..=max_dim`, ranks uniform in `0..=n` (biased towards rank-deficient `B`),
/// condition numbers up to `max_cond`, magnitudes in `[0.1, 10]`. Occasionally `B` shares part
/// of its range with `A` or is a scaled copy of `A`.
pub fn random_pair<R: Rng + ?Sized>(max_dim: usize, max_cond: f64, rng: &mut R) -> PsdPair {
    let n = rng.random_range(1..=max_dim);
    let cond = 10f64.powf(rng.random_range(0.0..=max_cond.log10()));
    let magnitude = 10f64.powf(rng.random_range(-1.0..=1.0));
    let rank_a = rng.random_range(0..=n);
    let a = random_psd(n, rank_a, cond, magnitude, rng);
    let b = match rng.random_range(0..10) {
        0 => a.scale(rng.random_range(0.5..2.0)),
        1 => HermitianMatrix::zeros(n),
        _ => {
            let rank_b = if rng.random_bool(0.7) {
                rng.random_range(0..n.max(1))
            } else {
                n
            };
            let cond_b = 10f64.powf(rng.random_range(0.0..=max_cond.log10()));
            random_psd(n, rank_b, cond_b, 10f64.powf(rng.random_range(-1.0..=1.0)), rng)
        }
    };
    PsdPair { a, b }
}

/// A random `k`-dimensional subspace of `C^n`.
pub fn random_subspace<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Subspace {
    let u = random_unitary(n, rng);
    Subspace::new(u.columns(0, k.min(n)).into_owned()).expect("columns of a unitary")
}

/// `A^{1/2} K A^{1/2}` with `0 <= K <= I` random, so `0 <= C <= A`.
pub fn random_contraction<R: Rng + ?Sized>(a: &HermitianMatrix, rng: &mut R) -> HermitianMatrix {
    let n = a.dim();
    let root = crate::linalg::psd_sqrt(a, &Tolerance::default()).expect("PSD input");
    let u = random_unitary(n, rng);
    let k = CMat::from_diagonal(&CVec::from_fn(n, |_, _| c64(rng.random_range(0.0..=1.0), 0.0)));
    let inner = &u * k * u.adjoint();
    HermitianMatrix::hermitize(root.as_matrix() * inner * root.as_matrix())
}

/// A ring on a universe of `1..=max_universe` points: a random subset partitioned into random
/// atoms.
pub fn random_ring<R: Rng + ?Sized>(max_universe: usize, rng: &mut R) -> SetRing {
    let universe = rng.random_range(1..=max_universe);
    let blocks = rng.random_range(1..=universe);
    let mut atoms = vec![0u32; blocks];
    for x in 0..universe {
        // some points lie outside every member
        if rng.random_bool(0.85) {
            atoms[rng.random_range(0..blocks)] |= 1 << x;
        }
    }
    atoms.retain(|&a| a != 0);
    SetRing::from_atoms(universe, &atoms).expect("disjoint nonempty atoms")
}

/// Atom values in `[0, 10)`, each zero with probability `zero_prob`.
pub fn random_charge<R: Rng + ?Sized>(ring: &Arc<SetRing>, zero_prob: f64, rng: &mut R) -> Charge {
    let values: Vec<f64> = ring
        .atoms()
        .iter()
        .map(|_| {
            if rng.random_bool(zero_prob) {
                0.0
            } else {
                rng.random_range(0.0..10.0)
            }
        })
        .collect();
    Charge::from_atom_values(ring.clone(), &values).expect("nonnegative atom values")
}

/// A random positive functional on a fixture algebra; about half of the spectral weights vanish
/// so that Gram kernels are nontrivial.
///
/// - diagonal: `f(e_i) = p_i`;
/// - matrix: `f(x) = tr(rho x)` with `rho` a random PSD matrix, so `f(e_ab) = rho_ba`;
/// - cyclic group: `f(e_j) = sum_m p_m exp(2 pi i m j / n)`, a positive definite function.
pub fn random_functional<R: Rng + ?Sized>(
    fixture: Fixture,
    algebra: &Arc<StarAlgebra>,
    rng: &mut R,
) -> Functional {
    let d = algebra.dim();
    let weight = |rng: &mut R| {
        if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.1..5.0)
        }
    };
    let coeffs = match fixture {
        Fixture::Diagonal => CVec::from_fn(d, |_, _| c64(weight(rng), 0.0)),
        Fixture::Matrix => {
            let k = (d as f64).sqrt().round() as usize;
            let rank = rng.random_range(0..=k);
            let rho = random_psd(k, rank, 100.0, rng.random_range(0.5..5.0), rng);
            CVec::from_fn(d, |i, _| rho.as_matrix()[(i % k, i / k)])
        }
        Fixture::CyclicGroup => {
            let p: Vec<f64> = (0..d).map(|_| weight(rng)).collect();
            CVec::from_fn(d, |j, _| {
                p.iter()
                    .enumerate()
                    .map(|(m, &pm)| {
                        let angle = 2.0 * std::f64::consts::PI * (m * j) as f64 / d as f64;
                        c64(pm * angle.cos(), pm * angle.sin())
                    })
                    .sum()
            })
        }
    };
    Functional::new(algebra.clone(), coeffs, &Tolerance::default()).expect("positive by construction")
}

/// Fixture algebras exercised by the property suites.
pub fn fixture_algebras() -> Vec<(Fixture, usize)> {
    vec![
        (Fixture::Diagonal, 1),
        (Fixture::Diagonal, 3),
        (Fixture::Diagonal, 5),
        (Fixture::Matrix, 1),
        (Fixture::Matrix, 2),
        (Fixture::Matrix, 3),
        (Fixture::CyclicGroup, 2),
        (Fixture::CyclicGroup, 4),
        (Fixture::CyclicGroup, 6),
    ]
}
