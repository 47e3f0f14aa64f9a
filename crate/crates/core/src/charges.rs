//! Charges (finitely additive nonnegative set functions) on finite rings of sets, the induced
//! diagonal form on step functions, and the short-type decomposition `nu = nu_ll + nu_perp`
//! relative to a second charge `mu`.
//!
//! A finite ring is determined by its atoms, the minimal nonempty members. Every member is a
//! disjoint union of atoms and every union of atoms is a member, so a step function is a complex
//! vector indexed by atoms and a charge is determined by its atom values.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::forms::{short_form, PsdForm};
use crate::linalg::{self, c64, CVec, HermitianMatrix, Tolerance};

pub const MAX_UNIVERSE: usize = 24;

/// Atom values of `mu` at or below this absolute level count as zero regardless of scale.
pub const ATOM_ZERO_FLOOR: f64 = 1e-14;

/// Above this many members the additivity check runs on atom pairs instead of member pairs.
const MEMBER_PAIR_LIMIT: usize = 4096;

/// A finite ring of subsets of `{0, .., universe - 1}`, stored extensionally as bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetRing {
    universe: usize,
    members: Vec<u32>,
    atoms: Vec<u32>,
}

fn check_universe(universe: usize) -> Result<()> {
    if universe == 0 || universe > MAX_UNIVERSE {
        return Err(Error::NotARing(format!(
            "universe size {universe} outside 1..={MAX_UNIVERSE}"
        )));
    }
    Ok(())
}

fn check_mask(universe: usize, mask: u32) -> Result<()> {
    if universe < 32 && mask >> universe != 0 {
        return Err(Error::NotARing(format!(
            "set {mask:#b} has elements outside a universe of size {universe}"
        )));
    }
    Ok(())
}

impl SetRing {
    /// Validates closure under union and difference.
    ///
    /// The check is exact: the ring axioms hold iff the sets `a(x)` (intersection of all members
    /// containing `x`) are members, are pairwise disjoint or equal, and the members are exactly
    /// the `2^k` unions of the `k` distinct such sets.
    pub fn new(universe: usize, members: Vec<u32>) -> Result<Self> {
        check_universe(universe)?;
        let mut members = members;
        for &m in &members {
            check_mask(universe, m)?;
        }
        members.sort_unstable();
        members.dedup();
        if members.first() != Some(&0) {
            return Err(Error::NotARing("missing the empty set".into()));
        }
        let cover = members.iter().fold(0u32, |acc, &m| acc | m);
        let mut atoms = Vec::new();
        for x in 0..universe {
            let bit = 1u32 << x;
            if cover & bit == 0 {
                continue;
            }
            let atom = members
                .iter()
                .filter(|&&m| m & bit != 0)
                .fold(u32::MAX, |acc, &m| acc & m);
            if members.binary_search(&atom).is_err() {
                return Err(Error::NotARing(format!(
                    "intersection {atom:#b} of the members containing element {x} is not a member"
                )));
            }
            atoms.push(atom);
        }
        atoms.sort_unstable();
        atoms.dedup();
        for (i, &a) in atoms.iter().enumerate() {
            if let Some(&b) = atoms[i + 1..].iter().find(|&&b| a & b != 0) {
                return Err(Error::NotARing(format!(
                    "difference {:#b} of members {a:#b} and {b:#b} is not a member",
                    a & !b
                )));
            }
        }
        let expected = 1usize << atoms.len();
        if members.len() != expected {
            let witness = atoms
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| atoms[i..].iter().map(move |&b| a | b))
                .find(|u| members.binary_search(u).is_err());
            let detail = match witness {
                Some(u) => format!("union {u:#b} of two members is not a member"),
                None => format!(
                    "{} members but {} unions of {} atoms",
                    members.len(),
                    expected,
                    atoms.len()
                ),
            };
            return Err(Error::NotARing(detail));
        }
        Ok(SetRing {
            universe,
            members,
            atoms,
        })
    }

    /// The ring of all unions of the given pairwise disjoint nonempty sets.
    pub fn from_atoms(universe: usize, atoms: &[u32]) -> Result<Self> {
        check_universe(universe)?;
        let mut sorted = atoms.to_vec();
        sorted.sort_unstable();
        for (i, &a) in sorted.iter().enumerate() {
            check_mask(universe, a)?;
            if a == 0 {
                return Err(Error::NotARing("empty atom".into()));
            }
            if sorted[i + 1..].iter().any(|&b| a & b != 0) {
                return Err(Error::NotARing(format!("atom {a:#b} overlaps another atom")));
            }
        }
        let members = (0u32..1 << sorted.len())
            .map(|sel| {
                sorted
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| sel >> i & 1 == 1)
                    .fold(0u32, |acc, (_, &a)| acc | a)
            })
            .collect();
        SetRing::new(universe, members)
    }

    pub fn power_set(universe: usize) -> Result<Self> {
        check_universe(universe)?;
        let singletons: Vec<u32> = (0..universe).map(|x| 1u32 << x).collect();
        SetRing::from_atoms(universe, &singletons)
    }

    pub fn universe_size(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn atoms(&self) -> &[u32] {
        &self.atoms
    }

    pub fn index_of(&self, member: u32) -> Option<usize> {
        self.members.binary_search(&member).ok()
    }

    pub fn contains(&self, set: u32) -> bool {
        self.index_of(set).is_some()
    }

    /// Indices of the atoms contained in `member`.
    pub fn atoms_in(&self, member: u32) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&i| self.atoms[i] & member == self.atoms[i])
            .collect()
    }
}

/// Step functions: one complex coordinate per atom.
#[derive(Debug, Clone)]
pub struct StepFunctionSpace {
    atoms: Vec<u32>,
}

impl StepFunctionSpace {
    pub fn dim(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[u32] {
        &self.atoms
    }

    /// Coordinates of the indicator of `member`, or `None` if it is not a union of atoms.
    pub fn indicator(&self, member: u32) -> Option<CVec> {
        let covered = self
            .atoms
            .iter()
            .filter(|&&a| a & member == a)
            .fold(0u32, |acc, &a| acc | a);
        if covered != member {
            return None;
        }
        Some(CVec::from_iterator(
            self.atoms.len(),
            self.atoms
                .iter()
                .map(|&a| c64(if a & member == a { 1.0 } else { 0.0 }, 0.0)),
        ))
    }
}

/// Minimal nonempty members, ordered by bitmask. Verifies that every member is a disjoint union
/// of atoms.
pub fn atoms(ring: &SetRing) -> Result<StepFunctionSpace> {
    let space = StepFunctionSpace {
        atoms: ring.atoms.clone(),
    };
    for &m in &ring.members {
        if space.indicator(m).is_none() {
            return Err(Error::NotARing(format!(
                "member {m:#b} is not a union of atoms"
            )));
        }
    }
    Ok(space)
}

/// A nonnegative finitely additive set function, one value per ring member.
#[derive(Debug, Clone)]
pub struct Charge {
    ring: Arc<SetRing>,
    values: Vec<f64>,
}

impl Charge {
    /// `values` follow the order of `ring.members()`.
    pub fn new(ring: Arc<SetRing>, values: Vec<f64>) -> Result<Self> {
        if values.len() != ring.members.len() {
            return Err(Error::DimensionMismatch {
                expected: ring.members.len(),
                found: values.len(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidCharge(format!(
                "value {v} on member {:#b} is not a nonnegative real",
                ring.members[i]
            )));
        }
        // members[0] is the empty set
        let atom_values: Vec<f64> = ring
            .atoms
            .iter()
            .map(|&a| values[ring.index_of(a).expect("atoms are members")])
            .collect();
        let total: f64 = atom_values.iter().sum();
        let bound = 1e-12 * (1.0 + total);
        if values[0] > bound {
            return Err(Error::InvalidCharge(format!(
                "value {} on the empty set",
                values[0]
            )));
        }
        for (&m, &v) in ring.members.iter().zip(&values) {
            let sum: f64 = ring.atoms_in(m).iter().map(|&i| atom_values[i]).sum();
            if (sum - v).abs() > bound {
                return Err(Error::InvalidCharge(format!(
                    "not additive: member {m:#b} has value {v} but its atoms sum to {sum}"
                )));
            }
        }
        Ok(Charge { ring, values })
    }

    pub fn from_atom_values(ring: Arc<SetRing>, atom_values: &[f64]) -> Result<Self> {
        if atom_values.len() != ring.atoms.len() {
            return Err(Error::DimensionMismatch {
                expected: ring.atoms.len(),
                found: atom_values.len(),
            });
        }
        let values = ring
            .members
            .iter()
            .map(|&m| ring.atoms_in(m).iter().map(|&i| atom_values[i]).sum())
            .collect();
        Charge::new(ring, values)
    }

    pub fn zero(ring: Arc<SetRing>) -> Self {
        let values = vec![0.0; ring.members.len()];
        Charge { ring, values }
    }

    pub fn ring(&self) -> &Arc<SetRing> {
        &self.ring
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, member: u32) -> Option<f64> {
        self.ring.index_of(member).map(|i| self.values[i])
    }

    pub fn atom_values(&self) -> Vec<f64> {
        self.ring
            .atoms
            .iter()
            .map(|&a| self.value(a).expect("atoms are members"))
            .collect()
    }

    /// `theta(R) <= self(R)` on every member, up to `atol`.
    pub fn le(&self, other: &Charge, atol: f64) -> Result<bool> {
        same_ring(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| *a <= b + atol))
    }
}

fn same_ring(a: &Charge, b: &Charge) -> Result<()> {
    if Arc::ptr_eq(&a.ring, &b.ring) || a.ring == b.ring {
        Ok(())
    } else {
        Err(Error::RingMismatch)
    }
}

/// `t_nu(phi, psi) = integral of phi conj(psi) d nu`: diagonal with the atom values.
pub fn induced_form(nu: &Charge) -> PsdForm {
    let diag = HermitianMatrix::diag(&nu.atom_values());
    PsdForm::new(diag, &Tolerance::default()).expect("nonnegative diagonal")
}

/// Whether `R -> t[chi_R]` is additive, tested two ways: `t[zeta] = t[|zeta|]` on `trials`
/// random step functions, and additivity over disjoint member pairs.
///
/// The two tests are only equivalent for real forms; on a form such as `[[1, i], [-i, 1]]`
/// the set function is additive while `t[zeta] != t[|zeta|]`. The result is their
/// conjunction, and a disagreement on a diagonal form is an internal inconsistency.
pub fn is_induced_additive<R: Rng + ?Sized>(
    ring: &SetRing,
    t: &PsdForm,
    trials: usize,
    rng: &mut R,
) -> Result<bool> {
    let space = atoms(ring)?;
    linalg::check_dim(space.dim(), t.dim())?;
    let n = t.dim();

    let mut modulus_ok = true;
    for _ in 0..trials {
        let zeta = CVec::from_fn(n, |_, _| {
            c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let abs = zeta.map(|z| c64(z.norm(), 0.0));
        let a = t.quadratic(&zeta)?;
        let b = t.quadratic(&abs)?;
        if (a - b).abs() > 1e-9 * (1.0 + a) {
            modulus_ok = false;
            break;
        }
    }

    let additive_ok = if ring.members.len() <= MEMBER_PAIR_LIMIT {
        let theta: Vec<f64> = ring
            .members
            .iter()
            .map(|&m| t.quadratic(&space.indicator(m).expect("checked by atoms")))
            .collect::<Result<_>>()?;
        let mut ok = true;
        'outer: for (i, &r1) in ring.members.iter().enumerate() {
            for (j, &r2) in ring.members.iter().enumerate().skip(i + 1) {
                if r1 & r2 != 0 {
                    continue;
                }
                let u = ring.index_of(r1 | r2).expect("ring is closed under union");
                if (theta[u] - theta[i] - theta[j]).abs() > 1e-9 * (1.0 + theta[u]) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        ok
    } else {
        // every member is a union of atoms, so additivity reduces to Re t(e_a, e_b) = 0
        let g = t.gram().as_matrix();
        let bound = 1e-9 * (1.0 + g.diagonal().iter().map(|z| z.re).sum::<f64>());
        (0..n).all(|a| (a + 1..n).all(|b| 2.0 * g[(a, b)].re.abs() <= bound))
    };

    let g = t.gram().as_matrix();
    let off_diag = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| g[(a, b)].norm())
        .fold(0.0, f64::max);
    let diagonal = off_diag <= 1e-12 * (1.0 + t.gram().max_abs());
    if diagonal && !(modulus_ok && additive_ok) {
        return Err(Error::InternalInconsistency(format!(
            "diagonal form failed the additivity criterion (modulus test {modulus_ok}, pair test {additive_ok})"
        )));
    }
    Ok(modulus_ok && additive_ok)
}

/// `nu = nu_ll + nu_perp` relative to `mu`, with diagnostics comparing against the form-level
/// short of the induced forms.
#[derive(Debug, Clone)]
pub struct ChargeDecomposition {
    pub ll: Charge,
    pub perp: Charge,
    /// Max over members of `|nu_ll(R) - short(t_nu, ker t_mu)[chi_R]|`.
    pub form_residual: f64,
    /// Max of `nu_ll(R)` over members with `mu(R) = 0`.
    pub null_set_max: f64,
}

/// Atom threshold below which `mu` counts as zero.
pub fn atom_zero_threshold(mu: &Charge, tol: &Tolerance) -> f64 {
    let max = mu.atom_values().into_iter().fold(0.0, f64::max);
    (tol.rank_rtol() * max).max(ATOM_ZERO_FLOOR)
}

pub fn charge_decompose(nu: &Charge, mu: &Charge, tol: &Tolerance) -> Result<ChargeDecomposition> {
    same_ring(nu, mu)?;
    let ring = nu.ring.clone();
    let threshold = atom_zero_threshold(mu, tol);
    let mu_atoms = mu.atom_values();
    let nu_atoms = nu.atom_values();
    let ll_atoms: Vec<f64> = nu_atoms
        .iter()
        .zip(&mu_atoms)
        .map(|(&v, &m)| if m > threshold { v } else { 0.0 })
        .collect();
    let perp_atoms: Vec<f64> = nu_atoms
        .iter()
        .zip(&ll_atoms)
        .map(|(v, l)| v - l)
        .collect();
    let ll = Charge::from_atom_values(ring.clone(), &ll_atoms)?;
    let perp = Charge::from_atom_values(ring.clone(), &perp_atoms)?;

    let null_set_max = ring
        .members
        .iter()
        .enumerate()
        .filter(|&(i, _)| mu.values[i] <= threshold)
        .map(|(i, _)| ll.values[i])
        .fold(0.0, f64::max);
    if null_set_max > 0.0 {
        return Err(Error::InternalInconsistency(format!(
            "absolutely continuous part charges a mu-null member ({null_set_max:e})"
        )));
    }

    // the kernel cutoff rank_rtol * scale equals the atom threshold
    let space = atoms(&ring)?;
    let t_nu = induced_form(nu);
    let t_mu = induced_form(mu);
    let kernel = linalg::null_basis_scaled(t_mu.gram(), threshold / tol.rank_rtol(), tol)?;
    let shorted = short_form(&t_nu, &kernel, tol)?;
    let mut form_residual: f64 = 0.0;
    for (i, &m) in ring.members.iter().enumerate() {
        let chi = space.indicator(m).expect("checked by atoms");
        form_residual = form_residual.max((shorted.quadratic(&chi)? - ll.values[i]).abs());
    }
    let total: f64 = nu_atoms.iter().sum();
    if form_residual > 1e-10 * (1.0 + total) {
        return Err(Error::InternalInconsistency(format!(
            "atom-wise and form-level decompositions differ by {form_residual:e}"
        )));
    }
    Ok(ChargeDecomposition {
        ll,
        perp,
        form_residual,
        null_set_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_point() -> Arc<SetRing> {
        Arc::new(SetRing::power_set(2).unwrap())
    }

    #[test]
    fn atom_examples() {
        assert_eq!(atoms(&SetRing::power_set(2).unwrap()).unwrap().atoms(), &[0b01, 0b10]);
        assert_eq!(atoms(&SetRing::new(2, vec![0, 0b11]).unwrap()).unwrap().atoms(), &[0b11]);
        let ring = SetRing::new(3, vec![0, 0b001, 0b110, 0b111]).unwrap();
        assert_eq!(atoms(&ring).unwrap().atoms(), &[0b001, 0b110]);
    }

    #[test]
    fn ring_validation() {
        assert!(matches!(SetRing::new(2, vec![0b01]), Err(Error::NotARing(_))));
        // {1},{1,2} without {2}: difference not closed
        assert!(matches!(SetRing::new(2, vec![0, 0b01, 0b11]), Err(Error::NotARing(_))));
        // {1},{2} without {1,2}: union not closed
        let err = SetRing::new(2, vec![0, 0b01, 0b10]).unwrap_err();
        assert!(err.to_string().contains("union"));
        assert!(SetRing::new(25, vec![0]).is_err());
        assert!(SetRing::new(2, vec![0, 0b100]).is_err());
        let r = SetRing::new(3, vec![0b110, 0, 0b001, 0b111, 0b001]).unwrap();
        assert_eq!(r.members(), &[0, 0b001, 0b110, 0b111]);
        assert_eq!(SetRing::new(4, vec![0]).unwrap().atoms().len(), 0);
    }

    #[test]
    fn charge_validation() {
        let ring = two_point();
        assert!(Charge::new(ring.clone(), vec![0.0, 3.0, 4.0, 7.0]).is_ok());
        assert!(matches!(
            Charge::new(ring.clone(), vec![0.0, 3.0, 4.0, 8.0]),
            Err(Error::InvalidCharge(_))
        ));
        assert!(Charge::new(ring.clone(), vec![0.0, -1.0, 4.0, 3.0]).is_err());
        assert!(Charge::new(ring.clone(), vec![1.0, 3.0, 4.0, 7.0]).is_err());
        assert!(matches!(
            Charge::new(ring, vec![0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn induced_form_examples() {
        let nu = Charge::from_atom_values(two_point(), &[3.0, 4.0]).unwrap();
        let g = induced_form(&nu);
        assert!((g.gram().as_matrix() - HermitianMatrix::diag(&[3.0, 4.0]).as_matrix()).norm() == 0.0);
        assert_eq!(induced_form(&Charge::zero(two_point())).frobenius_norm(), 0.0);
        let single = Arc::new(SetRing::new(1, vec![0, 1]).unwrap());
        let nu = Charge::from_atom_values(single, &[5.0]).unwrap();
        assert_eq!(induced_form(&nu).gram().as_matrix()[(0, 0)].re, 5.0);
    }

    #[test]
    fn additivity_criterion() {
        let ring = SetRing::power_set(2).unwrap();
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let diag = PsdForm::new(HermitianMatrix::diag(&[1.0, 2.0]), &tol).unwrap();
        assert!(is_induced_additive(&ring, &diag, 50, &mut rng).unwrap());
        let ones = PsdForm::new(
            HermitianMatrix::from_real_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap(),
            &tol,
        )
        .unwrap();
        assert!(!is_induced_additive(&ring, &ones, 50, &mut rng).unwrap());
        assert!(is_induced_additive(&ring, &PsdForm::zero(2), 50, &mut rng).unwrap());
        assert!(matches!(
            is_induced_additive(&ring, &PsdForm::zero(3), 5, &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn imaginary_coupling_is_additive_but_fails_modulus_test() {
        let ring = SetRing::power_set(2).unwrap();
        let tol = Tolerance::default();
        let mut m = crate::linalg::CMat::identity(2, 2);
        m[(0, 1)] = c64(0.0, 1.0);
        m[(1, 0)] = c64(0.0, -1.0);
        let t = PsdForm::new(HermitianMatrix::new(m).unwrap(), &tol).unwrap();
        let space = atoms(&ring).unwrap();
        let theta = |s: u32| t.quadratic(&space.indicator(s).unwrap()).unwrap();
        assert!((theta(0b11) - theta(0b01) - theta(0b10)).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(!is_induced_additive(&ring, &t, 20, &mut rng).unwrap());
    }

    #[test]
    fn decompose_examples() {
        let ring = two_point();
        let tol = Tolerance::default();
        let nu = Charge::from_atom_values(ring.clone(), &[3.0, 4.0]).unwrap();
        let mu = Charge::from_atom_values(ring.clone(), &[0.0, 1.0]).unwrap();
        let d = charge_decompose(&nu, &mu, &tol).unwrap();
        assert_eq!(d.ll.atom_values(), vec![0.0, 4.0]);
        assert_eq!(d.perp.atom_values(), vec![3.0, 0.0]);
        assert!(d.form_residual < 1e-12);

        let pos = Charge::from_atom_values(ring.clone(), &[0.5, 2.0]).unwrap();
        let d = charge_decompose(&nu, &pos, &tol).unwrap();
        assert_eq!(d.ll.values(), nu.values());
        assert!(d.perp.values().iter().all(|&v| v == 0.0));

        let d = charge_decompose(&nu, &Charge::zero(ring), &tol).unwrap();
        assert!(d.ll.values().iter().all(|&v| v == 0.0));
        assert_eq!(d.perp.values(), nu.values());
    }

    #[test]
    fn ring_mismatch() {
        let tol = Tolerance::default();
        let a = Charge::zero(two_point());
        let b = Charge::zero(Arc::new(SetRing::power_set(3).unwrap()));
        assert!(matches!(charge_decompose(&a, &b, &tol), Err(Error::RingMismatch)));
        // equal rings built separately are compatible
        let c = Charge::zero(two_point());
        assert!(charge_decompose(&a, &c, &tol).is_ok());
    }

    #[test]
    fn tiny_mu_atoms_follow_the_floor() {
        let ring = two_point();
        let tol = Tolerance::default();
        let nu = Charge::from_atom_values(ring.clone(), &[1.0, 1.0]).unwrap();
        let mu = Charge::from_atom_values(ring, &[1e-15, 1e-6]).unwrap();
        let d = charge_decompose(&nu, &mu, &tol).unwrap();
        assert_eq!(d.ll.atom_values(), vec![0.0, 1.0]);
    }
}
