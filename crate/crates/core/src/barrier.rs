//! Local errors paths, their additional-energy profiles, and the
//! constructive path that builds any error with at most two off-target
//! anyons present at a time.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::flow::{plan_error, SectorPlan, Traversal};
use crate::lattice::{Sector, Syndrome, TorusLattice};
use crate::masses::MassTable;
use crate::qudit::{neg_mod, PauliError, QuditStep};
use crate::scalar::Energy;

fn site_cost<E: Energy>(m: &MassTable<E>, sector: Sector, site: usize, inter: u32, fin: u32) -> E {
    if inter == 0 || inter == fin {
        E::zero()
    } else {
        m.mass(sector, site, inter)
    }
}

/// Energy of the intermediate syndrome counted only at sites whose charge
/// is nonzero and differs from the final one.
pub fn additional_energy<E: Energy>(inter: &Syndrome, fin: &Syndrome, m: &MassTable<E>) -> Result<E> {
    if inter.a.len() != fin.a.len() || inter.modulus() != fin.modulus() {
        return Err(Error::Dimension("intermediate and final syndromes differ in shape".into()));
    }
    if inter.a.len() != m.num_sites() || inter.modulus() != m.modulus() {
        return Err(Error::Dimension("syndrome does not match the mass table".into()));
    }
    let mut total = E::zero();
    for sector in Sector::BOTH {
        let (i, f) = (inter.sector(sector), fin.sector(sector));
        for s in 0..i.len() {
            total = total + site_cost(m, sector, s, i.get(s), f.get(s));
        }
    }
    Ok(total)
}

/// A sequence of single-qudit steps from the identity to `target`, with the
/// additional energy after every prefix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalErrorsPath<E> {
    #[serde(serialize_with = "serialize_display")]
    pub target: PauliError,
    pub steps: Vec<QuditStep>,
    /// `profile[t]` is the additional energy after `t` steps; `profile[0]`
    /// belongs to the identity.
    pub profile: Vec<E>,
    /// Number of sites contributing to `profile[t]`.
    pub violations: Vec<usize>,
}

pub(crate) fn serialize_display<S: serde::Serializer>(p: &PauliError, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(p)
}

impl<E: Energy> LocalErrorsPath<E> {
    /// Evaluate an arbitrary step sequence. Does not require it to reach
    /// `target`; see [`LocalErrorsPath::validate`].
    pub fn evaluate(target: PauliError, steps: Vec<QuditStep>, lattice: &TorusLattice, m: &MassTable<E>) -> Result<Self> {
        let d = target.modulus();
        if m.modulus() != d || m.num_sites() != lattice.n() {
            return Err(Error::Dimension("mass table does not match error and lattice".into()));
        }
        let fin = lattice.syndrome(&target)?;
        let mut cur = Syndrome::zero(d, lattice.n())?;
        let mut bad: BTreeSet<(Sector, usize)> = BTreeSet::new();
        let mut profile = Vec::with_capacity(steps.len() + 1);
        let mut violations = Vec::with_capacity(steps.len() + 1);
        profile.push(E::zero());
        violations.push(0);
        for st in &steps {
            if st.qudit >= lattice.num_qudits() {
                return Err(Error::Dimension(format!("step on qudit {} outside the lattice", st.qudit)));
            }
            for (sector, k) in [(Sector::Chargeon, st.z % d), (Sector::Fluxon, st.x % d)] {
                if k == 0 {
                    continue;
                }
                let e = lattice.ends(sector, st.qudit);
                let syn = cur.sector_mut(sector);
                syn.add_at(e.head, k);
                syn.add_at(e.tail, neg_mod(k, d));
                for s in [e.head, e.tail] {
                    let (c, f) = (cur.sector(sector).get(s), fin.sector(sector).get(s));
                    if c == 0 || c == f {
                        bad.remove(&(sector, s));
                    } else {
                        bad.insert((sector, s));
                    }
                }
            }
            let total = bad.iter().fold(E::zero(), |acc, &(sector, s)| {
                acc + site_cost(m, sector, s, cur.sector(sector).get(s), fin.sector(sector).get(s))
            });
            profile.push(total);
            violations.push(bad.len());
        }
        Ok(LocalErrorsPath {
            target,
            steps,
            profile,
            violations,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Largest additional energy along the path.
    pub fn barrier(&self) -> E {
        self.profile.iter().fold(E::zero(), |acc, &v| acc.max_of(v))
    }

    pub fn max_violations(&self) -> usize {
        self.violations.iter().copied().max().unwrap_or(0)
    }

    /// Every step is a nontrivial single-qudit Pauli and the steps compose
    /// to the target.
    pub fn validate(&self) -> Result<()> {
        let d = self.target.modulus();
        let mut acc = PauliError::identity(d, self.target.num_qudits())?;
        for (t, st) in self.steps.iter().enumerate() {
            if st.qudit >= acc.num_qudits() {
                return Err(Error::Dimension(format!("step {t} acts on qudit {} outside the system", st.qudit)));
            }
            if st.z % d == 0 && st.x % d == 0 {
                return Err(Error::InvalidFlow(format!("step {t} is the identity")));
            }
            acc.apply(*st);
        }
        if acc != self.target {
            return Err(Error::InvalidFlow("steps do not compose to the target".into()));
        }
        Ok(())
    }
}

/// Largest additional energy along `path`.
pub fn path_barrier<E: Energy>(path: &LocalErrorsPath<E>) -> E {
    path.barrier()
}

/// Order in which the strings of a simple tree are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeafOrder {
    /// By source site, ascending.
    #[default]
    Ascending,
    /// Shuffled with the given seed.
    Seeded(u64),
}

fn push_walk(out: &mut Vec<QuditStep>, sector: Sector, d: u32, walk: &[Traversal], weight: u32) {
    for t in walk {
        let e = if t.forward { weight % d } else { neg_mod(weight, d) };
        out.push(sector.step(t.qudit, e));
    }
}

/// Single-qudit steps building one sector, component by component: loops
/// first (create a pair, drag one anyon around), then every simple tree
/// string by string from its source towards the root.
pub fn sector_steps(plan: &SectorPlan, order: LeafOrder) -> Vec<QuditStep> {
    let d = plan.d;
    let mut out = Vec::new();
    let mut rng = match order {
        LeafOrder::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        LeafOrder::Ascending => None,
    };
    for comp in &plan.components {
        for c in comp.cycles.iter().chain(&comp.harmonic) {
            push_walk(&mut out, plan.sector, d, &c.steps, c.weight);
        }
        for tree in &comp.trees {
            let mut strings: Vec<_> = tree.strings.iter().collect();
            if let Some(rng) = rng.as_mut() {
                strings.shuffle(rng);
            }
            for s in strings {
                push_walk(&mut out, plan.sector, d, &s.steps, s.weight);
            }
        }
    }
    out
}

/// Steps for the whole error, chargeon sector before fluxon sector.
pub fn schedule_steps(p: &PauliError, lattice: &TorusLattice, order: LeafOrder) -> Result<Vec<QuditStep>> {
    let [z, x] = plan_error(p, lattice)?;
    let mut steps = sector_steps(&z, order);
    steps.extend(sector_steps(&x, order));
    Ok(steps)
}

/// The constructive path for `p`, with its profile under `m`.
pub fn schedule_path<E: Energy>(p: &PauliError, lattice: &TorusLattice, m: &MassTable<E>) -> Result<LocalErrorsPath<E>> {
    schedule_path_with(p, lattice, m, LeafOrder::Ascending)
}

pub fn schedule_path_with<E: Energy>(
    p: &PauliError,
    lattice: &TorusLattice,
    m: &MassTable<E>,
    order: LeafOrder,
) -> Result<LocalErrorsPath<E>> {
    let steps = schedule_steps(p, lattice, order)?;
    LocalErrorsPath::evaluate(p.clone(), steps, lattice, m)
}

/// Length of the constructive path and the analytic bound `8(d-1)N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathLengthStats {
    pub length: usize,
    pub bound: usize,
}

pub fn length_bound(d: u32, lattice: &TorusLattice) -> usize {
    8 * (d as usize - 1) * lattice.n()
}

pub fn path_length_stats(p: &PauliError, lattice: &TorusLattice) -> Result<PathLengthStats> {
    let steps = schedule_steps(p, lattice, LeafOrder::Ascending)?;
    Ok(PathLengthStats {
        length: steps.len(),
        bound: length_bound(p.modulus(), lattice),
    })
}

/// Largest constructive barrier over the adversarial fixtures and `samples`
/// random errors. Each random error draws from its own stream of `seed`, so
/// the result does not depend on the thread count.
pub fn hamiltonian_barrier_estimate<E: Energy>(
    lattice: &TorusLattice,
    m: &MassTable<E>,
    samples: usize,
    seed: u64,
) -> Result<E> {
    if samples == 0 {
        return Err(Error::Size("at least one sample is required".into()));
    }
    let d = m.modulus();
    let fixed = fixtures::adversarial_errors(lattice, d, seed)?;
    let from_fixtures = fixed
        .par_iter()
        .map(|p| schedule_path(p, lattice, m).map(|path| path.barrier()))
        .collect::<Result<Vec<E>>>()?;
    let from_random = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = fixtures::stream_rng(seed, i as u64);
            let p = fixtures::random_error(&mut rng, d, lattice)?;
            schedule_path(&p, lattice, m).map(|path| path.barrier())
        })
        .collect::<Result<Vec<E>>>()?;
    Ok(from_fixtures
        .into_iter()
        .chain(from_random)
        .fold(E::zero(), |acc, v| acc.max_of(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::DitVector;

    fn syn(d: u32, a: &[u32], b: &[u32]) -> Syndrome {
        Syndrome {
            a: DitVector::from_residues(d, a.iter().copied()).unwrap(),
            b: DitVector::from_residues(d, b.iter().copied()).unwrap(),
        }
    }

    #[test]
    fn additional_energy_examples() {
        let m = MassTable::uniform(5, 4, &[0.0, 1.0, 4.0, 4.0, 1.0]).unwrap();
        let f = syn(5, &[2, 2, 1, 0], &[0, 3, 0, 0]);
        assert_eq!(additional_energy(&f, &f, &m).unwrap(), 0.0);
        let zero = syn(5, &[0; 4], &[0; 4]);
        assert_eq!(additional_energy(&zero, &f, &m).unwrap(), 0.0);
        let fin = syn(5, &[2, 2, 0, 0], &[0; 4]);
        let inter = syn(5, &[1, 2, 0, 0], &[0; 4]);
        assert_eq!(additional_energy(&inter, &fin, &m).unwrap(), 1.0);
    }

    #[test]
    fn single_qudit_error_has_flat_profile() {
        let l = TorusLattice::new(3, 3).unwrap();
        let m = MassTable::uniform(3, 9, &[0.0, 1.0, 1.0]).unwrap();
        let p = PauliError::from_exponents(
            3,
            (0..18).map(|q| if q == 5 { 2 } else { 0 }).collect(),
            (0..18).map(|q| if q == 5 { 1 } else { 0 }).collect(),
        )
        .unwrap();
        let path = schedule_path(&p, &l, &m).unwrap();
        path.validate().unwrap();
        assert_eq!(path.len(), 2);
        assert!(path.profile.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn x_loop_of_length_eight_costs_two() {
        // X on the boundary of a 2x2 block of stars: a dual loop of length 8
        let l = TorusLattice::new(4, 4).unwrap();
        let m = MassTable::uniform(2, 16, &[0.0, 1.0]).unwrap();
        let mut p = PauliError::identity(2, l.num_qudits()).unwrap();
        for (x, y) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            p = p.compose(&l.star_operator(2, l.site_index(x, y), 1).unwrap()).unwrap();
        }
        assert_eq!(p.weight(), 8);
        let path = schedule_path(&p, &l, &m).unwrap();
        path.validate().unwrap();
        assert_eq!(path.len(), 8);
        assert_eq!(path.barrier(), 2.0);

        // create every pair first, then close them: far worse
        let mut bad = Vec::new();
        let support = p.support();
        for (i, &q) in support.iter().enumerate() {
            if i % 2 == 0 {
                bad.push(QuditStep { qudit: q, z: 0, x: 1 });
            }
        }
        for (i, &q) in support.iter().enumerate() {
            if i % 2 == 1 {
                bad.push(QuditStep { qudit: q, z: 0, x: 1 });
            }
        }
        let bad = LocalErrorsPath::evaluate(p.clone(), bad, &l, &m).unwrap();
        bad.validate().unwrap();
        assert!(bad.barrier() > 2.0, "barrier {}", bad.barrier());
    }

    #[test]
    fn empty_path() {
        let l = TorusLattice::new(2, 2).unwrap();
        let m = MassTable::uniform(2, 4, &[0.0, 1.0]).unwrap();
        let p = PauliError::identity(2, 8).unwrap();
        let path = schedule_path(&p, &l, &m).unwrap();
        assert!(path.is_empty());
        assert_eq!(path_barrier(&path), 0.0);
    }

    #[test]
    fn validator_catches_bad_paths() {
        let l = TorusLattice::new(2, 2).unwrap();
        let m = MassTable::uniform(3, 4, &[0.0, 1.0, 1.0]).unwrap();
        let mut p = PauliError::identity(3, 8).unwrap();
        p.z_mut().set(1, 1);
        let idle = vec![QuditStep { qudit: 1, z: 0, x: 0 }, QuditStep { qudit: 1, z: 1, x: 0 }];
        assert!(LocalErrorsPath::evaluate(p.clone(), idle, &l, &m).unwrap().validate().is_err());
        let short = vec![QuditStep { qudit: 2, z: 1, x: 0 }];
        assert!(LocalErrorsPath::evaluate(p, short, &l, &m).unwrap().validate().is_err());
    }

    #[test]
    fn length_stats() {
        let l = TorusLattice::new(4, 4).unwrap();
        let mut p = PauliError::identity(2, l.num_qudits()).unwrap();
        p.z_mut().set(3, 1);
        let s = path_length_stats(&p, &l).unwrap();
        assert_eq!(s.bound, 128);
        assert!(s.length <= 2);
        let mut p = PauliError::identity(3, l.num_qudits()).unwrap();
        for x in 0..4 {
            p.z_mut().set(l.horizontal_edge(x, 2), 1);
        }
        assert_eq!(path_length_stats(&p, &l).unwrap().length, 4);
    }

    #[test]
    fn estimate_is_deterministic_and_bounded() {
        let l = TorusLattice::new(3, 3).unwrap();
        let m = MassTable::uniform(5, 9, &[0.0, 1.0, 4.0, 4.0, 1.0]).unwrap();
        let a = hamiltonian_barrier_estimate(&l, &m, 50, 9).unwrap();
        let b = hamiltonian_barrier_estimate(&l, &m, 50, 9).unwrap();
        assert_eq!(a, b);
        assert!(a <= 8.0);
        let m2 = MassTable::uniform(2, 9, &[0.0, 1.0]).unwrap();
        assert_eq!(hamiltonian_barrier_estimate(&l, &m2, 20, 1).unwrap(), 2.0);
    }
}
